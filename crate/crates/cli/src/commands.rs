//! Subcommands. Each writes its tables into the output directory and
//! returns the list of files it produced.

use std::path::{Path, PathBuf};

use cksvar::estimate::restriction_count;
use cksvar::irf::IrfBundle;
use cksvar::optim::Status;
use cksvar::{
    bivariate_bounds, bootstrap_bands, bootstrap_lr, condition_state, fit_ml, fit_nested, girf, identified_set,
    irf_identified_set, lambda_set, lr_test, make_dgp, point_id, run_mc_estimation, run_mc_lr,
    simulate_with_burn_in, structural_to_reduced, BetaBounds, FilterKind, FitOptions, FitResult, IrfRequest,
    LambdaSet, McConfig, ModelKind, ReducedForm, StructuralParams,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::data::{export, export_latent, ingest, quarter_labels, IngestReport, Ingested};
use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Estimate,
    Test,
    Irf,
    Idset,
    Mc,
    Simulate,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Estimate => "estimate",
            Command::Test => "test",
            Command::Irf => "irf",
            Command::Idset => "idset",
            Command::Mc => "mc",
            Command::Simulate => "simulate",
        }
    }

    pub fn reads_data(&self) -> bool {
        !matches!(self, Command::Mc | Command::Simulate)
    }
}

/// Seeds derived from `model.seed`, one per source of randomness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Seeds {
    /// Common random numbers of every likelihood evaluation; also the
    /// simulation and Monte Carlo seed.
    pub fit: u64,
    pub bootstrap: u64,
    pub irf: u64,
    pub filter: u64,
}

impl Seeds {
    pub fn from_base(s: u64) -> Self {
        Self {
            fit: s,
            bootstrap: s.wrapping_add(1),
            irf: s.wrapping_add(2),
            filter: s.wrapping_add(3),
        }
    }
}

pub(crate) struct Outputs {
    dir: PathBuf,
    pub files: Vec<String>,
    pub inputs: Vec<PathBuf>,
}

impl Outputs {
    pub fn new(dir: &Path) -> Self {
        Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
            inputs: Vec::new(),
        }
    }

    fn path(&mut self, name: &str) -> PathBuf {
        self.files.push(name.to_string());
        self.dir.join(name)
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> CliResult<()> {
        let path = self.path(name);
        let mut text = serde_json::to_string_pretty(value).expect("serializable output");
        text.push('\n');
        std::fs::write(&path, text).map_err(|e| CliError::io(&path, e))
    }

    fn csv<T: Serialize>(&mut self, name: &str, rows: &[T]) -> CliResult<()> {
        let path = self.path(name);
        let err = |e: csv::Error| CliError::Config(format!("cannot write {}: {e}", path.display()));
        let mut w = csv::Writer::from_path(&path).map_err(err)?;
        for r in rows {
            w.serialize(r).map_err(err)?;
        }
        w.flush().map_err(|e| CliError::io(&path, e))
    }
}

fn fit_options(cfg: &RunConfig, compute_vcov: bool) -> FitOptions {
    FitOptions {
        particles: cfg.model.particles,
        seed: Seeds::from_base(cfg.model.seed).fit,
        compute_vcov,
        ..Default::default()
    }
}

/// KSVAR has an exact likelihood; the other models use the configured filter.
fn filter_for(cfg: &RunConfig, kind: ModelKind) -> FilterKind {
    if kind == ModelKind::Ksvar {
        FilterKind::Analytic
    } else {
        cfg.model.filter
    }
}

#[derive(Serialize)]
struct DataSummary<'a> {
    path: String,
    series: &'a [String],
    constrained: &'a str,
    bound: f64,
    bind_tol: f64,
    lags: usize,
    first_date: &'a str,
    last_date: &'a str,
    #[serde(flatten)]
    report: &'a IngestReport,
}

fn load_data(cfg: &RunConfig, out: &mut Outputs) -> CliResult<Ingested> {
    cfg.validate_data()?;
    let path = cfg.data.path.clone().expect("validated");
    let ing = ingest(&path, &cfg.data, cfg.model.lags)?;
    let r = &ing.report;
    log::info!(
        "{}: {} rows, {} observations, {} at the bound ({:.1}%)",
        path.display(),
        r.rows,
        r.observations,
        r.at_bound,
        100.0 * r.share_at_bound
    );
    for w in &r.warnings {
        log::warn!("{w}");
    }
    out.json(
        "data_summary.json",
        &DataSummary {
            path: path.display().to_string(),
            series: &ing.names,
            constrained: ing.names.last().expect("at least two series"),
            bound: cfg.data.bound,
            bind_tol: cfg.data.bind_tol,
            lags: cfg.model.lags,
            first_date: &ing.dates[0],
            last_date: ing.dates.last().expect("nonempty"),
            report: r,
        },
    )?;
    out.inputs.push(path);
    Ok(ing)
}

fn fit_one(cfg: &RunConfig, ing: &Ingested, kind: ModelKind, vcov: bool) -> CliResult<FitResult> {
    let filter = filter_for(cfg, kind);
    log::info!("fitting {} ({})", kind.name(), filter.name());
    let fit = fit_ml(&ing.dataset, kind, filter, &fit_options(cfg, vcov && filter != FilterKind::Fapf))?;
    if !fit.converged() {
        log::warn!("{} fit did not converge: {:?}", kind.name(), fit.trace.status);
    }
    Ok(fit)
}

#[derive(Serialize)]
struct ParamRow<'a> {
    model: &'a str,
    param: &'a str,
    estimate: f64,
    std_err: Option<f64>,
}

#[derive(Serialize)]
struct FitSummary<'a> {
    model: &'a str,
    filter: &'a str,
    particles: usize,
    seed: u64,
    loglik: f64,
    converged: bool,
    status: Status,
    iterations: usize,
    evaluations: usize,
    grad_norm: f64,
    free_parameters: usize,
    vcov_flagged: Option<bool>,
    params: Vec<ParamRow<'a>>,
}

fn summarize<'a>(fit: &'a FitResult, names: &'a [String]) -> FitSummary<'a> {
    let est = fit.psi_hat.to_vec();
    let se = fit.std_errors();
    FitSummary {
        model: fit.model_kind.name(),
        filter: fit.filter_kind.name(),
        particles: fit.particles,
        seed: fit.seed,
        loglik: fit.loglik,
        converged: fit.converged(),
        status: fit.trace.status,
        iterations: fit.trace.iterations,
        evaluations: fit.trace.evaluations,
        grad_norm: fit.trace.grad_norm,
        free_parameters: fit.n_free(),
        vcov_flagged: fit.vcov.as_ref().map(|v| v.flagged),
        params: names
            .iter()
            .enumerate()
            .map(|(i, n)| ParamRow {
                model: fit.model_kind.name(),
                param: n,
                estimate: est[i],
                std_err: se.as_ref().map(|s| s[i]),
            })
            .collect(),
    }
}

pub(crate) fn estimate(cfg: &RunConfig, out: &mut Outputs) -> CliResult<()> {
    let ing = load_data(cfg, out)?;
    let names = ReducedForm::param_names(ing.dataset.dims());
    let fits = cfg
        .model
        .kinds
        .iter()
        .map(|&k| fit_one(cfg, &ing, k, true))
        .collect::<CliResult<Vec<_>>>()?;
    let summaries: Vec<FitSummary> = fits.iter().map(|f| summarize(f, &names)).collect();
    let rows: Vec<&ParamRow> = summaries.iter().flat_map(|s| &s.params).collect();
    out.csv("params.csv", &rows)?;
    out.json("fit.json", &summaries)
}

#[derive(Serialize)]
struct TestRow {
    model: &'static str,
    loglik: f64,
    restrictions: usize,
    lr: Option<f64>,
    p_asymptotic: Option<f64>,
    p_bootstrap: Option<f64>,
    bootstrap_replications: usize,
    bootstrap_dropped: usize,
    converged: bool,
}

#[derive(Serialize)]
struct TestTable<'a> {
    observations: usize,
    filter: &'a str,
    particles: usize,
    rows: &'a [TestRow],
    warnings: Vec<String>,
}

pub(crate) fn test(cfg: &RunConfig, out: &mut Outputs) -> CliResult<()> {
    let ing = load_data(cfg, out)?;
    let data = &ing.dataset;
    let mut restricted: Vec<ModelKind> = cfg.model.kinds.iter().copied().filter(|k| *k != ModelKind::Cksvar).collect();
    if restricted.is_empty() {
        restricted = vec![ModelKind::Ksvar, ModelKind::Csvar];
    }
    let filter = filter_for(cfg, ModelKind::Cksvar);
    let opts = fit_options(cfg, false);
    let mut pairs = Vec::new();
    for &r in &restricted {
        log::info!("fitting {} and CKSVAR from its optimum", r.name());
        pairs.push(fit_nested(data, r, filter, &opts)?);
    }
    // every test uses the best unrestricted optimum found
    let best_u = pairs
        .iter()
        .map(|(_, u)| u)
        .max_by(|a, b| a.loglik.total_cmp(&b.loglik))
        .expect("at least one test")
        .clone();
    let mut rows = vec![TestRow {
        model: ModelKind::Cksvar.name(),
        loglik: best_u.loglik,
        restrictions: 0,
        lr: None,
        p_asymptotic: None,
        p_bootstrap: None,
        bootstrap_replications: 0,
        bootstrap_dropped: 0,
        converged: best_u.converged(),
    }];
    let mut warnings = Vec::new();
    let seeds = Seeds::from_base(cfg.model.seed);
    for (fit_r, _) in &pairs {
        let res = if cfg.bootstrap.replications > 0 {
            log::info!("bootstrapping {} test, B = {}", fit_r.model_kind.name(), cfg.bootstrap.replications);
            bootstrap_lr(data, fit_r, &best_u, cfg.bootstrap.replications, seeds.bootstrap, &opts)?
        } else {
            lr_test(&best_u, fit_r, None)?
        };
        if let Some(w) = &res.warning {
            log::warn!("{}: {w}", fit_r.model_kind.name());
            warnings.push(format!("{}: {w}", fit_r.model_kind.name()));
        }
        rows.push(TestRow {
            model: fit_r.model_kind.name(),
            loglik: fit_r.loglik,
            restrictions: restriction_count(fit_r.model_kind, data.dims()),
            lr: Some(res.lr_stat),
            p_asymptotic: Some(res.p_asym),
            p_bootstrap: res.p_boot,
            bootstrap_replications: res.b,
            bootstrap_dropped: res.dropped,
            converged: fit_r.converged(),
        });
    }
    out.csv("tests.csv", &rows)?;
    out.json(
        "tests.json",
        &TestTable {
            observations: data.len(),
            filter: filter.name(),
            particles: cfg.model.particles,
            rows: &rows,
            warnings,
        },
    )
}

#[derive(Serialize)]
struct IrfRow<'a> {
    xi: f64,
    root: usize,
    horizon: usize,
    variable: &'a str,
    response: f64,
    std_err: Option<f64>,
    lower: Option<f64>,
    upper: Option<f64>,
}

fn irf_rows<'a>(bundles: &[IrfBundle], names: &'a [String], shadow: &'a str) -> Vec<IrfRow<'a>> {
    let mut rows = Vec::new();
    for b in bundles {
        for h in 0..b.responses.nrows() {
            for (j, n) in names.iter().enumerate() {
                rows.push(IrfRow {
                    xi: b.xi,
                    root: b.root_index,
                    horizon: h,
                    variable: n,
                    response: b.responses[(h, j)],
                    std_err: Some(b.std_err[(h, j)]),
                    lower: b.band.as_ref().map(|x| x.lower[(h, j)]),
                    upper: b.band.as_ref().map(|x| x.upper[(h, j)]),
                });
            }
            rows.push(IrfRow {
                xi: b.xi,
                root: b.root_index,
                horizon: h,
                variable: shadow,
                response: b.shadow[h],
                std_err: None,
                lower: None,
                upper: None,
            });
        }
    }
    rows
}

fn irf_request(cfg: &RunConfig, ing: &Ingested, rf: &ReducedForm) -> CliResult<(IrfRequest, usize)> {
    let seeds = Seeds::from_base(cfg.model.seed);
    let t = cfg.irf.period.unwrap_or(ing.dataset.len() + 1);
    let filter = match cfg.model.filter {
        FilterKind::Analytic if !rf.is_ksvar(0.0) => FilterKind::Sis,
        f => f,
    };
    let state = condition_state(rf, &ing.dataset, t, filter, cfg.model.particles, seeds.filter)?;
    let req = IrfRequest {
        horizon: cfg.irf.horizon,
        shock: cfg.irf.shock,
        draws: cfg.irf.draws,
        seed: seeds.irf,
        ..IrfRequest::new(state)
    };
    Ok((req, t))
}

#[derive(Serialize)]
struct IrfSummary<'a> {
    model: &'a str,
    period: usize,
    period_date: Option<&'a str>,
    horizon: usize,
    draws: usize,
    shock: f64,
    betabar: Vec<f64>,
    gammabar: Vec<f64>,
    a22bar_inv: f64,
    band_coverage: Option<f64>,
    band_replications: Option<usize>,
    band_dropped: Option<usize>,
}

pub(crate) fn irf(cfg: &RunConfig, out: &mut Outputs) -> CliResult<()> {
    let ing = load_data(cfg, out)?;
    let kind = cfg.model.kinds[0];
    let fit = fit_one(cfg, &ing, kind, false)?;
    let sol = point_id(&fit.psi_hat)?;
    let (req, t) = irf_request(cfg, &ing, &fit.psi_hat)?;
    let mut bundle = girf(&fit.psi_hat, &sol, &req)?;
    if cfg.bootstrap.replications > 0 {
        log::info!("bootstrap bands, B = {}", cfg.bootstrap.replications);
        let seeds = Seeds::from_base(cfg.model.seed);
        bundle.band = Some(bootstrap_bands(
            &ing.dataset,
            &fit,
            &req,
            cfg.bootstrap.replications,
            cfg.bootstrap.coverage,
            seeds.bootstrap,
            &fit_options(cfg, false),
        )?);
    }
    let shadow = format!("{}_shadow", ing.names.last().expect("nonempty"));
    out.csv("irf.csv", &irf_rows(std::slice::from_ref(&bundle), &ing.names, &shadow))?;
    out.json(
        "irf.json",
        &IrfSummary {
            model: kind.name(),
            period: t,
            period_date: ing.dates.get(cfg.model.lags + t - 1).map(String::as_str),
            horizon: req.horizon,
            draws: req.draws,
            shock: bundle.shock,
            betabar: sol.betabar.iter().copied().collect(),
            gammabar: sol.gammabar.iter().copied().collect(),
            a22bar_inv: sol.a22bar_inv,
            band_coverage: bundle.band.as_ref().map(|b| b.coverage),
            band_replications: bundle.band.as_ref().map(|b| b.replications),
            band_dropped: bundle.band.as_ref().map(|b| b.dropped),
        },
    )
}

#[derive(Serialize)]
struct SolutionRow<'a> {
    xi: f64,
    root: usize,
    quantity: &'static str,
    series: &'a str,
    value: f64,
}

#[derive(Serialize)]
struct Range<'a> {
    series: &'a str,
    lo: f64,
    hi: f64,
}

#[derive(Serialize)]
struct IdsetSummary<'a> {
    model: &'a str,
    grid: usize,
    sign_restricted: bool,
    solutions: usize,
    dropped_incoherent: usize,
    dropped_singular: usize,
    dropped_sign: usize,
    unidentified: bool,
    betabar_ranges: Vec<Range<'a>>,
    beta_tilde: Vec<f64>,
    bivariate_bounds: Option<BetaBounds>,
    lambda_set: Option<LambdaSet>,
}

pub(crate) fn idset(cfg: &RunConfig, out: &mut Outputs) -> CliResult<()> {
    let ing = load_data(cfg, out)?;
    let kind = cfg.model.kinds[0];
    let fit = fit_one(cfg, &ing, kind, false)?;
    let rf = &fit.psi_hat;
    let set = identified_set(rf, cfg.idset.xi_grid, cfg.idset.sign_restrict)?;
    let k1 = rf.dims().k1();
    let names = &ing.names;
    let policy = names[k1].as_str();
    let mut rows = Vec::new();
    for s in &set.solutions {
        let row = |quantity, series, value| SolutionRow {
            xi: s.xi,
            root: s.root_index,
            quantity,
            series,
            value,
        };
        for i in 0..k1 {
            rows.push(row("betabar", names[i].as_str(), s.betabar[i]));
        }
        for i in 0..k1 {
            rows.push(row("gammabar", names[i].as_str(), s.gammabar[i]));
        }
        rows.push(row("a22bar_inv", policy, s.a22bar_inv));
        rows.push(row("impact_y2", policy, s.impact_y2()));
        rows.push(row("coherency", policy, s.coherency()));
    }
    out.csv("idset_solutions.csv", &rows)?;
    let (bounds, lambda) = if k1 == 1 {
        let omega = rf.omega();
        (
            Some(bivariate_bounds(rf.beta_tilde[0], &omega)?),
            Some(lambda_set(rf.beta_tilde[0], &omega, false)?),
        )
    } else {
        (None, None)
    };
    out.json(
        "idset.json",
        &IdsetSummary {
            model: kind.name(),
            grid: set.grid,
            sign_restricted: set.sign_restricted,
            solutions: set.solutions.len(),
            dropped_incoherent: set.dropped_incoherent,
            dropped_singular: set.dropped_singular,
            dropped_sign: set.dropped_sign,
            unidentified: set.unidentified,
            betabar_ranges: (0..k1)
                .filter_map(|i| set.betabar_range(i).map(|(lo, hi)| Range { series: &names[i], lo, hi }))
                .collect(),
            beta_tilde: rf.beta_tilde.iter().copied().collect(),
            bivariate_bounds: bounds,
            lambda_set: lambda,
        },
    )?;
    if cfg.idset.irf {
        let (req, _) = irf_request(cfg, &ing, rf)?;
        let bundles = irf_identified_set(rf, &set, &req)?;
        let shadow = format!("{policy}_shadow");
        out.csv("idset_irf.csv", &irf_rows(&bundles, names, &shadow))?;
    }
    Ok(())
}

#[derive(Serialize)]
struct LrCsvRow {
    test: &'static str,
    df: usize,
    level: f64,
    asymptotic: f64,
    bootstrap: f64,
    bootstrap_critical_value: f64,
}

pub(crate) fn mc(cfg: &RunConfig, out: &mut Outputs) -> CliResult<()> {
    let m = &cfg.mc;
    let base = McConfig {
        t_len: m.t_len,
        n_rep: m.n_rep,
        particles: cfg.model.particles,
        models: cfg.model.kinds.clone(),
        filter: cfg.model.filter,
        seed: Seeds::from_base(cfg.model.seed).fit,
        burn_in: m.burn_in,
        ..McConfig::new(m.dgp)
    };
    log::info!("Monte Carlo estimation: {} replications of T = {}", m.n_rep, m.t_len);
    let est = run_mc_estimation(&base)?;
    out.csv("mc_moments.csv", &est.moment_records())?;
    out.json("mc_estimation.json", &est)?;
    if !m.tests.is_empty() {
        log::info!("Monte Carlo LR tests: {} replications", m.n_rep);
        let lr = run_mc_lr(&McConfig {
            models: m.tests.clone(),
            ..base
        })?;
        let rows: Vec<LrCsvRow> = lr
            .lr
            .iter()
            .map(|r| LrCsvRow {
                test: r.test.name(),
                df: r.df,
                level: r.level,
                asymptotic: r.asymptotic,
                bootstrap: r.bootstrap,
                bootstrap_critical_value: r.bootstrap_critical_value,
            })
            .collect();
        out.csv("mc_lr.csv", &rows)?;
        out.json("mc_lr.json", &lr)?;
    }
    Ok(())
}

fn load_params(path: &Path) -> CliResult<StructuralParams> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

pub(crate) fn simulate(cfg: &RunConfig, out: &mut Outputs) -> CliResult<()> {
    let s = &cfg.simulate;
    let params = match &s.params {
        Some(p) => {
            out.inputs.push(p.clone());
            load_params(p)?
        }
        None => make_dgp(s.dgp),
    };
    let rf = structural_to_reduced(&params)?;
    let dims = rf.dims();
    if dims.k0 != 1 {
        return Err(CliError::Config("simulation export supports a constant as the only exogenous regressor".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(Seeds::from_base(cfg.model.seed).fit);
    let (data, latent) = simulate_with_burn_in(&rf, s.t_len, s.burn_in, &mut rng)?;
    let names: Vec<String> = if cfg.data.columns.len() == dims.k {
        cfg.data.columns.clone()
    } else {
        (1..=dims.k).map(|i| format!("y{i}")).collect()
    };
    let rows = dims.p + s.t_len;
    let dates = match &s.start {
        Some(start) => quarter_labels(start, rows)?,
        None => (1..=rows).map(|i| i.to_string()).collect(),
    };
    log::info!("simulated {} periods, {} at the bound", data.len(), data.n_bound());
    let path = out.path("simulated.csv");
    export(&path, &data, &names, &dates)?;
    let path = out.path("latent.csv");
    export_latent(&path, &latent, &dates[dims.p..])
}
