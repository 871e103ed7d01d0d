//! Acceptance suite. Prints one PASS/FAIL/SKIP line per criterion.
//!
//! Environment:
//! - `CKSVAR_ACCEPTANCE_TIER=smoke`: Monte Carlo criteria at 50 replications
//!   with tolerances widened by 50%; the default `full` tier uses 200.
//! - `CKSVAR_ACCEPTANCE_ONLY=1,2,6`: run a subset.
//! - `CKSVAR_ACCEPTANCE_STRICT=1`: exit non-zero when any criterion fails.
//! - `CKSVAR_APPLICATION_CONFIG=path.toml`: run configuration pointing at the
//!   1960q1-2018q2 application data; criterion 10 is skipped without it.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::path::{Path, PathBuf};
use std::time::Instant;

use cksvar::identify::identified_set_from;
use cksvar::{
    bivariate_bounds, fit_ml, fit_nested, girf, lambda_set, loglik_fapf, loglik_ksvar, loglik_sis, make_dgp,
    point_id, run_mc_estimation, run_mc_lr, simulate, structural_to_reduced, BoundsCase, Dgp, FilterKind,
    FitOptions, InitialConditions, IrfRequest, McConfig, ModelKind, ReducedForm, ShockSize,
    StructuralSolution, Uniforms,
};
use cksvar_cli::RunConfig;
use common::quadrature::grid_filter;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// criterion 1
const IDENTITY_TOL: f64 = 1e-10;
// criterion 2: three significant digits
const QUADRATURE_REL_TOL: f64 = 5e-4;
const QUADRATURE_PARTICLES: usize = 100_000;
// criterion 3
const BIAS_SE_MULTIPLE: f64 = 2.0;
const RMSE_BETA1: (f64, f64) = (0.25, 0.47);
// smoke tier: reference value +-50%
const RMSE_BETA1_REF: f64 = 0.356;
// criterion 4
const BOOT_SIZE_RANGE: (f64, f64) = (0.02, 0.09);
const NOMINAL: f64 = 0.05;
// criterion 6
const GRID_R: usize = 500;
// criterion 7
const LAMBDA_DRAWS: usize = 10_000;
// criterion 8
const GIRF_SE_MULTIPLE: f64 = 3.0;
const GIRF_HORIZON: usize = 24;
// criterion 9: two significant digits, relative to the larger estimate
const FD_STEPS: (f64, f64) = (1e-4, 1e-5);
const FD_REL_TOL: f64 = 0.005;
const FD_ABS_FLOOR: f64 = 1e-3;
// criterion 10
const LR_KSVAR_TARGET: f64 = 30.8;
const LR_CSVAR_TARGET: f64 = 26.4;
const LR_TOL: f64 = 2.0;
const FILTER_GAP_TOL: f64 = 0.5;

const PARTICLES: usize = 1000;
const T_LEN: usize = 250;
const MC_SEED: u64 = 2024;

#[derive(Clone, Copy)]
struct Tier {
    name: &'static str,
    n_rep: usize,
    /// Multiplier applied to the width of the Monte Carlo tolerances.
    widen: f64,
}

impl Tier {
    fn from_env() -> Self {
        match std::env::var("CKSVAR_ACCEPTANCE_TIER").as_deref() {
            Ok("smoke") => Tier {
                name: "smoke",
                n_rep: 50,
                widen: 1.5,
            },
            _ => Tier {
                name: "full",
                n_rep: 200,
                widen: 1.0,
            },
        }
    }

    fn range(&self, (lo, hi): (f64, f64)) -> (f64, f64) {
        (lo * (2.0 - self.widen), hi * self.widen)
    }
}

enum Status {
    Pass,
    Fail,
    Skip,
}

struct Outcome {
    status: Status,
    detail: String,
}

fn verdict(ok: bool, detail: String) -> Outcome {
    Outcome {
        status: if ok { Status::Pass } else { Status::Fail },
        detail,
    }
}

fn sim(rf: &ReducedForm, t: usize, seed: u64) -> cksvar::Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    simulate(rf, t, &InitialConditions::zeros(rf.dims()), &mut rng).unwrap().0
}

fn dgp_rf(d: Dgp) -> ReducedForm {
    structural_to_reduced(&make_dgp(d)).unwrap()
}

fn random_omega(rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let a = DMatrix::from_fn(2, 2, |_, _| rng.gen_range(-1.0..1.0));
    &a * a.transpose() + DMatrix::identity(2, 2) * 0.1
}

fn oracle_identity() -> Outcome {
    let mut models: Vec<ReducedForm> = [Dgp::One, Dgp::Two, Dgp::Three].map(dgp_rf).to_vec();
    for (i, (k, p)) in [(2, 1), (3, 1), (3, 2), (4, 3)].into_iter().enumerate() {
        models.push(common::random_rf(k, p, 500 + i as u64));
    }
    let mut worst = 0.0f64;
    let mut cases = 0;
    let mut censored = 0;
    for (i, rf) in models.iter().enumerate() {
        let rf = rf.without_latent_lags();
        let data = sim(&rf, 120, 40 + i as u64);
        censored += data.n_bound();
        let exact = loglik_ksvar(&rf, &data).unwrap().loglik;
        for m in [2, 7, 1000] {
            for seed in 0..3 {
                let (s, _) = loglik_sis(&rf, &data, &Uniforms::new(data.len(), m, seed)).unwrap();
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let f = loglik_fapf(&rf, &data, m, &mut rng).unwrap();
                worst = worst.max((s.loglik - exact).abs()).max((f.loglik - exact).abs());
                cases += 2;
            }
        }
    }
    verdict(
        worst <= IDENTITY_TOL,
        format!("{cases} evaluations, {censored} periods at the bound, max |diff| {worst:.2e} (tol {IDENTITY_TOL:.0e})"),
    )
}

fn quadrature() -> Outcome {
    let rf = common::toy_k2_rf();
    let data = common::toy_k2_data();
    let oracle = grid_filter(&rf, &data, 2000, -12.0).loglik;
    let (sis, _) = loglik_sis(&rf, &data, &Uniforms::new(5, QUADRATURE_PARTICLES, 101)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    let fapf = loglik_fapf(&rf, &data, QUADRATURE_PARTICLES, &mut rng).unwrap().loglik;
    let rel = |v: f64| (v - oracle).abs() / oracle.abs();
    let (rs, rf_) = (rel(sis.loglik), rel(fapf));
    verdict(
        rs <= QUADRATURE_REL_TOL && rf_ <= QUADRATURE_REL_TOL,
        format!(
            "oracle {oracle:.6}, SIS {:.6} (rel {rs:.1e}), FAPF {fapf:.6} (rel {rf_:.1e}), tol {QUADRATURE_REL_TOL:.0e}",
            sis.loglik
        ),
    )
}

fn mc_moments(tier: Tier) -> Outcome {
    let cfg = McConfig {
        n_rep: tier.n_rep,
        t_len: T_LEN,
        particles: PARTICLES,
        seed: MC_SEED,
        ..McConfig::new(Dgp::One)
    };
    let report = match run_mc_estimation(&cfg) {
        Ok(r) => r,
        Err(e) => return verdict(false, format!("Monte Carlo failed: {e}")),
    };
    let m = report.moments(ModelKind::Cksvar).unwrap();
    let n = report.diagnostics.succeeded as f64;
    let mult = BIAS_SE_MULTIPLE * tier.widen;
    let biased: Vec<String> = m
        .params
        .iter()
        .filter(|p| p.bias.abs() > mult * p.sd / n.sqrt())
        .map(|p| format!("{} ({:+.3}, {:.1} se)", p.name, p.bias, p.bias.abs() / (p.sd / n.sqrt())))
        .collect();
    let rmse = m.params.iter().find(|p| p.name == "beta1").unwrap().rmse;
    let (lo, hi) = if tier.widen > 1.0 {
        (RMSE_BETA1_REF * (2.0 - tier.widen), RMSE_BETA1_REF * tier.widen)
    } else {
        RMSE_BETA1
    };
    let rmse_ok = (lo..=hi).contains(&rmse);
    verdict(
        biased.is_empty() && rmse_ok,
        format!(
            "{} of {} replications; beta1 RMSE {rmse:.3} in [{lo:.3}, {hi:.3}]: {rmse_ok}; {} of {} parameters with |bias| > {mult:.1} se{}{}",
            report.diagnostics.succeeded,
            tier.n_rep,
            biased.len(),
            m.params.len(),
            if biased.is_empty() { "" } else { ": " },
            biased.join(", ")
        ),
    )
}

fn lr_config(tier: Tier, dgp: Dgp, tests: Vec<ModelKind>) -> McConfig {
    McConfig {
        n_rep: tier.n_rep,
        t_len: T_LEN,
        particles: PARTICLES,
        seed: MC_SEED,
        models: tests,
        ..McConfig::new(dgp)
    }
}

fn lr_size(tier: Tier) -> Outcome {
    let report = match run_mc_lr(&lr_config(tier, Dgp::One, vec![ModelKind::Ksvar, ModelKind::Csvar])) {
        Ok(r) => r,
        Err(e) => return verdict(false, format!("Monte Carlo failed: {e}")),
    };
    let (lo, hi) = tier.range(BOOT_SIZE_RANGE);
    let mut ok = true;
    let mut parts = Vec::new();
    for test in [ModelKind::Ksvar, ModelKind::Csvar] {
        let row = report.lr_row(test, NOMINAL).unwrap();
        ok &= (lo..=hi).contains(&row.bootstrap) && row.asymptotic > NOMINAL;
        parts.push(format!("{}: bootstrap {:.3}, asymptotic {:.3}", test.name(), row.bootstrap, row.asymptotic));
    }
    verdict(
        ok,
        format!(
            "{} of {} replications; {}; bootstrap range [{lo:.3}, {hi:.3}], asymptotic > {NOMINAL}",
            report.diagnostics.succeeded,
            tier.n_rep,
            parts.join("; ")
        ),
    )
}

fn power(tier: Tier) -> Outcome {
    let run = |dgp, test| -> Result<f64, String> {
        let r = run_mc_lr(&lr_config(tier, dgp, vec![test])).map_err(|e| e.to_string())?;
        Ok(r.lr_row(test, NOMINAL).unwrap().bootstrap)
    };
    match (run(Dgp::Three, ModelKind::Ksvar), run(Dgp::Two, ModelKind::Csvar)) {
        (Ok(ks), Ok(cs)) => verdict(
            ks > cs,
            format!("KSVAR test under DGP3 {ks:.3} vs CSVAR test under DGP2 {cs:.3} at {NOMINAL}"),
        ),
        (a, b) => verdict(false, format!("Monte Carlo failed: {a:?} {b:?}")),
    }
}

fn bounds_cross_validation() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let mut failures = Vec::new();
    let mut seen = [0usize; 4];
    let mut missed = [0usize; 4];
    let mut worst_interval = 0.0f64;
    for draw in 0..100 {
        let mut omega = random_omega(&mut rng);
        if draw % 10 == 9 {
            omega[(0, 1)] = 0.0;
            omega[(1, 0)] = 0.0;
        }
        let bt = rng.gen_range(-2.0..2.0);
        let b = bivariate_bounds(bt, &omega).unwrap();

        let g0 = omega[(0, 1)] / omega[(0, 0)];
        let prod = bt * g0;
        let unrestricted = bt == 0.0 || prod < 0.0;
        let predicates = [
            (BoundsCase::Unrestricted, unrestricted),
            (BoundsCase::HalfLine, !unrestricted && g0 == 0.0),
            (BoundsCase::Interval, !unrestricted && g0 != 0.0 && prod > 0.0 && prod <= 1.0),
            (BoundsCase::Infeasible, !unrestricted && prod > 1.0),
        ];
        let matched: Vec<BoundsCase> = predicates.iter().filter(|(_, on)| *on).map(|(c, _)| *c).collect();
        if matched != [b.case] {
            failures.push(format!("draw {draw}: predicates {matched:?}, reported {:?}", b.case));
            continue;
        }

        let set = identified_set_from(&DVector::from_element(1, bt), &omega, GRID_R, false).unwrap();
        let range = set.betabar_range(0);
        // an unbounded side has no finite tolerance; require the grid to
        // reach past both analytic anchors, beta~ and 1/gamma0
        let anchor = if g0 == 0.0 { bt.abs() } else { bt.abs().max(1.0 / g0.abs()) };
        let ok = match (b.case, range) {
            (BoundsCase::Interval, Some((lo, hi))) => {
                seen[0] += 1;
                let tol = 2.0 / (GRID_R + 1) as f64 * (b.hi - b.lo);
                let err = (lo - b.lo).abs().max((hi - b.hi).abs());
                worst_interval = worst_interval.max(err / (b.hi - b.lo));
                err <= tol
            }
            (BoundsCase::Unrestricted, Some((lo, hi))) => {
                seen[1] += 1;
                lo < -anchor && hi > anchor
            }
            (BoundsCase::HalfLine, Some((lo, hi))) => {
                seen[2] += 1;
                let tol = 1e-9 * (1.0 + bt.abs());
                if bt > 0.0 {
                    (lo - b.lo).abs() <= tol && hi > anchor
                } else {
                    (hi - b.hi).abs() <= tol && lo < -anchor
                }
            }
            (BoundsCase::Infeasible, None) => {
                seen[3] += 1;
                true
            }
            _ => false,
        };
        if !ok {
            missed[match b.case {
                BoundsCase::Interval => 0,
                BoundsCase::Unrestricted => 1,
                BoundsCase::HalfLine => 2,
                BoundsCase::Infeasible => 3,
            }] += 1;
            failures.push(format!("draw {draw}: {:?} [{:.4}, {:.4}] vs grid {range:?}", b.case, b.lo, b.hi));
        }
    }
    let shown: Vec<&str> = failures.iter().take(3).map(String::as_str).collect();
    verdict(
        failures.is_empty(),
        format!(
            "cases interval/unrestricted/half-line/infeasible = {seen:?}, mismatched {missed:?}; worst interval endpoint error {worst_interval:.4} of the range (tol {:.4}); {} mismatches{}{}",
            2.0 / (GRID_R + 1) as f64,
            failures.len(),
            if shown.is_empty() { "" } else { ", e.g. " },
            shown.join("; ")
        ),
    )
}

fn lambda_nonempty() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(707);
    let mut bad = 0;
    let mut worst = 0.0f64;
    for draw in 0..LAMBDA_DRAWS {
        let omega = random_omega(&mut rng);
        let (w11, w12) = (omega[(0, 0)], omega[(0, 1)]);
        // every 50th draw sits on omega11 = beta~ omega12, where D(0) = 0
        let bt = if draw % 50 == 0 && w12 != 0.0 { w11 / w12 } else { rng.gen_range(-3.0..3.0) };
        let set = lambda_set(bt, &omega, false).unwrap();
        let want = (w11 - bt * w12).powi(2);
        // the discriminant written out before simplification
        let direct = (w11 + bt * w12).powi(2) - 4.0 * bt * w11 * w12;
        let scale = 1.0 + w11 * w11 + (bt * w12).powi(2);
        let err = (set.discriminant(0.0) - want).abs().max((direct - want).abs()) / scale;
        worst = worst.max(err);
        let clamped = lambda_set(bt, &omega, true).unwrap();
        if set.discriminant(0.0) < 0.0 || err > 1e-12 || !set.contains(0.0) || clamped.intervals.is_empty() {
            bad += 1;
        }
    }
    verdict(
        bad == 0,
        format!("{LAMBDA_DRAWS} draws, {bad} violations, max relative |D(0) - (w11 - b w12)^2| {worst:.1e}"),
    )
}

/// Linear VAR responses from companion-matrix powers.
fn linear_irf(rf: &ReducedForm, u0: &DVector<f64>, horizon: usize) -> DMatrix<f64> {
    let d = rf.dims();
    let (k, p) = (d.k, d.p);
    let mut f = DMatrix::zeros(k * p, k * p);
    for s in 0..p {
        f.view_mut((0, s * k), (k, k)).copy_from(&rf.cbar.view((0, d.k0 + s * k), (k, k)));
    }
    for i in k..k * p {
        f[(i, i - k)] = 1.0;
    }
    let mut state = DVector::zeros(k * p);
    state.rows_mut(0, k).copy_from(u0);
    let mut out = DMatrix::zeros(horizon + 1, k);
    for h in 0..=horizon {
        out.row_mut(h).copy_from(&state.rows(0, k).transpose());
        state = &f * state;
    }
    out
}

/// Reduced-form impact of the policy shock.
fn impact(sol: &StructuralSolution, shock: f64) -> DVector<f64> {
    let k1 = sol.betabar.len();
    let gb = sol.gammabar.dot(&sol.betabar);
    let ibg = DMatrix::identity(k1, k1) - &sol.betabar * sol.gammabar.transpose();
    let u1 = ibg.try_inverse().unwrap() * &sol.betabar * shock;
    let mut u = DVector::zeros(k1 + 1);
    u.rows_mut(0, k1).copy_from(&u1);
    u[k1] = shock / (1.0 - gb);
    u
}

fn girf_linear_limit() -> Outcome {
    let mut models: Vec<ReducedForm> = [Dgp::One, Dgp::Two, Dgp::Three].map(dgp_rf).to_vec();
    for seed in 1..=3 {
        let mut rf = common::random_rf(3, 2, seed);
        rf.beta_tilde = DVector::from_row_slice(&[0.3, -0.2]);
        models.push(rf);
    }
    let mut worst = 0.0f64;
    let mut checked = 0;
    for rf in &mut models {
        rf.bound = -1e9;
        let sol = point_id(rf).unwrap();
        let req = IrfRequest {
            horizon: GIRF_HORIZON,
            shock: ShockSize::OneSd,
            draws: PARTICLES,
            seed: 8,
            ..IrfRequest::new(InitialConditions::zeros(rf.dims()))
        };
        let out = girf(rf, &sol, &req).unwrap();
        let want = linear_irf(rf, &impact(&sol, sol.a22bar_inv), GIRF_HORIZON);
        for h in 0..=GIRF_HORIZON {
            for i in 0..rf.dims().k {
                let tol = GIRF_SE_MULTIPLE * out.std_err[(h, i)] + 1e-9 * (1.0 + want[(h, i)].abs());
                worst = worst.max((out.responses[(h, i)] - want[(h, i)]).abs() / tol);
                checked += 1;
            }
        }
    }
    verdict(
        worst <= 1.0,
        format!("{} models, {checked} responses, worst |diff| / tolerance {worst:.3}", models.len()),
    )
}

fn fd_smoothness() -> Outcome {
    let mut worst = 0.0f64;
    let mut coords = 0;
    let mut bad = Vec::new();
    for point in 0..20u64 {
        let (k, p) = [(2, 1), (3, 1), (3, 2), (2, 2)][point as usize % 4];
        let rf = common::random_rf(k, p, 900 + point);
        let data = sim(&rf, 100, 950 + point);
        let uni = Uniforms::new(data.len(), PARTICLES, point);
        let th = rf.to_vec();
        let f = |v: &DVector<f64>| {
            let r = ReducedForm::from_vec(v, rf.dims(), rf.bound).unwrap();
            loglik_sis(&r, &data, &uni).unwrap().0.loglik
        };
        for i in 0..th.len() {
            let fd = |h: f64| {
                let mut up = th.clone();
                up[i] += h;
                let mut dn = th.clone();
                dn[i] -= h;
                (f(&up) - f(&dn)) / (2.0 * h)
            };
            let (a, b) = (fd(FD_STEPS.0), fd(FD_STEPS.1));
            let scale = a.abs().max(b.abs()).max(FD_ABS_FLOOR);
            let r = (a - b).abs() / (FD_REL_TOL * scale);
            worst = worst.max(r);
            coords += 1;
            if r > 1.0 {
                bad.push(format!("point {point} param {i}: {a:.6} vs {b:.6}"));
            }
        }
    }
    verdict(
        bad.is_empty(),
        format!(
            "20 points, {coords} coordinates, worst |g1 - g2| / ({FD_REL_TOL} max|g|) {worst:.3}{}{}",
            if bad.is_empty() { "" } else { "; " },
            bad.iter().take(3).cloned().collect::<Vec<_>>().join("; ")
        ),
    )
}

fn workspace_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn application() -> Outcome {
    let Ok(cfg_path) = std::env::var("CKSVAR_APPLICATION_CONFIG") else {
        return Outcome {
            status: Status::Skip,
            detail: "set CKSVAR_APPLICATION_CONFIG to a run configuration for the application data".into(),
        };
    };
    let run = || -> Result<String, String> {
        let cfg = RunConfig::load(Path::new(&cfg_path)).map_err(|e| e.to_string())?;
        let mut path = cfg.data.path.clone().ok_or("the configuration names no data file")?;
        if path.is_relative() {
            path = workspace_root().join(path);
        }
        let ing = cksvar_cli::ingest(&path, &cfg.data, cfg.model.lags).map_err(|e| e.to_string())?;
        let opts = FitOptions {
            particles: PARTICLES,
            seed: cfg.model.seed,
            ..Default::default()
        };
        let (ks, u1) = fit_nested(&ing.dataset, ModelKind::Ksvar, FilterKind::Sis, &opts).map_err(|e| e.to_string())?;
        let (cs, u2) = fit_nested(&ing.dataset, ModelKind::Csvar, FilterKind::Sis, &opts).map_err(|e| e.to_string())?;
        let best = if u1.loglik >= u2.loglik { u1 } else { u2 };
        let lr_ks = 2.0 * (best.loglik - ks.loglik);
        let lr_cs = 2.0 * (best.loglik - cs.loglik);
        let fapf_opts = FitOptions {
            starts: vec![best.psi_hat.clone()],
            ..opts
        };
        let fapf = fit_ml(&ing.dataset, ModelKind::Cksvar, FilterKind::Fapf, &fapf_opts).map_err(|e| e.to_string())?;
        let gap = (fapf.loglik - best.loglik).abs();
        let ok = (lr_ks - LR_KSVAR_TARGET).abs() <= LR_TOL
            && (lr_cs - LR_CSVAR_TARGET).abs() <= LR_TOL
            && gap < FILTER_GAP_TOL;
        let detail = format!(
            "{} observations; LR(KSVAR) {lr_ks:.2} vs {LR_KSVAR_TARGET}, LR(CSVAR) {lr_cs:.2} vs {LR_CSVAR_TARGET} (tol {LR_TOL}); CKSVAR loglik SIS {:.2}, FAPF {:.2}, gap {gap:.3} (tol {FILTER_GAP_TOL})",
            ing.report.observations, best.loglik, fapf.loglik
        );
        if ok {
            Ok(detail)
        } else {
            Err(detail)
        }
    };
    match run() {
        Ok(d) => verdict(true, d),
        Err(d) => verdict(false, d),
    }
}

fn main() {
    let tier = Tier::from_env();
    let only: Option<Vec<usize>> = std::env::var("CKSVAR_ACCEPTANCE_ONLY")
        .ok()
        .map(|s| s.split(',').filter_map(|x| x.trim().parse().ok()).collect());
    let criteria: Vec<(usize, &str, Box<dyn Fn() -> Outcome>)> = vec![
        (1, "oracle identity with no latent lags", Box::new(oracle_identity)),
        (2, "particle filters vs quadrature", Box::new(quadrature)),
        (3, "Monte Carlo moments, DGP1", Box::new(move || mc_moments(tier))),
        (4, "LR size with warp-speed bootstrap, DGP1", Box::new(move || lr_size(tier))),
        (5, "power ordering, DGP3 vs DGP2", Box::new(move || power(tier))),
        (6, "grid identified set vs bivariate bounds", Box::new(bounds_cross_validation)),
        (7, "lambda set non-empty", Box::new(lambda_nonempty)),
        (8, "GIRF linear limit", Box::new(girf_linear_limit)),
        (9, "finite-difference smoothness", Box::new(fd_smoothness)),
        (10, "application replication", Box::new(application)),
    ];
    println!("acceptance tier {} ({} replications, tolerance widening {})", tier.name, tier.n_rep, tier.widen);
    let mut failed = 0;
    for (id, name, check) in criteria {
        if only.as_ref().is_some_and(|o| !o.contains(&id)) {
            continue;
        }
        let start = Instant::now();
        let out = check();
        let tag = match out.status {
            Status::Pass => "PASS",
            Status::Fail => {
                failed += 1;
                "FAIL"
            }
            Status::Skip => "SKIP",
        };
        println!("{tag} {id:>2} {name} [{:.1}s]: {}", start.elapsed().as_secs_f64(), out.detail);
    }
    println!("acceptance: {failed} failing");
    if failed > 0 && std::env::var("CKSVAR_ACCEPTANCE_STRICT").as_deref() == Ok("1") {
        std::process::exit(1);
    }
}
