//! Maximum-likelihood estimation of the three reduced-form families,
//! numerical standard errors, likelihood-ratio tests and the parametric
//! bootstrap.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};
use crate::likelihood::{loglik_fapf, loglik_gradient, FilterKind, Gradient, Uniforms};
use crate::model::{csvar_restrictions, ksvar_restrictions, Dims, ModelKind, ReducedForm};
use crate::optim::{self, AnnealOptions, BfgsOptions, Status};
use crate::simulate::{simulate, Dataset, InitialConditions};

#[derive(Debug, Clone)]
pub struct FitOptions {
    /// Particles for SIS/FAPF evaluations.
    pub particles: usize,
    /// Seed of the common random numbers held fixed within a fit.
    pub seed: u64,
    pub bfgs: BfgsOptions,
    pub anneal: AnnealOptions,
    /// Starting values. When empty, the kinked fit (from OLS) is used.
    pub starts: Vec<ReducedForm>,
    pub compute_vcov: bool,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            particles: crate::likelihood::DEFAULT_PARTICLES,
            seed: 0,
            bfgs: BfgsOptions::default(),
            anneal: AnnealOptions::default(),
            starts: Vec::new(),
            compute_vcov: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimTrace {
    pub iterations: usize,
    pub evaluations: usize,
    pub status: Status,
    /// Gradient norm of the per-observation log-likelihood.
    pub grad_norm: f64,
    pub starts_tried: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Vcov {
    /// Covariance in the full parameter layout; restricted entries are zero
    /// and tied entries are copies.
    pub matrix: DMatrix<f64>,
    /// Set when the Hessian was near-singular or indefinite and a
    /// pseudo-inverse was used.
    pub flagged: bool,
    pub asymmetry: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub psi_hat: ReducedForm,
    pub loglik: f64,
    pub vcov: Option<Vcov>,
    pub model_kind: ModelKind,
    pub filter_kind: FilterKind,
    pub trace: OptimTrace,
    pub particles: usize,
    pub seed: u64,
}

impl FitResult {
    pub fn converged(&self) -> bool {
        self.trace.status.converged()
    }

    pub fn std_errors(&self) -> Option<DVector<f64>> {
        self.vcov
            .as_ref()
            .map(|v| DVector::from_fn(v.matrix.nrows(), |i, _| v.matrix[(i, i)].max(0.0).sqrt()))
    }

    pub fn n_free(&self) -> usize {
        ParamMap::new(self.model_kind, self.psi_hat.dims()).free.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub lr_stat: f64,
    pub df: usize,
    pub p_asym: f64,
    pub p_boot: Option<f64>,
    /// Bootstrap replications requested.
    pub b: usize,
    pub dropped: usize,
    pub lr_boot: Vec<f64>,
    pub warning: Option<String>,
}

/// Free coordinates of a model family inside the full parameter vector.
pub(crate) struct ParamMap {
    dims: Dims,
    free: Vec<usize>,
    /// `(latent-lag index, lagged-Y2 index)` pairs tied together.
    ties: Vec<(usize, usize)>,
    /// Free positions whose sign is discarded by `ReducedForm::from_vec`.
    abs_pos: Vec<usize>,
}

impl ParamMap {
    pub(crate) fn new(kind: ModelKind, dims: Dims) -> Self {
        let lay = dims.layout();
        let cstar = lay.cstar..lay.beta;
        let beta = lay.beta..lay.delta;
        let free: Vec<usize> = (0..lay.n)
            .filter(|i| match kind {
                ModelKind::Cksvar => true,
                ModelKind::Ksvar => !cstar.contains(i),
                ModelKind::Csvar => !cstar.contains(i) && !beta.contains(i),
            })
            .collect();
        let mut ties = Vec::new();
        if kind == ModelKind::Csvar {
            for i in 0..dims.k {
                for l in 0..dims.p {
                    ties.push((lay.cstar + i * dims.p + l, lay.cbar + i * dims.q() + dims.y2_lag_col(l + 1)));
                }
            }
        }
        let mut abs_idx = vec![lay.tau];
        for i in 0..dims.k1() {
            abs_idx.push(lay.chol + crate::model::tri_index(i, i));
        }
        let abs_pos = free
            .iter()
            .enumerate()
            .filter(|(_, f)| abs_idx.contains(f))
            .map(|(j, _)| j)
            .collect();
        Self {
            dims,
            free,
            ties,
            abs_pos,
        }
    }

    fn theta(&self, psi: &DVector<f64>) -> DVector<f64> {
        let mut th = DVector::zeros(self.dims.n_theta());
        for (j, &f) in self.free.iter().enumerate() {
            th[f] = psi[j];
        }
        for &(s, c) in &self.ties {
            th[s] = th[c];
        }
        th
    }

    fn psi(&self, rf: &ReducedForm) -> DVector<f64> {
        let th = rf.to_vec();
        DVector::from_iterator(self.free.len(), self.free.iter().map(|&f| th[f]))
    }

    /// `d theta / d psi` at positive scale parameters.
    fn jacobian(&self) -> DMatrix<f64> {
        let mut j = DMatrix::zeros(self.dims.n_theta(), self.free.len());
        for (c, &f) in self.free.iter().enumerate() {
            j[(f, c)] = 1.0;
        }
        for &(s, c) in &self.ties {
            let col = self.free.iter().position(|&f| f == c).unwrap();
            j[(s, col)] = 1.0;
        }
        j
    }

    fn chain(&self, psi: &DVector<f64>, g_theta: &[f64]) -> DVector<f64> {
        let mut g = DVector::from_iterator(self.free.len(), self.free.iter().map(|&f| g_theta[f]));
        for &(s, c) in &self.ties {
            let col = self.free.iter().position(|&f| f == c).unwrap();
            g[col] += g_theta[s];
        }
        for &j in &self.abs_pos {
            if psi[j] < 0.0 {
                g[j] = -g[j];
            }
        }
        g
    }

    fn chain_rows(&self, psi: &DVector<f64>, s: &DMatrix<f64>) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(s.nrows(), self.free.len());
        for t in 0..s.nrows() {
            let row: Vec<f64> = s.row(t).iter().copied().collect();
            out.row_mut(t).copy_from(&self.chain(psi, &row).transpose());
        }
        out
    }
}

/// Equation-by-equation least squares of `Y_t` on `X_t`. With
/// `uncensored_only` the periods at the bound are dropped (falling back to
/// the full sample when too few remain).
pub fn ols_reduced_form(data: &Dataset, uncensored_only: bool) -> Result<ReducedForm> {
    let dims = data.dims();
    let (k, q) = (dims.k, dims.q());
    let x_all = data.regressor_matrix();
    let mut rows: Vec<usize> = (0..data.len()).filter(|&t| !uncensored_only || !data.d[t]).collect();
    if rows.len() < q + k + 2 {
        rows = (0..data.len()).collect();
    }
    if rows.len() <= q {
        return Err(Error::Data(format!("{} observations for {} regressors", rows.len(), q)));
    }
    let n = rows.len();
    let x = DMatrix::from_fn(n, q, |i, j| x_all[(rows[i], j)]);
    let y = DMatrix::from_fn(n, k, |i, j| data.y[(rows[i], j)]);
    let xtx = x.transpose() * &x;
    let chol = xtx
        .cholesky()
        .ok_or_else(|| Error::Singular("regressor cross-product matrix".into()))?;
    let coef = chol.solve(&(x.transpose() * &y));
    let resid = &y - &x * &coef;
    let omega = resid.transpose() * &resid / n as f64;
    ReducedForm::from_omega(
        coef.transpose(),
        DMatrix::zeros(k, dims.p),
        DVector::zeros(dims.k1()),
        &omega,
        data.bound,
        dims.p,
        dims.k0,
    )
}

struct Objective<'a> {
    map: ParamMap,
    data: &'a Dataset,
    uniforms: Option<Uniforms>,
    bound: f64,
}

impl Objective<'_> {
    fn rf(&self, psi: &DVector<f64>) -> Option<ReducedForm> {
        ReducedForm::from_vec(&self.map.theta(psi), self.map.dims, self.bound).ok()
    }

    fn eval(&self, psi: &DVector<f64>, scores: bool) -> Option<Gradient> {
        let rf = self.rf(psi)?;
        let g = loglik_gradient(&rf, self.data, self.uniforms.as_ref(), scores).ok()?;
        g.loglik.is_finite().then_some(g)
    }

    fn value_grad(&self, psi: &DVector<f64>) -> Option<(f64, DVector<f64>)> {
        let g = self.eval(psi, false)?;
        Some((g.loglik, self.map.chain(psi, g.grad.as_slice())))
    }
}

fn normalize(psi: &DVector<f64>, map: &ParamMap) -> DVector<f64> {
    let mut out = psi.clone();
    for &j in &map.abs_pos {
        out[j] = out[j].abs();
    }
    out
}

fn check_filter(kind: ModelKind, filter: FilterKind) -> Result<()> {
    if kind != ModelKind::Ksvar && filter == FilterKind::Analytic {
        return Err(Error::Misuse(format!(
            "{} likelihood requires a particle filter",
            kind.name()
        )));
    }
    Ok(())
}

/// Maximizes the likelihood of `kind` on `data`. Smooth filters (analytic,
/// SIS with fixed uniforms) use BFGS started from the BHHH matrix; FAPF uses
/// simulated annealing. A result that failed the convergence test is
/// returned with its status set, not as an error.
pub fn fit_ml(data: &Dataset, kind: ModelKind, filter: FilterKind, opts: &FitOptions) -> Result<FitResult> {
    check_filter(kind, filter)?;
    let dims = data.dims();
    let mut starts = opts.starts.clone();
    if starts.is_empty() {
        let ols = ols_reduced_form(data, true)?;
        if kind == ModelKind::Ksvar {
            starts.push(ols);
        } else {
            let k_opts = FitOptions {
                starts: vec![ols],
                compute_vcov: false,
                ..opts.clone()
            };
            starts.push(fit_ml(data, ModelKind::Ksvar, FilterKind::Analytic, &k_opts)?.psi_hat);
        }
    }
    for s in &starts {
        if s.dims() != dims {
            return Err(Error::Dimension("starting value does not match the data".into()));
        }
    }
    let uniforms = if kind == ModelKind::Ksvar || filter == FilterKind::Fapf {
        None
    } else {
        Some(Uniforms::new(data.len(), opts.particles, opts.seed))
    };
    let obj = Objective {
        map: ParamMap::new(kind, dims),
        data,
        uniforms,
        bound: data.bound,
    };
    let t_len = data.len() as f64;

    let mut best: Option<optim::OptimResult> = None;
    let mut tried = 0;
    for start in &starts {
        let psi0 = obj.map.psi(start);
        let run = if filter == FilterKind::Fapf && kind != ModelKind::Ksvar {
            let f = |psi: &DVector<f64>| {
                let rf = obj.rf(psi)?;
                let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
                loglik_fapf(&rf, data, opts.particles, &mut rng).ok().map(|r| r.loglik)
            };
            let scale = DVector::from_element(psi0.len(), 0.05);
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x5eed);
            optim::anneal_max(f, psi0, &scale, &opts.anneal, &mut rng)
        } else {
            let Some(g0) = obj.eval(&psi0, true) else {
                continue;
            };
            let s = obj.map.chain_rows(&psi0, g0.scores.as_ref().unwrap());
            let info = s.transpose() * &s / t_len;
            let ridge = 1e-4 * info.diagonal().mean().max(1e-8);
            let h0 = (info + DMatrix::identity(psi0.len(), psi0.len()) * ridge).try_inverse();
            // objective per observation keeps the tolerances scale-free
            let f = |psi: &DVector<f64>| {
                let (v, g) = obj.value_grad(psi)?;
                Some((v / t_len, g / t_len))
            };
            optim::bfgs_max(f, psi0, h0, &opts.bfgs)
        };
        tried += 1;
        let Some(mut run) = run else { continue };
        if filter != FilterKind::Fapf || kind == ModelKind::Ksvar {
            run.f *= t_len;
        }
        let better = match &best {
            None => true,
            Some(b) => {
                (run.status.converged() && !b.status.converged())
                    || (run.status.converged() == b.status.converged() && run.f > b.f)
            }
        };
        if better {
            best = Some(run);
        }
    }
    let best = best.ok_or_else(|| Error::Optimizer("no starting value has a finite likelihood".into()))?;
    let psi = normalize(&best.x, &obj.map);
    let psi_hat = obj.rf(&psi).ok_or_else(|| Error::Optimizer("optimum is not a valid model".into()))?;
    let mut fit = FitResult {
        psi_hat,
        loglik: best.f,
        vcov: None,
        model_kind: kind,
        filter_kind: filter,
        trace: OptimTrace {
            iterations: best.iterations,
            evaluations: best.evaluations,
            status: best.status,
            grad_norm: best.grad.norm(),
            starts_tried: tried,
        },
        particles: opts.particles,
        seed: opts.seed,
    };
    if opts.compute_vcov {
        fit.vcov = Some(std_errors(&fit, data)?);
    }
    Ok(fit)
}

/// Covariance from the central-difference Hessian of the analytic or CRN
/// simulated log-likelihood at the estimate.
pub fn std_errors(fit: &FitResult, data: &Dataset) -> Result<Vcov> {
    if fit.filter_kind == FilterKind::Fapf && fit.model_kind != ModelKind::Ksvar {
        return Err(Error::Unsupported(
            "FAPF likelihoods are not differentiable; use likelihood-ratio inference".into(),
        ));
    }
    let dims = fit.psi_hat.dims();
    let uniforms = (fit.model_kind != ModelKind::Ksvar).then(|| Uniforms::new(data.len(), fit.particles, fit.seed));
    let obj = Objective {
        map: ParamMap::new(fit.model_kind, dims),
        data,
        uniforms,
        bound: data.bound,
    };
    let psi = obj.map.psi(&fit.psi_hat);
    let (h, asym) = optim::hessian_from_gradient(|x| obj.value_grad(x).map(|v| v.1), &psi, 1e-5)
        .ok_or_else(|| Error::Optimizer("likelihood not finite near the estimate".into()))?;
    let (v, flagged) = optim::psd_inverse(&(-h), 1e-12);
    let j = obj.map.jacobian();
    Ok(Vcov {
        matrix: &j * v * j.transpose(),
        flagged,
        asymmetry: asym,
    })
}

/// Number of restrictions a nested family imposes on the general model.
pub fn restriction_count(kind: ModelKind, dims: Dims) -> usize {
    match kind {
        ModelKind::Ksvar => ksvar_restrictions(dims.k, dims.p),
        ModelKind::Csvar => csvar_restrictions(dims.k, dims.p),
        ModelKind::Cksvar => 0,
    }
}

/// Stat values below `-LR_TOL` indicate the unrestricted fit did not reach
/// its optimum.
pub const LR_TOL: f64 = 1e-4;

pub fn lr_test(fit_u: &FitResult, fit_r: &FitResult, df: Option<usize>) -> Result<TestResult> {
    let df = match df {
        Some(d) => d,
        None => {
            if fit_u.model_kind != ModelKind::Cksvar || fit_r.model_kind == ModelKind::Cksvar {
                return Err(Error::Misuse(
                    "degrees of freedom must be given unless testing a restricted family against CKSVAR".into(),
                ));
            }
            restriction_count(fit_r.model_kind, fit_r.psi_hat.dims())
        }
    };
    let raw = 2.0 * (fit_u.loglik - fit_r.loglik);
    let warning = (raw < -LR_TOL).then(|| {
        format!("restricted log-likelihood exceeds unrestricted by {:.3e}; refit the unrestricted model", -raw / 2.0)
    });
    let lr = raw.max(0.0);
    Ok(TestResult {
        lr_stat: lr,
        df,
        p_asym: chi2_sf(lr, df),
        p_boot: None,
        b: 0,
        dropped: 0,
        lr_boot: Vec::new(),
        warning,
    })
}

pub(crate) fn chi2_sf(x: f64, df: usize) -> f64 {
    if df == 0 {
        return if x > 0.0 { 0.0 } else { 1.0 };
    }
    let d = ChiSquared::new(df as f64).expect("positive df");
    d.sf(x)
}

/// Restricted fit followed by the CKSVAR fit started at the restricted
/// optimum, so the nesting inequality holds by construction.
pub fn fit_nested(
    data: &Dataset,
    restricted: ModelKind,
    filter: FilterKind,
    opts: &FitOptions,
) -> Result<(FitResult, FitResult)> {
    let r_filter = if restricted == ModelKind::Ksvar { FilterKind::Analytic } else { filter };
    let fit_r = fit_ml(data, restricted, r_filter, opts)?;
    let u_opts = FitOptions {
        starts: vec![fit_r.psi_hat.clone()],
        ..opts.clone()
    };
    let fit_u = fit_ml(data, ModelKind::Cksvar, filter, &u_opts)?;
    Ok((fit_r, fit_u))
}

/// Maximum share of bootstrap replications that may fail before aborting.
pub const MAX_DROP_SHARE: f64 = 0.05;

/// Parametric bootstrap of the LR statistic under the restricted estimate.
/// Replication `b` draws from stream `b` of a generator seeded with `seed`.
pub fn bootstrap_lr(
    data: &Dataset,
    fit_r: &FitResult,
    fit_u: &FitResult,
    b: usize,
    seed: u64,
    opts: &FitOptions,
) -> Result<TestResult> {
    if b < 99 {
        return Err(Error::Parameter(format!("at least 99 bootstrap replications required, got {b}")));
    }
    let mut out = lr_test(fit_u, fit_r, None)?;
    let init = InitialConditions::from_dataset(data);
    let draws: Vec<Option<f64>> = (0..b)
        .into_par_iter()
        .map(|rep| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(rep as u64);
            let (sim, _) = simulate(&fit_r.psi_hat, data.len(), &init, &mut rng).ok()?;
            let (r, u) = fit_nested(&sim, fit_r.model_kind, fit_u.filter_kind, opts).ok()?;
            (r.converged() && u.converged()).then(|| (2.0 * (u.loglik - r.loglik)).max(0.0))
        })
        .collect();
    let lr_boot: Vec<f64> = draws.iter().flatten().copied().collect();
    let dropped = b - lr_boot.len();
    if dropped as f64 > MAX_DROP_SHARE * b as f64 {
        return Err(Error::Replications { failed: dropped, total: b });
    }
    out.p_boot = Some(bootstrap_p_value(out.lr_stat, &lr_boot));
    out.b = b;
    out.dropped = dropped;
    out.lr_boot = lr_boot;
    Ok(out)
}

/// `(1 + #{LR_b >= LR_obs}) / (B + 1)`.
pub fn bootstrap_p_value(lr_obs: f64, lr_boot: &[f64]) -> f64 {
    let exceed = lr_boot.iter().filter(|&&v| v >= lr_obs).count();
    (1 + exceed) as f64 / (lr_boot.len() + 1) as f64
}
