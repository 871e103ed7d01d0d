//! Likelihood of a reduced form: analytic when the latent lags are excluded,
//! simulated by sequential importance sampling (smooth in the parameters
//! under common random numbers) or by the fully adapted particle filter.

mod fapf;
pub(crate) mod kernel;
pub(crate) mod sis;

use nalgebra::{DMatrix, DVector};
use rand::distributions::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ReducedForm;
use crate::normal;
use crate::simulate::Dataset;
use kernel::Kernel;
use sis::{run_sis, SisOptions};

pub const DEFAULT_PARTICLES: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FilterKind {
    Analytic,
    Sis,
    Fapf,
}

impl FilterKind {
    pub fn name(&self) -> &'static str {
        match self {
            FilterKind::Analytic => "analytic",
            FilterKind::Sis => "sis",
            FilterKind::Fapf => "fapf",
        }
    }
}

impl std::str::FromStr for FilterKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "analytic" => Ok(FilterKind::Analytic),
            "sis" => Ok(FilterKind::Sis),
            "fapf" => Ok(FilterKind::Fapf),
            other => Err(Error::Parameter(format!("unknown filter '{other}'"))),
        }
    }
}

/// Pre-drawn `T x M` uniforms in `(0, 1)`, held fixed across likelihood
/// evaluations so the simulated likelihood is a smooth function of the
/// parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Uniforms {
    pub t_len: usize,
    pub m: usize,
    pub values: Vec<f64>,
}

impl Uniforms {
    pub fn new(t_len: usize, m: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::from_rng(t_len, m, &mut rng)
    }

    pub fn from_rng<R: Rng + ?Sized>(t_len: usize, m: usize, rng: &mut R) -> Self {
        let values = (0..t_len * m).map(|_| rng.sample(Open01)).collect();
        Self { t_len, m, values }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LikelihoodResult {
    pub loglik: f64,
    /// `ln S_t` for each period.
    pub per_period: Vec<f64>,
    /// Effective sample size after each period (SIS only, empty otherwise).
    pub ess: Vec<f64>,
    pub filter: FilterKind,
    pub particles: usize,
}

impl LikelihoodResult {
    /// Periods whose ESS fell below `M / 10`.
    pub fn low_ess_periods(&self) -> Vec<usize> {
        let cut = self.particles as f64 / 10.0;
        self.ess
            .iter()
            .enumerate()
            .filter(|(_, e)| **e < cut)
            .map(|(t, _)| t)
            .collect()
    }
}

/// Particle cloud after the last period.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParticleSystem {
    pub m: usize,
    /// `M x p` latent gaps `(xbar_T, ..., xbar_{T-p+1})`.
    pub xbar_lags: DMatrix<f64>,
    /// Importance weights normalized to mean one.
    pub weights: DVector<f64>,
    pub ess: f64,
    pub uniforms: Uniforms,
}

impl ParticleSystem {
    /// Weighted mean of the latent lags.
    pub fn mean_lags(&self) -> DVector<f64> {
        let tot: f64 = self.weights.sum();
        let p = self.xbar_lags.ncols();
        DVector::from_fn(p, |l, _| {
            (0..self.m)
                .map(|j| self.weights[j] * self.xbar_lags[(j, l)])
                .sum::<f64>()
                / tot
        })
    }
}

/// Conditioning information for one period: observed regressors `X_t` and
/// latent lags `(xbar_{t-1}, ..., xbar_{t-p})`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatentState {
    pub x: DVector<f64>,
    pub xbar: DVector<f64>,
}

fn check_state(rf: &ReducedForm, st: &LatentState) -> Result<()> {
    rf.validate()?;
    let d = rf.dims();
    if st.x.len() != d.q() || st.xbar.len() != d.p {
        return Err(Error::Dimension(format!(
            "state must have {} regressors and {} latent lags",
            d.q(),
            d.p
        )));
    }
    Ok(())
}

fn binding_eval(rf: &ReducedForm, y1: &DVector<f64>, st: &LatentState) -> Result<(Kernel, kernel::Eval)> {
    check_state(rf, st)?;
    let k1 = rf.dims().k1();
    if y1.len() != k1 {
        return Err(Error::Dimension(format!("Y1 must have {k1} entries")));
    }
    let kern = Kernel::new(rf);
    let mut y: Vec<f64> = y1.iter().copied().collect();
    y.push(rf.bound);
    let mut per = kern.new_period();
    kern.period(st.x.as_slice(), &y, true, &mut per);
    let mut ev = kern.new_eval();
    kern.eval(&per, st.xbar.as_slice(), &mut ev);
    Ok((kern, ev))
}

/// Log of the Gaussian predictive density of `Y_t` off the bound.
pub fn ln_f0_density(rf: &ReducedForm, y: &DVector<f64>, st: &LatentState) -> Result<f64> {
    check_state(rf, st)?;
    if y.len() != rf.dims().k {
        return Err(Error::Dimension("Y must have k entries".into()));
    }
    let kern = Kernel::new(rf);
    let mut per = kern.new_period();
    kern.period(st.x.as_slice(), y.as_slice(), false, &mut per);
    let mut ev = kern.new_eval();
    kern.eval(&per, st.xbar.as_slice(), &mut ev);
    Ok(ev.ll)
}

pub fn f0_density(rf: &ReducedForm, y: &DVector<f64>, st: &LatentState) -> Result<f64> {
    Ok(ln_f0_density(rf, y, st)?.exp())
}

/// Log density of `Y1_t` at the bound, excluding the probability of binding.
pub fn ln_f1_density(rf: &ReducedForm, y1: &DVector<f64>, st: &LatentState) -> Result<f64> {
    let (_, ev) = binding_eval(rf, y1, st)?;
    Ok(ev.ll - ev.ln_cdf_a)
}

pub fn f1_density(rf: &ReducedForm, y1: &DVector<f64>, st: &LatentState) -> Result<f64> {
    Ok(ln_f1_density(rf, y1, st)?.exp())
}

/// Mean and standard deviation of `u2_t` given `Y1_t` at the bound.
pub fn cond_u2_moments(rf: &ReducedForm, y1: &DVector<f64>, st: &LatentState) -> Result<(f64, f64)> {
    let (kern, ev) = binding_eval(rf, y1, st)?;
    Ok((kern.mu2(&ev), kern.tau2))
}

/// Probability that the constraint binds given `Y1_t`.
pub fn prob_bound(rf: &ReducedForm, y1: &DVector<f64>, st: &LatentState) -> Result<f64> {
    let (_, ev) = binding_eval(rf, y1, st)?;
    Ok(normal::cdf(ev.a))
}

/// Draw of the shadow value `Ybar2*_t < b` from its truncated conditional
/// distribution by inversion at `u`.
pub fn draw_truncated_shadow(
    rf: &ReducedForm,
    y1: &DVector<f64>,
    st: &LatentState,
    u: f64,
) -> Result<f64> {
    if !(u > 0.0 && u < 1.0) {
        return Err(Error::Parameter(format!("uniform must lie in (0, 1), got {u}")));
    }
    let (kern, ev) = binding_eval(rf, y1, st)?;
    Ok(rf.bound + kern.draw(&ev, u).0)
}

fn check_data(rf: &ReducedForm, data: &Dataset) -> Result<()> {
    rf.validate()?;
    if rf.dims() != data.dims() {
        return Err(Error::Dimension(format!(
            "model dimensions {:?} do not match data {:?}",
            rf.dims(),
            data.dims()
        )));
    }
    if rf.bound != data.bound {
        return Err(Error::Misuse(format!(
            "model bound {} differs from data bound {}",
            rf.bound, data.bound
        )));
    }
    if data.is_empty() {
        return Err(Error::Data("empty sample".into()));
    }
    Ok(())
}

/// Exact log-likelihood of a model without latent lags.
pub fn loglik_ksvar(rf: &ReducedForm, data: &Dataset) -> Result<LikelihoodResult> {
    check_data(rf, data)?;
    if !rf.is_ksvar(0.0) {
        return Err(Error::Misuse(
            "analytic likelihood requires Cbar* = 0; use a particle filter".into(),
        ));
    }
    let (loglik, per_period, _, _) = analytic(rf, data, false, false)?;
    Ok(LikelihoodResult {
        loglik,
        per_period,
        ess: Vec::new(),
        filter: FilterKind::Analytic,
        particles: 0,
    })
}

type AnalyticOut = (f64, Vec<f64>, Option<Vec<f64>>, Option<Vec<Vec<f64>>>);

fn analytic(rf: &ReducedForm, data: &Dataset, grad: bool, scores: bool) -> Result<AnalyticOut> {
    let kern = Kernel::new(rf);
    let dims = rf.dims();
    let n = kern.lay.n;
    let mut x = vec![0.0; dims.q()];
    let mut y = vec![0.0; dims.k];
    let zero = vec![0.0; dims.p];
    let mut per = kern.new_period();
    let mut ev = kern.new_eval();
    let mut sc = kern.scratch();
    let mut g = vec![0.0; n];
    let mut total = if grad || scores { Some(vec![0.0; n]) } else { None };
    let mut sc_rows = if scores { Some(Vec::with_capacity(data.len())) } else { None };
    let mut per_period = Vec::with_capacity(data.len());
    for t in 0..data.len() {
        data.regressors_into(t, &mut x);
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = data.y[(t, i)];
        }
        kern.period(&x, &y, data.d[t], &mut per);
        kern.eval(&per, &zero, &mut ev);
        if !ev.ll.is_finite() {
            return Err(Error::ZeroWeights { t });
        }
        per_period.push(ev.ll);
        if let Some(tot) = total.as_mut() {
            kern.grad_ll(&x, &zero, &ev, data.d[t], None, &mut sc, &mut g);
            for (a, b) in tot.iter_mut().zip(&g) {
                *a += b;
            }
            if let Some(rows) = sc_rows.as_mut() {
                rows.push(g.clone());
            }
        }
    }
    Ok((per_period.iter().sum(), per_period, total, sc_rows))
}

/// Simulated log-likelihood by sequential importance sampling with the
/// given common random numbers (`M = uniforms.m`).
pub fn loglik_sis(
    rf: &ReducedForm,
    data: &Dataset,
    uniforms: &Uniforms,
) -> Result<(LikelihoodResult, ParticleSystem)> {
    check_data(rf, data)?;
    if uniforms.m == 0 {
        return Err(Error::Parameter("need at least one particle".into()));
    }
    let run = run_sis(rf, data, uniforms, SisOptions::default())?;
    let m = uniforms.m;
    let p = rf.p;
    let mx = run.log_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = run.log_weights.iter().map(|v| (v - mx).exp()).collect();
    let mean_w = w.iter().sum::<f64>() / m as f64;
    let ps = ParticleSystem {
        m,
        xbar_lags: DMatrix::from_row_slice(m, p, &run.lags),
        weights: DVector::from_iterator(m, w.iter().map(|v| v / mean_w)),
        ess: run.ess.last().copied().unwrap_or(m as f64),
        uniforms: uniforms.clone(),
    };
    Ok((
        LikelihoodResult {
            loglik: run.loglik,
            per_period: run.per_period,
            ess: run.ess,
            filter: FilterKind::Sis,
            particles: m,
        },
        ps,
    ))
}

/// Simulated log-likelihood by the fully adapted particle filter.
pub fn loglik_fapf<R: Rng + ?Sized>(
    rf: &ReducedForm,
    data: &Dataset,
    m: usize,
    rng: &mut R,
) -> Result<LikelihoodResult> {
    check_data(rf, data)?;
    if m < 2 {
        return Err(Error::Parameter("the particle filter needs M >= 2".into()));
    }
    let run = fapf::run_fapf(rf, data, m, rng, false)?;
    Ok(LikelihoodResult {
        loglik: run.loglik,
        per_period: run.per_period,
        ess: Vec::new(),
        filter: FilterKind::Fapf,
        particles: m,
    })
}

/// Log-likelihood with the filter chosen by `kind`; `seed` drives the
/// uniforms (SIS) or the resampling stream (FAPF).
pub fn loglik(
    rf: &ReducedForm,
    data: &Dataset,
    kind: FilterKind,
    m: usize,
    seed: u64,
) -> Result<LikelihoodResult> {
    match kind {
        FilterKind::Analytic => loglik_ksvar(rf, data),
        FilterKind::Sis => Ok(loglik_sis(rf, data, &Uniforms::new(data.len(), m, seed))?.0),
        FilterKind::Fapf => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            loglik_fapf(rf, data, m, &mut rng)
        }
    }
}

/// Log-likelihood and its gradient in the canonical parameter layout
/// (`tau` and the Cholesky diagonal taken as positive).
#[derive(Debug, Clone)]
pub(crate) struct Gradient {
    pub loglik: f64,
    pub grad: DVector<f64>,
    /// `T x n` per-period scores when requested.
    pub scores: Option<DMatrix<f64>>,
}

pub(crate) fn loglik_gradient(
    rf: &ReducedForm,
    data: &Dataset,
    uniforms: Option<&Uniforms>,
    scores: bool,
) -> Result<Gradient> {
    check_data(rf, data)?;
    let n = rf.dims().n_theta();
    let (loglik, grad, rows) = match uniforms {
        None => {
            if !rf.is_ksvar(0.0) {
                return Err(Error::Misuse("analytic gradient requires Cbar* = 0".into()));
            }
            let (ll, _, g, rows) = analytic(rf, data, true, scores)?;
            (ll, g.unwrap_or_else(|| vec![0.0; n]), rows)
        }
        Some(u) => {
            let run = run_sis(
                rf,
                data,
                u,
                SisOptions {
                    grad: true,
                    scores,
                    history: false,
                },
            )?;
            (run.loglik, run.grad.unwrap_or_else(|| vec![0.0; n]), run.scores)
        }
    };
    let scores = rows.map(|r| {
        let t = r.len();
        DMatrix::from_fn(t, n, |i, j| r[i][j])
    });
    Ok(Gradient {
        loglik,
        grad: DVector::from_vec(grad),
        scores,
    })
}

/// Per-period filtering and smoothing summaries of the latent gap
/// `xbar_t = min(Ybar2*_t - b, 0)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatentFilter {
    pub filter: FilterKind,
    pub filtered_mean: Vec<f64>,
    pub filtered_q05: Vec<f64>,
    pub filtered_q95: Vec<f64>,
    pub smoothed_mean: Vec<f64>,
    /// Filtered mean of `(xbar_T, ..., xbar_{T-p+1})`.
    pub final_lags: Vec<f64>,
    pub loglik: f64,
}

fn weighted_quantile(vals: &[f64], w: &[f64], prob: f64) -> f64 {
    let mut idx: Vec<usize> = (0..vals.len()).collect();
    idx.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
    let tot: f64 = w.iter().sum();
    let mut acc = 0.0;
    for &i in &idx {
        acc += w[i];
        if acc >= prob * tot {
            return vals[i];
        }
    }
    vals[*idx.last().unwrap()]
}

/// Filtered (weights at `t`) and smoothed (weights at `T` for SIS, ancestry
/// for FAPF) moments of the latent gap.
pub fn filter_latent(
    rf: &ReducedForm,
    data: &Dataset,
    m: usize,
    kind: FilterKind,
    seed: u64,
) -> Result<LatentFilter> {
    check_data(rf, data)?;
    let t_len = data.len();
    let p = rf.p;
    match kind {
        FilterKind::Analytic => {
            if !rf.is_ksvar(0.0) {
                return Err(Error::Misuse("analytic filter requires Cbar* = 0".into()));
            }
            // Without latent lags the particle weights are flat and SIS is exact.
            filter_latent(rf, data, m, FilterKind::Sis, seed).map(|mut f| {
                f.filter = FilterKind::Analytic;
                f
            })
        }
        FilterKind::Sis => {
            if m == 0 {
                return Err(Error::Parameter("need at least one particle".into()));
            }
            let uni = Uniforms::new(t_len, m, seed);
            let run = run_sis(
                rf,
                data,
                &uni,
                SisOptions {
                    history: true,
                    ..Default::default()
                },
            )?;
            let xs = run.xbar_hist.unwrap();
            let lws = run.lw_hist.unwrap();
            let to_w = |lw: &[f64]| -> Vec<f64> {
                let mx = lw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                lw.iter().map(|v| (v - mx).exp()).collect()
            };
            let w_final = to_w(&run.log_weights);
            let sw_final: f64 = w_final.iter().sum();
            let mut out = LatentFilter {
                filter: kind,
                filtered_mean: Vec::with_capacity(t_len),
                filtered_q05: Vec::with_capacity(t_len),
                filtered_q95: Vec::with_capacity(t_len),
                smoothed_mean: Vec::with_capacity(t_len),
                final_lags: Vec::new(),
                loglik: run.loglik,
            };
            // smoothing weights for a period are those at the end of its
            // stretch, just before the next reset
            let mut w_smooth = Vec::with_capacity(run.resets.len() + 1);
            for &r in &run.resets {
                w_smooth.push(to_w(&lws[(r - 1) * m..r * m]));
            }
            w_smooth.push(w_final.clone());
            for t in 0..t_len {
                let xv = &xs[t * m..(t + 1) * m];
                let w = to_w(&lws[t * m..(t + 1) * m]);
                let ws = &w_smooth[run.resets.partition_point(|&r| r <= t)];
                let sws: f64 = ws.iter().sum();
                let sw: f64 = w.iter().sum();
                out.filtered_mean
                    .push(xv.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() / sw);
                out.filtered_q05.push(weighted_quantile(xv, &w, 0.05));
                out.filtered_q95.push(weighted_quantile(xv, &w, 0.95));
                out.smoothed_mean
                    .push(xv.iter().zip(ws).map(|(a, b)| a * b).sum::<f64>() / sws);
            }
            out.final_lags = (0..p)
                .map(|l| (0..m).map(|j| w_final[j] * run.lags[j * p + l]).sum::<f64>() / sw_final)
                .collect();
            Ok(out)
        }
        FilterKind::Fapf => {
            if m < 2 {
                return Err(Error::Parameter("the particle filter needs M >= 2".into()));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let run = fapf::run_fapf(rf, data, m, &mut rng, true)?;
            let xs = run.xbar_hist.unwrap();
            let anc = run.ancestors.unwrap();
            let ones = vec![1.0; m];
            let mut out = LatentFilter {
                filter: kind,
                filtered_mean: Vec::with_capacity(t_len),
                filtered_q05: Vec::with_capacity(t_len),
                filtered_q95: Vec::with_capacity(t_len),
                smoothed_mean: vec![0.0; t_len],
                final_lags: Vec::new(),
                loglik: run.loglik,
            };
            for t in 0..t_len {
                let xv = &xs[t * m..(t + 1) * m];
                out.filtered_mean.push(xv.iter().sum::<f64>() / m as f64);
                out.filtered_q05.push(weighted_quantile(xv, &ones, 0.05));
                out.filtered_q95.push(weighted_quantile(xv, &ones, 0.95));
            }
            let mut lineage: Vec<usize> = (0..m).collect();
            for t in (0..t_len).rev() {
                let xv = &xs[t * m..(t + 1) * m];
                out.smoothed_mean[t] = lineage.iter().map(|&j| xv[j]).sum::<f64>() / m as f64;
                for j in lineage.iter_mut() {
                    *j = anc[t * m + *j];
                }
            }
            out.final_lags = (0..p)
                .map(|l| (0..m).map(|j| run.lags[j * p + l]).sum::<f64>() / m as f64)
                .collect();
            Ok(out)
        }
    }
}
