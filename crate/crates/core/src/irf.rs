//! Generalized impulse responses to the shock of the bounded variable:
//! the average difference between simulated paths with `epsbar2_t = shock`
//! and with `epsbar2_t = 0`, holding all other draws fixed.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimate::{fit_ml, FitOptions, FitResult, MAX_DROP_SHARE};
use crate::identify::{point_id, IdentifiedSet, StructuralSolution};
use crate::likelihood::{filter_latent, FilterKind};
use crate::model::ReducedForm;
use crate::simulate::{shock_from_normals, simulate, step, Dataset, InitialConditions};

pub const DEFAULT_HORIZON: usize = 24;
pub const DEFAULT_DRAWS: usize = 1000;

/// Offset for the baseline streams when draws are not shared.
const INDEPENDENT_SEED_OFFSET: u64 = 0x5DEE_CE66_D1CE_4E5B;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShockSize {
    /// `epsbar2 = 1`.
    Unit,
    /// `epsbar2 = Abar22^{-1}`.
    OneSd,
    Value(f64),
}

impl ShockSize {
    pub fn value(&self, sol: &StructuralSolution) -> f64 {
        match *self {
            ShockSize::Unit => 1.0,
            ShockSize::OneSd => sol.a22bar_inv,
            ShockSize::Value(v) => v,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IrfRequest {
    pub horizon: usize,
    pub shock: ShockSize,
    /// Lags at the impact period; `x0` rows are the exogenous regressors for
    /// periods `t, t+1, ...` (the last row is repeated if too short).
    pub state: InitialConditions,
    pub draws: usize,
    pub seed: u64,
    /// Share all draws between the shocked and baseline paths.
    pub common_draws: bool,
}

impl IrfRequest {
    pub fn new(state: InitialConditions) -> Self {
        Self {
            horizon: DEFAULT_HORIZON,
            shock: ShockSize::OneSd,
            state,
            draws: DEFAULT_DRAWS,
            seed: 0,
            common_draws: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub coverage: f64,
    pub lower: DMatrix<f64>,
    pub upper: DMatrix<f64>,
    pub replications: usize,
    pub dropped: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IrfBundle {
    pub xi: f64,
    pub root_index: usize,
    pub shock: f64,
    /// `(H+1) x k` responses of the observed variables.
    pub responses: DMatrix<f64>,
    /// Monte Carlo standard errors of `responses`.
    pub std_err: DMatrix<f64>,
    /// Response of the shadow value `Ybar2*`.
    pub shadow: DVector<f64>,
    pub band: Option<Band>,
}

fn check_request(rf: &ReducedForm, req: &IrfRequest) -> Result<()> {
    let d = rf.dims();
    if req.draws == 0 {
        return Err(Error::Parameter("at least one draw is required".into()));
    }
    let st = &req.state;
    if st.y.nrows() != d.p || st.y.ncols() != d.k || st.xbar.len() != d.p {
        return Err(Error::Dimension("IRF state does not match (p, k)".into()));
    }
    match &st.x0 {
        Some(x0) if x0.ncols() != d.k0 || x0.nrows() == 0 => {
            Err(Error::Dimension("exogenous rows must have k0 columns".into()))
        }
        None if d.k0 > 1 => Err(Error::Dimension("exogenous rows required when k0 > 1".into())),
        _ => Ok(()),
    }
}

/// Simulates one path from the state. `u_at(h, u)` fills the reduced-form
/// error for period `h`; writes `Y` into `ys` and `Ybar2*` into `shadow`.
fn path(
    rf: &ReducedForm,
    state: &InitialConditions,
    horizon: usize,
    mut u_at: impl FnMut(usize, &mut [f64]),
    ys: &mut [f64],
    shadow: &mut [f64],
) {
    let d = rf.dims();
    let (k, p, k0) = (d.k, d.p, d.k0);
    let mut ylags: Vec<Vec<f64>> = (0..p).map(|s| state.y.row(p - 1 - s).iter().copied().collect()).collect();
    let mut xlags: Vec<f64> = (0..p).map(|s| state.xbar[p - 1 - s]).collect();
    let mut x = vec![0.0; d.q()];
    let mut u = vec![0.0; k];
    let mut yt = vec![0.0; k];
    for h in 0..=horizon {
        match &state.x0 {
            Some(m) => {
                let row = h.min(m.nrows() - 1);
                for j in 0..k0 {
                    x[j] = m[(row, j)];
                }
            }
            None => x[0] = 1.0,
        }
        for (s, lag) in ylags.iter().enumerate() {
            x[k0 + s * k..k0 + (s + 1) * k].copy_from_slice(lag);
        }
        u_at(h, &mut u);
        let (ystar, _) = step(rf, &x, &xlags, &u, &mut yt);
        ys[h * k..(h + 1) * k].copy_from_slice(&yt);
        shadow[h] = ystar;
        if p > 0 {
            ylags.rotate_right(1);
            ylags[0].copy_from_slice(&yt);
            xlags.rotate_right(1);
            xlags[0] = (ystar - rf.bound).min(0.0);
        }
    }
}

/// Impact-period reduced-form error for `epsbar1 = L z1` and `epsbar2 = shock`.
fn impact_u(g: &DMatrix<f64>, l: &DMatrix<f64>, z1: &[f64], shock: f64, u: &mut [f64]) {
    let k1 = l.nrows();
    let mut eps = vec![0.0; k1 + 1];
    for i in 0..k1 {
        eps[i] = (0..=i).map(|j| l[(i, j)] * z1[j]).sum();
    }
    eps[k1] = shock;
    for (i, ui) in u.iter_mut().enumerate() {
        *ui = (0..=k1).map(|j| g[(i, j)] * eps[j]).sum();
    }
}

fn draw_normals(rng: &mut ChaCha8Rng, out: &mut [f64]) {
    for v in out.iter_mut() {
        *v = rng.sample(StandardNormal);
    }
}

/// Generalized impulse response for one structural solution.
pub fn girf(rf: &ReducedForm, sol: &StructuralSolution, req: &IrfRequest) -> Result<IrfBundle> {
    rf.validate()?;
    check_request(rf, req)?;
    let d = rf.dims();
    let (k, k1, hz) = (d.k, d.k1(), req.horizon);
    if sol.betabar.len() != k1 {
        return Err(Error::Dimension("structural solution does not match k".into()));
    }
    let omega = rf.omega();
    let g = sol.loadings()?;
    let l = sol
        .xi1(&omega)
        .cholesky()
        .ok_or_else(|| Error::Degenerate("covariance of epsbar1 is not positive definite".into()))?
        .l();
    let shock = req.shock.value(sol);
    let width = (hz + 1) * k;

    let per_draw: Vec<(Vec<f64>, Vec<f64>)> = (0..req.draws)
        .into_par_iter()
        .map(|m| {
            let mut rng = ChaCha8Rng::seed_from_u64(req.seed);
            rng.set_stream(m as u64);
            let mut z1 = vec![0.0; k1];
            draw_normals(&mut rng, &mut z1);
            let mut zs = vec![0.0; hz * k];
            draw_normals(&mut rng, &mut zs);
            let (z1_base, zs_base) = if req.common_draws {
                (z1.clone(), zs.clone())
            } else {
                let mut r2 = ChaCha8Rng::seed_from_u64(req.seed ^ INDEPENDENT_SEED_OFFSET);
                r2.set_stream(m as u64);
                let mut a = vec![0.0; k1];
                draw_normals(&mut r2, &mut a);
                let mut b = vec![0.0; hz * k];
                draw_normals(&mut r2, &mut b);
                (a, b)
            };
            let run = |z1: &[f64], zs: &[f64], shock: f64, ys: &mut [f64], sh: &mut [f64]| {
                path(
                    rf,
                    &req.state,
                    hz,
                    |h, u| {
                        if h == 0 {
                            impact_u(&g, &l, z1, shock, u);
                        } else {
                            shock_from_normals(rf, &zs[(h - 1) * k..h * k], u);
                        }
                    },
                    ys,
                    sh,
                )
            };
            let (mut y1, mut s1) = (vec![0.0; width], vec![0.0; hz + 1]);
            let (mut y0, mut s0) = (vec![0.0; width], vec![0.0; hz + 1]);
            run(&z1, &zs, shock, &mut y1, &mut s1);
            run(&z1_base, &zs_base, 0.0, &mut y0, &mut s0);
            let dy = y1.iter().zip(&y0).map(|(a, b)| a - b).collect();
            let ds = s1.iter().zip(&s0).map(|(a, b)| a - b).collect();
            (dy, ds)
        })
        .collect();

    let n = req.draws as f64;
    let mut mean = vec![0.0; width];
    let mut shadow = DVector::zeros(hz + 1);
    for (dy, ds) in &per_draw {
        for (a, v) in mean.iter_mut().zip(dy) {
            *a += v;
        }
        for (h, v) in ds.iter().enumerate() {
            shadow[h] += v;
        }
    }
    mean.iter_mut().for_each(|v| *v /= n);
    shadow /= n;
    let mut var = vec![0.0; width];
    for (dy, _) in &per_draw {
        for ((a, v), m) in var.iter_mut().zip(dy).zip(&mean) {
            *a += (v - m) * (v - m);
        }
    }
    let denom = if req.draws > 1 { n * (n - 1.0) } else { 1.0 };
    Ok(IrfBundle {
        xi: sol.xi,
        root_index: sol.root_index,
        shock,
        responses: DMatrix::from_row_slice(hz + 1, k, &mean),
        std_err: DMatrix::from_row_slice(hz + 1, k, &var.iter().map(|v| (v / denom).sqrt()).collect::<Vec<_>>()),
        shadow,
        band: None,
    })
}

/// One bundle per member of the identified set, all with the same draws. The
/// point-identified (`xi = 0`) bundle is always included and comes first.
pub fn irf_identified_set(rf: &ReducedForm, set: &IdentifiedSet, req: &IrfRequest) -> Result<Vec<IrfBundle>> {
    let mut sols: Vec<StructuralSolution> = Vec::with_capacity(set.solutions.len() + 1);
    match set.solutions.iter().find(|s| s.xi == 0.0) {
        Some(s) => sols.push(s.clone()),
        None => sols.push(point_id(rf)?),
    }
    sols.extend(set.solutions.iter().filter(|s| s.xi != 0.0).cloned());
    sols.iter().map(|s| girf(rf, s, req)).collect()
}

/// Conditioning state for an impulse at 1-based period `t` (`1 <= t <= T+1`):
/// the `p` observations before `t` and the filtered mean of their latent gaps,
/// which are exactly zero when those observations are above the bound.
pub fn condition_state(
    rf: &ReducedForm,
    data: &Dataset,
    t: usize,
    filter: FilterKind,
    particles: usize,
    seed: u64,
) -> Result<InitialConditions> {
    let t_len = data.len();
    if t == 0 || t > t_len + 1 {
        return Err(Error::Parameter(format!("t must lie in 1..={}, got {t}", t_len + 1)));
    }
    let p = data.p;
    let k = data.k();
    let idx = t - 1;
    let mut y = DMatrix::zeros(p, k);
    for s in 1..=p {
        let row = p - s;
        if idx >= s {
            y.row_mut(row).copy_from(&data.y.row(idx - s));
        } else {
            y.row_mut(row).copy_from(&data.init.row(p + idx - s));
        }
    }
    let x0 = if idx < t_len {
        data.x0.rows(idx, t_len - idx).clone_owned()
    } else {
        data.x0.rows(t_len - 1, 1).clone_owned()
    };
    let mut xbar = DVector::zeros(p);
    if !data.lags_above_bound(idx) && idx > 0 {
        let sub = Dataset {
            y: data.y.rows(0, idx).clone_owned(),
            d: data.d[..idx].to_vec(),
            bound: data.bound,
            p,
            init: data.init.clone(),
            x0: data.x0.rows(0, idx).clone_owned(),
        };
        let f = filter_latent(rf, &sub, particles, filter, seed)?;
        for s in 0..p {
            // most recent first in the filter output
            let v = f.final_lags[s];
            xbar[p - 1 - s] = if idx > s && sub.d[idx - 1 - s] { v.min(0.0) } else { 0.0 };
        }
    }
    Ok(InitialConditions {
        y,
        xbar,
        x0: Some(x0),
    })
}

/// Linear-interpolation quantile of sorted data.
fn quantile_sorted(v: &[f64], prob: f64) -> f64 {
    let pos = prob * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    v[lo] + (pos - lo as f64) * (v[hi] - v[lo])
}

/// Parametric bootstrap bands for the point-identified response: simulate
/// from the estimate, refit, recompute the response with the same draws.
pub fn bootstrap_bands(
    data: &Dataset,
    fit: &FitResult,
    req: &IrfRequest,
    replications: usize,
    coverage: f64,
    seed: u64,
    opts: &FitOptions,
) -> Result<Band> {
    if replications < 99 {
        return Err(Error::Parameter(format!(
            "at least 99 bootstrap replications required, got {replications}"
        )));
    }
    if !(coverage > 0.0 && coverage < 1.0) {
        return Err(Error::Parameter(format!("coverage must lie in (0, 1), got {coverage}")));
    }
    let init = InitialConditions::from_dataset(data);
    let draws: Vec<Option<DMatrix<f64>>> = (0..replications)
        .into_par_iter()
        .map(|rep| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(rep as u64);
            let (sim, _) = simulate(&fit.psi_hat, data.len(), &init, &mut rng).ok()?;
            let refit = fit_ml(&sim, fit.model_kind, fit.filter_kind, opts).ok()?;
            if !refit.converged() {
                return None;
            }
            let sol = point_id(&refit.psi_hat).ok()?;
            girf(&refit.psi_hat, &sol, req).ok().map(|b| b.responses)
        })
        .collect();
    let ok: Vec<&DMatrix<f64>> = draws.iter().flatten().collect();
    let dropped = replications - ok.len();
    if dropped as f64 > MAX_DROP_SHARE * replications as f64 {
        return Err(Error::Replications {
            failed: dropped,
            total: replications,
        });
    }
    let (rows, cols) = ok[0].shape();
    let mut lower = DMatrix::zeros(rows, cols);
    let mut upper = DMatrix::zeros(rows, cols);
    let mut buf = Vec::with_capacity(ok.len());
    for i in 0..rows {
        for j in 0..cols {
            buf.clear();
            buf.extend(ok.iter().map(|m| m[(i, j)]));
            buf.sort_by(f64::total_cmp);
            lower[(i, j)] = quantile_sorted(&buf, (1.0 - coverage) / 2.0);
            upper[(i, j)] = quantile_sorted(&buf, (1.0 + coverage) / 2.0);
        }
    }
    Ok(Band {
        coverage,
        lower,
        upper,
        replications,
        dropped,
    })
}
