//! Small maximizers used by the estimation code: BFGS with backtracking,
//! a simulated-annealing search for non-smooth objectives and a
//! central-difference Hessian of an analytic gradient.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    /// Relative objective change and gradient norm both below tolerance.
    Converged,
    /// The line search stalled with a gradient norm below the loose tolerance.
    ConvergedLoose,
    MaxIterations,
    LineSearchFailed,
    /// Annealing budget exhausted (no gradient-based test available).
    BudgetExhausted,
}

impl Status {
    pub fn converged(&self) -> bool {
        matches!(self, Status::Converged | Status::ConvergedLoose | Status::BudgetExhausted)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct BfgsOptions {
    pub max_iter: usize,
    pub tol_rel: f64,
    pub tol_grad: f64,
    pub loose_grad: f64,
}

impl Default for BfgsOptions {
    fn default() -> Self {
        Self {
            max_iter: 500,
            tol_rel: 1e-8,
            tol_grad: 1e-5,
            loose_grad: 1e-3,
        }
    }
}

#[derive(Debug, Clone)]
pub struct OptimResult {
    pub x: DVector<f64>,
    pub f: f64,
    pub grad: DVector<f64>,
    pub iterations: usize,
    pub evaluations: usize,
    pub status: Status,
}

/// Maximizes `f`, which returns the objective and its gradient or `None`
/// outside its domain. `h0` is the starting inverse Hessian of `-f`.
pub fn bfgs_max<F>(
    mut f: F,
    x0: DVector<f64>,
    h0: Option<DMatrix<f64>>,
    opts: &BfgsOptions,
) -> Option<OptimResult>
where
    F: FnMut(&DVector<f64>) -> Option<(f64, DVector<f64>)>,
{
    let n = x0.len();
    let (mut fx, mut gx) = f(&x0)?;
    if !fx.is_finite() || gx.iter().any(|v| !v.is_finite()) {
        return None;
    }
    let mut evals = 1;
    let mut x = x0;
    let h_init = h0.unwrap_or_else(|| DMatrix::identity(n, n));
    let mut h = h_init.clone();
    let mut reset = false;
    let mut status = Status::MaxIterations;
    let mut iter = 0;
    while iter < opts.max_iter {
        iter += 1;
        // ascent direction for f = descent for -f
        let mut dir = &h * &gx;
        let mut slope = gx.dot(&dir);
        if !(slope > 0.0) {
            h = h_init.clone();
            dir = &h * &gx;
            slope = gx.dot(&dir);
            if !(slope > 0.0) {
                dir = gx.clone();
                slope = gx.dot(&gx);
            }
        }
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..40 {
            let xn = &x + &dir * step;
            evals += 1;
            if let Some((fn_, gn)) = f(&xn) {
                if fn_.is_finite()
                    && gn.iter().all(|v| v.is_finite())
                    && fn_ >= fx + 1e-4 * step * slope
                {
                    accepted = Some((xn, fn_, gn));
                    break;
                }
            }
            step *= 0.5;
        }
        let Some((xn, fn_, gn)) = accepted else {
            if gx.norm() < opts.loose_grad {
                status = Status::ConvergedLoose;
                break;
            }
            if !reset {
                reset = true;
                h = h_init.clone();
                continue;
            }
            status = Status::LineSearchFailed;
            break;
        };
        reset = false;
        let s = &xn - &x;
        // gradient of -f
        let y = &gx - &gn;
        let sy = s.dot(&y);
        if sy > 1e-12 * s.norm() * y.norm() {
            let rho = 1.0 / sy;
            let hy = &h * &y;
            let yhy = y.dot(&hy);
            h += (&s * s.transpose()) * (rho * rho * yhy + rho)
                - (&hy * s.transpose() + &s * hy.transpose()) * rho;
        }
        let rel = (fn_ - fx).abs() / fx.abs().max(1.0);
        x = xn;
        fx = fn_;
        gx = gn;
        if rel < opts.tol_rel && gx.norm() < opts.tol_grad {
            status = Status::Converged;
            break;
        }
        if gx.norm() < 1e-3 * opts.tol_grad {
            status = Status::Converged;
            break;
        }
    }
    Some(OptimResult {
        x,
        f: fx,
        grad: gx,
        iterations: iter,
        evaluations: evals,
        status,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct AnnealOptions {
    pub max_evals: usize,
    /// Starting temperature in objective units.
    pub t0: f64,
    pub cooling: f64,
    /// Sweeps over all coordinates between temperature reductions.
    pub sweeps: usize,
}

impl Default for AnnealOptions {
    fn default() -> Self {
        Self {
            max_evals: 4000,
            t0: 1.0,
            cooling: 0.85,
            sweeps: 2,
        }
    }
}

/// Coordinate-wise simulated annealing (maximization) with step sizes
/// adapted toward a 40% acceptance rate. Returns the best point visited.
pub fn anneal_max<F, R>(
    mut f: F,
    x0: DVector<f64>,
    scale: &DVector<f64>,
    opts: &AnnealOptions,
    rng: &mut R,
) -> Option<OptimResult>
where
    F: FnMut(&DVector<f64>) -> Option<f64>,
    R: Rng + ?Sized,
{
    let n = x0.len();
    let mut fx = f(&x0).filter(|v| v.is_finite())?;
    let mut x = x0;
    let (mut best_x, mut best_f) = (x.clone(), fx);
    let mut steps = scale.clone();
    let mut temp = opts.t0;
    let mut evals = 1;
    let mut rounds = 0;
    while evals < opts.max_evals {
        rounds += 1;
        let mut acc = vec![0usize; n];
        for _ in 0..opts.sweeps {
            for i in 0..n {
                let mut xn = x.clone();
                xn[i] += steps[i] * (2.0 * rng.gen::<f64>() - 1.0);
                evals += 1;
                if let Some(fn_) = f(&xn).filter(|v| v.is_finite()) {
                    let take = fn_ >= fx || rng.gen::<f64>() < ((fn_ - fx) / temp).exp();
                    if take {
                        x = xn;
                        fx = fn_;
                        acc[i] += 1;
                        if fx > best_f {
                            best_f = fx;
                            best_x = x.clone();
                        }
                    }
                }
            }
        }
        for i in 0..n {
            let rate = acc[i] as f64 / opts.sweeps as f64;
            if rate > 0.6 {
                steps[i] *= 1.0 + 2.0 * (rate - 0.6) / 0.4;
            } else if rate < 0.4 {
                steps[i] /= 1.0 + 2.0 * (0.4 - rate) / 0.4;
            }
        }
        temp *= opts.cooling;
        x = best_x.clone();
        fx = best_f;
    }
    Some(OptimResult {
        grad: DVector::zeros(n),
        x: best_x,
        f: best_f,
        iterations: rounds,
        evaluations: evals,
        status: Status::BudgetExhausted,
    })
}

/// Symmetrized central-difference Jacobian of a gradient, with relative
/// step `rel` per coordinate. Also returns the largest relative asymmetry
/// before symmetrization.
pub fn hessian_from_gradient<G>(mut g: G, x: &DVector<f64>, rel: f64) -> Option<(DMatrix<f64>, f64)>
where
    G: FnMut(&DVector<f64>) -> Option<DVector<f64>>,
{
    let n = x.len();
    let mut h = DMatrix::zeros(n, n);
    for j in 0..n {
        let step = rel * x[j].abs().max(1.0);
        let mut xp = x.clone();
        let mut xm = x.clone();
        xp[j] += step;
        xm[j] -= step;
        let gp = g(&xp)?;
        let gm = g(&xm)?;
        for i in 0..n {
            h[(i, j)] = (gp[i] - gm[i]) / (2.0 * step);
        }
    }
    let scale = h.abs().max().max(f64::MIN_POSITIVE);
    let mut asym: f64 = 0.0;
    for i in 0..n {
        for j in 0..i {
            asym = asym.max((h[(i, j)] - h[(j, i)]).abs() / scale);
        }
    }
    let sym = (&h + h.transpose()) * 0.5;
    Some((sym, asym))
}

/// Inverse of a symmetric positive semi-definite matrix. Eigenvalues below
/// `rel_tol` times the largest are treated as zero (pseudo-inverse) and
/// negative ones are projected out; the flag reports whether either happened.
pub fn psd_inverse(a: &DMatrix<f64>, rel_tol: f64) -> (DMatrix<f64>, bool) {
    let n = a.nrows();
    let eig = a.clone().symmetric_eigen();
    let top = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
    let mut flagged = false;
    let mut inv_vals = DVector::zeros(n);
    for i in 0..n {
        let v = eig.eigenvalues[i];
        if v > rel_tol * top && v > 0.0 {
            inv_vals[i] = 1.0 / v;
        } else {
            flagged = true;
        }
    }
    let q = &eig.eigenvectors;
    (q * DMatrix::from_diagonal(&inv_vals) * q.transpose(), flagged)
}
