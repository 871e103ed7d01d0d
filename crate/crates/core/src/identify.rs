//! Structural objects needed for impulse responses to the shock of the
//! bounded variable: `betabar` (response of `Y1` to a unit move in `Y2`),
//! `gammabar` (reaction of `Y2*` to `Y1` in the unconstrained regime) and
//! the shock scale `Abar22^{-1}`, point identified at `xi = 0` and set
//! identified over `xi in [0, 1)`.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ReducedForm;

/// Default number of interior `xi` grid points.
pub const DEFAULT_GRID: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructuralSolution {
    pub betabar: DVector<f64>,
    /// Row vector stored as a column.
    pub gammabar: DVector<f64>,
    pub a22bar_inv: f64,
    pub xi: f64,
    pub root_index: usize,
}

impl StructuralSolution {
    pub fn gamma_beta(&self) -> f64 {
        self.gammabar.dot(&self.betabar)
    }

    /// `(1 - gammabar betabar)(1 - xi gammabar betabar)`; positive iff coherent.
    pub fn coherency(&self) -> f64 {
        let gb = self.gamma_beta();
        (1.0 - gb) * (1.0 - self.xi * gb)
    }

    pub fn is_coherent(&self) -> bool {
        self.coherency() > 0.0
    }

    /// Impact of a unit `epsbar2` on `Y2*` in the unconstrained regime.
    pub fn impact_y2(&self) -> f64 {
        1.0 / (1.0 - self.gamma_beta())
    }

    /// Norm of `-(O11 - betabar O12') gammabar' + O12 - betabar O22`, zero when
    /// `epsbar1 = u1 - betabar u2` is orthogonal to `epsbar2 = u2 - gammabar u1`.
    pub fn orthogonality_residual(&self, omega: &DMatrix<f64>) -> f64 {
        let (o11, o12, o22) = blocks(omega);
        let m = &o11 - &self.betabar * o12.transpose();
        (-(m * &self.gammabar) + o12 - &self.betabar * o22).norm()
    }

    /// Covariance of `epsbar1 = u1 - betabar u2`.
    pub fn xi1(&self, omega: &DMatrix<f64>) -> DMatrix<f64> {
        let s = selector(&self.betabar);
        &s * omega * s.transpose()
    }

    /// Loading matrix `G` with `u = G (epsbar1', epsbar2)'`.
    pub fn loadings(&self) -> Result<DMatrix<f64>> {
        let k1 = self.betabar.len();
        let k = k1 + 1;
        let ibg = DMatrix::identity(k1, k1) - &self.betabar * self.gammabar.transpose();
        let inv = ibg
            .try_inverse()
            .ok_or_else(|| Error::Degenerate("I - betabar gammabar is singular".into()))?;
        let d = 1.0 - self.gamma_beta();
        let mut g = DMatrix::zeros(k, k);
        g.view_mut((0, 0), (k1, k1)).copy_from(&inv);
        g.view_mut((0, k1), (k1, 1)).copy_from(&(&inv * &self.betabar));
        for j in 0..k1 {
            g[(k1, j)] = self.gammabar[j] / d;
        }
        g[(k1, k1)] = 1.0 / d;
        Ok(g)
    }

    /// `Omega` rebuilt from the loadings and the shock covariances.
    pub fn implied_omega(&self, omega: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        let k1 = self.betabar.len();
        let g = self.loadings()?;
        let mut v = DMatrix::zeros(k1 + 1, k1 + 1);
        v.view_mut((0, 0), (k1, k1)).copy_from(&self.xi1(omega));
        v[(k1, k1)] = self.a22bar_inv * self.a22bar_inv;
        Ok(&g * v * g.transpose())
    }
}

/// `(I, -betabar)`.
fn selector(betabar: &DVector<f64>) -> DMatrix<f64> {
    let k1 = betabar.len();
    let mut s = DMatrix::zeros(k1, k1 + 1);
    s.view_mut((0, 0), (k1, k1)).fill_with_identity();
    for i in 0..k1 {
        s[(i, k1)] = -betabar[i];
    }
    s
}

fn blocks(omega: &DMatrix<f64>) -> (DMatrix<f64>, DVector<f64>, f64) {
    let k1 = omega.nrows() - 1;
    (
        omega.view((0, 0), (k1, k1)).clone_owned(),
        omega.view((0, k1), (k1, 1)).column(0).clone_owned(),
        omega[(k1, k1)],
    )
}

fn check_omega(omega: &DMatrix<f64>) -> Result<()> {
    if omega.nrows() < 2 || omega.nrows() != omega.ncols() {
        return Err(Error::Dimension("identification needs a square Omega with k >= 2".into()));
    }
    if omega.clone().cholesky().is_none() {
        return Err(Error::Parameter("Omega is not positive definite".into()));
    }
    Ok(())
}

/// Solution of the orthogonality conditions for a given `betabar`.
pub fn solution_for(betabar: &DVector<f64>, omega: &DMatrix<f64>, xi: f64, root_index: usize) -> Result<StructuralSolution> {
    let (o11, o12, o22) = blocks(omega);
    let m = &o11 - &o12 * betabar.transpose();
    let mt = m
        .transpose()
        .lu()
        .solve(&(&o12 - betabar * o22))
        .ok_or_else(|| Error::Degenerate("Omega11 - Omega12 betabar' is singular".into()))?;
    let gammabar = mt;
    if gammabar.iter().any(|v| !v.is_finite()) {
        return Err(Error::Degenerate("Omega11 - Omega12 betabar' is singular".into()));
    }
    let k1 = betabar.len();
    let mut w = DVector::zeros(k1 + 1);
    w.rows_mut(0, k1).copy_from(&(-&gammabar));
    w[k1] = 1.0;
    let a22bar_inv = (w.transpose() * omega * &w)[(0, 0)].sqrt();
    Ok(StructuralSolution {
        betabar: betabar.clone(),
        gammabar,
        a22bar_inv,
        xi,
        root_index,
    })
}

/// Point identification with no contemporaneous shadow-value effect
/// (`xi = 0`): `betabar = beta~`.
pub fn point_id(rf: &ReducedForm) -> Result<StructuralSolution> {
    let omega = rf.omega();
    check_omega(&omega)?;
    solution_for(&rf.beta_tilde, &omega, 0.0, 0)
}

/// `beta~` implied by a candidate `betabar` at `xi`:
/// `(1 - xi)(I - xi betabar gammabar)^{-1} betabar`.
pub fn implied_beta_tilde(sol: &StructuralSolution) -> Option<DVector<f64>> {
    let k1 = sol.betabar.len();
    let m = DMatrix::identity(k1, k1) - &sol.betabar * sol.gammabar.transpose() * sol.xi;
    m.lu().solve(&sol.betabar).map(|v| v * (1.0 - sol.xi))
}

/// Roots and diagnostics for one value of `xi`.
#[derive(Debug, Clone, Default)]
pub struct XiSolutions {
    pub solutions: Vec<StructuralSolution>,
    pub dropped_incoherent: usize,
    pub dropped_singular: usize,
}

/// Coefficients (ascending powers) of `det(zI - A)` and the matrices `B_j`
/// with `adj(zI - A) = sum_j B_j z^j`, by Faddeev-LeVerrier.
fn char_poly_adj(a: &DMatrix<f64>) -> (Vec<f64>, Vec<DMatrix<f64>>) {
    let n = a.nrows();
    let mut c = vec![0.0; n + 1];
    c[n] = 1.0;
    let mut b = vec![DMatrix::zeros(n, n); n];
    let mut mm = DMatrix::<f64>::zeros(n, n);
    for m in 1..=n {
        mm = a * &mm + DMatrix::identity(n, n) * c[n - m + 1];
        b[n - m] = mm.clone();
        c[n - m] = -(a * &mm).trace() / m as f64;
    }
    (c, b)
}

/// Real roots of a polynomial with ascending coefficients, from the
/// eigenvalues of its companion matrix polished by Newton steps.
pub fn real_roots(c: &[f64]) -> Vec<f64> {
    let deg = c.len() - 1;
    if deg == 0 {
        return Vec::new();
    }
    let mut comp = DMatrix::zeros(deg, deg);
    for i in 1..deg {
        comp[(i, i - 1)] = 1.0;
    }
    for i in 0..deg {
        comp[(i, deg - 1)] = -c[i] / c[deg];
    }
    let eig = comp.complex_eigenvalues();
    let eval = |z: f64| c.iter().rev().fold(0.0, |acc, &v| acc * z + v);
    let deriv = |z: f64| {
        c.iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(0.0, |acc, (i, &v)| acc * z + i as f64 * v)
    };
    eig.iter()
        .filter(|e| e.im.abs() < 1e-8 * e.re.abs().max(1.0))
        .map(|e| {
            let mut z = e.re;
            for _ in 0..3 {
                let d = deriv(z);
                if d == 0.0 {
                    break;
                }
                let step = eval(z) / d;
                if !step.is_finite() {
                    break;
                }
                z -= step;
            }
            z
        })
        .collect()
}

fn dedupe(sols: &mut Vec<StructuralSolution>) {
    let mut out: Vec<StructuralSolution> = Vec::with_capacity(sols.len());
    for s in sols.drain(..) {
        if !out.iter().any(|o| (&o.betabar - &s.betabar).norm() < 1e-6 * s.betabar.norm().max(1.0)) {
            out.push(s);
        }
    }
    *sols = out;
}

/// Terms of `beta~ - A betabar + betabar (b' betabar) = 0`.
struct QuadraticSystem {
    a: DMatrix<f64>,
    b: DVector<f64>,
    g0: DVector<f64>,
    c0: f64,
}

impl QuadraticSystem {
    fn new(beta_tilde: &DVector<f64>, omega: &DMatrix<f64>, xi: f64) -> Result<Self> {
        let k1 = omega.nrows() - 1;
        let (o11, o12, o22) = blocks(omega);
        let o11_inv = o11.try_inverse().ok_or_else(|| Error::Singular("Omega11".into()))?;
        let g0 = &o11_inv * &o12;
        let sigma = o22 - o12.dot(&g0);
        let c0 = 1.0 - xi + xi * g0.dot(beta_tilde);
        let a = beta_tilde * g0.transpose() + DMatrix::identity(k1, k1) * c0;
        let b = &g0 * c0 + &o11_inv * beta_tilde * (xi * sigma);
        Ok(Self { a, b, g0, c0 })
    }
}

/// Monic polynomial (ascending coefficients, degree `k`) whose roots include
/// every `z = b' betabar` of a solution:
/// `z det(zI - A) + b' adj(zI - A) beta~`.
pub fn betabar_polynomial(beta_tilde: &DVector<f64>, omega: &DMatrix<f64>, xi: f64) -> Result<Vec<f64>> {
    check_omega(omega)?;
    let k1 = omega.nrows() - 1;
    if beta_tilde.len() != k1 {
        return Err(Error::Dimension("beta~ must have k-1 entries".into()));
    }
    let sys = QuadraticSystem::new(beta_tilde, omega, xi)?;
    let (c, adj) = char_poly_adj(&sys.a);
    let mut p = vec![0.0; k1 + 2];
    for (j, cj) in c.iter().enumerate() {
        p[j + 1] += cj;
    }
    for (j, bj) in adj.iter().enumerate() {
        p[j] += sys.b.dot(&(bj * beta_tilde));
    }
    Ok(p)
}

/// All coherent solutions for `betabar` at `xi in (0, 1)` (delegates to
/// [`point_id`] at `xi = 0`), with counts of discarded roots.
pub fn solve_betabar_diag(beta_tilde: &DVector<f64>, omega: &DMatrix<f64>, xi: f64) -> Result<XiSolutions> {
    check_omega(omega)?;
    if !(0.0..1.0).contains(&xi) {
        return Err(Error::Parameter(format!("xi must lie in [0, 1), got {xi}")));
    }
    let k1 = omega.nrows() - 1;
    if beta_tilde.len() != k1 {
        return Err(Error::Dimension("beta~ must have k-1 entries".into()));
    }
    let mut out = XiSolutions::default();
    if xi == 0.0 {
        let s = solution_for(beta_tilde, omega, 0.0, 0)?;
        if s.is_coherent() {
            out.solutions.push(s);
        } else {
            out.dropped_incoherent += 1;
        }
        return Ok(out);
    }
    let sys = QuadraticSystem::new(beta_tilde, omega, xi)?;
    let a = &sys.a;
    // The degree-k polynomial in z = b' betabar carries the factor
    // (c0 - z)^(k-2) from the repeated eigenvalue c0 of A; those roots make
    // A - zI singular and are always discarded, so solve the deflated
    // quadratic z^2 - (c0 + g0' beta~) z + b' beta~ = 0 directly.
    let roots = {
        let aa = sys.c0 + sys.g0.dot(beta_tilde);
        let bb = sys.b.dot(beta_tilde);
        let disc = aa * aa - 4.0 * bb;
        if disc < 0.0 {
            Vec::new()
        } else {
            let sgn = if aa < 0.0 { -1.0 } else { 1.0 };
            let q = 0.5 * (aa + sgn * disc.sqrt());
            if q == 0.0 {
                vec![0.0, 0.0]
            } else {
                vec![q, bb / q]
            }
        }
    };

    let scale = a.abs().max().max(1.0);
    for (i, z) in roots.into_iter().enumerate() {
        let m = a - DMatrix::identity(k1, k1) * z;
        let det = m.determinant();
        if det.abs() < 1e-12 * scale.powi(k1 as i32) {
            out.dropped_singular += 1;
            continue;
        }
        let Some(betabar) = m.lu().solve(beta_tilde) else {
            out.dropped_singular += 1;
            continue;
        };
        let Ok(sol) = solution_for(&betabar, omega, xi, i) else {
            out.dropped_singular += 1;
            continue;
        };
        let ok = implied_beta_tilde(&sol)
            .map(|bt| (bt - beta_tilde).norm() <= 1e-8 * beta_tilde.norm().max(1.0) * betabar.norm().max(1.0))
            .unwrap_or(false);
        if !ok {
            out.dropped_singular += 1;
            continue;
        }
        if !sol.is_coherent() {
            out.dropped_incoherent += 1;
            continue;
        }
        out.solutions.push(sol);
    }
    dedupe(&mut out.solutions);
    Ok(out)
}

pub fn solve_betabar(rf: &ReducedForm, xi: f64) -> Result<Vec<StructuralSolution>> {
    Ok(solve_betabar_diag(&rf.beta_tilde, &rf.omega(), xi)?.solutions)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentifiedSet {
    pub solutions: Vec<StructuralSolution>,
    /// Number of interior `xi` points.
    pub grid: usize,
    pub sign_restricted: bool,
    pub dropped_incoherent: usize,
    pub dropped_singular: usize,
    pub dropped_sign: usize,
    /// `beta~ = 0`: the response of `Y1` to the policy shock is unidentified.
    pub unidentified: bool,
}

impl IdentifiedSet {
    /// `[min, max]` of `betabar[i]` over the set.
    pub fn betabar_range(&self, i: usize) -> Option<(f64, f64)> {
        let vals = self.solutions.iter().map(|s| s.betabar[i]);
        let lo = vals.clone().fold(f64::INFINITY, f64::min);
        let hi = vals.fold(f64::NEG_INFINITY, f64::max);
        (lo <= hi).then_some((lo, hi))
    }

    pub fn xi_values(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.solutions.iter().map(|s| s.xi).collect();
        v.dedup();
        v
    }
}

/// Solutions at `xi = 0` and on the interior grid `xi_r = r / (R + 1)`.
/// With `sign_restriction` solutions whose impact of the policy shock on
/// `Y2` is negative are dropped.
pub fn identified_set_from(
    beta_tilde: &DVector<f64>,
    omega: &DMatrix<f64>,
    grid: usize,
    sign_restriction: bool,
) -> Result<IdentifiedSet> {
    if grid < 1 {
        return Err(Error::Parameter("grid must have at least one point".into()));
    }
    let xis: Vec<f64> = (1..=grid).map(|r| r as f64 / (grid + 1) as f64).collect();
    identified_set_on(beta_tilde, omega, &xis, sign_restriction)
}

/// As [`identified_set_from`] with caller-chosen interior points in `(0, 1)`.
pub fn identified_set_on(
    beta_tilde: &DVector<f64>,
    omega: &DMatrix<f64>,
    xis: &[f64],
    sign_restriction: bool,
) -> Result<IdentifiedSet> {
    check_omega(omega)?;
    if let Some(x) = xis.iter().find(|x| !(**x > 0.0 && **x < 1.0)) {
        return Err(Error::Parameter(format!("grid point {x} outside (0, 1)")));
    }
    let all: Vec<f64> = std::iter::once(0.0).chain(xis.iter().copied()).collect();
    let parts = all
        .par_iter()
        .map(|&xi| solve_betabar_diag(beta_tilde, omega, xi))
        .collect::<Result<Vec<_>>>()?;
    let mut set = IdentifiedSet {
        solutions: Vec::new(),
        grid: xis.len(),
        sign_restricted: sign_restriction,
        dropped_incoherent: 0,
        dropped_singular: 0,
        dropped_sign: 0,
        unidentified: beta_tilde.iter().all(|v| *v == 0.0),
    };
    for part in parts {
        set.dropped_incoherent += part.dropped_incoherent;
        set.dropped_singular += part.dropped_singular;
        for s in part.solutions {
            if sign_restriction && s.impact_y2() < 0.0 {
                set.dropped_sign += 1;
            } else {
                set.solutions.push(s);
            }
        }
    }
    Ok(set)
}

pub fn identified_set(rf: &ReducedForm, grid: usize, sign_restriction: bool) -> Result<IdentifiedSet> {
    identified_set_from(&rf.beta_tilde, &rf.omega(), grid, sign_restriction)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundsCase {
    /// `beta~ = 0` or `beta~ gamma0 < 0`.
    Unrestricted,
    /// `omega12 = 0`: a ray starting at `beta~`.
    HalfLine,
    /// `0 < beta~ gamma0 <= 1`: between `beta~` and `1/gamma0`.
    Interval,
    /// `beta~ gamma0 > 1`: only `lambda < 0` is compatible.
    Infeasible,
}

/// Bounds on `beta` in the bivariate model; `lo`/`hi` may be infinite and
/// are NaN for the infeasible case.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaBounds {
    pub case: BoundsCase,
    pub lo: f64,
    pub hi: f64,
    pub gamma0: f64,
}

pub fn bivariate_bounds(beta_tilde: f64, omega: &DMatrix<f64>) -> Result<BetaBounds> {
    if omega.nrows() != 2 {
        return Err(Error::Dimension("bivariate bounds need k = 2".into()));
    }
    check_omega(omega)?;
    let gamma0 = omega[(0, 1)] / omega[(0, 0)];
    let prod = beta_tilde * gamma0;
    let (case, lo, hi) = if beta_tilde == 0.0 || prod < 0.0 {
        (BoundsCase::Unrestricted, f64::NEG_INFINITY, f64::INFINITY)
    } else if gamma0 == 0.0 {
        if beta_tilde < 0.0 {
            (BoundsCase::HalfLine, f64::NEG_INFINITY, beta_tilde)
        } else {
            (BoundsCase::HalfLine, beta_tilde, f64::INFINITY)
        }
    } else if prod <= 1.0 {
        let end = 1.0 / gamma0;
        (BoundsCase::Interval, beta_tilde.min(end), beta_tilde.max(end))
    } else {
        (BoundsCase::Infeasible, f64::NAN, f64::NAN)
    };
    Ok(BetaBounds { case, lo, hi, gamma0 })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LambdaShape {
    /// `D(lambda) >= 0` everywhere.
    All,
    /// `(-inf, lo] U [up, inf)`.
    TwoRays,
    /// `(-inf, lo]`, when `omega11 = beta~ omega12`.
    Ray,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaSet {
    pub shape: LambdaShape,
    /// `D(lambda) = c2 lambda^2 + c1 lambda + c0`.
    pub coef: [f64; 3],
    pub lo: f64,
    pub up: f64,
    /// Disjoint closed intervals making up the set (after clamping when requested).
    pub intervals: Vec<(f64, f64)>,
}

impl LambdaSet {
    pub fn discriminant(&self, lambda: f64) -> f64 {
        let [c2, c1, c0] = self.coef;
        (c2 * lambda + c1) * lambda + c0
    }

    pub fn contains(&self, lambda: f64) -> bool {
        self.intervals.iter().any(|&(a, b)| a <= lambda && lambda <= b)
    }
}

/// Values of `lambda` for which some `beta` reproduces `beta~` in the
/// bivariate model: the set where the discriminant `D(lambda)` is non-negative.
pub fn lambda_set(beta_tilde: f64, omega: &DMatrix<f64>, clamp_unit: bool) -> Result<LambdaSet> {
    if omega.nrows() != 2 {
        return Err(Error::Dimension("lambda set needs k = 2".into()));
    }
    check_omega(omega)?;
    let (w11, w12, w22) = (omega[(0, 0)], omega[(0, 1)], omega[(1, 1)]);
    let bt = beta_tilde;
    let lead = (w11 - bt * w12).powi(2);
    let c1 = -2.0 * (w11 * w11 - bt * bt * w12 * w12 - 2.0 * bt * w11 * w12 + 2.0 * bt * bt * w11 * w22);
    let coef = [lead, c1, lead];
    let scale = (w11 * w11).max(bt * bt * w12 * w12).max(f64::MIN_POSITIVE);
    let (shape, lo, up) = if lead <= 1e-14 * scale {
        // D is linear with D(0) = 0 and negative slope
        (LambdaShape::Ray, 0.0, f64::INFINITY)
    } else {
        let disc = c1 * c1 - 4.0 * lead * lead;
        if disc <= 0.0 {
            (LambdaShape::All, f64::NEG_INFINITY, f64::INFINITY)
        } else {
            let sq = disc.sqrt();
            let q = -0.5 * (c1 + c1.signum() * sq);
            let (r1, r2) = (q / lead, lead / q);
            (LambdaShape::TwoRays, r1.min(r2), r1.max(r2))
        }
    };
    let mut intervals = match shape {
        LambdaShape::All => vec![(f64::NEG_INFINITY, f64::INFINITY)],
        LambdaShape::TwoRays => vec![(f64::NEG_INFINITY, lo), (up, f64::INFINITY)],
        LambdaShape::Ray => vec![(f64::NEG_INFINITY, lo)],
    };
    if clamp_unit {
        intervals = intervals
            .into_iter()
            .map(|(a, b)| (a.max(0.0), b.min(1.0)))
            .filter(|(a, b)| a <= b)
            .collect();
    }
    Ok(LambdaSet {
        shape,
        coef,
        lo,
        up,
        intervals,
    })
}

/// `lambda = xi / zeta` over a set of `xi` values, intersected with
/// `[0, 1]`; returns the hull `(lo, hi)`, or `None` when empty.
pub fn lambda_from_xi(xi: &[f64], zeta: f64) -> Result<Option<(f64, f64)>> {
    if !(zeta > 0.0) {
        return Err(Error::Parameter(format!("zeta must be positive, got {zeta}")));
    }
    let lam: Vec<f64> = xi.iter().map(|x| x / zeta).filter(|l| *l >= 0.0).collect();
    if lam.is_empty() {
        return Ok(None);
    }
    let lo = lam.iter().cloned().fold(f64::INFINITY, f64::min);
    if lo > 1.0 {
        return Ok(None);
    }
    let hi = lam.iter().cloned().fold(f64::NEG_INFINITY, f64::max).min(1.0);
    Ok(Some((lo, hi)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn faddeev_leverrier_matches_direct() {
        let a = DMatrix::from_row_slice(3, 3, &[1.0, 2.0, 0.5, -1.0, 0.3, 0.2, 0.4, 0.0, 2.0]);
        let (c, b) = char_poly_adj(&a);
        for &z in &[0.7, -1.3, 2.1] {
            let zi = DMatrix::identity(3, 3) * z - &a;
            let det: f64 = c.iter().enumerate().map(|(j, v)| v * z.powi(j as i32)).sum();
            assert!((det - zi.determinant()).abs() < 1e-12);
            let adj: DMatrix<f64> = b.iter().enumerate().map(|(j, m)| m * z.powi(j as i32)).sum();
            let expect = zi.clone().try_inverse().unwrap() * zi.determinant();
            assert!((adj - expect).abs().max() < 1e-11);
        }
    }

    #[test]
    fn real_roots_of_cubic() {
        // (z - 1)(z + 2)(z - 3) = z^3 - 2 z^2 - 5 z + 6
        let mut r = real_roots(&[6.0, -5.0, -2.0, 1.0]);
        r.sort_by(f64::total_cmp);
        assert!((r[0] + 2.0).abs() < 1e-12 && (r[1] - 1.0).abs() < 1e-12 && (r[2] - 3.0).abs() < 1e-12);
        // z^3 + z has one real root
        assert_eq!(real_roots(&[0.0, 1.0, 0.0, 1.0]).len(), 1);
    }
}
