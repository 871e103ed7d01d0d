//! Structural and reduced-form parameterizations of the censored and kinked
//! SVAR, and the mappings between them.
//!
//! Regressor layout used everywhere in the crate: `X_t = (X0_t, Y_{t-1}, ...,
//! Y_{t-p})` with `k0` exogenous columns followed by `p` blocks of `k`
//! columns. The bound-constrained series is always the last (`k`-th)
//! variable.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dimensions shared by every parameter object.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dims {
    pub k: usize,
    pub p: usize,
    pub k0: usize,
}

impl Dims {
    pub fn new(k: usize, p: usize, k0: usize) -> Result<Self> {
        if k < 1 {
            return Err(Error::Dimension("k must be at least 1".into()));
        }
        if p < 1 {
            return Err(Error::Dimension("lag order p must be at least 1".into()));
        }
        Ok(Self { k, p, k0 })
    }

    /// Number of observed regressors.
    pub fn q(&self) -> usize {
        self.k0 + self.k * self.p
    }

    pub fn k1(&self) -> usize {
        self.k - 1
    }

    /// Column of `X_t` holding `Y_{2,t-lag}` (`lag` in `1..=p`).
    pub fn y2_lag_col(&self, lag: usize) -> usize {
        self.k0 + (lag - 1) * self.k + (self.k - 1)
    }

    /// Length of the full reduced-form parameter vector.
    pub fn n_theta(&self) -> usize {
        let k1 = self.k1();
        self.k * self.q() + self.k * self.p + 2 * k1 + k1 * (k1 + 1) / 2 + 1
    }

    pub(crate) fn layout(&self) -> Layout {
        let k1 = self.k1();
        let cbar = 0;
        let cstar = cbar + self.k * self.q();
        let beta = cstar + self.k * self.p;
        let delta = beta + k1;
        let chol = delta + k1;
        let tau = chol + k1 * (k1 + 1) / 2;
        Layout {
            cbar,
            cstar,
            beta,
            delta,
            chol,
            tau,
            n: tau + 1,
        }
    }
}

/// Offsets of each block inside the reduced-form parameter vector.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Layout {
    pub cbar: usize,
    pub cstar: usize,
    pub beta: usize,
    pub delta: usize,
    pub chol: usize,
    pub tau: usize,
    pub n: usize,
}

/// Index of `L[i, j]` (`j <= i`) in row-wise packed lower-triangular storage.
pub(crate) fn tri_index(i: usize, j: usize) -> usize {
    i * (i + 1) / 2 + j
}

/// Counts of free parameters: `(reduced form, structural, underidentification)`.
pub fn count_free_parameters(k: usize, p: usize, k0: usize) -> (usize, usize, usize) {
    let n_reduced = k0 * k + k * k * p + k * p + (k - 1) + k * (k + 1) / 2;
    let n_structural = k0 * k + k * k * p + k * p + k * k + k;
    let n_under = k * (k - 1) / 2 + 1;
    (n_reduced, n_structural, n_under)
}

/// Number of restrictions the kinked model imposes on the general model.
pub fn ksvar_restrictions(k: usize, p: usize) -> usize {
    k * p
}

/// Number of restrictions the censored model imposes on the general model.
pub fn csvar_restrictions(k: usize, p: usize) -> usize {
    k * p + k - 1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Ksvar,
    Csvar,
    Cksvar,
}

impl ModelKind {
    pub fn name(&self) -> &'static str {
        match self {
            ModelKind::Ksvar => "KSVAR",
            ModelKind::Csvar => "CSVAR",
            ModelKind::Cksvar => "CKSVAR",
        }
    }
}

impl std::str::FromStr for ModelKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ksvar" => Ok(ModelKind::Ksvar),
            "csvar" => Ok(ModelKind::Csvar),
            "cksvar" => Ok(ModelKind::Cksvar),
            other => Err(Error::Parameter(format!("unknown model kind '{other}'"))),
        }
    }
}

/// Structural system
/// `A11 Y1 + A12 Y2 + A12* Y2* = B1 X + B1* X* + e1`,
/// `A21 Y1 + A22 Y2 + A22* Y2* = B2 X + B2* X* + e2`, `Y2 = max(Y2*, b)`,
/// with `X*` the lags of the structural shadow value `Y2*`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructuralParams {
    pub a11: DMatrix<f64>,
    pub a12: DVector<f64>,
    pub a12_star: DVector<f64>,
    /// Row vector stored as a column.
    pub a21: DVector<f64>,
    pub a22: f64,
    pub a22_star: f64,
    /// `k x q` coefficients on observed regressors.
    pub b: DMatrix<f64>,
    /// `k x p` coefficients on lags of `Y2*`.
    pub b_star: DMatrix<f64>,
    pub bound: f64,
    pub p: usize,
    pub k0: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoherencyReport {
    pub kappa: f64,
    pub coherent: bool,
}

impl StructuralParams {
    pub fn dims(&self) -> Dims {
        Dims {
            k: self.a11.nrows() + 1,
            p: self.p,
            k0: self.k0,
        }
    }

    fn validate(&self) -> Result<()> {
        let d = self.dims();
        let k1 = d.k1();
        if self.a11.ncols() != k1
            || self.a12.len() != k1
            || self.a12_star.len() != k1
            || self.a21.len() != k1
        {
            return Err(Error::Dimension("structural impact blocks".into()));
        }
        if self.b.nrows() != d.k || self.b.ncols() != d.q() {
            return Err(Error::Dimension(format!(
                "B must be {} x {}, got {} x {}",
                d.k,
                d.q(),
                self.b.nrows(),
                self.b.ncols()
            )));
        }
        if self.b_star.nrows() != d.k || self.b_star.ncols() != d.p {
            return Err(Error::Dimension("B* must be k x p".into()));
        }
        Ok(())
    }

    /// Impact matrix in the unconstrained regime.
    pub fn a_bar(&self) -> DMatrix<f64> {
        self.impact(&(&self.a12 + &self.a12_star), self.a22 + self.a22_star)
    }

    /// Impact matrix in the constrained regime.
    pub fn a_star(&self) -> DMatrix<f64> {
        self.impact(&self.a12_star, self.a22_star)
    }

    fn impact(&self, col: &DVector<f64>, corner: f64) -> DMatrix<f64> {
        let k1 = self.a11.nrows();
        let mut a = DMatrix::zeros(k1 + 1, k1 + 1);
        a.view_mut((0, 0), (k1, k1)).copy_from(&self.a11);
        a.view_mut((0, k1), (k1, 1)).copy_from(col);
        a.view_mut((k1, 0), (1, k1)).copy_from(&self.a21.transpose());
        a[(k1, k1)] = corner;
        a
    }
}

/// Coherency (existence and uniqueness of a solution) of the structural model.
pub fn check_coherency(s: &StructuralParams) -> Result<CoherencyReport> {
    s.validate()?;
    let a11_inv = s
        .a11
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Singular("A11".into()))?;
    let a12_bar = &s.a12 + &s.a12_star;
    let a22_bar = s.a22 + s.a22_star;
    let num = a22_bar - (s.a21.transpose() * &a11_inv * &a12_bar)[(0, 0)];
    let den = s.a22_star - (s.a21.transpose() * &a11_inv * &s.a12_star)[(0, 0)];
    if den == 0.0 || !den.is_finite() {
        return Err(Error::Degenerate(
            "A22* - A21 A11^-1 A12* is zero".into(),
        ));
    }
    let kappa = num / den;
    Ok(CoherencyReport {
        kappa,
        coherent: kappa > 0.0,
    })
}

/// Reduced form `(Cbar, Cbar*, beta~, Omega)`. `Omega` is stored as
/// `(delta, chol, tau)` with `Omega22 = tau^2`, `Omega12 = tau^2 delta` and
/// `Omega_{1.2} = Omega11 - tau^2 delta delta' = chol chol'`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReducedForm {
    pub cbar: DMatrix<f64>,
    pub cbar_star: DMatrix<f64>,
    pub beta_tilde: DVector<f64>,
    pub delta: DVector<f64>,
    pub chol: DMatrix<f64>,
    pub tau: f64,
    pub bound: f64,
    pub p: usize,
    pub k0: usize,
}

impl ReducedForm {
    pub fn from_omega(
        cbar: DMatrix<f64>,
        cbar_star: DMatrix<f64>,
        beta_tilde: DVector<f64>,
        omega: &DMatrix<f64>,
        bound: f64,
        p: usize,
        k0: usize,
    ) -> Result<Self> {
        let k = cbar.nrows();
        if omega.nrows() != k || omega.ncols() != k {
            return Err(Error::Dimension("Omega must be k x k".into()));
        }
        let k1 = k - 1;
        let w22 = omega[(k1, k1)];
        if !(w22 > 0.0) {
            return Err(Error::Parameter("Omega22 must be positive".into()));
        }
        let tau = w22.sqrt();
        let w12 = omega.view((0, k1), (k1, 1)).clone_owned();
        let delta = DVector::from_iterator(k1, w12.iter().map(|v| v / w22));
        let w1_2 = omega.view((0, 0), (k1, k1)).clone_owned() - &w12 * w12.transpose() / w22;
        let chol = if k1 == 0 {
            DMatrix::zeros(0, 0)
        } else {
            nalgebra::Cholesky::new(w1_2)
                .ok_or_else(|| Error::Parameter("Omega is not positive definite".into()))?
                .l()
        };
        let rf = Self {
            cbar,
            cbar_star,
            beta_tilde,
            delta,
            chol,
            tau,
            bound,
            p,
            k0,
        };
        rf.validate()?;
        Ok(rf)
    }

    pub fn dims(&self) -> Dims {
        Dims {
            k: self.cbar.nrows(),
            p: self.p,
            k0: self.k0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.dims();
        let k1 = d.k1();
        if self.cbar.ncols() != d.q() {
            return Err(Error::Dimension(format!(
                "Cbar must have {} columns, got {}",
                d.q(),
                self.cbar.ncols()
            )));
        }
        if self.cbar_star.nrows() != d.k || self.cbar_star.ncols() != d.p {
            return Err(Error::Dimension("Cbar* must be k x p".into()));
        }
        if self.beta_tilde.len() != k1 || self.delta.len() != k1 {
            return Err(Error::Dimension("beta~ and delta must have k-1 entries".into()));
        }
        if self.chol.nrows() != k1 || self.chol.ncols() != k1 {
            return Err(Error::Dimension("Cholesky factor must be (k-1) x (k-1)".into()));
        }
        if !(self.tau > 0.0) || !self.tau.is_finite() {
            return Err(Error::Parameter(format!("tau must be positive, got {}", self.tau)));
        }
        for i in 0..k1 {
            if !(self.chol[(i, i)] > 0.0) {
                return Err(Error::Parameter(
                    "Omega_{1.2} Cholesky factor must have a positive diagonal".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn omega_1dot2(&self) -> DMatrix<f64> {
        &self.chol * self.chol.transpose()
    }

    pub fn omega(&self) -> DMatrix<f64> {
        let d = self.dims();
        let k1 = d.k1();
        let t2 = self.tau * self.tau;
        let mut w = DMatrix::zeros(d.k, d.k);
        let w11 = self.omega_1dot2() + &self.delta * self.delta.transpose() * t2;
        w.view_mut((0, 0), (k1, k1)).copy_from(&w11);
        for i in 0..k1 {
            w[(i, k1)] = t2 * self.delta[i];
            w[(k1, i)] = t2 * self.delta[i];
        }
        w[(k1, k1)] = t2;
        w
    }

    /// Covariance of `u1 - beta~ u2`.
    pub fn xi1(&self) -> DMatrix<f64> {
        let dt = &self.delta - &self.beta_tilde;
        self.omega_1dot2() + &dt * dt.transpose() * (self.tau * self.tau)
    }

    /// True when the latent lags are excluded (`Cbar* = 0`).
    pub fn is_ksvar(&self, tol: f64) -> bool {
        self.cbar_star.iter().all(|v| v.abs() <= tol)
    }

    /// True when the model is linear in the latent process: `beta~ = 0` and
    /// the coefficients on lagged `Y2` equal those on the latent lags.
    pub fn is_csvar(&self, tol: f64) -> bool {
        let d = self.dims();
        if self.beta_tilde.iter().any(|v| v.abs() > tol) {
            return false;
        }
        (1..=d.p).all(|s| {
            let c = d.y2_lag_col(s);
            (0..d.k).all(|i| (self.cbar[(i, c)] - self.cbar_star[(i, s - 1)]).abs() <= tol)
        })
    }

    /// Full parameter vector in the canonical layout.
    pub fn to_vec(&self) -> DVector<f64> {
        let d = self.dims();
        let lay = d.layout();
        let k1 = d.k1();
        let mut th = DVector::zeros(lay.n);
        for i in 0..d.k {
            for c in 0..d.q() {
                th[lay.cbar + i * d.q() + c] = self.cbar[(i, c)];
            }
            for l in 0..d.p {
                th[lay.cstar + i * d.p + l] = self.cbar_star[(i, l)];
            }
        }
        for i in 0..k1 {
            th[lay.beta + i] = self.beta_tilde[i];
            th[lay.delta + i] = self.delta[i];
            for j in 0..=i {
                th[lay.chol + tri_index(i, j)] = self.chol[(i, j)];
            }
        }
        th[lay.tau] = self.tau;
        th
    }

    /// Inverse of [`ReducedForm::to_vec`]. Signs of `tau` and of the
    /// Cholesky diagonal are discarded.
    pub fn from_vec(
        theta: &DVector<f64>,
        dims: Dims,
        bound: f64,
    ) -> Result<Self> {
        let lay = dims.layout();
        if theta.len() != lay.n {
            return Err(Error::Dimension(format!(
                "parameter vector has length {}, expected {}",
                theta.len(),
                lay.n
            )));
        }
        let (k, p, q, k1) = (dims.k, dims.p, dims.q(), dims.k1());
        let cbar = DMatrix::from_fn(k, q, |i, c| theta[lay.cbar + i * q + c]);
        let cbar_star = DMatrix::from_fn(k, p, |i, l| theta[lay.cstar + i * p + l]);
        let beta_tilde = DVector::from_fn(k1, |i, _| theta[lay.beta + i]);
        let delta = DVector::from_fn(k1, |i, _| theta[lay.delta + i]);
        let chol = DMatrix::from_fn(k1, k1, |i, j| {
            let v = if j <= i { theta[lay.chol + tri_index(i, j)] } else { 0.0 };
            if i == j {
                v.abs()
            } else {
                v
            }
        });
        let rf = Self {
            cbar,
            cbar_star,
            beta_tilde,
            delta,
            chol,
            tau: theta[lay.tau].abs(),
            bound,
            p,
            k0: dims.k0,
        };
        rf.validate()?;
        Ok(rf)
    }

    /// Parameter names in the canonical layout, e.g. `Eq.1 Y11_1`,
    /// `Eq.3 lY2_1`, `beta1`, `Ch_21`, `tau`.
    pub fn param_names(dims: Dims) -> Vec<String> {
        let (k, p, k1) = (dims.k, dims.p, dims.k1());
        let mut out = Vec::with_capacity(dims.n_theta());
        let reg_names = regressor_names(dims);
        for i in 0..k {
            for r in &reg_names {
                out.push(format!("Eq.{} {}", i + 1, r));
            }
        }
        for i in 0..k {
            for l in 1..=p {
                out.push(format!("Eq.{} lY2_{}", i + 1, l));
            }
        }
        for i in 0..k1 {
            out.push(format!("beta{}", i + 1));
        }
        for i in 0..k1 {
            out.push(format!("delta{}", i + 1));
        }
        for i in 0..k1 {
            for j in 0..=i {
                out.push(format!("Ch_{}{}", i + 1, j + 1));
            }
        }
        out.push("tau".into());
        out
    }

    /// Reduced form with `Cbar* = 0`.
    pub fn without_latent_lags(&self) -> Self {
        let mut rf = self.clone();
        rf.cbar_star.fill(0.0);
        rf
    }
}

fn regressor_names(dims: Dims) -> Vec<String> {
    let mut names = Vec::with_capacity(dims.q());
    for j in 0..dims.k0 {
        if dims.k0 == 1 {
            names.push("Constant".to_string());
        } else {
            names.push(format!("X0{}", j + 1));
        }
    }
    for l in 1..=dims.p {
        for v in 0..dims.k1() {
            names.push(format!("Y1{}_{}", v + 1, l));
        }
        names.push(format!("Y2_{}", l));
    }
    names
}

/// Reduced form implied by a coherent structural model.
pub fn structural_to_reduced(s: &StructuralParams) -> Result<ReducedForm> {
    let coh = check_coherency(s)?;
    if !coh.coherent {
        return Err(Error::Incoherent { kappa: coh.kappa });
    }
    let d = s.dims();
    let k1 = d.k1();
    let a_bar_inv = s
        .a_bar()
        .try_inverse()
        .ok_or_else(|| Error::Singular("Abar".into()))?;

    let beta_tilde = if s.a22_star != 0.0 {
        let lhs = &s.a11 - &s.a12_star * s.a21.transpose() / s.a22_star;
        let rhs = &s.a12_star * (s.a22 / s.a22_star) - &s.a12;
        lhs.lu()
            .solve(&rhs)
            .ok_or_else(|| Error::Singular("A11 - A12* A22*^-1 A21".into()))?
    } else {
        // A*^-1 Abar = [[I, -beta~], [0, kappa]]
        let a_star_inv = s
            .a_star()
            .try_inverse()
            .ok_or_else(|| Error::Singular("A*".into()))?;
        let m = a_star_inv * s.a_bar();
        DVector::from_fn(k1, |i, _| -m[(i, k1)])
    };

    let c = &a_bar_inv * &s.b;
    let c_star = &a_bar_inv * &s.b_star;
    let mut cbar = c;
    for lag in 1..=d.p {
        let col = d.y2_lag_col(lag);
        for i in 0..d.k {
            cbar[(i, col)] += c_star[(i, lag - 1)];
        }
    }
    let cbar_star = c_star * coh.kappa;
    let omega = &a_bar_inv * a_bar_inv.transpose();
    ReducedForm::from_omega(cbar, cbar_star, beta_tilde, &omega, s.bound, d.p, d.k0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dgp1_like() -> StructuralParams {
        let mut b = DMatrix::zeros(3, 4);
        b[(0, 1)] = 0.5;
        b[(1, 2)] = 0.5;
        StructuralParams {
            a11: DMatrix::identity(2, 2),
            a12: DVector::zeros(2),
            a12_star: DVector::zeros(2),
            a21: DVector::zeros(2),
            a22: 0.0,
            a22_star: 1.0,
            b,
            b_star: DMatrix::zeros(3, 1),
            bound: 0.0,
            p: 1,
            k0: 1,
        }
    }

    #[test]
    fn coherency_of_identity_impact() {
        let r = check_coherency(&dgp1_like()).unwrap();
        assert_eq!(r.kappa, 1.0);
        assert!(r.coherent);
    }

    #[test]
    fn incoherent_sign_case() {
        let s = StructuralParams {
            a11: DMatrix::from_element(1, 1, 1.0),
            a12: DVector::zeros(1),
            a12_star: DVector::zeros(1),
            a21: DVector::zeros(1),
            a22: 2.0,
            a22_star: -1.0,
            b: DMatrix::zeros(2, 3),
            b_star: DMatrix::zeros(2, 1),
            bound: 0.0,
            p: 1,
            k0: 1,
        };
        let r = check_coherency(&s).unwrap();
        assert_eq!(r.kappa, -1.0);
        assert!(!r.coherent);
        assert!(matches!(structural_to_reduced(&s), Err(Error::Incoherent { .. })));
    }

    #[test]
    fn singular_and_degenerate_inputs() {
        let mut s = dgp1_like();
        s.a11 = DMatrix::zeros(2, 2);
        assert!(matches!(check_coherency(&s), Err(Error::Singular(_))));
        let mut s = dgp1_like();
        s.a22_star = 0.0;
        assert!(matches!(check_coherency(&s), Err(Error::Degenerate(_))));
    }

    #[test]
    fn identity_case_reduces_to_b() {
        let s = dgp1_like();
        let rf = structural_to_reduced(&s).unwrap();
        assert_eq!(rf.beta_tilde, DVector::zeros(2));
        assert!((rf.omega() - DMatrix::identity(3, 3)).abs().max() < 1e-15);
        assert_eq!(rf.cbar, s.b);
        assert!(rf.is_ksvar(0.0));
        assert!(rf.is_csvar(0.0));
    }

    #[test]
    fn no_latent_contemporaneous_effect_gives_minus_a11inv_a12() {
        let mut s = dgp1_like();
        s.a11 = DMatrix::from_row_slice(2, 2, &[1.0, 0.3, -0.2, 1.5]);
        s.a12 = DVector::from_vec(vec![0.4, -0.7]);
        s.a21 = DVector::from_vec(vec![0.1, 0.2]);
        s.a22 = 0.5;
        let rf = structural_to_reduced(&s).unwrap();
        let expect = -s.a11.clone().try_inverse().unwrap() * &s.a12;
        assert!((rf.beta_tilde - expect).abs().max() < 1e-12);
    }

    #[test]
    fn bivariate_kappa_matches_sem_formula() {
        // beta=0.5, gamma=1, lambda=0: Y1 = beta*(Y2 + lambda*(Y2* - Y2)) + e1,
        // Y2* = gamma*Y1 + e2.
        let (beta, gamma, lambda) = (0.5, 1.0, 0.0);
        let s = StructuralParams {
            a11: DMatrix::from_element(1, 1, 1.0),
            a12: DVector::from_element(1, -beta * (1.0 - lambda)),
            a12_star: DVector::from_element(1, -beta * lambda),
            a21: DVector::from_element(1, -gamma),
            a22: 0.0,
            a22_star: 1.0,
            b: DMatrix::zeros(2, 3),
            b_star: DMatrix::zeros(2, 1),
            bound: 0.0,
            p: 1,
            k0: 1,
        };
        let kappa = check_coherency(&s).unwrap().kappa;
        let expect = (1.0 - gamma * beta) / (1.0 - lambda * gamma * beta);
        assert!((kappa - expect).abs() < 1e-15);
        assert!((kappa - 0.5).abs() < 1e-15);
    }

    #[test]
    fn csvar_special_case() {
        let mut s = dgp1_like();
        s.a21 = DVector::from_vec(vec![0.3, -0.4]);
        s.a12_star = DVector::from_vec(vec![0.2, 0.1]);
        s.b_star = DMatrix::from_column_slice(3, 1, &[0.1, 0.2, 0.3]);
        let rf = structural_to_reduced(&s).unwrap();
        assert_eq!(check_coherency(&s).unwrap().kappa, 1.0);
        assert!(rf.beta_tilde.abs().max() < 1e-15);
        assert!(rf.is_csvar(1e-12));
    }

    #[test]
    fn free_parameter_counts() {
        let k = 3;
        assert_eq!(ksvar_restrictions(k, 4), 12);
        assert_eq!(csvar_restrictions(k, 4), 14);
        assert_eq!(count_free_parameters(2, 1, 1).2, 2);
        let (n, _, _) = count_free_parameters(3, 1, 1);
        assert_eq!(n, Dims::new(3, 1, 1).unwrap().n_theta());
        assert_eq!(n, 23);
    }

    #[test]
    fn vec_round_trip_and_names() {
        let s = dgp1_like();
        let rf = structural_to_reduced(&s).unwrap();
        let th = rf.to_vec();
        let back = ReducedForm::from_vec(&th, rf.dims(), rf.bound).unwrap();
        assert_eq!(back, rf);
        let names = ReducedForm::param_names(rf.dims());
        assert_eq!(names.len(), th.len());
        assert_eq!(names[0], "Eq.1 Constant");
        assert_eq!(names[1], "Eq.1 Y11_1");
        assert_eq!(names[3], "Eq.1 Y2_1");
        assert_eq!(names[12], "Eq.1 lY2_1");
        assert_eq!(names.last().unwrap(), "tau");
    }
}
