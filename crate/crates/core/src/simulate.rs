//! Datasets and simulation of the reduced-form recursion.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Dims, ReducedForm, StructuralParams};

/// Observed sample. Row `t` of `y` is `Y_{t+1}`; row `i` of `init` is
/// `Y_{i-p+1}` so the last row is the observation just before the sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub y: DMatrix<f64>,
    pub d: Vec<bool>,
    pub bound: f64,
    pub p: usize,
    pub init: DMatrix<f64>,
    pub x0: DMatrix<f64>,
}

impl Dataset {
    /// Builds a dataset from raw observations. `D_t = 1{Y2_t <= b + bind_tol}`
    /// and flagged observations of the constrained series are set to `b`.
    pub fn from_observations(
        mut y: DMatrix<f64>,
        init: DMatrix<f64>,
        x0: DMatrix<f64>,
        bound: f64,
        bind_tol: f64,
        p: usize,
    ) -> Result<Self> {
        let k = y.ncols();
        if k == 0 || y.nrows() == 0 {
            return Err(Error::Data("empty observation matrix".into()));
        }
        if init.nrows() != p || init.ncols() != k {
            return Err(Error::Data(format!(
                "initial conditions must be {p} x {k}, got {} x {}",
                init.nrows(),
                init.ncols()
            )));
        }
        if x0.nrows() != y.nrows() {
            return Err(Error::Data("exogenous block must have T rows".into()));
        }
        if y.iter().chain(init.iter()).chain(x0.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Data("non-finite value in data".into()));
        }
        let mut d = Vec::with_capacity(y.nrows());
        for t in 0..y.nrows() {
            let v = y[(t, k - 1)];
            if v < bound - bind_tol {
                return Err(Error::Data(format!(
                    "constrained series below the bound at row {t}: {v} < {bound}"
                )));
            }
            let binds = v <= bound + bind_tol;
            if binds {
                y[(t, k - 1)] = bound;
            }
            d.push(binds);
        }
        let mut init = init;
        for i in 0..p {
            if init[(i, k - 1)] <= bound + bind_tol {
                init[(i, k - 1)] = bound;
            }
        }
        Ok(Self {
            y,
            d,
            bound,
            p,
            init,
            x0,
        })
    }

    pub fn len(&self) -> usize {
        self.y.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.y.nrows() == 0
    }

    pub fn k(&self) -> usize {
        self.y.ncols()
    }

    pub fn k0(&self) -> usize {
        self.x0.ncols()
    }

    pub fn dims(&self) -> Dims {
        Dims {
            k: self.k(),
            p: self.p,
            k0: self.k0(),
        }
    }

    pub fn n_bound(&self) -> usize {
        self.d.iter().filter(|&&b| b).count()
    }

    /// Regressor vector `X_t` for 0-based sample index `t`.
    pub fn regressors(&self, t: usize) -> DVector<f64> {
        let dims = self.dims();
        let mut x = DVector::zeros(dims.q());
        self.regressors_into(t, x.as_mut_slice());
        x
    }

    pub fn regressors_into(&self, t: usize, out: &mut [f64]) {
        let (k, k0) = (self.k(), self.k0());
        for j in 0..k0 {
            out[j] = self.x0[(t, j)];
        }
        for s in 1..=self.p {
            let base = k0 + (s - 1) * k;
            if t >= s {
                for v in 0..k {
                    out[base + v] = self.y[(t - s, v)];
                }
            } else {
                let row = self.p + t - s;
                for v in 0..k {
                    out[base + v] = self.init[(row, v)];
                }
            }
        }
    }

    /// All regressors stacked as a `T x q` matrix.
    pub fn regressor_matrix(&self) -> DMatrix<f64> {
        let q = self.dims().q();
        let mut x = DMatrix::zeros(self.len(), q);
        let mut buf = vec![0.0; q];
        for t in 0..self.len() {
            self.regressors_into(t, &mut buf);
            for c in 0..q {
                x[(t, c)] = buf[c];
            }
        }
        x
    }

    /// True when `Y2_{t-s}` is observed strictly above the bound for all `s = 1..=p`
    /// (0-based `t`, may equal `T`).
    pub fn lags_above_bound(&self, t: usize) -> bool {
        (1..=self.p).all(|s| {
            if t >= s {
                !self.d[t - s]
            } else {
                let row = self.p + t - s;
                self.init[(row, self.k() - 1)] > self.bound
            }
        })
    }
}

/// Latent reduced-form shadow path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatentPath {
    pub ybar2star: Vec<f64>,
    pub xbar: Vec<f64>,
}

/// Pre-sample values for a simulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitialConditions {
    /// `p x k`, last row is the most recent observation.
    pub y: DMatrix<f64>,
    /// Latent gaps `xbar` for the same rows (all `<= 0`).
    pub xbar: DVector<f64>,
    /// `T x k0` exogenous regressors; `None` means a column of ones.
    pub x0: Option<DMatrix<f64>>,
}

impl InitialConditions {
    pub fn zeros(dims: Dims) -> Self {
        Self {
            y: DMatrix::zeros(dims.p, dims.k),
            xbar: DVector::zeros(dims.p),
            x0: None,
        }
    }

    /// Initial conditions equal to the pre-sample rows of a dataset, with
    /// latent gaps set to zero.
    pub fn from_dataset(data: &Dataset) -> Self {
        Self {
            y: data.init.clone(),
            xbar: DVector::zeros(data.p),
            x0: Some(data.x0.clone()),
        }
    }
}

/// Draws `u ~ N(0, Omega)` from standard normals using the stored
/// factorization: `u2 = tau z_k`, `u1 = delta u2 + chol z_{1..k-1}`.
pub(crate) fn shock_from_normals(rf: &ReducedForm, z: &[f64], u: &mut [f64]) {
    let k = z.len();
    let k1 = k - 1;
    let u2 = rf.tau * z[k1];
    for i in 0..k1 {
        let mut acc = rf.delta[i] * u2;
        for j in 0..=i {
            acc += rf.chol[(i, j)] * z[j];
        }
        u[i] = acc;
    }
    u[k1] = u2;
}

/// One step of the reduced-form recursion. `x` is the observed regressor
/// vector, `xbar_lags` the latent gaps `(xbar_{t-1}, ..., xbar_{t-p})` and
/// `u` the reduced-form error. Writes `Y_t` and returns `(Ybar2*_t, D_t)`.
pub(crate) fn step(
    rf: &ReducedForm,
    x: &[f64],
    xbar_lags: &[f64],
    u: &[f64],
    y_out: &mut [f64],
) -> (f64, bool) {
    let k = rf.cbar.nrows();
    let k1 = k - 1;
    let mean = |i: usize| -> f64 {
        let mut m = 0.0;
        for (c, xc) in x.iter().enumerate() {
            m += rf.cbar[(i, c)] * xc;
        }
        for (l, xl) in xbar_lags.iter().enumerate() {
            m += rf.cbar_star[(i, l)] * xl;
        }
        m
    };
    let ystar = mean(k1) + u[k1];
    let binds = ystar <= rf.bound;
    let gap = ystar - rf.bound;
    for i in 0..k1 {
        let mut v = mean(i) + u[i];
        if binds {
            v -= rf.beta_tilde[i] * gap;
        }
        y_out[i] = v;
    }
    y_out[k1] = if binds { rf.bound } else { ystar };
    (ystar, binds)
}

/// Simulates `t_len` periods of the reduced form.
pub fn simulate<R: Rng + ?Sized>(
    rf: &ReducedForm,
    t_len: usize,
    init: &InitialConditions,
    rng: &mut R,
) -> Result<(Dataset, LatentPath)> {
    rf.validate()?;
    let dims = rf.dims();
    let (k, p, k0, q) = (dims.k, dims.p, dims.k0, dims.q());
    if t_len == 0 {
        return Err(Error::Parameter("T must be at least 1".into()));
    }
    if init.y.nrows() != p || init.y.ncols() != k || init.xbar.len() != p {
        return Err(Error::Dimension("initial conditions do not match (p, k)".into()));
    }
    let x0 = match &init.x0 {
        Some(m) => {
            if m.nrows() < t_len || m.ncols() != k0 {
                return Err(Error::Dimension("exogenous block must be at least T x k0".into()));
            }
            m.rows(0, t_len).clone_owned()
        }
        None => {
            if k0 > 1 {
                return Err(Error::Dimension(
                    "exogenous regressors must be supplied when k0 > 1".into(),
                ));
            }
            DMatrix::from_element(t_len, k0, 1.0)
        }
    };

    let mut y = DMatrix::zeros(t_len, k);
    let mut d = Vec::with_capacity(t_len);
    let mut ybar = Vec::with_capacity(t_len);
    let mut xbar_path = Vec::with_capacity(t_len);
    // Most recent first.
    let mut ylags: Vec<Vec<f64>> = (0..p).map(|s| init.y.row(p - 1 - s).iter().copied().collect()).collect();
    let mut xlags: Vec<f64> = (0..p).map(|s| init.xbar[p - 1 - s]).collect();

    let mut x = vec![0.0; q];
    let mut z = vec![0.0; k];
    let mut u = vec![0.0; k];
    let mut yt = vec![0.0; k];
    for t in 0..t_len {
        for j in 0..k0 {
            x[j] = x0[(t, j)];
        }
        for (s, lag) in ylags.iter().enumerate() {
            x[k0 + s * k..k0 + (s + 1) * k].copy_from_slice(lag);
        }
        for zi in z.iter_mut() {
            *zi = rng.sample(StandardNormal);
        }
        shock_from_normals(rf, &z, &mut u);
        let (ystar, binds) = step(rf, &x, &xlags, &u, &mut yt);
        for v in 0..k {
            y[(t, v)] = yt[v];
        }
        d.push(binds);
        ybar.push(ystar);
        let gap = (ystar - rf.bound).min(0.0);
        xbar_path.push(gap);
        ylags.rotate_right(1);
        ylags[0].copy_from_slice(&yt);
        xlags.rotate_right(1);
        xlags[0] = gap;
    }
    let data = Dataset {
        y,
        d,
        bound: rf.bound,
        p,
        init: init.y.clone(),
        x0,
    };
    Ok((
        data,
        LatentPath {
            ybar2star: ybar,
            xbar: xbar_path,
        },
    ))
}

/// Simulates after discarding `n_burn` periods started from zero initial
/// conditions. The last `p` burn-in periods become the initial conditions.
pub fn simulate_with_burn_in<R: Rng + ?Sized>(
    rf: &ReducedForm,
    t_len: usize,
    n_burn: usize,
    rng: &mut R,
) -> Result<(Dataset, LatentPath)> {
    let dims = rf.dims();
    if n_burn == 0 {
        return simulate(rf, t_len, &InitialConditions::zeros(dims), rng);
    }
    let burn_len = n_burn.max(dims.p);
    let (burn, latent) = simulate(rf, burn_len, &InitialConditions::zeros(dims), rng)?;
    let p = dims.p;
    let init = InitialConditions {
        y: burn.y.rows(burn_len - p, p).clone_owned(),
        xbar: DVector::from_iterator(p, latent.xbar[burn_len - p..].iter().copied()),
        x0: None,
    };
    simulate(rf, t_len, &init, rng)
}

/// Default number of discarded periods for stationary starts.
pub const DEFAULT_BURN_IN: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Dgp {
    /// Both the kinked and the censored restrictions hold.
    One,
    /// Kinked restrictions hold, censored restrictions do not.
    Two,
    /// Censored restrictions hold, kinked restrictions do not.
    Three,
}

impl std::str::FromStr for Dgp {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim_start_matches("dgp").trim_start_matches("DGP") {
            "1" => Ok(Dgp::One),
            "2" => Ok(Dgp::Two),
            "3" => Ok(Dgp::Three),
            other => Err(Error::Parameter(format!("unknown DGP '{other}'"))),
        }
    }
}

/// Trivariate VAR(1) designs with identity impact in the unconstrained
/// variables, `rho = 0.5` own-lag persistence and bound zero.
pub fn make_dgp(which: Dgp) -> StructuralParams {
    let rho = 0.5;
    let mut b = DMatrix::zeros(3, 4);
    b[(0, 1)] = rho;
    b[(1, 2)] = rho;
    let mut b_star = DMatrix::zeros(3, 1);
    match which {
        Dgp::One => {}
        Dgp::Two => b[(2, 3)] = rho,
        Dgp::Three => b_star[(2, 0)] = rho,
    }
    StructuralParams {
        a11: DMatrix::identity(2, 2),
        a12: DVector::zeros(2),
        a12_star: DVector::zeros(2),
        a21: DVector::zeros(2),
        a22: 0.0,
        a22_star: 1.0,
        b,
        b_star,
        bound: 0.0,
        p: 1,
        k0: 1,
    }
}
