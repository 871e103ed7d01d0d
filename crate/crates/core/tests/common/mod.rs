#![allow(dead_code)]

pub mod quadrature;

use cksvar::{Dataset, ReducedForm};
use nalgebra::{DMatrix, DVector};

/// Bivariate VAR(1) with latent-lag effects, kink and correlated errors.
pub fn toy_k2_rf() -> ReducedForm {
    let cbar = DMatrix::from_row_slice(2, 3, &[0.2, 0.4, 0.3, 0.1, 0.2, 0.5]);
    let cbar_star = DMatrix::from_row_slice(2, 1, &[0.4, 0.6]);
    let omega = DMatrix::from_row_slice(2, 2, &[1.0, 0.4, 0.4, 0.8]);
    ReducedForm::from_omega(cbar, cbar_star, DVector::from_element(1, 0.5), &omega, 0.0, 1, 1)
        .unwrap()
}

/// Five observations with the pattern off, on, on, off, on.
pub fn toy_k2_data() -> Dataset {
    let y = DMatrix::from_row_slice(
        5,
        2,
        &[0.7, 0.9, -0.4, 0.0, 0.3, 0.0, 1.1, 0.6, -0.2, 0.0],
    );
    let init = DMatrix::from_row_slice(1, 2, &[0.2, 0.5]);
    Dataset::from_observations(y, init, DMatrix::from_element(5, 1, 1.0), 0.0, 0.0, 1).unwrap()
}

/// Dynamic Tobit `y*_t = c + a y_{t-1} + c* xbar_{t-1} + u_t`, `y = max(y*, 0)`.
pub fn tobit_rf() -> ReducedForm {
    let cbar = DMatrix::from_row_slice(1, 2, &[0.1, 0.5]);
    let cbar_star = DMatrix::from_row_slice(1, 1, &[0.6]);
    let omega = DMatrix::from_element(1, 1, 0.64);
    ReducedForm::from_omega(cbar, cbar_star, DVector::zeros(0), &omega, 0.0, 1, 1).unwrap()
}

pub fn tobit_data() -> Dataset {
    let y = DMatrix::from_row_slice(5, 1, &[0.0, 0.0, 0.8, 0.0, 0.3]);
    let init = DMatrix::from_row_slice(1, 1, &[0.4]);
    Dataset::from_observations(y, init, DMatrix::from_element(5, 1, 1.0), 0.0, 0.0, 1).unwrap()
}

/// Random well-conditioned reduced form with intercept `0.3` and moderate
/// lag coefficients.
pub fn random_rf(k: usize, p: usize, seed: u64) -> ReducedForm {
    use rand::SeedableRng;
    use rand_distr::{Distribution, Normal};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let nd = Normal::new(0.0, 1.0).unwrap();
    let dims = cksvar::Dims::new(k, p, 1).unwrap();
    let names = ReducedForm::param_names(dims);
    let mut th = DVector::from_fn(dims.n_theta(), |_, _| 0.2 * nd.sample(&mut rng));
    for (i, name) in names.iter().enumerate() {
        if name.ends_with("Constant") {
            th[i] = 0.3;
        } else if name.starts_with("Ch_") && name.as_bytes()[3] == name.as_bytes()[4] {
            th[i] = 0.8 + 0.1 * f64::abs(th[i]);
        } else if name == "tau" {
            th[i] = 0.9;
        }
    }
    ReducedForm::from_vec(&th, dims, 0.0).unwrap()
}
