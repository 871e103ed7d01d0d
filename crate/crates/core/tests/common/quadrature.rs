//! Brute-force likelihood and latent-state moments for `p = 1`, `k <= 2`
//! models by numerical integration over the shadow value on a grid.
//!
//! Works directly from the generative equations: off the bound the density
//! of `Y_t` is `N(m, Omega)`; at the bound the joint density of
//! `(Y1_t, Ybar2*_t = b + x)` is the bivariate normal density of
//! `u1 = Y1 - m1 + beta x`, `u2 = b + x - m2`, integrated over `x < 0`.

use cksvar::{Dataset, ReducedForm};

pub struct GridResult {
    pub loglik: f64,
    pub filtered_mean: Vec<f64>,
    pub smoothed_mean: Vec<f64>,
}

fn mvn_pdf(omega: &[[f64; 2]; 2], k: usize, u: &[f64]) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    if k == 1 {
        let w = omega[0][0];
        return (-0.5 * u[0] * u[0] / w).exp() / (two_pi * w).sqrt();
    }
    let det = omega[0][0] * omega[1][1] - omega[0][1] * omega[1][0];
    let q = (omega[1][1] * u[0] * u[0] - 2.0 * omega[0][1] * u[0] * u[1]
        + omega[0][0] * u[1] * u[1])
        / det;
    (-0.5 * q).exp() / (two_pi * det.sqrt())
}

/// `n` must be even (Simpson's rule on `[lower, 0]`).
pub fn grid_filter(rf: &ReducedForm, data: &Dataset, n: usize, lower: f64) -> GridResult {
    let k = rf.cbar.nrows();
    assert!(k <= 2 && rf.p == 1 && n % 2 == 0);
    let om = rf.omega();
    let mut omega = [[0.0; 2]; 2];
    for i in 0..k {
        for j in 0..k {
            omega[i][j] = om[(i, j)];
        }
    }
    // node 0 is the atom at xbar = 0, nodes 1..=n+1 the grid
    let h = -lower / n as f64;
    let mut xs = vec![0.0];
    let mut qw = vec![1.0];
    for j in 0..=n {
        xs.push(lower + j as f64 * h);
        let c = if j == 0 || j == n {
            1.0
        } else if j % 2 == 1 {
            4.0
        } else {
            2.0
        };
        qw.push(c * h / 3.0);
    }
    let nn = xs.len();
    let t_len = data.len();
    let b = rf.bound;

    let kernel = |t: usize, i: usize, j: usize| -> f64 {
        let x = data.regressors(t);
        let m: Vec<f64> = (0..k)
            .map(|r| (rf.cbar.row(r) * &x)[(0, 0)] + rf.cbar_star[(r, 0)] * xs[i])
            .collect();
        let y = data.y.row(t);
        if !data.d[t] {
            if j != 0 {
                return 0.0;
            }
            let u: Vec<f64> = (0..k).map(|r| y[r] - m[r]).collect();
            mvn_pdf(&omega, k, &u)
        } else {
            if j == 0 {
                return 0.0;
            }
            let xj = xs[j];
            let u2 = b + xj - m[k - 1];
            let u = if k == 2 {
                vec![y[0] - m[0] + rf.beta_tilde[0] * xj, u2]
            } else {
                vec![u2]
            };
            mvn_pdf(&omega, k, &u) * qw[j]
        }
    };

    let mut alphas: Vec<Vec<f64>> = Vec::with_capacity(t_len);
    let mut scale = Vec::with_capacity(t_len);
    let mut prev = vec![0.0; nn];
    prev[0] = 1.0;
    let mut loglik = 0.0;
    for t in 0..t_len {
        let mut next = vec![0.0; nn];
        for i in 0..nn {
            if prev[i] == 0.0 {
                continue;
            }
            for (j, nj) in next.iter_mut().enumerate() {
                *nj += prev[i] * kernel(t, i, j);
            }
        }
        let c: f64 = next.iter().sum();
        loglik += c.ln();
        next.iter_mut().for_each(|v| *v /= c);
        scale.push(c);
        alphas.push(next.clone());
        prev = next;
    }
    let mut beta = vec![1.0; nn];
    let mut smoothed = vec![0.0; t_len];
    for t in (0..t_len).rev() {
        let num: f64 = (0..nn).map(|j| alphas[t][j] * beta[j] * xs[j]).sum();
        let den: f64 = (0..nn).map(|j| alphas[t][j] * beta[j]).sum();
        smoothed[t] = num / den;
        if t > 0 {
            let mut nb = vec![0.0; nn];
            for (i, v) in nb.iter_mut().enumerate() {
                if alphas[t - 1][i] == 0.0 {
                    continue;
                }
                let mut acc = 0.0;
                for j in 0..nn {
                    if beta[j] != 0.0 {
                        acc += kernel(t, i, j) * beta[j];
                    }
                }
                *v = acc / scale[t];
            }
            beta = nb;
        }
    }
    let filtered = alphas
        .iter()
        .map(|a| a.iter().zip(&xs).map(|(w, x)| w * x).sum())
        .collect();
    GridResult {
        loglik,
        filtered_mean: filtered,
        smoothed_mean: smoothed,
    }
}
