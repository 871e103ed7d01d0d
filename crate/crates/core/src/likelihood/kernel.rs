//! Per-period log densities of the reduced form and their gradients with
//! respect to the canonical parameter vector.
//!
//! Notation: `e1 = Y1 - C1 X - C1* xbar + beta (C2 X + C2* xbar - b)`,
//! `r = L^-1 e1`, `d = L^-1 (delta - beta)`, `s = d'd`, `g = d'r`,
//! `h = 1 + tau^2 s`. In the binding regime
//! `ln w = c1 - (r'r - tau^2 g^2 / h) / 2 + ln Phi(a)` with
//! `a = (b - m2) sqrt(h) / tau - tau g / sqrt(h)` and `c1` collecting the
//! normalizing constant and `-ln sqrt(h)`. Off the bound
//! `ln w = c0 - e2^2 / (2 tau^2) - v'v / 2` with `v = L^-1 (Y1 - C1 X - C1* xbar - delta e2)`.

use crate::model::{Layout, ReducedForm};
use crate::normal;

pub(crate) struct Kernel {
    pub k1: usize,
    pub p: usize,
    pub q: usize,
    pub lay: Layout,
    cbar: Vec<f64>,
    cstar: Vec<f64>,
    beta: Vec<f64>,
    delta: Vec<f64>,
    l: Vec<f64>,
    tau: f64,
    bound: f64,
    d: Vec<f64>,
    s: f64,
    h: f64,
    sqrt_h: f64,
    pub tau2: f64,
    c0: f64,
    c1: f64,
    /// `L^-1 (-C1*_l + beta C2*_l)`, stored `[i * p + l]`.
    lag_r: Vec<f64>,
    /// `L^-1 (-C1*_l + delta C2*_l)`.
    lag_v: Vec<f64>,
    /// Gradient of `tau2` (constant across periods and particles).
    grad_tau2: Vec<f64>,
}

/// Quantities of one period shared by all particles.
#[derive(Clone)]
pub(crate) struct Period {
    pub binds: bool,
    /// `C2 X - b` when binding, `Y2 - C2 X` otherwise.
    pub scalar: f64,
    /// `r` or `v` at `xbar = 0`.
    pub base: Vec<f64>,
}

/// Particle-specific evaluation.
#[derive(Clone)]
pub(crate) struct Eval {
    pub ll: f64,
    /// `r` (binding) or `v`.
    pub vec: Vec<f64>,
    /// `m2 - b` (binding) or `e2`.
    pub scalar: f64,
    pub g: f64,
    pub a: f64,
    pub ln_cdf_a: f64,
}

pub(crate) struct Scratch {
    rho: Vec<f64>,
    eta: Vec<f64>,
}

struct Adjoint<'w> {
    rho: &'w [f64],
    eta: &'w [f64],
    state: &'w [f64],
    coef2: f64,
    rho_beta: f64,
    rho_delta: f64,
    ldiag: f64,
    tau: f64,
}

impl Kernel {
    pub fn new(rf: &ReducedForm) -> Self {
        let dims = rf.dims();
        let (k, p, q, k1) = (dims.k, dims.p, dims.q(), dims.k1());
        let lay = dims.layout();
        let cbar: Vec<f64> = (0..k * q).map(|ix| rf.cbar[(ix / q, ix % q)]).collect();
        let cstar: Vec<f64> = (0..k * p).map(|ix| rf.cbar_star[(ix / p, ix % p)]).collect();
        let beta: Vec<f64> = rf.beta_tilde.iter().copied().collect();
        let delta: Vec<f64> = rf.delta.iter().copied().collect();
        let l: Vec<f64> = (0..k1 * k1).map(|ix| rf.chol[(ix / k1, ix % k1)]).collect();
        let tau = rf.tau;
        let mut kern = Self {
            k1,
            p,
            q,
            lay,
            cbar,
            cstar,
            beta,
            delta,
            l,
            tau,
            bound: rf.bound,
            d: vec![0.0; k1],
            s: 0.0,
            h: 1.0,
            sqrt_h: 1.0,
            tau2: tau,
            c0: 0.0,
            c1: 0.0,
            lag_r: vec![0.0; k1 * p],
            lag_v: vec![0.0; k1 * p],
            grad_tau2: vec![0.0; lay.n],
        };
        let mut d: Vec<f64> = (0..k1).map(|i| kern.delta[i] - kern.beta[i]).collect();
        kern.solve_l(&mut d);
        kern.s = d.iter().map(|v| v * v).sum();
        kern.d = d;
        kern.h = 1.0 + tau * tau * kern.s;
        kern.sqrt_h = kern.h.sqrt();
        kern.tau2 = tau / kern.sqrt_h;
        let ln_det_l: f64 = (0..k1).map(|i| kern.l[i * k1 + i].ln()).sum();
        kern.c0 = -(k as f64) * 0.5 * normal::LN_2PI - tau.ln() - ln_det_l;
        kern.c1 = -(k1 as f64) * 0.5 * normal::LN_2PI - ln_det_l - 0.5 * kern.h.ln();
        let mut col = vec![0.0; k1];
        for lag in 0..p {
            let c2 = kern.cstar[k1 * p + lag];
            for i in 0..k1 {
                col[i] = -kern.cstar[i * p + lag] + kern.beta[i] * c2;
            }
            kern.solve_l(&mut col);
            for i in 0..k1 {
                kern.lag_r[i * p + lag] = col[i];
            }
            for i in 0..k1 {
                col[i] = -kern.cstar[i * p + lag] + kern.delta[i] * c2;
            }
            kern.solve_l(&mut col);
            for i in 0..k1 {
                kern.lag_v[i * p + lag] = col[i];
            }
        }
        // tau2 = tau / sqrt(h), h = 1 + tau^2 s
        let dt2_dh = -0.5 * tau / (kern.h * kern.sqrt_h);
        let adj_d: Vec<f64> = kern.d.iter().map(|v| 2.0 * tau * tau * dt2_dh * v).collect();
        let mut eta = adj_d;
        kern.solve_lt(&mut eta);
        let zeros = vec![0.0; k1];
        let adj = Adjoint {
            rho: &zeros,
            eta: &eta,
            state: &zeros,
            coef2: 0.0,
            rho_beta: 0.0,
            rho_delta: 0.0,
            ldiag: 0.0,
            tau: 1.0 / kern.sqrt_h + 2.0 * tau * kern.s * dt2_dh,
        };
        let xz = vec![0.0; q];
        let xbz = vec![0.0; p];
        let mut g = vec![0.0; lay.n];
        kern.assemble(&xz, &xbz, None, &adj, &mut g);
        kern.grad_tau2 = g;
        kern
    }

    pub fn scratch(&self) -> Scratch {
        Scratch {
            rho: vec![0.0; self.k1],
            eta: vec![0.0; self.k1],
        }
    }

    pub fn new_eval(&self) -> Eval {
        Eval {
            ll: 0.0,
            vec: vec![0.0; self.k1],
            scalar: 0.0,
            g: 0.0,
            a: 0.0,
            ln_cdf_a: 0.0,
        }
    }

    pub fn new_period(&self) -> Period {
        Period {
            binds: false,
            scalar: 0.0,
            base: vec![0.0; self.k1],
        }
    }

    /// Solves `L x = b` in place.
    fn solve_l(&self, b: &mut [f64]) {
        let k1 = self.k1;
        for i in 0..k1 {
            let mut acc = b[i];
            for j in 0..i {
                acc -= self.l[i * k1 + j] * b[j];
            }
            b[i] = acc / self.l[i * k1 + i];
        }
    }

    /// Solves `L' x = b` in place.
    fn solve_lt(&self, b: &mut [f64]) {
        let k1 = self.k1;
        for i in (0..k1).rev() {
            let mut acc = b[i];
            for j in i + 1..k1 {
                acc -= self.l[j * k1 + i] * b[j];
            }
            b[i] = acc / self.l[i * k1 + i];
        }
    }

    fn row_dot(&self, row: usize, x: &[f64]) -> f64 {
        let q = self.q;
        self.cbar[row * q..(row + 1) * q]
            .iter()
            .zip(x)
            .map(|(c, v)| c * v)
            .sum()
    }

    pub fn c2_star(&self, lag: usize) -> f64 {
        self.cstar[self.k1 * self.p + lag]
    }

    /// Fills the particle-independent part of period `t`.
    pub fn period(&self, x: &[f64], y: &[f64], binds: bool, out: &mut Period) {
        let k1 = self.k1;
        out.binds = binds;
        let c2x = self.row_dot(k1, x);
        if binds {
            let m2b = c2x - self.bound;
            out.scalar = m2b;
            for i in 0..k1 {
                out.base[i] = y[i] - self.row_dot(i, x) + self.beta[i] * m2b;
            }
        } else {
            let e2 = y[k1] - c2x;
            out.scalar = e2;
            for i in 0..k1 {
                out.base[i] = y[i] - self.row_dot(i, x) - self.delta[i] * e2;
            }
        }
        self.solve_l(&mut out.base);
    }

    /// Log incremental weight for latent lags `xbar` (most recent first).
    pub fn eval(&self, per: &Period, xbar: &[f64], ev: &mut Eval) {
        let (k1, p) = (self.k1, self.p);
        let mut c2s = 0.0;
        for (l, xl) in xbar.iter().enumerate() {
            c2s += self.c2_star(l) * xl;
        }
        let lag = if per.binds { &self.lag_r } else { &self.lag_v };
        for i in 0..k1 {
            let mut acc = per.base[i];
            for (l, xl) in xbar.iter().enumerate() {
                acc += lag[i * p + l] * xl;
            }
            ev.vec[i] = acc;
        }
        let rr: f64 = ev.vec.iter().map(|v| v * v).sum();
        let t2 = self.tau * self.tau;
        if per.binds {
            let m2b = per.scalar + c2s;
            let g: f64 = self.d.iter().zip(&ev.vec).map(|(a, b)| a * b).sum();
            let a = -m2b * self.sqrt_h / self.tau - self.tau * g / self.sqrt_h;
            let lca = normal::ln_cdf(a);
            ev.scalar = m2b;
            ev.g = g;
            ev.a = a;
            ev.ln_cdf_a = lca;
            ev.ll = self.c1 - 0.5 * (rr - t2 * g * g / self.h) + lca;
        } else {
            let e2 = per.scalar - c2s;
            ev.scalar = e2;
            ev.ll = self.c0 - 0.5 * e2 * e2 / t2 - 0.5 * rr;
        }
    }

    /// Conditional mean of `u2` given `Y1` in the binding regime.
    pub fn mu2(&self, ev: &Eval) -> f64 {
        self.tau * self.tau * ev.g / self.h
    }

    /// Draws the latent gap `xbar_t <= 0` from the truncated conditional
    /// distribution. Returns `(xbar, dx/da, dx/dtau2)`.
    pub fn draw(&self, ev: &Eval, u: f64) -> (f64, f64, f64) {
        self.draw_at(ev.a, ev.ln_cdf_a, u)
    }

    pub fn draw_at(&self, a: f64, ln_cdf_a: f64, u: f64) -> (f64, f64, f64) {
        let lnp = u.ln() + ln_cdf_a;
        let z = normal::quantile_ln(lnp).min(a);
        let dz = (u.ln() + normal::ln_pdf(a) - normal::ln_pdf(z)).exp();
        let x = (self.tau2 * (z - a)).min(0.0);
        (x, self.tau2 * (dz - 1.0), z - a)
    }

    pub fn grad_tau2(&self) -> &[f64] {
        &self.grad_tau2
    }

    /// Writes the gradient of the log weight into `out`, adding the chain
    /// through the latent lags when `dxbar` (`p` blocks of length `n`) is given.
    pub fn grad_ll(
        &self,
        x: &[f64],
        xbar: &[f64],
        ev: &Eval,
        binds: bool,
        dxbar: Option<&[f64]>,
        sc: &mut Scratch,
        out: &mut [f64],
    ) {
        let k1 = self.k1;
        let t = self.tau;
        if binds {
            let lam = (normal::ln_pdf(ev.a) - ev.ln_cdf_a).exp();
            let (sh, h, g, m2b) = (self.sqrt_h, self.h, ev.g, ev.scalar);
            let a_g = -t / sh;
            let a_h = -m2b / (2.0 * t * sh) + t * g / (2.0 * h * sh);
            let a_m = -sh / t;
            let a_t = m2b * sh / (t * t) - g / sh;
            let f_g = t * t * g / h + lam * a_g;
            let f_h = -0.5 / h - 0.5 * t * t * g * g / (h * h) + lam * a_h;
            let f_m = lam * a_m;
            let f_t = t * g * g / h + lam * a_t;
            self.chain_binding(x, xbar, ev, dxbar, -1.0, f_g, f_h, f_m, f_t, 1.0, sc, out);
        } else {
            for i in 0..k1 {
                sc.rho[i] = -ev.vec[i];
            }
            self.solve_lt(&mut sc.rho);
            let e2 = ev.scalar;
            let drho: f64 = self.delta.iter().zip(&sc.rho).map(|(a, b)| a * b).sum();
            sc.eta.iter_mut().for_each(|v| *v = 0.0);
            let adj = Adjoint {
                rho: &sc.rho,
                eta: &sc.eta,
                state: &ev.vec,
                coef2: drho + e2 / (t * t),
                rho_beta: 0.0,
                rho_delta: -e2,
                ldiag: 1.0,
                tau: -1.0 / t + e2 * e2 / (t * t * t),
            };
            self.assemble(x, xbar, dxbar, &adj, out);
        }
    }

    /// Gradient of the drawn latent gap given the derivatives returned by
    /// [`Kernel::draw`].
    pub fn grad_draw(
        &self,
        x: &[f64],
        xbar: &[f64],
        ev: &Eval,
        kap_a: f64,
        kap_t: f64,
        dxbar: Option<&[f64]>,
        sc: &mut Scratch,
        out: &mut [f64],
    ) {
        let t = self.tau;
        let (sh, h, g, m2b) = (self.sqrt_h, self.h, ev.g, ev.scalar);
        let a_g = -t / sh;
        let a_h = -m2b / (2.0 * t * sh) + t * g / (2.0 * h * sh);
        let a_m = -sh / t;
        let a_t = m2b * sh / (t * t) - g / sh;
        self.chain_binding(
            x,
            xbar,
            ev,
            dxbar,
            0.0,
            kap_a * a_g,
            kap_a * a_h,
            kap_a * a_m,
            kap_a * a_t,
            0.0,
            sc,
            out,
        );
        if kap_t != 0.0 {
            for (o, gt) in out.iter_mut().zip(&self.grad_tau2) {
                *o += kap_t * gt;
            }
        }
    }

    /// Maps partials of a binding-regime function `f(r, g, h, m2, tau)` with
    /// `df/dr = r_coef * r` into the parameter gradient.
    #[allow(clippy::too_many_arguments)]
    fn chain_binding(
        &self,
        x: &[f64],
        xbar: &[f64],
        ev: &Eval,
        dxbar: Option<&[f64]>,
        r_coef: f64,
        f_g: f64,
        f_h: f64,
        f_m: f64,
        f_t: f64,
        ldiag: f64,
        sc: &mut Scratch,
        out: &mut [f64],
    ) {
        let k1 = self.k1;
        let t = self.tau;
        let f_s = t * t * f_h;
        for i in 0..k1 {
            sc.rho[i] = r_coef * ev.vec[i] + f_g * self.d[i];
            sc.eta[i] = f_g * ev.vec[i] + 2.0 * f_s * self.d[i];
        }
        self.solve_lt(&mut sc.rho);
        self.solve_lt(&mut sc.eta);
        let brho: f64 = self.beta.iter().zip(&sc.rho).map(|(a, b)| a * b).sum();
        let adj = Adjoint {
            rho: &sc.rho,
            eta: &sc.eta,
            state: &ev.vec,
            coef2: brho + f_m,
            rho_beta: ev.scalar,
            rho_delta: 0.0,
            ldiag,
            tau: f_t + 2.0 * t * self.s * f_h,
        };
        self.assemble(x, xbar, dxbar, &adj, out);
    }

    fn assemble(
        &self,
        x: &[f64],
        xbar: &[f64],
        dxbar: Option<&[f64]>,
        adj: &Adjoint,
        out: &mut [f64],
    ) {
        let (k1, p, q) = (self.k1, self.p, self.q);
        let lay = self.lay;
        let n = lay.n;
        for i in 0..k1 {
            let r = adj.rho[i];
            for c in 0..q {
                out[lay.cbar + i * q + c] = -r * x[c];
            }
            for l in 0..p {
                out[lay.cstar + i * p + l] = -r * xbar[l];
            }
            out[lay.beta + i] = adj.rho_beta * r - adj.eta[i];
            out[lay.delta + i] = adj.rho_delta * r + adj.eta[i];
            for j in 0..=i {
                let mut v = -r * adj.state[j] - adj.eta[i] * self.d[j];
                if i == j {
                    v -= adj.ldiag / self.l[i * k1 + i];
                }
                out[lay.chol + crate::model::tri_index(i, j)] = v;
            }
        }
        for c in 0..q {
            out[lay.cbar + k1 * q + c] = adj.coef2 * x[c];
        }
        for l in 0..p {
            out[lay.cstar + k1 * p + l] = adj.coef2 * xbar[l];
        }
        out[lay.tau] = adj.tau;
        if let Some(dx) = dxbar {
            for l in 0..p {
                let mut lc = adj.coef2 * self.c2_star(l);
                for i in 0..k1 {
                    lc -= adj.rho[i] * self.cstar[i * p + l];
                }
                if lc != 0.0 {
                    for (o, v) in out.iter_mut().zip(&dx[l * n..(l + 1) * n]) {
                        *o += lc * v;
                    }
                }
            }
        }
    }
}
