//! Sequential importance sampling with common random numbers, optionally
//! carrying the forward-mode derivative of every particle.

use super::kernel::Kernel;
use super::Uniforms;
use crate::error::{Error, Result};
use crate::model::ReducedForm;
use crate::simulate::Dataset;

#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct SisOptions {
    pub grad: bool,
    pub scores: bool,
    pub history: bool,
}

pub(crate) struct SisRun {
    pub loglik: f64,
    pub per_period: Vec<f64>,
    pub ess: Vec<f64>,
    pub grad: Option<Vec<f64>>,
    /// Per-period scores, `T` rows of length `n`.
    pub scores: Option<Vec<Vec<f64>>>,
    /// `M x p` latent lags after the last period, most recent first.
    pub lags: Vec<f64>,
    /// Normalized log weights after the last period.
    pub log_weights: Vec<f64>,
    /// `T x M` latent gaps and log weights per period.
    pub xbar_hist: Option<Vec<f64>>,
    pub lw_hist: Option<Vec<f64>>,
    /// Periods at whose start the weights were reset because every
    /// particle had the same (zero) latent lags.
    pub resets: Vec<usize>,
}

/// ESS `(sum W)^2 / sum W^2` from log weights.
pub(crate) fn ess_from_log(lw: &[f64]) -> f64 {
    let mx = lw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (mut s1, mut s2) = (0.0, 0.0);
    for v in lw {
        let w = (v - mx).exp();
        s1 += w;
        s2 += w * w;
    }
    s1 * s1 / s2
}

/// `ln((1/M) sum exp(v_j))`, returning the max as well.
pub(crate) fn log_mean_exp(v: &[f64]) -> (f64, f64) {
    let mx = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !mx.is_finite() {
        return (mx, mx);
    }
    let s: f64 = v.iter().map(|x| (x - mx).exp()).sum();
    (mx + (s / v.len() as f64).ln(), mx)
}

pub(crate) fn run_sis(
    rf: &ReducedForm,
    data: &Dataset,
    uni: &Uniforms,
    opts: SisOptions,
) -> Result<SisRun> {
    let kern = Kernel::new(rf);
    let dims = rf.dims();
    let (p, q, k1) = (dims.p, dims.q(), dims.k1());
    let n = kern.lay.n;
    let m = uni.m;
    let t_len = data.len();
    if uni.t_len < t_len {
        return Err(Error::Misuse(format!(
            "uniform draws cover {} periods, data has {t_len}",
            uni.t_len
        )));
    }
    let grad = opts.grad || opts.scores;

    let mut lags = vec![0.0; m * p];
    let mut dlags = if grad { vec![0.0; m * p * n] } else { Vec::new() };
    let mut lw = vec![0.0; m];
    let mut ll = vec![0.0; m];
    let mut new_x = vec![0.0; m];
    let mut dnew = if grad { vec![0.0; m * n] } else { Vec::new() };
    let mut dev = if grad { vec![0.0; m * n] } else { Vec::new() };
    let mut common = vec![0.0; n];
    let mut gtmp = vec![0.0; n];
    let mut ga = vec![0.0; n];
    let mut prev_total = vec![0.0; n];
    let mut total = vec![0.0; n];
    let zero_lags = vec![0.0; p];

    let mut per_period = Vec::with_capacity(t_len);
    let mut ess = Vec::with_capacity(t_len);
    let mut scores = if opts.scores { Some(Vec::with_capacity(t_len)) } else { None };
    let mut xbar_hist = if opts.history { Some(Vec::with_capacity(t_len * m)) } else { None };
    let mut lw_hist = if opts.history { Some(Vec::with_capacity(t_len * m)) } else { None };

    let mut x = vec![0.0; q];
    let mut y = vec![0.0; k1 + 1];
    let mut per = kern.new_period();
    let mut ev = kern.new_eval();
    let mut sc = kern.scratch();
    // Periods since the last binding observation; the latent lags are all
    // zero (for every particle) once this reaches p.
    let mut zero_run = p;
    // weights are flat, so there is nothing to fold in
    let mut flat = true;
    let mut resets = Vec::new();

    for t in 0..t_len {
        data.regressors_into(t, &mut x);
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = data.y[(t, i)];
        }
        let binds = data.d[t];
        kern.period(&x, &y, binds, &mut per);
        let u = &uni.values[t * m..(t + 1) * m];

        if zero_run >= p && !flat {
            // The particles now share one state, so the likelihood factors at
            // this period: fold the derivative in and start from flat weights.
            if grad {
                weighted_total(&common, &dev, &lw, n, &mut total);
                common.copy_from_slice(&total);
                dev.fill(0.0);
            }
            lw.fill(0.0);
            flat = true;
            resets.push(t);
        }

        let s_t;
        if zero_run >= p {
            kern.eval(&per, &zero_lags, &mut ev);
            s_t = ev.ll;
            if !s_t.is_finite() {
                return Err(Error::ZeroWeights { t });
            }
            if grad {
                kern.grad_ll(&x, &zero_lags, &ev, binds, None, &mut sc, &mut gtmp);
                for (c, g) in common.iter_mut().zip(&gtmp) {
                    *c += g;
                }
            }
            if binds {
                if grad {
                    kern.grad_draw(&x, &zero_lags, &ev, 1.0, 0.0, None, &mut sc, &mut ga);
                }
                for j in 0..m {
                    let (xn, ka, kt) = kern.draw(&ev, u[j]);
                    new_x[j] = xn;
                    if grad {
                        let dst = &mut dnew[j * n..(j + 1) * n];
                        for ((o, a), b) in dst.iter_mut().zip(&ga).zip(kern.grad_tau2()) {
                            *o = ka * a + kt * b;
                        }
                    }
                }
            }
        } else {
            for j in 0..m {
                let xb = &lags[j * p..(j + 1) * p];
                kern.eval(&per, xb, &mut ev);
                ll[j] = ev.ll;
                if grad {
                    let dxb = &dlags[j * p * n..(j + 1) * p * n];
                    kern.grad_ll(&x, xb, &ev, binds, Some(dxb), &mut sc, &mut gtmp);
                    for (d, g) in dev[j * n..(j + 1) * n].iter_mut().zip(&gtmp) {
                        *d += g;
                    }
                }
                if binds {
                    let (xn, ka, kt) = kern.draw(&ev, u[j]);
                    new_x[j] = xn;
                    if grad {
                        let dxb = &dlags[j * p * n..(j + 1) * p * n];
                        kern.grad_draw(
                            &x,
                            xb,
                            &ev,
                            ka,
                            kt,
                            Some(dxb),
                            &mut sc,
                            &mut dnew[j * n..(j + 1) * n],
                        );
                    }
                }
            }
            for j in 0..m {
                ll[j] += lw[j];
            }
            let (lme, mx) = log_mean_exp(&ll);
            if !mx.is_finite() || !lme.is_finite() {
                return Err(Error::ZeroWeights { t });
            }
            // normalized weights keep mean one: W_t = w W_{t-1} / S_t
            for j in 0..m {
                lw[j] = ll[j] - lme;
            }
            s_t = lme;
            flat = false;
        }

        if binds {
            zero_run = 0;
            for j in 0..m {
                let row = &mut lags[j * p..(j + 1) * p];
                row.copy_within(0..p - 1, 1);
                row[0] = new_x[j];
                if grad {
                    let blk = &mut dlags[j * p * n..(j + 1) * p * n];
                    blk.copy_within(0..(p - 1) * n, n);
                    blk[..n].copy_from_slice(&dnew[j * n..(j + 1) * n]);
                }
            }
        } else if zero_run < p {
            zero_run += 1;
            for j in 0..m {
                let row = &mut lags[j * p..(j + 1) * p];
                row.copy_within(0..p - 1, 1);
                row[0] = 0.0;
                if grad {
                    let blk = &mut dlags[j * p * n..(j + 1) * p * n];
                    blk.copy_within(0..(p - 1) * n, n);
                    blk[..n].iter_mut().for_each(|v| *v = 0.0);
                }
            }
        }

        per_period.push(s_t);
        ess.push(ess_from_log(&lw));
        if let Some(sc_out) = scores.as_mut() {
            weighted_total(&common, &dev, &lw, n, &mut total);
            let row: Vec<f64> = total.iter().zip(&prev_total).map(|(a, b)| a - b).collect();
            sc_out.push(row);
            prev_total.copy_from_slice(&total);
        }
        if let Some(h) = xbar_hist.as_mut() {
            if binds {
                h.extend_from_slice(&new_x);
            } else {
                h.extend(std::iter::repeat(0.0).take(m));
            }
        }
        if let Some(h) = lw_hist.as_mut() {
            h.extend_from_slice(&lw);
        }
    }

    let grad_out = if grad {
        weighted_total(&common, &dev, &lw, n, &mut total);
        Some(total.clone())
    } else {
        None
    };
    Ok(SisRun {
        loglik: per_period.iter().sum(),
        per_period,
        ess,
        grad: grad_out,
        scores,
        lags,
        log_weights: lw,
        xbar_hist,
        lw_hist,
        resets,
    })
}

fn weighted_total(common: &[f64], dev: &[f64], lw: &[f64], n: usize, out: &mut [f64]) {
    out.copy_from_slice(common);
    if dev.is_empty() {
        return;
    }
    let mx = lw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = lw.iter().map(|v| (v - mx).exp()).collect();
    let sw: f64 = w.iter().sum();
    for (j, wj) in w.iter().enumerate() {
        let pj = wj / sw;
        if pj == 0.0 {
            continue;
        }
        for (o, d) in out.iter_mut().zip(&dev[j * n..(j + 1) * n]) {
            *o += pj * d;
        }
    }
}
