//! Fully adapted particle filter with multinomial resampling of the latent
//! lags. The estimate is not continuous in the parameters.

use rand::distributions::Open01;
use rand::Rng;

use super::kernel::Kernel;
use super::sis::log_mean_exp;
use crate::error::{Error, Result};
use crate::model::ReducedForm;
use crate::simulate::Dataset;

pub(crate) struct FapfRun {
    pub loglik: f64,
    pub per_period: Vec<f64>,
    /// `M x p` latent lags after the last period.
    pub lags: Vec<f64>,
    /// `T x M` propagated latent gaps.
    pub xbar_hist: Option<Vec<f64>>,
    /// `T x M` ancestor indices into the particles of the previous period.
    pub ancestors: Option<Vec<usize>>,
}

pub(crate) fn run_fapf<R: Rng + ?Sized>(
    rf: &ReducedForm,
    data: &Dataset,
    m: usize,
    rng: &mut R,
    history: bool,
) -> Result<FapfRun> {
    let kern = Kernel::new(rf);
    let dims = rf.dims();
    let (p, q, k1) = (dims.p, dims.q(), dims.k1());
    let t_len = data.len();

    let mut lags = vec![0.0; m * p];
    let mut next = vec![0.0; m * p];
    let mut ll = vec![0.0; m];
    let mut a_vals = vec![0.0; m];
    let mut lc_vals = vec![0.0; m];
    let mut cdf = vec![0.0; m];
    let mut anc: Vec<usize> = (0..m).collect();
    let zero_lags = vec![0.0; p];
    let mut per_period = Vec::with_capacity(t_len);
    let mut xbar_hist = if history { Some(Vec::with_capacity(t_len * m)) } else { None };
    let mut anc_hist = if history { Some(Vec::with_capacity(t_len * m)) } else { None };

    let mut x = vec![0.0; q];
    let mut y = vec![0.0; k1 + 1];
    let mut per = kern.new_period();
    let mut ev = kern.new_eval();
    let mut zero_run = p;

    for t in 0..t_len {
        data.regressors_into(t, &mut x);
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = data.y[(t, i)];
        }
        let binds = data.d[t];
        kern.period(&x, &y, binds, &mut per);

        let s_t;
        if zero_run >= p {
            kern.eval(&per, &zero_lags, &mut ev);
            s_t = ev.ll;
            if !s_t.is_finite() {
                return Err(Error::ZeroWeights { t });
            }
            for (j, a) in anc.iter_mut().enumerate() {
                *a = j;
            }
            a_vals.iter_mut().for_each(|v| *v = ev.a);
            lc_vals.iter_mut().for_each(|v| *v = ev.ln_cdf_a);
        } else {
            for j in 0..m {
                kern.eval(&per, &lags[j * p..(j + 1) * p], &mut ev);
                ll[j] = ev.ll;
                a_vals[j] = ev.a;
                lc_vals[j] = ev.ln_cdf_a;
            }
            let (lme, mx) = log_mean_exp(&ll);
            if !mx.is_finite() || !lme.is_finite() {
                return Err(Error::ZeroWeights { t });
            }
            s_t = lme;
            let mut acc = 0.0;
            for j in 0..m {
                acc += (ll[j] - mx).exp();
                cdf[j] = acc;
            }
            for a in anc.iter_mut() {
                let target = rng.gen::<f64>() * acc;
                *a = cdf.partition_point(|&c| c <= target).min(m - 1);
            }
        }

        for j in 0..m {
            let src = anc[j];
            let new_gap = if binds {
                let u: f64 = rng.sample(Open01);
                kern.draw_at(a_vals[src], lc_vals[src], u).0
            } else {
                0.0
            };
            let dst = &mut next[j * p..(j + 1) * p];
            dst[0] = new_gap;
            dst[1..].copy_from_slice(&lags[src * p..src * p + p - 1]);
            if let Some(h) = xbar_hist.as_mut() {
                h.push(new_gap);
            }
        }
        std::mem::swap(&mut lags, &mut next);
        if let Some(h) = anc_hist.as_mut() {
            h.extend_from_slice(&anc);
        }
        if binds {
            zero_run = 0;
        } else if zero_run < p {
            zero_run += 1;
        }
        per_period.push(s_t);
    }

    Ok(FapfRun {
        loglik: per_period.iter().sum(),
        per_period,
        lags,
        xbar_hist,
        ancestors: anc_hist,
    })
}
