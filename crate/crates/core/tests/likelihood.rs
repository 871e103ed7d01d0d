mod common;

use cksvar::likelihood::{
    cond_u2_moments, draw_truncated_shadow, f0_density, f1_density, prob_bound,
};
use cksvar::{
    filter_latent, loglik_fapf, loglik_ksvar, loglik_sis, simulate, Dataset, FilterKind,
    InitialConditions, LatentState, ReducedForm, Uniforms,
};
use common::quadrature::grid_filter;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{Continuous, ContinuousCDF, MultivariateNormal, Normal};

fn random_state(rf: &ReducedForm, rng: &mut ChaCha8Rng) -> LatentState {
    let d = rf.dims();
    let mut x = DVector::from_fn(d.q(), |_, _| rng.gen_range(-1.0..1.0));
    x[0] = 1.0;
    LatentState {
        x,
        xbar: DVector::from_fn(d.p, |_, _| -rng.gen_range(0.0..1.5)),
    }
}

fn cond_mean(rf: &ReducedForm, st: &LatentState) -> DVector<f64> {
    &rf.cbar * &st.x + &rf.cbar_star * &st.xbar
}

#[test]
fn f0_matches_multivariate_normal_pdf() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for seed in 0..20 {
        let rf = common::random_rf(3, 2, seed);
        let st = random_state(&rf, &mut rng);
        let m = cond_mean(&rf, &st);
        let y = DVector::from_fn(3, |i, _| m[i] + rng.gen_range(-1.0..1.0));
        let mvn = MultivariateNormal::new(m.iter().copied().collect(), rf.omega().iter().copied().collect())
            .unwrap();
        let oracle = mvn.pdf(&y);
        let got = f0_density(&rf, &y, &st).unwrap();
        assert!((got - oracle).abs() < 1e-12 * oracle.max(1e-300), "{got} vs {oracle}");
    }
}

#[test]
fn f0_reduces_to_scalar_normal_when_k_is_one() {
    let rf = common::tobit_rf();
    let st = LatentState {
        x: DVector::from_row_slice(&[1.0, 0.5]),
        xbar: DVector::from_element(1, -0.2),
    };
    let m = 0.1 + 0.5 * 0.5 + 0.6 * -0.2;
    let got = f0_density(&rf, &DVector::from_element(1, 1.3), &st).unwrap();
    let oracle = Normal::new(m, 0.8).unwrap().pdf(1.3);
    assert!((got - oracle).abs() < 1e-14);
}

#[test]
fn binding_density_pieces_match_direct_formulas() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for seed in 0..20 {
        let rf = common::random_rf(3, 1, 100 + seed);
        let st = random_state(&rf, &mut rng);
        let m = cond_mean(&rf, &st);
        let y1 = DVector::from_fn(2, |_, _| rng.gen_range(-1.5..1.5));
        let omega = rf.omega();
        let beta = &rf.beta_tilde;
        // Xi1 = (I, -beta) Omega (I, -beta)'
        let mut sel = DMatrix::zeros(2, 3);
        sel[(0, 0)] = 1.0;
        sel[(1, 1)] = 1.0;
        sel[(0, 2)] = -beta[0];
        sel[(1, 2)] = -beta[1];
        let xi1 = &sel * &omega * sel.transpose();
        let xi1 = (&xi1 + xi1.transpose()) * 0.5;
        assert!((&xi1 - rf.xi1()).abs().max() < 1e-12);

        let m1 = DVector::from_fn(2, |i, _| m[i] + beta[i] * (rf.bound - m[2]));
        let mvn = MultivariateNormal::new(m1.iter().copied().collect(), xi1.iter().copied().collect())
            .unwrap();
        let f1 = f1_density(&rf, &y1, &st).unwrap();
        assert!((f1 - mvn.pdf(&y1)).abs() < 1e-12 * f1);

        let tau2 = omega[(2, 2)];
        let dtil = DVector::from_fn(2, |i, _| omega[(i, 2)] / tau2 - beta[i]);
        let xinv = xi1.clone().try_inverse().unwrap();
        let e1 = &y1 - &m1;
        let mu2 = tau2 * (dtil.transpose() * &xinv * &e1)[(0, 0)];
        let sd2 = (tau2 * (1.0 - tau2 * (dtil.transpose() * &xinv * &dtil)[(0, 0)])).sqrt();
        let (g_mu, g_sd) = cond_u2_moments(&rf, &y1, &st).unwrap();
        assert!((g_mu - mu2).abs() < 1e-12);
        assert!((g_sd - sd2).abs() < 1e-12);
        let pb = Normal::new(0.0, 1.0).unwrap().cdf((rf.bound - m[2] - mu2) / sd2);
        let got = prob_bound(&rf, &y1, &st).unwrap();
        assert!((got - pb).abs() < 1e-10, "{got} vs {pb}");
    }
}

#[test]
fn truncated_draws_follow_truncated_normal() {
    let rf = common::random_rf(3, 1, 7);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let st = random_state(&rf, &mut rng);
    let y1 = DVector::from_row_slice(&[0.2, -0.3]);
    let (mu2, sd2) = cond_u2_moments(&rf, &y1, &st).unwrap();
    let center = cond_mean(&rf, &st)[2] + mu2;
    let nd = Normal::new(center, sd2).unwrap();
    let top = nd.cdf(rf.bound);
    let n = 100_000;
    let mut draws: Vec<f64> = (0..n)
        .map(|_| draw_truncated_shadow(&rf, &y1, &st, rng.gen_range(f64::EPSILON..1.0)).unwrap())
        .collect();
    assert!(draws.iter().all(|v| *v < rf.bound));
    draws.sort_by(f64::total_cmp);
    let mut ks: f64 = 0.0;
    for (i, v) in draws.iter().enumerate() {
        let f = nd.cdf(*v) / top;
        ks = ks.max((f - i as f64 / n as f64).abs()).max((f - (i + 1) as f64 / n as f64).abs());
    }
    assert!(ks < 0.01, "KS distance {ks}");
}

#[test]
fn truncated_draw_is_increasing_in_u() {
    let rf = common::random_rf(3, 1, 9);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let st = random_state(&rf, &mut rng);
    let y1 = DVector::from_row_slice(&[0.1, 0.4]);
    let mut last = f64::NEG_INFINITY;
    for i in 1..1000 {
        let v = draw_truncated_shadow(&rf, &y1, &st, i as f64 / 1000.0).unwrap();
        assert!(v > last && v < rf.bound);
        last = v;
    }
    let top = draw_truncated_shadow(&rf, &y1, &st, 1.0 - 1e-12).unwrap();
    assert!(top < rf.bound && top > rf.bound - 1e-6);
}

#[test]
fn single_observation_at_mean() {
    let rf = ReducedForm::from_omega(
        DMatrix::zeros(3, 4),
        DMatrix::zeros(3, 1),
        DVector::zeros(2),
        &DMatrix::identity(3, 3),
        0.0,
        1,
        1,
    )
    .unwrap();
    let data = Dataset::from_observations(
        DMatrix::from_row_slice(1, 3, &[0.0, 0.0, 1e-3]),
        DMatrix::zeros(1, 3),
        DMatrix::from_element(1, 1, 1.0),
        0.0,
        0.0,
        1,
    )
    .unwrap();
    let mut rf_at = rf.clone();
    rf_at.cbar[(2, 0)] = 1e-3;
    let ll = loglik_ksvar(&rf_at, &data).unwrap();
    assert!((ll.loglik + 1.5 * (2.0 * std::f64::consts::PI).ln()).abs() < 1e-14);
    assert!(loglik_ksvar(&common::toy_k2_rf(), &common::toy_k2_data()).is_err());
}

#[test]
fn kinked_likelihood_matches_quadrature() {
    let rf = common::toy_k2_rf().without_latent_lags();
    let data = common::toy_k2_data();
    let mut two = data.clone();
    two.y = data.y.rows(0, 2).clone_owned();
    two.d.truncate(2);
    two.x0 = data.x0.rows(0, 2).clone_owned();
    for d in [&two, &data] {
        let exact = loglik_ksvar(&rf, d).unwrap().loglik;
        let grid = grid_filter(&rf, d, 2000, -12.0).loglik;
        assert!((exact - grid).abs() < 1e-8, "{exact} vs {grid}");
    }
}

#[test]
fn particle_filters_equal_analytic_without_latent_lags() {
    let rf = common::random_rf(3, 2, 3).without_latent_lags();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (data, _) = simulate(&rf, 60, &InitialConditions::zeros(rf.dims()), &mut rng).unwrap();
    let exact = loglik_ksvar(&rf, &data).unwrap();
    for (m, seed) in [(1, 1), (7, 2), (100, 3)] {
        let (sis, ps) = loglik_sis(&rf, &data, &Uniforms::new(60, m, seed)).unwrap();
        assert!((sis.loglik - exact.loglik).abs() <= 1e-10);
        assert!(sis.ess.iter().all(|e| (*e - m as f64).abs() < 1e-9 * m as f64));
        assert_eq!(ps.m, m);
        if m >= 2 {
            let mut r = ChaCha8Rng::seed_from_u64(seed);
            let fapf = loglik_fapf(&rf, &data, m, &mut r).unwrap();
            assert!((fapf.loglik - exact.loglik).abs() <= 1e-10);
        }
    }
}

#[test]
fn per_period_sums_to_loglik() {
    let rf = common::toy_k2_rf();
    let data = common::toy_k2_data();
    let (res, _) = loglik_sis(&rf, &data, &Uniforms::new(5, 50, 1)).unwrap();
    let s: f64 = res.per_period.iter().sum();
    assert!((s - res.loglik).abs() < 1e-12);
    assert_eq!(res.ess.len(), 5);
}

#[test]
fn particle_filters_match_quadrature_on_toy() {
    let rf = common::toy_k2_rf();
    let data = common::toy_k2_data();
    let oracle = grid_filter(&rf, &data, 2000, -12.0).loglik;
    let (sis, _) = loglik_sis(&rf, &data, &Uniforms::new(5, 100_000, 21)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let fapf = loglik_fapf(&rf, &data, 100_000, &mut rng).unwrap();
    for v in [sis.loglik, fapf.loglik] {
        assert!((v - oracle).abs() < 5e-4 * oracle.abs(), "{v} vs {oracle}");
    }
}

#[test]
fn dynamic_tobit_matches_quadrature() {
    let rf = common::tobit_rf();
    let data = common::tobit_data();
    let oracle = grid_filter(&rf, &data, 2000, -12.0).loglik;
    let (sis, _) = loglik_sis(&rf, &data, &Uniforms::new(5, 100_000, 5)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let fapf = loglik_fapf(&rf, &data, 100_000, &mut rng).unwrap();
    for v in [sis.loglik, fapf.loglik] {
        assert!((v - oracle).abs() < 5e-4 * oracle.abs(), "{v} vs {oracle}");
    }
}

#[test]
fn smoothing_means_match_quadrature() {
    let rf = common::toy_k2_rf();
    let mut data = common::toy_k2_data();
    data.y = data.y.rows(0, 3).clone_owned();
    data.d.truncate(3);
    data.x0 = data.x0.rows(0, 3).clone_owned();
    let oracle = grid_filter(&rf, &data, 2000, -12.0);
    for kind in [FilterKind::Sis, FilterKind::Fapf] {
        let f = filter_latent(&rf, &data, 100_000, kind, 3).unwrap();
        for t in 0..3 {
            assert!((f.filtered_mean[t] - oracle.filtered_mean[t]).abs() < 0.01, "{kind:?} filt {t}");
            assert!((f.smoothed_mean[t] - oracle.smoothed_mean[t]).abs() < 0.01, "{kind:?} smooth {t}");
        }
    }
    // the first period is off the bound, the next two bind
    assert_eq!(oracle.filtered_mean[0], 0.0);
    assert!(oracle.smoothed_mean[1] < 0.0 && oracle.smoothed_mean[2] < 0.0);
}

#[test]
fn filtered_latent_gap_is_zero_off_bound_and_negative_on_it() {
    let rf = common::random_rf(3, 2, 12);
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let (data, _) = simulate(&rf, 80, &InitialConditions::zeros(rf.dims()), &mut rng).unwrap();
    for kind in [FilterKind::Sis, FilterKind::Fapf] {
        let f = filter_latent(&rf, &data, 200, kind, 1).unwrap();
        for t in 0..data.len() {
            if data.d[t] {
                assert!(f.filtered_mean[t] < 0.0);
            } else {
                assert_eq!(f.filtered_mean[t], 0.0);
            }
        }
    }
}

#[test]
fn particle_order_does_not_matter() {
    let rf = common::toy_k2_rf();
    let data = common::toy_k2_data();
    let m = 64;
    let uni = Uniforms::new(5, m, 17);
    let mut perm = uni.clone();
    for t in 0..5 {
        let row = &mut perm.values[t * m..(t + 1) * m];
        row.reverse();
        row.rotate_left(5);
    }
    let a = loglik_sis(&rf, &data, &uni).unwrap().0.loglik;
    let b = loglik_sis(&rf, &data, &perm).unwrap().0.loglik;
    assert!((a - b).abs() < 1e-12);
}

#[test]
fn finite_difference_gradients_agree_across_steps() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for seed in 0..5 {
        let rf = common::random_rf(3, 1, 200 + seed);
        let (data, _) = simulate(&rf, 100, &InitialConditions::zeros(rf.dims()), &mut rng).unwrap();
        let uni = Uniforms::new(100, 200, seed);
        let th = rf.to_vec();
        let f = |v: &DVector<f64>| {
            let r = ReducedForm::from_vec(v, rf.dims(), 0.0).unwrap();
            loglik_sis(&r, &data, &uni).unwrap().0.loglik
        };
        for i in 0..th.len() {
            let fd = |h: f64| {
                let mut up = th.clone();
                up[i] += h;
                let mut dn = th.clone();
                dn[i] -= h;
                (f(&up) - f(&dn)) / (2.0 * h)
            };
            let (a, b) = (fd(1e-4), fd(1e-5));
            assert!((a - b).abs() <= 0.005 * a.abs().max(b.abs()).max(1e-3), "param {i}: {a} vs {b}");
        }
    }
}

#[test]
fn sis_and_fapf_agree_within_monte_carlo_error() {
    let rf = common::random_rf(3, 1, 41);
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let (data, _) = simulate(&rf, 100, &InitialConditions::zeros(rf.dims()), &mut rng).unwrap();
    assert!(data.n_bound() > 10);
    let mut s = Vec::new();
    let mut f = Vec::new();
    for seed in 0..20 {
        s.push(loglik_sis(&rf, &data, &Uniforms::new(100, 1000, seed)).unwrap().0.loglik);
        let mut r = ChaCha8Rng::seed_from_u64(1000 + seed);
        f.push(loglik_fapf(&rf, &data, 1000, &mut r).unwrap().loglik);
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let var = |v: &[f64]| {
        let m = mean(v);
        v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64
    };
    let se = ((var(&s) + var(&f)) / 20.0).sqrt();
    assert!((mean(&s) - mean(&f)).abs() < 3.0 * se.max(1e-6), "{} vs {} (se {se})", mean(&s), mean(&f));
}

#[test]
fn weights_restart_once_the_latent_lags_are_known() {
    let rf = common::random_rf(3, 2, 41);
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let (data, _) = simulate(&rf, 100, &InitialConditions::zeros(rf.dims()), &mut rng).unwrap();
    // first period that follows p = 2 off-bound periods after a binding one
    let cut = (3..data.len())
        .find(|&t| !data.d[t - 1] && !data.d[t - 2] && data.d[..t - 2].iter().any(|b| *b))
        .unwrap();
    assert!(data.d[cut..].iter().any(|b| *b));
    let a = Uniforms::new(100, 300, 1);
    let mut b = a.clone();
    for v in &mut b.values[..cut * 300] {
        *v = 1.0 - *v;
    }
    let (ra, _) = loglik_sis(&rf, &data, &a).unwrap();
    let (rb, _) = loglik_sis(&rf, &data, &b).unwrap();
    assert_eq!(ra.per_period[cut..], rb.per_period[cut..]);
    assert_ne!(ra.per_period[..cut], rb.per_period[..cut]);
    assert_eq!(ra.ess[cut], 300.0);
}
