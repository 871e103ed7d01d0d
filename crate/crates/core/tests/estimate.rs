use cksvar::estimate::ols_reduced_form;
use cksvar::{
    fit_ml, fit_nested, lr_test, make_dgp, simulate_with_burn_in, std_errors, structural_to_reduced,
    Dataset, Dgp, Error, FilterKind, FitOptions, ModelKind,
};
use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn dgp_data(dgp: Dgp, t: usize, seed: u64) -> Dataset {
    let rf = structural_to_reduced(&make_dgp(dgp)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    simulate_with_burn_in(&rf, t, 100, &mut rng).unwrap().0
}

fn opts(m: usize) -> FitOptions {
    FitOptions {
        particles: m,
        seed: 11,
        ..Default::default()
    }
}

/// Gaussian VAR maximum likelihood in closed form.
fn ols_oracle(data: &Dataset) -> (DMatrix<f64>, DMatrix<f64>) {
    let x = data.regressor_matrix();
    let y = &data.y;
    let svd = x.clone().svd(true, true);
    let coef = svd.solve(y, 1e-14).unwrap();
    let resid = y - &x * &coef;
    let omega = resid.transpose() * &resid / y.nrows() as f64;
    (coef.transpose(), omega)
}

#[test]
fn never_binding_fits_equal_ols() {
    let rf = structural_to_reduced(&make_dgp(Dgp::Three)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut data, _) = simulate_with_burn_in(&rf, 200, 50, &mut rng).unwrap();
    data.bound = -1e9;
    data.d.iter_mut().for_each(|d| *d = false);
    let (c, omega) = ols_oracle(&data);
    for kind in [ModelKind::Ksvar, ModelKind::Csvar] {
        let filter = if kind == ModelKind::Ksvar { FilterKind::Analytic } else { FilterKind::Sis };
        let fit = fit_ml(&data, kind, filter, &opts(50)).unwrap();
        assert!(fit.converged(), "{:?}", fit.trace);
        assert!((&fit.psi_hat.cbar - &c).abs().max() < 1e-5, "{kind:?}");
        assert!((fit.psi_hat.omega() - &omega).abs().max() < 1e-5, "{kind:?}");
    }
}

#[test]
fn ols_start_matches_oracle_on_full_sample() {
    let data = dgp_data(Dgp::One, 120, 8);
    let (c, omega) = ols_oracle(&data);
    let rf = ols_reduced_form(&data, false).unwrap();
    assert!((&rf.cbar - c).abs().max() < 1e-10);
    assert!((rf.omega() - omega).abs().max() < 1e-10);
}

#[test]
fn nesting_and_reproducibility() {
    let data = dgp_data(Dgp::One, 250, 21);
    let o = opts(200);
    let (k, u1) = fit_nested(&data, ModelKind::Ksvar, FilterKind::Sis, &o).unwrap();
    let (c, u2) = fit_nested(&data, ModelKind::Csvar, FilterKind::Sis, &o).unwrap();
    for f in [&k, &c, &u1, &u2] {
        assert!(f.converged(), "{:?}", f.trace);
        assert!(f.loglik.is_finite());
    }
    assert!(u1.loglik >= k.loglik - 1e-4);
    assert!(u2.loglik >= c.loglik - 1e-4);
    assert!(k.psi_hat.is_ksvar(0.0));
    assert!(c.psi_hat.is_csvar(1e-15));

    let again = fit_nested(&data, ModelKind::Csvar, FilterKind::Sis, &o).unwrap().1;
    assert_eq!(again.psi_hat, u2.psi_hat);
    assert_eq!(again.loglik.to_bits(), u2.loglik.to_bits());

    let t = lr_test(&u1, &k, None).unwrap();
    assert_eq!(t.df, 3);
    assert!(t.lr_stat >= 0.0 && (0.0..=1.0).contains(&t.p_asym));
    let same = lr_test(&k, &k, Some(3)).unwrap();
    assert_eq!((same.lr_stat, same.p_asym), (0.0, 1.0));
    assert_eq!(lr_test(&u2, &c, None).unwrap().df, 5);
}

#[test]
fn restarting_at_the_optimum_stays_put() {
    let data = dgp_data(Dgp::Two, 250, 4);
    let fit = fit_ml(&data, ModelKind::Cksvar, FilterKind::Sis, &opts(200)).unwrap();
    let mut perturbed = fit.psi_hat.clone();
    perturbed.cbar[(0, 0)] += 0.05;
    perturbed.tau *= 1.1;
    let o = FitOptions {
        starts: vec![perturbed],
        ..opts(200)
    };
    let refit = fit_ml(&data, ModelKind::Cksvar, FilterKind::Sis, &o).unwrap();
    assert!((refit.loglik - fit.loglik).abs() < 1e-5, "{} vs {}", refit.loglik, fit.loglik);
    assert!((refit.psi_hat.to_vec() - fit.psi_hat.to_vec()).abs().max() < 1e-2);
}

#[test]
fn standard_errors_symmetric_and_psd() {
    let data = dgp_data(Dgp::One, 250, 5);
    let k = fit_ml(&data, ModelKind::Ksvar, FilterKind::Analytic, &opts(100)).unwrap();
    let v = std_errors(&k, &data).unwrap();
    assert!(v.asymmetry < 1e-6, "{}", v.asymmetry);
    assert!(!v.flagged);
    let eig = v.matrix.clone().symmetric_eigen();
    assert!(eig.eigenvalues.iter().all(|&e| e > -1e-12));
    let dims = k.psi_hat.dims();
    let lay_cstar = dims.k * dims.q();
    // restricted coordinates carry no variance
    for i in lay_cstar..lay_cstar + dims.k * dims.p {
        assert_eq!(v.matrix[(i, i)], 0.0);
    }

    let c = fit_ml(&data, ModelKind::Csvar, FilterKind::Sis, &opts(100)).unwrap();
    let vc = std_errors(&c, &data).unwrap();
    assert!(vc.asymmetry < 1e-4, "{}", vc.asymmetry);
    // tied latent-lag coefficient has the same variance as the lagged-Y2 coefficient
    let y2 = dims.y2_lag_col(1);
    for i in 0..dims.k {
        let a = i * dims.q() + y2;
        let s = lay_cstar + i * dims.p;
        assert_eq!(vc.matrix[(a, a)], vc.matrix[(s, s)]);
    }
}

#[test]
fn fapf_fit_runs_and_refuses_standard_errors() {
    let data = dgp_data(Dgp::One, 60, 6);
    let mut o = opts(100);
    o.anneal.max_evals = 300;
    let fit = fit_ml(&data, ModelKind::Cksvar, FilterKind::Fapf, &o).unwrap();
    assert!(fit.loglik.is_finite());
    assert!(matches!(std_errors(&fit, &data), Err(Error::Unsupported(_))));
    assert!(matches!(
        fit_ml(&data, ModelKind::Cksvar, FilterKind::Analytic, &o),
        Err(Error::Misuse(_))
    ));
}
