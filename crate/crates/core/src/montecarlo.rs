//! Monte Carlo experiments: sampling moments of the ML estimator and size
//! and power of the LR tests with asymptotic and warp-speed bootstrap
//! critical values.

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};
use crate::estimate::{fit_ml, fit_nested, restriction_count, FitOptions, FitResult, MAX_DROP_SHARE};
use crate::likelihood::FilterKind;
use crate::model::{structural_to_reduced, ModelKind, ReducedForm};
use crate::simulate::{make_dgp, simulate, Dataset, Dgp, InitialConditions};

/// Stream offset separating bootstrap draws from the original samples.
const BOOT_STREAM: u64 = 1 << 40;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub dgp: Dgp,
    pub t_len: usize,
    pub n_rep: usize,
    /// Particles for the simulated likelihoods.
    pub particles: usize,
    /// Models to estimate (`run_mc_estimation`) or restricted models to test
    /// against CKSVAR (`run_mc_lr`).
    pub models: Vec<ModelKind>,
    /// Filter for the non-KSVAR models; KSVAR always uses the exact likelihood.
    pub filter: FilterKind,
    pub seed: u64,
    pub levels: Vec<f64>,
    /// Periods discarded before each sample; 0 starts every sample at zero.
    pub burn_in: usize,
}

impl McConfig {
    pub fn new(dgp: Dgp) -> Self {
        Self {
            dgp,
            t_len: 250,
            n_rep: 200,
            particles: 1000,
            models: vec![ModelKind::Cksvar],
            filter: FilterKind::Sis,
            seed: 0,
            levels: vec![0.10, 0.05, 0.01],
            burn_in: 0,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n_rep == 0 {
            return Err(Error::Parameter("n_rep must be at least 1".into()));
        }
        if self.t_len == 0 {
            return Err(Error::Parameter("T must be at least 1".into()));
        }
        if self.models.is_empty() {
            return Err(Error::Parameter("no models requested".into()));
        }
        if let Some(a) = self.levels.iter().find(|a| !(**a > 0.0 && **a < 1.0)) {
            return Err(Error::Parameter(format!("significance level {a} outside (0, 1)")));
        }
        Ok(())
    }

    fn fit_options(&self) -> FitOptions {
        FitOptions {
            particles: self.particles,
            seed: self.seed,
            ..Default::default()
        }
    }

    fn filter_for(&self, kind: ModelKind) -> FilterKind {
        if kind == ModelKind::Ksvar {
            FilterKind::Analytic
        } else {
            self.filter
        }
    }

    fn sample(&self, rf: &ReducedForm, stream: u64) -> Result<Dataset> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream);
        let dims = rf.dims();
        let (data, _) = if self.burn_in > 0 {
            crate::simulate::simulate_with_burn_in(rf, self.t_len, self.burn_in, &mut rng)?
        } else {
            simulate(rf, self.t_len, &InitialConditions::zeros(dims), &mut rng)?
        };
        Ok(data)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamMoments {
    pub name: String,
    pub truth: f64,
    pub mean: f64,
    pub bias: f64,
    /// Standard deviation across replications (divisor `n`).
    pub sd: f64,
    pub rmse: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelMoments {
    pub model: ModelKind,
    pub params: Vec<ParamMoments>,
    /// Estimates per successful replication in the parameter layout.
    pub samples: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LrRow {
    /// Restricted model under test.
    pub test: ModelKind,
    pub df: usize,
    pub level: f64,
    pub asymptotic: f64,
    pub bootstrap: f64,
    pub bootstrap_critical_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LrSamples {
    pub test: ModelKind,
    pub lr: Vec<f64>,
    pub lr_boot: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub replication: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub requested: usize,
    pub succeeded: usize,
    pub failures: Vec<Failure>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McReport {
    pub config: McConfig,
    pub estimation: Vec<ModelMoments>,
    pub lr: Vec<LrRow>,
    pub lr_samples: Vec<LrSamples>,
    pub diagnostics: Diagnostics,
}

/// Flat row for CSV output of the moment tables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentRecord {
    pub model: String,
    pub param: String,
    pub truth: f64,
    pub mean: f64,
    pub bias: f64,
    pub sd: f64,
    pub rmse: f64,
}

impl McReport {
    pub fn moment_records(&self) -> Vec<MomentRecord> {
        self.estimation
            .iter()
            .flat_map(|m| {
                m.params.iter().map(move |p| MomentRecord {
                    model: m.model.name().to_string(),
                    param: p.name.clone(),
                    truth: p.truth,
                    mean: p.mean,
                    bias: p.bias,
                    sd: p.sd,
                    rmse: p.rmse,
                })
            })
            .collect()
    }

    pub fn moments(&self, model: ModelKind) -> Option<&ModelMoments> {
        self.estimation.iter().find(|m| m.model == model)
    }

    pub fn lr_row(&self, test: ModelKind, level: f64) -> Option<&LrRow> {
        self.lr.iter().find(|r| r.test == test && (r.level - level).abs() < 1e-12)
    }
}

fn check_failures(cfg: &McConfig, failures: &[Failure]) -> Result<()> {
    if failures.len() as f64 > MAX_DROP_SHARE * cfg.n_rep as f64 {
        return Err(Error::Replications {
            failed: failures.len(),
            total: cfg.n_rep,
        });
    }
    Ok(())
}

fn moments(names: &[String], truth: &DVector<f64>, samples: &[Vec<f64>]) -> Vec<ParamMoments> {
    let n = samples.len() as f64;
    names
        .iter()
        .enumerate()
        .map(|(j, name)| {
            let mean = samples.iter().map(|s| s[j]).sum::<f64>() / n;
            let var = samples.iter().map(|s| (s[j] - mean).powi(2)).sum::<f64>() / n;
            let bias = mean - truth[j];
            ParamMoments {
                name: name.clone(),
                truth: truth[j],
                mean,
                bias,
                sd: var.sqrt(),
                rmse: (bias * bias + var).sqrt(),
            }
        })
        .collect()
}

fn converged(fit: Result<FitResult>) -> std::result::Result<FitResult, String> {
    match fit {
        Ok(f) if f.converged() => Ok(f),
        Ok(f) => Err(format!("{} fit did not converge: {:?}", f.model_kind.name(), f.trace.status)),
        Err(e) => Err(e.to_string()),
    }
}

/// Sampling moments of the ML estimator of each requested model.
pub fn run_mc_estimation(cfg: &McConfig) -> Result<McReport> {
    cfg.validate()?;
    let rf = structural_to_reduced(&make_dgp(cfg.dgp))?;
    let truth = rf.to_vec();
    let names = ReducedForm::param_names(rf.dims());
    let opts = cfg.fit_options();

    let reps: Vec<std::result::Result<Vec<Vec<f64>>, String>> = (0..cfg.n_rep)
        .into_par_iter()
        .map(|rep| {
            let data = cfg.sample(&rf, rep as u64).map_err(|e| e.to_string())?;
            cfg.models
                .iter()
                .map(|&kind| {
                    converged(fit_ml(&data, kind, cfg.filter_for(kind), &opts))
                        .map(|f| f.psi_hat.to_vec().iter().copied().collect())
                })
                .collect()
        })
        .collect();

    let mut failures = Vec::new();
    let mut per_model: Vec<Vec<Vec<f64>>> = vec![Vec::new(); cfg.models.len()];
    for (rep, r) in reps.into_iter().enumerate() {
        match r {
            Ok(fits) => {
                for (slot, est) in per_model.iter_mut().zip(fits) {
                    slot.push(est);
                }
            }
            Err(reason) => failures.push(Failure { replication: rep, reason }),
        }
    }
    check_failures(cfg, &failures)?;
    let estimation = cfg
        .models
        .iter()
        .zip(per_model)
        .map(|(&model, samples)| ModelMoments {
            model,
            params: moments(&names, &truth, &samples),
            samples,
        })
        .collect();
    Ok(McReport {
        config: cfg.clone(),
        estimation,
        lr: Vec::new(),
        lr_samples: Vec::new(),
        diagnostics: Diagnostics {
            requested: cfg.n_rep,
            succeeded: cfg.n_rep - failures.len(),
            failures,
        },
    })
}

/// LR statistics for each restricted model against CKSVAR on one sample.
/// The unrestricted fit started from each restricted optimum is computed and
/// the better optimum is used for all tests.
fn lr_stats(data: &Dataset, tests: &[ModelKind], cfg: &McConfig, opts: &FitOptions) -> std::result::Result<Vec<(f64, FitResult)>, String> {
    let mut restricted = Vec::with_capacity(tests.len());
    let mut best: Option<FitResult> = None;
    for &kind in tests {
        let (r, u) = fit_nested(data, kind, cfg.filter, opts).map_err(|e| e.to_string())?;
        let r = converged(Ok(r))?;
        let u = converged(Ok(u))?;
        if best.as_ref().map_or(true, |b| u.loglik > b.loglik) {
            best = Some(u);
        }
        restricted.push(r);
    }
    let u = best.expect("at least one test");
    Ok(restricted
        .into_iter()
        .map(|r| ((2.0 * (u.loglik - r.loglik)).max(0.0), r))
        .collect())
}

fn empirical_quantile(sorted: &[f64], prob: f64) -> f64 {
    let pos = prob * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Rejection frequencies of the LR tests of each restricted model in
/// `cfg.models` against CKSVAR. Bootstrap critical values use the warp-speed
/// method: one bootstrap sample per replication, simulated from that
/// replication's restricted estimate, and the pooled bootstrap statistics
/// as the null distribution.
pub fn run_mc_lr(cfg: &McConfig) -> Result<McReport> {
    cfg.validate()?;
    if let Some(m) = cfg.models.iter().find(|m| **m == ModelKind::Cksvar) {
        return Err(Error::Parameter(format!("{} is not a restricted model", m.name())));
    }
    let rf = structural_to_reduced(&make_dgp(cfg.dgp))?;
    let opts = cfg.fit_options();
    let tests = &cfg.models;

    type Rep = std::result::Result<(Vec<f64>, Vec<f64>), String>;
    let reps: Vec<Rep> = (0..cfg.n_rep)
        .into_par_iter()
        .map(|rep| {
            let data = cfg.sample(&rf, rep as u64).map_err(|e| e.to_string())?;
            let stats = lr_stats(&data, tests, cfg, &opts)?;
            let mut lr = Vec::with_capacity(tests.len());
            let mut boot = Vec::with_capacity(tests.len());
            for (i, (stat, fit_r)) in stats.into_iter().enumerate() {
                lr.push(stat);
                let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
                rng.set_stream(BOOT_STREAM + (rep * tests.len() + i) as u64);
                let (bdata, _) = simulate(&fit_r.psi_hat, cfg.t_len, &InitialConditions::from_dataset(&data), &mut rng)
                    .map_err(|e| e.to_string())?;
                let bstats = lr_stats(&bdata, &tests[i..=i], cfg, &opts)?;
                boot.push(bstats[0].0);
            }
            Ok((lr, boot))
        })
        .collect();

    let mut failures = Vec::new();
    let mut lr: Vec<Vec<f64>> = vec![Vec::new(); tests.len()];
    let mut boot: Vec<Vec<f64>> = vec![Vec::new(); tests.len()];
    for (rep, r) in reps.into_iter().enumerate() {
        match r {
            Ok((a, b)) => {
                for i in 0..tests.len() {
                    lr[i].push(a[i]);
                    boot[i].push(b[i]);
                }
            }
            Err(reason) => failures.push(Failure { replication: rep, reason }),
        }
    }
    check_failures(cfg, &failures)?;

    let dims = rf.dims();
    let mut rows = Vec::new();
    for (i, &test) in tests.iter().enumerate() {
        let df = restriction_count(test, dims);
        let chi = ChiSquared::new(df as f64).map_err(|e| Error::Parameter(e.to_string()))?;
        let mut sorted = boot[i].clone();
        sorted.sort_by(f64::total_cmp);
        let n = lr[i].len() as f64;
        for &level in &cfg.levels {
            let cv_asym = chi.inverse_cdf(1.0 - level);
            let cv_boot = empirical_quantile(&sorted, 1.0 - level);
            rows.push(LrRow {
                test,
                df,
                level,
                asymptotic: lr[i].iter().filter(|&&v| v > cv_asym).count() as f64 / n,
                bootstrap: lr[i].iter().filter(|&&v| v > cv_boot).count() as f64 / n,
                bootstrap_critical_value: cv_boot,
            });
        }
    }
    let lr_samples = tests
        .iter()
        .zip(lr.into_iter().zip(boot))
        .map(|(&test, (lr, lr_boot))| LrSamples { test, lr, lr_boot })
        .collect();
    Ok(McReport {
        config: cfg.clone(),
        estimation: Vec::new(),
        lr: rows,
        lr_samples,
        diagnostics: Diagnostics {
            requested: cfg.n_rep,
            succeeded: cfg.n_rep - failures.len(),
            failures,
        },
    })
}
