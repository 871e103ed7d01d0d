//! Censored and kinked structural VARs: simulation, simulated likelihood,
//! maximum-likelihood estimation, identification and impulse responses for a
//! VAR in which one variable is subject to an occasionally binding lower bound.

pub mod error;
pub mod estimate;
pub mod identify;
pub mod irf;
pub mod likelihood;
pub mod model;
pub mod montecarlo;
pub mod normal;
pub mod optim;
pub mod simulate;

pub use error::{Error, Result};
pub use estimate::{
    bootstrap_lr, fit_ml, fit_nested, lr_test, std_errors, FitOptions, FitResult, TestResult, Vcov,
};
pub use identify::{
    bivariate_bounds, identified_set, lambda_from_xi, lambda_set, point_id, solve_betabar, BetaBounds,
    BoundsCase, IdentifiedSet, LambdaSet, LambdaShape, StructuralSolution,
};
pub use irf::{
    bootstrap_bands, condition_state, girf, irf_identified_set, Band, IrfBundle, IrfRequest, ShockSize,
};
pub use likelihood::{
    filter_latent, loglik, loglik_fapf, loglik_ksvar, loglik_sis, FilterKind, LatentFilter,
    LatentState, LikelihoodResult, ParticleSystem, Uniforms,
};
pub use model::{
    check_coherency, count_free_parameters, structural_to_reduced, CoherencyReport, Dims,
    ModelKind, ReducedForm, StructuralParams,
};
pub use montecarlo::{run_mc_estimation, run_mc_lr, LrRow, McConfig, McReport, ModelMoments, ParamMoments};
pub use simulate::{make_dgp, simulate, simulate_with_burn_in, Dataset, Dgp, InitialConditions, LatentPath};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
