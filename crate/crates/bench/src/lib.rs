//! Fixtures shared by the benchmarks.

use cksvar::{make_dgp, simulate, structural_to_reduced, Dataset, Dgp, InitialConditions, ReducedForm};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Reduced form of a built-in design and a sample of length `t` from it.
pub fn design(dgp: Dgp, t: usize, seed: u64) -> (ReducedForm, Dataset) {
    let rf = structural_to_reduced(&make_dgp(dgp)).expect("built-in designs are coherent");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (data, _) = simulate(&rf, t, &InitialConditions::zeros(rf.dims()), &mut rng).expect("simulation");
    (rf, data)
}
