//! Fixtures shared by the benchmarks.

use hrpca_core::datagen::{generate, GenSpec};
use hrpca_core::ObservationSet;

/// A contaminated dataset with one outlier line per signal direction.
pub fn fixture(n: usize, m: usize, d: usize, seed: u64) -> ObservationSet {
    generate(&GenSpec::new(n, m, d, 0.3, 5.0, 10.0, seed))
        .expect("fixture spec is valid")
        .0
}
