//! Shared fixtures for the criterion benchmarks.

use entropy_lab::flow::gaussian;
use entropy_lab::GridDensity;

/// Standard Gaussian on `[-10, 10]` with `n` nodes.
pub fn standard_gaussian(n: usize) -> GridDensity {
    gaussian(1.0, 1, 10.0, n).expect("valid Gaussian grid")
}
