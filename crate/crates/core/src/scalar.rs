//! Scalar abstraction shared by the numeric modules.
//!
//! Channel tables, construction and LLR arithmetic are written against
//! [`Real`] so the same code runs in `f64` (the default everywhere in the
//! crate) and in `f32` for memory-bound sweeps.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating point scalar usable for probabilities and LLRs.
pub trait Real:
    Float
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Largest total-mass drift tolerated before a channel is rejected.
    fn mass_drift_guard() -> Self;

    /// Slack used when checking probabilities and orderings.
    fn slack() -> Self;

    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("finite f64 converts into every Real")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("Real converts into f64")
    }
}

impl Real for f64 {
    fn mass_drift_guard() -> Self {
        1e-9
    }

    fn slack() -> Self {
        1e-12
    }
}

impl Real for f32 {
    fn mass_drift_guard() -> Self {
        1e-3
    }

    fn slack() -> Self {
        1e-6
    }
}

/// `x * log2(x / y)` with the `0 log 0 = 0` convention.
pub(crate) fn xlog2_ratio<T: Real>(x: T, y: T) -> T {
    if x <= T::zero() {
        T::zero()
    } else {
        x * (x / y).log2()
    }
}

/// Comparison wrapper for heaps and sorts over `Real`; NaN compares equal.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct Ordered<T>(pub T);

impl<T: Real> Eq for Ordered<T> {}

impl<T: Real> PartialOrd for Ordered<T> {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl<T: Real> Ord for Ordered<T> {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0
            .partial_cmp(&other.0)
            .unwrap_or(std::cmp::Ordering::Equal)
    }
}
