//! Numeric abstraction for metric and distance computations.
//!
//! Ratio-valued metrics, histograms and distances are written against
//! [`Scalar`], so the same code runs on `f32`, `f64` and exact
//! `Rational64` arithmetic. Operations that need transcendental functions
//! (standard deviation, logarithms) additionally require
//! [`num_traits::Float`].

use std::fmt::Debug;

use num_rational::Rational64;
use num_traits::{FromPrimitive, Num, Signed, ToPrimitive};

pub trait Scalar:
    Num + Signed + FromPrimitive + ToPrimitive + Copy + PartialOrd + Debug + Send + Sync + 'static
{
    /// Slack allowed when checking that masses sum to one.
    fn mass_tolerance() -> Self;

    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }

    /// `num / den` computed in this scalar type. `den` must be non-zero.
    fn ratio(num: usize, den: usize) -> Self {
        Self::from_count(num) / Self::from_count(den)
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {
    fn mass_tolerance() -> Self {
        1e-5
    }
}

impl Scalar for f64 {
    fn mass_tolerance() -> Self {
        1e-9
    }
}

impl Scalar for Rational64 {
    fn mass_tolerance() -> Self {
        Rational64::from_integer(0)
    }
}
