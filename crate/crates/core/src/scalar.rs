use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating point type used for log-probabilities and path weights.
///
/// Implemented for `f32` and `f64`. Everything that stores or accumulates
/// probabilities (unigram pieces, character LM tables, WFST weights) is
/// generic over this trait.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Convert from `f64`, panicking only on types that cannot represent finite values.
    fn of(v: f64) -> Self {
        Self::from_f64(v).expect("scalar conversion from f64")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar conversion to f64")
    }

    /// Numerically stable `ln(exp(a) + exp(b))`.
    fn log_add(a: Self, b: Self) -> Self {
        if a == Self::neg_infinity() {
            return b;
        }
        if b == Self::neg_infinity() {
            return a;
        }
        let (hi, lo) = if a > b { (a, b) } else { (b, a) };
        hi + (lo - hi).exp().ln_1p()
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// `ln(Σ exp(x))` over an iterator; `-inf` for an empty input.
pub fn log_sum_exp<F: Scalar>(values: impl IntoIterator<Item = F>) -> F {
    values.into_iter().fold(F::neg_infinity(), F::log_add)
}
