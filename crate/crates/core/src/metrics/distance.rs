use crate::scalar::Scalar;

use super::histogram::{Discrete, Histogram};
use super::MetricError;

/// Area between the two CDFs on the real line.
pub fn wasserstein_1d<T: Scalar>(a: &Histogram<T>, b: &Histogram<T>) -> Result<T, MetricError> {
    if !a.is_normalized() || !b.is_normalized() {
        return Err(MetricError::UnnormalizedInput);
    }
    let pairs = a.paired_masses(b);
    let support = merged_support(a, b);
    let mut cdf_gap = T::zero();
    let mut total = T::zero();
    for (k, (ma, mb)) in pairs.iter().enumerate() {
        cdf_gap = cdf_gap + *ma - *mb;
        if let Some(&next) = support.get(k + 1) {
            total = total + cdf_gap.abs() * (next - support[k]);
        }
    }
    Ok(total)
}

/// Values of the union support, in the order [`Discrete::paired_masses`]
/// reports them.
fn merged_support<T: Scalar>(a: &Histogram<T>, b: &Histogram<T>) -> Vec<T> {
    let mut values: Vec<T> = a.bins().iter().chain(b.bins()).map(|bin| bin.0).collect();
    values.sort_by(|x, y| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal));
    values.dedup();
    values
}

/// Half the L1 distance over the union support.
pub fn total_variation<T: Scalar, D: Discrete<T>>(a: &D, b: &D) -> Result<T, MetricError> {
    if !a.is_normalized() || !b.is_normalized() {
        return Err(MetricError::UnnormalizedInput);
    }
    let l1 = a
        .paired_masses(b)
        .into_iter()
        .fold(T::zero(), |acc, (x, y)| acc + (x - y).abs());
    Ok(l1 / T::from_count(2))
}
