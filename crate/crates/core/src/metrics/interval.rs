use num_traits::Float;

use crate::codec::PianoRoll;
use crate::scalar::Scalar;

use super::MetricError;

/// Floor applied to the match proportion before taking the logarithm.
pub const INTERVAL_EPSILON: f64 = 1e-6;

/// Signed distances between adjacent stored voices at every step; `None`
/// where either voice is silent.
pub fn adjacent_intervals(roll: &PianoRoll) -> Vec<Option<i16>> {
    let v = roll.voices();
    let pitches = roll.resolved_pitches();
    let mut out = Vec::with_capacity(roll.steps() * v.saturating_sub(1));
    for step in pitches.chunks_exact(v) {
        for pair in step.windows(2) {
            out.push(match (pair[0], pair[1]) {
                (Some(a), Some(b)) => Some(i16::from(a) - i16::from(b)),
                _ => None,
            });
        }
    }
    out
}

/// Negative log of the share of adjacent-voice intervals of `generated`
/// that equal the ones of `reference`.
///
/// Counts are pooled over all steps. An interval slot is comparable when
/// it is defined in at least one of the two rolls and matches only when
/// both define the same value. Without any comparable slot the rolls are
/// considered to agree and the result is 0.
pub fn interval_match_regularizer<T: Scalar + Float>(
    generated: &PianoRoll,
    reference: &PianoRoll,
) -> Result<T, MetricError> {
    if generated.shape() != reference.shape() {
        return Err(MetricError::ShapeMismatch);
    }
    if generated.voices() < 2 {
        return Err(MetricError::FewerThanTwoVoices(generated.voices()));
    }
    let (g, r) = (adjacent_intervals(generated), adjacent_intervals(reference));
    let mut comparable = 0;
    let mut matching = 0;
    for (a, b) in g.iter().zip(&r) {
        if a.is_some() || b.is_some() {
            comparable += 1;
            if a == b {
                matching += 1;
            }
        }
    }
    if comparable == 0 {
        return Ok(T::zero());
    }
    let rho = <T as Scalar>::ratio(matching, comparable);
    let eps = <T as num_traits::NumCast>::from(INTERVAL_EPSILON).expect("float");
    Ok(-Float::ln(Float::max(rho, eps)))
}
