//! Medley transition datasets from symbolic music.
//!
//! The crate covers the full path from paired MusicXML/MIDI medleys to
//! evaluation numbers:
//!
//! * [`io`] parses SMF and MusicXML and aligns notation bars to playback
//!   bars through repeat expansion.
//! * [`transitions`] labels transition points from score annotations and
//!   scores the labelling against ground truth.
//! * [`filter`] gates transitions on note density, meter and tempo and
//!   slices 12-bar windows onto the sixteenth-note grid.
//! * [`codec`] encodes slices as piano rolls with per-pitch hold symbols.
//! * [`augment`] transposes samples and slides bar windows.
//! * [`metrics`] computes piece-level metrics, distribution distances and
//!   their baseline normalization.
//! * [`stats`] summarizes corpora.
//!
//! Metric code is generic over [`Scalar`]; the aliases below fix the
//! common `f64` instantiation.

pub mod augment;
pub mod codec;
pub mod filter;
pub mod io;
pub mod metrics;
pub mod model;
pub mod scalar;
pub mod stats;
pub mod transitions;

pub use model::{
    sounding_pitches, Annotation, Grid, Measure, NoteEvent, RollShape, ScoreDocument, Song, Symbol,
    TransitionPoint, TransitionSample,
};
pub use scalar::Scalar;

/// Scalar-valued histogram over `f64`.
pub type Histogram = metrics::Histogram<f64>;
/// Histogram with exact rational masses.
pub type ExactHistogram = metrics::Histogram<num_rational::Rational64>;
pub type MetricReport = metrics::MetricReport<f64>;
pub type RepetitionBreakdown = metrics::RepetitionBreakdown<f64>;
