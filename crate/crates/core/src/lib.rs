//! Word rank-frequency statistics.
//!
//! The pipeline runs raw UTF-8 text through [`tokenizer`] into a
//! [`FrequencyTable`], ranks it into a [`RankedDistribution`], and fits
//! power-law exponents with [`fit`]. Corpora are assembled and compared in
//! [`corpus`], pre-tagged lemma lists are split by part of speech in
//! [`strata`], and [`monkey`] provides the random-typing null model.
//! [`report`] and [`plot`] turn results into JSON, SVG and gnuplot output.
//!
//! The numeric code is generic over the float type through [`Scalar`]; the
//! aliases at the crate root pin it to `f64`, which is what the CLI uses.

pub mod corpus;
pub mod error;
pub mod fit;
pub mod freq;
pub mod monkey;
pub mod plot;
pub mod report;
pub mod scalar;
pub mod strata;
pub mod tokenizer;

pub use error::{Error, Result};
pub use freq::{FrequencyTable, RankedDistribution, RankedPoint};
pub use scalar::Scalar;

/// Ranked distribution with `f64` frequencies.
pub type Distribution = RankedDistribution<f64>;
/// Single power-law fit in `f64`.
pub type Fit = fit::ScalingFit<f64>;
/// Two-regime fit in `f64`.
pub type Breakpoint = fit::PiecewiseFit<f64>;
/// Residual summary in `f64`.
pub type Goodness = fit::GoodnessReport<f64>;
/// Divergence between two `f64` distributions.
pub type Divergence = corpus::DivergenceReport<f64>;
/// Tagged lemma list with `f64` frequencies.
pub type LemmaList = strata::TaggedLemmaList<f64>;
