//! Itemset-frequency-indicator sketching and its hard instances.
//!
//! Three layers:
//!
//! * [`dataset`]: immutable bit-matrix databases with an exact
//!   rational-frequency scan, the ground truth everything else is checked
//!   against;
//! * [`sketch`]: the indicator-sketch contract (YES above eps, NO below
//!   eps/2) with two baseline builds, uniform row sampling and the exact
//!   per-pair answer table;
//! * [`lowerbound`]: generators that encode permutations into databases,
//!   decoders that read them back through indicator queries alone, gap
//!   audits, and entropy accounting that lower-bounds any conforming
//!   sketch's size.
//!
//! All randomness is ChaCha-seeded and reproducible; all threshold
//! comparisons are exact rational arithmetic.

mod bits;

pub mod dataset;
pub mod lowerbound;
pub mod sketch;

/// Exact unsigned rational, used for epsilon parameters and thresholds.
pub type Ratio64 = num_rational::Ratio<u64>;

pub use dataset::{Database, Frequency, Itemset, Row};
pub use sketch::{IndicatorAnswer, IndicatorOracle, SketchBlob, SketchKind, SketchParams};
