//! Information accounting: how many bits the encoded permutations carry.

use crate::lowerbound::{BlockLayout, CodecError};
use crate::Ratio64;

/// Bits of information encoded by an instance with parameters (d, eps):
/// K^2 * log2(m!) for K = 1/eps and m = eps*d/2, computed as an exact sum
/// of log2 terms (relative error well below 1e-9 up to m = 10^6). Any
/// correct indicator sketch for such instances must carry at least this
/// many bits.
pub fn entropy_bits(d: usize, epsilon: Ratio64) -> Result<f64, CodecError> {
    let layout = BlockLayout::for_epsilon(d, epsilon)?;
    let log2_factorial: f64 = (2..=layout.m()).map(|i| (i as f64).log2()).sum();
    let k2 = (layout.blocks() * layout.blocks()) as f64;
    Ok(k2 * log2_factorial)
}

/// Per-row co-occurrence probability of an unmatched pair over the random
/// subset choice: the two defining events are independent coin flips, so
/// exactly 1/4. Exposed for tests that check the empirical rate.
pub fn theoretical_co_occurrence_probability() -> Ratio64 {
    Ratio64::new(1, 4)
}
