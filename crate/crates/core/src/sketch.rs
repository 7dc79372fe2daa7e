//! Itemset-frequency-indicator sketches.
//!
//! An indicator sketch answers, for each size-k itemset T, whether its
//! frequency is large: the answer must be YES when f_T >= eps and NO when
//! f_T <= eps/2; in the gap (eps/2, eps) either answer is allowed. Builds
//! may fail with probability up to the build failure budget (default 1/4);
//! when a build succeeds every query answer must honor the promise.
//!
//! Two baseline implementations are provided:
//!
//! * [`build_sampling`] keeps s uniformly sampled rows and thresholds the
//!   empirical frequency, using s * d bits;
//! * [`build_exact_pairs`] stores the thresholded answer for every column
//!   pair, using d(d-1)/2 bits (k = 2 only).
//!
//! Decoders are written against the [`IndicatorOracle`] trait, so anything
//! that answers itemset queries (a sketch blob, a closure, a mock) can
//! drive them.

use std::io::{self, Read, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::bits;
use crate::dataset::{Database, Frequency, Itemset};
use crate::Ratio64;

const SK_MAGIC: &[u8; 4] = b"IFSK";
const SK_VERSION: u8 = 1;

/// Multiplier in the sample-count formula of [`build_sampling`]. With
/// s = ceil((C/eps) * ln(4 d^k)) samples, a multiplicative Chernoff bound
/// puts each itemset's empirical frequency within eps/4 of truth except
/// with probability 2 exp(-s eps / C); union-bounding over the d^k
/// itemsets keeps the total build failure below 1/4.
pub const SAMPLING_CONSTANT: u64 = 48;

/// ChaCha stream id reserved for sampling draws, so a seed shared with an
/// instance generator still yields an independent random stream.
const SAMPLING_STREAM: u64 = u64::MAX - 1;

#[derive(Debug, Error)]
pub enum SketchError {
    #[error("sketch kind mismatch: query for {expected:?} got {actual:?}")]
    WrongKind {
        expected: SketchKind,
        actual: SketchKind,
    },
    #[error("itemset has {got} items, sketch answers k = {expected}")]
    ArityMismatch { got: usize, expected: usize },
    #[error("exact-pairs sketch requires k = 2, got k = {0}")]
    UnsupportedArity(usize),
    #[error("invalid sketch parameters: {0}")]
    Param(String),
    #[error("sketch format error: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SketchKind {
    Sampling,
    ExactPairs,
}

impl SketchKind {
    fn tag(self) -> u8 {
        match self {
            SketchKind::Sampling => 0,
            SketchKind::ExactPairs => 1,
        }
    }

    fn from_tag(tag: u8) -> Result<Self, SketchError> {
        match tag {
            0 => Ok(SketchKind::Sampling),
            1 => Ok(SketchKind::ExactPairs),
            other => Err(SketchError::Format(format!("unknown sketch kind {other}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IndicatorAnswer {
    Yes,
    No,
}

impl IndicatorAnswer {
    pub fn is_yes(self) -> bool {
        self == IndicatorAnswer::Yes
    }
}

/// Anything that can answer indicator queries. Decoders depend only on
/// this trait, never on a concrete sketch.
pub trait IndicatorOracle {
    fn query(&self, t: &Itemset) -> Result<IndicatorAnswer, SketchError>;
}

impl<F> IndicatorOracle for F
where
    F: Fn(&Itemset) -> Result<IndicatorAnswer, SketchError>,
{
    fn query(&self, t: &Itemset) -> Result<IndicatorAnswer, SketchError> {
        self(t)
    }
}

/// Build-time parameters shared by both sketch kinds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SketchParams {
    epsilon: Ratio64,
    k: usize,
    d: usize,
    build_failure_budget: Ratio64,
}

impl SketchParams {
    /// Requires 0 < epsilon <= 1, k >= 1, d >= 2. The build failure budget
    /// defaults to 1/4 (builds must succeed with probability 3/4).
    pub fn new(epsilon: Ratio64, k: usize, d: usize) -> Result<Self, SketchError> {
        if *epsilon.numer() == 0 || epsilon > Ratio64::new(1, 1) {
            return Err(SketchError::Param(format!(
                "epsilon must lie in (0, 1], got {}/{}",
                epsilon.numer(),
                epsilon.denom()
            )));
        }
        if k < 1 {
            return Err(SketchError::Param("k must be at least 1".to_string()));
        }
        if d < 2 {
            return Err(SketchError::Param(format!("d must be at least 2, got {d}")));
        }
        Ok(SketchParams {
            epsilon,
            k,
            d,
            build_failure_budget: Ratio64::new(1, 4),
        })
    }

    pub fn epsilon(&self) -> Ratio64 {
        self.epsilon
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn build_failure_budget(&self) -> Ratio64 {
        self.build_failure_budget
    }

    /// Override the default 1/4 budget. Must lie in (0, 1).
    pub fn with_build_failure_budget(mut self, budget: Ratio64) -> Result<Self, SketchError> {
        if *budget.numer() == 0 || budget >= Ratio64::new(1, 1) {
            return Err(SketchError::Param(format!(
                "build failure budget must lie in (0, 1), got {}/{}",
                budget.numer(),
                budget.denom()
            )));
        }
        self.build_failure_budget = budget;
        Ok(self)
    }
}

/// A built sketch: an opaque payload plus the metadata needed to query it.
///
/// `size_bits` counts only the information content needed to answer
/// queries (sampled row bits, or one bit per pair), not framing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SketchBlob {
    kind: SketchKind,
    params: SketchParams,
    payload: Vec<u8>,
    size_bits: u64,
}

impl SketchBlob {
    pub fn kind(&self) -> SketchKind {
        self.kind
    }

    pub fn params(&self) -> &SketchParams {
        &self.params
    }

    pub fn payload(&self) -> &[u8] {
        &self.payload
    }

    pub fn size_bits(&self) -> u64 {
        self.size_bits
    }

    /// Number of sampled rows held by a sampling sketch.
    pub fn sample_rows(&self) -> Option<u64> {
        match self.kind {
            SketchKind::Sampling => Some(self.size_bits / self.params.d as u64),
            SketchKind::ExactPairs => None,
        }
    }

    /// Answer a query through a sampling sketch: YES iff the empirical
    /// frequency over the sampled rows is at least 3 eps / 4.
    pub fn query_sampling(&self, t: &Itemset) -> Result<IndicatorAnswer, SketchError> {
        self.expect_kind(SketchKind::Sampling)?;
        self.check_items(t)?;
        let stride = bits::stride(self.params.d);
        let s = self.payload.len() / stride;
        let hits = self
            .payload
            .chunks_exact(stride)
            .filter(|row| t.items().iter().all(|&j| bits::get(row, j)))
            .count() as u64;
        let accept = self.params.epsilon * Ratio64::new(3, 4);
        if Frequency::new(hits, s as u64) >= accept {
            Ok(IndicatorAnswer::Yes)
        } else {
            Ok(IndicatorAnswer::No)
        }
    }

    /// Answer a pair query through an exact-pairs sketch: YES iff the
    /// stored bit is set, i.e. iff the true frequency exceeded eps/2 at
    /// build time. This sketch satisfies the promise deterministically.
    pub fn query_exact(&self, t: &Itemset) -> Result<IndicatorAnswer, SketchError> {
        self.expect_kind(SketchKind::ExactPairs)?;
        self.check_items(t)?;
        let (a, b) = (t.items()[0], t.items()[1]);
        let idx = bits::pair_index(self.params.d, a, b);
        if bits::get(&self.payload, idx) {
            Ok(IndicatorAnswer::Yes)
        } else {
            Ok(IndicatorAnswer::No)
        }
    }

    fn expect_kind(&self, expected: SketchKind) -> Result<(), SketchError> {
        if self.kind != expected {
            return Err(SketchError::WrongKind {
                expected,
                actual: self.kind,
            });
        }
        Ok(())
    }

    fn check_items(&self, t: &Itemset) -> Result<(), SketchError> {
        if t.len() != self.params.k {
            return Err(SketchError::ArityMismatch {
                got: t.len(),
                expected: self.params.k,
            });
        }
        for &j in t.items() {
            if j >= self.params.d {
                return Err(SketchError::Param(format!(
                    "item {j} out of range for d = {}",
                    self.params.d
                )));
            }
        }
        Ok(())
    }

    /// Serialize: magic `IFSK`, version 1, kind tag, epsilon as reduced
    /// numerator/denominator u64 pairs, k as u8, d and size_bits as u64,
    /// all little-endian, then the payload. The build failure budget is a
    /// contract constant and is not stored.
    pub fn write_to<W: Write>(&self, w: &mut W) -> io::Result<()> {
        w.write_all(SK_MAGIC)?;
        w.write_all(&[SK_VERSION, self.kind.tag()])?;
        w.write_all(&self.params.epsilon.numer().to_le_bytes())?;
        w.write_all(&self.params.epsilon.denom().to_le_bytes())?;
        w.write_all(&[self.params.k as u8])?;
        w.write_all(&(self.params.d as u64).to_le_bytes())?;
        w.write_all(&self.size_bits.to_le_bytes())?;
        w.write_all(&self.payload)
    }

    pub fn read_from<R: Read>(r: &mut R) -> Result<Self, SketchError> {
        let mut head = [0u8; 6];
        r.read_exact(&mut head)
            .map_err(|_| SketchError::Format("missing or short IFSK header".to_string()))?;
        if &head[..4] != SK_MAGIC {
            return Err(SketchError::Format(
                "bad magic, expected \"IFSK\"".to_string(),
            ));
        }
        if head[4] != SK_VERSION {
            return Err(SketchError::Format(format!(
                "unsupported version {}",
                head[4]
            )));
        }
        let kind = SketchKind::from_tag(head[5])?;
        let eps_num = read_u64(r)?;
        let eps_den = read_u64(r)?;
        if eps_den == 0 {
            return Err(SketchError::Format(
                "epsilon denominator is zero".to_string(),
            ));
        }
        let mut kbuf = [0u8; 1];
        r.read_exact(&mut kbuf)
            .map_err(|_| SketchError::Format("truncated header".to_string()))?;
        let d = read_u64(r)? as usize;
        let size_bits = read_u64(r)?;
        let params = SketchParams::new(Ratio64::new(eps_num, eps_den), kbuf[0] as usize, d)?;
        let mut payload = Vec::new();
        r.read_to_end(&mut payload)?;

        let expected = match kind {
            SketchKind::Sampling => {
                if d == 0 || size_bits % d as u64 != 0 {
                    return Err(SketchError::Format(format!(
                        "sampling size_bits {size_bits} is not a multiple of d = {d}"
                    )));
                }
                (size_bits / d as u64) as usize * bits::stride(d)
            }
            SketchKind::ExactPairs => {
                let pairs = (d as u64) * (d as u64 - 1) / 2;
                if size_bits != pairs {
                    return Err(SketchError::Format(format!(
                        "exact-pairs size_bits {size_bits} does not equal d(d-1)/2 = {pairs}"
                    )));
                }
                bits::stride(pairs as usize)
            }
        };
        if payload.len() != expected {
            return Err(SketchError::Format(format!(
                "payload is {} bytes, header requires {expected}",
                payload.len()
            )));
        }
        Ok(SketchBlob {
            kind,
            params,
            payload,
            size_bits,
        })
    }
}

impl IndicatorOracle for SketchBlob {
    fn query(&self, t: &Itemset) -> Result<IndicatorAnswer, SketchError> {
        match self.kind {
            SketchKind::Sampling => self.query_sampling(t),
            SketchKind::ExactPairs => self.query_exact(t),
        }
    }
}

/// Number of rows the sampling sketch draws:
/// s = ceil((C/eps) * ln(4 d^k)) with C = [`SAMPLING_CONSTANT`].
pub fn sample_count(params: &SketchParams) -> u64 {
    let per_eps =
        SAMPLING_CONSTANT as f64 * *params.epsilon.denom() as f64 / *params.epsilon.numer() as f64;
    let log_term = 4f64.ln() + params.k as f64 * (params.d as f64).ln();
    (per_eps * log_term).ceil() as u64
}

/// Build a sampling sketch: s rows drawn uniformly with replacement from
/// the database (seeded, reproducible), packed in row order. size_bits is
/// s * d. Correctness of subsequent queries is probabilistic per the
/// build failure budget.
pub fn build_sampling(
    db: &Database,
    params: &SketchParams,
    seed: u64,
) -> Result<SketchBlob, SketchError> {
    if params.d != db.d() {
        return Err(SketchError::Param(format!(
            "params.d = {} but database has d = {}",
            params.d,
            db.d()
        )));
    }
    let s = sample_count(params);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(SAMPLING_STREAM);
    let stride = bits::stride(db.d());
    let mut payload = Vec::with_capacity(s as usize * stride);
    for _ in 0..s {
        let i = rng.random_range(0..db.n());
        payload.extend_from_slice(db.row_bytes(i));
    }
    Ok(SketchBlob {
        kind: SketchKind::Sampling,
        params: params.clone(),
        payload,
        size_bits: s * db.d() as u64,
    })
}

/// Build the exact pair sketch: one bit per column pair {a, b}, set iff
/// f_{a,b} > eps/2 (exact rational comparison). size_bits is d(d-1)/2.
pub fn build_exact_pairs(db: &Database, params: &SketchParams) -> Result<SketchBlob, SketchError> {
    if params.k != 2 {
        return Err(SketchError::UnsupportedArity(params.k));
    }
    if params.d != db.d() {
        return Err(SketchError::Param(format!(
            "params.d = {} but database has d = {}",
            params.d,
            db.d()
        )));
    }
    let d = db.d();
    let pairs = d * (d - 1) / 2;

    // Count co-occurrences row by row over each row's set columns. This is
    // a different route than Database::frequency, which the oracle tests
    // exploit.
    let mut counts = vec![0u64; pairs];
    let mut cols = Vec::with_capacity(d);
    for row in db.rows() {
        cols.clear();
        cols.extend(bits::ones(row));
        for (idx, &a) in cols.iter().enumerate() {
            for &b in &cols[idx + 1..] {
                counts[bits::pair_index(d, a, b)] += 1;
            }
        }
    }

    let n = db.n() as u128;
    let (p, q) = (
        *params.epsilon.numer() as u128,
        *params.epsilon.denom() as u128,
    );
    let mut payload = vec![0u8; bits::stride(pairs)];
    for (idx, &count) in counts.iter().enumerate() {
        // f > eps/2  <=>  2 q count > p n
        if 2 * q * count as u128 > p * n {
            bits::set(&mut payload, idx);
        }
    }
    Ok(SketchBlob {
        kind: SketchKind::ExactPairs,
        params: params.clone(),
        payload,
        size_bits: pairs as u64,
    })
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64, SketchError> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)
        .map_err(|_| SketchError::Format("truncated header".to_string()))?;
    Ok(u64::from_le_bytes(buf))
}
