//! Bit-matrix transaction databases and exact itemset frequencies.
//!
//! A [`Database`] is an immutable n x d bit matrix: row i is a transaction,
//! bit j says whether item (column) j is present. [`Database::frequency`]
//! is the ground-truth scan every sketch and audit in this crate is checked
//! against, so it stays deliberately simple: count the rows containing every
//! item of the query and report the exact rational count/n.

use std::fmt;
use std::io::{self, Read, Write};
use std::str::FromStr;

use thiserror::Error;

use crate::bits;
use crate::Ratio64;

const DB_MAGIC: &[u8; 4] = b"IFDB";
const DB_VERSION: u8 = 1;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("column index {index} out of range for d = {d}")]
    IndexOutOfRange { index: usize, d: usize },
    #[error("itemset contains duplicate index {0}")]
    DuplicateItem(usize),
    #[error("invalid database dimensions (n = {n}, d = {d}); need n >= 1, d >= 2")]
    BadDimensions { n: usize, d: usize },
    #[error("row has width {got}, database expects {expected}")]
    RowWidth { got: usize, expected: usize },
    #[error("database format error: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// A single transaction row of fixed width, bit-packed LSB-first.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Row {
    d: usize,
    bytes: Vec<u8>,
}

impl Row {
    pub fn zeros(d: usize) -> Self {
        Row {
            d,
            bytes: vec![0; bits::stride(d)],
        }
    }

    /// Set column `j`. Panics if `j >= d`.
    pub fn set(&mut self, j: usize) {
        assert!(j < self.d, "column {} out of range for width {}", j, self.d);
        bits::set(&mut self.bytes, j);
    }

    pub fn get(&self, j: usize) -> bool {
        j < self.d && bits::get(&self.bytes, j)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.bytes
    }

    /// Columns set in this row, ascending.
    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        bits::ones(&self.bytes)
    }
}

impl FromStr for Row {
    type Err = DatasetError;

    /// Parse a row from a `"0"`/`"1"` string; character position p is column p.
    fn from_str(s: &str) -> Result<Self, DatasetError> {
        let mut row = Row::zeros(s.len());
        for (j, c) in s.chars().enumerate() {
            match c {
                '0' => {}
                '1' => row.set(j),
                other => {
                    return Err(DatasetError::Format(format!(
                        "unexpected character {other:?} in row literal"
                    )))
                }
            }
        }
        Ok(row)
    }
}

/// A query: a strictly increasing set of column indices.
///
/// The empty itemset is allowed and has frequency 1 in every database
/// (a vacuous conjunction holds in every row).
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Itemset {
    items: Vec<usize>,
}

impl Itemset {
    /// Build an itemset from arbitrary-order indices; duplicates are rejected.
    pub fn new<I: IntoIterator<Item = usize>>(items: I) -> Result<Self, DatasetError> {
        let mut items: Vec<usize> = items.into_iter().collect();
        items.sort_unstable();
        for w in items.windows(2) {
            if w[0] == w[1] {
                return Err(DatasetError::DuplicateItem(w[0]));
            }
        }
        Ok(Itemset { items })
    }

    pub fn empty() -> Self {
        Itemset { items: Vec::new() }
    }

    /// The pair `{a, b}`. Panics if `a == b`.
    pub fn pair(a: usize, b: usize) -> Self {
        assert_ne!(a, b, "pair items must be distinct");
        let items = if a < b { vec![a, b] } else { vec![b, a] };
        Itemset { items }
    }

    pub fn items(&self) -> &[usize] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

impl fmt::Display for Itemset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, item) in self.items.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{item}")?;
        }
        write!(f, "}}")
    }
}

/// An exact itemset frequency: `hits` matching rows out of `total`.
///
/// Comparisons (against other frequencies or against a [`Ratio64`]
/// threshold) cross-multiply in 128-bit arithmetic, so threshold checks
/// like f > eps/2 are never blurred by rounding.
#[derive(Clone, Copy, Debug)]
pub struct Frequency {
    hits: u64,
    total: u64,
}

impl Frequency {
    pub fn new(hits: u64, total: u64) -> Self {
        assert!(total >= 1, "frequency denominator must be positive");
        assert!(hits <= total, "frequency numerator exceeds denominator");
        Frequency { hits, total }
    }

    pub fn hits(&self) -> u64 {
        self.hits
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn is_zero(&self) -> bool {
        self.hits == 0
    }

    pub fn value(&self) -> Ratio64 {
        Ratio64::new(self.hits, self.total)
    }

    pub fn as_f64(&self) -> f64 {
        self.hits as f64 / self.total as f64
    }
}

impl PartialEq for Frequency {
    fn eq(&self, other: &Self) -> bool {
        (self.hits as u128) * (other.total as u128) == (other.hits as u128) * (self.total as u128)
    }
}

impl Eq for Frequency {}

impl PartialOrd for Frequency {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Frequency {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        let lhs = (self.hits as u128) * (other.total as u128);
        let rhs = (other.hits as u128) * (self.total as u128);
        lhs.cmp(&rhs)
    }
}

impl PartialEq<Ratio64> for Frequency {
    fn eq(&self, other: &Ratio64) -> bool {
        (self.hits as u128) * (*other.denom() as u128)
            == (*other.numer() as u128) * (self.total as u128)
    }
}

impl PartialOrd<Ratio64> for Frequency {
    fn partial_cmp(&self, other: &Ratio64) -> Option<std::cmp::Ordering> {
        let lhs = (self.hits as u128) * (*other.denom() as u128);
        let rhs = (*other.numer() as u128) * (self.total as u128);
        Some(lhs.cmp(&rhs))
    }
}

impl fmt::Display for Frequency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.hits, self.total)
    }
}

/// Immutable n x d bit matrix. Rows are stored contiguously, bit-packed
/// LSB-first with ceil(d/8) bytes per row and zero padding bits, which is
/// also the on-disk row encoding.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Database {
    n: usize,
    d: usize,
    stride: usize,
    bytes: Vec<u8>,
}

impl Database {
    pub fn from_rows(d: usize, rows: &[Row]) -> Result<Self, DatasetError> {
        if rows.is_empty() || d < 2 {
            return Err(DatasetError::BadDimensions { n: rows.len(), d });
        }
        let stride = bits::stride(d);
        let mut bytes = Vec::with_capacity(rows.len() * stride);
        for row in rows {
            if row.d() != d {
                return Err(DatasetError::RowWidth {
                    got: row.d(),
                    expected: d,
                });
            }
            bytes.extend_from_slice(row.as_bytes());
        }
        Ok(Database {
            n: rows.len(),
            d,
            stride,
            bytes,
        })
    }

    /// Build from already-packed row bytes (n rows of ceil(d/8) bytes each).
    pub fn from_packed(n: usize, d: usize, bytes: Vec<u8>) -> Result<Self, DatasetError> {
        if n == 0 || d < 2 {
            return Err(DatasetError::BadDimensions { n, d });
        }
        let stride = bits::stride(d);
        if bytes.len() != n * stride {
            return Err(DatasetError::Format(format!(
                "payload of {} bytes does not match {} rows of {} bytes",
                bytes.len(),
                n,
                stride
            )));
        }
        for row in bytes.chunks_exact(stride) {
            if !bits::tail_is_zero(row, d) {
                return Err(DatasetError::Format(
                    "nonzero padding bits in row".to_string(),
                ));
            }
        }
        Ok(Database {
            n,
            d,
            stride,
            bytes,
        })
    }

    /// Convenience constructor from `"0"`/`"1"` row literals.
    pub fn parse(rows: &[&str]) -> Result<Self, DatasetError> {
        let parsed: Vec<Row> = rows.iter().map(|s| s.parse()).collect::<Result<_, _>>()?;
        let d = parsed.first().map_or(0, Row::d);
        Database::from_rows(d, &parsed)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        bits::get(self.row_bytes(i), j)
    }

    pub fn row_bytes(&self, i: usize) -> &[u8] {
        &self.bytes[i * self.stride..(i + 1) * self.stride]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[u8]> {
        self.bytes.chunks_exact(self.stride)
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.bytes
    }

    /// Exact frequency of itemset `t`: the fraction of rows in which every
    /// column of `t` is set. The empty itemset has frequency 1.
    pub fn frequency(&self, t: &Itemset) -> Result<Frequency, DatasetError> {
        for &j in t.items() {
            if j >= self.d {
                return Err(DatasetError::IndexOutOfRange {
                    index: j,
                    d: self.d,
                });
            }
        }
        let hits = self
            .rows()
            .filter(|row| t.items().iter().all(|&j| bits::get(row, j)))
            .count() as u64;
        Ok(Frequency::new(hits, self.n as u64))
    }

    /// Serialize: magic `IFDB`, version 1, n and d as u64 little-endian,
    /// then the packed rows.
    pub fn write_to<W: Write>(&self, w: &mut W) -> io::Result<()> {
        w.write_all(DB_MAGIC)?;
        w.write_all(&[DB_VERSION])?;
        w.write_all(&(self.n as u64).to_le_bytes())?;
        w.write_all(&(self.d as u64).to_le_bytes())?;
        w.write_all(&self.bytes)
    }

    pub fn read_from<R: Read>(r: &mut R) -> Result<Self, DatasetError> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)
            .map_err(|_| DatasetError::Format("missing or short IFDB header".to_string()))?;
        if &magic != DB_MAGIC {
            return Err(DatasetError::Format(format!(
                "bad magic {magic:?}, expected \"IFDB\""
            )));
        }
        let mut version = [0u8; 1];
        r.read_exact(&mut version)
            .map_err(|_| DatasetError::Format("truncated header".to_string()))?;
        if version[0] != DB_VERSION {
            return Err(DatasetError::Format(format!(
                "unsupported version {}",
                version[0]
            )));
        }
        let n = read_u64(r)? as usize;
        let d = read_u64(r)? as usize;
        if n == 0 || d < 2 {
            return Err(DatasetError::Format(format!(
                "invalid dimensions n = {n}, d = {d}"
            )));
        }
        let expected = n
            .checked_mul(bits::stride(d))
            .ok_or_else(|| DatasetError::Format("dimensions overflow".to_string()))?;
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes)?;
        if bytes.len() != expected {
            return Err(DatasetError::Format(format!(
                "payload is {} bytes, dimensions require {}",
                bytes.len(),
                expected
            )));
        }
        Database::from_packed(n, d, bytes)
    }
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64, DatasetError> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)
        .map_err(|_| DatasetError::Format("truncated header".to_string()))?;
    Ok(u64::from_le_bytes(buf))
}
