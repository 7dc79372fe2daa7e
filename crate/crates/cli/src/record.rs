//! Per-trial records and their CSV form.

use std::fmt;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

/// One pipeline trial. `ms` is wall time and is reported but never part
/// of any determinism or correctness check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub seed: u64,
    pub gap_pass: bool,
    pub decode_ok: bool,
    pub sketch_bits: u64,
    pub entropy_bits: f64,
    pub queries: u64,
    pub ms: u64,
}

pub const CSV_HEADER: [&str; 8] = [
    "trial",
    "seed",
    "gap_pass",
    "decode_ok",
    "sketch_bits",
    "entropy_bits",
    "queries",
    "ms",
];

/// Write records as CSV with the fixed header; an empty slice yields a
/// header-only file.
pub fn write_records<W: Write>(w: W, records: &[TrialRecord]) -> Result<(), csv::Error> {
    let mut wtr = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    wtr.write_record(CSV_HEADER)?;
    for record in records {
        wtr.serialize(record)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_records<R: Read>(r: R) -> Result<Vec<TrialRecord>, csv::Error> {
    let mut rdr = csv::Reader::from_reader(r);
    rdr.deserialize().collect()
}

/// Aggregate view of a record set.
#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub trials: usize,
    pub gap_passes: usize,
    pub decodes_ok: usize,
    pub mean_sketch_bits: f64,
    pub entropy_bits: f64,
}

impl Summary {
    pub fn from_records(records: &[TrialRecord]) -> Summary {
        let trials = records.len();
        let gap_passes = records.iter().filter(|r| r.gap_pass).count();
        let decodes_ok = records.iter().filter(|r| r.decode_ok).count();
        let mean_sketch_bits = if trials == 0 {
            0.0
        } else {
            records.iter().map(|r| r.sketch_bits as f64).sum::<f64>() / trials as f64
        };
        let entropy_bits = records.first().map_or(0.0, |r| r.entropy_bits);
        Summary {
            trials,
            gap_passes,
            decodes_ok,
            mean_sketch_bits,
            entropy_bits,
        }
    }

    /// Fraction of gap-passing trials whose decode recovered everything.
    pub fn conditional_recovery(&self) -> f64 {
        if self.gap_passes == 0 {
            0.0
        } else {
            self.decodes_ok as f64 / self.gap_passes as f64
        }
    }
}

impl fmt::Display for Summary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "trials {}", self.trials)?;
        writeln!(f, "gap_pass {}", self.gap_passes)?;
        writeln!(f, "decode_ok {}", self.decodes_ok)?;
        writeln!(
            f,
            "conditional_recovery {}/{} ({:.3})",
            self.decodes_ok,
            self.gap_passes,
            self.conditional_recovery()
        )?;
        writeln!(f, "mean_sketch_bits {:.1}", self.mean_sketch_bits)?;
        write!(f, "entropy_bits {:.3}", self.entropy_bits)
    }
}
