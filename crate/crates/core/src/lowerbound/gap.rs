//! Frequency-gap audits for generated instances.
//!
//! Decoding is unambiguous only if matched pairs (i paired with its
//! permutation image) have frequency exactly zero while every other
//! audited pair clears a threshold. The audits below recompute every
//! pair's frequency with the exact [`Database::frequency`] scan (the
//! ground-truth oracle) rather than any counting shortcut, so a bug in a
//! sketch build cannot hide in its own audit.
//!
//! Audit scope differs by construction:
//!
//! * single-block instances audit all d(d-1)/2 column pairs at threshold
//!   1/8; within-half pairs also co-occur with probability 1/4 per row,
//!   so they are held to the same bar;
//! * general instances audit the (d/2)^2 cross-half pairs the decoder may
//!   query, at threshold eps/8. First-half pairs that straddle two blocks
//!   never co-occur by construction and are not decoder-relevant, so they
//!   are out of scope.

use crate::dataset::{Frequency, Itemset};
use crate::lowerbound::{ConstInstance, GeneralInstance, Instance};
use crate::Ratio64;

/// Result of a gap audit. `pass` holds iff every matched pair has
/// frequency exactly 0 and every unmatched pair reaches `threshold`.
#[derive(Clone, Debug)]
pub struct GapReport {
    pub matched_pairs: usize,
    pub unmatched_pairs: usize,
    /// Largest matched-pair frequency seen; must be 0.
    pub matched_max_frequency: Frequency,
    /// Smallest unmatched-pair frequency seen.
    pub unmatched_min_frequency: Frequency,
    pub threshold: Ratio64,
    pub pass: bool,
    /// Offending pairs: matched with nonzero frequency, or unmatched
    /// below threshold.
    pub violations: Vec<(Itemset, Frequency)>,
}

struct GapTally {
    threshold: Ratio64,
    matched_pairs: usize,
    unmatched_pairs: usize,
    matched_max: Frequency,
    unmatched_min: Frequency,
    violations: Vec<(Itemset, Frequency)>,
}

impl GapTally {
    fn new(threshold: Ratio64, n: u64) -> Self {
        GapTally {
            threshold,
            matched_pairs: 0,
            unmatched_pairs: 0,
            matched_max: Frequency::new(0, n),
            unmatched_min: Frequency::new(n, n),
            violations: Vec::new(),
        }
    }

    fn record(&mut self, pair: Itemset, f: Frequency, matched: bool) {
        if matched {
            self.matched_pairs += 1;
            if f > self.matched_max {
                self.matched_max = f;
            }
            if !f.is_zero() {
                self.violations.push((pair, f));
            }
        } else {
            self.unmatched_pairs += 1;
            if f < self.unmatched_min {
                self.unmatched_min = f;
            }
            if f < self.threshold {
                self.violations.push((pair, f));
            }
        }
    }

    fn finish(self) -> GapReport {
        let pass = self.matched_max.is_zero() && self.unmatched_min >= self.threshold;
        GapReport {
            matched_pairs: self.matched_pairs,
            unmatched_pairs: self.unmatched_pairs,
            matched_max_frequency: self.matched_max,
            unmatched_min_frequency: self.unmatched_min,
            threshold: self.threshold,
            pass,
            violations: self.violations,
        }
    }
}

/// Audit a single-block instance: every column pair, threshold 1/8.
pub fn verify_gap_const(inst: &ConstInstance) -> GapReport {
    let d = inst.d();
    let m = inst.m();
    let db = inst.db();
    let mut tally = GapTally::new(Ratio64::new(1, 8), db.n() as u64);
    for a in 0..d {
        for b in (a + 1)..d {
            let pair = Itemset::pair(a, b);
            let f = db.frequency(&pair).expect("audited columns in range");
            let matched = a < m && b >= m && inst.pi().apply(a) == b - m;
            tally.record(pair, f, matched);
        }
    }
    tally.finish()
}

/// Audit a general instance: every cross-half pair, threshold eps/8.
pub fn verify_gap_general(inst: &GeneralInstance) -> GapReport {
    let layout = *inst.layout();
    let m = layout.m();
    let db = inst.db();
    let threshold = inst.epsilon() / Ratio64::new(8, 1);
    let mut tally = GapTally::new(threshold, db.n() as u64);
    for k in 0..layout.blocks() {
        for i in 0..m {
            for l in 0..layout.blocks() {
                let pi = inst.perms().get(k, l);
                for j in 0..m {
                    let pair = Itemset::pair(layout.first_col(k, i), layout.second_col(l, j));
                    let f = db.frequency(&pair).expect("audited columns in range");
                    tally.record(pair, f, pi.apply(i) == j);
                }
            }
        }
    }
    tally.finish()
}

/// Audit either instance kind with its matching scope and threshold.
pub fn verify_gap(inst: &Instance) -> GapReport {
    match inst {
        Instance::Const(c) => verify_gap_const(c),
        Instance::General(g) => verify_gap_general(g),
    }
}

/// Row-level structural check: count (row, matched pair) combinations in
/// which both columns of a matched pair are set. The construction makes
/// this impossible, so the count must be 0 for every instance, a
/// stronger statement than the aggregate frequency being 0.
pub fn count_matched_cooccurrences(inst: &Instance) -> u64 {
    let mut violations = 0;
    match inst {
        Instance::Const(c) => {
            let m = c.m();
            for r in 0..c.n() {
                for i in 0..m {
                    if c.db().get(r, i) && c.db().get(r, m + c.pi().apply(i)) {
                        violations += 1;
                    }
                }
            }
        }
        Instance::General(g) => {
            let layout = *g.layout();
            for r in 0..g.n() {
                for k in 0..layout.blocks() {
                    for i in 0..layout.m() {
                        if !g.db().get(r, layout.first_col(k, i)) {
                            continue;
                        }
                        for l in 0..layout.blocks() {
                            let j = g.perms().get(k, l).apply(i);
                            if g.db().get(r, layout.second_col(l, j)) {
                                violations += 1;
                            }
                        }
                    }
                }
            }
        }
    }
    violations
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lowerbound::{ConstInstance, Permutation, Subset};

    /// The d = 4 instance that enumerates every subset of {0, 1} with the
    /// identity permutation. All four rows: 0011, 1001, 0110, 1100.
    fn enumerated_instance() -> ConstInstance {
        let pi = Permutation::identity(2);
        let subsets = [
            Subset::empty(2),
            Subset::from_members(2, [0]).unwrap(),
            Subset::from_members(2, [1]).unwrap(),
            Subset::full(2),
        ];
        ConstInstance::from_subsets(&pi, &subsets).unwrap()
    }

    #[test]
    fn enumerated_instance_frequencies() {
        let inst = enumerated_instance();
        let db = inst.db();
        let f = |a, b| db.frequency(&Itemset::pair(a, b)).unwrap();
        assert!(f(0, 2).is_zero());
        assert_eq!(f(0, 3), Frequency::new(1, 4));
        assert!(f(1, 3).is_zero());
        assert_eq!(f(1, 2), Frequency::new(1, 4));
    }

    #[test]
    fn enumerated_instance_passes_the_gap() {
        let report = verify_gap_const(&enumerated_instance());
        assert!(report.pass);
        assert!(report.matched_max_frequency.is_zero());
        assert_eq!(report.unmatched_min_frequency, Frequency::new(1, 4));
        assert_eq!(report.threshold, Ratio64::new(1, 8));
        assert_eq!(report.matched_pairs, 2);
        assert_eq!(report.unmatched_pairs, 4);
        assert!(report.violations.is_empty());
    }

    #[test]
    fn single_row_instance_fails_the_gap() {
        let pi = Permutation::identity(2);
        let inst =
            ConstInstance::from_subsets(&pi, &[Subset::from_members(2, [0]).unwrap()]).unwrap();
        let report = verify_gap_const(&inst);
        assert!(!report.pass);
        assert!(report.matched_max_frequency.is_zero());
        assert!(report.unmatched_min_frequency.is_zero());
        assert!(!report.violations.is_empty());
    }

    #[test]
    fn matched_cooccurrence_is_structurally_impossible() {
        let inst = Instance::Const(enumerated_instance());
        assert_eq!(count_matched_cooccurrences(&inst), 0);
    }
}
