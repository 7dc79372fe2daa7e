//! Instance manifests: a reproducibility record of what was encoded.
//!
//! Versioned text format, one field per line:
//!
//! ```text
//! ifi-manifest v1
//! d 64
//! eps 1/4
//! K 4
//! m 8
//! n 800
//! seed 2
//! perm 0 0: 5 2 7 0 1 4 6 3
//! perm 0 1: ...
//! ```
//!
//! Permutations are written row-major (`perm k l:` followed by the image
//! list), so identical instances render to identical bytes. The database
//! itself is stored separately in the IFDB format.

use std::fmt;
use std::str::FromStr;

use crate::lowerbound::{
    BlockLayout, CodecError, ConstInstance, GeneralInstance, Instance, Permutation, PermutationGrid,
};
use crate::Ratio64;

const MANIFEST_HEADER: &str = "ifi-manifest v1";

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Manifest {
    pub d: usize,
    pub epsilon: Ratio64,
    pub blocks: usize,
    pub m: usize,
    pub n: usize,
    pub seed: u64,
    pub perms: PermutationGrid,
}

impl Manifest {
    pub fn from_const(inst: &ConstInstance) -> Self {
        Manifest {
            d: inst.d(),
            epsilon: Ratio64::new(1, 1),
            blocks: 1,
            m: inst.m(),
            n: inst.n(),
            seed: inst.seed(),
            perms: PermutationGrid::new(1, vec![inst.pi().clone()]).expect("1x1 grid"),
        }
    }

    pub fn from_general(inst: &GeneralInstance) -> Self {
        Manifest {
            d: inst.d(),
            epsilon: inst.epsilon(),
            blocks: inst.blocks(),
            m: inst.m(),
            n: inst.n(),
            seed: inst.seed(),
            perms: inst.perms().clone(),
        }
    }

    pub fn from_instance(inst: &Instance) -> Self {
        match inst {
            Instance::Const(c) => Manifest::from_const(c),
            Instance::General(g) => Manifest::from_general(g),
        }
    }

    /// Validate internal consistency: the layout derived from (d, eps)
    /// must reproduce (K, m), n must divide into K blocks, and the grid
    /// shape must match.
    pub fn validate(&self) -> Result<(), CodecError> {
        let layout = BlockLayout::for_epsilon(self.d, self.epsilon)?;
        if layout.blocks() != self.blocks || layout.m() != self.m {
            return Err(CodecError::Format(format!(
                "K = {}, m = {} inconsistent with d = {}, eps = {}/{}",
                self.blocks,
                self.m,
                self.d,
                self.epsilon.numer(),
                self.epsilon.denom()
            )));
        }
        if self.n == 0 || !self.n.is_multiple_of(self.blocks) {
            return Err(CodecError::Format(format!(
                "n = {} is not a positive multiple of K = {}",
                self.n, self.blocks
            )));
        }
        if self.perms.blocks() != self.blocks || self.perms.m() != self.m {
            return Err(CodecError::Format(
                "permutation grid shape does not match layout".to_string(),
            ));
        }
        Ok(())
    }
}

impl fmt::Display for Manifest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{MANIFEST_HEADER}")?;
        writeln!(f, "d {}", self.d)?;
        writeln!(f, "eps {}/{}", self.epsilon.numer(), self.epsilon.denom())?;
        writeln!(f, "K {}", self.blocks)?;
        writeln!(f, "m {}", self.m)?;
        writeln!(f, "n {}", self.n)?;
        writeln!(f, "seed {}", self.seed)?;
        for k in 0..self.blocks {
            for l in 0..self.blocks {
                write!(f, "perm {k} {l}:")?;
                for &v in self.perms.get(k, l).as_slice() {
                    write!(f, " {v}")?;
                }
                writeln!(f)?;
            }
        }
        Ok(())
    }
}

impl FromStr for Manifest {
    type Err = CodecError;

    fn from_str(s: &str) -> Result<Self, CodecError> {
        let mut lines = s.lines();
        if lines.next() != Some(MANIFEST_HEADER) {
            return Err(CodecError::Format(format!(
                "manifest must start with \"{MANIFEST_HEADER}\""
            )));
        }
        let d: usize = parse_field(lines.next(), "d")?;
        let eps_raw: String = parse_field(lines.next(), "eps")?;
        let epsilon = parse_eps(&eps_raw)?;
        let blocks: usize = parse_field(lines.next(), "K")?;
        let m: usize = parse_field(lines.next(), "m")?;
        let n: usize = parse_field(lines.next(), "n")?;
        let seed: u64 = parse_field(lines.next(), "seed")?;

        let mut perms = Vec::with_capacity(blocks * blocks);
        for k in 0..blocks {
            for l in 0..blocks {
                let line = lines
                    .next()
                    .ok_or_else(|| CodecError::Format(format!("missing line for perm {k} {l}")))?;
                let prefix = format!("perm {k} {l}:");
                let rest = line.strip_prefix(&prefix).ok_or_else(|| {
                    CodecError::Format(format!("expected \"{prefix}\", got \"{line}\""))
                })?;
                let map: Vec<usize> = rest
                    .split_whitespace()
                    .map(|tok| {
                        tok.parse::<usize>().map_err(|_| {
                            CodecError::Format(format!("bad permutation value \"{tok}\""))
                        })
                    })
                    .collect::<Result<_, _>>()?;
                if map.len() != m {
                    return Err(CodecError::Format(format!(
                        "perm {k} {l} has {} values, expected {m}",
                        map.len()
                    )));
                }
                perms.push(Permutation::from_vec(map)?);
            }
        }
        if lines.any(|l| !l.trim().is_empty()) {
            return Err(CodecError::Format(
                "trailing content in manifest".to_string(),
            ));
        }
        let manifest = Manifest {
            d,
            epsilon,
            blocks,
            m,
            n,
            seed,
            perms: PermutationGrid::new(blocks, perms)?,
        };
        manifest.validate()?;
        Ok(manifest)
    }
}

fn parse_field<T: FromStr>(line: Option<&str>, key: &str) -> Result<T, CodecError> {
    let line = line.ok_or_else(|| CodecError::Format(format!("missing field \"{key}\"")))?;
    let rest = line
        .strip_prefix(key)
        .and_then(|r| r.strip_prefix(' '))
        .ok_or_else(|| CodecError::Format(format!("expected \"{key} <value>\", got \"{line}\"")))?;
    rest.trim()
        .parse()
        .map_err(|_| CodecError::Format(format!("bad value for \"{key}\": \"{rest}\"")))
}

fn parse_eps(raw: &str) -> Result<Ratio64, CodecError> {
    let (num, den) = raw
        .split_once('/')
        .ok_or_else(|| CodecError::Format(format!("eps must be \"p/q\", got \"{raw}\"")))?;
    let p: u64 = num
        .parse()
        .map_err(|_| CodecError::Format(format!("bad eps numerator \"{num}\"")))?;
    let q: u64 = den
        .parse()
        .map_err(|_| CodecError::Format(format!("bad eps denominator \"{den}\"")))?;
    if q == 0 {
        return Err(CodecError::Format("eps denominator is zero".to_string()));
    }
    Ok(Ratio64::new(p, q))
}
