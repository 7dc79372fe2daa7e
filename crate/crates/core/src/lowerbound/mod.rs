//! Hard instances that force indicator sketches to carry permutations.
//!
//! The pipeline: pick permutations, [`generate_instance`] a database that
//! encodes them, [`verify_gap`] that matched pairs have frequency exactly
//! 0 while everything else clears the threshold, build any conforming
//! sketch at one eighth of the instance parameter, and [`decode_any`] the
//! permutations back through indicator queries alone. [`entropy_bits`]
//! says how much information a successful decode proves the sketch holds.

mod decode;
mod entropy;
mod gap;
mod instance;
mod manifest;
mod perm;

use std::io;

use thiserror::Error;

use crate::dataset::DatasetError;
use crate::sketch::SketchError;

pub use decode::{decode_any, decode_const, decode_general};
pub use entropy::{entropy_bits, theoretical_co_occurrence_probability};
pub use gap::{
    count_matched_cooccurrences, verify_gap, verify_gap_const, verify_gap_general, GapReport,
};
pub use instance::{
    default_rows_per_block, gen_const_instance, gen_general_instance, generate_instance,
    make_row_const, make_row_general, BlockLayout, ConstInstance, GeneralInstance, Instance,
};
pub use manifest::Manifest;
pub use perm::{Permutation, PermutationGrid, Subset};

#[derive(Debug, Error)]
pub enum CodecError {
    #[error("invalid parameters: {0}")]
    Param(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),
    #[error(
        "decode ambiguity at block ({k}, {l}), index {i}: {no_answers} NO answers where exactly one was expected"
    )]
    DecodeAmbiguous {
        k: usize,
        l: usize,
        i: usize,
        no_answers: usize,
    },
    #[error("manifest format error: {0}")]
    Format(String),
    #[error(transparent)]
    Sketch(#[from] SketchError),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Io(#[from] io::Error),
}
