//! Recover encoded permutations through indicator queries alone.
//!
//! Against an instance whose gap audit passes and a conforming sketch
//! built at one eighth of the instance parameter, the query for the pair
//! (block k index i, second-half block l index j) answers NO exactly when
//! j is the image of i under the (k, l) permutation. Each (k, l, i) scan
//! must therefore see exactly one NO; zero or several NOs mean the gap
//! failed or the oracle is out of contract, and decoding refuses to guess.

use crate::dataset::Itemset;
use crate::lowerbound::{BlockLayout, CodecError, Permutation, PermutationGrid};
use crate::sketch::{IndicatorAnswer, IndicatorOracle};
use crate::Ratio64;

/// Decode the single permutation of a d-column single-block instance by
/// querying pairs {i, m + j}. Issues at most m^2 queries. For m = 1 the
/// only permutation is returned without querying.
pub fn decode_const<O: IndicatorOracle + ?Sized>(
    oracle: &O,
    d: usize,
) -> Result<Permutation, CodecError> {
    let layout = BlockLayout::single_block(d)?;
    decode_block(oracle, &layout, 0, 0)
}

/// Decode all K^2 permutations of a general instance by querying the
/// pairs {k*m + i, d/2 + l*m + j}. Issues at most K^2 m^2 queries.
pub fn decode_general<O: IndicatorOracle + ?Sized>(
    oracle: &O,
    d: usize,
    epsilon: Ratio64,
) -> Result<PermutationGrid, CodecError> {
    let layout = BlockLayout::for_epsilon(d, epsilon)?;
    let blocks = layout.blocks();
    let mut perms = Vec::with_capacity(blocks * blocks);
    for k in 0..blocks {
        for l in 0..blocks {
            perms.push(decode_block(oracle, &layout, k, l)?);
        }
    }
    PermutationGrid::new(blocks, perms)
}

/// Decode by layout: the single-block route when K = 1, the general route
/// otherwise. The const result is returned as a 1 x 1 grid.
pub fn decode_any<O: IndicatorOracle + ?Sized>(
    oracle: &O,
    d: usize,
    epsilon: Ratio64,
) -> Result<PermutationGrid, CodecError> {
    let layout = BlockLayout::for_epsilon(d, epsilon)?;
    if layout.blocks() == 1 {
        let pi = decode_const(oracle, d)?;
        PermutationGrid::new(1, vec![pi])
    } else {
        decode_general(oracle, d, epsilon)
    }
}

fn decode_block<O: IndicatorOracle + ?Sized>(
    oracle: &O,
    layout: &BlockLayout,
    k: usize,
    l: usize,
) -> Result<Permutation, CodecError> {
    let m = layout.m();
    if m == 1 {
        // A single candidate permutation; nothing to ask.
        return Ok(Permutation::identity(1));
    }
    let mut map = vec![0usize; m];
    for (i, slot) in map.iter_mut().enumerate() {
        let mut found = None;
        for j in 0..m {
            let pair = Itemset::pair(layout.first_col(k, i), layout.second_col(l, j));
            if oracle.query(&pair)? == IndicatorAnswer::No {
                if found.is_some() {
                    return Err(CodecError::DecodeAmbiguous {
                        k,
                        l,
                        i,
                        no_answers: 2,
                    });
                }
                found = Some(j);
            }
        }
        *slot = found.ok_or(CodecError::DecodeAmbiguous {
            k,
            l,
            i,
            no_answers: 0,
        })?;
    }
    // A conforming oracle yields a bijection; anything else is reported,
    // not patched up.
    Permutation::from_vec(map)
}
