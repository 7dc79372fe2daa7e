//! Permutations and random subsets, the raw material of hard instances.

use rand::seq::SliceRandom;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bits;
use crate::lowerbound::CodecError;

/// ChaCha stream id reserved for permutation sampling; instance row
/// generation uses the block index as its stream, so a single seed yields
/// independent streams for the message (the permutations) and the rows.
const PERM_STREAM: u64 = u64::MAX;

/// A bijection on {0, ..., m-1}, stored as its forward map.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Permutation {
    map: Vec<usize>,
}

impl Permutation {
    pub fn identity(m: usize) -> Self {
        Permutation {
            map: (0..m).collect(),
        }
    }

    /// Validate that `map` is a bijection on {0, ..., m-1}.
    pub fn from_vec(map: Vec<usize>) -> Result<Self, CodecError> {
        let m = map.len();
        let mut seen = vec![false; m];
        for &v in &map {
            if v >= m {
                return Err(CodecError::InvalidPermutation(format!(
                    "value {v} out of range for length {m}"
                )));
            }
            if seen[v] {
                return Err(CodecError::InvalidPermutation(format!(
                    "value {v} appears twice"
                )));
            }
            seen[v] = true;
        }
        Ok(Permutation { map })
    }

    /// Uniformly random permutation via Fisher-Yates.
    pub fn random<R: rand::Rng>(m: usize, rng: &mut R) -> Self {
        let mut map: Vec<usize> = (0..m).collect();
        map.shuffle(rng);
        Permutation { map }
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    #[inline]
    pub fn apply(&self, i: usize) -> usize {
        self.map[i]
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.map.len()];
        for (i, &v) in self.map.iter().enumerate() {
            inv[v] = i;
        }
        Permutation { map: inv }
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.map
    }
}

/// A K x K matrix of permutations of {0, ..., m-1}, row-major.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PermutationGrid {
    blocks: usize,
    perms: Vec<Permutation>,
}

impl PermutationGrid {
    pub fn new(blocks: usize, perms: Vec<Permutation>) -> Result<Self, CodecError> {
        if perms.len() != blocks * blocks {
            return Err(CodecError::Dimension(format!(
                "expected {} permutations for {blocks} blocks, got {}",
                blocks * blocks,
                perms.len()
            )));
        }
        if let Some(first) = perms.first() {
            let m = first.len();
            if perms.iter().any(|p| p.len() != m) {
                return Err(CodecError::Dimension(
                    "permutations in a grid must share one length".to_string(),
                ));
            }
        }
        Ok(PermutationGrid { blocks, perms })
    }

    pub fn identity(blocks: usize, m: usize) -> Self {
        PermutationGrid {
            blocks,
            perms: vec![Permutation::identity(m); blocks * blocks],
        }
    }

    /// Sample all K^2 permutations from a dedicated seeded stream.
    pub fn random_from_seed(seed: u64, blocks: usize, m: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(PERM_STREAM);
        let perms = (0..blocks * blocks)
            .map(|_| Permutation::random(m, &mut rng))
            .collect();
        PermutationGrid { blocks, perms }
    }

    pub fn blocks(&self) -> usize {
        self.blocks
    }

    pub fn m(&self) -> usize {
        self.perms.first().map_or(0, Permutation::len)
    }

    /// The permutation connecting first-half block `k` to second-half
    /// block `l`.
    pub fn get(&self, k: usize, l: usize) -> &Permutation {
        &self.perms[k * self.blocks + l]
    }

    /// All permutations of first-half block `k`, indexed by target block.
    pub fn row(&self, k: usize) -> &[Permutation] {
        &self.perms[k * self.blocks..(k + 1) * self.blocks]
    }

    pub fn iter(&self) -> impl Iterator<Item = &Permutation> {
        self.perms.iter()
    }
}

/// A subset of {0, ..., m-1}, bit-packed.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Subset {
    m: usize,
    bytes: Vec<u8>,
}

impl Subset {
    pub fn empty(m: usize) -> Self {
        Subset {
            m,
            bytes: vec![0; bits::stride(m)],
        }
    }

    pub fn full(m: usize) -> Self {
        let mut bytes = vec![0xff; bits::stride(m)];
        bits::mask_tail(&mut bytes, m);
        Subset { m, bytes }
    }

    pub fn from_members<I: IntoIterator<Item = usize>>(
        m: usize,
        members: I,
    ) -> Result<Self, CodecError> {
        let mut s = Subset::empty(m);
        for i in members {
            if i >= m {
                return Err(CodecError::Dimension(format!(
                    "member {i} out of range for universe size {m}"
                )));
            }
            bits::set(&mut s.bytes, i);
        }
        Ok(s)
    }

    /// Each element included independently with probability 1/2.
    pub fn random<R: RngCore>(m: usize, rng: &mut R) -> Self {
        let mut bytes = vec![0; bits::stride(m)];
        rng.fill_bytes(&mut bytes);
        bits::mask_tail(&mut bytes, m);
        Subset { m, bytes }
    }

    pub fn universe(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn contains(&self, i: usize) -> bool {
        i < self.m && bits::get(&self.bytes, i)
    }

    pub fn members(&self) -> impl Iterator<Item = usize> + '_ {
        bits::ones(&self.bytes)
    }

    pub fn len(&self) -> usize {
        self.bytes.iter().map(|b| b.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.bytes.iter().all(|&b| b == 0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn from_vec_validates_bijection() {
        assert!(Permutation::from_vec(vec![1, 0, 2]).is_ok());
        assert!(Permutation::from_vec(vec![1, 1, 2]).is_err());
        assert!(Permutation::from_vec(vec![1, 3, 2]).is_err());
    }

    #[test]
    fn inverse_is_consistent() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for m in [1usize, 2, 5, 17] {
            let p = Permutation::random(m, &mut rng);
            let inv = p.inverse();
            for i in 0..m {
                assert_eq!(inv.apply(p.apply(i)), i);
                assert_eq!(p.apply(inv.apply(i)), i);
            }
        }
    }

    #[test]
    fn grid_shape_is_checked() {
        let perms = vec![Permutation::identity(3); 4];
        let grid = PermutationGrid::new(2, perms).unwrap();
        assert_eq!(grid.blocks(), 2);
        assert_eq!(grid.m(), 3);
        assert!(PermutationGrid::new(2, vec![Permutation::identity(3); 3]).is_err());
        let ragged = vec![
            Permutation::identity(3),
            Permutation::identity(2),
            Permutation::identity(3),
            Permutation::identity(3),
        ];
        assert!(PermutationGrid::new(2, ragged).is_err());
    }

    #[test]
    fn random_grid_is_seed_deterministic() {
        let a = PermutationGrid::random_from_seed(9, 3, 4);
        let b = PermutationGrid::random_from_seed(9, 3, 4);
        assert_eq!(a, b);
        assert_ne!(a, PermutationGrid::random_from_seed(10, 3, 4));
    }

    #[test]
    fn subset_membership() {
        let s = Subset::from_members(10, [0, 3, 9]).unwrap();
        assert!(s.contains(0) && s.contains(3) && s.contains(9));
        assert!(!s.contains(1) && !s.contains(8));
        assert_eq!(s.members().collect::<Vec<_>>(), vec![0, 3, 9]);
        assert_eq!(s.len(), 3);
        assert!(Subset::from_members(4, [4]).is_err());
        assert_eq!(Subset::full(5).len(), 5);
        assert!(Subset::empty(5).is_empty());
    }
}
