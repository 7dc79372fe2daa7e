//! Hard-instance construction: databases that encode hidden permutations
//! into indicator answers.
//!
//! Columns split into two halves of d/2, each tiled by K = 1/eps blocks of
//! m = eps*d/2 columns (all indices 0-based). A row carries one subset
//! S of {0, ..., m-1}: in the constant-epsilon construction (K = 1) the
//! first half is the indicator of S and the second half marks pi(i) for
//! every i outside S. In the general construction a row belongs to one
//! first-half block k; block k holds the indicator of S and every
//! second-half block l marks pi_{k,l}(i) for i outside S.
//!
//! The payoff is the frequency gap: the pair {k*m + i, d/2 + l*m + j}
//! requires i in S and pi_{k,l}^{-1}(j) outside S, which is impossible
//! when j = pi_{k,l}(i) and otherwise happens with probability 1/4 per
//! block-k row. Matched pairs therefore have frequency exactly 0 while
//! every other pair concentrates well above it, and an indicator sketch
//! queried at the matched/unmatched boundary gives the permutations back.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dataset::{Database, Row};
use crate::lowerbound::{CodecError, Permutation, PermutationGrid, Subset};
use crate::Ratio64;

/// Column layout of a hard instance: K blocks of m columns per half,
/// d = 2 K m total.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct BlockLayout {
    d: usize,
    blocks: usize,
    m: usize,
}

impl BlockLayout {
    /// Layout for instance parameter `epsilon`: K = 1/eps and m = eps*d/2
    /// must both be positive integers; non-integral inputs are rejected,
    /// not rounded.
    pub fn for_epsilon(d: usize, epsilon: Ratio64) -> Result<Self, CodecError> {
        let (p, q) = (*epsilon.numer(), *epsilon.denom());
        if p == 0 || p > q {
            return Err(CodecError::Param(format!(
                "epsilon must lie in (0, 1], got {p}/{q}"
            )));
        }
        if q % p != 0 {
            return Err(CodecError::Param(format!(
                "1/epsilon must be an integer, got epsilon = {p}/{q}"
            )));
        }
        let blocks = (q / p) as usize;
        if d == 0 || !d.is_multiple_of(2 * blocks) {
            return Err(CodecError::Param(format!(
                "epsilon * d / 2 must be an integer >= 1, got d = {d}, epsilon = {p}/{q}"
            )));
        }
        Ok(BlockLayout {
            d,
            blocks,
            m: d / (2 * blocks),
        })
    }

    /// Single-block layout (K = 1, m = d/2); `d` must be even.
    pub fn single_block(d: usize) -> Result<Self, CodecError> {
        if d < 2 || !d.is_multiple_of(2) {
            return Err(CodecError::Param(format!(
                "d must be even and at least 2, got {d}"
            )));
        }
        Ok(BlockLayout {
            d,
            blocks: 1,
            m: d / 2,
        })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn blocks(&self) -> usize {
        self.blocks
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn half(&self) -> usize {
        self.d / 2
    }

    /// Column of index i within first-half block k.
    #[inline]
    pub fn first_col(&self, k: usize, i: usize) -> usize {
        k * self.m + i
    }

    /// Column of index j within second-half block l.
    #[inline]
    pub fn second_col(&self, l: usize, j: usize) -> usize {
        self.d / 2 + l * self.m + j
    }
}

/// Per-block row stream: block k draws from ChaCha stream k of the
/// instance seed, so adding blocks never perturbs earlier blocks' rows.
fn block_rng(seed: u64, block: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(block as u64);
    rng
}

/// Row of the single-block construction, width 2m: bit i (first half) set
/// iff i is in `s`; bit m + j (second half) set iff pi^{-1}(j) is not.
pub fn make_row_const(s: &Subset, pi: &Permutation) -> Row {
    let m = pi.len();
    assert_eq!(s.universe(), m, "subset universe must match |pi|");
    let mut row = Row::zeros(2 * m);
    for i in 0..m {
        if s.contains(i) {
            row.set(i);
        } else {
            row.set(m + pi.apply(i));
        }
    }
    row
}

/// Row of the general construction for first-half block `k`, width d:
/// block k of the first half is the indicator of `s`, the other first-half
/// blocks are zero, and second-half block l marks perms_k[l](i) for every
/// i outside `s`.
pub fn make_row_general(
    layout: &BlockLayout,
    k: usize,
    s: &Subset,
    perms_k: &[Permutation],
) -> Row {
    let m = layout.m();
    assert!(k < layout.blocks(), "block index out of range");
    assert_eq!(s.universe(), m, "subset universe must match m");
    assert_eq!(
        perms_k.len(),
        layout.blocks(),
        "need one permutation per target block"
    );
    let mut row = Row::zeros(layout.d());
    for i in 0..m {
        if s.contains(i) {
            row.set(layout.first_col(k, i));
        } else {
            for (l, pi) in perms_k.iter().enumerate() {
                row.set(layout.second_col(l, pi.apply(i)));
            }
        }
    }
    row
}

/// A generated single-permutation instance (the K = 1 construction).
#[derive(Clone, Debug)]
pub struct ConstInstance {
    layout: BlockLayout,
    pi: Permutation,
    seed: u64,
    db: Database,
}

impl ConstInstance {
    pub fn d(&self) -> usize {
        self.layout.d()
    }

    pub fn m(&self) -> usize {
        self.layout.m()
    }

    pub fn n(&self) -> usize {
        self.db.n()
    }

    pub fn layout(&self) -> &BlockLayout {
        &self.layout
    }

    pub fn pi(&self) -> &Permutation {
        &self.pi
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn db(&self) -> &Database {
        &self.db
    }

    /// Deterministic constructor from explicit subsets, one row each.
    /// Useful for enumerating every subset of a small universe; the seed
    /// field is recorded as 0 and is informational only here.
    pub fn from_subsets(pi: &Permutation, subsets: &[Subset]) -> Result<Self, CodecError> {
        let layout = BlockLayout::single_block(2 * pi.len())?;
        if subsets.is_empty() {
            return Err(CodecError::Param("need at least one row".to_string()));
        }
        let rows: Vec<Row> = subsets.iter().map(|s| make_row_const(s, pi)).collect();
        let db = Database::from_rows(layout.d(), &rows)?;
        Ok(ConstInstance {
            layout,
            pi: pi.clone(),
            seed: 0,
            db,
        })
    }
}

/// Generate a single-permutation instance: n rows, each built from a
/// fresh uniformly random subset. Deterministic per seed.
pub fn gen_const_instance(
    d: usize,
    pi: &Permutation,
    n: usize,
    seed: u64,
) -> Result<ConstInstance, CodecError> {
    let layout = BlockLayout::single_block(d)?;
    if pi.len() != layout.m() {
        return Err(CodecError::Dimension(format!(
            "|pi| = {} but d/2 = {}",
            pi.len(),
            layout.m()
        )));
    }
    if n == 0 {
        return Err(CodecError::Param(
            "row count must be at least 1".to_string(),
        ));
    }
    let mut rng = block_rng(seed, 0);
    let rows: Vec<Row> = (0..n)
        .map(|_| make_row_const(&Subset::random(layout.m(), &mut rng), pi))
        .collect();
    let db = Database::from_rows(d, &rows)?;
    Ok(ConstInstance {
        layout,
        pi: pi.clone(),
        seed,
        db,
    })
}

/// A generated K^2-permutation instance (the general construction).
#[derive(Clone, Debug)]
pub struct GeneralInstance {
    layout: BlockLayout,
    epsilon: Ratio64,
    perms: PermutationGrid,
    rows_per_block: usize,
    seed: u64,
    db: Database,
}

impl GeneralInstance {
    pub fn d(&self) -> usize {
        self.layout.d()
    }

    pub fn blocks(&self) -> usize {
        self.layout.blocks()
    }

    pub fn m(&self) -> usize {
        self.layout.m()
    }

    pub fn n(&self) -> usize {
        self.db.n()
    }

    pub fn epsilon(&self) -> Ratio64 {
        self.epsilon
    }

    pub fn layout(&self) -> &BlockLayout {
        &self.layout
    }

    pub fn perms(&self) -> &PermutationGrid {
        &self.perms
    }

    pub fn rows_per_block(&self) -> usize {
        self.rows_per_block
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn db(&self) -> &Database {
        &self.db
    }
}

/// Generate a general instance: for each block k in order, rows_per_block
/// rows from block k's seeded stream. Total n = K * rows_per_block.
pub fn gen_general_instance(
    d: usize,
    epsilon: Ratio64,
    perms: PermutationGrid,
    rows_per_block: usize,
    seed: u64,
) -> Result<GeneralInstance, CodecError> {
    let layout = BlockLayout::for_epsilon(d, epsilon)?;
    if perms.blocks() != layout.blocks() || perms.m() != layout.m() {
        return Err(CodecError::Dimension(format!(
            "permutation grid is {} blocks of length {}, layout needs {} of {}",
            perms.blocks(),
            perms.m(),
            layout.blocks(),
            layout.m()
        )));
    }
    if rows_per_block == 0 {
        return Err(CodecError::Param(
            "rows_per_block must be at least 1".to_string(),
        ));
    }
    let mut rows = Vec::with_capacity(layout.blocks() * rows_per_block);
    for k in 0..layout.blocks() {
        let mut rng = block_rng(seed, k);
        for _ in 0..rows_per_block {
            let s = Subset::random(layout.m(), &mut rng);
            rows.push(make_row_general(&layout, k, &s, perms.row(k)));
        }
    }
    let db = Database::from_rows(d, &rows)?;
    Ok(GeneralInstance {
        layout,
        epsilon,
        perms,
        rows_per_block,
        seed,
        db,
    })
}

/// Either instance kind, for pipelines that handle both.
#[derive(Clone, Debug)]
pub enum Instance {
    Const(ConstInstance),
    General(GeneralInstance),
}

impl Instance {
    pub fn d(&self) -> usize {
        match self {
            Instance::Const(c) => c.d(),
            Instance::General(g) => g.d(),
        }
    }

    /// Instance parameter epsilon; 1 for the single-block construction.
    pub fn epsilon(&self) -> Ratio64 {
        match self {
            Instance::Const(_) => Ratio64::new(1, 1),
            Instance::General(g) => g.epsilon(),
        }
    }

    pub fn seed(&self) -> u64 {
        match self {
            Instance::Const(c) => c.seed(),
            Instance::General(g) => g.seed(),
        }
    }

    pub fn db(&self) -> &Database {
        match self {
            Instance::Const(c) => c.db(),
            Instance::General(g) => g.db(),
        }
    }

    /// The encoded permutations as a grid (a 1 x 1 grid for const).
    pub fn perm_grid(&self) -> PermutationGrid {
        match self {
            Instance::Const(c) => PermutationGrid::new(1, vec![c.pi().clone()]).expect("1x1 grid"),
            Instance::General(g) => g.perms().clone(),
        }
    }
}

/// Generate an instance, taking the single-block route when K = 1 and the
/// general route otherwise. The two routes produce byte-identical
/// databases for K = 1 under the same seed.
pub fn generate_instance(
    d: usize,
    epsilon: Ratio64,
    perms: PermutationGrid,
    rows_per_block: usize,
    seed: u64,
) -> Result<Instance, CodecError> {
    let layout = BlockLayout::for_epsilon(d, epsilon)?;
    if layout.blocks() == 1 {
        if perms.blocks() != 1 || perms.m() != layout.m() {
            return Err(CodecError::Dimension(format!(
                "permutation grid is {} blocks of length {}, layout needs 1 of {}",
                perms.blocks(),
                perms.m(),
                layout.m()
            )));
        }
        Ok(Instance::Const(gen_const_instance(
            d,
            perms.get(0, 0),
            rows_per_block,
            seed,
        )?))
    } else {
        Ok(Instance::General(gen_general_instance(
            d,
            epsilon,
            perms,
            rows_per_block,
            seed,
        )?))
    }
}

/// Default rows per block: ceil(48 * ln(max(d, 3))). A Chernoff bound
/// gives P[Binomial(r, 1/4) < r/8] <= exp(-r/32), which union-bounded
/// over the d^2 query pairs keeps instance gap failures rare at desk
/// scale; the CLI exposes the count as a knob.
pub fn default_rows_per_block(d: usize) -> usize {
    let x = (d.max(3)) as f64;
    (48.0 * x.ln()).ceil() as usize
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bit_string(row: &Row) -> String {
        (0..row.d())
            .map(|j| if row.get(j) { '1' } else { '0' })
            .collect()
    }

    #[test]
    fn const_row_follows_the_defining_formula() {
        // m = 2, identity permutation, S = {0}: first half 10, second
        // half marks pi(1) = 1, giving 1001.
        let pi = Permutation::identity(2);
        let s = Subset::from_members(2, [0]).unwrap();
        assert_eq!(bit_string(&make_row_const(&s, &pi)), "1001");
    }

    #[test]
    fn const_row_full_subset_zeroes_second_half() {
        let pi = Permutation::from_vec(vec![2, 0, 1]).unwrap();
        let row = make_row_const(&Subset::full(3), &pi);
        assert_eq!(bit_string(&row), "111000");
    }

    #[test]
    fn const_row_empty_subset_fills_second_half() {
        let pi = Permutation::from_vec(vec![2, 0, 1]).unwrap();
        let row = make_row_const(&Subset::empty(3), &pi);
        assert_eq!(bit_string(&row), "000111");
    }

    #[test]
    fn general_row_single_block_matches_const_row() {
        let layout = BlockLayout::single_block(8).unwrap();
        let pi = Permutation::from_vec(vec![3, 1, 0, 2]).unwrap();
        let perms = [pi.clone()];
        for members in [vec![], vec![0], vec![1, 3], vec![0, 1, 2, 3]] {
            let s = Subset::from_members(4, members).unwrap();
            assert_eq!(
                make_row_general(&layout, 0, &s, &perms),
                make_row_const(&s, &pi)
            );
        }
    }

    #[test]
    fn general_row_two_blocks_m_one() {
        // K = 2, m = 1, block 0, S empty, identity permutations: the
        // first half stays 00 and each second-half block marks index 0.
        let layout = BlockLayout::for_epsilon(4, Ratio64::new(1, 2)).unwrap();
        let grid = PermutationGrid::identity(2, 1);
        let row = make_row_general(&layout, 0, &Subset::empty(1), grid.row(0));
        assert_eq!(bit_string(&row), "0011");
    }

    #[test]
    fn general_row_full_subset_zeroes_second_half() {
        let layout = BlockLayout::for_epsilon(12, Ratio64::new(1, 3)).unwrap();
        let grid = PermutationGrid::identity(3, 2);
        let row = make_row_general(&layout, 1, &Subset::full(2), grid.row(1));
        assert_eq!(bit_string(&row), "001100000000");
    }

    #[test]
    fn layout_rejects_non_integral_parameters() {
        assert!(BlockLayout::for_epsilon(15, Ratio64::new(1, 4)).is_err());
        assert!(BlockLayout::for_epsilon(16, Ratio64::new(2, 5)).is_err());
        assert!(BlockLayout::for_epsilon(16, Ratio64::new(0, 1)).is_err());
        assert!(BlockLayout::for_epsilon(16, Ratio64::new(3, 2)).is_err());
        let layout = BlockLayout::for_epsilon(64, Ratio64::new(1, 4)).unwrap();
        assert_eq!((layout.blocks(), layout.m()), (4, 8));
        assert!(BlockLayout::single_block(5).is_err());
    }

    #[test]
    fn gen_const_rejects_bad_inputs() {
        let pi = Permutation::identity(2);
        assert!(gen_const_instance(4, &pi, 0, 0).is_err());
        assert!(matches!(
            gen_const_instance(6, &pi, 4, 0),
            Err(CodecError::Dimension(_))
        ));
        let inst = gen_const_instance(4, &pi, 1, 42).unwrap();
        assert_eq!(inst.n(), 1);
        // The single row is a well-formed encoding: exactly m bits set,
        // one per element (either in the subset or via its image).
        let ones = inst.db().rows().next().unwrap();
        let count: u32 = ones.iter().map(|b| b.count_ones()).sum();
        assert_eq!(count, 2);
    }

    #[test]
    fn gen_const_is_seed_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let pi = Permutation::random(128, &mut rng);
        let a = gen_const_instance(256, &pi, 288, 11).unwrap();
        let b = gen_const_instance(256, &pi, 288, 11).unwrap();
        assert_eq!(a.db().as_bytes(), b.db().as_bytes());
        let c = gen_const_instance(256, &pi, 288, 12).unwrap();
        assert_ne!(a.db().as_bytes(), c.db().as_bytes());
    }

    #[test]
    fn gen_general_counts_blocks_and_rows() {
        let grid = PermutationGrid::random_from_seed(2, 4, 8);
        let inst = gen_general_instance(64, Ratio64::new(1, 4), grid, 3, 2).unwrap();
        assert_eq!(inst.blocks(), 4);
        assert_eq!(inst.m(), 8);
        assert_eq!(inst.n(), 12);
        assert_eq!(inst.perms().iter().count(), 16);
    }

    #[test]
    fn gen_general_is_seed_deterministic() {
        let grid = PermutationGrid::random_from_seed(9, 2, 4);
        let a = gen_general_instance(16, Ratio64::new(1, 2), grid.clone(), 3, 9).unwrap();
        let b = gen_general_instance(16, Ratio64::new(1, 2), grid, 3, 9).unwrap();
        assert_eq!(a.db().as_bytes(), b.db().as_bytes());
        assert_eq!(a.n(), 6);
    }

    #[test]
    fn earlier_blocks_are_stable_as_blocks_are_added() {
        // Blocks draw from per-block streams: the first block's rows of a
        // K = 2 instance coincide with the block-0 rows regenerated alone.
        let grid2 = PermutationGrid::identity(2, 2);
        let inst2 = gen_general_instance(8, Ratio64::new(1, 2), grid2, 5, 77).unwrap();
        let grid1 = PermutationGrid::identity(1, 2);
        // A K = 1 instance with the same seed has m = 2 only at d = 4.
        let inst1 = gen_general_instance(4, Ratio64::new(1, 1), grid1, 5, 77).unwrap();
        for r in 0..5 {
            // First-half block 0 bits agree row by row.
            for i in 0..2 {
                assert_eq!(inst2.db().get(r, i), inst1.db().get(r, i));
            }
        }
    }

    #[test]
    fn default_rows_per_block_matches_formula() {
        assert_eq!(default_rows_per_block(256), 267);
        assert_eq!(default_rows_per_block(2), 53); // ln(3) floor at tiny d
    }
}
