//! Acceptance suite: one test per release criterion, each printing a
//! PASS line with the measured numbers (run with `-- --nocapture` to see
//! them). Every tolerance is pinned in code; trials are seeded and
//! deterministic.

use num_bigint::BigUint;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ifi_cli::{cmd_gen, run_experiment, ExperimentConfig, GenOptions};
use ifi_core::dataset::{Database, Itemset, Row};
use ifi_core::lowerbound::{
    count_matched_cooccurrences, decode_const, decode_general, default_rows_per_block,
    entropy_bits, gen_const_instance, gen_general_instance, generate_instance, make_row_const,
    theoretical_co_occurrence_probability, verify_gap, Permutation, PermutationGrid, Subset,
};
use ifi_core::sketch::{
    build_exact_pairs, build_sampling, IndicatorAnswer, SketchKind, SketchParams,
};
use ifi_core::Ratio64;

fn pass(criterion: usize, name: &str, detail: impl std::fmt::Display) {
    println!("acceptance criterion {criterion} ({name}): PASS - {detail}");
}

fn lemma_config(trials: usize) -> ExperimentConfig {
    ExperimentConfig::new(
        256,
        Ratio64::new(1, 1),
        Some(288),
        0,
        trials,
        SketchKind::ExactPairs,
        Some(Ratio64::new(1, 8)),
    )
    .unwrap()
}

fn theorem_config(trials: usize) -> ExperimentConfig {
    ExperimentConfig::new(
        64,
        Ratio64::new(1, 4),
        Some(200),
        0,
        trials,
        SketchKind::ExactPairs,
        Some(Ratio64::new(1, 32)),
    )
    .unwrap()
}

/// Criterion 1: single-permutation pipeline at d = 256 with the 1/8
/// indicator sketch. Gap passes in at least 99 of 100 seeded trials and
/// every passing trial decodes the permutation exactly.
#[test]
fn criterion_1_lemma_pipeline() {
    // The default row count would be 267; the pinned run uses 288.
    assert_eq!(default_rows_per_block(256), 267);

    let config = lemma_config(100);
    let (records, summary) = run_experiment(&config).unwrap();

    // Audit structure spot-check on the first trial: 128 matched pairs
    // and 2*C(128,2) + 128*127 = 32512 unmatched pairs at threshold 1/8.
    let grid = PermutationGrid::random_from_seed(config.trial_seed(0), 1, 128);
    let inst = generate_instance(256, config.epsilon, grid, 288, config.trial_seed(0)).unwrap();
    let report = verify_gap(&inst);
    assert_eq!(report.matched_pairs, 128);
    assert_eq!(report.unmatched_pairs, 32512);
    assert_eq!(report.threshold, Ratio64::new(1, 8));

    let gap_passes = summary.gap_passes;
    assert!(gap_passes >= 99, "gap passed only {gap_passes}/100 trials");
    for r in &records {
        if r.gap_pass {
            assert!(
                r.decode_ok,
                "trial {} passed the gap but failed decode",
                r.trial
            );
            assert_eq!(
                r.queries,
                128 * 128,
                "trial {} issued {} queries",
                r.trial,
                r.queries
            );
        }
        assert_eq!(r.sketch_bits, 32640); // C(256, 2)
    }
    pass(
        1,
        "lemma pipeline",
        format!(
            "gap {gap_passes}/100, conditional recovery {}/{gap_passes}",
            summary.decodes_ok
        ),
    );
}

/// Criterion 2: 16-permutation pipeline at d = 64, eps = 1/4, decoded
/// through the exact sketch at eps = 1/32. Gap rate >= 95%, conditional
/// recovery 100%.
#[test]
fn criterion_2_theorem_pipeline() {
    let config = theorem_config(100);
    let (records, summary) = run_experiment(&config).unwrap();

    let grid = PermutationGrid::random_from_seed(config.trial_seed(0), 4, 8);
    assert_eq!(grid.iter().count(), 16);
    let inst = generate_instance(64, config.epsilon, grid, 200, config.trial_seed(0)).unwrap();
    let report = verify_gap(&inst);
    assert_eq!(report.matched_pairs, 16 * 8);
    assert_eq!(report.unmatched_pairs, 32 * 32 - 16 * 8);
    assert_eq!(report.threshold, Ratio64::new(1, 32));

    let gap_passes = summary.gap_passes;
    assert!(gap_passes >= 95, "gap passed only {gap_passes}/100 trials");
    for r in &records {
        if r.gap_pass {
            assert!(
                r.decode_ok,
                "trial {} passed the gap but failed decode",
                r.trial
            );
            assert_eq!(r.queries, 16 * 64);
        }
        assert_eq!(r.sketch_bits, 2016); // C(64, 2)
    }
    pass(
        2,
        "theorem pipeline",
        format!(
            "gap {gap_passes}/100, conditional recovery {}/{gap_passes}",
            summary.decodes_ok
        ),
    );
}

/// Criterion 3: in every instance generated by criteria 1 and 2, no row
/// ever contains both columns of a matched pair.
#[test]
fn criterion_3_structural_zero() {
    let mut rows_scanned = 0u64;
    let lemma = lemma_config(100);
    for trial in 0..lemma.trials {
        let seed = lemma.trial_seed(trial);
        let grid = PermutationGrid::random_from_seed(seed, 1, 128);
        let inst = generate_instance(256, lemma.epsilon, grid, 288, seed).unwrap();
        assert_eq!(
            count_matched_cooccurrences(&inst),
            0,
            "trial {trial} (d = 256)"
        );
        rows_scanned += inst.db().n() as u64;
    }
    let theorem = theorem_config(100);
    for trial in 0..theorem.trials {
        let seed = theorem.trial_seed(trial);
        let grid = PermutationGrid::random_from_seed(seed, 4, 8);
        let inst = generate_instance(64, theorem.epsilon, grid, 200, seed).unwrap();
        assert_eq!(
            count_matched_cooccurrences(&inst),
            0,
            "trial {trial} (d = 64)"
        );
        rows_scanned += inst.db().n() as u64;
    }
    pass(
        3,
        "structural zero",
        format!("0 violations across {rows_scanned} rows x matched pairs"),
    );
}

/// Criterion 4: the per-row co-occurrence rate of a fixed unmatched pair
/// over 10^5 random subsets lands in [0.24, 0.26].
#[test]
fn criterion_4_co_occurrence_rate() {
    assert_eq!(theoretical_co_occurrence_probability(), Ratio64::new(1, 4));
    let m = 16;
    let pi = Permutation::identity(m);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let samples = 100_000;
    let mut hits = 0u64;
    for _ in 0..samples {
        let s = Subset::random(m, &mut rng);
        let row = make_row_const(&s, &pi);
        // Unmatched pair {0, m + 1}: pi(0) = 0, so second-half index 1
        // belongs to a different preimage.
        if row.get(0) && row.get(m + 1) {
            hits += 1;
        }
    }
    let rate = hits as f64 / samples as f64;
    assert!(
        (0.24..=0.26).contains(&rate),
        "empirical rate {rate} outside [0.24, 0.26]"
    );
    pass(
        4,
        "co-occurrence rate",
        format!("measured {rate:.4} vs 1/4"),
    );
}

fn random_database(d: usize, n: usize, rng: &mut ChaCha8Rng) -> Database {
    let rows: Vec<Row> = (0..n)
        .map(|_| {
            let mut row = Row::zeros(d);
            for j in 0..d {
                if rng.next_u32() & 1 == 1 {
                    row.set(j);
                }
            }
            row
        })
        .collect();
    Database::from_rows(d, &rows).unwrap()
}

/// Criterion 5: on 50 random databases the exact sketch equals brute
/// force thresholding on all 120 pairs, and the sampling sketch violates
/// the promise in at most 25% of builds.
#[test]
fn criterion_5_oracle_equivalence() {
    let d = 16;
    let eps = Ratio64::new(1, 4);
    let half_eps = eps / Ratio64::new(2, 1);
    let params = SketchParams::new(eps, 2, d).unwrap();

    let mut exact_mismatches = 0u64;
    let mut sampling_violating_builds = 0u64;
    let builds = 50;
    for seed in 0..builds {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5EED_0000 + seed);
        let n = 1 + rng.random_range(0..256usize);
        let db = random_database(d, n, &mut rng);

        let exact = build_exact_pairs(&db, &params).unwrap();
        let sampling = build_sampling(&db, &params, seed).unwrap();
        let mut sampling_violated = false;
        for a in 0..d {
            for b in (a + 1)..d {
                let t = Itemset::pair(a, b);
                let f = db.frequency(&t).unwrap();

                // Exact sketch: stored answer must equal thresholding the
                // oracle frequency at eps/2, on every pair.
                let expected = if f > half_eps {
                    IndicatorAnswer::Yes
                } else {
                    IndicatorAnswer::No
                };
                if exact.query_exact(&t).unwrap() != expected {
                    exact_mismatches += 1;
                }

                // Sampling sketch: a wrong answer outside the gap is a
                // promise violation for this build.
                let answer = sampling.query_sampling(&t).unwrap();
                if (f >= eps && answer == IndicatorAnswer::No)
                    || (f <= half_eps && answer == IndicatorAnswer::Yes)
                {
                    sampling_violated = true;
                }
            }
        }
        if sampling_violated {
            sampling_violating_builds += 1;
        }
    }
    assert_eq!(exact_mismatches, 0);
    assert!(
        4 * sampling_violating_builds <= builds,
        "sampling violated the promise in {sampling_violating_builds}/{builds} builds"
    );
    pass(
        5,
        "oracle equivalence",
        format!(
            "exact mismatches 0/6000, sampling violations {sampling_violating_builds}/{builds}"
        ),
    );
}

fn log2_biguint(x: &BigUint) -> f64 {
    let digits = x.to_u64_digits();
    match digits.len() {
        0 => f64::NEG_INFINITY,
        1 => (digits[0] as f64).log2(),
        _ => {
            let top = digits[digits.len() - 1] as f64;
            let next = digits[digits.len() - 2] as f64;
            (top + next / (u64::MAX as f64 + 1.0)).log2() + 64.0 * (digits.len() - 1) as f64
        }
    }
}

fn factorial(m: u64) -> BigUint {
    (1..=m).map(BigUint::from).product()
}

/// Criterion 6: entropy accounting agrees with the big-integer oracle and
/// the reported sketch size dominates the entropy on every passing trial
/// at d = 64, eps = 1/4.
#[test]
fn criterion_6_entropy_accounting() {
    // entropy(16, 1/2) = 4 log2(4!) to 1e-9 relative error.
    let got = entropy_bits(16, Ratio64::new(1, 2)).unwrap();
    let oracle = 4.0 * log2_biguint(&factorial(4));
    assert!(((got - oracle) / oracle).abs() <= 1e-9, "{got} vs {oracle}");

    // entropy(2m, 1) = log2(m!) for all m <= 20.
    for m in 1..=20u64 {
        let got = entropy_bits(2 * m as usize, Ratio64::new(1, 1)).unwrap();
        let oracle = log2_biguint(&factorial(m));
        let close = if oracle == 0.0 {
            got.abs() <= 1e-9
        } else {
            ((got - oracle) / oracle).abs() <= 1e-9
        };
        assert!(close, "m = {m}: {got} vs {oracle}");
    }

    // d = 64, eps = 1/4: the summary reports about 244.8 encoded bits
    // next to the 2016-bit exact sketch, and size dominates entropy on
    // every passing trial.
    let config = theorem_config(20);
    let (records, summary) = run_experiment(&config).unwrap();
    let expected_entropy = 16.0 * log2_biguint(&factorial(8));
    assert!(((summary.entropy_bits - expected_entropy) / expected_entropy).abs() <= 1e-9);
    assert!((summary.entropy_bits - 244.8).abs() < 0.05);
    for r in records.iter().filter(|r| r.gap_pass) {
        assert_eq!(r.sketch_bits, 2016);
        assert!(
            r.sketch_bits as f64 >= r.entropy_bits,
            "trial {}: sketch {} bits < entropy {}",
            r.trial,
            r.sketch_bits,
            r.entropy_bits
        );
    }
    pass(
        6,
        "entropy accounting",
        format!(
            "entropy {:.3} bits <= sketch {} bits on all passing trials",
            summary.entropy_bits, 2016
        ),
    );
}

/// Criterion 7: at eps = 1 the general generator and decoder coincide
/// with the single-block ones, byte for byte, at d in {4, 8, 16}.
#[test]
fn criterion_7_single_block_reduction() {
    let mut checked = 0;
    for d in [4usize, 8, 16] {
        let m = d / 2;
        for seed in 0..3u64 {
            let grid = PermutationGrid::random_from_seed(seed, 1, m);
            let n = 64;
            let const_inst = gen_const_instance(d, grid.get(0, 0), n, seed).unwrap();
            let general_inst =
                gen_general_instance(d, Ratio64::new(1, 1), grid.clone(), n, seed).unwrap();
            assert_eq!(
                const_inst.db().as_bytes(),
                general_inst.db().as_bytes(),
                "d = {d}, seed = {seed}"
            );

            let params = SketchParams::new(Ratio64::new(1, 8), 2, d).unwrap();
            let blob = build_exact_pairs(const_inst.db(), &params).unwrap();
            match (
                decode_const(&blob, d),
                decode_general(&blob, d, Ratio64::new(1, 1)),
            ) {
                (Ok(pi), Ok(grid_back)) => {
                    assert_eq!(grid_back.get(0, 0), &pi, "d = {d}, seed = {seed}");
                }
                (Err(_), Err(_)) => {}
                (a, b) => panic!(
                    "decoders disagree at d = {d}, seed = {seed}: const ok = {}, general ok = {}",
                    a.is_ok(),
                    b.is_ok()
                ),
            }
            checked += 1;
        }
    }
    pass(
        7,
        "single-block reduction",
        format!("{checked} (d, seed) combinations byte-identical"),
    );
}

/// Criterion 8: `gen` is deterministic (identical files on rerun) and the
/// database format round-trips bit-exactly on 1000 random databases.
#[test]
fn criterion_8_determinism_and_formats() {
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    for out in [dir_a.path(), dir_b.path()] {
        cmd_gen(&GenOptions {
            d: 64,
            epsilon: Ratio64::new(1, 4),
            rows_per_block: None,
            seed: 2,
            out: out.to_path_buf(),
        })
        .unwrap();
    }
    for file in ["instance.manifest", "instance.ifdb"] {
        let a = std::fs::read(dir_a.path().join(file)).unwrap();
        let b = std::fs::read(dir_b.path().join(file)).unwrap();
        assert_eq!(a, b, "{file} differs between identical runs");
        assert!(!a.is_empty());
    }
    // Rerunning into the same directory rewrites identical bytes.
    let before = std::fs::read(dir_a.path().join("instance.ifdb")).unwrap();
    cmd_gen(&GenOptions {
        d: 64,
        epsilon: Ratio64::new(1, 4),
        rows_per_block: None,
        seed: 2,
        out: dir_a.path().to_path_buf(),
    })
    .unwrap();
    let after = std::fs::read(dir_a.path().join("instance.ifdb")).unwrap();
    assert_eq!(before, after);

    let mut rng = ChaCha8Rng::seed_from_u64(88);
    for _ in 0..1000 {
        let d = 2 + rng.random_range(0..63usize);
        let n = 1 + rng.random_range(0..64usize);
        let db = random_database(d, n, &mut rng);
        let mut buf = Vec::new();
        db.write_to(&mut buf).unwrap();
        let back = Database::read_from(&mut buf.as_slice()).unwrap();
        assert_eq!(db, back);
    }
    pass(
        8,
        "determinism and formats",
        "gen twice byte-identical; 1000/1000 database round-trips bit-exact",
    );
}
