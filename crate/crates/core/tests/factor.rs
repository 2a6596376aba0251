mod common;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sparsegame::factor::{check_block_locality, factor_rank1, upper_triangular_example};
use sparsegame::games::GameSpec;
use sparsegame::sparse::{ResidualOracle, ResidualView, SparseMatrix, SparseVec, Workspace};
use sparsegame::{factor, Error, FactorConfig, FactorMode, Factorization, SequenceForm};

fn payoff(spec: &str) -> SparseMatrix {
    let g = spec.parse::<GameSpec>().unwrap().generate().unwrap();
    SequenceForm::from_game(&g, true).unwrap().payoff.matrix
}

fn check_invariants(a: &SparseMatrix, f: &Factorization) {
    assert!(f.max_deviation(a).unwrap() <= 1e-10 * a.max_abs().max(1.0));
    assert!(f.fnnz() <= a.nnz(), "fnnz {} > nnz {}", f.fnnz(), a.nnz());
    if f.rank() > 0 {
        assert!(f.fnnz() < a.nnz());
    }
    // stored nnz never rises as terms are added
    let mut view = ResidualView::new(a, 1e-12 * a.max_abs());
    let mut ws = Workspace::new(a.nrows().max(a.ncols()));
    let mut line = Vec::new();
    let residual_nnz = |view: &ResidualView, ws: &mut Workspace, line: &mut Vec<(usize, f64)>| {
        (0..a.nrows())
            .map(|i| {
                view.residual_row_into(i, ws, line);
                line.len()
            })
            .sum::<usize>()
    };
    let mut stored = residual_nnz(&view, &mut ws, &mut line);
    for k in 0..f.rank() {
        let u = SparseVec::from_pairs(a.nrows(), f.u.col(k).unwrap().to_vec());
        let v = SparseVec::from_pairs(a.ncols(), f.v.col(k).unwrap().to_vec());
        let factor_nnz: usize = (0..=k)
            .map(|c| f.u.col(c).unwrap().len() + f.v.col(c).unwrap().len())
            .sum();
        view.install(&u, &v);
        let now = factor_nnz + residual_nnz(&view, &mut ws, &mut line);
        assert!(now < stored, "term {k} did not reduce stored nnz ({now} >= {stored})");
        stored = now;
    }
    assert_eq!(stored, f.fnnz());
}

#[test]
fn suite_games_never_get_denser() {
    for spec in [
        "kuhn",
        "leduc3",
        "leduc5",
        "goofspiel3",
        "sheriff:20:10",
        "pennies",
        "rps",
    ] {
        let a = payoff(spec);
        for seed in 0..4 {
            let explicit = factor(
                &a,
                &FactorConfig {
                    seed,
                    mode: FactorMode::Explicit,
                },
            )
            .unwrap();
            let implicit = factor(
                &a,
                &FactorConfig {
                    seed,
                    mode: FactorMode::Implicit,
                },
            )
            .unwrap();
            check_invariants(&a, &explicit);
            assert_eq!(explicit, implicit, "{spec} seed {seed}");
        }
    }
}

#[test]
fn dense_rank_one_is_removed() {
    let u = [1.0, -2.0, 3.0, 0.5];
    let v = [2.0, 1.0, -1.0, 4.0];
    let a = SparseMatrix::from_dense(&u.iter().map(|x| v.iter().map(|y| x * y).collect()).collect::<Vec<_>>());
    for seed in 0..5 {
        let f = factor(
            &a,
            &FactorConfig {
                seed,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(f.residual.nnz(), 0);
        assert_eq!(f.rank(), 1);
    }
}

#[test]
fn identity_offers_nothing_from_any_start() {
    let a = SparseMatrix::identity(4);
    let view = ResidualView::new(&a, 1e-12);
    let mut ws = Workspace::new(4);
    for start in 0..4 {
        let r = factor_rank1(&view, start, &mut ws).unwrap();
        assert_eq!(r.v.nnz(), 1);
        assert_eq!(r.reduction, 1);
    }
    assert_eq!(factor(&a, &FactorConfig::default()).unwrap().rank(), 0);
}

#[test]
fn example_one_quadrant_is_zeroed_from_some_start() {
    let a = upper_triangular_example(8);
    let view = ResidualView::new(&a, 1e-12);
    let mut ws = Workspace::new(8);
    let zeroes_quadrant = |start: usize, ws: &mut Workspace| {
        let r = factor_rank1(&view, start, ws).unwrap();
        let mut v2 = view.clone();
        v2.install(&r.u, &r.v);
        (0..4).all(|i| v2.residual_row(i).unwrap().iter().all(|&(j, _)| j < 4))
    };
    assert!((0..8).any(|s| zeroes_quadrant(s, &mut ws)));
}

#[test]
fn goofspiel_four_terminates_immediately() {
    let a = payoff("goofspiel4");
    let f = factor(&a, &FactorConfig::default()).unwrap();
    assert_eq!(f.rank(), 0);
    assert_eq!(f.fnnz(), 11_136);
}

fn block_diagonal(blocks: &[SparseMatrix]) -> (SparseMatrix, Vec<usize>, Vec<usize>) {
    let (mut t, mut rb, mut cb) = (Vec::new(), Vec::new(), Vec::new());
    let (mut r0, mut c0) = (0, 0);
    for (b, m) in blocks.iter().enumerate() {
        t.extend(m.triplets().map(|(i, j, v)| (r0 + i, c0 + j, v)));
        rb.extend(std::iter::repeat_n(b, m.nrows()));
        cb.extend(std::iter::repeat_n(b, m.ncols()));
        r0 += m.nrows();
        c0 += m.ncols();
    }
    (SparseMatrix::from_triplets(r0, c0, t).unwrap(), rb, cb)
}

#[test]
fn factors_stay_inside_blocks() {
    let ex = upper_triangular_example(32);
    for blocks in [vec![ex.clone()], vec![ex.clone(), ex]] {
        let (a, rb, cb) = block_diagonal(&blocks);
        for seed in 0..5 {
            let f = factor(
                &a,
                &FactorConfig {
                    seed,
                    ..Default::default()
                },
            )
            .unwrap();
            assert!(f.rank() > 0);
            assert_eq!(check_block_locality(&f, &rb, &cb).unwrap(), f.rank());
        }
    }
}

#[test]
fn random_rank_one_blocks_are_local_and_cancelled() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let blocks: Vec<SparseMatrix> = (0..4)
        .map(|_| {
            let u: Vec<f64> = (0..16).map(|_| rng.gen_range(1..5) as f64).collect();
            let v: Vec<f64> = (0..16).map(|_| rng.gen_range(-4..=4).max(1) as f64).collect();
            SparseMatrix::from_dense(&u.iter().map(|x| v.iter().map(|y| x * y).collect()).collect::<Vec<_>>())
        })
        .collect();
    let (a, rb, cb) = block_diagonal(&blocks);
    for seed in 0..3 {
        let f = factor(
            &a,
            &FactorConfig {
                seed,
                ..Default::default()
            },
        )
        .unwrap();
        check_block_locality(&f, &rb, &cb).unwrap();
        assert_eq!(f.residual.nnz(), 0, "seed {seed}");
    }
}

#[test]
fn locality_violation_names_the_column() {
    let a = SparseMatrix::from_dense(&vec![vec![1.0; 3]; 3]);
    let f = factor(&a, &FactorConfig::default()).unwrap();
    assert_eq!(f.rank(), 1);
    match check_block_locality(&f, &[0, 1, 1], &[0, 1, 1]) {
        Err(Error::Locality { column: 0, .. }) => {}
        other => panic!("expected a locality error, got {other:?}"),
    }
}

#[test]
fn leduc_nine_compresses_into_the_published_band() {
    let a = payoff("leduc9");
    for seed in 0..2 {
        let f = factor(
            &a,
            &FactorConfig {
                seed,
                ..Default::default()
            },
        )
        .unwrap();
        assert!((11_000..=17_000).contains(&f.fnnz()), "seed {seed}: fnnz {}", f.fnnz());
        assert_eq!(f.stats.half_step_increases, 0);
    }
}

fn structured_matrix() -> impl Strategy<Value = SparseMatrix> {
    (2usize..14, 2usize..14, 0usize..4, any::<u64>()).prop_map(|(m, n, terms, seed)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut t = Vec::new();
        for _ in 0..terms {
            let mut pick = |dim: usize, lo: i32, hi: i32| -> Vec<(usize, f64)> {
                let mut out = Vec::new();
                for i in 0..dim {
                    if rng.gen_bool(0.5) {
                        out.push((i, rng.gen_range(lo..hi) as f64));
                    }
                }
                out
            };
            let rows = pick(m, 1, 4);
            let cols = pick(n, -3, 4);
            for &(i, x) in &rows {
                t.extend(cols.iter().map(|&(j, y)| (i, j, x * y)));
            }
        }
        for _ in 0..(m * n / 4) {
            t.push((rng.gen_range(0..m), rng.gen_range(0..n), rng.gen_range(-2..3) as f64));
        }
        SparseMatrix::from_triplets(m, n, t).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn random_matrices_keep_invariants(a in structured_matrix(), seed in 0u64..1000) {
        prop_assume!(a.nnz() > 0);
        let explicit = factor(&a, &FactorConfig { seed, mode: FactorMode::Explicit }).unwrap();
        let implicit = factor(&a, &FactorConfig { seed, mode: FactorMode::Implicit }).unwrap();
        check_invariants(&a, &explicit);
        prop_assert_eq!(explicit, implicit);
    }
}
