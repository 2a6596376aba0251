mod common;

use common::max_abs_diff;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sparsegame::games::leduc;
use sparsegame::sparse::{matvec_factored, ResidualOracle, ResidualView, SparseMatrix, SparseVec};
use sparsegame::{factor, Error, FactorConfig, SequenceForm};

fn random_sparse(rng: &mut ChaCha8Rng, m: usize, n: usize, density: f64) -> SparseMatrix {
    let mut t = Vec::new();
    for i in 0..m {
        for j in 0..n {
            if rng.gen::<f64>() < density {
                t.push((i, j, rng.gen_range(-3i32..=3) as f64));
            }
        }
    }
    SparseMatrix::from_triplets(m, n, t).unwrap()
}

fn random_vec(rng: &mut ChaCha8Rng, dim: usize, k: usize) -> SparseVec {
    let pairs = (0..k)
        .map(|_| (rng.gen_range(0..dim), rng.gen_range(-2.0..2.0)))
        .collect();
    SparseVec::from_pairs(dim, pairs)
}

#[test]
fn identity_rows() {
    let i3 = SparseMatrix::identity(3);
    assert_eq!(i3.row(1).unwrap().to_vec(), vec![(1, 1.0)]);
    assert_eq!(i3.col(2).unwrap().to_vec(), vec![(2, 1.0)]);
    assert!(matches!(i3.row(3), Err(Error::OutOfRange { index: 3, len: 3 })));
    assert!(i3.col(7).is_err());
}

#[test]
fn cancelling_duplicates_are_dropped() {
    let m = SparseMatrix::from_triplets(2, 2, [(0, 0, 1.0), (0, 1, 2.0), (0, 0, -1.0)]).unwrap();
    assert_eq!(m.row(0).unwrap().to_vec(), vec![(1, 2.0)]);
    assert_eq!(m.nnz(), 1);
}

#[test]
fn rows_and_columns_describe_the_same_matrix() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20 {
        let m = random_sparse(&mut rng, 15, 11, 0.3);
        let mut from_rows: Vec<_> = (0..15)
            .flat_map(|i| m.row(i).unwrap().to_vec().into_iter().map(move |(j, v)| (i, j, v)))
            .collect();
        let mut from_cols: Vec<_> = (0..11)
            .flat_map(|j| m.col(j).unwrap().to_vec().into_iter().map(move |(i, v)| (i, j, v)))
            .collect();
        from_rows.sort_by_key(|a| (a.0, a.1));
        from_cols.sort_by_key(|a| (a.0, a.1));
        assert_eq!(from_rows, from_cols);
        for i in 0..15 {
            let r = m.row(i).unwrap().to_vec();
            assert!(r.windows(2).all(|w| w[0].0 < w[1].0));
            assert!(r.iter().all(|e| e.1 != 0.0));
        }
    }
}

#[test]
fn leduc_row_lengths_sum_to_nnz() {
    let sf = SequenceForm::from_game(&leduc(9).unwrap(), true).unwrap();
    let a = sf.matrix();
    let total: usize = (0..a.nrows()).map(|i| a.row(i).unwrap().len()).sum();
    assert_eq!(total, 30_924);
}

#[test]
fn empty_view_returns_base_rows() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let a = random_sparse(&mut rng, 10, 12, 0.4);
    let view = ResidualView::new(&a, 1e-12);
    for i in 0..10 {
        assert_eq!(view.residual_row(i).unwrap(), a.row(i).unwrap().to_vec());
    }
    assert!(view.residual_row(10).is_err());
}

#[test]
fn installed_outer_product_cancels_exactly() {
    let u = SparseVec::from_pairs(4, vec![(0, 2.0), (2, -1.0), (3, 0.5)]);
    let v = SparseVec::from_pairs(5, vec![(1, 4.0), (4, -3.0)]);
    let t: Vec<_> = u
        .iter()
        .flat_map(|(i, x)| v.iter().map(move |(j, y)| (i, j, x * y)))
        .collect();
    let a = SparseMatrix::from_triplets(4, 5, t).unwrap();
    let mut view = ResidualView::new(&a, 1e-12);
    view.install(&u, &v);
    for i in 0..4 {
        assert!(view.residual_row(i).unwrap().is_empty());
    }
    for j in 0..5 {
        assert!(view.residual_col(j).unwrap().is_empty());
    }
}

#[test]
fn residual_matches_dense_computation() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..10 {
        let a = random_sparse(&mut rng, 20, 20, 0.3);
        let before = a.clone();
        let mut view = ResidualView::new(&a, 1e-12);
        let mut dense = a.to_dense();
        for _ in 0..3 {
            let u = random_vec(&mut rng, 20, 5);
            let v = random_vec(&mut rng, 20, 5);
            for (i, x) in u.iter() {
                for (j, y) in v.iter() {
                    dense[i][j] -= x * y;
                }
            }
            view.install(&u, &v);
        }
        for (i, want) in dense.iter().enumerate() {
            let mut row = vec![0.0; 20];
            for (j, v) in view.residual_row(i).unwrap() {
                row[j] = v;
            }
            assert!(max_abs_diff(&row, want) <= 1e-12);
        }
        for j in 0..20 {
            for (i, v) in view.residual_col(j).unwrap() {
                assert!((v - dense[i][j]).abs() <= 1e-12);
            }
        }
        assert_eq!(view.base(), &before);
    }
}

#[test]
fn factored_matvec_basics() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let a = random_sparse(&mut rng, 8, 6, 0.5);
    let none = SparseMatrix::zeros(8, 0);
    let none_v = SparseMatrix::zeros(6, 0);
    let x: Vec<f64> = (0..8).map(|_| rng.gen_range(-1.0..1.0)).collect();
    assert_eq!(
        matvec_factored(&a, &none, &none_v, &x).unwrap(),
        a.tmul_vec(&x).unwrap()
    );

    let u = random_sparse(&mut rng, 8, 2, 0.5);
    let v = random_sparse(&mut rng, 6, 2, 0.5);
    let full = {
        let ud = u.to_dense();
        let vd = v.to_dense();
        let mut d = a.to_dense();
        for i in 0..8 {
            for j in 0..6 {
                d[i][j] += (0..2).map(|k| ud[i][k] * vd[j][k]).sum::<f64>();
            }
        }
        d
    };
    for i in 0..8 {
        let mut e = vec![0.0; 8];
        e[i] = 1.0;
        let out = matvec_factored(&a, &u, &v, &e).unwrap();
        assert!(max_abs_diff(&out, &full[i]) <= 1e-14);
    }
    assert!(matvec_factored(&a, &v, &u, &x).is_err());
}

#[test]
fn factored_matvec_on_leduc() {
    let sf = SequenceForm::from_game(&leduc(9).unwrap(), true).unwrap();
    let a = sf.matrix();
    let f = factor(a, &FactorConfig::default()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..50 {
        let x: Vec<f64> = (0..a.nrows()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let norm1: f64 = x.iter().map(|v| v.abs()).sum();
        let got = matvec_factored(&f.residual, &f.u, &f.v, &x).unwrap();
        assert!(max_abs_diff(&got, &a.tmul_vec(&x).unwrap()) <= 1e-10 * a.max_abs() * norm1);
    }
}

#[test]
fn triplet_text_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let a = random_sparse(&mut rng, 7, 9, 0.3);
    let mut buf = Vec::new();
    a.write_triplets(&mut buf).unwrap();
    assert!(String::from_utf8_lossy(&buf).starts_with(&format!("7 9 {}\n", a.nnz())));
    assert_eq!(SparseMatrix::read_triplets(&buf[..]).unwrap(), a);
}
