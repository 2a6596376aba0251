mod common;

use sparsegame::eval::value_bounds;
use sparsegame::game::{Game, NodeKind};
use sparsegame::games::{goofspiel, leduc, load_game_file, save_game_file, sheriff, GameSpec};
use sparsegame::{solve_cfr, CfrConfig, SequenceForm, SolveTrace};

fn counts(game: &Game) -> (usize, usize) {
    let sf = SequenceForm::from_game(game, false).unwrap();
    (sf.total_sequences(), sf.matrix().nnz())
}

fn leaf_at(game: &Game, path: &str) -> f64 {
    for (id, n) in game.nodes().iter().enumerate() {
        if let NodeKind::Terminal { u1 } = n.kind {
            if game.path(id) == path {
                return u1;
            }
        }
    }
    panic!("no leaf at {path}");
}

#[test]
fn leduc_counts_match_the_table() {
    assert_eq!(counts(&leduc(9).unwrap()), (5_798, 30_924));
    assert_eq!(counts(&leduc(13).unwrap()), (12_014, 95_056));
}

#[test]
fn leduc_needs_three_ranks() {
    assert!(leduc(2).is_err());
    let g = leduc(3).unwrap();
    g.validate_perfect_recall().unwrap();
    g.check_utilities().unwrap();
}

#[test]
fn sheriff_counts_match_the_table() {
    assert_eq!(counts(&sheriff(1000, 1000).unwrap()), (1_005_006, 2_003_501));
    assert_eq!(counts(&sheriff(10_000, 100).unwrap()), (1_020_306, 2_020_101));
}

#[test]
fn sheriff_payoffs() {
    let g = sheriff(1, 1).unwrap();
    assert_eq!(leaf_at(&g, "n1/b0/inspect"), -2.0);
    assert_eq!(leaf_at(&g, "n1/b1/inspect"), -2.0);
    assert_eq!(leaf_at(&g, "n0/b1/inspect"), 3.0);
    assert!(sheriff(0, 1).is_err());
}

#[test]
fn goofspiel_four_counts() {
    let (seqs, nnz) = counts(&goofspiel(4).unwrap());
    assert_eq!(nnz, 11_136);
    // the sequence count is within the documented 5% calibration band
    let rel = (seqs as f64 - 42_478.0).abs() / 42_478.0;
    assert!(rel < 0.05, "{seqs} sequences");
}

#[test]
fn small_goofspiel_is_valid_and_fair() {
    let g2 = goofspiel(2).unwrap();
    g2.validate_perfect_recall().unwrap();
    assert!(goofspiel(1).is_err());

    let sf = SequenceForm::from_game(&goofspiel(3).unwrap(), true).unwrap();
    let config = CfrConfig {
        gap_target: 1e-3,
        ..Default::default()
    };
    let r = solve_cfr(&sf, &config, None, SolveTrace::start()).unwrap();
    let (lo, hi) = value_bounds(sf.matrix(), &sf.tp1, &sf.tp2, &r.x, &r.y).unwrap();
    assert!(lo <= 1e-12 && hi >= -1e-12, "value bracket [{lo}, {hi}] misses 0");
}

#[test]
fn file_round_trip_through_disk() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("leduc3.game");
    let g = leduc(3).unwrap();
    save_game_file(&g, &path).unwrap();
    let h = load_game_file(&path).unwrap();
    let a = SequenceForm::from_game(&g, false).unwrap();
    let b = SequenceForm::from_game(&h, false).unwrap();
    assert_eq!(a.total_sequences(), b.total_sequences());
    assert_eq!(a.matrix(), b.matrix());
    let spec: GameSpec = format!("file:{}", path.display()).parse().unwrap();
    assert_eq!(counts(&spec.generate().unwrap()), counts(&g));
}

#[test]
fn missing_file_is_an_io_error() {
    let err = load_game_file("/nonexistent/game.txt").unwrap_err();
    assert!(matches!(err, sparsegame::Error::Io(_)), "{err}");
}
