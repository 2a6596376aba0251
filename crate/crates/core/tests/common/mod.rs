#![allow(dead_code)]

use rand::Rng;
use sparsegame::game::{Game, Player};
use sparsegame::{SequenceForm, SequenceStrategy, TreePlex};

/// Player one's equilibrium value of Kuhn poker in game units.
pub const KUHN_VALUE: f64 = -1.0 / 18.0;

/// Closed-form Kuhn equilibrium with player one's bluff parameter at zero:
/// player one never bets first and calls a bet with Q one third of the time;
/// player two bluffs J after a check and calls with Q one third of the time.
fn kuhn_behavior(player: Player, infoset: &str) -> Vec<f64> {
    let third = 1.0 / 3.0;
    match (player, infoset) {
        (Player::One, "J" | "Q" | "K") => vec![1.0, 0.0],
        (Player::One, "J|kb") => vec![1.0, 0.0],
        (Player::One, "Q|kb") => vec![1.0 - third, third],
        (Player::One, "K|kb") => vec![0.0, 1.0],
        (Player::Two, "K|k" | "K|b") => vec![0.0, 1.0],
        (Player::Two, "Q|k") => vec![1.0, 0.0],
        (Player::Two, "Q|b") => vec![1.0 - third, third],
        (Player::Two, "J|k") => vec![1.0 - third, third],
        (Player::Two, "J|b") => vec![1.0, 0.0],
        _ => panic!("unexpected Kuhn infoset {infoset} for player {player}"),
    }
}

pub fn kuhn_oracle(game: &Game, sf: &SequenceForm) -> (SequenceStrategy, SequenceStrategy) {
    let plan = |p: Player| {
        let behavior: Vec<Vec<f64>> = game.infosets(p).iter().map(|i| kuhn_behavior(p, &i.name)).collect();
        sf.treeplex(p).from_behavior(&behavior).unwrap()
    };
    (plan(Player::One), plan(Player::Two))
}

pub fn kuhn() -> (Game, SequenceForm) {
    let g = sparsegame::games::kuhn().unwrap();
    let sf = SequenceForm::from_game(&g, true).unwrap();
    (g, sf)
}

pub fn random_distribution<R: Rng>(k: usize, rng: &mut R) -> Vec<f64> {
    let w: Vec<f64> = (0..k).map(|_| rng.gen::<f64>() + 1e-3).collect();
    let t: f64 = w.iter().sum();
    w.into_iter().map(|v| v / t).collect()
}

/// A random behavior strategy, indexed by game infoset.
pub fn random_behavior<R: Rng>(tp: &TreePlex, rng: &mut R) -> Vec<Vec<f64>> {
    let mut out = vec![Vec::new(); tp.infosets().len()];
    for inf in tp.infosets() {
        out[inf.game_infoset] = random_distribution(inf.num_actions, rng);
    }
    out
}

pub fn random_plan<R: Rng>(tp: &TreePlex, rng: &mut R) -> SequenceStrategy {
    tp.from_behavior(&random_behavior(tp, rng)).unwrap()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}
