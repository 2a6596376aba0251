use crate::error::Result;
use crate::game::{Game, GameBuilder, Player};

/// A zero-sum matrix game played as a two-level extensive-form game:
/// player two picks a column without seeing player one's row.
pub fn matrix_game(rows: &[&str], cols: &[&str], payoff: &[Vec<f64>]) -> Result<Game> {
    let mut b = GameBuilder::new();
    let first = b.decision(b.root(), Player::One, "row", rows)?;
    for (i, node) in first.enumerate() {
        let second = b.decision(node, Player::Two, "col", cols)?;
        for (j, leaf) in second.enumerate() {
            b.terminal(leaf, payoff[i][j])?;
        }
    }
    b.finish()
}

/// Matching pennies; player one wins 1 on a match.
pub fn matching_pennies() -> Result<Game> {
    matrix_game(&["H", "T"], &["H", "T"], &[vec![1.0, -1.0], vec![-1.0, 1.0]])
}

/// Rock-paper-scissors with unit payoffs.
pub fn rock_paper_scissors() -> Result<Game> {
    matrix_game(
        &["R", "P", "S"],
        &["R", "P", "S"],
        &[vec![0.0, -1.0, 1.0], vec![1.0, 0.0, -1.0], vec![-1.0, 1.0, 0.0]],
    )
}
