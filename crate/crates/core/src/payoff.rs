//! Sequence-pair payoff matrix assembly.

use crate::error::{Error, Result};
use crate::game::{Game, NodeKind, Player};
use crate::sparse::SparseMatrix;
use crate::treeplex::TreePlex;

/// Player one's sequence-pair payoff matrix, `|S_1| x |S_2|`.
#[derive(Debug, Clone, PartialEq)]
pub struct PayoffMatrix {
    pub matrix: SparseMatrix,
    /// `max |A_ij|` before any normalization.
    pub scale: f64,
    /// Whether `matrix` was divided by `scale`.
    pub normalized: bool,
}

impl PayoffMatrix {
    /// Multiplier converting values computed on `matrix` back to game units.
    pub fn unit(&self) -> f64 {
        if self.normalized {
            self.scale
        } else {
            1.0
        }
    }
}

/// `A = sum_z pi_0(z) u_1(z) e_{z[1]} e_{z[2]}^T`. Contributions of leaves
/// sharing a sequence pair are summed and exact zeros are dropped. With
/// `normalize`, every entry is divided by `max |A_ij|`.
pub fn build_payoff_matrix(game: &Game, tp1: &TreePlex, tp2: &TreePlex, normalize: bool) -> Result<PayoffMatrix> {
    if tp1.player() != Player::One || tp2.player() != Player::Two {
        return Err(Error::Shape(
            "treeplexes must be given as (player one, player two)".into(),
        ));
    }
    let mut triplets = Vec::with_capacity(game.num_terminals());
    let mut stack = vec![(game.root(), 0usize, 0usize, 1.0f64)];
    while let Some((id, s1, s2, reach)) = stack.pop() {
        let node = game.node(id);
        match node.kind {
            NodeKind::Terminal { u1 } => triplets.push((s1, s2, reach * u1)),
            NodeKind::Chance => {
                for c in node.children() {
                    stack.push((c, s1, s2, reach * game.node(c).chance));
                }
            }
            NodeKind::Decision { player, infoset } => {
                for (a, c) in node.children().enumerate() {
                    match player {
                        Player::One => stack.push((c, tp1.sequence_after(infoset, a), s2, reach)),
                        Player::Two => stack.push((c, s1, tp2.sequence_after(infoset, a), reach)),
                    }
                }
            }
        }
    }
    let matrix = SparseMatrix::from_triplets(tp1.num_sequences(), tp2.num_sequences(), triplets)?;
    let scale = matrix.max_abs();
    let (matrix, normalized) = if normalize && scale > 0.0 {
        (matrix.scaled(1.0 / scale), true)
    } else {
        (matrix, false)
    };
    Ok(PayoffMatrix {
        matrix,
        scale,
        normalized,
    })
}

/// A game in sequence form: both treeplexes plus the payoff matrix.
#[derive(Debug, Clone)]
pub struct SequenceForm {
    pub tp1: TreePlex,
    pub tp2: TreePlex,
    pub payoff: PayoffMatrix,
    pub num_terminals: usize,
}

impl SequenceForm {
    /// Validates perfect recall, then builds both treeplexes and `A`.
    pub fn from_game(game: &Game, normalize: bool) -> Result<Self> {
        game.validate_perfect_recall()?;
        let tp1 = TreePlex::build(game, Player::One)?;
        let tp2 = TreePlex::build(game, Player::Two)?;
        let payoff = build_payoff_matrix(game, &tp1, &tp2, normalize)?;
        Ok(Self {
            tp1,
            tp2,
            payoff,
            num_terminals: game.num_terminals(),
        })
    }

    pub fn treeplex(&self, player: Player) -> &TreePlex {
        match player {
            Player::One => &self.tp1,
            Player::Two => &self.tp2,
        }
    }

    pub fn matrix(&self) -> &SparseMatrix {
        &self.payoff.matrix
    }

    /// `|S_1| + |S_2|`.
    pub fn total_sequences(&self) -> usize {
        self.tp1.num_sequences() + self.tp2.num_sequences()
    }
}
