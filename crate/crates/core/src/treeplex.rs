//! Sequence-form strategy spaces (treeplexes) and conversions between
//! behavior and sequence-form strategies.

use crate::error::{Error, Result};
use crate::game::{Game, NodeKind, Player};
use crate::sparse::SparseMatrix;

/// Feasibility tolerance for `Bx = b` on reported strategies.
pub const FEASIBILITY_TOL: f64 = 1e-9;

/// One information set inside a treeplex. Its action sequences occupy
/// `first_seq..first_seq + num_actions`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TreeplexInfoset {
    pub game_infoset: usize,
    pub parent: usize,
    pub first_seq: usize,
    pub num_actions: usize,
}

impl TreeplexInfoset {
    pub fn sequences(&self) -> std::ops::Range<usize> {
        self.first_seq..self.first_seq + self.num_actions
    }
}

/// Sequence-form constraint system of one player. Sequence 0 is the empty
/// sequence; infosets are stored in topological order, so every parent
/// sequence index is smaller than the indices of its infoset's sequences.
#[derive(Debug, Clone, PartialEq)]
pub struct TreePlex {
    player: Player,
    num_sequences: usize,
    infosets: Vec<TreeplexInfoset>,
    by_game_infoset: Vec<usize>,
}

impl TreePlex {
    /// Enumerates the sequences of `player` in depth-first discovery order.
    pub fn build(game: &Game, player: Player) -> Result<Self> {
        let n_game = game.infosets(player).len();
        let mut by_game_infoset = vec![usize::MAX; n_game];
        let mut infosets: Vec<TreeplexInfoset> = Vec::with_capacity(n_game);
        let mut num_sequences = 1;

        // depth-first, children visited in action order
        let mut stack = vec![(game.root(), 0usize)];
        while let Some((id, seq)) = stack.pop() {
            let node = game.node(id);
            match node.kind {
                NodeKind::Terminal { .. } => {}
                NodeKind::Decision { player: q, infoset } if q == player => {
                    let tp_idx = match by_game_infoset[infoset] {
                        usize::MAX => {
                            let idx = infosets.len();
                            let k = node.children().len();
                            infosets.push(TreeplexInfoset {
                                game_infoset: infoset,
                                parent: seq,
                                first_seq: num_sequences,
                                num_actions: k,
                            });
                            num_sequences += k;
                            by_game_infoset[infoset] = idx;
                            idx
                        }
                        idx => {
                            if infosets[idx].parent != seq {
                                return Err(Error::PerfectRecall {
                                    player: player.number(),
                                    infoset: game.infosets(player)[infoset].name.clone(),
                                    path_a: String::from("(earlier visit)"),
                                    path_b: game.path(id),
                                });
                            }
                            idx
                        }
                    };
                    let first = infosets[tp_idx].first_seq;
                    for (a, c) in node.children().enumerate().rev() {
                        stack.push((c, first + a));
                    }
                }
                _ => {
                    for c in node.children().rev() {
                        stack.push((c, seq));
                    }
                }
            }
        }
        if by_game_infoset.contains(&usize::MAX) {
            return Err(Error::Structure(format!(
                "player {} has unreachable infosets",
                player.number()
            )));
        }
        Ok(Self {
            player,
            num_sequences,
            infosets,
            by_game_infoset,
        })
    }

    /// Builds a treeplex directly from `(parent sequence, action count)` pairs
    /// listed in topological order.
    pub fn from_parents(player: Player, parents: &[(usize, usize)]) -> Result<Self> {
        let mut num_sequences = 1;
        let mut infosets = Vec::with_capacity(parents.len());
        for (idx, &(parent, k)) in parents.iter().enumerate() {
            if parent >= num_sequences || k == 0 {
                return Err(Error::Structure(format!(
                    "infoset {idx}: parent sequence {parent} not yet defined or no actions"
                )));
            }
            infosets.push(TreeplexInfoset {
                game_infoset: idx,
                parent,
                first_seq: num_sequences,
                num_actions: k,
            });
            num_sequences += k;
        }
        Ok(Self {
            player,
            num_sequences,
            by_game_infoset: (0..infosets.len()).collect(),
            infosets,
        })
    }

    pub fn player(&self) -> Player {
        self.player
    }

    pub fn num_sequences(&self) -> usize {
        self.num_sequences
    }

    pub fn infosets(&self) -> &[TreeplexInfoset] {
        &self.infosets
    }

    /// Treeplex position of a game infoset of this player.
    pub fn infoset_of(&self, game_infoset: usize) -> &TreeplexInfoset {
        &self.infosets[self.by_game_infoset[game_infoset]]
    }

    /// Sequence reached by taking action `action` at game infoset `game_infoset`.
    pub fn sequence_after(&self, game_infoset: usize, action: usize) -> usize {
        self.infoset_of(game_infoset).first_seq + action
    }

    /// Number of rows of `B`: the root row plus one per infoset.
    pub fn num_constraints(&self) -> usize {
        self.infosets.len() + 1
    }

    /// `B` with row 0 pinning the empty sequence and one row
    /// `-x[parent] + sum x[children] = 0` per infoset.
    pub fn constraint_matrix(&self) -> SparseMatrix {
        let mut trip = vec![(0, 0, 1.0)];
        for (k, inf) in self.infosets.iter().enumerate() {
            trip.push((k + 1, inf.parent, -1.0));
            for s in inf.sequences() {
                trip.push((k + 1, s, 1.0));
            }
        }
        SparseMatrix::from_triplets(self.num_constraints(), self.num_sequences, trip)
            .expect("treeplex constraint indices are in range")
    }

    /// `b = e_0`.
    pub fn constraint_rhs(&self) -> Vec<f64> {
        let mut b = vec![0.0; self.num_constraints()];
        b[0] = 1.0;
        b
    }

    /// Max-abs violation of `Bx = b`.
    pub fn constraint_violation(&self, x: &[f64]) -> f64 {
        let mut worst = (x[0] - 1.0).abs();
        for inf in &self.infosets {
            let s: f64 = x[inf.sequences()].iter().sum();
            worst = worst.max((s - x[inf.parent]).abs());
        }
        worst
    }

    pub fn check_feasible(&self, x: &[f64], tol: f64) -> Result<()> {
        if x.len() != self.num_sequences {
            return Err(Error::Shape(format!(
                "strategy of length {} for a treeplex with {} sequences",
                x.len(),
                self.num_sequences
            )));
        }
        if let Some(v) = x.iter().find(|v| !(**v >= -tol)) {
            return Err(Error::Strategy(format!("negative or NaN entry {v}")));
        }
        let viol = self.constraint_violation(x);
        if viol > tol {
            return Err(Error::Strategy(format!("Bx = b violated by {viol:e}")));
        }
        Ok(())
    }

    /// Projects `raw` onto the nonnegative orthant, pins the empty sequence to
    /// one, then rescales each infoset in topological order so its sequences
    /// sum to the parent's value. An infoset with no remaining mass gets the
    /// uniform split.
    pub fn normalize(&self, raw: &[f64]) -> Result<SequenceStrategy> {
        if raw.len() != self.num_sequences {
            return Err(Error::Shape(format!(
                "raw vector of length {} for a treeplex with {} sequences",
                raw.len(),
                self.num_sequences
            )));
        }
        let mut x: Vec<f64> = raw.iter().map(|v| if *v > 0.0 { *v } else { 0.0 }).collect();
        x[0] = 1.0;
        for inf in &self.infosets {
            let parent = x[inf.parent];
            let range = inf.sequences();
            let mass: f64 = x[range.clone()].iter().sum();
            if mass > 0.0 && mass.is_finite() {
                let f = parent / mass;
                x[range].iter_mut().for_each(|v| *v *= f);
            } else {
                let share = parent / inf.num_actions as f64;
                x[range].iter_mut().for_each(|v| *v = share);
            }
        }
        Ok(SequenceStrategy { player: self.player, x })
    }

    /// Uniform behavior strategy in sequence form.
    pub fn uniform(&self) -> SequenceStrategy {
        self.normalize(&vec![0.0; self.num_sequences]).expect("length matches")
    }

    /// Sequence form of a behavior strategy given per game infoset.
    pub fn from_behavior(&self, behavior: &[Vec<f64>]) -> Result<SequenceStrategy> {
        if behavior.len() != self.infosets.len() {
            return Err(Error::Shape(format!(
                "behavior strategy covers {} infosets, player has {}",
                behavior.len(),
                self.infosets.len()
            )));
        }
        let mut x = vec![0.0; self.num_sequences];
        x[0] = 1.0;
        for inf in &self.infosets {
            let dist = &behavior[inf.game_infoset];
            if dist.len() != inf.num_actions {
                return Err(Error::Shape(format!(
                    "infoset {} has {} actions, distribution has {}",
                    inf.game_infoset,
                    inf.num_actions,
                    dist.len()
                )));
            }
            let total: f64 = dist.iter().sum();
            if dist.iter().any(|p| !(*p >= 0.0)) || (total - 1.0).abs() > FEASIBILITY_TOL {
                return Err(Error::Strategy(format!(
                    "distribution at infoset {} is not a probability vector (sum {total})",
                    inf.game_infoset
                )));
            }
            for (s, p) in inf.sequences().zip(dist) {
                x[s] = x[inf.parent] * p;
            }
        }
        Ok(SequenceStrategy { player: self.player, x })
    }

    /// Behavior strategy per game infoset; unreached infosets get uniform play.
    pub fn to_behavior(&self, strategy: &SequenceStrategy) -> Vec<Vec<f64>> {
        let mut out = vec![Vec::new(); self.infosets.len()];
        for inf in &self.infosets {
            let parent = strategy.x[inf.parent];
            out[inf.game_infoset] = if parent > 0.0 {
                inf.sequences().map(|s| strategy.x[s] / parent).collect()
            } else {
                vec![1.0 / inf.num_actions as f64; inf.num_actions]
            };
        }
        out
    }
}

/// Sequence-form (realization plan) strategy of one player.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceStrategy {
    pub player: Player,
    pub x: Vec<f64>,
}

impl SequenceStrategy {
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }
}
