//! Sequence-form tools for two-player zero-sum extensive-form games: game
//! generators, sparse payoff matrices, greedy sparse factorization, a sparse
//! augmented-Lagrangian LP solver and a DCFR baseline.

// `!(x >= 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod alm;
pub mod bench;
pub mod cfr;
pub mod error;
pub mod eval;
pub mod factor;
pub mod game;
pub mod games;
pub mod lp;
pub mod payoff;
pub mod sparse;
pub mod trace;
pub mod treeplex;

pub use alm::{solve_lp, AlmConfig};
pub use cfr::{solve_cfr, CfrConfig, DcfrParams};
pub use error::{Error, Result};
pub use factor::{factor, FactorConfig, FactorMode, Factorization};
pub use game::{Game, GameBuilder, Player};
pub use games::GameSpec;
pub use lp::{GameLP, Orientation, StandardFormLP};
pub use payoff::{PayoffMatrix, SequenceForm};
pub use sparse::{ResidualView, SparseMatrix, SparseVec};
pub use trace::{Phase, SolveResult, SolveTrace, Termination};
pub use treeplex::{SequenceStrategy, TreePlex};
