//! Best responses, Nash gap and exploitability on the sequence form.

use crate::error::{Error, Result};
use crate::game::Player;
use crate::sparse::SparseMatrix;
use crate::treeplex::{SequenceStrategy, TreePlex, FEASIBILITY_TOL};

/// `max g^T x` over the treeplex, by one bottom-up pass, together with a
/// pure maximizer.
pub fn treeplex_max(tp: &TreePlex, gradient: &[f64]) -> Result<(f64, SequenceStrategy)> {
    if gradient.len() != tp.num_sequences() {
        return Err(Error::Shape(format!(
            "gradient of length {} for {} sequences",
            gradient.len(),
            tp.num_sequences()
        )));
    }
    let mut value = gradient.to_vec();
    let mut choice = vec![0usize; tp.infosets().len()];
    for (k, inf) in tp.infosets().iter().enumerate().rev() {
        let mut best = f64::NEG_INFINITY;
        for (a, s) in inf.sequences().enumerate() {
            if value[s] > best {
                best = value[s];
                choice[k] = a;
            }
        }
        value[inf.parent] += best;
    }
    let mut x = vec![0.0; tp.num_sequences()];
    x[0] = 1.0;
    for (k, inf) in tp.infosets().iter().enumerate() {
        if x[inf.parent] > 0.0 {
            x[inf.first_seq + choice[k]] = x[inf.parent];
        }
    }
    Ok((value[0], SequenceStrategy { player: tp.player(), x }))
}

/// Gradient of the responder's utility: `A y` for player one, `-A^T x` for
/// player two.
pub fn responder_gradient(payoff: &SparseMatrix, responder: Player, opponent: &SequenceStrategy) -> Result<Vec<f64>> {
    if opponent.player != responder.opponent() {
        return Err(Error::Strategy(format!(
            "opponent strategy belongs to player {}, responder is player {}",
            opponent.player, responder
        )));
    }
    match responder {
        Player::One => payoff.mul_vec(&opponent.x),
        Player::Two => Ok(payoff.tmul_vec(&opponent.x)?.into_iter().map(|v| -v).collect()),
    }
}

/// Best-response value of the owner of `responder_tp` against `opponent`,
/// in the responder's own utility, plus a pure best response.
pub fn best_response_value(
    payoff: &SparseMatrix,
    responder_tp: &TreePlex,
    opponent: &SequenceStrategy,
) -> Result<(f64, SequenceStrategy)> {
    let g = responder_gradient(payoff, responder_tp.player(), opponent)?;
    treeplex_max(responder_tp, &g)
}

/// `x^T A y`.
pub fn expected_payoff(payoff: &SparseMatrix, x: &[f64], y: &[f64]) -> Result<f64> {
    let ay = payoff.mul_vec(y)?;
    if x.len() != ay.len() {
        return Err(Error::Shape("x does not match the rows of A".into()));
    }
    Ok(x.iter().zip(&ay).map(|(a, b)| a * b).sum())
}

/// Nash gap `BRV_1(y) + BRV_2(x) = max_x' x'^T A y - min_y' x^T A y'`.
/// Both strategies must be feasible.
pub fn nash_gap(
    payoff: &SparseMatrix,
    tp1: &TreePlex,
    tp2: &TreePlex,
    x: &SequenceStrategy,
    y: &SequenceStrategy,
) -> Result<f64> {
    tp1.check_feasible(&x.x, FEASIBILITY_TOL)?;
    tp2.check_feasible(&y.x, FEASIBILITY_TOL)?;
    let (br1, _) = best_response_value(payoff, tp1, y)?;
    let (br2, _) = best_response_value(payoff, tp2, x)?;
    Ok(br1 + br2)
}

/// Lower and upper bounds on the game value (player one's view) certified by
/// a strategy pair: `[min_y' x^T A y', max_x' x'^T A y]`.
pub fn value_bounds(
    payoff: &SparseMatrix,
    tp1: &TreePlex,
    tp2: &TreePlex,
    x: &SequenceStrategy,
    y: &SequenceStrategy,
) -> Result<(f64, f64)> {
    let (br1, _) = best_response_value(payoff, tp1, y)?;
    let (br2, _) = best_response_value(payoff, tp2, x)?;
    Ok((-br2, br1))
}

/// `BRV(strategy) - BRV(equilibrium strategy)`, where `game_value` is player
/// one's equilibrium value.
pub fn exploitability(
    payoff: &SparseMatrix,
    opponent_tp: &TreePlex,
    strategy: &SequenceStrategy,
    game_value: f64,
) -> Result<f64> {
    let (brv, _) = best_response_value(payoff, opponent_tp, strategy)?;
    let equilibrium_brv = match opponent_tp.player() {
        // player two best-responding to player one: equilibrium BRV is -v
        Player::Two => -game_value,
        Player::One => game_value,
    };
    Ok(brv - equilibrium_brv)
}
