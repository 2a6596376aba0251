//! Augmented Lagrangian solver for `min c^T x` s.t. `A x <= b`, `x >= 0`.
//!
//! Each outer iteration approximately minimizes
//!
//! ```text
//! c^T x + (η/2) ‖A x - b + z + ŷ/η‖²   over x, z >= 0
//! ```
//!
//! by randomized-permutation coordinate descent, then sets
//! `ŷ <- max(0, ŷ + η (A x - b + z))`. The number of coordinate passes grows
//! linearly with the outer iteration count.

use std::time::Duration;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::eval::{expected_payoff, nash_gap};
use crate::factor::Factorization;
use crate::lp::{default_orientation, to_standard_form, Label, Orientation, StandardFormLP};
use crate::payoff::SequenceForm;
use crate::trace::{Phase, SolveResult, SolveTrace, Termination};
use crate::treeplex::SequenceStrategy;

/// Penalties above this are treated as divergence.
pub const ETA_MAX: f64 = 1e12;

/// Infeasibility at or below this never triggers a penalty increase.
pub const FEASIBLE_ENOUGH: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct AlmConfig {
    pub eta0: f64,
    pub eta_growth: f64,
    /// Coordinate passes in the first outer iteration.
    pub inner_t0: u64,
    /// Extra passes per outer iteration.
    pub inner_step: u64,
    pub gap_target: f64,
    pub time_limit: Option<Duration>,
    pub max_outer: u64,
    pub seed: u64,
    /// `None` picks the player with fewer sequences as the primal player.
    pub orientation: Option<Orientation>,
    /// Also solve the other orientation and take each player's plan from the
    /// run where it is the primal iterate.
    pub certify_dual: bool,
    /// Outer iterations allowed for infeasibility to halve before `η` grows.
    pub escalation_patience: u64,
    /// Divide each LP row by its norm before solving.
    pub row_scaling: bool,
}

impl Default for AlmConfig {
    fn default() -> Self {
        Self {
            eta0: 1.0,
            eta_growth: 2.0,
            inner_t0: 10,
            inner_step: 2,
            gap_target: 1e-4,
            time_limit: None,
            max_outer: 100_000,
            seed: 0,
            orientation: None,
            certify_dual: false,
            escalation_patience: 30,
            row_scaling: true,
        }
    }
}

impl AlmConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.eta0 > 0.0 && self.eta0.is_finite()) {
            return Err(Error::Parameter(format!("eta0 must be positive, got {}", self.eta0)));
        }
        if !(self.eta_growth >= 1.0 && self.eta_growth.is_finite()) {
            return Err(Error::Parameter(format!(
                "eta growth must be >= 1, got {}",
                self.eta_growth
            )));
        }
        if self.inner_t0 == 0 {
            return Err(Error::Parameter("inner_t0 must be at least 1".into()));
        }
        if !(self.gap_target >= 0.0) {
            return Err(Error::Parameter(format!(
                "gap target must be >= 0, got {}",
                self.gap_target
            )));
        }
        Ok(())
    }
}

/// Solver state between outer iterations.
#[derive(Debug, Clone)]
pub struct AlmState {
    pub y_hat: Vec<f64>,
    pub eta: f64,
    pub x: Vec<f64>,
    pub z: Vec<f64>,
    pub outer: u64,
    pub inner_budget: u64,
    /// Primal infeasibility at the last escalation or halving.
    pub infeasibility_ref: f64,
    /// Outer iteration at which `infeasibility_ref` was set.
    pub ref_outer: u64,
    pub escalations: u64,
}

impl AlmState {
    pub fn new(lp: &StandardFormLP, eta0: f64) -> Self {
        let (m, n) = lp.a.shape();
        Self {
            y_hat: vec![0.0; m],
            eta: eta0,
            x: vec![0.0; n],
            z: lp.b.iter().map(|b| b.max(0.0)).collect(),
            outer: 0,
            inner_budget: 0,
            infeasibility_ref: f64::INFINITY,
            ref_outer: 0,
            escalations: 0,
        }
    }
}

/// `A x - b + z + ŷ/η`.
fn penalty_residual(state: &AlmState, lp: &StandardFormLP) -> Vec<f64> {
    let mut r = lp.a.mul_vec(&state.x).expect("state matches the LP");
    for (i, ri) in r.iter_mut().enumerate() {
        *ri += state.z[i] - lp.b[i] + state.y_hat[i] / state.eta;
    }
    r
}

/// The inner objective `c^T x + (η/2) ‖A x - b + z + ŷ/η‖²`.
pub fn subproblem_objective(state: &AlmState, lp: &StandardFormLP) -> f64 {
    let r = penalty_residual(state, lp);
    lp.objective(&state.x) + 0.5 * state.eta * r.iter().map(|v| v * v).sum::<f64>()
}

/// `A x - b + ŷ/η`; the optimal slack for it is `max(0, -s)`.
fn shifted_residual(state: &AlmState, lp: &StandardFormLP) -> Vec<f64> {
    let mut s = lp.a.mul_vec(&state.x).expect("state matches the LP");
    for (i, si) in s.iter_mut().enumerate() {
        *si += state.y_hat[i] / state.eta - lp.b[i];
    }
    s
}

/// Exact minimizer over `δ >= lower` of
/// `c δ + (η/2) Σ_i max(s_i + a_i δ, 0)^2`, a convex piecewise quadratic.
/// Its derivative is piecewise linear and nondecreasing with kinks at
/// `-s_i / a_i`; the kinks are swept in order until it crosses zero.
fn coordinate_step(c: f64, eta: f64, col: &[(usize, f64)], s: &[f64], lower: f64, kinks: &mut Vec<(f64, f64)>) -> f64 {
    let mut slope = 0.0;
    let mut deriv = c;
    let mut full = 0.0;
    kinks.clear();
    for &(i, a) in col {
        let w = eta * a * a;
        full += w;
        let active = s[i] + a * lower > 0.0;
        if active {
            slope += w;
            deriv += eta * a * (s[i] + a * lower);
        }
        // terms that switch somewhere above `lower`
        if (a > 0.0) != active {
            kinks.push((-s[i] / a, if a > 0.0 { w } else { -w }));
        }
    }
    if deriv >= 0.0 {
        return lower;
    }
    // slopes this small are cancellation noise from terms that left
    let flat = 1e-12 * full;
    kinks.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
    let mut at = lower;
    for &(t, change) in kinks.iter() {
        if slope > flat {
            let root = at - deriv / slope;
            if root <= t {
                return root;
            }
        }
        deriv += slope.max(0.0) * (t - at).max(0.0);
        at = at.max(t);
        slope += change;
        if deriv >= 0.0 {
            return at;
        }
    }
    if slope > flat {
        at - deriv / slope
    } else {
        // unbounded along this coordinate; stay put
        0.0
    }
}

/// Runs `passes` coordinate-descent passes on the inner problem. Each pass
/// visits the coordinates of `x` in a fresh random order and moves each to
/// the exact minimizer of the objective along it (with the slack at its
/// optimal value, clamped so `x >= 0`), then sets
/// `z = max(0, -(A x - b + ŷ/η))`. Calls `after_pass` with the pass index.
pub fn solve_subproblem(
    state: &mut AlmState,
    lp: &StandardFormLP,
    passes: u64,
    rng: &mut ChaCha8Rng,
    mut after_pass: impl FnMut(u64, &AlmState),
) {
    let n = lp.a.ncols();
    let eta = state.eta;
    let mut s = shifted_residual(state, lp);
    let mut order: Vec<usize> = (0..n).collect();
    let mut col: Vec<(usize, f64)> = Vec::new();
    let mut kinks = Vec::new();
    for pass in 0..passes {
        order.shuffle(rng);
        for &j in &order {
            let xj = state.x[j];
            col.clear();
            col.extend(lp.a.col_at(j).iter());
            let delta = coordinate_step(lp.c[j], eta, &col, &s, -xj, &mut kinks);
            if delta != 0.0 {
                state.x[j] = (xj + delta).max(0.0);
                let delta = state.x[j] - xj;
                for &(i, a) in &col {
                    s[i] += delta * a;
                }
            }
        }
        for (si, zi) in s.iter().zip(state.z.iter_mut()) {
            *zi = (-si).max(0.0);
        }
        after_pass(pass, state);
    }
}

/// `‖max(0, A x - b)‖_∞`.
pub fn primal_infeasibility(x: &[f64], lp: &StandardFormLP) -> f64 {
    let ax = lp.a.mul_vec(x).expect("x matches the LP");
    ax.iter().zip(&lp.b).fold(0.0, |m, (a, b)| m.max(a - b))
}

/// One outer iteration: inner solve with budget `t0 + k step`, dual update,
/// then penalty escalation if infeasibility failed to halve within
/// `escalation_patience` outer iterations.
pub fn alm_step(state: &mut AlmState, lp: &StandardFormLP, config: &AlmConfig, rng: &mut ChaCha8Rng) -> Result<()> {
    state.inner_budget = config.inner_t0 + state.outer * config.inner_step;
    solve_subproblem(state, lp, state.inner_budget, rng, |_, _| {});
    // with the optimal slack, A x - b + z + ŷ/η = max(s, 0)
    let r = penalty_residual(state, lp);
    for (y, ri) in state.y_hat.iter_mut().zip(r) {
        *y = (state.eta * ri).max(0.0);
    }
    state.outer += 1;
    let infeas = primal_infeasibility(&state.x, lp);
    if infeas <= 0.5 * state.infeasibility_ref {
        state.infeasibility_ref = infeas;
        state.ref_outer = state.outer;
    } else if infeas > FEASIBLE_ENOUGH && state.outer - state.ref_outer >= config.escalation_patience {
        state.eta *= config.eta_growth;
        state.escalations += 1;
        state.infeasibility_ref = infeas;
        state.ref_outer = state.outer;
        if !(state.eta <= ETA_MAX) {
            return Err(Error::Numerical(format!(
                "penalty weight reached {:e}; rescale the LP or lower --eta-growth",
                state.eta
            )));
        }
    }
    Ok(())
}

/// Reads both players' plans out of the iterate: a player's raw vector comes
/// from `x` where its sequences label variables and from `ŷ` where they
/// label constraints. Both are normalized onto their treeplexes.
pub fn extract_strategies(
    state: &AlmState,
    lp: &StandardFormLP,
    sf: &SequenceForm,
) -> Result<(SequenceStrategy, SequenceStrategy)> {
    let mut raw1 = vec![f64::NAN; lp.num_seq1];
    let mut raw2 = vec![f64::NAN; lp.num_seq2];
    let multipliers: Vec<f64> = state.y_hat.iter().zip(&lp.row_scale).map(|(y, s)| y / s).collect();
    let sides = [(&lp.var_labels, &state.x), (&lp.con_labels, &multipliers)];
    for (labels, values) in sides {
        for (label, &v) in labels.iter().zip(values.iter()) {
            match *label {
                Label::X(i) => raw1[i] = v,
                Label::Y(j) => raw2[j] = v,
                _ => {}
            }
        }
    }
    if raw1.iter().chain(&raw2).any(|v| v.is_nan()) {
        return Err(Error::Structure("standard form is missing sequence labels".into()));
    }
    Ok((sf.tp1.normalize(&raw1)?, sf.tp2.normalize(&raw2)?))
}

fn check_orientation(lp: &StandardFormLP, sf: &SequenceForm) -> Result<()> {
    if lp.num_seq1 != sf.tp1.num_sequences() || lp.num_seq2 != sf.tp2.num_sequences() {
        return Err(Error::Shape("standard-form LP does not belong to this game".into()));
    }
    Ok(())
}

/// Runs the outer loop on one standard-form LP until the Nash gap of the
/// extracted strategies reaches the target, time runs out or the outer cap
/// is hit. Records a trace row per outer iteration. Returns the best pair
/// seen and the final state.
pub fn alm_solve(
    lp: &StandardFormLP,
    sf: &SequenceForm,
    config: &AlmConfig,
    mut trace: SolveTrace,
) -> Result<(SolveResult, AlmState)> {
    config.validate()?;
    check_orientation(lp, sf)?;
    let a = sf.matrix();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut state = AlmState::new(lp, config.eta0);
    let mut best: Option<(f64, SequenceStrategy, SequenceStrategy)> = None;
    let termination = loop {
        alm_step(&mut state, lp, config, &mut rng)?;
        let (x, y) = extract_strategies(&state, lp, sf)?;
        let gap = nash_gap(a, &sf.tp1, &sf.tp2, &x, &y)?;
        trace.record(state.outer, gap, Phase::Solve);
        if best.as_ref().is_none_or(|b| gap < b.0) {
            best = Some((gap, x, y));
        }
        if gap <= config.gap_target {
            break Termination::GapReached;
        }
        if config.time_limit.is_some_and(|t| trace.elapsed() >= t) {
            break Termination::TimeLimit;
        }
        if state.outer >= config.max_outer {
            break Termination::IterationCap;
        }
    };
    let (gap, x, y) = best.expect("at least one outer iteration");
    let value = expected_payoff(a, &x.x, &y.x)?;
    Ok((
        SolveResult {
            x,
            y,
            gap,
            value,
            iterations: state.outer,
            termination,
            trace,
        },
        state,
    ))
}

/// Builds the (optionally factored) LP for `sf` and solves it.
pub fn solve_lp(
    sf: &SequenceForm,
    factorization: Option<&Factorization>,
    config: &AlmConfig,
    trace: SolveTrace,
) -> Result<SolveResult> {
    let game_lp = match factorization {
        Some(f) => sf.factored_lp(f)?,
        None => sf.lp()?,
    };
    let orientation = config.orientation.unwrap_or_else(|| default_orientation(sf));
    let prepare = |o| -> Result<StandardFormLP> {
        let mut lp = to_standard_form(&game_lp, o)?;
        if config.row_scaling {
            lp.equilibrate_rows();
        }
        Ok(lp)
    };
    let lp = prepare(orientation)?;
    let (result, _) = alm_solve(&lp, sf, config, trace)?;
    if !config.certify_dual {
        return Ok(result);
    }
    let other = match orientation {
        Orientation::Primal => Orientation::Dual,
        Orientation::Dual => Orientation::Primal,
    };
    let lp2 = prepare(other)?;
    let (second, _) = alm_solve(&lp2, sf, config, result.trace)?;
    // each player's plan from the run where it was the primal iterate
    let (x, y) = match orientation {
        Orientation::Primal => (result.x, second.y),
        Orientation::Dual => (second.x, result.y),
    };
    let a = sf.matrix();
    let gap = nash_gap(a, &sf.tp1, &sf.tp2, &x, &y)?;
    let value = expected_payoff(a, &x.x, &y.x)?;
    let termination = if gap <= config.gap_target {
        Termination::GapReached
    } else {
        second.termination
    };
    Ok(SolveResult {
        x,
        y,
        gap,
        value,
        iterations: result.iterations + second.iterations,
        termination,
        trace: second.trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::SparseMatrix;

    fn tiny(a: Vec<Vec<f64>>, b: Vec<f64>, c: Vec<f64>) -> StandardFormLP {
        let a = SparseMatrix::from_dense(&a);
        StandardFormLP {
            row_scale: vec![1.0; a.nrows()],
            var_labels: (0..a.ncols()).map(Label::X).collect(),
            con_labels: (0..a.nrows()).map(Label::Y).collect(),
            num_seq1: a.ncols(),
            num_seq2: a.nrows(),
            a,
            b,
            c,
            orientation: Orientation::Primal,
        }
    }

    #[test]
    fn zero_problem_stays_at_zero() {
        let lp = tiny(vec![vec![1.0, -2.0], vec![0.5, 1.0]], vec![0.0, 0.0], vec![0.0, 0.0]);
        let mut s = AlmState::new(&lp, 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        solve_subproblem(&mut s, &lp, 5, &mut rng, |_, _| {});
        assert_eq!(s.x, vec![0.0, 0.0]);
        assert_eq!(s.z, vec![0.0, 0.0]);
    }

    #[test]
    fn one_dimensional_matches_grid_search() {
        // min x + (1/2)(x - 1 + z)^2 over x, z >= 0
        let lp = tiny(vec![vec![1.0]], vec![1.0], vec![1.0]);
        let mut s = AlmState::new(&lp, 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        solve_subproblem(&mut s, &lp, 20, &mut rng, |_, _| {});
        let f = |x: f64, z: f64| x + 0.5 * (x - 1.0 + z).powi(2);
        let mut best = (f64::INFINITY, 0.0, 0.0);
        for a in 0..=200 {
            for b in 0..=200 {
                let (x, z) = (a as f64 * 1e-2, b as f64 * 1e-2);
                if f(x, z) < best.0 {
                    best = (f(x, z), x, z);
                }
            }
        }
        assert!((s.x[0] - best.1).abs() < 1e-4 && (s.z[0] - best.2).abs() < 1e-4);
        assert_eq!((s.x[0], s.z[0]), (0.0, 1.0));
    }

    #[test]
    fn bad_config_is_rejected() {
        let c = AlmConfig {
            eta0: 0.0,
            ..Default::default()
        };
        assert!(c.validate().is_err());
        let c = AlmConfig {
            eta_growth: 0.5,
            ..Default::default()
        };
        assert!(c.validate().is_err());
    }
}
