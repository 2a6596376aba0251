//! Discounted CFR on the sequence form, with alternating updates.
//!
//! Counterfactual values come from sparse gradients: `A y` for player one
//! and `-A^T x` for player two, optionally through a factorization.

use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use crate::error::{Error, Result};
use crate::eval::{expected_payoff, nash_gap};
use crate::factor::Factorization;
use crate::game::Player;
use crate::payoff::SequenceForm;
use crate::sparse::SparseMatrix;
use crate::trace::{Phase, SolveResult, SolveTrace, Termination};
use crate::treeplex::{SequenceStrategy, TreePlex};

/// DCFR[α, β, γ]. Positive regrets are scaled by `t^α/(t^α+1)` after
/// iteration `t`, negative ones by `t^β/(t^β+1)`, and the strategy sum by
/// `(t/(t+1))^γ`. `α = ∞` disables the positive discount and `β = -∞`
/// floors regrets at zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DcfrParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl DcfrParams {
    pub const PRESETS: [&'static str; 4] = ["cfr+", "cfr+quad", "dcfr", "lcfr"];

    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Result<Self> {
        let p = Self { alpha, beta, gamma };
        p.validate()?;
        Ok(p)
    }

    pub fn cfr_plus() -> Self {
        Self {
            alpha: f64::INFINITY,
            beta: f64::NEG_INFINITY,
            gamma: 1.0,
        }
    }

    pub fn cfr_plus_quad() -> Self {
        Self {
            gamma: 2.0,
            ..Self::cfr_plus()
        }
    }

    pub fn dcfr() -> Self {
        Self {
            alpha: 1.5,
            beta: 0.0,
            gamma: 2.0,
        }
    }

    pub fn lcfr() -> Self {
        Self {
            alpha: 1.0,
            beta: 1.0,
            gamma: 1.0,
        }
    }

    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "cfr+" => Ok(Self::cfr_plus()),
            "cfr+quad" => Ok(Self::cfr_plus_quad()),
            "dcfr" => Ok(Self::dcfr()),
            "lcfr" => Ok(Self::lcfr()),
            _ => Err(Error::Parameter(format!(
                "unknown preset `{name}`; expected one of {}",
                Self::PRESETS.join(", ")
            ))),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.alpha.is_nan() || self.beta.is_nan() {
            return Err(Error::Parameter("alpha and beta must not be NaN".into()));
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return Err(Error::Parameter(format!(
                "gamma must be finite and >= 0, got {}",
                self.gamma
            )));
        }
        if self.alpha < self.beta {
            return Err(Error::Parameter(format!(
                "alpha ({}) must be at least beta ({})",
                self.alpha, self.beta
            )));
        }
        Ok(())
    }

    fn positive_discount(&self, t: f64) -> f64 {
        discount(t, self.alpha)
    }

    fn negative_discount(&self, t: f64) -> f64 {
        discount(t, self.beta)
    }

    fn average_discount(&self, t: f64) -> f64 {
        (t / (t + 1.0)).powf(self.gamma)
    }
}

/// `t^e / (t^e + 1)`, with the limits 1 at `e = ∞` and 0 at `e = -∞`.
fn discount(t: f64, e: f64) -> f64 {
    if e == f64::INFINITY {
        1.0
    } else if e == f64::NEG_INFINITY {
        0.0
    } else {
        let p = t.powf(e);
        p / (p + 1.0)
    }
}

impl FromStr for DcfrParams {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::preset(s)
    }
}

impl fmt::Display for DcfrParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DCFR[{}, {}, {}]", self.alpha, self.beta, self.gamma)
    }
}

/// Regret matching: proportional to the positive parts, uniform when none
/// is positive.
pub fn regret_match(regrets: &[f64], out: &mut [f64]) {
    let total: f64 = regrets.iter().map(|r| r.max(0.0)).sum();
    if total > 0.0 {
        for (o, r) in out.iter_mut().zip(regrets) {
            *o = r.max(0.0) / total;
        }
    } else {
        let u = 1.0 / regrets.len() as f64;
        out.iter_mut().for_each(|o| *o = u);
    }
}

/// Where gradients come from.
#[derive(Debug, Clone, Copy)]
pub enum GradientSource<'a> {
    Matrix(&'a SparseMatrix),
    Factored(&'a Factorization),
}

impl GradientSource<'_> {
    /// Player one's utility gradient `A y` or player two's `-A^T x`.
    pub fn gradient(&self, player: Player, opponent: &[f64]) -> Result<Vec<f64>> {
        match (self, player) {
            (GradientSource::Matrix(a), Player::One) => a.mul_vec(opponent),
            (GradientSource::Factored(f), Player::One) => f.mul_vec(opponent),
            (GradientSource::Matrix(a), Player::Two) => Ok(negate(a.tmul_vec(opponent)?)),
            (GradientSource::Factored(f), Player::Two) => Ok(negate(f.tmul_vec(opponent)?)),
        }
    }
}

fn negate(mut v: Vec<f64>) -> Vec<f64> {
    v.iter_mut().for_each(|x| *x = -*x);
    v
}

/// Regrets, current plan and strategy sum of one player, all indexed by
/// sequence.
#[derive(Debug, Clone)]
pub struct RegretTable {
    pub regrets: Vec<f64>,
    pub current: Vec<f64>,
    pub strategy_sum: Vec<f64>,
}

impl RegretTable {
    pub fn new(tp: &TreePlex) -> Self {
        let n = tp.num_sequences();
        let mut t = Self {
            regrets: vec![0.0; n],
            current: vec![0.0; n],
            strategy_sum: vec![0.0; n],
        };
        t.refresh_current(tp);
        t
    }

    /// Recomputes the current plan from the regrets, top down.
    fn refresh_current(&mut self, tp: &TreePlex) {
        self.current[0] = 1.0;
        let mut local = Vec::new();
        for inf in tp.infosets() {
            let r = inf.sequences();
            local.resize(inf.num_actions, 0.0);
            regret_match(&self.regrets[r.clone()], &mut local);
            let reach = self.current[inf.parent];
            for (s, p) in r.zip(&local) {
                self.current[s] = reach * p;
            }
        }
    }

    /// Behavior probabilities at each treeplex infoset.
    pub fn behavior(&self, tp: &TreePlex) -> Vec<Vec<f64>> {
        tp.infosets()
            .iter()
            .map(|inf| {
                let mut p = vec![0.0; inf.num_actions];
                regret_match(&self.regrets[inf.sequences()], &mut p);
                p
            })
            .collect()
    }

    /// The normalized average plan.
    pub fn average(&self, tp: &TreePlex) -> Result<SequenceStrategy> {
        tp.normalize(&self.strategy_sum)
    }

    /// One regret update against `gradient` at iteration `t` (1-based).
    fn update(&mut self, tp: &TreePlex, gradient: &[f64], t: f64, params: &DcfrParams) {
        let mut cfv = gradient.to_vec();
        let mut local = Vec::new();
        for inf in tp.infosets().iter().rev() {
            let r = inf.sequences();
            local.resize(inf.num_actions, 0.0);
            regret_match(&self.regrets[r.clone()], &mut local);
            let value: f64 = r.clone().zip(&local).map(|(s, p)| p * cfv[s]).sum();
            for s in r {
                self.regrets[s] += cfv[s] - value;
            }
            cfv[inf.parent] += value;
        }
        let (pos, neg) = (params.positive_discount(t), params.negative_discount(t));
        for r in &mut self.regrets[1..] {
            *r *= if *r > 0.0 { pos } else { neg };
        }
        self.refresh_current(tp);
        for (s, x) in self.strategy_sum.iter_mut().zip(&self.current) {
            *s += x;
        }
        let avg = params.average_discount(t);
        self.strategy_sum.iter_mut().for_each(|s| *s *= avg);
    }
}

/// Both players' tables and the iteration counter.
#[derive(Debug, Clone)]
pub struct CfrState {
    pub tables: [RegretTable; 2],
    pub iteration: u64,
}

impl CfrState {
    pub fn new(sf: &SequenceForm) -> Self {
        Self {
            tables: [RegretTable::new(&sf.tp1), RegretTable::new(&sf.tp2)],
            iteration: 0,
        }
    }

    pub fn averages(&self, sf: &SequenceForm) -> Result<(SequenceStrategy, SequenceStrategy)> {
        Ok((self.tables[0].average(&sf.tp1)?, self.tables[1].average(&sf.tp2)?))
    }

    pub fn current(&self, sf: &SequenceForm) -> (SequenceStrategy, SequenceStrategy) {
        (
            SequenceStrategy {
                player: sf.tp1.player(),
                x: self.tables[0].current.clone(),
            },
            SequenceStrategy {
                player: sf.tp2.player(),
                x: self.tables[1].current.clone(),
            },
        )
    }
}

/// One alternating iteration: player one updates against player two's
/// current plan, then player two against player one's new plan.
pub fn dcfr_iterate(
    state: &mut CfrState,
    sf: &SequenceForm,
    params: &DcfrParams,
    source: GradientSource<'_>,
) -> Result<()> {
    state.iteration += 1;
    let t = state.iteration as f64;
    let g1 = source.gradient(Player::One, &state.tables[1].current)?;
    state.tables[0].update(&sf.tp1, &g1, t, params);
    let g2 = source.gradient(Player::Two, &state.tables[0].current)?;
    state.tables[1].update(&sf.tp2, &g2, t, params);
    Ok(())
}

#[derive(Debug, Clone)]
pub struct CfrConfig {
    pub params: DcfrParams,
    pub gap_target: f64,
    pub time_limit: Option<Duration>,
    pub max_iterations: u64,
    /// Iterations between Nash-gap evaluations.
    pub eval_every: u64,
}

impl Default for CfrConfig {
    fn default() -> Self {
        Self {
            params: DcfrParams::cfr_plus(),
            gap_target: 1e-4,
            time_limit: None,
            max_iterations: 1_000_000,
            eval_every: 50,
        }
    }
}

/// Iterates until the average strategies reach the gap target, time runs
/// out or the iteration cap is hit. Gaps are always measured on the exact
/// payoff matrix. Returns the best average pair seen.
pub fn solve_cfr(
    sf: &SequenceForm,
    config: &CfrConfig,
    factorization: Option<&Factorization>,
    mut trace: SolveTrace,
) -> Result<SolveResult> {
    config.params.validate()?;
    if config.eval_every == 0 {
        return Err(Error::Parameter("evaluation interval must be at least 1".into()));
    }
    let a = sf.matrix();
    let source = match factorization {
        Some(f) => {
            f.check_reconstruction(a)?;
            GradientSource::Factored(f)
        }
        None => GradientSource::Matrix(a),
    };
    let mut state = CfrState::new(sf);
    let mut best: Option<(f64, SequenceStrategy, SequenceStrategy)> = None;
    let termination = loop {
        dcfr_iterate(&mut state, sf, &config.params, source)?;
        let capped = state.iteration >= config.max_iterations;
        if !state.iteration.is_multiple_of(config.eval_every) && !capped {
            continue;
        }
        let (x, y) = state.averages(sf)?;
        let gap = nash_gap(a, &sf.tp1, &sf.tp2, &x, &y)?;
        trace.record(state.iteration, gap, Phase::Solve);
        if best.as_ref().is_none_or(|b| gap < b.0) {
            best = Some((gap, x, y));
        }
        if gap <= config.gap_target {
            break Termination::GapReached;
        }
        if config.time_limit.is_some_and(|t| trace.elapsed() >= t) {
            break Termination::TimeLimit;
        }
        if capped {
            break Termination::IterationCap;
        }
    };
    let (gap, x, y) = best.expect("at least one evaluation");
    let value = expected_payoff(a, &x.x, &y.x)?;
    Ok(SolveResult {
        x,
        y,
        gap,
        value,
        iterations: state.iteration,
        termination,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn regret_matching_examples() {
        let mut out = [0.0; 3];
        regret_match(&[3.0, 1.0, 0.0], &mut out);
        assert_eq!(out, [0.75, 0.25, 0.0]);
        let mut out = [0.0; 2];
        regret_match(&[-1.0, -2.0], &mut out);
        assert_eq!(out, [0.5, 0.5]);
        let mut out = [0.0; 3];
        regret_match(&[0.0, 0.0, 5.0], &mut out);
        assert_eq!(out, [0.0, 0.0, 1.0]);
    }

    #[test]
    fn presets_and_validation() {
        assert_eq!(
            "dcfr".parse::<DcfrParams>().unwrap(),
            DcfrParams::new(1.5, 0.0, 2.0).unwrap()
        );
        assert!("cfr".parse::<DcfrParams>().is_err());
        assert!(DcfrParams::new(0.0, 1.0, 1.0).is_err());
        assert!(DcfrParams::new(1.0, 0.0, f64::INFINITY).is_err());
        assert!(DcfrParams::new(1.0, 0.0, -1.0).is_err());
        assert_eq!(discount(3.0, f64::INFINITY), 1.0);
        assert_eq!(discount(3.0, f64::NEG_INFINITY), 0.0);
        assert_eq!(discount(3.0, 0.0), 0.5);
    }
}
