mod common;

use common::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sparsegame::cfr::{dcfr_iterate, regret_match, CfrState, GradientSource};
use sparsegame::game::{Game, NodeId, NodeKind, Player};
use sparsegame::games::{leduc, matching_pennies, rock_paper_scissors};
use sparsegame::{factor, solve_cfr, CfrConfig, DcfrParams, FactorConfig, SequenceForm, SolveTrace, Termination};

/// Plain CFR+ on the game tree, written from the regret-matching+ definition:
/// alternating updates, regrets floored at zero after each update.
struct TreeCfrPlus<'g> {
    game: &'g Game,
    regrets: [Vec<Vec<f64>>; 2],
}

impl<'g> TreeCfrPlus<'g> {
    fn new(game: &'g Game) -> Self {
        let init = |p: Player| game.infosets(p).iter().map(|i| vec![0.0; i.actions.len()]).collect();
        Self {
            game,
            regrets: [init(Player::One), init(Player::Two)],
        }
    }

    fn policy(&self, p: Player, infoset: usize) -> Vec<f64> {
        let r = &self.regrets[p.index()][infoset];
        let mut out = vec![0.0; r.len()];
        regret_match(r, &mut out);
        out
    }

    /// Expected utility of `p` below `node`; adds reach-weighted
    /// instantaneous regrets of `p` into `acc`.
    fn walk(&self, node: NodeId, p: Player, reach: f64, acc: &mut [Vec<f64>]) -> f64 {
        let n = self.game.node(node);
        match n.kind {
            NodeKind::Terminal { u1 } => {
                if p == Player::One {
                    u1
                } else {
                    -u1
                }
            }
            NodeKind::Chance => n
                .children()
                .map(|c| {
                    let pr = self.game.node(c).chance;
                    pr * self.walk(c, p, reach * pr, acc)
                })
                .sum(),
            NodeKind::Decision { player, infoset } => {
                let sigma = self.policy(player, infoset);
                if player == p {
                    let vals: Vec<f64> = n.children().map(|c| self.walk(c, p, reach, acc)).collect();
                    let v: f64 = vals.iter().zip(&sigma).map(|(a, b)| a * b).sum();
                    for (a, val) in vals.iter().enumerate() {
                        acc[infoset][a] += reach * (val - v);
                    }
                    v
                } else {
                    n.children()
                        .zip(&sigma)
                        .map(|(c, s)| s * self.walk(c, p, reach * s, acc))
                        .sum()
                }
            }
        }
    }

    fn iterate(&mut self) {
        for p in Player::BOTH {
            let mut acc: Vec<Vec<f64>> = self.regrets[p.index()].iter().map(|r| vec![0.0; r.len()]).collect();
            self.walk(self.game.root(), p, 1.0, &mut acc);
            for (r, d) in self.regrets[p.index()].iter_mut().zip(acc) {
                for (x, y) in r.iter_mut().zip(d) {
                    *x = (*x + y).max(0.0);
                }
            }
        }
    }
}

#[test]
fn cfr_plus_matches_a_tree_walking_reference() {
    let (g, _) = kuhn();
    let sf = SequenceForm::from_game(&g, false).unwrap();
    let mut reference = TreeCfrPlus::new(&g);
    let mut state = CfrState::new(&sf);
    let params = DcfrParams::cfr_plus();
    for it in 0..100 {
        reference.iterate();
        dcfr_iterate(&mut state, &sf, &params, GradientSource::Matrix(sf.matrix())).unwrap();
        for p in Player::BOTH {
            let tp = sf.treeplex(p);
            let ours = state.tables[p.index()].behavior(tp);
            for (k, inf) in tp.infosets().iter().enumerate() {
                let theirs = reference.policy(p, inf.game_infoset);
                assert!(max_abs_diff(&ours[k], &theirs) < 1e-9, "iteration {it}, player {p}");
                let r = &state.tables[p.index()].regrets[inf.sequences()];
                assert!(max_abs_diff(r, &reference.regrets[p.index()][inf.game_infoset]) < 1e-9);
            }
        }
    }
}

#[test]
fn strategies_are_exact_distributions() {
    let sf = SequenceForm::from_game(&leduc(3).unwrap(), true).unwrap();
    let mut state = CfrState::new(&sf);
    for _ in 0..30 {
        dcfr_iterate(
            &mut state,
            &sf,
            &DcfrParams::dcfr(),
            GradientSource::Matrix(sf.matrix()),
        )
        .unwrap();
    }
    let (ax, ay) = state.averages(&sf).unwrap();
    let (cx, cy) = state.current(&sf);
    for (tp, plans) in [(&sf.tp1, [&ax, &cx]), (&sf.tp2, [&ay, &cy])] {
        for plan in plans {
            assert!(tp.constraint_violation(&plan.x) <= 1e-12);
        }
        for dist in state.tables[tp.player().index()].behavior(tp) {
            assert!((dist.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        }
    }
}

#[test]
fn rock_paper_scissors_average_is_uniform() {
    let sf = SequenceForm::from_game(&rock_paper_scissors().unwrap(), true).unwrap();
    let config = CfrConfig {
        gap_target: 0.0,
        max_iterations: 1000,
        ..Default::default()
    };
    let r = solve_cfr(&sf, &config, None, SolveTrace::start()).unwrap();
    assert!(r.gap <= 1e-2);
    let third = 1.0 / 3.0;
    assert!(max_abs_diff(&r.x.x[1..], &[third; 3]) <= 1e-2);
    assert!(max_abs_diff(&r.y.x[1..], &[third; 3]) <= 1e-2);
}

#[test]
fn matching_pennies_is_quick() {
    let sf = SequenceForm::from_game(&matching_pennies().unwrap(), true).unwrap();
    let r = solve_cfr(&sf, &CfrConfig::default(), None, SolveTrace::start()).unwrap();
    assert_eq!(r.termination, Termination::GapReached);
    assert!(r.gap <= 1e-4 && r.iterations <= 1000);
}

#[test]
fn kuhn_presets_reach_the_oracle_value() {
    let (_, sf) = kuhn();
    for name in DcfrParams::PRESETS {
        let config = CfrConfig {
            params: name.parse().unwrap(),
            gap_target: 1e-4,
            max_iterations: 100_000,
            ..Default::default()
        };
        let r = solve_cfr(&sf, &config, None, SolveTrace::start()).unwrap();
        assert_eq!(r.termination, Termination::GapReached, "{name}");
        assert!((r.value * sf.payoff.unit() - KUHN_VALUE).abs() <= 1e-4, "{name}");
        let rows = r.trace.rows();
        assert!(rows.last().unwrap().nash_gap < rows[0].nash_gap, "{name}");
    }
}

#[test]
fn factored_gradients_match() {
    let sf = SequenceForm::from_game(&leduc(5).unwrap(), true).unwrap();
    let f = factor(sf.matrix(), &FactorConfig::default()).unwrap();
    assert!(f.rank() > 0);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..20 {
        let x = random_plan(&sf.tp1, &mut rng);
        let y = random_plan(&sf.tp2, &mut rng);
        for (p, opp) in [(Player::One, &y), (Player::Two, &x)] {
            let plain = GradientSource::Matrix(sf.matrix()).gradient(p, &opp.x).unwrap();
            let fact = GradientSource::Factored(&f).gradient(p, &opp.x).unwrap();
            assert!(max_abs_diff(&plain, &fact) <= 1e-10);
        }
    }
    let config = CfrConfig {
        gap_target: 1e-2,
        ..Default::default()
    };
    let a = solve_cfr(&sf, &config, None, SolveTrace::start()).unwrap();
    let b = solve_cfr(&sf, &config, Some(&f), SolveTrace::start()).unwrap();
    // roundoff differences make the trajectories drift apart, so compare
    // outcomes rather than iterates
    assert_eq!(a.termination, Termination::GapReached);
    assert_eq!(b.termination, Termination::GapReached);
    assert!((a.value - b.value).abs() <= a.gap + b.gap);
}

#[test]
fn bad_parameters_are_rejected() {
    let (_, sf) = kuhn();
    let config = CfrConfig {
        params: DcfrParams {
            alpha: 0.0,
            beta: 1.0,
            gamma: 1.0,
        },
        ..Default::default()
    };
    assert!(solve_cfr(&sf, &config, None, SolveTrace::start()).is_err());
    let config = CfrConfig {
        eval_every: 0,
        ..Default::default()
    };
    assert!(solve_cfr(&sf, &config, None, SolveTrace::start()).is_err());
}
