use crate::error::{Error, Result};
use crate::game::{Game, GameBuilder, NodeId, Player};

/// Goofspiel with `ranks` cards per hand and a prize deck of the same ranks
/// revealed in random order. Both players bid simultaneously; bids are
/// revealed at the end of each round. The higher bid wins the prize, ties
/// split it. Player one receives +1, 0 or -1 by the sign of the final score
/// difference.
pub fn goofspiel(ranks: usize) -> Result<Game> {
    if ranks < 2 {
        return Err(Error::Parameter(format!(
            "goofspiel needs at least 2 ranks, got {ranks}"
        )));
    }
    if ranks > 16 {
        return Err(Error::Parameter(format!("goofspiel with {ranks} ranks is too large")));
    }
    let full = (1u32 << ranks) - 1;
    let mut b = GameBuilder::new();
    let root = b.root();
    round(
        &mut b,
        root,
        ranks,
        State {
            hands: [full, full],
            prizes: full,
            score: 0.0,
        },
        String::new(),
    )?;
    b.finish()
}

#[derive(Clone, Copy)]
struct State {
    hands: [u32; 2],
    prizes: u32,
    // points of player one minus points of player two
    score: f64,
}

fn cards(mask: u32, ranks: usize) -> Vec<usize> {
    (0..ranks).filter(|c| mask & (1 << c) != 0).collect()
}

fn round(b: &mut GameBuilder, node: NodeId, ranks: usize, s: State, public: String) -> Result<()> {
    if s.prizes == 0 {
        let u1 = if s.score > 0.0 {
            1.0
        } else if s.score < 0.0 {
            -1.0
        } else {
            0.0
        };
        return b.terminal(node, u1);
    }
    let prizes = cards(s.prizes, ranks);
    let p = 1.0 / prizes.len() as f64;
    let outcomes: Vec<(String, f64)> = prizes.iter().map(|c| (format!("p{}", c + 1), p)).collect();
    let kids = b.chance(node, &outcomes)?;
    for (child, prize) in kids.zip(prizes) {
        let public = format!("{public}p{}:", prize + 1);
        let bids1 = cards(s.hands[0], ranks);
        let bids2 = cards(s.hands[1], ranks);
        let labels1: Vec<String> = bids1.iter().map(|c| format!("b{}", c + 1)).collect();
        let labels2: Vec<String> = bids2.iter().map(|c| format!("b{}", c + 1)).collect();
        let first = b.decision(child, Player::One, &public, &labels1)?;
        for (n1, &c1) in first.zip(&bids1) {
            let second = b.decision(n1, Player::Two, &public, &labels2)?;
            for (n2, &c2) in second.zip(&bids2) {
                let value = (prize + 1) as f64;
                let score = match c1.cmp(&c2) {
                    std::cmp::Ordering::Greater => s.score + value,
                    std::cmp::Ordering::Less => s.score - value,
                    std::cmp::Ordering::Equal => s.score,
                };
                let next = State {
                    hands: [s.hands[0] & !(1 << c1), s.hands[1] & !(1 << c2)],
                    prizes: s.prizes & !(1 << prize),
                    score,
                };
                round(b, n2, ranks, next, format!("{public}{}-{},", c1 + 1, c2 + 1))?;
            }
        }
    }
    Ok(())
}
