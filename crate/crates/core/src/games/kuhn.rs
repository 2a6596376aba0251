use crate::error::Result;
use crate::game::{Game, GameBuilder, Player};

const CARDS: [&str; 3] = ["J", "Q", "K"];

/// Three-card Kuhn poker: ante 1, single bet of 1, player one acts first.
pub fn kuhn() -> Result<Game> {
    let mut b = GameBuilder::new();
    let deals: Vec<(usize, usize)> = (0..3)
        .flat_map(|c1| (0..3).filter(move |&c2| c2 != c1).map(move |c2| (c1, c2)))
        .collect();
    let outcomes: Vec<(String, f64)> = deals
        .iter()
        .map(|&(c1, c2)| (format!("{}{}", CARDS[c1], CARDS[c2]), 1.0 / 6.0))
        .collect();
    let kids = b.chance(b.root(), &outcomes)?;
    for (node, &(c1, c2)) in kids.zip(&deals) {
        // +1 when player one holds the higher card
        let win = if c1 > c2 { 1.0 } else { -1.0 };
        let first = b.decision(node, Player::One, CARDS[c1], &["k", "b"])?;
        let (check, bet) = (first.start, first.start + 1);

        let after_check = b.decision(check, Player::Two, &format!("{}|k", CARDS[c2]), &["k", "b"])?;
        b.terminal(after_check.start, win)?;
        let facing = b.decision(
            after_check.start + 1,
            Player::One,
            &format!("{}|kb", CARDS[c1]),
            &["f", "c"],
        )?;
        b.terminal(facing.start, -1.0)?;
        b.terminal(facing.start + 1, 2.0 * win)?;

        let after_bet = b.decision(bet, Player::Two, &format!("{}|b", CARDS[c2]), &["f", "c"])?;
        b.terminal(after_bet.start, 1.0)?;
        b.terminal(after_bet.start + 1, 2.0 * win)?;
    }
    b.finish()
}
