use crate::error::{Error, Result};
use crate::game::{Game, GameBuilder, Player};

/// Zero-sum Sheriff. The smuggler (player one) privately chooses a number of
/// illegal items `n` in `0..=max_items`, then a bribe `b` in `0..=max_bribe`.
/// The sheriff sees only the bribe and either inspects or passes.
///
/// Smuggler utility: pass `n - 2b` (the cargo's value minus the bribe, less
/// the sheriff's bribe income), inspect with `n = 0` scores 3, inspect with
/// `n > 0` scores `-2n`.
pub fn sheriff(max_items: usize, max_bribe: usize) -> Result<Game> {
    if max_items == 0 || max_bribe == 0 {
        return Err(Error::Parameter("sheriff needs N >= 1 and B >= 1".into()));
    }
    let items: Vec<String> = (0..=max_items).map(|n| format!("n{n}")).collect();
    let bribes: Vec<String> = (0..=max_bribe).map(|b| format!("b{b}")).collect();
    let mut b = GameBuilder::new();
    let item_nodes = b.decision(b.root(), Player::One, "items", &items)?;
    for (n, node) in item_nodes.enumerate() {
        let bribe_nodes = b.decision(node, Player::One, &format!("bribe|n{n}"), &bribes)?;
        for (bribe, bnode) in bribe_nodes.enumerate() {
            let leaves = b.decision(bnode, Player::Two, &format!("b{bribe}"), &["inspect", "pass"])?;
            let inspected = if n == 0 { 3.0 } else { -2.0 * n as f64 };
            b.terminal(leaves.start, inspected)?;
            b.terminal(leaves.start + 1, n as f64 - 2.0 * bribe as f64)?;
        }
    }
    b.finish()
}
