use crate::error::{Error, Result};
use crate::game::{Game, GameBuilder, NodeId, Player};

const SUITS: [char; 2] = ['a', 'b'];
const RAISE_CAP: usize = 2;
const ANTE: f64 = 1.0;
const BET_SIZES: [f64; 2] = [2.0, 4.0];

#[derive(Clone, Copy)]
struct Card {
    rank: usize,
    suit: usize,
}

impl Card {
    fn label(self) -> String {
        format!("{}{}", self.rank, SUITS[self.suit])
    }
}

enum RoundEnd {
    Fold(Player),
    Showdown,
}

/// Leduc-family hold'em: `ranks` ranks in two suits, one private card each,
/// one public card dealt between the two betting rounds. Ante 1; fixed bets
/// of 2 then 4; at most two raises per round; player one opens each round.
/// Infosets see the rank (not the suit) of each card.
pub fn leduc(ranks: usize) -> Result<Game> {
    if ranks < 3 {
        return Err(Error::Parameter(format!("leduc needs at least 3 ranks, got {ranks}")));
    }
    let deck: Vec<Card> = (0..ranks)
        .flat_map(|rank| (0..SUITS.len()).map(move |suit| Card { rank, suit }))
        .collect();
    let mut b = GameBuilder::new();
    let root = b.root();
    let first = deal(&mut b, root, &deck, &[])?;
    for (node, c1) in first {
        let second = deal(&mut b, node, &deck, &[c1])?;
        for (node, c2) in second {
            let hands = [deck[c1], deck[c2]];
            let mut ctx = Ctx {
                b: &mut b,
                deck: &deck,
                hands,
                dealt: [c1, c2],
            };
            ctx.betting(node, 0, [ANTE, ANTE], None)?;
        }
    }
    b.finish()
}

fn deal(b: &mut GameBuilder, node: NodeId, deck: &[Card], used: &[usize]) -> Result<Vec<(NodeId, usize)>> {
    let avail: Vec<usize> = (0..deck.len()).filter(|c| !used.contains(c)).collect();
    let p = 1.0 / avail.len() as f64;
    let outcomes: Vec<(String, f64)> = avail.iter().map(|&c| (deck[c].label(), p)).collect();
    let kids = b.chance(node, &outcomes)?;
    Ok(kids.zip(avail).collect())
}

struct Ctx<'a> {
    b: &'a mut GameBuilder,
    deck: &'a [Card],
    hands: [Card; 2],
    dealt: [usize; 2],
}

impl Ctx<'_> {
    /// Runs one betting round starting at `node`. `board` is `None` in the
    /// first round and holds the public card and first-round history after.
    fn betting(&mut self, node: NodeId, round: usize, contrib: [f64; 2], board: Option<(usize, &str)>) -> Result<()> {
        self.street(node, round, Player::One, String::new(), 0, false, contrib, board)
    }

    #[allow(clippy::too_many_arguments)]
    fn street(
        &mut self,
        node: NodeId,
        round: usize,
        to_act: Player,
        hist: String,
        raises: usize,
        facing: bool,
        contrib: [f64; 2],
        board: Option<(usize, &str)>,
    ) -> Result<()> {
        let mut actions: Vec<&str> = if facing { vec!["f", "c"] } else { vec!["k"] };
        if raises < RAISE_CAP {
            actions.push("r");
        }
        let me = self.hands[to_act.index()].rank;
        let infoset = match board {
            None => format!("{me}|{hist}"),
            Some((card, h1)) => format!("{me}|{h1}|{}|{hist}", self.deck[card].rank),
        };
        let kids = self.b.decision(node, to_act, &infoset, &actions)?;
        let p = to_act.index();
        for (child, a) in kids.zip(actions) {
            let next_hist = format!("{hist}{a}");
            let mut c = contrib;
            match a {
                "f" => self.round_end(child, round, RoundEnd::Fold(to_act), contrib, &next_hist, board)?,
                "c" => {
                    c[p] = c[0].max(c[1]);
                    self.round_end(child, round, RoundEnd::Showdown, c, &next_hist, board)?;
                }
                "k" if hist.is_empty() => {
                    self.street(child, round, to_act.opponent(), next_hist, raises, false, c, board)?
                }
                "k" => self.round_end(child, round, RoundEnd::Showdown, c, &next_hist, board)?,
                _ => {
                    c[p] = c[0].max(c[1]) + BET_SIZES[round];
                    self.street(child, round, to_act.opponent(), next_hist, raises + 1, true, c, board)?;
                }
            }
        }
        Ok(())
    }

    fn round_end(
        &mut self,
        node: NodeId,
        round: usize,
        end: RoundEnd,
        contrib: [f64; 2],
        hist: &str,
        board: Option<(usize, &str)>,
    ) -> Result<()> {
        match end {
            RoundEnd::Fold(Player::One) => self.b.terminal(node, -contrib[0]),
            RoundEnd::Fold(Player::Two) => self.b.terminal(node, contrib[1]),
            RoundEnd::Showdown if round == 0 => {
                let cards = deal(self.b, node, self.deck, &self.dealt)?;
                for (child, card) in cards {
                    self.betting(child, 1, contrib, Some((card, hist)))?;
                }
                Ok(())
            }
            RoundEnd::Showdown => {
                let public = self.deck[board.expect("second round has a board").0].rank;
                let strength = |c: Card| (c.rank == public, c.rank);
                let (s1, s2) = (strength(self.hands[0]), strength(self.hands[1]));
                let u1 = match s1.cmp(&s2) {
                    std::cmp::Ordering::Greater => contrib[1],
                    std::cmp::Ordering::Less => -contrib[0],
                    std::cmp::Ordering::Equal => 0.0,
                };
                self.b.terminal(node, u1)
            }
        }
    }
}
