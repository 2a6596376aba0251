//! Two-player zero-sum extensive-form games stored as an arena tree.

use std::collections::HashMap;
use std::fmt;
use std::ops::Range;

use crate::error::{Error, Result};

pub type NodeId = usize;

/// Tolerance on the total probability of a chance node.
pub const CHANCE_SUM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Player {
    One,
    Two,
}

impl Player {
    pub const BOTH: [Player; 2] = [Player::One, Player::Two];

    /// 0 for player one, 1 for player two.
    pub fn index(self) -> usize {
        match self {
            Player::One => 0,
            Player::Two => 1,
        }
    }

    /// The 1-based player number used in files and messages.
    pub fn number(self) -> usize {
        self.index() + 1
    }

    pub fn opponent(self) -> Player {
        match self {
            Player::One => Player::Two,
            Player::Two => Player::One,
        }
    }

    pub fn from_number(n: usize) -> Option<Player> {
        match n {
            1 => Some(Player::One),
            2 => Some(Player::Two),
            _ => None,
        }
    }
}

impl fmt::Display for Player {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.number())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NodeKind {
    Chance,
    Decision { player: Player, infoset: usize },
    Terminal { u1: f64 },
}

#[derive(Debug, Clone)]
pub struct Node {
    pub parent: Option<NodeId>,
    /// Label of the edge from the parent (unused at the root).
    pub label: u32,
    /// Probability of the edge from the parent when the parent is a chance
    /// node; 1 otherwise.
    pub chance: f64,
    pub kind: NodeKind,
    first_child: usize,
    num_children: usize,
}

impl Node {
    pub fn children(&self) -> Range<NodeId> {
        self.first_child..self.first_child + self.num_children
    }

    pub fn is_terminal(&self) -> bool {
        matches!(self.kind, NodeKind::Terminal { .. })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Infoset {
    pub name: String,
    pub actions: Vec<u32>,
}

/// Extensive-form game: nature plus two strategic players, single utility
/// `u1` per leaf (player two receives `-u1`).
#[derive(Debug, Clone)]
pub struct Game {
    nodes: Vec<Node>,
    labels: Vec<String>,
    infosets: [Vec<Infoset>; 2],
    num_terminals: usize,
}

impl Game {
    pub fn root(&self) -> NodeId {
        0
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id]
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_terminals(&self) -> usize {
        self.num_terminals
    }

    pub fn infosets(&self, player: Player) -> &[Infoset] {
        &self.infosets[player.index()]
    }

    pub fn label(&self, id: u32) -> &str {
        &self.labels[id as usize]
    }

    pub fn edge_label(&self, node: NodeId) -> &str {
        self.label(self.nodes[node].label)
    }

    /// Edge labels from the root down to `node`, joined by `/`.
    pub fn path(&self, node: NodeId) -> String {
        let mut parts = Vec::new();
        let mut cur = node;
        while let Some(p) = self.nodes[cur].parent {
            parts.push(self.edge_label(cur));
            cur = p;
        }
        parts.reverse();
        parts.join("/")
    }

    /// Checks that no two nodes of the same infoset differ in the owning
    /// player's own history of (infoset, action) pairs.
    pub fn validate_perfect_recall(&self) -> Result<()> {
        // last own (infoset, action) before each node, per player
        const NONE: (usize, usize) = (usize::MAX, usize::MAX);
        type Seen = Option<(NodeId, (usize, usize))>;
        let mut first_seen: [Vec<Seen>; 2] = [vec![None; self.infosets[0].len()], vec![None; self.infosets[1].len()]];
        let mut stack = vec![(self.root(), [NONE, NONE])];
        while let Some((id, last)) = stack.pop() {
            let node = &self.nodes[id];
            match node.kind {
                NodeKind::Terminal { .. } => {}
                NodeKind::Chance => {
                    for c in node.children() {
                        stack.push((c, last));
                    }
                }
                NodeKind::Decision { player, infoset } => {
                    let p = player.index();
                    match first_seen[p][infoset] {
                        None => first_seen[p][infoset] = Some((id, last[p])),
                        Some((other, seen)) if seen != last[p] => {
                            return Err(Error::PerfectRecall {
                                player: player.number(),
                                infoset: self.infosets[p][infoset].name.clone(),
                                path_a: self.path(other),
                                path_b: self.path(id),
                            });
                        }
                        Some(_) => {}
                    }
                    for (a, c) in node.children().enumerate() {
                        let mut next = last;
                        next[p] = (infoset, a);
                        stack.push((c, next));
                    }
                }
            }
        }
        Ok(())
    }

    /// True when every leaf utility is finite; zero-sum holds by
    /// construction because only `u1` is stored.
    pub fn check_utilities(&self) -> Result<()> {
        for (id, n) in self.nodes.iter().enumerate() {
            if let NodeKind::Terminal { u1 } = n.kind {
                if !u1.is_finite() {
                    return Err(Error::Structure(format!("non-finite utility at node {id}")));
                }
            }
        }
        Ok(())
    }
}

/// Incremental tree construction. Children of a node are allocated together
/// when the node is expanded, so every node's children are contiguous.
#[derive(Debug, Default)]
pub struct GameBuilder {
    nodes: Vec<Option<Node>>,
    labels: Vec<String>,
    label_ids: HashMap<String, u32>,
    infosets: [Vec<Infoset>; 2],
    infoset_ids: [HashMap<String, usize>; 2],
}

impl GameBuilder {
    pub fn new() -> Self {
        let mut b = Self::default();
        b.nodes.push(None);
        b.intern("-");
        b
    }

    /// The root node id (always 0).
    pub fn root(&self) -> NodeId {
        0
    }

    fn intern(&mut self, label: &str) -> u32 {
        if let Some(&id) = self.label_ids.get(label) {
            return id;
        }
        let id = self.labels.len() as u32;
        self.labels.push(label.to_string());
        self.label_ids.insert(label.to_string(), id);
        id
    }

    fn slot(&mut self, id: NodeId) -> Result<()> {
        match self.nodes.get(id) {
            None => Err(Error::Structure(format!("unknown node {id}"))),
            Some(Some(n)) if !matches!(n.kind, NodeKind::Terminal { u1 } if u1.is_nan()) => {
                Err(Error::Structure(format!("node {id} expanded twice")))
            }
            Some(_) => Ok(()),
        }
    }

    fn placeholder(&mut self, parent: NodeId, label: u32, chance: f64) -> NodeId {
        let id = self.nodes.len();
        self.nodes.push(Some(Node {
            parent: Some(parent),
            label,
            chance,
            kind: NodeKind::Terminal { u1: f64::NAN },
            first_child: 0,
            num_children: 0,
        }));
        id
    }

    fn assign(&mut self, id: NodeId, kind: NodeKind, children: Range<NodeId>) {
        let (parent, label, chance) = match &self.nodes[id] {
            Some(n) => (n.parent, n.label, n.chance),
            None => (None, 0, 1.0),
        };
        self.nodes[id] = Some(Node {
            parent,
            label,
            chance,
            kind,
            first_child: children.start,
            num_children: children.len(),
        });
    }

    /// Turns `node` into a chance node with the given `(label, probability)`
    /// outcomes and returns the ids of the new children.
    pub fn chance<S: AsRef<str>>(&mut self, node: NodeId, outcomes: &[(S, f64)]) -> Result<Range<NodeId>> {
        self.slot(node)?;
        if outcomes.is_empty() {
            return Err(Error::Structure(format!("chance node {node} without outcomes")));
        }
        let labels: Vec<u32> = outcomes.iter().map(|(l, _)| self.intern(l.as_ref())).collect();
        let start = self.nodes.len();
        for (l, (_, p)) in labels.into_iter().zip(outcomes) {
            self.placeholder(node, l, *p);
        }
        let range = start..self.nodes.len();
        self.assign(node, NodeKind::Chance, range.clone());
        Ok(range)
    }

    /// Turns `node` into a decision node of `player` in the infoset called
    /// `infoset`. Reusing an infoset name with a different action list is an
    /// error.
    pub fn decision<S: AsRef<str>>(
        &mut self,
        node: NodeId,
        player: Player,
        infoset: &str,
        actions: &[S],
    ) -> Result<Range<NodeId>> {
        self.slot(node)?;
        if actions.is_empty() {
            return Err(Error::Structure(format!("decision node {node} without actions")));
        }
        let labels: Vec<u32> = actions.iter().map(|a| self.intern(a.as_ref())).collect();
        let p = player.index();
        let idx = match self.infoset_ids[p].get(infoset) {
            Some(&idx) => {
                if self.infosets[p][idx].actions != labels {
                    return Err(Error::Structure(format!(
                        "infoset {infoset} of player {player} reached with different action sets"
                    )));
                }
                idx
            }
            None => {
                let idx = self.infosets[p].len();
                self.infosets[p].push(Infoset {
                    name: infoset.to_string(),
                    actions: labels.clone(),
                });
                self.infoset_ids[p].insert(infoset.to_string(), idx);
                idx
            }
        };
        let start = self.nodes.len();
        for l in labels {
            self.placeholder(node, l, 1.0);
        }
        let range = start..self.nodes.len();
        self.assign(node, NodeKind::Decision { player, infoset: idx }, range.clone());
        Ok(range)
    }

    pub fn terminal(&mut self, node: NodeId, u1: f64) -> Result<()> {
        self.slot(node)?;
        self.assign(node, NodeKind::Terminal { u1 }, 0..0);
        Ok(())
    }

    pub fn finish(self) -> Result<Game> {
        let mut nodes = Vec::with_capacity(self.nodes.len());
        let mut num_terminals = 0;
        for (id, n) in self.nodes.into_iter().enumerate() {
            let n = n.ok_or_else(|| Error::Structure(format!("node {id} never created")))?;
            match n.kind {
                NodeKind::Terminal { u1 } if u1.is_nan() => {
                    return Err(Error::Structure(format!("node {id} left unexpanded")));
                }
                NodeKind::Terminal { .. } => num_terminals += 1,
                _ => {}
            }
            nodes.push(n);
        }
        let game = Game {
            nodes,
            labels: self.labels,
            infosets: self.infosets,
            num_terminals,
        };
        validate_chance(&game)?;
        game.check_utilities()?;
        Ok(game)
    }
}

fn validate_chance(game: &Game) -> Result<()> {
    for (id, n) in game.nodes.iter().enumerate() {
        if n.kind != NodeKind::Chance {
            continue;
        }
        let mut total = 0.0;
        for c in n.children() {
            let p = game.nodes[c].chance;
            if !(p >= 0.0) {
                return Err(Error::Structure(format!("negative chance probability below node {id}")));
            }
            total += p;
        }
        if (total - 1.0).abs() > CHANCE_SUM_TOL {
            return Err(Error::Structure(format!(
                "chance probabilities at node {id} sum to {total}"
            )));
        }
    }
    Ok(())
}
