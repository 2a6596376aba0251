//! Line-based game file format.
//!
//! ```text
//! players 2
//! node <id> player=<0|1|2> parent=<id|-> action=<label> [infoset=<name>] [chance=<p>]
//! leaf <id> parent=<id> action=<label> u1=<float> [chance=<p>]
//! ```
//!
//! Player 0 is nature. `chance=` gives the probability of the edge into the
//! node and is present exactly when the parent is a nature node. The root
//! uses `parent=-` and `action=-`. Children appear in action order. Blank
//! lines and lines starting with `#` are ignored. Floats are written in
//! shortest round-trip form, so save followed by load is lossless.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::game::{Game, GameBuilder, NodeId, NodeKind, Player};

pub fn save_game<W: Write>(game: &Game, mut w: W) -> Result<()> {
    writeln!(w, "players 2")?;
    let mut next_id = 0usize;
    // (node, parent's file id)
    let mut stack: Vec<(NodeId, Option<usize>)> = vec![(game.root(), None)];
    while let Some((id, parent)) = stack.pop() {
        let node = game.node(id);
        let my_id = next_id;
        next_id += 1;
        let parent_txt = parent.map_or_else(|| "-".to_string(), |p| p.to_string());
        let action = if parent.is_some() { game.edge_label(id) } else { "-" };
        check_token(action, "action label")?;
        let chance = match node.parent.map(|p| game.node(p).kind) {
            Some(NodeKind::Chance) => format!(" chance={:?}", node.chance),
            _ => String::new(),
        };
        match node.kind {
            NodeKind::Terminal { u1 } => {
                writeln!(w, "leaf {my_id} parent={parent_txt} action={action} u1={u1:?}{chance}")?;
            }
            NodeKind::Chance => {
                writeln!(w, "node {my_id} player=0 parent={parent_txt} action={action}{chance}")?;
            }
            NodeKind::Decision { player, infoset } => {
                let name = &game.infosets(player)[infoset].name;
                check_token(name, "infoset name")?;
                writeln!(
                    w,
                    "node {my_id} player={} parent={parent_txt} action={action} infoset={name}{chance}",
                    player.number()
                )?;
            }
        }
        for c in node.children().rev() {
            stack.push((c, Some(my_id)));
        }
    }
    Ok(())
}

fn check_token(s: &str, what: &str) -> Result<()> {
    if s.is_empty() || s.chars().any(char::is_whitespace) {
        return Err(Error::Structure(format!(
            "{what} `{s}` is empty or contains whitespace"
        )));
    }
    Ok(())
}

#[derive(Debug)]
enum Kind {
    Chance,
    Decision(Player, String),
    Leaf(f64),
}

#[derive(Debug)]
struct Record {
    line: usize,
    id: String,
    parent: Option<String>,
    action: String,
    chance: Option<f64>,
    kind: Kind,
}

pub fn load_game<R: BufRead>(r: R) -> Result<Game> {
    let mut records: Vec<Record> = Vec::new();
    let mut header_seen = false;
    let mut last_line = 0;
    for (no, line) in r.lines().enumerate() {
        let no = no + 1;
        last_line = no;
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut tokens = line.split_whitespace();
        let head = tokens.next().unwrap_or_default();
        if !header_seen {
            if head != "players" || tokens.next() != Some("2") || tokens.next().is_some() {
                return Err(Error::parse(no, "expected header `players 2`"));
            }
            header_seen = true;
            continue;
        }
        let kind_word = head;
        let id = tokens
            .next()
            .ok_or_else(|| Error::parse(no, "missing node id"))?
            .to_string();
        let mut fields: HashMap<&str, &str> = HashMap::new();
        for t in tokens {
            let (k, v) = t
                .split_once('=')
                .ok_or_else(|| Error::parse(no, format!("expected key=value, found `{t}`")))?;
            if fields.insert(k, v).is_some() {
                return Err(Error::parse(no, format!("duplicate field `{k}`")));
            }
        }
        let take = |fields: &mut HashMap<&str, &str>, k: &str| -> Result<String> {
            fields
                .remove(k)
                .map(str::to_string)
                .ok_or_else(|| Error::parse(no, format!("missing field `{k}`")))
        };
        let parent = take(&mut fields, "parent")?;
        let parent = (parent != "-").then_some(parent);
        let action = take(&mut fields, "action")?;
        let chance = match fields.remove("chance") {
            Some(p) => Some(
                p.parse::<f64>()
                    .map_err(|_| Error::parse(no, format!("bad probability `{p}`")))?,
            ),
            None => None,
        };
        let kind = match kind_word {
            "leaf" => {
                let u = take(&mut fields, "u1")?;
                Kind::Leaf(
                    u.parse::<f64>()
                        .map_err(|_| Error::parse(no, format!("bad utility `{u}`")))?,
                )
            }
            "node" => match take(&mut fields, "player")?.as_str() {
                "0" => Kind::Chance,
                p @ ("1" | "2") => {
                    let player = Player::from_number(p.parse().expect("1 or 2")).expect("valid");
                    Kind::Decision(player, take(&mut fields, "infoset")?)
                }
                other => return Err(Error::parse(no, format!("unknown player `{other}`"))),
            },
            other => return Err(Error::parse(no, format!("unknown line kind `{other}`"))),
        };
        if let Some(k) = fields.keys().next() {
            return Err(Error::parse(no, format!("unexpected field `{k}`")));
        }
        records.push(Record {
            line: no,
            id,
            parent,
            action,
            chance,
            kind,
        });
    }
    if !header_seen {
        return Err(Error::parse(last_line + 1, "empty game file"));
    }
    assemble(records, last_line)
}

fn assemble(records: Vec<Record>, last_line: usize) -> Result<Game> {
    let mut index: HashMap<&str, usize> = HashMap::new();
    for (k, r) in records.iter().enumerate() {
        if index.insert(r.id.as_str(), k).is_some() {
            return Err(Error::parse(r.line, format!("duplicate node id `{}`", r.id)));
        }
    }
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); records.len()];
    let mut root = None;
    for (k, r) in records.iter().enumerate() {
        match &r.parent {
            None if root.is_some() => {
                return Err(Error::parse(r.line, "more than one root (parent=-)"));
            }
            None => root = Some(k),
            Some(p) => {
                let &pk = index
                    .get(p.as_str())
                    .ok_or_else(|| Error::parse(r.line, format!("unknown parent node id `{p}`")))?;
                if matches!(records[pk].kind, Kind::Leaf(_)) {
                    return Err(Error::parse(r.line, format!("parent `{p}` is a leaf")));
                }
                children[pk].push(k);
            }
        }
    }
    let root = root.ok_or_else(|| Error::parse(last_line + 1, "no root node (parent=-)"))?;

    let mut b = GameBuilder::new();
    let mut reached = 0usize;
    let mut stack = vec![(root, b.root())];
    while let Some((k, node)) = stack.pop() {
        reached += 1;
        let r = &records[k];
        let kids = &children[k];
        if !matches!(r.kind, Kind::Leaf(_)) && kids.is_empty() {
            return Err(Error::parse(r.line, format!("node `{}` has no children", r.id)));
        }
        let range = match &r.kind {
            Kind::Leaf(u) => {
                b.terminal(node, *u)?;
                continue;
            }
            Kind::Chance => {
                let mut outcomes = Vec::with_capacity(kids.len());
                for &c in kids {
                    let p = records[c]
                        .chance
                        .ok_or_else(|| Error::parse(records[c].line, "child of a nature node needs chance=<p>"))?;
                    outcomes.push((records[c].action.as_str(), p));
                }
                b.chance(node, &outcomes)
                    .map_err(|e| Error::parse(r.line, e.to_string()))?
            }
            Kind::Decision(player, infoset) => {
                if let Some(&c) = kids.iter().find(|&&c| records[c].chance.is_some()) {
                    return Err(Error::parse(records[c].line, "chance=<p> below a player node"));
                }
                let actions: Vec<&str> = kids.iter().map(|&c| records[c].action.as_str()).collect();
                b.decision(node, *player, infoset, &actions)
                    .map_err(|e| Error::parse(r.line, e.to_string()))?
            }
        };
        for (child_node, &c) in range.zip(kids).rev() {
            stack.push((c, child_node));
        }
    }
    if reached != records.len() {
        return Err(Error::Structure(format!(
            "{} node(s) unreachable from the root",
            records.len() - reached
        )));
    }
    b.finish()
}
