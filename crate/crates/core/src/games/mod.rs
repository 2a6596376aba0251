//! Game generators and the textual game format.

mod format;
mod goofspiel;
mod kuhn;
mod leduc;
mod sheriff;
mod small;

use std::fmt;
use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::game::Game;

pub use format::{load_game, save_game};
pub use goofspiel::goofspiel;
pub use kuhn::kuhn;
pub use leduc::leduc;
pub use sheriff::sheriff;
pub use small::{matching_pennies, matrix_game, rock_paper_scissors};

/// A game family plus its parameters. Every generator is deterministic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GameSpec {
    Kuhn,
    Leduc { ranks: usize },
    Sheriff { max_items: usize, max_bribe: usize },
    Goofspiel { ranks: usize },
    MatchingPennies,
    RockPaperScissors,
    File(PathBuf),
}

impl GameSpec {
    pub fn generate(&self) -> Result<Game> {
        match self {
            GameSpec::Kuhn => kuhn(),
            GameSpec::Leduc { ranks } => leduc(*ranks),
            GameSpec::Sheriff { max_items, max_bribe } => sheriff(*max_items, *max_bribe),
            GameSpec::Goofspiel { ranks } => goofspiel(*ranks),
            GameSpec::MatchingPennies => matching_pennies(),
            GameSpec::RockPaperScissors => rock_paper_scissors(),
            GameSpec::File(path) => load_game_file(path),
        }
    }
}

impl fmt::Display for GameSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GameSpec::Kuhn => write!(f, "kuhn"),
            GameSpec::Leduc { ranks } => write!(f, "leduc{ranks}"),
            GameSpec::Sheriff { max_items, max_bribe } => write!(f, "sheriff:{max_items}:{max_bribe}"),
            GameSpec::Goofspiel { ranks } => write!(f, "goofspiel{ranks}"),
            GameSpec::MatchingPennies => write!(f, "pennies"),
            GameSpec::RockPaperScissors => write!(f, "rps"),
            GameSpec::File(p) => write!(f, "{}", p.display()),
        }
    }
}

/// Accepts `kuhn`, `pennies`, `rps`, `leduc9` or `leduc:9`, `goofspiel4` or
/// `goofspiel:4`, `sheriff:N:B`, and `file:PATH`. Anything else that names an
/// existing file or looks like a path is loaded as a game file.
impl FromStr for GameSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let lower = s.to_ascii_lowercase();
        let param = |prefix: &str| -> Option<Result<Vec<usize>>> {
            let rest = lower.strip_prefix(prefix)?;
            let rest = rest.strip_prefix(':').unwrap_or(rest);
            if rest.is_empty() {
                return Some(Ok(Vec::new()));
            }
            Some(
                rest.split(':')
                    .map(|t| {
                        t.parse::<usize>()
                            .map_err(|_| Error::Parameter(format!("bad parameter `{t}` in `{s}`")))
                    })
                    .collect(),
            )
        };
        let exact = |n: usize, v: Vec<usize>| -> Result<Vec<usize>> {
            if v.len() == n {
                Ok(v)
            } else {
                Err(Error::Parameter(format!("`{s}` takes {n} parameter(s)")))
            }
        };
        match lower.as_str() {
            "kuhn" => return Ok(GameSpec::Kuhn),
            "pennies" | "matching_pennies" => return Ok(GameSpec::MatchingPennies),
            "rps" => return Ok(GameSpec::RockPaperScissors),
            _ => {}
        }
        if let Some(path) = s.strip_prefix("file:") {
            return Ok(GameSpec::File(PathBuf::from(path)));
        }
        if let Some(v) = param("leduc") {
            let v = exact(1, v?)?;
            return Ok(GameSpec::Leduc { ranks: v[0] });
        }
        if let Some(v) = param("goofspiel") {
            let v = exact(1, v?)?;
            return Ok(GameSpec::Goofspiel { ranks: v[0] });
        }
        if let Some(v) = param("sheriff") {
            let v = exact(2, v?)?;
            return Ok(GameSpec::Sheriff {
                max_items: v[0],
                max_bribe: v[1],
            });
        }
        // path-like strings go to the loader so a missing file reports I/O
        if Path::new(s).is_file() || s.contains(['/', '\\', '.']) {
            return Ok(GameSpec::File(PathBuf::from(s)));
        }
        Err(Error::Parameter(format!("unknown game `{s}`")))
    }
}

pub fn load_game_file(path: impl AsRef<Path>) -> Result<Game> {
    load_game(BufReader::new(File::open(path)?))
}

pub fn save_game_file(game: &Game, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    save_game(game, &mut w)?;
    std::io::Write::flush(&mut w)?;
    Ok(())
}
