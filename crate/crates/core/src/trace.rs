//! Anytime records of a solve and the shared result type.

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;
use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::treeplex::SequenceStrategy;

pub const CSV_HEADER: [&str; 4] = ["elapsed_s", "iteration", "nash_gap", "phase"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Factorize,
    Solve,
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Phase::Factorize => "factorize",
            Phase::Solve => "solve",
        })
    }
}

impl FromStr for Phase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "factorize" => Ok(Phase::Factorize),
            "solve" => Ok(Phase::Solve),
            _ => Err(Error::Parameter(format!("unknown phase `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub elapsed_s: f64,
    pub iteration: u64,
    pub nash_gap: f64,
    pub phase: Phase,
}

/// Time-stamped Nash gaps. Timestamps are strictly increasing; a row that
/// would tie its predecessor is nudged forward by one nanosecond.
#[derive(Debug, Clone)]
pub struct SolveTrace {
    start: Instant,
    rows: Vec<TraceRow>,
}

impl Default for SolveTrace {
    fn default() -> Self {
        Self::start()
    }
}

impl SolveTrace {
    /// Starts the clock.
    pub fn start() -> Self {
        Self {
            start: Instant::now(),
            rows: Vec::new(),
        }
    }

    pub fn elapsed(&self) -> Duration {
        self.start.elapsed()
    }

    pub fn rows(&self) -> &[TraceRow] {
        &self.rows
    }

    pub fn last(&self) -> Option<&TraceRow> {
        self.rows.last()
    }

    pub fn record(&mut self, iteration: u64, nash_gap: f64, phase: Phase) {
        let mut t = self.elapsed().as_secs_f64();
        if let Some(prev) = self.rows.last() {
            if t <= prev.elapsed_s {
                t = prev.elapsed_s + 1e-9;
            }
        }
        self.rows.push(TraceRow {
            elapsed_s: t,
            iteration,
            nash_gap: nash_gap.max(0.0),
            phase,
        });
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(CSV_HEADER).map_err(csv_err)?;
        for r in &self.rows {
            out.write_record([
                format!("{:?}", r.elapsed_s),
                r.iteration.to_string(),
                format!("{:?}", r.nash_gap),
                r.phase.to_string(),
            ])
            .map_err(csv_err)?;
        }
        out.flush()?;
        Ok(())
    }

    /// Parses a trace written by `write_csv`, checking the header and the
    /// timestamp order.
    pub fn read_csv<R: Read>(r: R) -> Result<Vec<TraceRow>> {
        let mut rd = csv::Reader::from_reader(r);
        let header = rd.headers().map_err(csv_err)?;
        if header.iter().ne(CSV_HEADER) {
            return Err(Error::parse(1, format!("expected header {}", CSV_HEADER.join(","))));
        }
        let mut rows: Vec<TraceRow> = Vec::new();
        for (k, rec) in rd.records().enumerate() {
            let line = k + 2;
            let rec = rec.map_err(csv_err)?;
            if rec.len() != 4 {
                return Err(Error::parse(line, "expected 4 fields"));
            }
            let field = |i: usize| rec.get(i).unwrap_or_default();
            let bad = |what: &str| Error::parse(line, format!("bad {what}"));
            let row = TraceRow {
                elapsed_s: field(0).parse().map_err(|_| bad("elapsed_s"))?,
                iteration: field(1).parse().map_err(|_| bad("iteration"))?,
                nash_gap: field(2).parse().map_err(|_| bad("nash_gap"))?,
                phase: field(3).parse().map_err(|_| bad("phase"))?,
            };
            if rows.last().is_some_and(|p| row.elapsed_s <= p.elapsed_s) {
                return Err(Error::parse(line, "timestamps must increase"));
            }
            rows.push(row);
        }
        Ok(rows)
    }
}

fn csv_err(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::parse(line, format!("{other:?}")),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    GapReached,
    TimeLimit,
    IterationCap,
}

impl fmt::Display for Termination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Termination::GapReached => "gap reached",
            Termination::TimeLimit => "time limit",
            Termination::IterationCap => "iteration cap",
        })
    }
}

/// Strategies are feasible sequence-form plans. `value` and `gap` are in
/// the units of the payoff matrix the solver saw.
#[derive(Debug, Clone)]
pub struct SolveResult {
    pub x: SequenceStrategy,
    pub y: SequenceStrategy,
    pub gap: f64,
    /// `x^T A y`.
    pub value: f64,
    pub iterations: u64,
    pub termination: Termination,
    pub trace: SolveTrace,
}
