//! Solver pipelines and the benchmark grid behind the `solve` and `bench`
//! commands.

use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use crate::alm::{solve_lp, AlmConfig};
use crate::cfr::{solve_cfr, CfrConfig, DcfrParams};
use crate::error::{Error, Result};
use crate::eval::nash_gap;
use crate::factor::{factor, FactorConfig, Factorization};
use crate::games::GameSpec;
use crate::payoff::SequenceForm;
use crate::trace::{Phase, SolveResult, SolveTrace, Termination};

#[derive(Debug, Clone, PartialEq)]
pub enum Algorithm {
    LpSparse { factored: bool },
    Dcfr { name: String, params: DcfrParams },
}

impl Algorithm {
    pub fn dcfr(params: DcfrParams) -> Self {
        let name = DcfrParams::PRESETS
            .iter()
            .find(|p| DcfrParams::preset(p).ok() == Some(params))
            .map_or_else(
                || format!("dcfr:{}:{}:{}", params.alpha, params.beta, params.gamma),
                |p| p.to_string(),
            );
        Algorithm::Dcfr { name, params }
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    /// `lpsparse`, `lpsparse-factored`, a DCFR preset name, or
    /// `dcfr:ALPHA:BETA:GAMMA`.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lpsparse" => return Ok(Algorithm::LpSparse { factored: false }),
            "lpsparse-factored" => return Ok(Algorithm::LpSparse { factored: true }),
            _ => {}
        }
        if let Some(rest) = s.strip_prefix("dcfr:") {
            let parts: Vec<&str> = rest.split(':').collect();
            let nums: std::result::Result<Vec<f64>, _> = parts.iter().map(|p| p.parse::<f64>()).collect();
            return match nums {
                Ok(v) if v.len() == 3 => Ok(Self::dcfr(DcfrParams::new(v[0], v[1], v[2])?)),
                _ => Err(Error::Parameter(format!("expected dcfr:ALPHA:BETA:GAMMA, got `{s}`"))),
            };
        }
        let params = DcfrParams::preset(s).map_err(|_| {
            Error::Parameter(format!(
                "unknown algorithm `{s}`; expected lpsparse, lpsparse-factored, {} or dcfr:A:B:G",
                DcfrParams::PRESETS.join(", ")
            ))
        })?;
        Ok(Algorithm::Dcfr {
            name: s.to_string(),
            params,
        })
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Algorithm::LpSparse { factored: false } => f.write_str("lpsparse"),
            Algorithm::LpSparse { factored: true } => f.write_str("lpsparse-factored"),
            Algorithm::Dcfr { name, .. } => f.write_str(name),
        }
    }
}

/// Settings shared by every pipeline. Solver-specific fields are taken from
/// `alm` and `cfr`; their gap, time and seed fields are overridden.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub gap_target: f64,
    pub time_limit: Option<Duration>,
    pub seed: u64,
    /// Give DCFR factored gradients.
    pub factor_gradients: bool,
    pub alm: AlmConfig,
    pub cfr: CfrConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            gap_target: 1e-4,
            time_limit: None,
            seed: 0,
            factor_gradients: false,
            alm: AlmConfig::default(),
            cfr: CfrConfig::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub result: SolveResult,
    pub factorization: Option<Factorization>,
}

/// Factors `A` with the clock already running and charges the time to the
/// trace as a `factorize` row, stamped with the gap of the uniform pair.
fn factor_traced(sf: &SequenceForm, seed: u64, trace: &mut SolveTrace) -> Result<Factorization> {
    let f = factor(
        sf.matrix(),
        &FactorConfig {
            seed,
            ..Default::default()
        },
    )?;
    let gap = nash_gap(sf.matrix(), &sf.tp1, &sf.tp2, &sf.tp1.uniform(), &sf.tp2.uniform())?;
    trace.record(0, gap, Phase::Factorize);
    Ok(f)
}

fn remaining(limit: Option<Duration>, trace: &SolveTrace) -> Option<Duration> {
    limit.map(|t| t.saturating_sub(trace.elapsed()))
}

/// Runs one algorithm on one game.
pub fn run(sf: &SequenceForm, algorithm: &Algorithm, config: &RunConfig) -> Result<RunOutcome> {
    let mut trace = SolveTrace::start();
    match algorithm {
        Algorithm::LpSparse { factored } => {
            let f = if *factored {
                Some(factor_traced(sf, config.seed, &mut trace)?)
            } else {
                None
            };
            let alm = AlmConfig {
                gap_target: config.gap_target,
                time_limit: remaining(config.time_limit, &trace),
                seed: config.seed,
                ..config.alm.clone()
            };
            let result = solve_lp(sf, f.as_ref(), &alm, trace)?;
            Ok(RunOutcome {
                result,
                factorization: f,
            })
        }
        Algorithm::Dcfr { params, .. } => {
            let f = if config.factor_gradients {
                Some(factor_traced(sf, config.seed, &mut trace)?)
            } else {
                None
            };
            let cfr = CfrConfig {
                params: *params,
                gap_target: config.gap_target,
                time_limit: remaining(config.time_limit, &trace),
                ..config.cfr.clone()
            };
            let result = solve_cfr(sf, &cfr, f.as_ref(), trace)?;
            Ok(RunOutcome {
                result,
                factorization: f,
            })
        }
    }
}

#[derive(Debug, Clone)]
pub struct BenchSpec {
    pub games: Vec<GameSpec>,
    pub algorithms: Vec<Algorithm>,
    pub run: RunConfig,
    /// Seed of the factorization reported in the fnnz column.
    pub factor_seed: u64,
    /// Cells run concurrently.
    pub threads: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellStats {
    pub gap: f64,
    pub seconds: f64,
    pub iterations: u64,
    pub termination: Termination,
}

impl CellStats {
    pub fn converged(&self) -> bool {
        self.termination == Termination::GapReached
    }
}

#[derive(Debug, Clone)]
pub struct BenchCell {
    pub algorithm: Algorithm,
    /// Failure messages are kept so one bad cell does not stop the grid.
    pub outcome: std::result::Result<CellStats, String>,
}

impl BenchCell {
    pub fn converged(&self) -> bool {
        self.outcome.as_ref().is_ok_and(CellStats::converged)
    }
}

#[derive(Debug, Clone)]
pub struct BenchRow {
    pub game: String,
    pub gap_target: f64,
    /// `None` when the game itself failed to build.
    pub sequences: Option<usize>,
    pub nnz: Option<usize>,
    pub fnnz: Option<usize>,
    pub cells: Vec<BenchCell>,
}

/// Runs one cell in this process.
pub fn run_cell(
    sf: &SequenceForm,
    algorithm: &Algorithm,
    config: &RunConfig,
) -> std::result::Result<CellStats, String> {
    let started = Instant::now();
    run(sf, algorithm, config)
        .map(|o| CellStats {
            gap: o.result.gap,
            seconds: started.elapsed().as_secs_f64(),
            iterations: o.result.iterations,
            termination: o.result.termination,
        })
        .map_err(|e| e.to_string())
}

/// Runs every (game, algorithm) cell in this process.
pub fn run_bench(spec: &BenchSpec) -> Vec<BenchRow> {
    run_bench_with(spec, |_, sf, algorithm| run_cell(sf, algorithm, &spec.run))
}

/// Runs every (game, algorithm) cell through `runner`. Games are built once;
/// cells run on up to `threads` worker threads.
pub fn run_bench_with<F>(spec: &BenchSpec, runner: F) -> Vec<BenchRow>
where
    F: Fn(&GameSpec, &SequenceForm, &Algorithm) -> std::result::Result<CellStats, String> + Sync,
{
    let mut rows = Vec::with_capacity(spec.games.len());
    let mut jobs = Vec::new();
    let mut forms = Vec::new();
    for (g, game) in spec.games.iter().enumerate() {
        let built = game.generate().and_then(|gm| SequenceForm::from_game(&gm, true));
        let mut row = BenchRow {
            game: game.to_string(),
            gap_target: spec.run.gap_target,
            sequences: None,
            nnz: None,
            fnnz: None,
            cells: Vec::new(),
        };
        match built {
            Ok(sf) => {
                row.sequences = Some(sf.total_sequences());
                row.nnz = Some(sf.matrix().nnz());
                row.fnnz = factor(
                    sf.matrix(),
                    &FactorConfig {
                        seed: spec.factor_seed,
                        ..Default::default()
                    },
                )
                .ok()
                .map(|f| f.fnnz());
                jobs.extend((0..spec.algorithms.len()).map(|a| (g, a)));
                forms.push(Some(sf));
            }
            Err(e) => {
                row.cells = spec
                    .algorithms
                    .iter()
                    .map(|a| BenchCell {
                        algorithm: a.clone(),
                        outcome: Err(e.to_string()),
                    })
                    .collect();
                forms.push(None);
            }
        }
        rows.push(row);
    }

    let queue = Mutex::new(jobs.into_iter());
    let done = Mutex::new(Vec::new());
    std::thread::scope(|s| {
        for _ in 0..spec.threads.max(1) {
            s.spawn(|| loop {
                let Some((g, a)) = queue.lock().expect("queue lock").next() else {
                    break;
                };
                let sf = forms[g].as_ref().expect("only built games are queued");
                let outcome = runner(&spec.games[g], sf, &spec.algorithms[a]);
                done.lock().expect("result lock").push((g, a, outcome));
            });
        }
    });
    let mut done = done.into_inner().expect("result lock");
    done.sort_by_key(|&(g, a, _)| (g, a));
    for (g, a, outcome) in done {
        rows[g].cells.push(BenchCell {
            algorithm: spec.algorithms[a].clone(),
            outcome,
        });
    }
    rows
}

fn opt(v: Option<usize>) -> String {
    v.map_or_else(|| "-".into(), |v| v.to_string())
}

fn cell_text(c: &BenchCell) -> String {
    match &c.outcome {
        Ok(s) if s.converged() => format!("{:.2}s", s.seconds),
        Ok(s) => format!("{} ({:.1e})", s.termination, s.gap),
        Err(_) => "error".into(),
    }
}

/// Table 1 style text: game, gap, sizes, then one time column per algorithm.
pub fn write_table<W: Write>(rows: &[BenchRow], algorithms: &[Algorithm], mut w: W) -> Result<()> {
    let mut header = vec![
        "Game".to_string(),
        "Gap".into(),
        "|S1|+|S2|".into(),
        "nnz".into(),
        "fnnz".into(),
    ];
    header.extend(algorithms.iter().map(ToString::to_string));
    let mut lines = vec![header];
    for r in rows {
        let mut line = vec![
            r.game.clone(),
            format!("{:e}", r.gap_target),
            opt(r.sequences),
            opt(r.nnz),
            opt(r.fnnz),
        ];
        line.extend(r.cells.iter().map(cell_text));
        lines.push(line);
    }
    let widths: Vec<usize> = (0..lines[0].len())
        .map(|k| lines.iter().map(|l| l.get(k).map_or(0, String::len)).max().unwrap_or(0))
        .collect();
    for l in &lines {
        let cells: Vec<String> = l.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
        writeln!(w, "{}", cells.join("  ").trim_end())?;
    }
    for r in rows {
        for c in &r.cells {
            if let Err(e) = &c.outcome {
                writeln!(w, "{} / {}: {e}", r.game, c.algorithm)?;
            }
        }
    }
    Ok(())
}

/// One CSV record per cell.
pub fn write_csv<W: Write>(rows: &[BenchRow], w: W) -> Result<()> {
    let csv_err = |e: csv::Error| Error::Io(std::io::Error::other(e));
    let mut out = csv::Writer::from_writer(w);
    out.write_record([
        "game",
        "gap_target",
        "sequences",
        "nnz",
        "fnnz",
        "algorithm",
        "status",
        "seconds",
        "iterations",
        "gap",
    ])
    .map_err(csv_err)?;
    for r in rows {
        for c in &r.cells {
            let (status, seconds, iterations, gap) = match &c.outcome {
                Ok(s) => (
                    if s.converged() {
                        "converged".to_string()
                    } else {
                        s.termination.to_string()
                    },
                    format!("{:?}", s.seconds),
                    s.iterations.to_string(),
                    format!("{:?}", s.gap),
                ),
                Err(e) => (format!("error: {e}"), String::new(), String::new(), String::new()),
            };
            out.write_record([
                r.game.clone(),
                format!("{:?}", r.gap_target),
                opt(r.sequences),
                opt(r.nnz),
                opt(r.fnnz),
                c.algorithm.to_string(),
                status,
                seconds,
                iterations,
                gap,
            ])
            .map_err(csv_err)?;
        }
    }
    out.flush()?;
    Ok(())
}
