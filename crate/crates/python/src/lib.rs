//! Python bindings: game sizes, factorization, solving and the bench grid.

use std::time::Duration;

use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;
use sparsegame::bench::{self, Algorithm, BenchSpec, RunConfig};
use sparsegame::games::GameSpec;
use sparsegame::{factor as factor_matrix, Error, FactorConfig, SequenceForm, Termination};

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Io(io) => PyOSError::new_err(io.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn build(spec: &str) -> PyResult<(sparsegame::Game, SequenceForm)> {
    let spec: GameSpec = spec.parse().map_err(py_err)?;
    let game = spec.generate().map_err(py_err)?;
    let sf = SequenceForm::from_game(&game, true).map_err(py_err)?;
    Ok((game, sf))
}

fn duration(secs: Option<f64>) -> PyResult<Option<Duration>> {
    secs.map(|s| Duration::try_from_secs_f64(s).map_err(|_| PyValueError::new_err("time_limit must be >= 0")))
        .transpose()
}

fn termination_name(t: Termination) -> &'static str {
    match t {
        Termination::GapReached => "gap_reached",
        Termination::TimeLimit => "time_limit",
        Termination::IterationCap => "iteration_cap",
    }
}

/// Sizes of a game: sequences per player, leaves and payoff nonzeros.
#[pyfunction]
fn game_sizes<'py>(py: Python<'py>, spec: &str) -> PyResult<Bound<'py, PyDict>> {
    let (game, sf) = build(spec)?;
    let d = PyDict::new(py);
    d.set_item("sequences1", sf.tp1.num_sequences())?;
    d.set_item("sequences2", sf.tp2.num_sequences())?;
    d.set_item("terminals", game.num_terminals())?;
    d.set_item("nnz", sf.matrix().nnz())?;
    Ok(d)
}

/// Factors the normalized payoff matrix of a game.
#[pyfunction]
#[pyo3(signature = (spec, seed = 0))]
fn factor<'py>(py: Python<'py>, spec: &str, seed: u64) -> PyResult<Bound<'py, PyDict>> {
    let (_, sf) = build(spec)?;
    let f = factor_matrix(
        sf.matrix(),
        &FactorConfig {
            seed,
            ..Default::default()
        },
    )
    .map_err(py_err)?;
    let d = PyDict::new(py);
    d.set_item("nnz", sf.matrix().nnz())?;
    d.set_item("fnnz", f.fnnz())?;
    d.set_item("rank", f.rank())?;
    d.set_item("max_deviation", f.max_deviation(sf.matrix()).map_err(py_err)?)?;
    Ok(d)
}

/// Solves a game. `algo` is `lpsparse`, `lpsparse-factored`, a DCFR preset
/// or `dcfr:A:B:G`. The value is player one's, in game units.
#[pyfunction]
#[pyo3(signature = (spec, algo = "lpsparse", gap = 1e-4, time_limit = None, seed = 0))]
fn solve<'py>(
    py: Python<'py>,
    spec: &str,
    algo: &str,
    gap: f64,
    time_limit: Option<f64>,
    seed: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let (_, sf) = build(spec)?;
    let algorithm: Algorithm = algo.parse().map_err(py_err)?;
    let config = RunConfig {
        gap_target: gap,
        time_limit: duration(time_limit)?,
        seed,
        ..Default::default()
    };
    let out = py.detach(|| bench::run(&sf, &algorithm, &config)).map_err(py_err)?;
    let r = out.result;
    let d = PyDict::new(py);
    d.set_item("value", r.value * sf.payoff.unit())?;
    d.set_item("gap", r.gap)?;
    d.set_item("iterations", r.iterations)?;
    d.set_item("termination", termination_name(r.termination))?;
    d.set_item("x", r.x.x)?;
    d.set_item("y", r.y.x)?;
    let trace: Vec<(f64, u64, f64, String)> = r
        .trace
        .rows()
        .iter()
        .map(|t| (t.elapsed_s, t.iteration, t.nash_gap, t.phase.to_string()))
        .collect();
    d.set_item("trace", trace)?;
    Ok(d)
}

/// Runs the (game, algorithm) grid and returns one dict per cell.
#[pyfunction]
#[pyo3(signature = (games, algos, gap = 1e-4, time_limit = None, seed = 0, threads = 1))]
fn run_bench<'py>(
    py: Python<'py>,
    games: Vec<String>,
    algos: Vec<String>,
    gap: f64,
    time_limit: Option<f64>,
    seed: u64,
    threads: usize,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let spec = BenchSpec {
        games: games
            .iter()
            .map(|g| g.parse())
            .collect::<Result<_, _>>()
            .map_err(py_err)?,
        algorithms: algos
            .iter()
            .map(|a| a.parse())
            .collect::<Result<_, _>>()
            .map_err(py_err)?,
        run: RunConfig {
            gap_target: gap,
            time_limit: duration(time_limit)?,
            seed,
            ..Default::default()
        },
        factor_seed: seed,
        threads,
    };
    let rows = py.detach(|| bench::run_bench(&spec));
    let mut out = Vec::new();
    for row in rows {
        for cell in row.cells {
            let d = PyDict::new(py);
            d.set_item("game", &row.game)?;
            d.set_item("sequences", row.sequences)?;
            d.set_item("nnz", row.nnz)?;
            d.set_item("fnnz", row.fnnz)?;
            d.set_item("algorithm", cell.algorithm.to_string())?;
            match cell.outcome {
                Ok(s) => {
                    d.set_item("termination", termination_name(s.termination))?;
                    d.set_item("gap", s.gap)?;
                    d.set_item("seconds", s.seconds)?;
                    d.set_item("iterations", s.iterations)?;
                }
                Err(e) => d.set_item("error", e)?,
            }
            out.push(d);
        }
    }
    Ok(out)
}

#[pymodule]
fn pysparsegame(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(game_sizes, m)?)?;
    m.add_function(wrap_pyfunction!(factor, m)?)?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(run_bench, m)?)?;
    m.add("PRESETS", sparsegame::DcfrParams::PRESETS.to_vec())?;
    Ok(())
}
