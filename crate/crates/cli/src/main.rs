use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use sparsegame::bench::{self, Algorithm, BenchSpec, CellStats, RunConfig};
use sparsegame::factor::upper_triangular_example;
use sparsegame::game::{Game, Player};
use sparsegame::games::{save_game_file, GameSpec};
use sparsegame::lp::{default_orientation, to_standard_form};
use sparsegame::{
    factor, AlmConfig, CfrConfig, DcfrParams, FactorConfig, FactorMode, Orientation, SequenceForm, SparseMatrix,
    Termination,
};

const EXIT_TIME_LIMIT: u8 = 3;
const EXIT_ITERATION_CAP: u8 = 4;

#[derive(Parser)]
#[command(
    name = "sparsegame",
    version,
    about = "Sparse sequence-form solvers for two-player zero-sum games"
)]
struct Cli {
    /// Seed for the factorizer and the randomized solvers.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Bench cells run concurrently (0 = all cores). Other commands ignore it.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    /// Output file: game file, factorization, strategies or bench CSV.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build a game and print its size.
    Generate(GenerateArgs),
    /// Factor a payoff matrix.
    Factor(FactorArgs),
    /// Solve a game to a target Nash gap.
    Solve(SolveArgs),
    /// Run a grid of games and algorithms.
    Bench(BenchArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// kuhn, leduc, sheriff, goofspiel, pennies, rps, or a full spec such as leduc9.
    game: String,
    /// Card ranks for leduc and goofspiel.
    #[arg(long)]
    ranks: Option<usize>,
    /// Sheriff: maximum number of smuggled items.
    #[arg(long = "N", visible_alias = "items")]
    items: Option<usize>,
    /// Sheriff: maximum bribe.
    #[arg(long = "B", visible_alias = "bribe")]
    bribe: Option<usize>,
    /// Also write the normalized payoff matrix as triplet text.
    #[arg(long)]
    matrix: Option<PathBuf>,
}

#[derive(Args)]
struct FactorArgs {
    /// A game spec or game file, `matrix:PATH` for triplet text, or
    /// `triangular:N` for the upper-triangular rank-one example.
    input: String,
    #[arg(long, default_value = "implicit", value_parser = parse_mode)]
    mode: FactorMode,
}

#[derive(Args)]
struct SolveArgs {
    /// A game spec (kuhn, leduc9, sheriff:5:5, ...) or a game file.
    game: String,
    #[arg(long, default_value = "lpsparse", value_parser = ["lpsparse", "dcfr"])]
    algo: String,
    /// Factor the payoff matrix first (DCFR then uses factored gradients).
    #[arg(long)]
    factor: bool,
    /// Target Nash gap on the normalized payoff matrix.
    #[arg(long, default_value_t = 1e-4)]
    gap: f64,
    /// Wall-clock limit in seconds.
    #[arg(long)]
    time_limit: Option<f64>,
    /// CSV trace with columns elapsed_s,iteration,nash_gap,phase.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Write the LP as PREFIX.txt (triplets) and PREFIX.json (labels).
    #[arg(long, value_name = "PREFIX")]
    export_lp: Option<PathBuf>,
    #[arg(long)]
    eta0: Option<f64>,
    #[arg(long)]
    eta_growth: Option<f64>,
    #[arg(long)]
    inner_t0: Option<u64>,
    #[arg(long)]
    inner_step: Option<u64>,
    #[arg(long, value_parser = parse_orientation)]
    orientation: Option<Orientation>,
    #[arg(long)]
    certify_dual: bool,
    /// cfr+, cfr+quad, dcfr or lcfr; --alpha/--beta/--gamma override it.
    #[arg(long)]
    preset: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    beta: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    /// Print one machine-readable summary line; used by `bench --isolate`.
    #[arg(long, hide = true)]
    summary_line: bool,
}

#[derive(Args)]
struct BenchArgs {
    /// Comma-separated game specs.
    #[arg(long, value_delimiter = ',')]
    games: Vec<String>,
    /// Comma-separated algorithms: lpsparse, lpsparse-factored, a DCFR preset or dcfr:A:B:G.
    #[arg(long, value_delimiter = ',', default_value = "lpsparse,cfr+")]
    algos: Vec<String>,
    /// Suite file with `game`, `algo`, `gap` and `time-limit` lines.
    #[arg(long)]
    suite: Option<PathBuf>,
    #[arg(long)]
    gap: Option<f64>,
    /// Per-cell wall-clock limit in seconds.
    #[arg(long)]
    time_limit: Option<f64>,
    /// Run each cell in a fresh child process.
    #[arg(long)]
    isolate: bool,
}

fn parse_mode(s: &str) -> Result<FactorMode, String> {
    match s {
        "explicit" => Ok(FactorMode::Explicit),
        "implicit" => Ok(FactorMode::Implicit),
        _ => Err(format!("expected explicit or implicit, got `{s}`")),
    }
}

fn parse_orientation(s: &str) -> Result<Orientation, String> {
    s.parse().map_err(|e: sparsegame::Error| e.to_string())
}

fn seconds(s: Option<f64>) -> Result<Option<Duration>> {
    s.map(|v| Duration::try_from_secs_f64(v).map_err(|_| anyhow!("time limit must be a nonnegative number, got {v}")))
        .transpose()
}

fn game_spec(s: &str) -> Result<GameSpec> {
    s.parse::<GameSpec>()
        .with_context(|| format!("cannot interpret `{s}` as a game"))
}

fn build(spec: &GameSpec) -> Result<(Game, SequenceForm)> {
    let game = spec.generate().with_context(|| format!("building {spec}"))?;
    let sf = SequenceForm::from_game(&game, true)?;
    Ok((game, sf))
}

fn generate(cli: &Cli, args: &GenerateArgs) -> Result<ExitCode> {
    let family = args.game.to_ascii_lowercase();
    let text = match family.as_str() {
        "leduc" | "goofspiel" => {
            let ranks = args.ranks.ok_or_else(|| anyhow!("{family} needs --ranks"))?;
            format!("{family}:{ranks}")
        }
        "sheriff" => match (args.items, args.bribe) {
            (Some(n), Some(b)) => format!("sheriff:{n}:{b}"),
            _ => bail!("sheriff needs --N and --B"),
        },
        _ => args.game.clone(),
    };
    let spec = game_spec(&text)?;
    let started = Instant::now();
    let (game, sf) = build(&spec)?;
    println!(
        "{spec}: |S1|+|S2| = {} ({} + {}), |Z| = {}, nnz(A) = {} ({:.2}s)",
        sf.total_sequences(),
        sf.tp1.num_sequences(),
        sf.tp2.num_sequences(),
        game.num_terminals(),
        sf.matrix().nnz(),
        started.elapsed().as_secs_f64()
    );
    if let Some(path) = &cli.out {
        save_game_file(&game, path).with_context(|| format!("writing {}", path.display()))?;
        println!("game written to {}", path.display());
    }
    if let Some(path) = &args.matrix {
        sf.matrix().write_triplets(BufWriter::new(create(path)?))?;
        println!("payoff matrix written to {}", path.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn create(path: &Path) -> Result<File> {
    File::create(path).with_context(|| format!("creating {}", path.display()))
}

fn load_matrix(input: &str) -> Result<SparseMatrix> {
    if let Some(path) = input.strip_prefix("matrix:") {
        let f = File::open(path).with_context(|| format!("opening {path}"))?;
        return Ok(SparseMatrix::read_triplets(BufReader::new(f))?);
    }
    if let Some(n) = input.strip_prefix("triangular:") {
        let n: usize = n.parse().with_context(|| format!("bad size in `{input}`"))?;
        if n == 0 {
            bail!("triangular example needs n >= 1");
        }
        return Ok(upper_triangular_example(n));
    }
    Ok(build(&game_spec(input)?)?.1.payoff.matrix)
}

fn factor_cmd(cli: &Cli, args: &FactorArgs) -> Result<ExitCode> {
    let a = load_matrix(&args.input)?;
    let started = Instant::now();
    let f = factor(
        &a,
        &FactorConfig {
            seed: cli.seed,
            mode: args.mode,
        },
    )?;
    let secs = started.elapsed().as_secs_f64();
    let deviation = f
        .check_reconstruction(&a)
        .context("factorization failed its reconstruction check; nothing written")?;
    if f.rank() == 0 {
        println!("no compression; factorization empty (nnz {}, {secs:.2}s)", a.nnz());
    } else {
        println!(
            "nnz {} -> fnnz {} ({:.1}x), {} columns, max deviation {deviation:.1e}, {secs:.2}s",
            a.nnz(),
            f.fnnz(),
            a.nnz() as f64 / f.fnnz() as f64,
            f.rank()
        );
    }
    if let Some(path) = &cli.out {
        f.write(BufWriter::new(create(path)?))?;
        println!("factorization written to {}", path.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn dcfr_params(args: &SolveArgs) -> Result<DcfrParams> {
    let base = match &args.preset {
        Some(name) => DcfrParams::preset(name)?,
        None => DcfrParams::cfr_plus(),
    };
    Ok(DcfrParams::new(
        args.alpha.unwrap_or(base.alpha),
        args.beta.unwrap_or(base.beta),
        args.gamma.unwrap_or(base.gamma),
    )?)
}

fn solve_algorithm(args: &SolveArgs) -> Result<Algorithm> {
    let alm_flags = args.eta0.is_some()
        || args.eta_growth.is_some()
        || args.inner_t0.is_some()
        || args.inner_step.is_some()
        || args.orientation.is_some()
        || args.certify_dual
        || args.export_lp.is_some();
    let cfr_flags = args.preset.is_some() || args.alpha.is_some() || args.beta.is_some() || args.gamma.is_some();
    match args.algo.as_str() {
        "lpsparse" if cfr_flags => bail!("--preset/--alpha/--beta/--gamma apply to --algo dcfr only"),
        "lpsparse" => Ok(Algorithm::LpSparse { factored: args.factor }),
        _ if alm_flags => bail!("LP flags (--eta0, --orientation, --export-lp, ...) apply to --algo lpsparse only"),
        _ => Ok(Algorithm::dcfr(dcfr_params(args)?)),
    }
}

fn write_behavior<W: Write>(
    game: &Game,
    sf: &SequenceForm,
    x: &[&sparsegame::SequenceStrategy; 2],
    mut w: W,
) -> Result<()> {
    writeln!(w, "# player\tinfoset\taction=probability ...")?;
    for (p, plan) in [Player::One, Player::Two].into_iter().zip(x) {
        let behavior = sf.treeplex(p).to_behavior(plan);
        for (k, inf) in game.infosets(p).iter().enumerate() {
            let probs: Vec<String> = inf
                .actions
                .iter()
                .zip(&behavior[k])
                .map(|(&a, pr)| format!("{}={pr}", game.label(a)))
                .collect();
            writeln!(w, "{p}\t{}\t{}", inf.name, probs.join(" "))?;
        }
    }
    Ok(())
}

fn solve(cli: &Cli, args: &SolveArgs) -> Result<ExitCode> {
    let algorithm = solve_algorithm(args)?;
    let spec = game_spec(&args.game)?;
    let (game, sf) = build(&spec)?;
    let alm_default = AlmConfig::default();
    let config = RunConfig {
        gap_target: args.gap,
        time_limit: seconds(args.time_limit)?,
        seed: cli.seed,
        factor_gradients: args.factor,
        alm: AlmConfig {
            eta0: args.eta0.unwrap_or(alm_default.eta0),
            eta_growth: args.eta_growth.unwrap_or(alm_default.eta_growth),
            inner_t0: args.inner_t0.unwrap_or(alm_default.inner_t0),
            inner_step: args.inner_step.unwrap_or(alm_default.inner_step),
            orientation: args.orientation,
            certify_dual: args.certify_dual,
            ..alm_default
        },
        cfr: CfrConfig::default(),
    };
    if let Some(prefix) = &args.export_lp {
        let o = args.orientation.unwrap_or_else(|| default_orientation(&sf));
        let lp = to_standard_form(&sf.lp()?, o)?;
        let txt = prefix.with_extension("txt");
        let json = prefix.with_extension("json");
        lp.export(BufWriter::new(create(&txt)?), BufWriter::new(create(&json)?))?;
        eprintln!("LP ({o}) written to {} and {}", txt.display(), json.display());
    }
    let started = Instant::now();
    let outcome = bench::run(&sf, &algorithm, &config)?;
    let secs = started.elapsed().as_secs_f64();
    let r = &outcome.result;
    if let Some(path) = &args.trace {
        r.trace.write_csv(BufWriter::new(create(path)?))?;
    }
    if let Some(path) = &cli.out {
        write_behavior(&game, &sf, &[&r.x, &r.y], BufWriter::new(create(path)?))?;
    }
    if args.summary_line {
        let status = match r.termination {
            Termination::GapReached => "gap",
            Termination::TimeLimit => "time",
            Termination::IterationCap => "cap",
        };
        println!("summary,{status},{:e},{},{secs}", r.gap, r.iterations);
    } else {
        println!(
            "game {spec}: |S1|+|S2| = {}, nnz(A) = {}",
            sf.total_sequences(),
            sf.matrix().nnz()
        );
        if let Some(f) = &outcome.factorization {
            println!("factorization: fnnz {} in {} columns", f.fnnz(), f.rank());
        }
        println!(
            "algorithm {algorithm}: {} after {} iterations, {secs:.2}s",
            r.termination, r.iterations
        );
        println!("nash gap {:.3e} (normalized)", r.gap);
        println!("game value {:.8} (player one)", r.value * sf.payoff.unit());
    }
    Ok(match r.termination {
        Termination::GapReached => ExitCode::SUCCESS,
        Termination::TimeLimit => ExitCode::from(EXIT_TIME_LIMIT),
        Termination::IterationCap => ExitCode::from(EXIT_ITERATION_CAP),
    })
}

#[derive(Default)]
struct Suite {
    games: Vec<String>,
    algos: Vec<String>,
    gap: Option<f64>,
    time_limit: Option<f64>,
}

/// Reads `game SPEC`, `algo NAME`, `gap X` and `time-limit SECONDS` lines;
/// `#` starts a comment.
fn read_suite(path: &Path) -> Result<Suite> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let mut suite = Suite::default();
    for (n, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once(char::is_whitespace)
            .map(|(k, v)| (k, v.trim()))
            .ok_or_else(|| anyhow!("{}:{}: expected `key value`", path.display(), n + 1))?;
        let num = |v: &str| {
            v.parse::<f64>()
                .with_context(|| format!("{}:{}: bad number `{v}`", path.display(), n + 1))
        };
        match key {
            "game" => suite.games.push(value.to_string()),
            "algo" => suite.algos.push(value.to_string()),
            "gap" => suite.gap = Some(num(value)?),
            "time-limit" => suite.time_limit = Some(num(value)?),
            _ => bail!("{}:{}: unknown key `{key}`", path.display(), n + 1),
        }
    }
    Ok(suite)
}

fn child_args(game: &GameSpec, algorithm: &Algorithm, config: &RunConfig) -> Vec<String> {
    let mut v = vec!["solve".to_string(), game.to_string(), "--summary-line".into()];
    match algorithm {
        Algorithm::LpSparse { factored } => {
            v.extend(["--algo".into(), "lpsparse".into()]);
            if *factored {
                v.push("--factor".into());
            }
        }
        Algorithm::Dcfr { params, .. } => {
            v.extend(["--algo".into(), "dcfr".into()]);
            for (flag, x) in [
                ("--alpha", params.alpha),
                ("--beta", params.beta),
                ("--gamma", params.gamma),
            ] {
                v.extend([flag.to_string(), x.to_string()]);
            }
        }
    }
    v.extend([
        "--gap".into(),
        config.gap_target.to_string(),
        "--seed".into(),
        config.seed.to_string(),
    ]);
    if let Some(t) = config.time_limit {
        v.extend(["--time-limit".into(), t.as_secs_f64().to_string()]);
    }
    v
}

fn run_child(game: &GameSpec, algorithm: &Algorithm, config: &RunConfig) -> Result<CellStats, String> {
    let exe = std::env::current_exe().map_err(|e| e.to_string())?;
    let out = Command::new(exe)
        .args(child_args(game, algorithm, config))
        .output()
        .map_err(|e| e.to_string())?;
    let stdout = String::from_utf8_lossy(&out.stdout);
    let Some(line) = stdout.lines().find_map(|l| l.strip_prefix("summary,")) else {
        let stderr = String::from_utf8_lossy(&out.stderr);
        return Err(format!("child exited with {}: {}", out.status, stderr.trim()));
    };
    let f: Vec<&str> = line.split(',').collect();
    let bad = || format!("malformed summary line `{line}`");
    if f.len() != 4 {
        return Err(bad());
    }
    let termination = match f[0] {
        "gap" => Termination::GapReached,
        "time" => Termination::TimeLimit,
        "cap" => Termination::IterationCap,
        _ => return Err(bad()),
    };
    Ok(CellStats {
        termination,
        gap: f[1].parse().map_err(|_| bad())?,
        iterations: f[2].parse().map_err(|_| bad())?,
        seconds: f[3].parse().map_err(|_| bad())?,
    })
}

fn bench_cmd(cli: &Cli, args: &BenchArgs) -> Result<ExitCode> {
    let mut suite = match &args.suite {
        Some(p) => read_suite(p)?,
        None => Suite::default(),
    };
    suite
        .games
        .extend(args.games.iter().filter(|g| !g.trim().is_empty()).cloned());
    if suite.algos.is_empty() {
        suite.algos = args.algos.clone();
    }
    let games = suite.games.iter().map(|g| game_spec(g)).collect::<Result<Vec<_>>>()?;
    let algorithms = suite
        .algos
        .iter()
        .map(|a| a.parse::<Algorithm>().map_err(anyhow::Error::from))
        .collect::<Result<Vec<_>>>()?;
    let threads = match cli.threads {
        0 => std::thread::available_parallelism().map_or(1, |n| n.get()),
        n => n,
    };
    let spec = BenchSpec {
        games,
        algorithms,
        run: RunConfig {
            gap_target: args.gap.or(suite.gap).unwrap_or(1e-4),
            time_limit: seconds(args.time_limit.or(suite.time_limit))?,
            seed: cli.seed,
            ..Default::default()
        },
        factor_seed: cli.seed,
        threads,
    };
    let rows = if args.isolate {
        bench::run_bench_with(&spec, |game, _, algorithm| run_child(game, algorithm, &spec.run))
    } else {
        bench::run_bench(&spec)
    };
    bench::write_table(&rows, &spec.algorithms, io::stdout().lock())?;
    if let Some(path) = &cli.out {
        bench::write_csv(&rows, BufWriter::new(create(path)?))?;
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Cmd::Generate(a) => generate(&cli, a),
        Cmd::Factor(a) => factor_cmd(&cli, a),
        Cmd::Solve(a) => solve(&cli, a),
        Cmd::Bench(a) => bench_cmd(&cli, a),
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e:#}");
        ExitCode::FAILURE
    })
}
