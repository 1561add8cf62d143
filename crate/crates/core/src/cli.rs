//! Command-line front end.
//!
//! Exit codes: 0 on success, 2 for configuration or usage errors, 3 for
//! runtime failures. Configuration is fully validated before anything is
//! written.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::config::{Config, DEFAULT_CONFIG};
use crate::linkphys::LinkEvaluator;
use crate::router::{no_path_line, optimal_entanglement_path, PathQuery};
use crate::simkit::{run_coherence_sweep, run_sweep, write_results, PointResult, Scenario};
use crate::spacetime::{build_schedule, build_spacetime_graph, dump_snapshot};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "leoqnet",
    version,
    about = "Entanglement distribution over LEO constellations"
)]
pub struct Cli {
    /// Scenario file (TOML); the built-in reference scenario when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR", default_value = "out")]
    pub out: PathBuf,
    /// Overrides the configured seed.
    #[arg(long, global = true, value_name = "N")]
    pub seed: Option<u64>,
    /// Worker threads; defaults to the machine's parallelism. Outputs do not depend on it.
    #[arg(long, global = true, value_name = "N")]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Dump coalesced snapshots and the space-time graph over the configured horizon.
    Snapshots,
    /// Find the best entanglement path for one query.
    Route {
        /// Source node, e.g. sat-3 or ground-lux.
        #[arg(long)]
        source: String,
        /// Destination node.
        #[arg(long)]
        dest: String,
        /// Transmission start time, s.
        #[arg(long, default_value_t = 0.0)]
        t_start: f64,
    },
    /// Run both strategies at every transmission time and write metrics.
    Simulate,
    /// Repeat the simulation for every configured coherence time.
    SweepCoherence,
}

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Runtime(_) => EXIT_RUNTIME,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) | CliError::Runtime(m) => f.write_str(m),
        }
    }
}

fn runtime(e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(e.to_string())
}

fn io_err(path: &Path) -> impl Fn(io::Error) -> CliError + '_ {
    move |e| CliError::Runtime(format!("{}: {e}", path.display()))
}

fn load_config(path: Option<&Path>) -> Result<Config, CliError> {
    let text = match path {
        Some(p) => fs::read_to_string(p).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?,
        None => DEFAULT_CONFIG.to_string(),
    };
    let origin = path.map_or_else(|| "<built-in>".to_string(), |p| p.display().to_string());
    Config::from_toml(&text).map_err(|e| CliError::Config(format!("{origin}: {e}")))
}

fn scenario(cli: &Cli) -> Result<Scenario, CliError> {
    let cfg = load_config(cli.config.as_deref())?;
    let mut s = cfg.scenario().map_err(|e| CliError::Config(e.to_string()))?;
    if let Some(seed) = cli.seed {
        s.seed = seed;
    }
    Ok(s)
}

fn summary_line(r: &PointResult, out: &mut (dyn Write + Send)) -> io::Result<()> {
    let m = &r.record;
    writeln!(
        out,
        "t={:.8e} strategy={} t_c={:.8e} path_found={} hops={} drop_rate={:.8e} throughput={:.8e} mean_fidelity={:.8e}",
        m.transmission_time,
        m.strategy.as_str(),
        m.coherence_time,
        m.path_found,
        m.hop_count,
        m.drop_rate,
        m.throughput,
        m.mean_fidelity
    )
}

fn cmd_snapshots(s: &Scenario, out_dir: &Path, out: &mut (dyn Write + Send)) -> Result<(), CliError> {
    let (schedule, snaps) = build_schedule(&s.network, 0.0, s.horizon, s.sample_dt).map_err(runtime)?;
    let evaluator = LinkEvaluator::new(s.physics.clone()).map_err(runtime)?;
    let graph =
        build_spacetime_graph(&s.network, &schedule, &snaps, &evaluator, s.memory, s.weights).map_err(runtime)?;
    let name = |n| s.network.node_name(n);
    let snap_dir = out_dir.join("snapshots");
    fs::create_dir_all(&snap_dir).map_err(io_err(&snap_dir))?;
    for snap in &snaps {
        let p = snap_dir.join(format!("snapshot_{:05}.txt", snap.index));
        fs::write(&p, dump_snapshot(snap, &name)).map_err(io_err(&p))?;
    }
    let p = out_dir.join("spacetime_graph.txt");
    fs::write(&p, graph.dump(&name)).map_err(io_err(&p))?;
    writeln!(
        out,
        "snapshots={} vertices={} edges={}",
        snaps.len(),
        graph.num_vertices(),
        graph.edges().len()
    )
    .map_err(runtime)?;
    Ok(())
}

fn cmd_route(
    s: &Scenario,
    source: &str,
    dest: &str,
    t_start: f64,
    out_dir: &Path,
    out: &mut (dyn Write + Send),
) -> Result<(), CliError> {
    let src = s
        .network
        .parse_node(source)
        .map_err(|e| CliError::Config(e.to_string()))?;
    let dst = s
        .network
        .parse_node(dest)
        .map_err(|e| CliError::Config(e.to_string()))?;
    let query = PathQuery::new(src, dst, t_start, s.memory.coherence_time)
        .map_err(|e| CliError::Config(e.to_string()))?
        .with_min_link_fidelity(s.physics.fidelity_threshold);
    if !t_start.is_finite() || t_start < 0.0 {
        return Err(CliError::Config("--t-start must be finite and non-negative".into()));
    }
    let evaluator = LinkEvaluator::new(s.physics.clone()).map_err(runtime)?;
    let graph = crate::simkit::point_graph(s, &evaluator, t_start).map_err(runtime)?;
    let text = match optimal_entanglement_path(&query, &graph).map_err(runtime)? {
        Some(p) => p.dump(&|n| s.network.node_name(n)),
        None => no_path_line(source, dest, t_start),
    };
    fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    let p = out_dir.join("route.txt");
    fs::write(&p, &text).map_err(io_err(&p))?;
    out.write_all(text.as_bytes()).map_err(runtime)?;
    Ok(())
}

fn cmd_simulate(s: &Scenario, out_dir: &Path, out: &mut (dyn Write + Send)) -> Result<(), CliError> {
    let results = run_sweep(s).map_err(runtime)?;
    write_results(out_dir, "metrics.csv", "outcomes", &results, &s.transmission_times).map_err(io_err(out_dir))?;
    for r in &results {
        summary_line(r, out).map_err(runtime)?;
    }
    Ok(())
}

fn cmd_sweep_coherence(s: &Scenario, out_dir: &Path, out: &mut (dyn Write + Send)) -> Result<(), CliError> {
    if s.coherence_sweep.is_empty() {
        return Err(CliError::Config("simulation.coherence_sweep_seconds is empty".into()));
    }
    let sweeps = run_coherence_sweep(s).map_err(runtime)?;
    for (tc, results) in &sweeps {
        write_results(
            out_dir,
            &format!("metrics_tc{tc}.csv"),
            &format!("outcomes_tc{tc}"),
            results,
            &s.transmission_times,
        )
        .map_err(io_err(out_dir))?;
        for r in results {
            summary_line(r, out).map_err(runtime)?;
        }
    }
    Ok(())
}

/// Runs a parsed command, writing human-readable progress to `out`.
pub fn execute(cli: &Cli, out: &mut (dyn Write + Send)) -> Result<(), CliError> {
    let s = scenario(cli)?;
    if cli.threads == Some(0) {
        return Err(CliError::Config("--threads must be at least 1".into()));
    }
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(runtime)?;
    pool.install(|| match &cli.command {
        Command::Snapshots => cmd_snapshots(&s, &cli.out, out),
        Command::Route { source, dest, t_start } => cmd_route(&s, source, dest, *t_start, &cli.out, out),
        Command::Simulate => cmd_simulate(&s, &cli.out, out),
        Command::SweepCoherence => cmd_sweep_coherence(&s, &cli.out, out),
    })
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let mut stdout = io::stdout();
    match execute(&cli, &mut stdout) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
