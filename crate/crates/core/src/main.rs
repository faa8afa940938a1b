use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use ctslab::env::Instance;
use ctslab::error::{Error, Result};
use ctslab::harness::{self, instance_fingerprint, EnvSpec, IngestedDocument, RunConfig};
use ctslab::ingest::{self, EdgeListOptions, MovielensParams, RatingsTable};

#[derive(Parser)]
#[command(name = "ctslab", version, about = "Combinatorial bandit experiments with triggered arms")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a TOML config.
    Run {
        config: PathBuf,
        /// Result directory; overrides `output` in the config.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Build a coverage instance from ratings and movie tables.
    IngestMovielens {
        #[arg(long)]
        ratings: PathBuf,
        #[arg(long)]
        movies: PathBuf,
        /// TOML file with construction parameters (window, counts, K, p*, noise, seed).
        #[arg(long)]
        params: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build an influence graph from an edge list.
    IngestGraph {
        edges: PathBuf,
        /// Seed-set size.
        #[arg(long)]
        k: usize,
        #[arg(long)]
        undirected: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the summary stored in a result directory.
    Report { dir: PathBuf },
    /// Check the fast code paths against brute force and simulation.
    Selftest,
}

fn run(config: PathBuf, output: Option<PathBuf>) -> Result<()> {
    let cfg = RunConfig::from_path(&config)?;
    let dir = output
        .or_else(|| cfg.output.as_ref().map(|o| cfg.base_dir.join(o)))
        .ok_or_else(|| Error::Config("no output directory: set `output` or pass --output".into()))?;
    log::info!("running {} on {} into {}", cfg.policy.kind.name(), cfg.environment.family(), dir.display());
    let summary = harness::run_to_dir(&cfg, &dir)?;
    println!("{}", summary.line());
    Ok(())
}

fn ingest_movielens(ratings: PathBuf, movies: PathBuf, params: Option<PathBuf>, out: PathBuf) -> Result<()> {
    let params: MovielensParams = match params {
        Some(p) => {
            let text = std::fs::read_to_string(&p).map_err(|e| Error::Config(format!("{}: {e}", p.display())))?;
            toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", p.display())))?
        }
        None => MovielensParams::default(),
    };
    let table = RatingsTable::from_paths(&ratings, &movies)?;
    let built = ingest::build_movielens_instance(&table, &params)?;
    let p = &built.instance;
    let v = p.items();
    let attraction = (0..v)
        .map(|i| (0..p.users()).map(|j| p.attraction().values()[j * v + i]).collect())
        .collect();
    let doc = IngestedDocument {
        environment: EnvSpec::Pmc {
            k: p.k(),
            p_star: p.p_star(),
            attraction,
        },
        fingerprint: instance_fingerprint(&Instance::Pmc(built.instance.clone())),
        item_ids: built.movies,
        user_ids: built.users,
    };
    doc.write(&out)?;
    println!("{} items x {} users, fingerprint {}", v, p.users(), doc.fingerprint);
    Ok(())
}

fn ingest_graph(edges: PathBuf, k: usize, undirected: bool, out: PathBuf) -> Result<()> {
    let g = ingest::load_edge_graph(&edges, EdgeListOptions { undirected })?;
    let env = EnvSpec::Graph {
        nodes: g.nodes(),
        edges: g.edges().iter().map(|e| (e.src, e.dst, e.p)).collect(),
        k,
    };
    let inst = env.build(std::path::Path::new(""))?;
    let doc = IngestedDocument {
        environment: env,
        fingerprint: instance_fingerprint(&inst),
        item_ids: Vec::new(),
        user_ids: Vec::new(),
    };
    doc.write(&out)?;
    println!("{} nodes, {} edges, fingerprint {}", g.nodes(), g.num_edges(), doc.fingerprint);
    Ok(())
}

fn selftest() -> Result<()> {
    let checks = harness::selftest::selftest();
    let mut failed = 0;
    for c in &checks {
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
        failed += usize::from(!c.passed);
    }
    if failed > 0 {
        return Err(Error::Simulation(format!("{failed} of {} checks failed", checks.len())));
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run { config, output } => run(config, output),
        Command::IngestMovielens {
            ratings,
            movies,
            params,
            out,
        } => ingest_movielens(ratings, movies, params, out),
        Command::IngestGraph { edges, k, undirected, out } => ingest_graph(edges, k, undirected, out),
        Command::Report { dir } => harness::read_summary(&dir).map(|s| {
            println!("{}", s.line());
            println!("config {}", s.config_fingerprint);
            println!("instance {}", s.instance_fingerprint);
        }),
        Command::Selftest => selftest(),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
