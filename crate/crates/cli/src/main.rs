use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use mcipdg::analysis::{parse_config, run_full, Command, Settings};
use mcipdg::mesh::build_uniform_mesh;
use mcipdg::quadrature::QuadSpec;

/// Multi-modes Monte Carlo IP-DG solver for Helmholtz problems in weakly random media.
#[derive(Parser)]
#[command(name = "mcipdg", version)]
struct Cli {
    /// Worker threads; changes speed only, never results.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Print mesh counts as key=value lines.
    MeshInfo {
        #[arg(long, default_value_t = 10)]
        n: usize,
        /// Also write vertices.csv and connectivity.csv here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve the deterministic (ε = 0) problem.
    SolveDet(RunArgs),
    /// Multi-modes Monte Carlo run with one factorization.
    RunModes(RunArgs),
    /// Classical Monte Carlo baseline.
    RunClassical(RunArgs),
    /// Run both methods on the same media and compare them.
    Compare(RunArgs),
    /// Run the study named by the config's `study` key.
    Study(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

fn load(path: Option<&Path>) -> Result<Settings> {
    let text = match path {
        Some(p) => fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?,
        None => String::new(),
    };
    Ok(parse_config(&text)?)
}

fn run(cmd: Cmd) -> Result<()> {
    let (command, args) = match cmd {
        Cmd::MeshInfo { n, out } => {
            let mesh = build_uniform_mesh(n, QuadSpec::default())?;
            print!("{}", mesh.info_lines());
            if let Some(dir) = out {
                fs::create_dir_all(&dir)?;
                fs::write(dir.join("vertices.csv"), mesh.vertices_csv())?;
                fs::write(dir.join("connectivity.csv"), mesh.connectivity_csv())?;
            }
            return Ok(());
        }
        Cmd::SolveDet(a) => (Command::SolveDet, a),
        Cmd::RunModes(a) => (Command::RunModes, a),
        Cmd::RunClassical(a) => (Command::RunClassical, a),
        Cmd::Compare(a) => (Command::Compare, a),
        Cmd::Study(a) => (Command::Study, a),
    };
    let settings = load(args.config.as_deref())?;
    if command == Command::Study && settings.study.is_none() {
        bail!("the study command needs a config with a `study` key");
    }
    let output = run_full(command, &settings, &args.out)?;
    print!("{}", output.report);
    Ok(())
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(t) = cli.threads {
        if t == 0 {
            bail!("--threads must be at least 1");
        }
        pool = pool.num_threads(t);
    }
    pool.build()?.install(|| run(cli.command))
}
