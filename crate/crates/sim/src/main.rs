use std::io::Write as _;
use std::net::TcpListener;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use imagine_core::world::{build_level, LevelSpec};
use imagine_sim::level_file::write_level;
use imagine_sim::runner::run_baseline;
use imagine_sim::server::serve;
use imagine_sim::trajectory::{replay, TrajectoryDump};
use imagine_sim::{load_config, MetricsWriter, PolicyChoice, RunConfig, LOG_DIR_ENV, METRICS_FILE, TRAJECTORY_DIR};

#[derive(Parser)]
#[command(name = "imagine", version, about = "Deterministic 2D multi-agent exploration simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run episodes with a scripted policy, or serve the environment to an external trainer.
    Run(RunArgs),
    /// Replay a trajectory dump and check it reproduces the logged coverage.
    Replay {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        trajectory: PathBuf,
    },
    /// Print a built-in level in the level-file format.
    Level {
        #[arg(long, default_value_t = 0)]
        id: u8,
    },
}

#[derive(Args)]
struct RunArgs {
    /// TOML run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    episodes: Option<u64>,
    /// random_walk, stationary, frontier_greedy or external.
    #[arg(long)]
    policy: Option<String>,
    /// Serve the environment over TCP instead of running a scripted policy.
    #[arg(long)]
    serve: bool,
    #[arg(long)]
    port: Option<u16>,
    #[arg(long)]
    seed: Option<u64>,
    /// Directory for metrics and dumps; IMAGINE_LOG_DIR takes precedence.
    #[arg(long)]
    log_dir: Option<PathBuf>,
    #[arg(long)]
    dump_trajectories: bool,
}

fn resolve(args: &RunArgs) -> Result<RunConfig> {
    let mut run = match &args.config {
        Some(p) => load_config(p)?,
        None => RunConfig::default(),
    };
    if let Some(n) = args.episodes {
        run.episodes = n;
    }
    if let Some(name) = &args.policy {
        run.policy = PolicyChoice::from_name(name).ok_or_else(|| anyhow!("unknown policy `{name}`"))?;
    }
    if args.serve {
        run.policy = PolicyChoice::External;
    }
    if let Some(p) = args.port {
        run.listen_port = Some(p);
    }
    if let Some(s) = args.seed {
        run.env.seed = s;
    }
    if let Some(d) = &args.log_dir {
        run.log_dir = d.clone();
    }
    if let Some(d) = std::env::var_os(LOG_DIR_ENV).filter(|d| !d.is_empty()) {
        run.log_dir = PathBuf::from(d);
    }
    run.dump_trajectories |= args.dump_trajectories;
    run.validate().map_err(|e| anyhow!("invalid configuration: {e}"))?;
    Ok(run)
}

fn run(args: RunArgs) -> Result<()> {
    let run = resolve(&args)?;
    let metrics_path = run.log_dir.join(METRICS_FILE);
    let mut metrics = MetricsWriter::open(&metrics_path, run.metrics_flush_every)
        .with_context(|| format!("opening {}", metrics_path.display()))?;
    match run.policy {
        PolicyChoice::External => {
            let port = run.listen_port.expect("validated");
            let listener =
                TcpListener::bind(("127.0.0.1", port)).with_context(|| format!("binding port {port}"))?;
            println!("listening on {}", listener.local_addr()?);
            std::io::stdout().flush()?;
            serve(listener, run.env.clone(), Some(&mut metrics))
        }
        PolicyChoice::Baseline(kind) => {
            let dumps = run.dump_trajectories.then(|| run.log_dir.join(TRAJECTORY_DIR));
            let summaries = run_baseline(&run, kind, Some(&mut metrics), dumps.as_deref())?;
            for s in &summaries {
                println!(
                    "episode {} level {} coverage {:.4} reward {:.4} collisions {}",
                    s.episode, s.level_id, s.coverage, s.reward_sum, s.collisions
                );
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => run(args),
        Command::Replay { config, trajectory } => (|| {
            let run = match config {
                Some(p) => load_config(&p)?,
                None => RunConfig::default(),
            };
            let dump = TrajectoryDump::load(&trajectory)?;
            let coverage = replay(&run.env, &dump)?;
            if coverage != dump.coverage {
                bail!("replay diverged from the recorded coverage");
            }
            println!("replayed {} steps; coverage matches", coverage.len());
            Ok(())
        })(),
        Command::Level { id } => (|| {
            let spec = LevelSpec::default_for(id).map_err(|e| anyhow!("{e}"))?;
            let world = build_level(&spec).map_err(|e| anyhow!("{e}"))?;
            print!("{}", write_level(&world));
            Ok(())
        })(),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
