use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{Context, Result};
use carshare_cli::bench::{bench_rank, write_csv};
use carshare_cli::{export_snapshot, render_table1, restore_snapshot, seed, table1, write_table1_csv};
use carshare_core::rank::RankMode;
use carshare_service::config::DEFAULT_STORAGE_PATH;
use carshare_service::{Config, Service, Store};
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "carshare", version, about = "Carsharing decision-support tool")]
struct Cli {
    /// SQLite database file.
    #[arg(long, global = true, env = "CARSHARE_STORAGE_PATH")]
    storage: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Matrix,
    Fast,
}

impl From<Mode> for RankMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Matrix => RankMode::Matrix,
            Mode::Fast => RankMode::Fast,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Persist a deterministic synthetic fleet.
    Seed {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// Time rank_vehicles over growing synthetic fleets.
    Bench {
        #[arg(long = "n-list", value_delimiter = ',', default_values_t = [1000, 2000, 5000, 10000])]
        n_list: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_values = ["matrix", "fast"])]
        mode: Vec<Mode>,
        #[arg(long, default_value_t = 5)]
        reps: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// CSV destination; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Reproduce the ownership-versus-carsharing savings table.
    Table1 {
        #[arg(long)]
        out: Option<PathBuf>,
        /// Pricing CSV (anm,adt,monthly_cost_cents); the shipped fixture when omitted.
        #[arg(long)]
        fixture: Option<PathBuf>,
    },
    /// Export every table, or restore an export with --restore.
    Snapshot {
        #[arg(long, required_unless_present = "restore", conflicts_with = "restore")]
        out: Option<PathBuf>,
        #[arg(long)]
        restore: Option<PathBuf>,
        /// Overwrite a non-empty store on restore.
        #[arg(long, requires = "restore")]
        force: bool,
    },
    /// Run the HTTP API.
    Serve {
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

fn storage_path(flag: &Option<PathBuf>) -> PathBuf {
    flag.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_STORAGE_PATH))
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Seed { n, seed: rng_seed } => {
            let path = storage_path(&cli.storage);
            let store = Store::open(&path).with_context(|| format!("cannot open storage {}", path.display()))?;
            let fleet = seed(&store, n, rng_seed)?;
            println!(
                "seeded {} vehicles and {} ratings into {} (seed {rng_seed})",
                fleet.vehicles.len(),
                fleet.ratings.len(),
                path.display()
            );
        }
        Command::Bench {
            n_list,
            mode,
            reps,
            seed,
            out,
        } => {
            let modes: Vec<RankMode> = mode.into_iter().map(Into::into).collect();
            let rows = bench_rank(&n_list, &modes, reps, seed)?;
            match out {
                Some(path) => {
                    let file = std::fs::File::create(&path).with_context(|| format!("cannot write {}", path.display()))?;
                    write_csv(&rows, file)?;
                    for r in &rows {
                        eprintln!(
                            "n={:<6} {:<6} mean {:>10.3} ms  std {:>8.3}  min {:>10.3}  max {:>10.3}",
                            r.n,
                            r.mode.as_str(),
                            r.mean_ms,
                            r.std_ms,
                            r.min_ms,
                            r.max_ms
                        );
                    }
                }
                None => write_csv(&rows, std::io::stdout().lock())?,
            }
        }
        Command::Table1 { out, fixture } => {
            let run = table1(fixture.as_deref())?;
            print!("{}", render_table1(&run.grid));
            if let Some(path) = out {
                write_table1_csv(&run.grid, &path)?;
            }
            if !run.diffs.is_empty() {
                for d in &run.diffs {
                    eprintln!("diff: {d}");
                }
                eprintln!("{} cell(s) differ from the reference table", run.diffs.len());
                return Ok(ExitCode::from(1));
            }
            println!("all {} cells match", 2 * run.grid.cells.len());
        }
        Command::Snapshot { out, restore, force } => {
            let path = storage_path(&cli.storage);
            match (out, restore) {
                (Some(out), None) => {
                    let bytes = export_snapshot(&path, &out)?;
                    println!("wrote {bytes} bytes to {}", out.display());
                }
                (None, Some(input)) => {
                    restore_snapshot(&path, &input, force)?;
                    println!("restored {} into {}", input.display(), path.display());
                }
                _ => unreachable!("clap enforces exactly one of --out and --restore"),
            }
        }
        Command::Serve { config } => {
            let mut config = Config::load(config.as_deref())?;
            if let Some(path) = cli.storage {
                config.storage_path = path;
            }
            serve(config)?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn serve(config: Config) -> Result<()> {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()),
        )
        .init();
    let addr = config.listen_addr()?;
    let service = Service::open(&config)
        .with_context(|| format!("cannot open storage {}", Path::new(&config.storage_path).display()))?;
    let runtime = tokio::runtime::Builder::new_multi_thread().enable_all().build()?;
    runtime.block_on(carshare_service::http::serve(Arc::new(service), addr))?;
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
