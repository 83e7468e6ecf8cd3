use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use fraisse_core::config::{resolve_class, resolve_structure, Config};
use fraisse_core::harness::{self, EppaSource, Run};
use fraisse_core::report::Format;
use fraisse_core::Result;

#[derive(Parser)]
#[command(name = "fraisse", version, about = "Fraïssé classes, Ramsey colourings, EPPA and witness certificates")]
struct Cli {
    /// Seed for the `seeded-random` colouring family.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Directory for the report and artifacts; stdout if absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, default_value = "json")]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// HP, JEP, AP, free JEP and free AP up to a carrier size.
    CheckClass {
        spec: String,
        #[arg(long)]
        max_size: usize,
    },
    /// Build (or check a builtin) structure with the rank-k extension property.
    Approximant {
        spec: String,
        #[arg(long)]
        rank: usize,
        #[arg(long, default_value_t = 64)]
        budget: usize,
        /// `bit-graph:m`
        #[arg(long)]
        builtin: Option<String>,
    },
    /// Approximate Ramsey search from a `[ramsey]` config.
    Ramsey { config: PathBuf },
    /// Construct and verify a non-null witness from a `[null-witness]` config.
    NullWitness { config: PathBuf },
    /// Construct and verify a non-tame witness from a `[tame-witness]` config.
    TameWitness {
        config: PathBuf,
        #[arg(long, conflicts_with = "eppa_search")]
        eppa: Option<PathBuf>,
        #[arg(long)]
        eppa_search: Option<usize>,
    },
    /// Search for an EPPA witness of a structure inside a class.
    Eppa {
        structure: String,
        #[arg(long)]
        class: String,
        #[arg(long)]
        max_size: usize,
    },
}

fn execute(cli: &Cli) -> Result<Run> {
    let here = Path::new(".");
    match &cli.command {
        Command::CheckClass { spec, max_size } => {
            harness::run_check_class(&resolve_class(spec, here)?, *max_size, cli.seed)
        }
        Command::Approximant { spec, rank, budget, builtin } => {
            let m = match builtin {
                None => None,
                Some(b) => Some(
                    b.strip_prefix("bit-graph:")
                        .and_then(|m| m.parse().ok())
                        .ok_or_else(|| fraisse_core::Error::ParameterOutOfRange(format!("unknown builtin {b:?}")))?,
                ),
            };
            harness::run_approximant(&resolve_class(spec, here)?, *rank, *budget, m, cli.seed)
        }
        Command::Ramsey { config } => harness::run_ramsey(&Config::load(config)?, cli.seed),
        Command::NullWitness { config } => harness::run_null_witness(&Config::load(config)?, cli.seed),
        Command::TameWitness { config, eppa, eppa_search } => {
            let source = match (eppa, eppa_search) {
                (Some(path), _) => EppaSource::File(path),
                (None, Some(max)) => EppaSource::Search(*max),
                (None, None) => {
                    return Err(fraisse_core::Error::ParameterOutOfRange(
                        "tame-witness needs --eppa <file> or --eppa-search <max>".into(),
                    ))
                }
            };
            harness::run_tame_witness(&Config::load(config)?, source, cli.seed)
        }
        Command::Eppa { structure, class, max_size } => {
            let a = resolve_structure(structure, here)?;
            harness::run_eppa(&a, &resolve_class(class, here)?, *max_size, cli.seed)
        }
    }
}

fn emit(cli: &Cli, run: &Run) -> Result<()> {
    match &cli.out {
        Some(dir) => {
            let path = run.report.write(dir, cli.format)?;
            for (name, contents) in &run.artifacts {
                std::fs::write(dir.join(name), contents)?;
            }
            eprintln!("{}: {} ({})", run.report.command, run.report.outcome, path.display());
        }
        None => print!("{}", run.report.render(cli.format)?),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    let result = execute(&cli).and_then(|run| emit(&cli, &run).map(|()| run.negative));
    match result {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
