use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use stirring_cli::config::{self, Overrides};
use stirring_cli::{run, CliError};

/// Run a stirring experiment described by a TOML config.
#[derive(Parser, Debug)]
#[command(name = "stirring", version = env!("CARGO_PKG_VERSION"))]
struct Args {
    /// Experiment config file.
    #[arg(long, env = "STIRRING_CONFIG")]
    config: PathBuf,
    /// Overrides the config seed.
    #[arg(long, env = "STIRRING_SEED")]
    seed: Option<u64>,
    /// Worker threads (results do not depend on it).
    #[arg(long, env = "STIRRING_THREADS")]
    threads: Option<usize>,
    /// Root directory for run outputs [default: runs].
    #[arg(long, env = "STIRRING_OUT")]
    out: Option<String>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    match execute(&args) {
        Ok(dir) => {
            println!("{}", serde_json::json!({ "run": dir.display().to_string() }));
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn execute(args: &Args) -> Result<PathBuf, CliError> {
    let text = std::fs::read_to_string(&args.config).map_err(|e| CliError::io(&args.config, e))?;
    let overrides = Overrides {
        seed: args.seed,
        threads: args.threads,
        out: args.out.clone(),
    };
    let (cfg, settings) = config::parse(&text, &overrides)?;
    let root = PathBuf::from(settings.out.unwrap_or_else(|| "runs".to_string()));
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(settings.threads.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Run(e.to_string()))?;
    pool.install(|| run::run(&cfg, &root))
}
