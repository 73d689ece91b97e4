use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::Parser;

use potkit_cli::{run, CliError, ExperimentConfig, RunManifest};

/// Runs one potkit experiment described by a TOML config.
#[derive(Debug, Parser)]
#[command(name = "potkit", version)]
struct Args {
    /// Experiment config (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory for CSV, summary and manifest files.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Prefix each CSV with a timestamp comment line.
    #[arg(long)]
    stamp: bool,
}

fn main() -> ExitCode {
    let args = Args::parse();
    match execute(&args) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("potkit: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn execute(args: &Args) -> Result<i32, CliError> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", args.config.display())))?;
    let mut cfg = ExperimentConfig::from_toml(&text)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    let start = Instant::now();
    let out = run(&cfg)?;
    let elapsed = start.elapsed().as_millis() as u64;
    std::fs::create_dir_all(&args.out)?;
    let mut names = Vec::new();
    for (name, body) in &out.files {
        let text = if args.stamp && name.ends_with(".csv") {
            let secs = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
            format!("# generated {secs}\n{body}")
        } else {
            body.clone()
        };
        std::fs::write(args.out.join(name), text)?;
        names.push(name.clone());
    }
    let manifest = RunManifest::new(&cfg, elapsed, out.exit_code, names);
    std::fs::write(args.out.join("manifest.toml"), manifest.to_toml())?;
    print!("{}", out.summary.render());
    Ok(out.exit_code)
}
