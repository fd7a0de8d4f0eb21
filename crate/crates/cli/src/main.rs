use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use quasalg_cli::{config::KEYS, emit_report, run, ConfigError, ExperimentConfig, Format, REGISTRY};

#[derive(Parser)]
#[command(name = "quasalg", version, about = "Reproducible experiments on quasi *-algebra models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write its CSV tables and report.
    Run {
        experiment: String,
        /// Flat `key = value` config file.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory; files go to `<out>/<experiment>/`.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, allow_hyphen_values = true)]
        tol: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        seed: Option<String>,
        /// Override a config key; may be repeated.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
    /// List the available experiments and config keys.
    List,
}

const EXIT_FAILED: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_IO: u8 = 3;

fn build_config(
    experiment: &str,
    config: Option<PathBuf>,
    out: Option<PathBuf>,
    tol: Option<String>,
    seed: Option<String>,
    set: &[String],
) -> Result<ExperimentConfig, ConfigError> {
    let mut cfg = ExperimentConfig::new(experiment);
    if let Some(path) = config {
        cfg.load_file(&path)?;
    }
    for pair in set {
        cfg.set_pair(pair)?;
    }
    if let Some(v) = tol {
        cfg.set("tol", &v)?;
    }
    if let Some(v) = seed {
        cfg.set("seed", &v)?;
    }
    if let Some(dir) = out {
        cfg.set("output", &dir.to_string_lossy())?;
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::List => {
            for e in REGISTRY {
                println!("{:<24} {}", e.name, e.summary);
            }
            println!("\nconfig keys:");
            for (k, help) in KEYS {
                println!("  {k:<12} {help}");
            }
            ExitCode::SUCCESS
        }
        Command::Run {
            experiment,
            config,
            out,
            tol,
            seed,
            set,
        } => {
            let report = match build_config(&experiment, config, out, tol, seed, &set).and_then(|cfg| {
                let r = run(&cfg)?;
                Ok((cfg, r))
            }) {
                Ok(r) => r,
                Err(e @ ConfigError::Io { .. }) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(EXIT_IO);
                }
                Err(e) => {
                    eprintln!("usage error: {e}");
                    return ExitCode::from(EXIT_USAGE);
                }
            };
            let (cfg, report) = report;
            let dir = cfg.output.join(&report.experiment);
            let mut written = Vec::new();
            for format in [Format::Csv, Format::Text] {
                match emit_report(&report, format, &dir) {
                    Ok(paths) => written.extend(paths),
                    Err(e) => {
                        eprintln!("error: {e}");
                        return ExitCode::from(EXIT_IO);
                    }
                }
            }
            for v in &report.verdicts {
                println!("[{}] {}", if v.passed { "PASS" } else { "FAIL" }, v.check);
                if let Some(d) = &v.detail {
                    println!("       {d}");
                }
            }
            for p in &written {
                println!("wrote {}", p.display());
            }
            if report.passed() {
                ExitCode::SUCCESS
            } else {
                for v in report.failures() {
                    eprintln!("failed: {} ({:.3e} vs {:.3e})", v.check, v.value, v.limit);
                }
                ExitCode::from(EXIT_FAILED)
            }
        }
    }
}
