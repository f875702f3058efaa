use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use dcsk_cd::cli::config::{DEFAULTS_HELP, KNOWN_KEYS, REQUIRED_KEYS};
use dcsk_cd::cli::{parse_config, preset, preset_names, run_curve, write_csv, CurveReport, ExperimentSpec};
use dcsk_cd::montecarlo::StoppingRule;

#[derive(Parser)]
#[command(name = "dcsk-cd", version, about = "Multi-access DCSK relay link simulator and BER calculator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a configuration file and write a BER CSV.
    #[command(after_help = config_help())]
    Run {
        config: PathBuf,
        /// Output CSV (stdout if omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a figure preset.
    Preset {
        name: String,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Directory receiving one `<preset>_<curve>.csv` per curve (stdout if omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List preset names.
    ListPresets,
    /// Evaluate only the analytic columns of a configuration file.
    #[command(after_help = config_help())]
    AnalyticOnly {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn config_help() -> String {
    format!("Config keys: {}\nRequired: {}\nDefaults: {DEFAULTS_HELP}", KNOWN_KEYS.join(", "), REQUIRED_KEYS.join(", "))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

/// `Ok(false)` when some point failed.
fn dispatch(cmd: Command) -> Result<bool, String> {
    match cmd {
        Command::ListPresets => {
            for (name, description) in preset_names() {
                say(format_args!("{name:8} {description}"))?;
            }
            Ok(true)
        }
        Command::Run { config, out } => {
            let spec = load(&config)?;
            let report = run_curve(&spec.config, &spec.grid, Some(&spec.rule), spec.seed, spec.overlays)
                .map_err(|e| e.to_string())?;
            emit(&report, out.as_deref(), "")
        }
        Command::AnalyticOnly { config, out } => {
            let spec = load(&config)?;
            let report =
                run_curve(&spec.config, &spec.grid, None, spec.seed, spec.overlays).map_err(|e| e.to_string())?;
            emit(&report, out.as_deref(), "")
        }
        Command::Preset { name, seed, out } => {
            let p = preset(&name).map_err(|e| e.to_string())?;
            if let Some(dir) = &out {
                fs::create_dir_all(dir).map_err(|e| format!("{}: {e}", dir.display()))?;
            }
            let rule = StoppingRule::default();
            let mut ok = true;
            for (i, curve) in p.curves.iter().enumerate() {
                let report = run_curve(&curve.config, &p.grid, curve.simulate.then_some(&rule), seed, curve.overlays)
                    .map_err(|e| e.to_string())?;
                let tag = format!("{}/{}: ", p.name, curve.label);
                match &out {
                    Some(dir) => {
                        let path = dir.join(format!("{}_{}.csv", p.name, curve.label));
                        ok &= emit(&report, Some(&path), &tag)?;
                    }
                    None => {
                        if i > 0 {
                            say(format_args!(""))?;
                        }
                        say(format_args!("# {}", curve.label))?;
                        ok &= emit(&report, None, &tag)?;
                    }
                }
            }
            Ok(ok)
        }
    }
}

fn say(line: std::fmt::Arguments) -> Result<(), String> {
    writeln!(io::stdout(), "{line}").map_err(|e| e.to_string())
}

fn load(path: &Path) -> Result<ExperimentSpec, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse_config(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn emit(report: &CurveReport, out: Option<&Path>, tag: &str) -> Result<bool, String> {
    for w in &report.warnings {
        eprintln!("warning: {tag}{w}");
    }
    for f in &report.failures {
        eprintln!("error: {tag}{f}");
    }
    let mut buf = Vec::new();
    write_csv(&mut buf, &report.curve).map_err(|e| e.to_string())?;
    match out {
        Some(path) => fs::write(path, &buf).map_err(|e| format!("{}: {e}", path.display()))?,
        None => io::stdout().write_all(&buf).map_err(|e| e.to_string())?,
    }
    Ok(report.failures.is_empty())
}
