use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use pulsesync::{run, Config, Experiment, RunError};

/// Runs one experiment and writes its CSV files and manifest to `--out`.
///
/// Any configuration key can be overridden after the named options as
/// `--key value` or `--key=value`.
#[derive(Parser, Debug)]
#[command(name = "pulsesync", version)]
struct Cli {
    experiment: Experiment,
    /// Flat `key = value` configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print the known configuration keys with their defaults and exit.
    #[arg(long)]
    list_keys: bool,
    #[arg(trailing_var_arg = true, allow_hyphen_values = true, hide = true)]
    overrides: Vec<String>,
}

/// `--config` and `--out` may also appear among the overrides.
fn split_paths(overrides: Vec<String>, cli: &mut Cli) -> Vec<String> {
    let mut rest = Vec::new();
    let mut it = overrides.into_iter();
    while let Some(arg) = it.next() {
        let (flag, inline) = match arg.split_once('=') {
            Some((f, v)) => (f.to_string(), Some(v.to_string())),
            None => (arg.clone(), None),
        };
        let slot = match flag.as_str() {
            "--config" => &mut cli.config,
            "--out" => &mut cli.out,
            _ => {
                rest.push(arg);
                continue;
            }
        };
        match inline.or_else(|| it.next()) {
            Some(v) => *slot = Some(PathBuf::from(v)),
            None => rest.push(arg),
        }
    }
    rest
}

fn execute(mut cli: Cli) -> Result<(), RunError> {
    let overrides = split_paths(std::mem::take(&mut cli.overrides), &mut cli);
    let mut config = Config::new(cli.experiment);
    if let Some(path) = &cli.config {
        config.apply_file(path)?;
    }
    config.apply_overrides(&overrides)?;
    let out = cli.out.ok_or(pulsesync::ConfigError::MissingValue { key: "out".into() })?;
    let result = run(&config, &out)?;
    for f in &result.files {
        println!("{}", f.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.list_keys {
        for (key, default, help) in pulsesync::config::KEYS {
            println!("{key} = {default}    # {help}");
        }
        return ExitCode::SUCCESS;
    }
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("pulsesync: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
