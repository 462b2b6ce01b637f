// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod args;
mod commands;
mod specs;

use std::ffi::OsString;
use std::process::ExitCode;

use clap::Parser;
use serde_json::Value;

use args::{Cli, Command};
use commands::Echo;

#[derive(Debug)]
pub enum CliError {
    /// Bad flags or inputs; exit 2.
    Validation(String),
    /// Failure during a run; exit 3.
    Runtime(String),
    /// A string check that did not synchronize; exit 1.
    CheckFailed(String),
}

impl From<pcosync_core::Error> for CliError {
    fn from(e: pcosync_core::Error) -> Self {
        if e.is_runtime() {
            CliError::Runtime(e.to_string())
        } else {
            CliError::Validation(e.to_string())
        }
    }
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::CheckFailed(_) => 1,
            CliError::Validation(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Validation(m) | CliError::Runtime(m) | CliError::CheckFailed(m) => m,
        }
    }
}

fn config_path(argv: &[OsString]) -> Option<OsString> {
    let mut it = argv.iter();
    while let Some(arg) = it.next() {
        if arg == "--config" {
            return it.next().cloned();
        }
        if let Some(p) = arg.to_str().and_then(|s| s.strip_prefix("--config=")) {
            return Some(p.into());
        }
    }
    None
}

/// Appends the config file's entries as flags. Later flags win, so the file
/// overrides the command line.
fn expand_config(mut argv: Vec<OsString>) -> Result<Vec<OsString>, CliError> {
    let Some(path) = config_path(&argv) else {
        return Ok(argv);
    };
    let text = std::fs::read_to_string(&path)
        .map_err(|e| CliError::Validation(format!("{}: {e}", path.to_string_lossy())))?;
    let Value::Object(map) = serde_json::from_str(&text)
        .map_err(|e| CliError::Validation(format!("config: {e}")))?
    else {
        return Err(CliError::Validation("config must be a JSON object".into()));
    };
    for (key, value) in map {
        let flag = format!("--{}", key.replace('_', "-"));
        let scalar = |v: &Value| match v {
            Value::String(s) => Ok(s.clone()),
            Value::Number(n) => Ok(n.to_string()),
            _ => Err(CliError::Validation(format!("config: unsupported value for '{key}'"))),
        };
        match &value {
            Value::Null | Value::Bool(false) => {}
            Value::Bool(true) => argv.push(flag.into()),
            Value::Array(items) => {
                let joined = items.iter().map(scalar).collect::<Result<Vec<_>, _>>()?.join(",");
                argv.push(format!("{flag}={joined}").into());
            }
            v => argv.push(format!("{flag}={}", scalar(v)?).into()),
        }
    }
    Ok(argv)
}

fn run(cli: &Cli) -> Result<(), CliError> {
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return Err(CliError::Validation("--jobs must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| CliError::Runtime(e.to_string()))?;
    }
    let echo = Echo {
        invocation: serde_json::to_value(cli).expect("arguments serialize"),
    };
    match &cli.command {
        Command::Simulate(a) => commands::cmd_simulate(&echo, a),
        Command::Montecarlo(a) => commands::cmd_montecarlo(&echo, a),
        Command::Compare(a) => commands::cmd_compare(&echo, a),
        Command::Bound(a) => commands::cmd_bound(&echo, a),
        Command::StringCheck(a) => commands::cmd_string_check(&echo, a),
    }
}

fn main() -> ExitCode {
    let result = expand_config(std::env::args_os().collect()).and_then(|argv| {
        let cli = Cli::try_parse_from(argv).unwrap_or_else(|e| e.exit());
        run(&cli)
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}
