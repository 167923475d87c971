//! Command-line experiments for mean first exit times and escape
//! probabilities under a tempered stable clock.

pub mod commands;
pub mod config;
pub mod error;
pub mod presets;
pub mod report;

use std::io::Write;

use clap::{Parser, Subcommand};

pub use commands::{execute, CommandKind, Outcome};
pub use config::{layer, ExperimentConfig, Layer, Params};
pub use error::CliError;
pub use report::{Cell, Format, Report};

#[derive(Debug, Parser)]
#[command(name = "subexit", version, about = "Exit times and escape probabilities on a tempered stable clock")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Monte Carlo mean exit times against the closed form.
    Mfet(Params),
    /// Monte Carlo escape probabilities into [r, inf) against the closed form.
    Escape(Params),
    /// Closed-form values on an x0 grid.
    Analytic(Params),
    /// Ratio of physical to operational mean exit time against the tempering factor.
    Ratio(Params),
    /// Run a named preset; flags override preset values.
    Preset {
        name: String,
        #[command(flatten)]
        params: Params,
    },
}

/// Resolves the configuration for a parsed command line.
pub fn resolve(command: &Command) -> Result<(CommandKind, ExperimentConfig), CliError> {
    let (kind, params, preset) = match command {
        Command::Mfet(p) => (CommandKind::Mfet, p, None),
        Command::Escape(p) => (CommandKind::Escape, p, None),
        Command::Analytic(p) => (CommandKind::Analytic, p, None),
        Command::Ratio(p) => (CommandKind::Ratio, p, None),
        Command::Preset { name, params } => {
            let (kind, l) = presets::preset(name)?;
            (kind, params, Some((name.clone(), l)))
        }
    };
    let mut layers = vec![params.to_layer()];
    if let Some(path) = &params.config {
        layers.push(config::read_config_file(path)?);
    }
    if let Some((_, l)) = &preset {
        layers.push(l.clone());
    }
    let mut cfg = ExperimentConfig::from_layers(&layers)?;
    cfg.preset = preset.map(|(name, _)| name);
    Ok((kind, cfg))
}

/// Runs the command and writes its report; returns the process exit code.
pub fn run(cli: &Cli) -> i32 {
    match try_run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("subexit: {e}");
            e.exit_code()
        }
    }
}

fn try_run(cli: &Cli) -> Result<i32, CliError> {
    let (kind, cfg) = resolve(&cli.command)?;
    let outcome = execute(kind, &cfg)?;
    let text = outcome.report.render(cfg.format);
    match &cfg.out {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    if outcome.failed {
        eprintln!("subexit: {}: at least one row failed", kind.name());
    }
    Ok(outcome.exit_code())
}
