//! Named desk-scale experiment settings.
//!
//! Two-dimensional presets sample the radial profile along the first axis.

use crate::commands::CommandKind;
use crate::config::{layer, Layer};
use crate::error::{config, CliError};

pub const PRESETS: &[&str] = &["fig1", "fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "fig9"];

pub fn preset(name: &str) -> Result<(CommandKind, Layer), CliError> {
    let stable_line = |alphas: &[&'static str], mus: &[&'static str]| {
        let mut pairs = vec![
            ("driver", "stable"),
            ("beta", "0.5"),
            ("dim", "1"),
            ("radius", "100"),
            ("x0", "-50"),
            ("x0", "0"),
            ("x0", "50"),
            ("trajectories", "20000"),
        ];
        pairs.extend(alphas.iter().map(|a| ("alpha", *a)));
        pairs.extend(mus.iter().map(|m| ("mu", *m)));
        layer(&pairs)
    };
    let stable_disc = |alpha: &'static str, mu: &'static str, beta: &'static str| {
        layer(&[
            ("driver", "stable"),
            ("alpha", alpha),
            ("mu", mu),
            ("beta", beta),
            ("dim", "2"),
            ("radius", "100"),
            ("x0", "0"),
            ("x0", "50"),
            ("trajectories", "10000"),
        ])
    };
    let spec = match name {
        "fig1" => (
            CommandKind::Mfet,
            layer(&[
                ("driver", "gaussian"),
                ("alpha", "0.2"),
                ("alpha", "0.6"),
                ("alpha", "0.9"),
                ("mu", "0.1"),
                ("dim", "1"),
                ("radius", "10"),
                ("x0", "-5"),
                ("x0", "0"),
                ("x0", "5"),
                ("trajectories", "20000"),
            ]),
        ),
        "fig2" => (CommandKind::Mfet, stable_line(&["0.2", "0.6", "0.9"], &["0.1"])),
        "fig3" => (CommandKind::Mfet, stable_line(&["0.6"], &["0.01", "0.06", "0.1"])),
        "fig4" => (CommandKind::Mfet, stable_disc("0.2", "0.1", "0.5")),
        "fig5" | "fig6" => (CommandKind::Mfet, stable_disc("0.2", "0.01", "0.5")),
        "fig7" => (CommandKind::Mfet, stable_disc("0.6", "0.1", "1.2")),
        "fig9" => (
            CommandKind::Escape,
            layer(&[
                ("driver", "stable"),
                ("alpha", "0.6"),
                ("mu", "0.1"),
                ("beta", "0.5"),
                ("beta", "1.2"),
                ("beta", "1.8"),
                ("dim", "1"),
                ("radius", "100"),
                ("x0", "-50"),
                ("x0", "0"),
                ("x0", "50"),
                ("trajectories", "20000"),
            ]),
        ),
        other => {
            return Err(config(format!(
                "unknown preset {other:?}; available: {}",
                PRESETS.join(", ")
            )))
        }
    };
    Ok(spec)
}
