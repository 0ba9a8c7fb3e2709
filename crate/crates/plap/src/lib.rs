//! Experiment runner on top of `plap-core`: configuration files, report
//! bundles, plot tables and the acceptance suite.

pub mod bundle;
pub mod config;
pub mod experiments;
pub mod plot;
pub mod verify;

pub use bundle::{CriterionReport, Report, ReportBundle};
pub use config::{Command, ConfigError, ExperimentConfig, Suite};
pub use experiments::run;
pub use plot::{emit_plotdata, PlotError};

use std::path::{Path, PathBuf};

/// Plot tables written when the config names none.
pub fn default_plots(cfg: &ExperimentConfig) -> Vec<String> {
    if !cfg.plots.is_empty() {
        return cfg.plots.clone();
    }
    match cfg.command {
        Some(Command::Imcf) => vec!["imcf:sup_grad".into()],
        Some(Command::Entropy) => vec!["entropy:W".into(), "entropy:N".into()],
        Some(Command::Parabolic) => {
            use plap_core::parabolic::{EquationKind, HarnackId};
            let ids = if cfg.harnack.is_empty() {
                vec![match cfg.equation.unwrap_or(EquationKind::B) {
                    EquationKind::A | EquationKind::APressure => HarnackId::ParGlobal,
                    EquationKind::B => HarnackId::Lyp1,
                    EquationKind::BReg => HarnackId::GlobalApprox,
                }]
            } else {
                cfg.harnack.clone()
            };
            ids.iter().map(|id| format!("harnack:{}", id.tag())).collect()
        }
        _ => Vec::new(),
    }
}

/// Write `bundle.json` and one CSV per selector into `dir`, each file atomically.
pub fn write_outputs(bundle: &ReportBundle, dir: &Path, selectors: &[String]) -> std::io::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let path = dir.join("bundle.json");
    bundle::write_atomic(&path, bundle.to_json().as_bytes())?;
    written.push(path);
    for sel in selectors {
        let csv = emit_plotdata(bundle, sel).map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidInput, e))?;
        let path = dir.join(plot::csv_name(sel));
        bundle::write_atomic(&path, csv.as_bytes())?;
        written.push(path);
    }
    Ok(written)
}
