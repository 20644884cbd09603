//! Model parameters from a TOML file and command-line overrides.

use axial_qcd::model::ModelParams;
use clap::Args;
use serde::Deserialize;
use std::path::{Path, PathBuf};

use crate::CliError;

/// On-disk model description.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub nc: usize,
    pub nf: usize,
    pub l: usize,
    pub masses: Vec<f64>,
    pub g: f64,
    #[serde(default)]
    pub mu_b: f64,
    #[serde(default)]
    pub mu_i: f64,
    #[serde(default)]
    pub h: f64,
}

impl ModelFile {
    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }
}

#[derive(Args, Debug, Clone)]
pub struct ModelArgs {
    /// TOML file with keys nc, nf, l, masses, g, mu_b, mu_i, h; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub nc: Option<usize>,
    #[arg(long)]
    pub nf: Option<usize>,
    #[arg(long)]
    pub l: Option<usize>,
    /// Common quark mass.
    #[arg(long, conflicts_with = "masses")]
    pub m: Option<f64>,
    /// Per-flavor masses, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub masses: Option<Vec<f64>>,
    /// Gauge coupling; give this or --g2, not both.
    #[arg(long)]
    pub g: Option<f64>,
    /// Squared gauge coupling.
    #[arg(long)]
    pub g2: Option<f64>,
    #[arg(long)]
    pub mu_b: Option<f64>,
    #[arg(long)]
    pub mu_i: Option<f64>,
    /// Singlet penalty coupling.
    #[arg(long)]
    pub h: Option<f64>,
    /// Drop the constant that keeps every basis state's mass energy non-negative.
    #[arg(long)]
    pub no_mass_shift: bool,
}

/// Penalty used when neither the file nor the flags set one.
pub const DEFAULT_PENALTY: f64 = 2.0;

impl ModelArgs {
    pub fn resolve(&self) -> Result<ModelParams, CliError> {
        let file = self.config.as_deref().map(ModelFile::read).transpose()?;
        let nc = self.nc.or(file.as_ref().map(|f| f.nc)).unwrap_or(3);
        let nf = self.nf.or(file.as_ref().map(|f| f.nf)).unwrap_or(2);
        let l = self.l.or(file.as_ref().map(|f| f.l)).unwrap_or(1);
        let g = match (self.g, self.g2) {
            (Some(_), Some(_)) => return Err(CliError::Config("give --g or --g2, not both".into())),
            (Some(g), None) => g,
            (None, Some(g2)) if g2 >= 0.0 => g2.sqrt(),
            (None, Some(g2)) => return Err(CliError::Config(format!("--g2 {g2} is negative"))),
            (None, None) => file.as_ref().map_or(1.0, |f| f.g),
        };
        let masses = match (&self.masses, self.m) {
            (Some(v), _) => v.clone(),
            (None, Some(m)) => vec![m; nf],
            (None, None) => file.as_ref().map_or_else(|| vec![1.0; nf], |f| f.masses.clone()),
        };
        let mut p = ModelParams::new(nc, nf, l, 0.0, g);
        p.masses = masses;
        p.mu_b = self.mu_b.or(file.as_ref().map(|f| f.mu_b)).unwrap_or(0.0);
        p.mu_i = self.mu_i.or(file.as_ref().map(|f| f.mu_i)).unwrap_or(0.0);
        p.h = self.h.or(file.as_ref().map(|f| f.h)).unwrap_or(DEFAULT_PENALTY);
        p.mass_shift = !self.no_mass_shift;
        p.validate().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(p)
    }
}
