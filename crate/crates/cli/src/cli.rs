//! Command-line surface. Per-command values are taken as text and resolved
//! together with the config file, so both report errors the same way.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::config::Params;
use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "qfall",
    version,
    about = "Moment dynamics of quantum particles in gravitational fields"
)]
pub struct Cli {
    /// Flat `key = value` file; command-line flags override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Directory for CSV, SVG and manifest output.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    /// Also write SVG plots.
    #[arg(long, global = true)]
    pub svg: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate one trajectory and write t,x,p,s,ps,energy,casimir.
    Simulate(SimulateArgs),
    /// Sweep return times over energies and u values.
    ReturnTime(ReturnTimeArgs),
    /// Eötvös parameter for a list of packet widths.
    Eotvos(EotvosArgs),
    /// Rebuild density and phase from moments.
    Reconstruct(ReconstructArgs),
    /// Mach–Zehnder phase over pulse spacings and field gradients.
    Interferometer(InterferometerArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Simulate(_) => "simulate",
            Command::ReturnTime(_) => "return-time",
            Command::Eotvos(_) => "eotvos",
            Command::Reconstruct(_) => "reconstruct",
            Command::Interferometer(_) => "interferometer",
        }
    }

    fn flag_values(&self) -> Result<serde_json::Value, CliError> {
        Ok(match self {
            Command::Simulate(a) => serde_json::to_value(a)?,
            Command::ReturnTime(a) => serde_json::to_value(a)?,
            Command::Eotvos(a) => serde_json::to_value(a)?,
            Command::Reconstruct(a) => serde_json::to_value(a)?,
            Command::Interferometer(a) => serde_json::to_value(a)?,
        })
    }

    /// Every key this command accepts, in config-file spelling.
    pub fn keys(&self) -> Result<Vec<String>, CliError> {
        let value = self.flag_values()?;
        let obj = value
            .as_object()
            .expect("argument structs serialize to objects");
        Ok(obj.keys().cloned().collect())
    }

    /// Config file (if any) overlaid with the flags given on the command line.
    pub fn params(&self, config: Option<&std::path::Path>) -> Result<Params, CliError> {
        let keys = self.keys()?;
        let mut params = match config {
            Some(path) => Params::from_file(path, self.name(), &keys)?,
            None => Params::default(),
        };
        if let serde_json::Value::Object(map) = self.flag_values()? {
            for (k, v) in map {
                if let serde_json::Value::String(s) = v {
                    params.set_flag(&k, s);
                }
            }
        }
        Ok(params)
    }
}

#[derive(Debug, Clone, Default, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct SimulateArgs {
    /// free | linear | quadratic | newtonian | power-law
    #[arg(long)]
    pub potential: Option<String>,
    /// si | natural | nondimensional
    #[arg(long)]
    pub units: Option<String>,
    /// Uniform field strength for linear and quadratic potentials.
    #[arg(long, allow_hyphen_values = true)]
    pub g: Option<String>,
    /// Field curvature Φ″ of the quadratic potential.
    #[arg(long, allow_hyphen_values = true)]
    pub curvature: Option<String>,
    #[arg(long)]
    pub gm: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub pl_alpha: Option<String>,
    #[arg(long)]
    pub pl_n: Option<String>,
    #[arg(long)]
    pub pl_r0: Option<String>,
    #[arg(long)]
    pub mass: Option<String>,
    #[arg(long)]
    pub hbar: Option<String>,
    /// Dimensionless uncertainty scale (nondimensional units).
    #[arg(long)]
    pub u: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub x0: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub p0: Option<String>,
    /// Initial width s = √Δ(x²).
    #[arg(long)]
    pub sigma: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub ps0: Option<String>,
    /// Casimir U; defaults to the minimal value ħ²/4.
    #[arg(long)]
    pub casimir: Option<String>,
    /// true: classical point particle, no width sector.
    #[arg(long)]
    pub point: Option<String>,
    #[arg(long)]
    pub t_end: Option<String>,
    /// Equally spaced output rows; 0 writes every integration node.
    #[arg(long)]
    pub samples: Option<String>,
    /// canonical | moments
    #[arg(long)]
    pub chart: Option<String>,
    /// adaptive | verlet
    #[arg(long)]
    pub method: Option<String>,
    /// Step size for verlet, initial step for adaptive.
    #[arg(long)]
    pub step: Option<String>,
    #[arg(long)]
    pub rtol: Option<String>,
    #[arg(long)]
    pub atol: Option<String>,
    #[arg(long)]
    pub seed: Option<String>,
}

#[derive(Debug, Clone, Default, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct ReturnTimeArgs {
    /// Comma-separated u values; u = 0 is always added as the classical reference.
    #[arg(long)]
    pub u: Option<String>,
    /// start:stop:count, inclusive.
    #[arg(long, allow_hyphen_values = true)]
    pub eps_grid: Option<String>,
    /// classical (ε = p²/2 − 1/r) | kinetic (launch kinetic energy)
    #[arg(long)]
    pub abscissa: Option<String>,
    #[arg(long)]
    pub r0: Option<String>,
    /// Fixed initial width; default is the balance width (u r₀³/2)^{1/4}.
    #[arg(long)]
    pub s0: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub ps0: Option<String>,
    #[arg(long)]
    pub t_max: Option<String>,
    #[arg(long)]
    pub escape_factor: Option<String>,
    #[arg(long)]
    pub rtol: Option<String>,
    #[arg(long)]
    pub atol: Option<String>,
    #[arg(long)]
    pub seed: Option<String>,
}

#[derive(Debug, Clone, Default, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct EotvosArgs {
    #[arg(long)]
    pub g: Option<String>,
    /// Second field derivative ∂ₓ²g.
    #[arg(long, allow_hyphen_values = true)]
    pub d2g: Option<String>,
    /// Comma-separated packet widths s; Δ(x²) = s².
    #[arg(long)]
    pub width: Option<String>,
    /// Comma-separated Δ(x²) values, used instead of widths.
    #[arg(long)]
    pub dxx: Option<String>,
    /// Report the largest width compatible with this η.
    #[arg(long)]
    pub eta_max: Option<String>,
    #[arg(long)]
    pub seed: Option<String>,
}

#[derive(Debug, Clone, Default, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct ReconstructArgs {
    #[arg(long)]
    pub order: Option<String>,
    #[arg(long)]
    pub hbar: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub x_mean: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub p_mean: Option<String>,
    #[arg(long)]
    pub dxx: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub dxp: Option<String>,
    /// Defaults to the pure-state value (ħ²/4 + Δ(xp)²)/Δ(x²).
    #[arg(long)]
    pub dpp: Option<String>,
    /// Raw moments ⟨x̂⁰⟩,…,⟨x̂ᴺ⟩; overrides the Gaussian moments.
    #[arg(long, allow_hyphen_values = true)]
    pub moments: Option<String>,
    /// Raw mixed moments Re⟨x̂ⁿp̂⟩ for n = 0, 1, ….
    #[arg(long, allow_hyphen_values = true)]
    pub mixed: Option<String>,
    /// Basis centre; defaults to the mean.
    #[arg(long, allow_hyphen_values = true)]
    pub center: Option<String>,
    /// Basis width α; defaults to √(2 Δ(x²)).
    #[arg(long)]
    pub alpha: Option<String>,
    /// start:stop:count, inclusive; defaults to ±6σ with 241 points.
    #[arg(long, allow_hyphen_values = true)]
    pub x_grid: Option<String>,
    #[arg(long)]
    pub seed: Option<String>,
}

#[derive(Debug, Clone, Default, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct InterferometerArgs {
    /// Comma-separated pulse spacings T.
    #[arg(long)]
    pub t_pulse: Option<String>,
    /// Effective wavenumber k of the kick ħk.
    #[arg(long, allow_hyphen_values = true)]
    pub k: Option<String>,
    #[arg(long)]
    pub mass: Option<String>,
    /// si | natural
    #[arg(long)]
    pub units: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub g: Option<String>,
    /// Comma-separated field curvatures Φ″.
    #[arg(long, allow_hyphen_values = true)]
    pub gradient: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub x0: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub p0: Option<String>,
    #[arg(long)]
    pub sigma: Option<String>,
    /// midpoint | lower | a position
    #[arg(long, allow_hyphen_values = true)]
    pub readout: Option<String>,
    #[arg(long)]
    pub rtol: Option<String>,
    #[arg(long)]
    pub atol: Option<String>,
    #[arg(long)]
    pub seed: Option<String>,
}
