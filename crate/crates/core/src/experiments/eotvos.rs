use std::io::{self, Write};

use crate::dynamics::PotentialModel;
use crate::error::{Error, Result};
use crate::fmt17;
use crate::moments::SecondOrderState;

/// Terrestrial field strength in m/s².
pub const TERRESTRIAL_G: f64 = 10.0;
/// Terrestrial second field derivative `∂ₓ²g` in 1/(m·s²).
pub const TERRESTRIAL_D2G: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EotvosInput {
    pub g: f64,
    pub d2g: f64,
    pub dxx: f64,
}

impl EotvosInput {
    pub fn new(g: f64, d2g: f64, dxx: f64) -> Result<Self> {
        if !(g > 0.0) {
            return Err(Error::InvalidInput(format!(
                "field strength must be positive, got {g}"
            )));
        }
        if !(dxx >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "position variance must be non-negative, got {dxx}"
            )));
        }
        Ok(Self { g, d2g, dxx })
    }

    pub fn terrestrial(dxx: f64) -> Result<Self> {
        Self::new(TERRESTRIAL_G, TERRESTRIAL_D2G, dxx)
    }
}

/// `η = ½ ∂ₓ²g Δ(x²) / g`.
pub fn eotvos_estimate(input: &EotvosInput) -> f64 {
    0.5 * input.d2g * input.dxx / input.g
}

/// Largest width `s = √Δ(x²)` keeping `η ≤ eta_max`.
pub fn width_bound_from_eta(g: f64, d2g: f64, eta_max: f64) -> Result<f64> {
    if !(d2g > 0.0) {
        return Err(Error::InvalidInput(format!(
            "∂ₓ²g must be positive, got {d2g}"
        )));
    }
    if !(g > 0.0) || !(eta_max >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "need g > 0 and eta_max ≥ 0, got g={g}, eta_max={eta_max}"
        )));
    }
    Ok((2.0 * g * eta_max / d2g).sqrt())
}

/// Deviation `|½ Φ‴ Δ(x²)|` of the centroid acceleration from local free fall.
pub fn anomalous_acceleration(pot: &PotentialModel, state: &SecondOrderState) -> Result<f64> {
    Ok((0.5 * pot.d3phi(state.x_mean)? * state.dxx).abs())
}

/// CSV with columns `g,d2g,dxx,eta`.
pub fn write_eotvos_csv<W: Write>(mut w: W, inputs: &[EotvosInput]) -> io::Result<()> {
    writeln!(w, "g,d2g,dxx,eta")?;
    for i in inputs {
        writeln!(
            w,
            "{},{},{},{}",
            fmt17(i.g),
            fmt17(i.d2g),
            fmt17(i.dxx),
            fmt17(eotvos_estimate(i))
        )?;
    }
    Ok(())
}
