use crate::error::{Error, Result};
use crate::moments::CanonicalState;

/// Characteristic scales of the Newtonian problem.
///
/// `t_c = √(r_c³/GM)`, `p_c = m r_c / t_c` and `E_c = GMm / r_c`; in these
/// units `GM = 1` and the only remaining parameter is
/// `u = (ħ²/4) / (r_c p_c)²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaleSet {
    pub r_c: f64,
    pub t_c: f64,
    pub p_c: f64,
    pub e_c: f64,
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "{name} must be positive, got {v}"
        )))
    }
}

impl ScaleSet {
    pub fn new(r_c: f64, gm: f64, m: f64) -> Result<Self> {
        positive("r_c", r_c)?;
        positive("GM", gm)?;
        positive("m", m)?;
        let t_c = (r_c.powi(3) / gm).sqrt();
        Ok(Self {
            r_c,
            t_c,
            p_c: m * r_c / t_c,
            e_c: gm * m / r_c,
        })
    }

    pub fn nondimensionalize(&self, c: &CanonicalState) -> CanonicalState {
        let action = self.r_c * self.p_c;
        CanonicalState::new(
            c.x / self.r_c,
            c.p / self.p_c,
            c.s / self.r_c,
            c.ps / self.p_c,
            c.u_casimir / (action * action),
        )
    }

    pub fn dimensionalize(&self, c: &CanonicalState) -> CanonicalState {
        let action = self.r_c * self.p_c;
        CanonicalState::new(
            c.x * self.r_c,
            c.p * self.p_c,
            c.s * self.r_c,
            c.ps * self.p_c,
            c.u_casimir * action * action,
        )
    }

    pub fn time_to_si(&self, t: f64) -> f64 {
        t * self.t_c
    }
}

/// `u = (ħ²/4) / (G M m² r_c)`.
pub fn u_parameter(m: f64, big_m: f64, r_c: f64, hbar: f64, g: f64) -> Result<f64> {
    positive("m", m)?;
    positive("M", big_m)?;
    positive("r_c", r_c)?;
    positive("hbar", hbar)?;
    positive("G", g)?;
    Ok(hbar * hbar / 4.0 / (g * big_m * m * m * r_c))
}
