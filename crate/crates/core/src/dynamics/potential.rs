use crate::error::{Error, Result};

/// Unit system a potential (and the states fed to it) is expressed in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Units {
    #[default]
    Si,
    Nondimensional,
}

/// Gravitational potential per unit mass `Φ(x)`; the potential energy is `mΦ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PotentialKind {
    Free,
    /// `Φ = g x`.
    Linear {
        g: f64,
    },
    /// `Φ = g x + ½ k x²`; `k` is the constant field curvature `Φ″`.
    Quadratic {
        g: f64,
        k: f64,
    },
    /// `Φ = −GM / x` for `x > 0`.
    Newtonian {
        gm: f64,
    },
    /// `Φ = −(GM / x)[1 + α (r₀ / x)^{N−1}]` for `x > 0`.
    PowerLaw {
        gm: f64,
        alpha: f64,
        n: f64,
        r0: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PotentialModel {
    pub kind: PotentialKind,
    pub units: Units,
}

/// `Φ` and its first three derivatives at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PotentialDerivatives {
    pub phi: f64,
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
}

/// Derivatives of `c · x^{−k}` up to third order.
fn inverse_power(c: f64, k: f64, x: f64) -> [f64; 4] {
    let base = c * x.powf(-k);
    [
        base,
        -k * base / x,
        k * (k + 1.0) * base / (x * x),
        -k * (k + 1.0) * (k + 2.0) * base / (x * x * x),
    ]
}

impl PotentialModel {
    pub fn new(kind: PotentialKind, units: Units) -> Self {
        Self { kind, units }
    }

    pub fn free() -> Self {
        Self::new(PotentialKind::Free, Units::Si)
    }

    pub fn linear(g: f64) -> Self {
        Self::new(PotentialKind::Linear { g }, Units::Si)
    }

    pub fn quadratic(g: f64, k: f64) -> Self {
        Self::new(PotentialKind::Quadratic { g, k }, Units::Si)
    }

    pub fn newtonian(gm: f64) -> Self {
        Self::new(PotentialKind::Newtonian { gm }, Units::Si)
    }

    /// Newtonian potential with `GM = 1`.
    pub fn newtonian_nondimensional() -> Self {
        Self::new(PotentialKind::Newtonian { gm: 1.0 }, Units::Nondimensional)
    }

    pub fn power_law(gm: f64, alpha: f64, n: f64, r0: f64) -> Self {
        Self::new(PotentialKind::PowerLaw { gm, alpha, n, r0 }, Units::Si)
    }

    pub fn with_units(mut self, units: Units) -> Self {
        self.units = units;
        self
    }

    pub fn in_domain(&self, x: f64) -> bool {
        match self.kind {
            PotentialKind::Newtonian { .. } | PotentialKind::PowerLaw { .. } => {
                x > 0.0 && x.is_finite()
            }
            _ => x.is_finite(),
        }
    }

    /// True when `Φ‴ ≡ 0`, i.e. the centroid decouples from the width sector.
    pub fn is_at_most_quadratic(&self) -> bool {
        matches!(
            self.kind,
            PotentialKind::Free | PotentialKind::Linear { .. } | PotentialKind::Quadratic { .. }
        )
    }

    pub fn derivatives(&self, x: f64) -> Result<PotentialDerivatives> {
        if !self.in_domain(x) {
            return Err(Error::Domain { x });
        }
        let [phi, d1, d2, d3] = match self.kind {
            PotentialKind::Free => [0.0; 4],
            PotentialKind::Linear { g } => [g * x, g, 0.0, 0.0],
            PotentialKind::Quadratic { g, k } => [g * x + 0.5 * k * x * x, g + k * x, k, 0.0],
            PotentialKind::Newtonian { gm } => inverse_power(-gm, 1.0, x),
            PotentialKind::PowerLaw { gm, alpha, n, r0 } => {
                let a = inverse_power(-gm, 1.0, x);
                let b = inverse_power(-gm * alpha * r0.powf(n - 1.0), n, x);
                [a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]]
            }
        };
        Ok(PotentialDerivatives { phi, d1, d2, d3 })
    }

    pub fn phi(&self, x: f64) -> Result<f64> {
        Ok(self.derivatives(x)?.phi)
    }

    /// Field strength `g(x) = Φ′(x)`.
    pub fn dphi(&self, x: f64) -> Result<f64> {
        Ok(self.derivatives(x)?.d1)
    }

    pub fn d2phi(&self, x: f64) -> Result<f64> {
        Ok(self.derivatives(x)?.d2)
    }

    pub fn d3phi(&self, x: f64) -> Result<f64> {
        Ok(self.derivatives(x)?.d3)
    }
}
