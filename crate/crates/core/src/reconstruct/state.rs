use std::io::{self, Write};

use super::hermite::HermiteBasis;
use crate::error::{Error, Result};
use crate::fmt17;
use crate::moments::{hankel_psd_check, RawMomentSequence};
use crate::quadrature::{composite_legendre, ScaledHermite};

/// Relative depth below which negative density counts as a truncation artifact.
pub const NEGATIVITY_TOL: f64 = 1e-10;

const SCAN_POINTS: usize = 2401;

/// Density `ρ = w Σ cₙ Lₙ` and, when mixed moments are known, the phase
/// gradient `ħρ θ′ = w Σ dₙ Lₙ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructedState {
    pub basis: HermiteBasis,
    pub density_coeffs: Vec<f64>,
    pub phase_deriv_coeffs: Option<Vec<f64>>,
    /// Global phase; `None` means undetermined (pure gauge).
    pub theta0: Option<f64>,
    pub hbar: f64,
    /// Densities below this are rejected when forming `θ′`.
    pub density_floor: f64,
    /// Intervals on the ±6σ window where the truncated density dips below zero.
    pub negative_intervals: Vec<(f64, f64)>,
}

/// Builds the density expansion of `raw` in `basis`.
///
/// The Hankel test must pass; negative lobes on the ±6σ window are recorded in
/// [`ReconstructedState::negative_intervals`] rather than clipped.
pub fn reconstruct_density(
    raw: &RawMomentSequence,
    basis: &HermiteBasis,
    hbar: f64,
) -> Result<ReconstructedState> {
    let report = hankel_psd_check(raw);
    if !report.positive {
        return Err(Error::NoRepresentingDistribution {
            min_eigenvalue: report.min_eigenvalue,
        });
    }
    if raw.order() < basis.order {
        return Err(Error::UnsupportedOrder {
            order: basis.order,
            reason: format!("only {} raw moments supplied", raw.order() + 1),
        });
    }
    if !(hbar > 0.0) {
        return Err(Error::InvalidInput(format!(
            "hbar must be positive, got {hbar}"
        )));
    }
    let density_coeffs = normalize(basis, basis.project(&raw.moments()[..=basis.order]));
    let mut state = ReconstructedState {
        basis: basis.clone(),
        density_coeffs,
        phase_deriv_coeffs: None,
        theta0: None,
        hbar,
        density_floor: 0.0,
        negative_intervals: Vec::new(),
    };
    let sigma = match raw.moments().get(2) {
        Some(&m2) if m2 - raw.mean().powi(2) > 0.0 => (m2 - raw.mean().powi(2)).sqrt(),
        _ => basis.alpha / std::f64::consts::SQRT_2,
    };
    state.negative_intervals =
        state.scan_negative(raw.mean() - 6.0 * sigma, raw.mean() + 6.0 * sigma);
    Ok(state)
}

fn normalize(basis: &HermiteBasis, projections: Vec<f64>) -> Vec<f64> {
    projections
        .into_iter()
        .enumerate()
        .map(|(n, v)| v / basis.norm(n))
        .collect()
}

/// Adds the phase-gradient expansion built from `Re⟨x̂ⁿp̂⟩`.
///
/// Only the mixed moments supplied enter, up to the basis order, so a caller
/// working at first order passes `⟨p̂⟩` alone.
pub fn reconstruct_phase_derivative(
    raw: &RawMomentSequence,
    density: ReconstructedState,
) -> Result<ReconstructedState> {
    let mixed = raw.mixed().ok_or_else(|| Error::UnsupportedOrder {
        order: density.basis.order,
        reason: "no mixed moments supplied".into(),
    })?;
    if mixed.is_empty() {
        return Err(Error::UnsupportedOrder {
            order: 0,
            reason: "mean momentum missing".into(),
        });
    }
    let n = mixed.len().min(density.basis.order + 1);
    let coeffs = normalize(&density.basis, density.basis.project(&mixed[..n]));
    Ok(ReconstructedState {
        phase_deriv_coeffs: Some(coeffs),
        ..density
    })
}

/// Density and phase gradient from a raw sequence carrying mixed moments.
pub fn reconstruct(
    raw: &RawMomentSequence,
    basis: &HermiteBasis,
    hbar: f64,
) -> Result<ReconstructedState> {
    reconstruct_phase_derivative(raw, reconstruct_density(raw, basis, hbar)?)
}

fn series(coeffs: &[f64], values: &[f64]) -> f64 {
    coeffs.iter().zip(values).map(|(c, l)| c * l).sum()
}

/// One sampled row of a density/phase profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileRow {
    pub x: f64,
    pub rho: f64,
    pub dtheta_dx: f64,
    pub theta: f64,
}

impl ReconstructedState {
    pub fn density(&self, x: f64) -> f64 {
        self.basis.weight(x) * series(&self.density_coeffs, &self.basis.values(x))
    }

    pub fn amplitude(&self, x: f64) -> f64 {
        self.density(x).max(0.0).sqrt()
    }

    pub fn is_flagged(&self) -> bool {
        !self.negative_intervals.is_empty()
    }

    /// `θ′(x)`, evaluated as a ratio of the two series so that the weight cancels.
    pub fn phase_derivative(&self, x: f64) -> Result<f64> {
        let d = self
            .phase_deriv_coeffs
            .as_ref()
            .ok_or_else(|| Error::UnsupportedOrder {
                order: self.basis.order,
                reason: "phase gradient was not reconstructed".into(),
            })?;
        let l = self.basis.values(x);
        let poly = series(&self.density_coeffs, &l);
        let rho = self.basis.weight(x) * poly;
        if !(poly > 0.0) || rho < self.density_floor {
            return Err(Error::DensityFloor { x, rho });
        }
        Ok(series(d, &l) / (self.hbar * poly))
    }

    /// `∫ xᵏ ρ dx` for `k ≤ k_max`, exact for polynomial integrands of that degree.
    pub fn quadrature_moments(&self, k_max: usize) -> Vec<f64> {
        let q = self.rule(k_max);
        (0..=k_max)
            .map(|k| {
                q.integrate_weighted(|x| {
                    x.powi(k as i32) * series(&self.density_coeffs, &self.basis.values(x))
                })
            })
            .collect()
    }

    /// `ħ ∫ xᵏ ρ θ′ dx` for `k ≤ k_max`.
    pub fn quadrature_mixed(&self, k_max: usize) -> Option<Vec<f64>> {
        let d = self.phase_deriv_coeffs.as_ref()?;
        let q = self.rule(k_max);
        Some(
            (0..=k_max)
                .map(|k| {
                    q.integrate_weighted(|x| x.powi(k as i32) * series(d, &self.basis.values(x)))
                })
                .collect(),
        )
    }

    fn rule(&self, k_max: usize) -> ScaledHermite {
        let nodes = (4 * (self.basis.order + 2)).max(k_max + self.basis.order + 2);
        ScaledHermite::new(nodes, self.basis.m, self.basis.alpha)
    }

    fn scan_negative(&self, a: f64, b: f64) -> Vec<(f64, f64)> {
        let xs: Vec<f64> = (0..SCAN_POINTS)
            .map(|i| a + (b - a) * i as f64 / (SCAN_POINTS - 1) as f64)
            .collect();
        let rho: Vec<f64> = xs.iter().map(|&x| self.density(x)).collect();
        let peak = rho.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let mut out = Vec::new();
        let mut start: Option<f64> = None;
        for (&x, &r) in xs.iter().zip(&rho) {
            let neg = r < -NEGATIVITY_TOL * peak;
            match (neg, start) {
                (true, None) => start = Some(x),
                (false, Some(s)) => {
                    out.push((s, x));
                    start = None;
                }
                _ => {}
            }
        }
        if let Some(s) = start {
            out.push((s, b));
        }
        out
    }

    /// Samples `ρ`, `θ′` and `θ` at the increasing points `xs`; `θ` is
    /// integrated from `xs[0]`, where it equals `theta0` (zero when undetermined).
    pub fn profile(&self, xs: &[f64]) -> Result<Vec<ProfileRow>> {
        match self.profile_partial(xs) {
            (rows, None) => Ok(rows),
            (_, Some(e)) => Err(e),
        }
    }

    /// Like [`profile`](Self::profile) but keeps the rows computed before the
    /// first failure.
    pub fn profile_partial(&self, xs: &[f64]) -> (Vec<ProfileRow>, Option<Error>) {
        let mut theta = self.theta0.unwrap_or(0.0);
        let mut rows = Vec::with_capacity(xs.len());
        for (i, &x) in xs.iter().enumerate() {
            if i > 0 {
                if xs[i] <= xs[i - 1] {
                    return (
                        rows,
                        Some(Error::InvalidInput(
                            "profile points must be strictly increasing".into(),
                        )),
                    );
                }
                let mut failure = None;
                theta += composite_legendre(&[xs[i - 1], x], 8, |z| {
                    self.phase_derivative(z).unwrap_or_else(|e| {
                        failure.get_or_insert(e);
                        0.0
                    })
                });
                if let Some(e) = failure {
                    return (rows, Some(e));
                }
            }
            match self.phase_derivative(x) {
                Ok(dtheta_dx) => rows.push(ProfileRow {
                    x,
                    rho: self.density(x),
                    dtheta_dx,
                    theta,
                }),
                Err(e) => return (rows, Some(e)),
            }
        }
        (rows, None)
    }
}

/// CSV with columns `x,rho,dtheta_dx,theta`.
pub fn write_profile_csv<W: Write>(mut w: W, rows: &[ProfileRow]) -> io::Result<()> {
    writeln!(w, "x,rho,dtheta_dx,theta")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{}",
            fmt17(r.x),
            fmt17(r.rho),
            fmt17(r.dtheta_dx),
            fmt17(r.theta)
        )?;
    }
    Ok(())
}
