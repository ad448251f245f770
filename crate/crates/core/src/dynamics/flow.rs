//! Second-order effective Hamiltonian and its flow in both charts.
//!
//! Moment chart: `H = p²/2m + mΦ(x) + Δ(p²)/2m + ½ m Φ″(x) Δ(x²)` with the
//! brackets `{x,p} = 1`, `{Δ(x²),Δ(xp)} = 2Δ(x²)`, `{Δ(xp),Δ(p²)} = 2Δ(p²)`,
//! `{Δ(x²),Δ(p²)} = 4Δ(xp)`.
//!
//! Canonical chart: `H = p²/2m + p_s²/2m + mΦ(x) + ½ m Φ″(x) s² + U/(2ms²)`.

use super::integrator::{DenseStep, OdeSystem};
use super::potential::PotentialModel;
use super::trajectory::DenseStore;
use crate::error::{Error, Result};
use crate::moments::{casimir, from_canonical, CanonicalState, SecondOrderState};

/// Smallest admissible width relative to the problem's length scale.
pub const S_FLOOR_REL: f64 = 1e-12;

pub fn effective_hamiltonian(
    state: &SecondOrderState,
    pot: &PotentialModel,
    m: f64,
) -> Result<f64> {
    let d = pot.derivatives(state.x_mean)?;
    Ok(state.p_mean * state.p_mean / (2.0 * m)
        + m * d.phi
        + state.dpp / (2.0 * m)
        + 0.5 * m * d.d2 * state.dxx)
}

pub fn effective_hamiltonian_canonical(
    c: &CanonicalState,
    pot: &PotentialModel,
    m: f64,
) -> Result<f64> {
    let d = pot.derivatives(c.x)?;
    let quantum = if c.is_point_particle() {
        0.0
    } else {
        c.u_casimir / (2.0 * m * c.s * c.s)
    };
    Ok((c.p * c.p + c.ps * c.ps) / (2.0 * m) + m * d.phi + 0.5 * m * d.d2 * c.s * c.s + quantum)
}

/// `m Φ_eff(x, s) = m[Φ + ½Φ″s²] + U/(2ms²)`.
pub fn effective_potential(
    x: f64,
    s: f64,
    pot: &PotentialModel,
    m: f64,
    u_casimir: f64,
) -> Result<f64> {
    let d = pot.derivatives(x)?;
    let quantum = if u_casimir == 0.0 {
        0.0
    } else {
        u_casimir / (2.0 * m * s * s)
    };
    Ok(m * (d.phi + 0.5 * d.d2 * s * s) + quantum)
}

/// Time derivatives in the canonical chart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CanonicalRates {
    pub dx: f64,
    pub dp: f64,
    pub ds: f64,
    pub dps: f64,
}

/// Time derivatives of `(⟨x̂⟩, ⟨p̂⟩, Δ(x²), Δ(xp), Δ(p²))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentRates {
    pub dx: f64,
    pub dp: f64,
    pub ddxx: f64,
    pub ddxp: f64,
    pub ddpp: f64,
}

pub fn eom_rhs_canonical(
    c: &CanonicalState,
    pot: &PotentialModel,
    m: f64,
) -> Result<CanonicalRates> {
    let d = pot.derivatives(c.x)?;
    if c.is_point_particle() {
        return Ok(CanonicalRates {
            dx: c.p / m,
            dp: -m * d.d1,
            ds: 0.0,
            dps: 0.0,
        });
    }
    if !(c.s > 0.0) {
        return Err(Error::Singularity {
            t: f64::NAN,
            reason: format!("width s = {} is not positive", c.s),
        });
    }
    let s2 = c.s * c.s;
    Ok(CanonicalRates {
        dx: c.p / m,
        dp: -m * (d.d1 + 0.5 * d.d3 * s2),
        ds: c.ps / m,
        dps: -m * d.d2 * c.s + c.u_casimir / (m * s2 * c.s),
    })
}

pub fn eom_rhs_moments(
    state: &SecondOrderState,
    pot: &PotentialModel,
    m: f64,
) -> Result<MomentRates> {
    let d = pot.derivatives(state.x_mean)?;
    Ok(MomentRates {
        dx: state.p_mean / m,
        dp: -m * (d.d1 + 0.5 * d.d3 * state.dxx),
        ddxx: 2.0 * state.dxp / m,
        ddxp: state.dpp / m - m * d.d2 * state.dxx,
        ddpp: -2.0 * m * d.d2 * state.dxp,
    })
}

/// Width at which the quantum pressure `U/(m s³)` equals the curvature force
/// `m |Φ″| s` in magnitude: `s⁴ = U / (m² |Φ″|)`.
///
/// For the nondimensional Newtonian problem (`m = 1`, `Φ″ = −2/r³`) this is
/// `s⁴ = u r³ / 2`.
pub fn width_balance_scale(u_casimir: f64, m: f64, d2phi: f64) -> Option<f64> {
    if u_casimir > 0.0 && d2phi != 0.0 {
        Some((u_casimir / (m * m * d2phi.abs())).powf(0.25))
    } else {
        None
    }
}

/// Static width of the frozen-centroid width equation. Exists only for a
/// confining curvature `Φ″ > 0`; in the Newtonian field both forces push the
/// width outward and there is no equilibrium.
pub fn width_equilibrium(u_casimir: f64, m: f64, d2phi: f64) -> Option<f64> {
    if d2phi > 0.0 {
        width_balance_scale(u_casimir, m, d2phi)
    } else {
        None
    }
}

/// A flow that can be integrated and sampled as a [`Trajectory`](super::Trajectory).
pub trait Flow<const N: usize>: OdeSystem<N> {
    fn encode(&self, c: &CanonicalState) -> Result<[f64; N]>;
    fn decode(&self, y: &[f64; N]) -> CanonicalState;
    fn potential(&self) -> PotentialModel;
    fn mass(&self) -> f64;
    fn dense_store(&self, steps: Vec<DenseStep<N>>) -> DenseStore;
}

/// Canonical-chart flow on `(x, p, s, p_s)` with fixed `U`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CanonicalFlow {
    pub potential: PotentialModel,
    pub mass: f64,
    pub u_casimir: f64,
    /// Integration aborts once `s` drops below this value.
    pub s_floor: f64,
}

impl CanonicalFlow {
    /// `length_scale` sets the singularity guard `s_floor = 1e-12 · length_scale`.
    pub fn new(potential: PotentialModel, mass: f64, u_casimir: f64, length_scale: f64) -> Self {
        Self {
            potential,
            mass,
            u_casimir,
            s_floor: S_FLOOR_REL * length_scale,
        }
    }

    fn state(&self, y: &[f64; 4]) -> CanonicalState {
        CanonicalState::new(y[0], y[1], y[2], y[3], self.u_casimir)
    }

    fn forces(&self, y: &[f64; 4]) -> Result<(f64, f64)> {
        let r = eom_rhs_canonical(&self.state(y), &self.potential, self.mass)?;
        Ok((r.dp, r.dps))
    }
}

impl OdeSystem<4> for CanonicalFlow {
    fn rhs(&self, t: f64, y: &[f64; 4]) -> Result<[f64; 4]> {
        let r =
            eom_rhs_canonical(&self.state(y), &self.potential, self.mass).map_err(|e| match e {
                Error::Singularity { reason, .. } => Error::Singularity { t, reason },
                other => other,
            })?;
        Ok([r.dx, r.dp, r.ds, r.dps])
    }

    fn validate(&self, t: f64, y: &[f64; 4]) -> Result<()> {
        if !self.potential.in_domain(y[0]) {
            return Err(Error::Singularity {
                t,
                reason: format!("centroid {} left the potential domain", y[0]),
            });
        }
        if !self.state(y).is_point_particle() && y[2] < self.s_floor {
            return Err(Error::Singularity {
                t,
                reason: format!("width {} fell below the floor {}", y[2], self.s_floor),
            });
        }
        Ok(())
    }

    fn split_step(&self, _t: f64, y: &[f64; 4], h: f64) -> Option<Result<[f64; 4]>> {
        Some((|| {
            let (fp, fs) = self.forces(y)?;
            let p_half = y[1] + 0.5 * h * fp;
            let ps_half = y[3] + 0.5 * h * fs;
            let moved = [
                y[0] + h * p_half / self.mass,
                p_half,
                y[2] + h * ps_half / self.mass,
                ps_half,
            ];
            let (fp, fs) = self.forces(&moved)?;
            Ok([
                moved[0],
                p_half + 0.5 * h * fp,
                moved[2],
                ps_half + 0.5 * h * fs,
            ])
        })())
    }
}

impl Flow<4> for CanonicalFlow {
    fn encode(&self, c: &CanonicalState) -> Result<[f64; 4]> {
        if c.u_casimir != self.u_casimir {
            return Err(Error::InvalidInput(format!(
                "state casimir {} differs from flow casimir {}",
                c.u_casimir, self.u_casimir
            )));
        }
        Ok([c.x, c.p, c.s, c.ps])
    }

    fn decode(&self, y: &[f64; 4]) -> CanonicalState {
        self.state(y)
    }

    fn potential(&self) -> PotentialModel {
        self.potential
    }

    fn mass(&self) -> f64 {
        self.mass
    }

    fn dense_store(&self, steps: Vec<DenseStep<4>>) -> DenseStore {
        DenseStore::Canonical {
            u_casimir: self.u_casimir,
            steps,
        }
    }
}

/// Bracket-generated flow on the five moment coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentFlow {
    pub potential: PotentialModel,
    pub mass: f64,
}

impl MomentFlow {
    pub fn new(potential: PotentialModel, mass: f64) -> Self {
        Self { potential, mass }
    }
}

pub(crate) fn moments_to_canonical(y: &[f64; 5]) -> CanonicalState {
    let st = SecondOrderState::new(y[0], y[1], y[2], y[3], y[4]);
    if st.dxx <= 0.0 {
        return CanonicalState::point(y[0], y[1]);
    }
    let s = st.dxx.sqrt();
    CanonicalState::new(y[0], y[1], s, st.dxp / s, casimir(&st))
}

impl OdeSystem<5> for MomentFlow {
    fn rhs(&self, _t: f64, y: &[f64; 5]) -> Result<[f64; 5]> {
        let r = eom_rhs_moments(&SecondOrderState::from(*y), &self.potential, self.mass)?;
        Ok([r.dx, r.dp, r.ddxx, r.ddxp, r.ddpp])
    }

    fn validate(&self, t: f64, y: &[f64; 5]) -> Result<()> {
        if !self.potential.in_domain(y[0]) {
            return Err(Error::Singularity {
                t,
                reason: format!("centroid {} left the potential domain", y[0]),
            });
        }
        if y[2] < 0.0 {
            return Err(Error::Singularity {
                t,
                reason: format!("negative position variance {}", y[2]),
            });
        }
        Ok(())
    }
}

impl Flow<5> for MomentFlow {
    fn encode(&self, c: &CanonicalState) -> Result<[f64; 5]> {
        Ok((&from_canonical(c)).into())
    }

    fn decode(&self, y: &[f64; 5]) -> CanonicalState {
        moments_to_canonical(y)
    }

    fn potential(&self) -> PotentialModel {
        self.potential
    }

    fn mass(&self) -> f64 {
        self.mass
    }

    fn dense_store(&self, steps: Vec<DenseStep<5>>) -> DenseStore {
        DenseStore::Moments { steps }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moments::{to_canonical, HbarContext};
    use approx::assert_relative_eq;

    #[test]
    fn hamiltonian_examples() {
        let free = PotentialModel::free();
        let classical = SecondOrderState::new(0.3, 2.0, 0.0, 0.0, 0.0);
        assert_eq!(effective_hamiltonian(&classical, &free, 2.0).unwrap(), 1.0);

        let lin = PotentialModel::linear(9.8);
        let st = SecondOrderState::minimal_gaussian(1.0, 0.5, 0.1, 1.0);
        let h = effective_hamiltonian(&st, &lin, 2.0).unwrap();
        assert_relative_eq!(
            h,
            0.25 / 4.0 + 2.0 * 9.8 + st.dpp / 4.0,
            max_relative = 1e-15
        );

        let newton = PotentialModel::newtonian_nondimensional();
        let c = CanonicalState::new(1.0, 0.5, 0.1, 0.0, 1e-6);
        let h = effective_hamiltonian_canonical(&c, &newton, 1.0).unwrap();
        assert_relative_eq!(h, -0.88495, max_relative = 1e-13);
    }

    #[test]
    fn canonical_rhs_examples() {
        let (m, u) = (2.0, 0.25);
        let c = CanonicalState::new(0.3, 1.0, 0.5, 0.2, u);
        let r = eom_rhs_canonical(&c, &PotentialModel::free(), m).unwrap();
        assert_eq!((r.dx, r.dp, r.ds), (0.5, 0.0, 0.1));
        assert_relative_eq!(r.dps, u / (m * 0.125), max_relative = 1e-15);

        let lin = eom_rhs_canonical(&c, &PotentialModel::linear(9.8), m).unwrap();
        assert_eq!(lin.dp, -m * 9.8);
        assert_eq!((lin.ds, lin.dps), (r.ds, r.dps));

        let c = CanonicalState::new(1.0, 0.0, 0.1, 0.0, 1e-6);
        let r = eom_rhs_canonical(&c, &PotentialModel::newtonian_nondimensional(), 1.0).unwrap();
        assert_relative_eq!(r.dp, -1.03, max_relative = 1e-14);
        assert_relative_eq!(r.dps, 0.201, max_relative = 1e-13);
    }

    #[test]
    fn singular_width_rejected() {
        let c = CanonicalState::new(1.0, 0.0, 0.0, 0.0, 1e-6);
        assert!(matches!(
            eom_rhs_canonical(&c, &PotentialModel::free(), 1.0),
            Err(Error::Singularity { .. })
        ));
        // Point particle is the classical baseline.
        let p = CanonicalState::point(1.0, 0.5);
        let r = eom_rhs_canonical(&p, &PotentialModel::newtonian_nondimensional(), 1.0).unwrap();
        assert_eq!((r.dx, r.dp, r.ds, r.dps), (0.5, -1.0, 0.0, 0.0));
    }

    #[test]
    fn free_moment_rates() {
        let st = SecondOrderState::new(0.1, 3.0, 2.0, 0.7, 5.0);
        let r = eom_rhs_moments(&st, &PotentialModel::free(), 2.0).unwrap();
        assert_eq!(
            (r.dx, r.dp, r.ddxx, r.ddxp, r.ddpp),
            (1.5, 0.0, 0.7, 2.5, 0.0)
        );
    }

    #[test]
    fn quadratic_momentum_variance_rate() {
        let (m, k) = (1.7, 0.9);
        let st = SecondOrderState::new(0.1, 3.0, 2.0, 0.7, 5.0);
        let r = eom_rhs_moments(&st, &PotentialModel::quadratic(0.0, k), m).unwrap();
        assert_relative_eq!(r.ddpp, -2.0 * m * k * 0.7, max_relative = 1e-15);
    }

    #[test]
    fn newtonian_width_has_no_equilibrium() {
        let d2 = PotentialModel::newtonian_nondimensional()
            .d2phi(1.0)
            .unwrap();
        assert!(width_equilibrium(1e-6, 1.0, d2).is_none());
        let s = width_balance_scale(1e-6, 1.0, d2).unwrap();
        assert_relative_eq!(s.powi(4), 1e-6 / 2.0, max_relative = 1e-12);
    }

    #[test]
    fn confining_curvature_equilibrium_is_static() {
        let (m, k, u) = (1.3, 4.0, 0.25);
        let pot = PotentialModel::quadratic(0.0, k);
        let s = width_equilibrium(u, m, k).unwrap();
        let r = eom_rhs_canonical(&CanonicalState::new(0.0, 0.0, s, 0.0, u), &pot, m).unwrap();
        assert!(r.ds == 0.0 && r.dps.abs() < 1e-12 * (m * k * s), "{r:?}");
    }

    #[test]
    fn charts_agree_at_a_point() {
        let pot = PotentialModel::newtonian(3.0);
        let st = SecondOrderState::new(1.4, -0.3, 0.02, 0.004, 15.0);
        let c = to_canonical(&st, &HbarContext::natural()).unwrap();
        let mr = eom_rhs_moments(&st, &pot, 1.1).unwrap();
        let cr = eom_rhs_canonical(&c, &pot, 1.1).unwrap();
        let ds = mr.ddxx / (2.0 * c.s);
        let dps = (mr.ddxp - ds * c.ps) / c.s;
        assert_relative_eq!(cr.ds, ds, max_relative = 1e-12);
        assert_relative_eq!(cr.dps, dps, max_relative = 1e-12);
        assert_relative_eq!(cr.dp, mr.dp, max_relative = 1e-12);
    }
}
