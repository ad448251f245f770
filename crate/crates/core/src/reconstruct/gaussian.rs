use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::moments::{
    raw_from_central, symmetric_mixed_from_central, CentralMoments, HbarContext, MixedMomentData,
    RawMomentSequence, SecondOrderState, UNCERTAINTY_REL_TOL,
};

/// `ψ(x) = exp(−(a + iα)x² + (b + iβ)x + c + iγ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianParams {
    pub a: f64,
    pub b: f64,
    pub alpha: f64,
    pub beta: f64,
    pub c: f64,
    pub gamma: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianTemplate {
    pub params: GaussianParams,
    /// False when the Casimir exceeds the minimal uncertainty product, i.e. the
    /// moments describe a mixed state that no single Gaussian reproduces.
    pub pure: bool,
}

impl GaussianParams {
    fn exponent(&self, x: f64) -> Complex64 {
        Complex64::new(
            -self.a * x * x + self.b * x + self.c,
            -self.alpha * x * x + self.beta * x + self.gamma,
        )
    }

    pub fn psi(&self, x: f64) -> Complex64 {
        self.exponent(x).exp()
    }

    /// `ψ′/ψ = −2(a + iα)x + b + iβ`.
    pub fn log_derivative(&self, x: f64) -> Complex64 {
        Complex64::new(
            -2.0 * self.a * x + self.b,
            -2.0 * self.alpha * x + self.beta,
        )
    }

    pub fn dpsi_dx(&self, x: f64) -> Complex64 {
        self.psi(x) * self.log_derivative(x)
    }

    pub fn density(&self, x: f64) -> f64 {
        (2.0 * self.exponent(x).re).exp()
    }

    pub fn phase_derivative(&self, x: f64) -> f64 {
        self.log_derivative(x).im
    }
}

/// Gaussian parameters reproducing a second-order state, with `γ = 0`.
pub fn gaussian_from_moments(
    state: &SecondOrderState,
    ctx: &HbarContext,
) -> Result<GaussianTemplate> {
    let SecondOrderState {
        x_mean,
        p_mean,
        dxx,
        dxp,
        ..
    } = *state;
    if !(dxx > 0.0) {
        return Err(Error::DegenerateState { dxx });
    }
    let u = state.casimir();
    let bound = ctx.hbar * ctx.hbar / 4.0;
    if u < bound * (1.0 - UNCERTAINTY_REL_TOL) {
        return Err(Error::UncertaintyViolation { casimir: u, bound });
    }
    let hbar = ctx.hbar;
    let a = 1.0 / (4.0 * dxx);
    let b = x_mean / (2.0 * dxx);
    let params = GaussianParams {
        a,
        b,
        alpha: -dxp / (2.0 * dxx * hbar),
        beta: p_mean / hbar - dxp * x_mean / (dxx * hbar),
        c: -b * b / (4.0 * a) + (2.0 * a / std::f64::consts::PI).powf(0.25).ln(),
        gamma: 0.0,
    };
    Ok(GaussianTemplate {
        params,
        pure: u <= bound * (1.0 + UNCERTAINTY_REL_TOL),
    })
}

/// `Δ(xᵏ)` of a normal distribution: `σᵏ (k − 1)!!` for even `k`, zero otherwise.
pub fn gaussian_central_moment(variance: f64, k: usize) -> f64 {
    if k % 2 == 1 {
        return 0.0;
    }
    let double_fact: f64 = (1..k).step_by(2).map(|j| j as f64).product();
    variance.powi((k / 2) as i32) * double_fact
}

/// Raw moments `⟨x̂ᵏ⟩` and `Re⟨x̂ᵏp̂⟩` up to `order` of the Gaussian pure state
/// with the given second-order moments; `Δ(xᵏp) = Δ(xp) Δ(xᵏ⁺¹)/Δ(x²)`.
pub fn gaussian_moment_sequence(
    state: &SecondOrderState,
    order: usize,
) -> Result<RawMomentSequence> {
    if !(state.dxx > 0.0) {
        return Err(Error::DegenerateState { dxx: state.dxx });
    }
    let position: Vec<f64> = (0..=order)
        .map(|k| gaussian_central_moment(state.dxx, k))
        .collect();
    let mixed: Vec<f64> = (0..=order)
        .map(|k| state.dxp * gaussian_central_moment(state.dxx, k + 1) / state.dxx)
        .collect();
    let raw = raw_from_central(&CentralMoments {
        mean: state.x_mean,
        values: position.clone(),
    });
    let data = MixedMomentData {
        x_mean: state.x_mean,
        p_mean: state.p_mean,
        position,
        mixed,
    };
    let mixed_raw = (0..=order)
        .map(|n| symmetric_mixed_from_central(&data, n))
        .collect::<Result<Vec<_>>>()?;
    RawMomentSequence::new(raw.moments().to_vec())?.with_mixed(mixed_raw)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::ScaledHermite;
    use approx::assert_relative_eq;

    fn squeezed(hbar: f64) -> SecondOrderState {
        let (dxx, dxp) = (0.3, 0.11);
        SecondOrderState::new(0.4, -1.3, dxx, dxp, (hbar * hbar / 4.0 + dxp * dxp) / dxx)
    }

    #[test]
    fn unsqueezed_parameters() {
        let st = SecondOrderState::minimal_gaussian(1.0, 2.5, 0.5, 1.0);
        let g = gaussian_from_moments(&st, &HbarContext::natural()).unwrap();
        assert_eq!(g.params.alpha, 0.0);
        assert_eq!(g.params.beta, 2.5);
        assert!(g.pure);
    }

    #[test]
    fn template_reproduces_moments() {
        let ctx = HbarContext::natural();
        let st = squeezed(ctx.hbar);
        let g = gaussian_from_moments(&st, &ctx).unwrap().params;
        let q = ScaledHermite::for_gaussian(60, st.x_mean, st.dxx);
        let m = |f: &dyn Fn(f64) -> f64| q.integrate(|x| f(x));
        let norm = m(&|x| g.density(x));
        let mean = m(&|x| x * g.density(x));
        let var = m(&|x| (x - st.x_mean).powi(2) * g.density(x));
        // ⟨p̂⟩ = ħ∫ρθ′, Δ(xp) = ħ∫(x − x̄)ρθ′, Δ(p²) = ∫(ħ²|ψ′|²) − ⟨p̂⟩².
        let p = m(&|x| ctx.hbar * g.density(x) * g.phase_derivative(x));
        let xp = m(&|x| ctx.hbar * (x - st.x_mean) * g.density(x) * g.phase_derivative(x));
        let pp = m(&|x| ctx.hbar * ctx.hbar * g.dpsi_dx(x).norm_sqr()) - p * p;
        assert_relative_eq!(norm, 1.0, max_relative = 1e-12);
        assert_relative_eq!(mean, st.x_mean, max_relative = 1e-12);
        assert_relative_eq!(var, st.dxx, max_relative = 1e-12);
        assert_relative_eq!(p, st.p_mean, max_relative = 1e-12);
        assert_relative_eq!(xp, st.dxp, max_relative = 1e-12);
        assert_relative_eq!(pp, st.dpp, max_relative = 1e-12);
    }

    #[test]
    fn mixed_state_flagged_and_violation_rejected() {
        let ctx = HbarContext::natural();
        let wide = SecondOrderState::new(0.0, 0.0, 1.0, 0.0, 1.0);
        assert!(!gaussian_from_moments(&wide, &ctx).unwrap().pure);
        let tight = SecondOrderState::new(0.0, 0.0, 1.0, 0.0, 0.1);
        assert!(matches!(
            gaussian_from_moments(&tight, &ctx),
            Err(Error::UncertaintyViolation { .. })
        ));
        let flat = SecondOrderState::new(0.0, 0.0, 0.0, 0.0, 1.0);
        assert!(matches!(
            gaussian_from_moments(&flat, &ctx),
            Err(Error::DegenerateState { .. })
        ));
    }

    #[test]
    fn central_moments_of_normal() {
        assert_eq!(gaussian_central_moment(2.0, 4), 12.0);
        assert_eq!(gaussian_central_moment(2.0, 6), 120.0);
        assert_eq!(gaussian_central_moment(2.0, 3), 0.0);
    }
}
