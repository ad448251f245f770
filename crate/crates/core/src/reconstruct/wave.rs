use num_complex::Complex64;

use super::gaussian::{gaussian_from_moments, GaussianParams};
use crate::dynamics::{closed_form_linear, spreading_frequency};
use crate::error::Result;
use crate::moments::{HbarContext, SecondOrderState};

/// A time-dependent wave function with an analytic position derivative.
pub trait WaveFunction {
    fn psi(&self, x: f64, t: f64) -> Complex64;

    fn dpsi_dx(&self, x: f64, t: f64) -> Complex64;

    fn density(&self, x: f64, t: f64) -> f64 {
        self.psi(x, t).norm_sqr()
    }

    /// `∂θ/∂x = Im(ψ′/ψ)`.
    fn phase_derivative(&self, x: f64, t: f64) -> f64 {
        (self.dpsi_dx(x, t) / self.psi(x, t)).im
    }
}

/// `γ(t) = −p₀² t/(2mħ) − ½ arctan(ω_σ t)`.
pub fn global_phase_free(t: f64, p0: f64, m: f64, omega_sigma: f64, ctx: &HbarContext) -> f64 {
    -p0 * p0 * t / (2.0 * m * ctx.hbar) - 0.5 * (omega_sigma * t).atan()
}

/// Right-hand side of the ODE for `γ`.
pub fn global_phase_rate(t: f64, p0: f64, m: f64, omega_sigma: f64, ctx: &HbarContext) -> f64 {
    -p0 * p0 / (2.0 * m * ctx.hbar) - 0.5 * omega_sigma / (1.0 + (omega_sigma * t).powi(2))
}

/// Free minimal-uncertainty packet released at `t = 0`, including the global
/// phase that makes it an exact solution of the free Schrödinger equation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FreeGaussianPacket {
    pub x0: f64,
    pub p0: f64,
    pub sigma: f64,
    pub mass: f64,
    pub hbar: f64,
}

impl FreeGaussianPacket {
    pub fn new(x0: f64, p0: f64, sigma: f64, mass: f64, ctx: &HbarContext) -> Self {
        Self {
            x0,
            p0,
            sigma,
            mass,
            hbar: ctx.hbar,
        }
    }

    pub fn omega(&self) -> f64 {
        self.hbar / (2.0 * self.mass * self.sigma * self.sigma)
    }

    pub fn initial_state(&self) -> SecondOrderState {
        SecondOrderState::minimal_gaussian(self.x0, self.p0, self.sigma, self.hbar)
    }

    fn log_derivative(&self, x: f64, t: f64) -> Complex64 {
        let wt = self.omega() * t;
        let spread = 1.0 + wt * wt;
        let d = x - self.x0 - self.p0 * t / self.mass;
        Complex64::new(-d, d * wt) / (2.0 * self.sigma * self.sigma * spread)
            + Complex64::new(0.0, self.p0 / self.hbar)
    }
}

impl WaveFunction for FreeGaussianPacket {
    fn psi(&self, x: f64, t: f64) -> Complex64 {
        let wt = self.omega() * t;
        let spread = 1.0 + wt * wt;
        let d = x - self.x0 - self.p0 * t / self.mass;
        let amp = (2.0 * std::f64::consts::PI * self.sigma * self.sigma * spread).powf(-0.25);
        let gamma = -self.p0 * self.p0 * t / (2.0 * self.mass * self.hbar) - 0.5 * wt.atan();
        let q = d * d / (4.0 * self.sigma * self.sigma * spread);
        amp * Complex64::new(-q, q * wt + self.p0 * x / self.hbar + gamma).exp()
    }

    fn dpsi_dx(&self, x: f64, t: f64) -> Complex64 {
        self.psi(x, t) * self.log_derivative(x, t)
    }
}

/// `ψ(x, t) = φ(x + at²/2, t) exp[−(i m a t/ħ)(x + at²/6)]`: the solution seen
/// from a frame accelerated by `a` relative to the one `φ` lives in.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NauenbergTransform<W> {
    pub inner: W,
    pub a: f64,
    pub mass: f64,
    pub hbar: f64,
}

impl<W: WaveFunction> NauenbergTransform<W> {
    pub fn new(inner: W, a: f64, mass: f64, ctx: &HbarContext) -> Self {
        Self {
            inner,
            a,
            mass,
            hbar: ctx.hbar,
        }
    }

    fn factor(&self, x: f64, t: f64) -> Complex64 {
        let phase = -self.mass * self.a * t * (x + self.a * t * t / 6.0) / self.hbar;
        Complex64::from_polar(1.0, phase)
    }
}

impl<W: WaveFunction> WaveFunction for NauenbergTransform<W> {
    fn psi(&self, x: f64, t: f64) -> Complex64 {
        self.inner.psi(x + 0.5 * self.a * t * t, t) * self.factor(x, t)
    }

    fn dpsi_dx(&self, x: f64, t: f64) -> Complex64 {
        let xs = x + 0.5 * self.a * t * t;
        let k = Complex64::new(0.0, -self.mass * self.a * t / self.hbar);
        (self.inner.dpsi_dx(xs, t) + k * self.inner.psi(xs, t)) * self.factor(x, t)
    }

    fn phase_derivative(&self, x: f64, t: f64) -> f64 {
        let xs = x + 0.5 * self.a * t * t;
        self.inner.phase_derivative(xs, t) - self.mass * self.a * t / self.hbar
    }
}

/// Gaussian template of the moments of a packet falling in `Φ = g x`, with the
/// global phase left at zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FallingTemplate {
    pub initial: SecondOrderState,
    pub g: f64,
    pub mass: f64,
    pub ctx: HbarContext,
}

impl FallingTemplate {
    pub fn new(initial: SecondOrderState, g: f64, mass: f64, ctx: HbarContext) -> Self {
        Self {
            initial,
            g,
            mass,
            ctx,
        }
    }

    pub fn state(&self, t: f64) -> SecondOrderState {
        closed_form_linear(&self.initial, self.mass, self.g, t)
    }

    pub fn params(&self, t: f64) -> Result<GaussianParams> {
        Ok(gaussian_from_moments(&self.state(t), &self.ctx)?.params)
    }

    pub fn omega(&self) -> f64 {
        spreading_frequency(&self.initial, self.mass)
    }
}

impl WaveFunction for FallingTemplate {
    fn psi(&self, x: f64, t: f64) -> Complex64 {
        self.params(t)
            .map(|p| p.psi(x))
            .unwrap_or(Complex64::new(f64::NAN, f64::NAN))
    }

    fn dpsi_dx(&self, x: f64, t: f64) -> Complex64 {
        self.params(t)
            .map(|p| p.dpsi_dx(x))
            .unwrap_or(Complex64::new(f64::NAN, f64::NAN))
    }

    fn phase_derivative(&self, x: f64, t: f64) -> f64 {
        self.params(t)
            .map(|p| p.phase_derivative(x))
            .unwrap_or(f64::NAN)
    }
}
