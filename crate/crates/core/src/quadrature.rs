//! Quadrature helpers shared by reconstruction and phase integrals.

use std::num::NonZeroUsize;

use gauss_quad::hermite::GaussHermite;
use gauss_quad::legendre::GaussLegendre;

use crate::error::{Error, Result};

/// Gauss–Hermite rule for `∫ f(x) w(x) dx` with the Gaussian weight
/// `exp(−((x − center)/width)²)`.
#[derive(Debug, Clone)]
pub struct ScaledHermite {
    rule: GaussHermite,
    center: f64,
    width: f64,
}

impl ScaledHermite {
    pub fn new(nodes: usize, center: f64, width: f64) -> Self {
        let n = NonZeroUsize::new(nodes.max(1)).unwrap();
        Self {
            rule: GaussHermite::new(n),
            center,
            width,
        }
    }

    /// Rule matched to a density of mean `mean` and variance `variance`,
    /// i.e. weight `exp(−(x − mean)²/(2 variance))`.
    pub fn for_gaussian(nodes: usize, mean: f64, variance: f64) -> Self {
        Self::new(nodes, mean, (2.0 * variance).sqrt())
    }

    /// `∫ f(x) exp(−((x − center)/width)²) dx`.
    pub fn integrate_weighted(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.width * self.rule.integrate(|y| f(self.center + self.width * y))
    }

    /// `∫ g(x) dx` for `g` decaying like the weight; `g` is divided by the weight
    /// at every node.
    pub fn integrate(&self, mut g: impl FnMut(f64) -> f64) -> f64 {
        self.width
            * self
                .rule
                .integrate(|y| g(self.center + self.width * y) * (y * y).exp())
    }
}

/// Composite Gauss–Legendre over the given breakpoints.
pub fn composite_legendre(breakpoints: &[f64], order: usize, mut f: impl FnMut(f64) -> f64) -> f64 {
    let rule = GaussLegendre::new(NonZeroUsize::new(order.max(1)).unwrap());
    breakpoints
        .windows(2)
        .map(|w| rule.integrate(w[0], w[1], &mut f))
        .sum()
}

/// Adaptive double-exponential quadrature of `f` on `[a, b]`.
pub fn adaptive(f: impl Fn(f64) -> f64, a: f64, b: f64, target: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let out = quadrature::double_exponential::integrate(f, a, b, target);
    if !out.integral.is_finite() || out.error_estimate > target {
        return Err(Error::QuadratureNonConvergence {
            estimate: out.error_estimate,
            target,
        });
    }
    Ok(out.integral)
}
