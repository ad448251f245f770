use crate::error::{Error, Result};
use crate::moments::binomial;

/// Generalized Hermite polynomials `Lₙ(x) = Hₙ((x − m)/α)` orthogonal under the
/// weight `w(x) = exp(−((x − m)/α)²)`, with `∫ LₙLₖ w dx = Nₙ δₙₖ`.
#[derive(Debug, Clone, PartialEq)]
pub struct HermiteBasis {
    pub m: f64,
    pub alpha: f64,
    pub order: usize,
    coeffs: Vec<Vec<f64>>,
}

/// Power-series coefficients of the physicists' Hermite polynomials `H₀ … H_N`.
fn hermite_coefficients(order: usize) -> Vec<Vec<f64>> {
    let mut c: Vec<Vec<f64>> = vec![vec![1.0]];
    if order >= 1 {
        c.push(vec![0.0, 2.0]);
    }
    for n in 1..order {
        let mut next = vec![0.0; n + 2];
        for (j, &v) in c[n].iter().enumerate() {
            next[j + 1] += 2.0 * v;
        }
        for (j, &v) in c[n - 1].iter().enumerate() {
            next[j] -= 2.0 * n as f64 * v;
        }
        c.push(next);
    }
    c
}

impl HermiteBasis {
    pub fn new(m: f64, alpha: f64, order: usize) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() || !m.is_finite() {
            return Err(Error::InvalidInput(format!(
                "basis needs finite m and alpha > 0, got m={m}, alpha={alpha}"
            )));
        }
        Ok(Self {
            m,
            alpha,
            order,
            coeffs: hermite_coefficients(order),
        })
    }

    /// Basis centred on `mean` with `α² = 2 variance`.
    pub fn matched(mean: f64, variance: f64, order: usize) -> Result<Self> {
        Self::new(mean, (2.0 * variance).sqrt(), order)
    }

    pub fn scaled(&self, x: f64) -> f64 {
        (x - self.m) / self.alpha
    }

    pub fn weight(&self, x: f64) -> f64 {
        let y = self.scaled(x);
        (-y * y).exp()
    }

    /// `Nₙ = α √π 2ⁿ n!`.
    pub fn norm(&self, n: usize) -> f64 {
        let fact: f64 = (1..=n).map(|k| k as f64).product();
        self.alpha * std::f64::consts::PI.sqrt() * 2f64.powi(n as i32) * fact
    }

    /// `L₀(x) … L_N(x)` by the three-term recurrence.
    pub fn values(&self, x: f64) -> Vec<f64> {
        let y = self.scaled(x);
        let mut v = Vec::with_capacity(self.order + 1);
        v.push(1.0);
        if self.order >= 1 {
            v.push(2.0 * y);
        }
        for n in 1..self.order {
            v.push(2.0 * y * v[n] - 2.0 * n as f64 * v[n - 1]);
        }
        v
    }

    /// Power coefficients of `Hₙ` in the scaled variable.
    pub fn coefficients(&self, n: usize) -> &[f64] {
        &self.coeffs[n]
    }

    /// `⟨Lₙ f⟩` for `n ≤ N` from the moments `⟨xʲ f⟩`, `j ≤ N`.
    pub(crate) fn project(&self, raw: &[f64]) -> Vec<f64> {
        let shifted: Vec<f64> = (0..raw.len())
            .map(|j| {
                (0..=j)
                    .map(|i| binomial(j, i) * (-self.m).powi((j - i) as i32) * raw[i])
                    .sum::<f64>()
                    / self.alpha.powi(j as i32)
            })
            .collect();
        (0..=self.order.min(raw.len() - 1))
            .map(|n| {
                self.coeffs[n]
                    .iter()
                    .zip(&shifted)
                    .map(|(h, s)| h * s)
                    .sum()
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::ScaledHermite;
    use approx::assert_relative_eq;

    #[test]
    fn low_order_polynomials() {
        let b = HermiteBasis::new(0.0, 1.0, 4).unwrap();
        let y: f64 = 0.7;
        let v = b.values(y);
        assert_relative_eq!(v[2], 4.0 * y * y - 2.0, max_relative = 1e-15);
        assert_relative_eq!(v[3], 8.0 * y.powi(3) - 12.0 * y, max_relative = 1e-15);
        assert_relative_eq!(
            v[4],
            16.0 * y.powi(4) - 48.0 * y * y + 12.0,
            max_relative = 1e-14
        );
        assert_eq!(b.coefficients(3), &[0.0, -12.0, 0.0, 8.0]);
    }

    #[test]
    fn orthonormal() {
        let b = HermiteBasis::new(-0.4, 0.3, 8).unwrap();
        let q = ScaledHermite::new(4 * (b.order + 2), b.m, b.alpha);
        for n in 0..=b.order {
            for k in 0..=b.order {
                let v = q.integrate_weighted(|x| {
                    let l = b.values(x);
                    l[n] * l[k] / (b.norm(n) * b.norm(k)).sqrt()
                });
                let expect = if n == k { 1.0 } else { 0.0 };
                assert!((v - expect).abs() < 1e-10, "n={n} k={k} v={v}");
            }
        }
    }

    #[test]
    fn rejects_bad_width() {
        assert!(HermiteBasis::new(0.0, 0.0, 2).is_err());
        assert!(HermiteBasis::new(0.0, -1.0, 2).is_err());
    }
}
