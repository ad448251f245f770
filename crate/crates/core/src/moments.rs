//! Moment-state data model.
//!
//! A second-order state is described by the expectation values of position and
//! momentum together with the three symmetrically ordered central moments
//! `Δ(x²)`, `Δ(xp)` and `Δ(p²)`. The canonical chart `(x, p, s, p_s)` with the
//! conserved uncertainty product `U` is obtained through
//!
//! ```text
//! Δ(x²) = s²,   Δ(xp) = s p_s,   Δ(p²) = p_s² + U / s²
//! ```

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Relative slack below `λħ²/4` that is still accepted (and clamped) when
/// entering the canonical chart.
pub const UNCERTAINTY_REL_TOL: f64 = 1e-9;

/// Relative eigenvalue tolerance for the Hankel positivity test.
pub const HANKEL_REL_TOL: f64 = 1e-12;

/// Means plus the three second-order central moments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecondOrderState {
    pub x_mean: f64,
    pub p_mean: f64,
    pub dxx: f64,
    pub dxp: f64,
    pub dpp: f64,
}

impl SecondOrderState {
    pub fn new(x_mean: f64, p_mean: f64, dxx: f64, dxp: f64, dpp: f64) -> Self {
        Self {
            x_mean,
            p_mean,
            dxx,
            dxp,
            dpp,
        }
    }

    /// Unsqueezed minimal-uncertainty packet of width `sigma`.
    pub fn minimal_gaussian(x_mean: f64, p_mean: f64, sigma: f64, hbar: f64) -> Self {
        let dxx = sigma * sigma;
        Self {
            x_mean,
            p_mean,
            dxx,
            dxp: 0.0,
            dpp: hbar * hbar / (4.0 * dxx),
        }
    }

    pub fn casimir(&self) -> f64 {
        casimir(self)
    }

    /// The three second-order entries in `(a, b, Δ(xᵃpᵇ))` form.
    pub fn central_entries(&self) -> [CentralEntry; 3] {
        [
            CentralEntry {
                x_power: 2,
                p_power: 0,
                value: self.dxx,
            },
            CentralEntry {
                x_power: 1,
                p_power: 1,
                value: self.dxp,
            },
            CentralEntry {
                x_power: 0,
                p_power: 2,
                value: self.dpp,
            },
        ]
    }
}

/// Canonical chart of a second-order state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CanonicalState {
    pub x: f64,
    pub p: f64,
    pub s: f64,
    pub ps: f64,
    pub u_casimir: f64,
}

impl CanonicalState {
    pub fn new(x: f64, p: f64, s: f64, ps: f64, u_casimir: f64) -> Self {
        Self {
            x,
            p,
            s,
            ps,
            u_casimir,
        }
    }

    /// Classical point particle: no width sector and vanishing uncertainty product.
    pub fn point(x: f64, p: f64) -> Self {
        Self {
            x,
            p,
            s: 0.0,
            ps: 0.0,
            u_casimir: 0.0,
        }
    }

    pub fn is_point_particle(&self) -> bool {
        self.s == 0.0 && self.ps == 0.0 && self.u_casimir == 0.0
    }
}

/// Scale of ħ and the dimensionless Casimir multiplier `λ ≥ 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HbarContext {
    pub hbar: f64,
    pub lambda: f64,
}

impl HbarContext {
    pub fn new(hbar: f64, lambda: f64) -> Result<Self> {
        if !(hbar > 0.0 && hbar.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "hbar must be positive, got {hbar}"
            )));
        }
        if !(lambda >= 1.0 && lambda.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "lambda must be >= 1, got {lambda}"
            )));
        }
        Ok(Self { hbar, lambda })
    }

    /// SI units with the CODATA value of ħ and λ = 1.
    pub fn si() -> Self {
        Self {
            hbar: crate::constants::HBAR,
            lambda: 1.0,
        }
    }

    /// Unit ħ.
    pub fn natural() -> Self {
        Self {
            hbar: 1.0,
            lambda: 1.0,
        }
    }

    /// Nondimensional mode in which the minimal uncertainty product is `u`.
    pub fn nondimensional(u: f64) -> Result<Self> {
        Self::new(2.0 * u.sqrt(), 1.0)
    }

    /// `λħ²/4`.
    pub fn min_casimir(&self) -> f64 {
        self.lambda * self.hbar * self.hbar / 4.0
    }
}

impl Default for HbarContext {
    fn default() -> Self {
        Self::si()
    }
}

/// `Δ(x²)Δ(p²) − Δ(xp)²`, conserved by every second-order flow.
pub fn casimir(state: &SecondOrderState) -> f64 {
    state.dxx * state.dpp - state.dxp * state.dxp
}

pub fn to_canonical(state: &SecondOrderState, ctx: &HbarContext) -> Result<CanonicalState> {
    if !(state.dxx > 0.0) {
        return Err(Error::DegenerateState { dxx: state.dxx });
    }
    let bound = ctx.min_casimir();
    let mut u = casimir(state);
    if u < bound {
        if u >= bound * (1.0 - UNCERTAINTY_REL_TOL) {
            u = bound;
        } else {
            return Err(Error::UncertaintyViolation { casimir: u, bound });
        }
    }
    let s = state.dxx.sqrt();
    Ok(CanonicalState {
        x: state.x_mean,
        p: state.p_mean,
        s,
        ps: state.dxp / s,
        u_casimir: u,
    })
}

pub fn from_canonical(c: &CanonicalState) -> SecondOrderState {
    if c.is_point_particle() {
        return SecondOrderState::new(c.x, c.p, 0.0, 0.0, 0.0);
    }
    let dxx = c.s * c.s;
    SecondOrderState {
        x_mean: c.x,
        p_mean: c.p,
        dxx,
        dxp: c.s * c.ps,
        dpp: c.ps * c.ps + c.u_casimir / dxx,
    }
}

/// Raw position moments `⟨x̂⁰⟩ … ⟨x̂ᴺ⟩` with optional raw mixed moments
/// `Re⟨x̂ⁿp̂⟩` for `n = 0 … N`.
#[derive(Debug, Clone, PartialEq)]
pub struct RawMomentSequence {
    moments: Vec<f64>,
    mixed: Option<Vec<f64>>,
}

impl RawMomentSequence {
    pub fn new(moments: Vec<f64>) -> Result<Self> {
        if moments.first() != Some(&1.0) {
            return Err(Error::InvalidInput(format!(
                "zeroth raw moment must be exactly 1, got {:?}",
                moments.first()
            )));
        }
        Ok(Self {
            moments,
            mixed: None,
        })
    }

    pub fn with_mixed(mut self, mixed: Vec<f64>) -> Result<Self> {
        if mixed.len() > self.moments.len() {
            return Err(Error::InvalidInput(format!(
                "{} mixed moments supplied for {} position moments",
                mixed.len(),
                self.moments.len()
            )));
        }
        self.mixed = Some(mixed);
        Ok(self)
    }

    /// Raw sequence of order ≤ 2 implied by a second-order state, including the
    /// mixed moments `⟨p̂⟩, Re⟨x̂p̂⟩, Re⟨x̂²p̂⟩` (third-order central moments taken as zero).
    pub fn from_second_order(state: &SecondOrderState, order: usize) -> Result<Self> {
        if order > 2 {
            return Err(Error::UnsupportedOrder {
                order,
                reason: "a second-order state fixes raw moments up to order 2".into(),
            });
        }
        let data = MixedMomentData::from_second_order(state);
        let central = CentralMoments {
            mean: state.x_mean,
            values: vec![1.0, 0.0, state.dxx],
        };
        let raw = raw_from_central(&central);
        let moments = raw.moments[..=order].to_vec();
        let mixed = (0..=order)
            .map(|n| symmetric_mixed_from_central(&data, n))
            .collect::<Result<Vec<_>>>()?;
        Self::new(moments)?.with_mixed(mixed)
    }

    pub fn moments(&self) -> &[f64] {
        &self.moments
    }

    pub fn mixed(&self) -> Option<&[f64]> {
        self.mixed.as_deref()
    }

    /// Highest position order `N`.
    pub fn order(&self) -> usize {
        self.moments.len() - 1
    }

    pub fn mean(&self) -> f64 {
        self.moments.get(1).copied().unwrap_or(0.0)
    }
}

/// Central position moments about `mean`; `values[a] = Δ(xᵃ)` with
/// `values[0] = 1` and `values[1] = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct CentralMoments {
    pub mean: f64,
    pub values: Vec<f64>,
}

impl CentralMoments {
    pub fn get(&self, order: usize) -> Option<f64> {
        self.values.get(order).copied()
    }

    pub fn variance(&self) -> Option<f64> {
        self.get(2)
    }
}

pub(crate) fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Binomial de-centering of raw moments.
pub fn central_from_raw(raw: &RawMomentSequence) -> Result<CentralMoments> {
    let m = raw.moments();
    if m[0] != 1.0 {
        return Err(Error::InvalidInput(
            "zeroth raw moment must be exactly 1".into(),
        ));
    }
    if m.len() < 2 {
        return Err(Error::InvalidInput(
            "need at least the first raw moment".into(),
        ));
    }
    let mean = m[1];
    let mut values = (0..m.len())
        .map(|a| {
            (0..=a)
                .map(|i| {
                    let sign = if (a - i) % 2 == 0 { 1.0 } else { -1.0 };
                    binomial(a, i) * sign * mean.powi((a - i) as i32) * m[i]
                })
                .sum()
        })
        .collect::<Vec<f64>>();
    values[1] = 0.0;
    Ok(CentralMoments { mean, values })
}

/// Inverse of [`central_from_raw`]: `⟨x̂ᵃ⟩ = Σᵢ C(a,i) x̄^{a−i} Δ(xⁱ)`.
pub fn raw_from_central(central: &CentralMoments) -> RawMomentSequence {
    let mean = central.mean;
    let mut moments: Vec<f64> = (0..central.values.len())
        .map(|a| {
            (0..=a)
                .map(|i| binomial(a, i) * mean.powi((a - i) as i32) * central.values[i])
                .sum()
        })
        .collect();
    moments[0] = 1.0;
    RawMomentSequence {
        moments,
        mixed: None,
    }
}

/// Outcome of the Hankel positivity test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HankelReport {
    pub positive: bool,
    pub min_eigenvalue: f64,
}

/// Checks `(H_n)_{ij} = m_{i+j}` for every `n` with `2n ≤ N`.
pub fn hankel_psd_check(raw: &RawMomentSequence) -> HankelReport {
    let m = raw.moments();
    let max_n = (m.len() - 1) / 2;
    let mut positive = true;
    let mut min_eigenvalue = f64::INFINITY;
    for n in 0..=max_n {
        let h = DMatrix::from_fn(n + 1, n + 1, |i, j| m[i + j]);
        let eig = h.symmetric_eigenvalues();
        let norm = eig.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
        let lo = eig.iter().copied().fold(f64::INFINITY, f64::min);
        if lo < -HANKEL_REL_TOL * norm || !lo.is_finite() {
            positive = false;
        }
        min_eigenvalue = min_eigenvalue.min(lo);
    }
    HankelReport {
        positive,
        min_eigenvalue,
    }
}

/// A central moment `Δ(xᵃpᵇ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CentralEntry {
    pub x_power: u32,
    pub p_power: u32,
    pub value: f64,
}

/// Concrete form of the semiclassical hierarchy:
/// `|Δ(xᵃpᵇ)| ≤ c_max · ħ^{(a+b)/2} · Lᵃ · Pᵇ`.
///
/// `length` and `momentum` are the dimensionless-making scales `L`, `P`; the
/// bound is asymptotic in ħ so the scales must be supplied.
pub fn hierarchy_check(
    entries: &[CentralEntry],
    ctx: &HbarContext,
    c_max: f64,
    length: f64,
    momentum: f64,
) -> Result<bool> {
    for (name, v) in [("length", length), ("momentum", momentum), ("c_max", c_max)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::Config(format!(
                "hierarchy scale `{name}` missing or not positive"
            )));
        }
    }
    Ok(entries.iter().all(|e| {
        let order = (e.x_power + e.p_power) as f64;
        let bound = c_max
            * ctx.hbar.powf(order / 2.0)
            * length.powi(e.x_power as i32)
            * momentum.powi(e.p_power as i32);
        e.value.abs() <= bound
    }))
}

/// Means and central moments needed to rebuild `Re⟨x̂ⁿp̂⟩`.
///
/// `position[k] = Δ(xᵏ)` (with `position[0] = 1`, `position[1] = 0`) and
/// `mixed[k] = Δ(xᵏp)` (with `mixed[0] = 0`, `mixed[1] = Δ(xp)`).
#[derive(Debug, Clone, PartialEq)]
pub struct MixedMomentData {
    pub x_mean: f64,
    pub p_mean: f64,
    pub position: Vec<f64>,
    pub mixed: Vec<f64>,
}

impl MixedMomentData {
    /// Second-order truncation: third-order central moments are zero.
    pub fn from_second_order(state: &SecondOrderState) -> Self {
        Self {
            x_mean: state.x_mean,
            p_mean: state.p_mean,
            position: vec![1.0, 0.0, state.dxx],
            mixed: vec![0.0, state.dxp, 0.0],
        }
    }
}

/// Weyl-symmetric raw mixed moment `Re⟨x̂ⁿp̂⟩ = Σₖ C(n,k) x̄ⁿ⁻ᵏ [Δ(xᵏp) + p̄ Δ(xᵏ)]`.
pub fn symmetric_mixed_from_central(data: &MixedMomentData, n: usize) -> Result<f64> {
    if n >= data.position.len() || n >= data.mixed.len() {
        return Err(Error::UnsupportedOrder {
            order: n,
            reason: "central moments of this order were not supplied".into(),
        });
    }
    Ok((0..=n)
        .map(|k| {
            binomial(n, k)
                * data.x_mean.powi((n - k) as i32)
                * (data.mixed[k] + data.p_mean * data.position[k])
        })
        .sum())
}

/// Coordinates ordered as `(⟨x̂⟩, ⟨p̂⟩, Δ(x²), Δ(xp), Δ(p²))`.
pub type MomentCoords = [f64; 5];

/// Poisson tensor `J_{ij} = {ξᵢ, ξⱼ}` of the second-order truncation.
pub fn poisson_tensor(z: &MomentCoords) -> [[f64; 5]; 5] {
    let [_, _, dxx, dxp, dpp] = *z;
    let mut j = [[0.0; 5]; 5];
    j[0][1] = 1.0;
    j[2][3] = 2.0 * dxx;
    j[3][4] = 2.0 * dpp;
    j[2][4] = 4.0 * dxp;
    for a in 0..5 {
        for b in 0..a {
            j[a][b] = -j[b][a];
        }
    }
    j
}

/// `{f, g} = ∇f · J · ∇g`.
pub fn bracket_from_gradients(grad_f: &[f64; 5], grad_g: &[f64; 5], z: &MomentCoords) -> f64 {
    let j = poisson_tensor(z);
    let mut acc = 0.0;
    for a in 0..5 {
        for b in 0..5 {
            acc += grad_f[a] * j[a][b] * grad_g[b];
        }
    }
    acc
}

impl From<&SecondOrderState> for MomentCoords {
    fn from(s: &SecondOrderState) -> Self {
        [s.x_mean, s.p_mean, s.dxx, s.dxp, s.dpp]
    }
}

impl From<MomentCoords> for SecondOrderState {
    fn from(z: MomentCoords) -> Self {
        SecondOrderState::new(z[0], z[1], z[2], z[3], z[4])
    }
}
