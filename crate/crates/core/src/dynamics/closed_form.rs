use crate::moments::SecondOrderState;

/// Exact solution of the free second-order moment system after time `t`.
pub fn closed_form_free(initial: &SecondOrderState, m: f64, t: f64) -> SecondOrderState {
    let SecondOrderState {
        x_mean,
        p_mean,
        dxx,
        dxp,
        dpp,
    } = *initial;
    SecondOrderState {
        x_mean: x_mean + p_mean * t / m,
        p_mean,
        dxx: dxx + 2.0 * dxp * t / m + dpp * t * t / (m * m),
        dxp: dxp + dpp * t / m,
        dpp,
    }
}

/// Uniform field `Φ = g x`: free width sector, falling centroid.
pub fn closed_form_linear(initial: &SecondOrderState, m: f64, g: f64, t: f64) -> SecondOrderState {
    let mut s = closed_form_free(initial, m, t);
    s.x_mean -= 0.5 * g * t * t;
    s.p_mean -= m * g * t;
    s
}

/// Spreading frequency `ω_σ = √(Δ(p²)₀ / (m² Δ(x²)₀))`.
pub fn spreading_frequency(initial: &SecondOrderState, m: f64) -> f64 {
    (initial.dpp / (m * m * initial.dxx)).sqrt()
}
