//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on failure.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use qfall::constants::{EARTH_MASS, EARTH_RADIUS, G, HBAR, NEUTRON_MASS};
use qfall::dynamics::{
    closed_form_free, closed_form_linear, integrate, u_parameter, CanonicalFlow, IntegratorConfig,
    PotentialModel, Trajectory,
};
use qfall::experiments::{
    eotvos_estimate, phase_line_integral, propagation_phase_plane_wave, return_time,
    return_time_curve, Abscissa, EotvosInput, PathPoint, PhasePath, ReturnTimeProblem, Segment,
};
use qfall::moments::{from_canonical, to_canonical, CanonicalState, HbarContext, SecondOrderState};
use qfall::quadrature::composite_legendre;
use qfall::reconstruct::{
    gaussian_from_moments, gaussian_moment_sequence, reconstruct, FreeGaussianPacket, HermiteBasis,
    NauenbergTransform, WaveFunction,
};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Radial Kepler return time from `r0` at energy `epsilon < 0`:
/// `r = a(1 − cos E)`, `t = a^{3/2}(E − sin E)`, `a = −1/(2ε)`.
fn kepler_return(epsilon: f64, r0: f64) -> f64 {
    let a = -1.0 / (2.0 * epsilon);
    let e0 = (1.0 - r0 / a).acos();
    a.powf(1.5) * (2.0 * PI - 2.0 * e0 + 2.0 * e0.sin())
}

fn run(
    pot: PotentialModel,
    c0: &CanonicalState,
    m: f64,
    t: f64,
    cfg: &IntegratorConfig,
) -> Trajectory {
    let flow = CanonicalFlow::new(pot, m, c0.u_casimir, if c0.s > 0.0 { c0.s } else { 1.0 });
    integrate(&flow, c0, (0.0, t), cfg).expect("integration setup")
}

fn eotvos() -> Outcome {
    let lo = eotvos_estimate(&EotvosInput::new(10.0, 1e-12, 1e-20).unwrap());
    let hi = eotvos_estimate(&EotvosInput::new(10.0, 1e-12, 1.0).unwrap());
    let tol = 4.0 * f64::EPSILON;
    outcome(
        rel(lo, 0.5e-33) <= tol && rel(hi, 0.5e-13) <= tol,
        format!("eta(1e-20 m^2) = {lo:.6e}, eta(1 m^2) = {hi:.6e}"),
    )
}

fn u_orders() -> Outcome {
    let neutron = u_parameter(NEUTRON_MASS, EARTH_MASS, EARTH_RADIUS, HBAR, G).unwrap();
    let ten_grams = u_parameter(0.01, EARTH_MASS, EARTH_RADIUS, HBAR, G).unwrap();
    outcome(
        (1e-37..=1e-36).contains(&neutron) && (1e-87..=1e-85).contains(&ten_grams),
        format!("u(neutron) = {neutron:.3e}, u(10 g) = {ten_grams:.3e}"),
    )
}

/// Largest per-component error over the samples, each normalized by the
/// largest magnitude that component reaches.
fn free_error(c0: &CanonicalState, m: f64, hbar: f64, cfg: &IntegratorConfig) -> f64 {
    let st0 = from_canonical(c0);
    let omega = hbar / (2.0 * m * st0.dxx);
    let t_end = 10.0 / omega;
    let traj = run(PotentialModel::free(), c0, m, t_end, cfg);
    let samples: Vec<([f64; 5], [f64; 5])> = (0..=400)
        .map(|i| {
            let t = t_end * i as f64 / 400.0;
            let num: [f64; 5] = (&from_canonical(&traj.state_at(t))).into();
            let exact: [f64; 5] = (&closed_form_free(&st0, m, t)).into();
            (num, exact)
        })
        .collect();
    (0..5)
        .map(|k| {
            let scale = samples.iter().fold(0.0_f64, |a, (_, e)| a.max(e[k].abs()));
            samples
                .iter()
                .fold(0.0_f64, |a, (n, e)| a.max((n[k] - e[k]).abs() / scale))
        })
        .fold(0.0, f64::max)
}

fn free_oracle() -> Outcome {
    let natural = CanonicalState::new(0.5, 0.8, 1.0, 0.0, 0.25);
    let e_nat = free_error(&natural, 1.0, 1.0, &IntegratorConfig::tight(1e-12));
    let sigma = 1e-6;
    let si = CanonicalState::new(0.1, NEUTRON_MASS, sigma, 0.0, 0.25 * HBAR * HBAR);
    let cfg_si = IntegratorConfig {
        abs_tol: 1e-60,
        ..IntegratorConfig::tight(1e-12)
    };
    let e_si = free_error(&si, NEUTRON_MASS, HBAR, &cfg_si);
    outcome(
        e_nat < 1e-8 && e_si < 1e-8,
        format!("max relative error {e_nat:.2e} (natural units), {e_si:.2e} (neutron, SI)"),
    )
}

fn conservation() -> Outcome {
    let cfg = IntegratorConfig::tight(1e-12);
    let mut worst = (0.0_f64, 0.0_f64);
    let mut ok = true;
    for &u in &[0.0, 1e-5, 1e-2] {
        match return_time(&ReturnTimeProblem::new(-0.5, u), &cfg) {
            Ok(r) => {
                worst.0 = worst.0.max(r.trajectory.max_energy_drift());
                worst.1 = worst.1.max(r.trajectory.max_casimir_drift());
            }
            Err(_) => ok = false,
        }
    }
    outcome(
        ok && worst.0 < 1e-8 && worst.1 < 1e-8,
        format!("max |dH/H| = {:.2e}, max |dU/U| = {:.2e}", worst.0, worst.1),
    )
}

fn kepler_oracle() -> Outcome {
    // The oracle's parametrization conserves ε = ṙ²/2 − 1/r along the orbit.
    let (eps, r0) = (-0.5, 1.0);
    let a = -1.0 / (2.0 * eps);
    let oracle_drift = (1..100)
        .map(|i| {
            let e = 2.0 * PI * i as f64 / 100.0;
            let r = a * (1.0 - e.cos());
            let rdot = a * e.sin() / (a.powf(1.5) * (1.0 - e.cos()));
            (0.5 * rdot * rdot - 1.0 / r - eps).abs() * r
        })
        .fold(0.0, f64::max);
    let oracle = kepler_return(eps, r0);
    let cfg = IntegratorConfig::tight(1e-12);
    let t = return_time(&ReturnTimeProblem::point_particle(eps), &cfg).map(|r| r.t_return);
    match t {
        Ok(t) => outcome(
            rel(t, PI + 2.0) < 1e-6 && rel(oracle, PI + 2.0) < 1e-14 && oracle_drift < 1e-12,
            format!("t = {t:.12}, oracle = {oracle:.12}, oracle energy drift {oracle_drift:.1e}"),
        ),
        Err(e) => outcome(false, format!("integration failed: {e}")),
    }
}

fn figure_shape() -> Outcome {
    let cfg = IntegratorConfig::tight(1e-11);
    let energies: Vec<f64> = (0..9).map(|i| -0.9 + 0.1 * i as f64).collect();
    let us = [1.0, 1e-1, 1e-3, 1e-5, 0.0];
    let rows = return_time_curve(
        &energies,
        &us,
        &ReturnTimeProblem::new(0.0, 0.0),
        Abscissa::Classical,
        &cfg,
    );
    let n = energies.len();
    let mut failures = Vec::new();
    let mut min_gap = f64::INFINITY;
    for j in 0..n {
        let times: Vec<Option<f64>> = (0..us.len()).map(|i| rows[i * n + j].t_return).collect();
        if times.iter().any(Option::is_none) {
            failures.push(format!("eps={:.1}: missing return", energies[j]));
            continue;
        }
        let t: Vec<f64> = times.into_iter().flatten().collect();
        for w in t.windows(2) {
            if !(w[0] < w[1]) {
                failures.push(format!("eps={:.1}: not ordered {t:?}", energies[j]));
            }
            min_gap = min_gap.min(w[1] - w[0]);
        }
        if rel(t[4], kepler_return(energies[j], 1.0)) > 1e-6 {
            failures.push(format!("eps={:.1}: classical column off", energies[j]));
        }
    }
    outcome(
        failures.is_empty(),
        if failures.is_empty() {
            format!(
                "{} points ordered t(u=1) < ... < t(u=1e-5) < t(0); smallest gap {min_gap:.2e}",
                rows.len()
            )
        } else {
            failures.join("; ")
        },
    )
}

fn reconstruction() -> Outcome {
    let ctx = HbarContext::natural();
    let mut worst = (0.0_f64, 0.0_f64, 0.0_f64);
    for &x in &[-1.5, 0.0, 2.0] {
        for &p in &[-1.0, 0.3] {
            for &dxx in &[0.05, 0.7, 3.0] {
                for &dxp in &[-0.8, 0.0, 0.4] {
                    let st = SecondOrderState::new(x, p, dxx, dxp, (0.25 + dxp * dxp) / dxx);
                    let raw = gaussian_moment_sequence(&st, 2).unwrap();
                    let r = reconstruct(&raw, &HermiteBasis::matched(x, dxx, 2).unwrap(), ctx.hbar)
                        .unwrap();
                    let g = gaussian_from_moments(&st, &ctx).unwrap().params;
                    let peak = g.psi(x).norm();
                    for i in -40..=40 {
                        let xi = x + 0.1 * i as f64 * dxx.sqrt();
                        worst.0 = worst
                            .0
                            .max((r.amplitude(xi) - g.psi(xi).norm()).abs() / peak);
                        let (a, b) = (r.phase_derivative(xi).unwrap(), g.phase_derivative(xi));
                        worst.1 = worst.1.max((a - b).abs() / (1.0 + b.abs()));
                    }
                    let q = r.quadrature_moments(2);
                    let qm = r.quadrature_mixed(2).unwrap();
                    for k in 0..=2 {
                        worst.2 = worst
                            .2
                            .max((q[k] - raw.moments()[k]).abs() / (1.0 + raw.moments()[k].abs()));
                        worst.2 = worst.2.max(
                            (qm[k] - raw.mixed().unwrap()[k]).abs()
                                / (1.0 + raw.mixed().unwrap()[k].abs()),
                        );
                    }
                }
            }
        }
    }
    outcome(
        worst.0 < 1e-8 && worst.1 < 1e-8 && worst.2 < 1e-8,
        format!(
            "|psi| {:.1e}, dtheta/dx {:.1e}, moments {:.1e}",
            worst.0, worst.1, worst.2
        ),
    )
}

/// `∫ L dt` along `x(t)`, `v(t)` by high-order quadrature.
fn action_oracle(
    m: f64,
    phi: impl Fn(f64) -> f64,
    x: impl Fn(f64) -> f64,
    v: impl Fn(f64) -> f64,
    t: f64,
) -> f64 {
    let breaks: Vec<f64> = (0..=64).map(|i| t * i as f64 / 64.0).collect();
    composite_legendre(&breaks, 20, |s| 0.5 * m * v(s).powi(2) - m * phi(x(s)))
}

fn phase_identity() -> Outcome {
    let ctx = HbarContext::natural();
    let cfg = IntegratorConfig::tight(1e-13);
    let (m, x0, p0, t) = (1.3, 0.4, 0.9, 3.0);
    let v0 = p0 / m;
    let (g, k): (f64, f64) = (0.7, 2.0);
    let w = k.sqrt();
    let cases: [(&str, PotentialModel, f64); 3] = [
        (
            "free",
            PotentialModel::free(),
            action_oracle(m, |_| 0.0, |s| x0 + v0 * s, |_| v0, t),
        ),
        (
            "linear",
            PotentialModel::linear(g),
            action_oracle(
                m,
                |x| g * x,
                |s| x0 + v0 * s - 0.5 * g * s * s,
                |s| v0 - g * s,
                t,
            ),
        ),
        (
            "quadratic",
            PotentialModel::quadratic(g, k),
            action_oracle(
                m,
                |x| g * x + 0.5 * k * x * x,
                |s| -g / k + (x0 + g / k) * (w * s).cos() + v0 / w * (w * s).sin(),
                |s| -(x0 + g / k) * w * (w * s).sin() + v0 * (w * s).cos(),
                t,
            ),
        ),
    ];
    let mut worst = 0.0_f64;
    let mut detail = Vec::new();
    for (name, pot, oracle) in cases {
        let traj = run(pot, &CanonicalState::point(x0, p0), m, t, &cfg);
        let phase = propagation_phase_plane_wave(&traj, &ctx).unwrap();
        let e = rel(phase, oracle / ctx.hbar);
        worst = worst.max(e);
        detail.push(format!("{name} {e:.1e}"));
    }
    // Two paths between the same endpoints in a uniform field.
    let px = move |_x: f64, s: f64| (p0 - m * g * s) / ctx.hbar;
    let pt = move |x: f64, s: f64| {
        -m * g * x / ctx.hbar - (p0 - m * g * s).powi(2) / (2.0 * m * ctx.hbar)
    };
    let (a, b) = ((x0, 0.0), (-1.2, t));
    let straight = PhasePath::new(vec![Segment::straight(a, b)]).unwrap();
    let detour = PhasePath::new(vec![
        Segment::vertical(0.0, a.0, 2.5),
        Segment::custom(move |s| PathPoint {
            x: 2.5 + (b.0 - 2.5) * s * s,
            t: t * s + 0.4 * (PI * s).sin(),
            dx: 2.0 * (b.0 - 2.5) * s,
            dt: t + 0.4 * PI * (PI * s).cos(),
        }),
    ])
    .unwrap();
    let l1 = phase_line_integral(&straight, px, pt, 1e-12).unwrap();
    let l2 = phase_line_integral(&detour, px, pt, 1e-12).unwrap();
    let path_gap = rel(l1, l2);
    outcome(
        worst < 1e-8 && path_gap < 1e-8,
        format!(
            "action vs phase: {}; two-path gap {path_gap:.1e}",
            detail.join(", ")
        ),
    )
}

fn mass_independence() -> Outcome {
    let cfg = IntegratorConfig::tight(1e-12);
    let (x0, v0, sigma, t) = (1.0, 0.9, 0.1, 2.0);
    let centroid_gap = |pot: PotentialModel| {
        let runs: Vec<Trajectory> = [1.0, 10.0]
            .iter()
            .map(|&m| {
                run(
                    pot,
                    &CanonicalState::new(x0, m * v0, sigma, 0.0, 0.25),
                    m,
                    t,
                    &cfg,
                )
            })
            .collect();
        (0..=200)
            .map(|i| {
                let s = t * i as f64 / 200.0;
                (runs[0].state_at(s).x - runs[1].state_at(s).x).abs()
            })
            .fold(0.0, f64::max)
    };
    let linear = centroid_gap(PotentialModel::linear(1.0));
    let quadratic = centroid_gap(PotentialModel::quadratic(1.0, -0.5));
    let newtonian = centroid_gap(PotentialModel::newtonian(1.0));
    outcome(
        linear < 1e-9 && quadratic < 1e-9 && newtonian > 1e-6,
        format!("max centroid gap: linear {linear:.1e}, quadratic {quadratic:.1e}, newtonian {newtonian:.1e}"),
    )
}

fn accelerated_frame() -> Outcome {
    let ctx = HbarContext::natural();
    let (m, g) = (1.0, 1.5);
    let free = FreeGaussianPacket::new(0.2, 0.6, 0.5, m, &ctx);
    let falling = NauenbergTransform::new(free, g, m, &ctx);
    let c0 = to_canonical(&free.initial_state(), &ctx).unwrap();
    let traj = run(
        PotentialModel::linear(g),
        &c0,
        m,
        3.0,
        &IntegratorConfig::tight(1e-13),
    );
    let mut worst = (0.0_f64, 0.0_f64, 0.0_f64);
    for i in 0..=12 {
        let t = 0.25 * i as f64;
        let st = from_canonical(&traj.state_at(t));
        let exact = closed_form_linear(&free.initial_state(), m, g, t);
        worst.2 = worst.2.max(rel(st.dxx, exact.dxx));
        let raw = gaussian_moment_sequence(&st, 2).unwrap();
        let r = reconstruct(
            &raw,
            &HermiteBasis::matched(st.x_mean, st.dxx, 2).unwrap(),
            ctx.hbar,
        )
        .unwrap();
        let peak = falling.density(st.x_mean, t);
        for j in -30..=30 {
            let x = st.x_mean + 0.1 * j as f64 * st.dxx.sqrt();
            worst.0 = worst
                .0
                .max((r.density(x) - falling.density(x, t)).abs() / peak);
            let (a, b) = (
                r.phase_derivative(x).unwrap(),
                falling.phase_derivative(x, t),
            );
            worst.1 = worst.1.max((a - b).abs() / (1.0 + b.abs()));
        }
    }
    outcome(
        worst.0 < 1e-8 && worst.1 < 1e-8,
        format!(
            "density {:.1e}, dtheta/dx {:.1e} (moment integration error {:.1e})",
            worst.0, worst.1, worst.2
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("eotvos reproduction", eotvos),
        ("u-parameter orders of magnitude", u_orders),
        ("free-particle oracle", free_oracle),
        ("conservation suite", conservation),
        ("classical return-time oracle", kepler_oracle),
        ("return-time figure shape", figure_shape),
        ("reconstruction fidelity", reconstruction),
        ("phase identity", phase_identity),
        ("quadratic-potential mass independence", mass_independence),
        ("accelerated-frame oracle", accelerated_frame),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = check();
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!(
            "{tag} {:>2} {name}: {} [{:.2?}]",
            i + 1,
            o.detail,
            start.elapsed()
        );
        if !o.pass {
            failed += 1;
        }
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
