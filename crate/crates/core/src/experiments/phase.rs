use std::sync::Arc;

use crate::dynamics::{effective_hamiltonian_canonical, Trajectory};
use crate::error::{Error, Result};
use crate::moments::{CanonicalState, HbarContext};
use crate::quadrature::{adaptive, composite_legendre};

const LEGENDRE_ORDER: usize = 10;

/// A point of a parametrized spacetime curve and its tangent `(dx/dτ, dt/dτ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathPoint {
    pub x: f64,
    pub t: f64,
    pub dx: f64,
    pub dt: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SegmentKind {
    ComTrajectory,
    FixedTimeVertical,
    Custom,
}

type Curve = Arc<dyn Fn(f64) -> PathPoint + Send + Sync>;

/// Curve `τ ∈ [0, 1] ↦ (x, t)`; `breaks` are parameter values where the curve
/// is only piecewise smooth.
#[derive(Clone)]
pub struct Segment {
    pub kind: SegmentKind,
    curve: Curve,
    breaks: Vec<f64>,
}

impl std::fmt::Debug for Segment {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Segment")
            .field("kind", &self.kind)
            .field("start", &self.start())
            .field("end", &self.end())
            .finish()
    }
}

impl Segment {
    pub fn custom(curve: impl Fn(f64) -> PathPoint + Send + Sync + 'static) -> Self {
        Self {
            kind: SegmentKind::Custom,
            curve: Arc::new(curve),
            breaks: vec![0.0, 1.0],
        }
    }

    pub fn straight(from: (f64, f64), to: (f64, f64)) -> Self {
        let (dx, dt) = (to.0 - from.0, to.1 - from.1);
        Self::custom(move |s| PathPoint {
            x: from.0 + s * dx,
            t: from.1 + s * dt,
            dx,
            dt,
        })
    }

    pub fn vertical(t: f64, x_from: f64, x_to: f64) -> Self {
        let mut seg = Self::straight((x_from, t), (x_to, t));
        seg.kind = SegmentKind::FixedTimeVertical;
        seg
    }

    /// The centroid path of `traj` between `t_from` and `t_to`.
    pub fn com(traj: &Trajectory, t_from: f64, t_to: f64) -> Self {
        let traj = Arc::new(traj.clone());
        let span = t_to - t_from;
        let (lo, hi) = (t_from.min(t_to), t_from.max(t_to));
        let mut breaks: Vec<f64> = traj
            .breakpoints()
            .into_iter()
            .filter(|&t| t > lo && t < hi)
            .map(|t| (t - t_from) / span)
            .collect();
        breaks.push(0.0);
        breaks.push(1.0);
        breaks.sort_by(f64::total_cmp);
        let m = traj.mass;
        let curve = move |s: f64| {
            let t = t_from + s * span;
            let c = traj.state_at(t);
            PathPoint {
                x: c.x,
                t,
                dx: c.p / m * span,
                dt: span,
            }
        };
        Self {
            kind: SegmentKind::ComTrajectory,
            curve: Arc::new(curve),
            breaks,
        }
    }

    pub fn at(&self, s: f64) -> PathPoint {
        (self.curve)(s)
    }

    pub fn start(&self) -> (f64, f64) {
        let p = self.at(0.0);
        (p.x, p.t)
    }

    pub fn end(&self) -> (f64, f64) {
        let p = self.at(1.0);
        (p.x, p.t)
    }
}

/// Continuous chain of segments.
#[derive(Debug, Clone)]
pub struct PhasePath {
    pub segments: Vec<Segment>,
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

impl PhasePath {
    pub fn new(segments: Vec<Segment>) -> Result<Self> {
        for (i, w) in segments.windows(2).enumerate() {
            let (a, b) = (w[0].end(), w[1].start());
            if !(close(a.0, b.0) && close(a.1, b.1)) {
                return Err(Error::InvalidInput(format!(
                    "segment {i} ends at {a:?} but segment {} starts at {b:?}",
                    i + 1
                )));
            }
        }
        Ok(Self { segments })
    }
}

/// `∫ (∂θ/∂x dx + ∂θ/∂t dt)` along `path`, by adaptive quadrature on each
/// smooth piece; `tol` is the absolute target per piece.
pub fn phase_line_integral(
    path: &PhasePath,
    partial_x: impl Fn(f64, f64) -> f64,
    partial_t: impl Fn(f64, f64) -> f64,
    tol: f64,
) -> Result<f64> {
    let mut total = 0.0;
    for seg in &path.segments {
        let f = |s: f64| {
            let p = seg.at(s);
            partial_x(p.x, p.t) * p.dx + partial_t(p.x, p.t) * p.dt
        };
        for w in seg.breaks.windows(2) {
            total += adaptive(f, w[0], w[1], tol)?;
        }
    }
    Ok(total)
}

/// Plane-wave phase gradient along a centroid trajectory:
/// `∂θ/∂x = ⟨p̂⟩/ħ`, `∂θ/∂t = −mΦ′(⟨x̂⟩) x/ħ − ⟨p̂⟩²/(2mħ)`.
///
/// The `−⟨p̂⟩²/(2mħ)` part is a gauge choice; it makes the phase along the
/// centroid equal the classical action in at-most-linear potentials.
#[derive(Debug, Clone)]
pub struct PlaneWavePartials {
    traj: Trajectory,
    hbar: f64,
}

impl PlaneWavePartials {
    pub fn new(traj: &Trajectory, ctx: &HbarContext) -> Self {
        Self {
            traj: traj.clone(),
            hbar: ctx.hbar,
        }
    }

    pub fn dx(&self, _x: f64, t: f64) -> f64 {
        self.traj.state_at(t).p / self.hbar
    }

    pub fn dt(&self, x: f64, t: f64) -> f64 {
        let c = self.traj.state_at(t);
        let m = self.traj.mass;
        let force = self.traj.potential.dphi(c.x).unwrap_or(f64::NAN);
        -m * force * x / self.hbar - c.p * c.p / (2.0 * m * self.hbar)
    }
}

/// Which terms of the effective energy enter the second-order phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WidthTerms {
    #[default]
    Full,
    /// Width sector frozen: `p_s ṡ` and all width energies dropped.
    Frozen,
}

fn window(traj: &Trajectory, t_a: f64, t_b: f64) -> Result<(Vec<f64>, f64)> {
    let (lo, hi) = (t_a.min(t_b), t_a.max(t_b));
    if lo < traj.t_start() - 1e-12 * traj.t_start().abs()
        || hi > traj.t_end() + 1e-12 * traj.t_end().abs()
    {
        return Err(Error::InvalidInput(format!(
            "window [{lo}, {hi}] outside trajectory span [{}, {}]",
            traj.t_start(),
            traj.t_end()
        )));
    }
    let mut b = vec![lo];
    b.extend(traj.breakpoints().into_iter().filter(|&t| t > lo && t < hi));
    b.push(hi);
    Ok((b, if t_b >= t_a { 1.0 } else { -1.0 }))
}

fn action(
    traj: &Trajectory,
    t_a: f64,
    t_b: f64,
    hbar: f64,
    lagrangian: impl Fn(&CanonicalState) -> f64,
) -> Result<f64> {
    let (breaks, sign) = window(traj, t_a, t_b)?;
    let v = composite_legendre(&breaks, LEGENDRE_ORDER, |t| lagrangian(&traj.state_at(t)));
    if !v.is_finite() {
        return Err(Error::Domain { x: traj.last().x });
    }
    Ok(sign * v / hbar)
}

/// `(1/ħ)∫(⟨p̂⟩ẋ − H) dt` over the whole trajectory, with `H = p²/2m + mΦ(x)`.
pub fn propagation_phase_plane_wave(traj: &Trajectory, ctx: &HbarContext) -> Result<f64> {
    propagation_phase_plane_wave_between(traj, traj.t_start(), traj.t_end(), ctx)
}

/// As [`propagation_phase_plane_wave`] from `t_a` to `t_b`; reversed windows
/// change sign.
pub fn propagation_phase_plane_wave_between(
    traj: &Trajectory,
    t_a: f64,
    t_b: f64,
    ctx: &HbarContext,
) -> Result<f64> {
    let (m, pot) = (traj.mass, traj.potential);
    action(traj, t_a, t_b, ctx.hbar, |c| {
        let h = c.p * c.p / (2.0 * m) + m * pot.phi(c.x).unwrap_or(f64::NAN);
        c.p * c.p / m - h
    })
}

/// `(1/ħ)∫(p ẋ + p_s ṡ − H_eff) dt` over the whole trajectory.
pub fn propagation_phase_second_order(
    traj: &Trajectory,
    ctx: &HbarContext,
    terms: WidthTerms,
) -> Result<f64> {
    propagation_phase_second_order_between(traj, traj.t_start(), traj.t_end(), ctx, terms)
}

pub fn propagation_phase_second_order_between(
    traj: &Trajectory,
    t_a: f64,
    t_b: f64,
    ctx: &HbarContext,
    terms: WidthTerms,
) -> Result<f64> {
    match terms {
        WidthTerms::Frozen => propagation_phase_plane_wave_between(traj, t_a, t_b, ctx),
        WidthTerms::Full => {
            let (m, pot) = (traj.mass, traj.potential);
            action(traj, t_a, t_b, ctx.hbar, |c| {
                let h = effective_hamiltonian_canonical(c, &pot, m).unwrap_or(f64::NAN);
                (c.p * c.p + c.ps * c.ps) / m - h
            })
        }
    }
}

/// Phase gained along the vertical segment at fixed time from `x_from` to
/// `x_to` under the second-order gradient `p/ħ + (x − x̄)p_s/(sħ)`.
///
/// Returns the plane-wave part and the width part separately.
pub fn vertical_phase(c: &CanonicalState, x_from: f64, x_to: f64, ctx: &HbarContext) -> (f64, f64) {
    let plane = c.p * (x_to - x_from) / ctx.hbar;
    let width = if c.s > 0.0 {
        c.ps / (2.0 * c.s * ctx.hbar) * ((x_to - c.x).powi(2) - (x_from - c.x).powi(2))
    } else {
        0.0
    };
    (plane, width)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{integrate, CanonicalFlow, IntegratorConfig, PotentialModel};
    use approx::assert_relative_eq;

    fn run(pot: PotentialModel, c0: CanonicalState, m: f64, t: f64) -> Trajectory {
        let flow = CanonicalFlow::new(pot, m, c0.u_casimir, 1.0);
        integrate(&flow, &c0, (0.0, t), &IntegratorConfig::tight(1e-13)).unwrap()
    }

    #[test]
    fn closed_loop_vanishes() {
        let (m, g, p0, hbar) = (1.3, 2.0, 0.7, 1.0);
        let px = move |_x: f64, t: f64| (p0 - m * g * t) / hbar;
        let pt =
            move |x: f64, t: f64| -m * g * x / hbar - (p0 - m * g * t).powi(2) / (2.0 * m * hbar);
        let loop_path = PhasePath::new(vec![
            Segment::straight((0.0, 0.0), (1.0, 0.5)),
            Segment::vertical(0.5, 1.0, -0.3),
            Segment::straight((-0.3, 0.5), (0.0, 0.0)),
        ])
        .unwrap();
        assert!(
            phase_line_integral(&loop_path, px, pt, 1e-13)
                .unwrap()
                .abs()
                < 1e-9
        );
    }

    #[test]
    fn discontinuous_path_rejected() {
        let r = PhasePath::new(vec![
            Segment::straight((0.0, 0.0), (1.0, 1.0)),
            Segment::vertical(1.0, 1.1, 2.0),
        ]);
        assert!(r.is_err());
    }

    #[test]
    fn free_action() {
        let (m, p0, t) = (2.0, 1.5, 3.0);
        let ctx = HbarContext::natural();
        let traj = run(PotentialModel::free(), CanonicalState::point(0.0, p0), m, t);
        assert_relative_eq!(
            propagation_phase_plane_wave(&traj, &ctx).unwrap(),
            p0 * p0 * t / (2.0 * m),
            max_relative = 1e-12
        );
        let rest = run(
            PotentialModel::free(),
            CanonicalState::point(0.4, 0.0),
            m,
            t,
        );
        assert_eq!(propagation_phase_plane_wave(&rest, &ctx).unwrap(), 0.0);
        let back = propagation_phase_plane_wave_between(&traj, t, 0.0, &ctx).unwrap();
        assert_relative_eq!(back, -p0 * p0 * t / (2.0 * m), max_relative = 1e-12);
    }

    #[test]
    fn line_integral_along_com_equals_action() {
        let (m, g) = (1.1, 0.8);
        let ctx = HbarContext::natural();
        let traj = run(
            PotentialModel::linear(g),
            CanonicalState::point(0.2, 1.4),
            m,
            2.0,
        );
        let partials = PlaneWavePartials::new(&traj, &ctx);
        let path = PhasePath::new(vec![Segment::com(&traj, 0.0, 2.0)]).unwrap();
        let line = phase_line_integral(
            &path,
            |x, t| partials.dx(x, t),
            |x, t| partials.dt(x, t),
            1e-12,
        )
        .unwrap();
        assert_relative_eq!(
            line,
            propagation_phase_plane_wave(&traj, &ctx).unwrap(),
            max_relative = 1e-10
        );
    }

    #[test]
    fn frozen_width_is_plane_wave() {
        let ctx = HbarContext::natural();
        let traj = run(
            PotentialModel::quadratic(0.5, 0.3),
            CanonicalState::new(0.0, 1.0, 0.3, 0.0, 0.25),
            1.0,
            2.0,
        );
        assert_eq!(
            propagation_phase_second_order(&traj, &ctx, WidthTerms::Frozen).unwrap(),
            propagation_phase_plane_wave(&traj, &ctx).unwrap()
        );
    }

    #[test]
    fn free_spreading_extra_phase() {
        let (m, sigma, p0, t) = (1.0, 0.5, 0.3, 4.0);
        let ctx = HbarContext::natural();
        let omega = ctx.hbar / (2.0 * m * sigma * sigma);
        let c0 = CanonicalState::new(0.0, p0, sigma, 0.0, 0.25 * ctx.hbar * ctx.hbar);
        let traj = run(PotentialModel::free(), c0, m, t);
        let extra = propagation_phase_second_order(&traj, &ctx, WidthTerms::Full).unwrap()
            - propagation_phase_plane_wave(&traj, &ctx).unwrap();
        let oracle = 0.25 * omega * t - 0.5 * (omega * t).atan();
        assert_relative_eq!(extra, oracle, max_relative = 1e-9);
    }

    #[test]
    fn vertical_segment_split() {
        let ctx = HbarContext::natural();
        let c = CanonicalState::new(1.0, 2.0, 0.5, 0.2, 0.25);
        let (plane, width) = vertical_phase(&c, 1.0, 1.5, &ctx);
        assert_relative_eq!(plane, 1.0, max_relative = 1e-15);
        assert_relative_eq!(width, 0.2 / (2.0 * 0.5) * 0.25, max_relative = 1e-15);
    }
}
