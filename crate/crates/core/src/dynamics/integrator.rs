//! Dormand–Prince 5(4) with the 4th-order continuous extension, plus a
//! fixed-step kick–drift–kick splitting for separable Hamiltonians.

use crate::error::{Error, Result};

/// `dy/dt = f(t, y)`.
pub trait OdeSystem<const N: usize> {
    fn rhs(&self, t: f64, y: &[f64; N]) -> Result<[f64; N]>;

    /// Checked after each accepted step; an error aborts the integration.
    fn validate(&self, _t: f64, _y: &[f64; N]) -> Result<()> {
        Ok(())
    }

    /// One fixed step of a symplectic splitting, if the system supports it.
    fn split_step(&self, _t: f64, _y: &[f64; N], _h: f64) -> Option<Result<[f64; N]>> {
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Method {
    #[default]
    AdaptiveRk,
    /// Störmer–Verlet splitting with step `h_init`.
    FixedStep,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub h_init: f64,
    pub h_min: f64,
    pub h_max: f64,
    pub method: Method,
    pub max_steps: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            h_init: 1e-3,
            h_min: 1e-14,
            h_max: f64::INFINITY,
            method: Method::AdaptiveRk,
            max_steps: 10_000_000,
        }
    }
}

impl IntegratorConfig {
    /// Adaptive configuration with relative tolerance `tol` and absolute
    /// tolerance `tol / 100` (in the units of the state).
    pub fn tight(tol: f64) -> Self {
        Self {
            rel_tol: tol,
            abs_tol: tol * 1e-2,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.rel_tol > 0.0
            && self.abs_tol > 0.0
            && self.h_min > 0.0
            && self.h_min <= self.h_init
            && self.h_init <= self.h_max
            && self.max_steps > 0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!(
                "inconsistent integrator configuration: {self:?}"
            )))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Interp<const N: usize> {
    Dopri([[f64; N]; 5]),
    Hermite {
        y0: [f64; N],
        y1: [f64; N],
        f0: [f64; N],
        f1: [f64; N],
    },
}

/// Continuous representation of one accepted step on `[t0, t0 + h]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseStep<const N: usize> {
    pub t0: f64,
    pub h: f64,
    interp: Interp<N>,
}

impl<const N: usize> DenseStep<N> {
    pub fn t1(&self) -> f64 {
        self.t0 + self.h
    }

    pub fn eval(&self, t: f64) -> [f64; N] {
        let th = (t - self.t0) / self.h;
        let th1 = 1.0 - th;
        let mut out = [0.0; N];
        match &self.interp {
            Interp::Dopri(r) => {
                for i in 0..N {
                    out[i] =
                        r[0][i] + th * (r[1][i] + th1 * (r[2][i] + th * (r[3][i] + th1 * r[4][i])));
                }
            }
            Interp::Hermite { y0, y1, f0, f1 } => {
                let th2 = th * th;
                let th3 = th2 * th;
                let h00 = 2.0 * th3 - 3.0 * th2 + 1.0;
                let h10 = th3 - 2.0 * th2 + th;
                let h01 = -2.0 * th3 + 3.0 * th2;
                let h11 = th3 - th2;
                for i in 0..N {
                    out[i] =
                        h00 * y0[i] + h10 * self.h * f0[i] + h01 * y1[i] + h11 * self.h * f1[i];
                }
            }
        }
        out
    }
}

/// How an integration ended.
#[derive(Debug, Clone, PartialEq)]
pub enum Status {
    Completed,
    /// A monitor located an event and truncated the solution there.
    Event {
        t: f64,
    },
    /// Step-size underflow, a failed validation, or a singular right-hand side.
    Singularity {
        t: f64,
        reason: String,
    },
    StepLimit {
        t: f64,
    },
    /// A monitor stopped the run for a reason other than a located event.
    Halted {
        t: f64,
        reason: String,
    },
}

impl Status {
    pub fn is_abort(&self) -> bool {
        matches!(
            self,
            Status::Singularity { .. } | Status::StepLimit { .. } | Status::Halted { .. }
        )
    }
}

/// Returned by a [`StepMonitor`] after each accepted step.
#[derive(Debug, Clone, PartialEq)]
pub enum MonitorAction {
    Continue,
    /// Truncate the solution at `t` (inside the last step) and stop.
    Stop {
        t: f64,
        status: Status,
    },
}

pub trait StepMonitor<const N: usize> {
    fn after_step(&mut self, step: &DenseStep<N>) -> MonitorAction;
}

impl<const N: usize, F: FnMut(&DenseStep<N>) -> MonitorAction> StepMonitor<N> for F {
    fn after_step(&mut self, step: &DenseStep<N>) -> MonitorAction {
        self(step)
    }
}

/// Raw solver output: node values plus a dense step between consecutive nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution<const N: usize> {
    pub times: Vec<f64>,
    pub values: Vec<[f64; N]>,
    pub steps: Vec<DenseStep<N>>,
    pub status: Status,
}

impl<const N: usize> Solution<N> {
    fn start(t0: f64, y0: [f64; N]) -> Self {
        Self {
            times: vec![t0],
            values: vec![y0],
            steps: Vec::new(),
            status: Status::Completed,
        }
    }

    fn push(&mut self, step: DenseStep<N>, y1: [f64; N]) {
        self.times.push(step.t1());
        self.values.push(y1);
        self.steps.push(step);
    }

    fn truncate_at(&mut self, t: f64, status: Status) {
        if let Some(last) = self.steps.last() {
            let y = last.eval(t);
            *self.times.last_mut().unwrap() = t;
            *self.values.last_mut().unwrap() = y;
        }
        self.status = status;
    }
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

struct Attempt<const N: usize> {
    y1: [f64; N],
    k: [[f64; N]; 7],
    err: f64,
}

fn dopri_attempt<S: OdeSystem<N>, const N: usize>(
    sys: &S,
    t: f64,
    y: &[f64; N],
    k1: &[f64; N],
    h: f64,
    cfg: &IntegratorConfig,
) -> Result<Attempt<N>> {
    let mut k = [[0.0; N]; 7];
    k[0] = *k1;
    for s in 1..7 {
        let mut ys = *y;
        for i in 0..N {
            let mut acc = 0.0;
            for j in 0..s {
                acc += A[s][j] * k[j][i];
            }
            ys[i] += h * acc;
        }
        k[s] = sys.rhs(t + C[s] * h, &ys)?;
    }
    let mut y1 = *y;
    for i in 0..N {
        let mut acc = 0.0;
        for j in 0..6 {
            acc += A[6][j] * k[j][i];
        }
        y1[i] += h * acc;
    }
    let mut sq = 0.0;
    for i in 0..N {
        let mut e = 0.0;
        for j in 0..7 {
            e += E[j] * k[j][i];
        }
        let sc = cfg.abs_tol + cfg.rel_tol * y[i].abs().max(y1[i].abs());
        sq += (h * e / sc).powi(2);
    }
    let err = (sq / N as f64).sqrt();
    if !err.is_finite() || y1.iter().any(|v| !v.is_finite()) {
        return Err(Error::Singularity {
            t,
            reason: "non-finite step".into(),
        });
    }
    Ok(Attempt { y1, k, err })
}

fn dopri_dense<const N: usize>(t0: f64, h: f64, y0: &[f64; N], a: &Attempt<N>) -> DenseStep<N> {
    let mut r = [[0.0; N]; 5];
    for i in 0..N {
        let dy = a.y1[i] - y0[i];
        let bspl = h * a.k[0][i] - dy;
        r[0][i] = y0[i];
        r[1][i] = dy;
        r[2][i] = bspl;
        r[3][i] = dy - h * a.k[6][i] - bspl;
        let mut acc = 0.0;
        for j in 0..7 {
            acc += D[j] * a.k[j][i];
        }
        r[4][i] = h * acc;
    }
    DenseStep {
        t0,
        h,
        interp: Interp::Dopri(r),
    }
}

/// Integrates from `t0` to `t_end > t0`.
///
/// Numerical trouble does not produce an `Err`: the solution is returned up to
/// the last good step with an aborting [`Status`]. `Err` is reserved for
/// invalid arguments.
pub fn solve<S: OdeSystem<N>, const N: usize>(
    sys: &S,
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    cfg: &IntegratorConfig,
    mut monitor: Option<&mut dyn StepMonitor<N>>,
) -> Result<Solution<N>> {
    cfg.validate()?;
    if !(t_end > t0) || !t_end.is_finite() {
        return Err(Error::InvalidInput(format!(
            "time span [{t0}, {t_end}] is empty or infinite"
        )));
    }
    sys.validate(t0, &y0)?;
    let mut k1 = sys.rhs(t0, &y0)?;
    if cfg.method == Method::FixedStep {
        return solve_fixed(sys, t0, y0, k1, t_end, cfg, monitor);
    }

    let mut sol = Solution::start(t0, y0);
    let (mut t, mut y) = (t0, y0);
    let mut h = cfg.h_init.min(cfg.h_max);
    let mut rejected_last = false;
    let mut steps = 0usize;
    let span = t_end - t0;

    while t < t_end {
        if steps >= cfg.max_steps {
            sol.status = Status::StepLimit { t };
            return Ok(sol);
        }
        steps += 1;
        let mut last = false;
        if t + h >= t_end - 1e-14 * span {
            h = t_end - t;
            last = true;
        }
        let attempt = match dopri_attempt(sys, t, &y, &k1, h, cfg) {
            Ok(a) => a,
            Err(e) => {
                // Stage left the domain: retry with a much smaller step.
                h *= 0.25;
                if h < cfg.h_min {
                    sol.status = Status::Singularity {
                        t,
                        reason: e.to_string(),
                    };
                    return Ok(sol);
                }
                rejected_last = true;
                continue;
            }
        };
        let fac = (0.9 * attempt.err.powf(-0.2)).clamp(0.2, 5.0);
        if attempt.err > 1.0 {
            h *= fac.min(1.0);
            rejected_last = true;
            if h < cfg.h_min {
                sol.status = Status::Singularity {
                    t,
                    reason: "step size underflow".into(),
                };
                return Ok(sol);
            }
            continue;
        }
        let t1 = if last { t_end } else { t + h };
        if let Err(e) = sys.validate(t1, &attempt.y1) {
            sol.status = Status::Singularity {
                t: t1,
                reason: e.to_string(),
            };
            return Ok(sol);
        }
        let step = dopri_dense(t, h, &y, &attempt);
        sol.push(step, attempt.y1);
        if let Some(m) = monitor.as_deref_mut() {
            if let MonitorAction::Stop { t: ts, status } = m.after_step(sol.steps.last().unwrap()) {
                sol.truncate_at(ts, status);
                return Ok(sol);
            }
        }
        t = t1;
        y = attempt.y1;
        k1 = attempt.k[6];
        let grow = if rejected_last { fac.min(1.0) } else { fac };
        h = (h * grow).min(cfg.h_max);
        rejected_last = false;
    }
    Ok(sol)
}

fn solve_fixed<S: OdeSystem<N>, const N: usize>(
    sys: &S,
    t0: f64,
    y0: [f64; N],
    k0: [f64; N],
    t_end: f64,
    cfg: &IntegratorConfig,
    mut monitor: Option<&mut dyn StepMonitor<N>>,
) -> Result<Solution<N>> {
    let n = ((t_end - t0) / cfg.h_init).ceil().max(1.0) as usize;
    if n > cfg.max_steps {
        return Err(Error::InvalidInput(format!(
            "{n} fixed steps exceed max_steps"
        )));
    }
    let h = (t_end - t0) / n as f64;
    let mut sol = Solution::start(t0, y0);
    let (mut y, mut f0) = (y0, k0);
    for i in 0..n {
        let t = t0 + i as f64 * h;
        let next = match sys.split_step(t, &y, h) {
            Some(r) => r,
            None => {
                return Err(Error::InvalidInput(
                    "fixed-step splitting is only available for separable canonical flows".into(),
                ))
            }
        };
        let y1 = match next.and_then(|y1| sys.validate(t + h, &y1).map(|_| y1)) {
            Ok(y1) => y1,
            Err(e) => {
                sol.status = Status::Singularity {
                    t,
                    reason: e.to_string(),
                };
                return Ok(sol);
            }
        };
        let f1 = match sys.rhs(t + h, &y1) {
            Ok(f) => f,
            Err(e) => {
                sol.status = Status::Singularity {
                    t: t + h,
                    reason: e.to_string(),
                };
                return Ok(sol);
            }
        };
        let step = DenseStep {
            t0: t,
            h,
            interp: Interp::Hermite { y0: y, y1, f0, f1 },
        };
        sol.push(step, y1);
        if let Some(m) = monitor.as_deref_mut() {
            if let MonitorAction::Stop { t: ts, status } = m.after_step(sol.steps.last().unwrap()) {
                sol.truncate_at(ts, status);
                return Ok(sol);
            }
        }
        y = y1;
        f0 = f1;
    }
    Ok(sol)
}

/// Root of `f` on `[a, b]` given `f(a)` and `f(b)` of opposite sign (Illinois).
pub fn bracketed_root(mut f: impl FnMut(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let (mut fa, mut fb) = (f(a), f(b));
    if fa == 0.0 {
        return a;
    }
    if fb == 0.0 {
        return b;
    }
    let mut side = 0i8;
    for _ in 0..200 {
        let c = (a * fb - b * fa) / (fb - fa);
        let fc = f(c);
        if fc == 0.0 || (b - a).abs() < tol {
            return c;
        }
        if fc.signum() == fb.signum() {
            b = c;
            fb = fc;
            if side == -1 {
                fa *= 0.5;
            }
            side = -1;
        } else {
            a = c;
            fa = fc;
            if side == 1 {
                fb *= 0.5;
            }
            side = 1;
        }
        if (b - a).abs() < tol {
            break;
        }
    }
    (a * fb - b * fa) / (fb - fa)
}
