use std::fmt;
use std::io::{self, Write};

use rayon::prelude::*;

use crate::dynamics::integrator::{bracketed_root, DenseStep, MonitorAction};
use crate::dynamics::{
    effective_hamiltonian_canonical, integrate_monitored, CanonicalFlow, IntegratorConfig,
    PotentialModel, Status, Trajectory,
};
use crate::error::{Error, Result};
use crate::fmt17;
use crate::moments::CanonicalState;

pub const DEFAULT_ESCAPE_FACTOR: f64 = 100.0;
pub const DEFAULT_T_MAX: f64 = 1e4;

/// Initial width sector of a return-time run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WidthPolicy {
    /// `s₀ = (u r₀³/2)^{1/4}`, `p_s = 0`: the width at which the uncertainty
    /// and tidal width forces have equal magnitude. Reduces to a point
    /// particle at `u = 0`.
    Balance,
    Fixed {
        s0: f64,
        ps0: f64,
    },
}

/// Radial launch from `r₀` in the nondimensional Newtonian field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReturnTimeProblem {
    /// Classical energy `p²/2 − 1/r` of the launch.
    pub epsilon: f64,
    pub u: f64,
    pub width: WidthPolicy,
    pub r0: f64,
    pub escape_factor: f64,
    pub t_max: f64,
}

impl ReturnTimeProblem {
    pub fn new(epsilon: f64, u: f64) -> Self {
        Self {
            epsilon,
            u,
            width: WidthPolicy::Balance,
            r0: 1.0,
            escape_factor: DEFAULT_ESCAPE_FACTOR,
            t_max: DEFAULT_T_MAX,
        }
    }

    pub fn point_particle(epsilon: f64) -> Self {
        Self::new(epsilon, 0.0)
    }

    pub fn with_width(mut self, s0: f64, ps0: f64) -> Self {
        self.width = WidthPolicy::Fixed { s0, ps0 };
        self
    }

    /// Outward launch momentum `√(2(ε + 1/r₀))`.
    pub fn launch_momentum(&self) -> Result<f64> {
        let k = self.epsilon + 1.0 / self.r0;
        if !(k > 0.0) {
            return Err(Error::InvalidInput(format!(
                "energy {} leaves no kinetic energy at r0 = {}",
                self.epsilon, self.r0
            )));
        }
        Ok((2.0 * k).sqrt())
    }

    pub fn initial_width(&self) -> (f64, f64) {
        match self.width {
            WidthPolicy::Balance => ((0.5 * self.u * self.r0.powi(3)).powf(0.25), 0.0),
            WidthPolicy::Fixed { s0, ps0 } => (s0, ps0),
        }
    }

    pub fn initial_state(&self) -> Result<CanonicalState> {
        if !(self.r0 > 0.0) || !(self.u >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "need r0 > 0 and u ≥ 0, got r0={}, u={}",
                self.r0, self.u
            )));
        }
        let p0 = self.launch_momentum()?;
        let (s0, ps0) = self.initial_width();
        if self.u > 0.0 && !(s0 > 0.0) {
            return Err(Error::InvalidInput(format!(
                "u = {} requires a positive initial width",
                self.u
            )));
        }
        if !(s0 >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "initial width must be non-negative, got {s0}"
            )));
        }
        Ok(CanonicalState::new(self.r0, p0, s0, ps0, self.u))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReturnTime {
    pub t_return: f64,
    pub trajectory: Trajectory,
}

/// Time of the first inward crossing of the launch radius.
pub fn return_time(problem: &ReturnTimeProblem, cfg: &IntegratorConfig) -> Result<ReturnTime> {
    let c0 = problem.initial_state()?;
    let pot = PotentialModel::newtonian_nondimensional();
    let flow = CanonicalFlow::new(pot, 1.0, problem.u, problem.r0);
    let (r0, guard) = (problem.r0, problem.escape_factor * problem.r0);
    let u = problem.u;
    let mut monitor = |step: &DenseStep<4>| -> MonitorAction {
        let (a, b) = (step.eval(step.t0), step.eval(step.t1()));
        if a[0] - r0 > 0.0 && b[0] - r0 <= 0.0 {
            let tol = 1e-13 * step.t1().abs().max(1.0);
            let t = bracketed_root(|t| step.eval(t)[0] - r0, step.t0, step.t1(), tol);
            return MonitorAction::Stop {
                t,
                status: Status::Event { t },
            };
        }
        if b[0] > guard && b[1] > 0.0 {
            let c = CanonicalState::new(b[0], b[1], b[2], b[3], u);
            if effective_hamiltonian_canonical(&c, &pot, 1.0).is_ok_and(|e| e > 0.0) {
                let t = step.t1();
                return MonitorAction::Stop {
                    t,
                    status: Status::Halted {
                        t,
                        reason: "escape".into(),
                    },
                };
            }
        }
        MonitorAction::Continue
    };
    let trajectory =
        integrate_monitored(&flow, &c0, (0.0, problem.t_max), cfg, Some(&mut monitor))?;
    match trajectory.status.clone() {
        Status::Event { t } => Ok(ReturnTime {
            t_return: t,
            trajectory,
        }),
        Status::Halted { t, .. } => Err(Error::Escape {
            t,
            r: trajectory.last().x,
        }),
        Status::Completed => Err(Error::NoReturn {
            t_max: problem.t_max,
        }),
        Status::Singularity { t, reason } => Err(Error::Singularity { t, reason }),
        Status::StepLimit { t } => Err(Error::Singularity {
            t,
            reason: "step limit reached".into(),
        }),
    }
}

/// Meaning of the energy values in a sweep grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Abscissa {
    /// Classical energy `ε = p²/2 − 1/r`; escape at `ε = 0`.
    #[default]
    Classical,
    /// Launch kinetic energy `p₀²/2 = ε + 1/r₀`; escape at `1/r₀`.
    Kinetic,
}

impl Abscissa {
    pub fn to_epsilon(self, value: f64, r0: f64) -> f64 {
        match self {
            Abscissa::Classical => value,
            Abscissa::Kinetic => value - 1.0 / r0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowStatus {
    Ok,
    Escape,
    NoReturn,
    Singularity,
    Invalid,
}

impl fmt::Display for RowStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RowStatus::Ok => "ok",
            RowStatus::Escape => "escape",
            RowStatus::NoReturn => "no_return",
            RowStatus::Singularity => "singularity",
            RowStatus::Invalid => "invalid",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReturnTimeRow {
    /// Grid value in the sweep's abscissa convention.
    pub energy: f64,
    pub u: f64,
    pub t_return: Option<f64>,
    pub status: RowStatus,
}

/// Return times over `energies × u_values`, one independent run per point.
/// Rows are ordered by `u`, then energy.
pub fn return_time_curve(
    energies: &[f64],
    u_values: &[f64],
    template: &ReturnTimeProblem,
    abscissa: Abscissa,
    cfg: &IntegratorConfig,
) -> Vec<ReturnTimeRow> {
    let grid: Vec<(f64, f64)> = u_values
        .iter()
        .flat_map(|&u| energies.iter().map(move |&e| (u, e)))
        .collect();
    grid.par_iter()
        .map(|&(u, energy)| {
            let problem = ReturnTimeProblem {
                epsilon: abscissa.to_epsilon(energy, template.r0),
                u,
                ..*template
            };
            let (t_return, status) = match return_time(&problem, cfg) {
                Ok(r) => (Some(r.t_return), RowStatus::Ok),
                Err(Error::Escape { .. }) => (None, RowStatus::Escape),
                Err(Error::NoReturn { .. }) => (None, RowStatus::NoReturn),
                Err(Error::Singularity { .. }) => (None, RowStatus::Singularity),
                Err(_) => (None, RowStatus::Invalid),
            };
            ReturnTimeRow {
                energy,
                u,
                t_return,
                status,
            }
        })
        .collect()
}

/// CSV with columns `epsilon,u,t_return,status`; missing times are written as `nan`.
pub fn write_return_time_csv<W: Write>(mut w: W, rows: &[ReturnTimeRow]) -> io::Result<()> {
    writeln!(w, "epsilon,u,t_return,status")?;
    for r in rows {
        let t = r.t_return.map(fmt17).unwrap_or_else(|| "nan".into());
        writeln!(w, "{},{},{},{}", fmt17(r.energy), fmt17(r.u), t, r.status)?;
    }
    Ok(())
}
