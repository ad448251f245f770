use std::io::{self, Write};

use super::flow::{effective_hamiltonian_canonical, moments_to_canonical, Flow};
use super::integrator::{solve, DenseStep, IntegratorConfig, Status, StepMonitor};
use super::potential::PotentialModel;
use crate::error::{Error, Result};
use crate::fmt17;
use crate::moments::{casimir, from_canonical, CanonicalState};

/// Dense output of an integration, in the chart it was integrated in.
#[derive(Debug, Clone, PartialEq)]
pub enum DenseStore {
    Canonical {
        u_casimir: f64,
        steps: Vec<DenseStep<4>>,
    },
    Moments {
        steps: Vec<DenseStep<5>>,
    },
}

fn locate<const N: usize>(steps: &[DenseStep<N>], t: f64) -> Option<&DenseStep<N>> {
    if steps.is_empty() {
        return None;
    }
    let idx = steps.partition_point(|s| s.t1() < t).min(steps.len() - 1);
    Some(&steps[idx])
}

impl DenseStore {
    pub fn state_at(&self, t: f64) -> Option<CanonicalState> {
        match self {
            DenseStore::Canonical { u_casimir, steps } => locate(steps, t).map(|s| {
                let y = s.eval(t);
                CanonicalState::new(y[0], y[1], y[2], y[3], *u_casimir)
            }),
            DenseStore::Moments { steps } => {
                locate(steps, t).map(|s| moments_to_canonical(&s.eval(t)))
            }
        }
    }

    /// Step boundaries `t₀ < t₁ < …`.
    pub fn breakpoints(&self) -> Vec<f64> {
        fn collect<const N: usize>(steps: &[DenseStep<N>]) -> Vec<f64> {
            let mut v: Vec<f64> = steps.iter().map(|s| s.t0).collect();
            if let Some(last) = steps.last() {
                v.push(last.t1());
            }
            v
        }
        match self {
            DenseStore::Canonical { steps, .. } => collect(steps),
            DenseStore::Moments { steps } => collect(steps),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectorySample {
    pub t: f64,
    pub state: CanonicalState,
}

/// Time-ordered samples with energy and Casimir diagnostics and a dense
/// interpolant between samples.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<TrajectorySample>,
    pub energy_series: Vec<f64>,
    pub casimir_series: Vec<f64>,
    pub status: Status,
    pub potential: PotentialModel,
    pub mass: f64,
    dense: DenseStore,
}

pub(crate) fn diagnostics(c: &CanonicalState, pot: &PotentialModel, m: f64) -> (f64, f64) {
    let e = effective_hamiltonian_canonical(c, pot, m).unwrap_or(f64::NAN);
    (e, casimir(&from_canonical(c)))
}

impl Trajectory {
    pub fn t_start(&self) -> f64 {
        self.samples[0].t
    }

    pub fn t_end(&self) -> f64 {
        self.samples.last().unwrap().t
    }

    pub fn last(&self) -> &CanonicalState {
        &self.samples.last().unwrap().state
    }

    pub fn is_aborted(&self) -> bool {
        self.status.is_abort()
    }

    pub fn dense(&self) -> &DenseStore {
        &self.dense
    }

    /// Interpolated state; `t` is clamped to the integrated span.
    pub fn state_at(&self, t: f64) -> CanonicalState {
        let t = t.clamp(self.t_start(), self.t_end());
        self.dense.state_at(t).unwrap_or(self.samples[0].state)
    }

    /// Integration nodes restricted to the span actually covered.
    pub fn breakpoints(&self) -> Vec<f64> {
        let end = self.t_end();
        let mut b: Vec<f64> = self
            .dense
            .breakpoints()
            .into_iter()
            .filter(|&t| t < end)
            .collect();
        if b.is_empty() {
            b.push(self.t_start());
        }
        b.push(end);
        b
    }

    /// `n ≥ 2` equally spaced samples with recomputed diagnostics.
    pub fn resample(&self, n: usize) -> Vec<(f64, CanonicalState, f64, f64)> {
        let (a, b) = (self.t_start(), self.t_end());
        (0..n.max(2))
            .map(|i| {
                let t = a + (b - a) * i as f64 / (n.max(2) - 1) as f64;
                let c = self.state_at(t);
                let (e, u) = diagnostics(&c, &self.potential, self.mass);
                (t, c, e, u)
            })
            .collect()
    }

    /// Largest `|E(t) − E(0)| / |E(0)|` over the samples.
    pub fn max_energy_drift(&self) -> f64 {
        relative_drift(&self.energy_series)
    }

    /// Largest `|U(t) − U(0)| / |U(0)|`; absolute drift when `U(0) = 0`.
    pub fn max_casimir_drift(&self) -> f64 {
        relative_drift(&self.casimir_series)
    }

    /// CSV with columns `t,x,p,s,ps,energy,casimir` at every integration node.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        let rows = self
            .samples
            .iter()
            .zip(&self.energy_series)
            .zip(&self.casimir_series)
            .map(|((s, &e), &u)| (s.t, s.state, e, u));
        write_rows(&mut w, rows)
    }

    pub fn write_csv_resampled<W: Write>(&self, mut w: W, n: usize) -> io::Result<()> {
        write_rows(&mut w, self.resample(n).into_iter())
    }
}

fn write_rows<W: Write>(
    w: &mut W,
    rows: impl Iterator<Item = (f64, CanonicalState, f64, f64)>,
) -> io::Result<()> {
    writeln!(w, "t,x,p,s,ps,energy,casimir")?;
    for (t, c, e, u) in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            fmt17(t),
            fmt17(c.x),
            fmt17(c.p),
            fmt17(c.s),
            fmt17(c.ps),
            fmt17(e),
            fmt17(u)
        )?;
    }
    Ok(())
}

fn relative_drift(series: &[f64]) -> f64 {
    let Some(&first) = series.first() else {
        return 0.0;
    };
    let scale = if first == 0.0 { 1.0 } else { first.abs() };
    series
        .iter()
        .map(|v| (v - first).abs() / scale)
        .fold(0.0, f64::max)
}

/// Integrates `flow` from `initial` over `t_span`.
///
/// Singularities (width below the floor, centroid leaving the domain, step
/// underflow) end the run early; the partial trajectory is returned with an
/// aborting [`Status`].
pub fn integrate<F: Flow<N>, const N: usize>(
    flow: &F,
    initial: &CanonicalState,
    t_span: (f64, f64),
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    integrate_monitored(flow, initial, t_span, cfg, None)
}

pub fn integrate_monitored<F: Flow<N>, const N: usize>(
    flow: &F,
    initial: &CanonicalState,
    t_span: (f64, f64),
    cfg: &IntegratorConfig,
    monitor: Option<&mut dyn StepMonitor<N>>,
) -> Result<Trajectory> {
    if !initial.is_point_particle() && !(initial.s > 0.0) {
        return Err(Error::Singularity {
            t: t_span.0,
            reason: "initial width must be positive".into(),
        });
    }
    let y0 = flow.encode(initial)?;
    let sol = solve(flow, t_span.0, y0, t_span.1, cfg, monitor)?;
    let (pot, m) = (flow.potential(), flow.mass());
    let samples: Vec<TrajectorySample> = sol
        .times
        .iter()
        .zip(&sol.values)
        .map(|(&t, y)| TrajectorySample {
            t,
            state: flow.decode(y),
        })
        .collect();
    let (energy_series, casimir_series) = samples
        .iter()
        .map(|s| diagnostics(&s.state, &pot, m))
        .unzip();
    Ok(Trajectory {
        samples,
        energy_series,
        casimir_series,
        status: sol.status,
        potential: pot,
        mass: m,
        dense: flow.dense_store(sol.steps),
    })
}
