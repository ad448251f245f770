use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use qfall::constants::{EARTH_MASS, EARTH_RADIUS, G, HBAR, NEUTRON_MASS};
use qfall::dynamics::{
    integrate, CanonicalFlow, IntegratorConfig, Method, MomentFlow, PotentialModel, Trajectory,
    Units,
};
use qfall::experiments::{
    eotvos_estimate, mach_zehnder_phase, return_time_curve, width_bound_from_eta, write_eotvos_csv,
    write_mz_csv, write_return_time_csv, Abscissa, EotvosInput, MachZehnderConfig, MzRow, Readout,
    ReturnTimeProblem, ReturnTimeRow, RowStatus, WidthPolicy, DEFAULT_ESCAPE_FACTOR, DEFAULT_T_MAX,
};
use qfall::moments::{
    central_from_raw, to_canonical, CanonicalState, HbarContext, RawMomentSequence,
    SecondOrderState,
};
use qfall::reconstruct::{
    gaussian_moment_sequence, reconstruct, write_profile_csv, HermiteBasis, ProfileRow,
};
use serde::Serialize;

use crate::cli::{Cli, Command};
use crate::config::{Grid, Params, Source};
use crate::error::CliError;
use crate::manifest::{Manifest, Resolved, Tolerances};
use crate::svg::{Plot, Series};

/// Rubidium-87 mass in kg.
const RB87_MASS: f64 = 1.443_160_648e-25;
/// Two-photon wavenumber at 780 nm, in 1/m.
const RB87_K: f64 = 1.611e7;

/// State shared by one invocation: inputs, resolved values and everything that
/// ends up in the manifest.
struct Run {
    params: Params,
    out: PathBuf,
    svg: bool,
    resolved: BTreeMap<String, Resolved>,
    tolerances: Option<Tolerances>,
    diagnostics: BTreeMap<String, f64>,
    warnings: Vec<String>,
    outputs: Vec<String>,
}

impl Run {
    fn record(&mut self, key: &str, value: impl Serialize) {
        let source = match self.params.entries().get(key).map(|e| &e.source) {
            Some(Source::File { line }) => format!("config line {line}"),
            Some(Source::Flag) => "flag".to_string(),
            None => "default".to_string(),
        };
        let value = serde_json::to_value(value).unwrap_or(serde_json::Value::Null);
        self.resolved
            .insert(key.to_string(), Resolved { value, source });
    }

    fn f64_or(&mut self, key: &str, default: f64) -> Result<f64, CliError> {
        let v = self.params.f64_or(key, default)?;
        self.record(key, v);
        Ok(v)
    }

    fn positive(&mut self, key: &str, default: f64) -> Result<f64, CliError> {
        let v = self.params.positive(key, default)?;
        self.record(key, v);
        Ok(v)
    }

    fn choice<'a>(&mut self, key: &str, choices: &[&'a str]) -> Result<&'a str, CliError> {
        let v = self.params.choice(key, choices)?;
        self.record(key, v);
        Ok(v)
    }

    fn list_or(&mut self, key: &str, default: &[f64]) -> Result<Vec<f64>, CliError> {
        let v = self.params.list(key)?.unwrap_or_else(|| default.to_vec());
        if v.is_empty() {
            return Err(CliError::config(None, Some(key), "empty list".into()));
        }
        self.record(key, &v);
        Ok(v)
    }

    fn grid_or(&mut self, key: &str, default: Grid) -> Result<Grid, CliError> {
        let g = self.params.grid(key)?.unwrap_or(default);
        self.record(key, format!("{}:{}:{}", g.start, g.stop, g.count));
        Ok(g)
    }

    fn bool_or(&mut self, key: &str, default: bool) -> Result<bool, CliError> {
        let v = self.params.get_or(key, default)?;
        self.record(key, v);
        Ok(v)
    }

    /// Error for a key that is present but not meaningful in this configuration.
    fn reject(&self, key: &str, why: &str) -> Result<(), CliError> {
        if self.params.raw(key).is_some() {
            return Err(self.fail(key, why));
        }
        Ok(())
    }

    fn fail(&self, key: &str, why: &str) -> CliError {
        let line = match self.params.entries().get(key).map(|e| &e.source) {
            Some(Source::File { line }) => Some(*line),
            _ => None,
        };
        CliError::config(line, Some(key), why.to_string())
    }

    fn integrator(&mut self, atol_default: f64, span: f64) -> Result<IntegratorConfig, CliError> {
        let rtol = self.positive("rtol", 1e-10)?;
        let atol = self.positive("atol", atol_default * rtol)?;
        self.tolerances = Some(Tolerances { rtol, atol });
        let h_init = (1e-4 * span).min(1e-3 * span.max(1.0));
        Ok(IntegratorConfig {
            rel_tol: rtol,
            abs_tol: atol,
            h_init,
            h_min: 1e-14 * span.min(h_init),
            ..Default::default()
        })
    }

    fn create(&mut self, name: &str) -> Result<BufWriter<File>, CliError> {
        self.outputs.push(name.to_string());
        Ok(BufWriter::new(File::create(self.out.join(name))?))
    }

    fn plot(&mut self, name: &str, plot: &Plot) -> Result<(), CliError> {
        if self.svg {
            let mut w = self.create(name)?;
            w.write_all(plot.render().as_bytes())?;
            w.flush()?;
        }
        Ok(())
    }

    fn warn(&mut self, msg: String) {
        eprintln!("warning: {msg}");
        self.warnings.push(msg);
    }
}

/// Executes one command. Outputs and `manifest.json` are written to `--out`;
/// on a numerical abort the partial outputs and a manifest recording the abort
/// are written before the error is returned.
pub fn run(cli: &Cli) -> Result<(), CliError> {
    let params = cli.command.params(cli.config.as_deref())?;
    let mut run = Run {
        params,
        out: cli.out.clone(),
        svg: cli.svg,
        resolved: BTreeMap::new(),
        tolerances: None,
        diagnostics: BTreeMap::new(),
        warnings: Vec::new(),
        outputs: Vec::new(),
    };
    let seed: u64 = run.params.get_or("seed", 0)?;
    run.record("seed", seed);
    std::fs::create_dir_all(&run.out)?;
    let result = match &cli.command {
        Command::Simulate(_) => simulate(&mut run),
        Command::ReturnTime(_) => return_time(&mut run),
        Command::Eotvos(_) => eotvos(&mut run),
        Command::Reconstruct(_) => reconstruct_cmd(&mut run),
        Command::Interferometer(_) => interferometer(&mut run),
    };
    let status = match &result {
        Ok(()) => "ok".to_string(),
        Err(e @ CliError::Numerical(_)) => e.to_string(),
        Err(_) => return result,
    };
    run.outputs.push("manifest.json".into());
    let manifest = Manifest {
        command: cli.command.name().to_string(),
        library_version: qfall::VERSION.to_string(),
        cli_version: env!("CARGO_PKG_VERSION").to_string(),
        seed,
        parameters: run.resolved,
        tolerances: run.tolerances,
        diagnostics: run.diagnostics,
        warnings: run.warnings,
        outputs: run.outputs,
        status,
    };
    manifest.write(&run.out)?;
    result
}

struct UnitDefaults {
    mass: f64,
    g: f64,
    gm: f64,
    radius: f64,
    sigma: f64,
    t_end: f64,
}

fn simulate(run: &mut Run) -> Result<(), CliError> {
    let units = run.choice("units", &["si", "natural", "nondimensional"])?;
    let potentials: &[&str] = if units == "nondimensional" {
        &["newtonian", "free", "linear", "quadratic", "power-law"]
    } else {
        &["linear", "free", "quadratic", "newtonian", "power-law"]
    };
    let kind = run.choice("potential", potentials)?;
    let d = match units {
        "si" => UnitDefaults {
            mass: NEUTRON_MASS,
            g: 9.81,
            gm: G * EARTH_MASS,
            radius: EARTH_RADIUS,
            sigma: 1e-6,
            t_end: 1.0,
        },
        _ => UnitDefaults {
            mass: 1.0,
            g: 1.0,
            gm: 1.0,
            radius: 1.0,
            sigma: 1.0,
            t_end: if units == "natural" { 10.0 } else { 2.0 },
        },
    };

    let (ctx, mass) = if units == "nondimensional" {
        run.reject("hbar", "ħ is fixed by u in nondimensional units")?;
        run.reject("mass", "the mass is 1 in nondimensional units")?;
        let u = run.positive("u", 1e-4)?;
        (HbarContext::nondimensional(u)?, 1.0)
    } else {
        run.reject("u", "u applies to nondimensional units only")?;
        let hbar = run.positive("hbar", if units == "si" { HBAR } else { 1.0 })?;
        (HbarContext::new(hbar, 1.0)?, run.positive("mass", d.mass)?)
    };

    let radial = matches!(kind, "newtonian" | "power-law");
    let mut pot = match kind {
        "free" => PotentialModel::free(),
        "linear" => PotentialModel::linear(run.f64_or("g", d.g)?),
        "quadratic" => {
            let g = run.f64_or("g", d.g)?;
            PotentialModel::quadratic(g, run.f64_or("curvature", -2.0 * d.g / d.radius)?)
        }
        "newtonian" => PotentialModel::newtonian(run.positive("gm", d.gm)?),
        _ => {
            let gm = run.positive("gm", d.gm)?;
            let alpha = run.f64_or("pl-alpha", 0.0)?;
            let n = run.positive("pl-n", 3.0)?;
            PotentialModel::power_law(gm, alpha, n, run.positive("pl-r0", d.radius)?)
        }
    };
    if units == "nondimensional" {
        pot = pot.with_units(Units::Nondimensional);
    }
    for key in ["g", "curvature", "gm", "pl-alpha", "pl-n", "pl-r0"] {
        if !run.resolved.contains_key(key) {
            run.reject(key, &format!("not used by the {kind} potential"))?;
        }
    }

    let x0 = run.f64_or("x0", if radial { d.radius } else { 0.0 })?;
    if !pot.in_domain(x0) {
        return Err(run.fail("x0", &format!("outside the domain of the {kind} potential")));
    }
    let p0 = run.f64_or("p0", if units == "nondimensional" { 1.0 } else { 0.0 })?;
    let point = run.bool_or("point", false)?;
    let t_end = run.positive("t-end", d.t_end)?;
    let samples: usize = run.params.get_or("samples", 0)?;
    run.record("samples", samples);
    if samples == 1 {
        return Err(run.fail("samples", "need 0 or at least 2 samples"));
    }
    let chart = run.choice("chart", &["canonical", "moments"])?;
    let method = run.choice("method", &["adaptive", "verlet"])?;

    let initial = if point {
        for key in ["sigma", "ps0", "casimir"] {
            run.reject(key, "a point particle has no width sector")?;
        }
        if chart == "moments" {
            return Err(run.fail(
                "chart",
                "point particles are integrated in the canonical chart",
            ));
        }
        CanonicalState::point(x0, p0)
    } else {
        let default_sigma = if units == "nondimensional" {
            (0.5 * ctx.min_casimir() * x0.abs().powi(3)).powf(0.25)
        } else {
            d.sigma
        };
        let sigma = run.positive("sigma", default_sigma)?;
        let ps0 = run.f64_or("ps0", 0.0)?;
        let casimir = run.positive("casimir", ctx.min_casimir())?;
        if casimir < ctx.min_casimir() * (1.0 - 1e-12) {
            return Err(run.fail(
                "casimir",
                &format!("below the uncertainty bound {:e}", ctx.min_casimir()),
            ));
        }
        CanonicalState::new(x0, p0, sigma, ps0, casimir)
    };

    let force = pot.dphi(x0)?.abs() * mass;
    let (length, momentum) = if point {
        let l = x0.abs().max(0.5 * force / mass * t_end * t_end);
        let p = p0.abs().max(force * t_end);
        (if l > 0.0 { l } else { 1.0 }, if p > 0.0 { p } else { 1.0 })
    } else {
        (initial.s, initial.u_casimir.sqrt() / initial.s)
    };
    let mut cfg = run.integrator(1e-2 * length.min(momentum), t_end)?;
    if method == "verlet" {
        if chart == "moments" {
            return Err(run.fail("method", "fixed-step integration needs the canonical chart"));
        }
        cfg.method = Method::FixedStep;
    }
    let step = run.positive(
        "step",
        if method == "verlet" {
            t_end / 1e4
        } else {
            cfg.h_init
        },
    )?;
    cfg.h_init = step;
    cfg.h_min = cfg.h_min.min(step);
    cfg.validate()?;

    let traj: Trajectory = if chart == "canonical" {
        let scale = if point { 1.0 } else { initial.s };
        integrate(
            &CanonicalFlow::new(pot, mass, initial.u_casimir, scale),
            &initial,
            (0.0, t_end),
            &cfg,
        )?
    } else {
        integrate(&MomentFlow::new(pot, mass), &initial, (0.0, t_end), &cfg)?
    };
    run.diagnostics
        .insert("energy_drift".into(), traj.max_energy_drift());
    run.diagnostics
        .insert("casimir_drift".into(), traj.max_casimir_drift());
    run.diagnostics.insert("t_reached".into(), traj.t_end());

    let mut w = run.create("trajectory.csv")?;
    if samples == 0 {
        traj.write_csv(&mut w)?;
    } else {
        traj.write_csv_resampled(&mut w, samples)?;
    }
    w.flush()?;
    let mut plot = Plot {
        title: format!("{kind} potential"),
        x_label: "t".into(),
        y_label: "x".into(),
        ..Default::default()
    };
    let pts =
        |f: fn(&CanonicalState) -> f64| traj.samples.iter().map(|s| (s.t, f(&s.state))).collect();
    plot.series.push(Series {
        label: "centroid x".into(),
        points: pts(|c| c.x),
        dashed: false,
    });
    run.plot("trajectory.svg", &plot)?;
    if !point {
        let width = Plot {
            title: "packet width".into(),
            x_label: "t".into(),
            y_label: "s".into(),
            series: vec![Series {
                label: "s".into(),
                points: pts(|c| c.s),
                dashed: false,
            }],
            ..Default::default()
        };
        run.plot("width.svg", &width)?;
    }
    if traj.is_aborted() {
        return Err(CliError::Numerical(format!(
            "integration stopped early: {:?}",
            traj.status
        )));
    }
    Ok(())
}

fn return_time(run: &mut Run) -> Result<(), CliError> {
    let mut us = run.list_or("u", &[1e-5, 1e-3, 1e-1])?;
    if let Some(bad) = us.iter().find(|u| !(**u >= 0.0)) {
        return Err(run.fail("u", &format!("u must be non-negative, got {bad}")));
    }
    us.push(0.0);
    us.sort_by(f64::total_cmp);
    us.dedup();
    let grid = run.grid_or(
        "eps-grid",
        Grid {
            start: -0.9,
            stop: -0.1,
            count: 50,
        },
    )?;
    let abscissa = match run.choice("abscissa", &["classical", "kinetic"])? {
        "classical" => Abscissa::Classical,
        _ => Abscissa::Kinetic,
    };
    let r0 = run.positive("r0", 1.0)?;
    let t_max = run.positive("t-max", DEFAULT_T_MAX)?;
    let escape_factor = run.positive("escape-factor", DEFAULT_ESCAPE_FACTOR)?;
    if escape_factor <= 1.0 {
        return Err(run.fail("escape-factor", "must exceed 1"));
    }
    let width = if run.params.raw("s0").is_some() {
        WidthPolicy::Fixed {
            s0: run.positive("s0", 1.0)?,
            ps0: run.f64_or("ps0", 0.0)?,
        }
    } else {
        run.reject("ps0", "ps0 needs an explicit s0")?;
        WidthPolicy::Balance
    };
    let smallest_width = match width {
        WidthPolicy::Fixed { s0, .. } => s0,
        WidthPolicy::Balance => us
            .iter()
            .filter(|u| **u > 0.0)
            .map(|u| (0.5 * u * r0.powi(3)).powf(0.25))
            .fold(r0, f64::min),
    };
    let cfg = run.integrator(1e-2 * smallest_width.min(1.0), t_max)?;
    cfg.validate()?;

    let energies = grid.points();
    let template = ReturnTimeProblem {
        epsilon: 0.0,
        u: 0.0,
        width,
        r0,
        escape_factor,
        t_max,
    };
    let classical = ReturnTimeProblem {
        width: WidthPolicy::Balance,
        ..template
    };
    let mut rows = return_time_curve(&energies, &[0.0], &classical, abscissa, &cfg);
    let perturbed: Vec<f64> = us.iter().copied().filter(|u| *u > 0.0).collect();
    rows.extend(return_time_curve(
        &energies, &perturbed, &template, abscissa, &cfg,
    ));

    let mut w = run.create("return_time.csv")?;
    write_return_time_csv(&mut w, &rows)?;
    w.flush()?;

    let mut plot = Plot {
        title: "Particle return time".into(),
        x_label: match abscissa {
            Abscissa::Classical => "energy".into(),
            Abscissa::Kinetic => "kinetic energy".into(),
        },
        y_label: "return time".into(),
        ..Default::default()
    };
    for &u in &us {
        let points = rows
            .iter()
            .filter(|r| r.u == u)
            .filter_map(|r| r.t_return.map(|t| (r.energy, t)))
            .collect();
        let label = if u == 0.0 {
            "classical".to_string()
        } else {
            format!("u = {u:e}")
        };
        plot.series.push(Series {
            label,
            points,
            dashed: u == 0.0,
        });
    }
    run.plot("return_time.svg", &plot)?;

    let count = |s: RowStatus| rows.iter().filter(|r| r.status == s).count();
    for (s, name) in [
        (RowStatus::Escape, "escape"),
        (RowStatus::NoReturn, "no_return"),
        (RowStatus::Invalid, "invalid"),
    ] {
        let n = count(s);
        run.diagnostics.insert(format!("rows_{name}"), n as f64);
        if n > 0 && s != RowStatus::Escape {
            run.warn(format!("{n} rows with status {s}"));
        }
    }
    let singular: Vec<&ReturnTimeRow> = rows
        .iter()
        .filter(|r| r.status == RowStatus::Singularity)
        .collect();
    if let Some(r) = singular.first() {
        return Err(CliError::Numerical(format!(
            "{} rows hit a singularity, first at energy {} with u = {}",
            singular.len(),
            r.energy,
            r.u
        )));
    }
    Ok(())
}

fn eotvos(run: &mut Run) -> Result<(), CliError> {
    let g = run.positive("g", qfall::experiments::TERRESTRIAL_G)?;
    let d2g = run.f64_or("d2g", qfall::experiments::TERRESTRIAL_D2G)?;
    let dxx = if run.params.raw("dxx").is_some() {
        run.reject("width", "give either width or dxx")?;
        run.list_or("dxx", &[])?
    } else {
        run.list_or("width", &[1e-10, 1.0])?
            .iter()
            .map(|s| s * s)
            .collect()
    };
    let inputs = dxx
        .iter()
        .map(|&v| EotvosInput::new(g, d2g, v))
        .collect::<Result<Vec<_>, _>>()?;
    if let Some(eta_max) = run.params.get::<f64>("eta-max")? {
        run.record("eta-max", eta_max);
        let bound = width_bound_from_eta(g, d2g, eta_max)?;
        println!("largest width for eta <= {eta_max:e}: {bound:e}");
        run.diagnostics.insert("width_bound".into(), bound);
    }
    let mut w = run.create("eotvos.csv")?;
    write_eotvos_csv(&mut w, &inputs)?;
    w.flush()?;
    let plot = Plot {
        title: "Eötvös parameter".into(),
        x_label: "packet width s".into(),
        y_label: "eta".into(),
        log_x: true,
        log_y: true,
        series: vec![Series {
            label: format!("d2g = {d2g:e}"),
            points: inputs
                .iter()
                .map(|i| (i.dxx.sqrt(), eotvos_estimate(i)))
                .collect(),
            dashed: false,
        }],
    };
    run.plot("eotvos.svg", &plot)
}

fn reconstruct_cmd(run: &mut Run) -> Result<(), CliError> {
    let hbar = run.positive("hbar", 1.0)?;
    let ctx = HbarContext::new(hbar, 1.0)?;
    let (raw, mean, variance, order) = if run.params.raw("moments").is_some() {
        for key in ["x-mean", "p-mean", "dxx", "dxp", "dpp"] {
            run.reject(key, "moments are given explicitly")?;
        }
        let moments = run.list_or("moments", &[])?;
        let order = moments.len() - 1;
        if let Some(o) = run.params.get::<usize>("order")? {
            if o != order {
                return Err(run.fail(
                    "order",
                    &format!("{} moments imply order {order}", moments.len()),
                ));
            }
        }
        run.record("order", order);
        let mut raw = RawMomentSequence::new(moments)?;
        if run.params.raw("mixed").is_some() {
            raw = raw.with_mixed(run.list_or("mixed", &[])?)?;
        }
        let central = central_from_raw(&raw)?;
        let variance = central
            .variance()
            .ok_or_else(|| run.fail("moments", "need moments up to order 2"))?;
        (raw, central.mean, variance, order)
    } else {
        run.reject("mixed", "mixed moments need explicit position moments")?;
        let order: usize = run.params.get_or("order", 2)?;
        run.record("order", order);
        let x = run.f64_or("x-mean", 0.0)?;
        let p = run.f64_or("p-mean", 0.0)?;
        let dxx = run.positive("dxx", 1.0)?;
        let dxp = run.f64_or("dxp", 0.0)?;
        let dpp = run.positive("dpp", (ctx.min_casimir() + dxp * dxp) / dxx)?;
        let state = SecondOrderState::new(x, p, dxx, dxp, dpp);
        to_canonical(&state, &ctx)?;
        let raw = if order <= 2 {
            RawMomentSequence::from_second_order(&state, order)?
        } else {
            gaussian_moment_sequence(&state, order)?
        };
        (raw, x, dxx, order)
    };
    let center = run.f64_or("center", mean)?;
    let alpha = run.positive("alpha", (2.0 * variance).sqrt())?;
    let basis = HermiteBasis::new(center, alpha, order)?;
    let state = reconstruct(&raw, &basis, hbar)?;
    for (a, b) in &state.negative_intervals {
        let msg = format!("truncated density is negative on [{a:e}, {b:e}]");
        run.warn(msg);
    }
    let sigma = variance.sqrt();
    let grid = run.grid_or(
        "x-grid",
        Grid {
            start: mean - 6.0 * sigma,
            stop: mean + 6.0 * sigma,
            count: 241,
        },
    )?;
    let xs = grid.points();

    let (rows, failure) = if state.phase_deriv_coeffs.is_some() {
        state.profile_partial(&xs)
    } else {
        run.warn("no mixed moments: phase columns are nan".into());
        let rows = xs
            .iter()
            .map(|&x| ProfileRow {
                x,
                rho: state.density(x),
                dtheta_dx: f64::NAN,
                theta: f64::NAN,
            })
            .collect();
        (rows, None)
    };
    let mut w = run.create("reconstruction.csv")?;
    write_profile_csv(&mut w, &rows)?;
    w.flush()?;
    let plot = Plot {
        title: format!("order {order} reconstruction"),
        x_label: "x".into(),
        y_label: "density".into(),
        series: vec![Series {
            label: "rho".into(),
            points: rows.iter().map(|r| (r.x, r.rho)).collect(),
            dashed: false,
        }],
        ..Default::default()
    };
    run.plot("reconstruction.svg", &plot)?;
    match failure {
        Some(e) => Err(CliError::Numerical(format!(
            "profile stopped after {} of {} points: {e}",
            rows.len(),
            xs.len()
        ))),
        None => Ok(()),
    }
}

fn interferometer(run: &mut Run) -> Result<(), CliError> {
    let units = run.choice("units", &["si", "natural"])?;
    let si = units == "si";
    let ctx = if si {
        HbarContext::si()
    } else {
        HbarContext::natural()
    };
    let mass = run.positive("mass", if si { RB87_MASS } else { 1.0 })?;
    let k = run.f64_or("k", if si { RB87_K } else { 1.0 })?;
    let t_pulses = run.list_or("t-pulse", &[if si { 0.1 } else { 1.0 }])?;
    let g = run.f64_or("g", if si { 9.81 } else { 1.0 })?;
    let gradients = run.list_or("gradient", &[0.0])?;
    let x0 = run.f64_or("x0", 0.0)?;
    let p0 = run.f64_or("p0", 0.0)?;
    let sigma = run.positive("sigma", if si { 1e-6 } else { 1.0 })?;
    let readout = match run.params.raw("readout") {
        None | Some("midpoint") => Readout::Midpoint,
        Some("lower") => Readout::LowerArm,
        Some(v) => Readout::At(
            v.parse()
                .map_err(|_| run.fail("readout", "expected midpoint, lower or a position"))?,
        ),
    };
    run.record("readout", format!("{readout:?}"));
    let initial = CanonicalState::new(x0, p0, sigma, 0.0, ctx.min_casimir());
    let momentum = initial.u_casimir.sqrt() / sigma;
    let span = t_pulses.iter().fold(0.0, |a: f64, b| a.max(*b));
    let integrator = run.integrator(1e-2 * sigma.min(momentum), span)?;

    let mut rows = Vec::new();
    let mut failure = None;
    'outer: for &gradient in &gradients {
        let potential = if gradient == 0.0 {
            PotentialModel::linear(g)
        } else {
            PotentialModel::quadratic(g, gradient)
        };
        for &t_pulse in &t_pulses {
            let cfg = MachZehnderConfig {
                t_pulse,
                hbar_k: ctx.hbar * k,
                mass,
                potential,
                initial,
                readout,
                ctx,
                integrator,
            };
            match mach_zehnder_phase(&cfg) {
                Ok(r) => {
                    if r.flagged {
                        run.warn(format!(
                            "T = {t_pulse}, gradient = {gradient}: arms end {:e} apart, beyond the packet width {:e}",
                            r.separation, r.packet_width
                        ));
                    }
                    rows.push(MzRow::from_report(&cfg, gradient, &r));
                }
                Err(e @ (qfall::Error::InvalidInput(_) | qfall::Error::Config(_)))
                    if rows.is_empty() =>
                {
                    return Err(e.into());
                }
                Err(e) => {
                    failure = Some(format!("T = {t_pulse}, gradient = {gradient}: {e}"));
                    break 'outer;
                }
            }
        }
    }
    let mut w = run.create("mz_phase.csv")?;
    write_mz_csv(&mut w, &rows)?;
    w.flush()?;
    let mut plot = Plot {
        title: "Mach–Zehnder phase".into(),
        x_label: "T".into(),
        y_label: "dtheta".into(),
        ..Default::default()
    };
    for &gradient in &gradients {
        let points = rows
            .iter()
            .filter(|r| r.gradient == gradient)
            .map(|r| (r.t_pulse, r.dtheta))
            .collect();
        plot.series.push(Series {
            label: format!("gradient {gradient:e}"),
            points,
            dashed: false,
        });
    }
    run.plot("mz_phase.svg", &plot)?;
    match failure {
        Some(m) => Err(CliError::Numerical(m)),
        None => Ok(()),
    }
}
