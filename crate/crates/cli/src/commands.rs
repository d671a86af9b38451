//! Validation and execution of the single-run subcommands.

use std::path::Path;

use lattice_decoherence::chain::{self, Boundary, ChainOptions, ChainParams, CoherenceLength};
use lattice_decoherence::estimates;
use lattice_decoherence::export::CsvTable;
use lattice_decoherence::noise::NoiseSpec;
use lattice_decoherence::ode::OdeOptions;
use lattice_decoherence::phonon::{self, CorrelationRule, FitWindow};
use lattice_decoherence::two_level::{self, BlochState, McOptions, TwoLevelParams};
use lattice_decoherence::units::{UnitSystem, K_B, HBAR};
use lattice_decoherence::{Error, MaterialParams};
use num_complex::Complex64;
use serde_json::{json, Value};

use crate::config::{BoundaryArg, ChainArgs, CorrelatorArgs, EstimatesArgs, LengthRule, SpatialArgs, TwoLevelArgs};
use crate::error::CliError;
use crate::quantity::{parse_length, parse_natural_time, parse_time};

/// Files and summary produced by a run, written out by the caller.
#[derive(Debug, Default)]
pub struct Artifacts {
    pub tables: Vec<(String, CsvTable)>,
    pub documents: Vec<(String, Value)>,
    pub summary: Value,
}

pub fn resolve_material(spec: &str) -> Result<MaterialParams, CliError> {
    match MaterialParams::preset(spec) {
        Ok(m) => Ok(m),
        Err(Error::UnknownPreset(_)) if Path::new(spec).is_file() => {
            let text = std::fs::read_to_string(spec)?;
            Ok(MaterialParams::from_json_str(&text)?)
        }
        Err(e) => Err(e.into()),
    }
}

fn positive(field: &str, v: f64) -> Result<f64, CliError> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(CliError::validation(field, format!("must be positive, got {v}")))
    }
}

fn parse_window(text: &str) -> Result<FitWindow, CliError> {
    if text == "all" {
        return Ok(FitWindow::All);
    }
    if let Some(f) = text.strip_prefix("decay:") {
        let f: f64 = f
            .parse()
            .map_err(|_| CliError::validation("fit_window", format!("`{f}` is not a number")))?;
        return Ok(FitWindow::DecayFactor(positive("fit_window", f)?));
    }
    Ok(FitWindow::UpTo(positive("fit_window", parse_time("fit_window", text)?)?))
}

/// Output grid 0, h, 2h, …, t_max with h ≤ dt_out.
fn output_grid(t_max: f64, dt_out: f64) -> Vec<f64> {
    let n = ((t_max / dt_out) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
    (0..=n).map(|i| t_max * i as f64 / n as f64).collect()
}

pub fn correlator(m: &MaterialParams, temperature: f64, a: &CorrelatorArgs) -> Result<Artifacts, CliError> {
    let t_max = positive("t_max", parse_time("t_max", &a.t_max)?)?;
    let window = parse_window(&a.fit_window)?;
    let (curve, peaks, fit) = phonon::correlator_fit(m, temperature, t_max, window)?;

    let mut table = CsvTable::new(["dt_s", "value_m2"]);
    for &(t, v) in &curve.samples {
        table.push(vec![t, v])?;
    }
    let mut env = CsvTable::new(["dt_s", "envelope_m2"]);
    for p in &peaks {
        env.push(vec![p.coordinate, p.value])?;
    }
    let fit_doc = json!({
        "tau_s": fit.tau,
        "amplitude_m2": fit.amplitude,
        "residual": fit.rms_relative_residual,
        "n_peaks": fit.n_peaks_used,
        "window": fit.window,
    });
    Ok(Artifacts {
        tables: vec![("correlator.csv".into(), table), ("peaks.csv".into(), env)],
        documents: vec![("fit.json".into(), fit_doc.clone())],
        summary: json!({ "samples": curve.samples.len(), "peaks_found": peaks.len(), "fit": fit_doc }),
    })
}

pub fn spatial(m: &MaterialParams, temperature: f64, a: &SpatialArgs) -> Result<Artifacts, CliError> {
    if a.n_max == 0 {
        return Err(CliError::validation("n_max", "must be at least 1"));
    }
    let dt = parse_time("dt", &a.dt)?;
    let threshold = a.threshold;
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(CliError::validation("threshold", "must lie in (0, 1)"));
    }
    let rule = match a.rule {
        LengthRule::Envelope => CorrelationRule::Envelope,
        LengthRule::Exact => CorrelationRule::ExactRatio,
    };
    let curve = phonon::spatial_curve(m, temperature, a.n_max, dt)?;
    // the closed form is equal-time and needs k_BT ≥ ħω_D
    let with_high_t = dt == 0.0 && K_B * temperature >= HBAR * m.debye_frequency();
    let mut table = if with_high_t {
        CsvTable::new(["n", "value_m2", "high_t_m2"])
    } else {
        CsvTable::new(["n", "value_m2"])
    };
    for &(n, v) in &curve.samples {
        let mut row = vec![n, v];
        if with_high_t {
            row.push(phonon::spatial_correlator_high_t(m, temperature, n as u32)?);
        }
        table.push(row)?;
    }
    let cl = phonon::lattice_correlation_length_with(m, threshold, rule)?;
    Ok(Artifacts {
        tables: vec![("spatial.csv".into(), table)],
        documents: vec![],
        summary: json!({
            "dt_s": dt,
            "n_max": a.n_max,
            "correlation_length": {
                "sites": cl.sites,
                "length_m": cl.length,
                "threshold": cl.threshold,
                "rule": cl.rule,
            },
        }),
    })
}

pub fn twolevel(seed: u64, a: &TwoLevelArgs) -> Result<Artifacts, CliError> {
    let units = UnitSystem::natural(a.reference_energy_ev)?;
    let t_max = positive("t_max", parse_natural_time("t_max", &a.t_max, &units)?)?;
    let dt_out = positive("dt_out", parse_natural_time("dt_out", &a.dt_out, &units)?)?;
    let dt_max = positive("dt_max", parse_natural_time("dt_max", &a.dt_max, &units)?)?;
    let tau_c = parse_natural_time("correlation_time", &a.correlation_time, &units)?;
    let p = TwoLevelParams::new(a.epsilon, a.alpha, a.beta0)?;
    let noise = NoiseSpec::colored(a.beta0, tau_c, seed)?;
    let ode_opts = OdeOptions {
        rel_tol: positive("rel_tol", a.rel_tol)?,
        abs_tol: positive("abs_tol", a.abs_tol)?,
        ..OdeOptions::default()
    };
    let grid = output_grid(t_max, dt_out);
    let s0 = BlochState::site_one();

    let ode = two_level::integrate_master_with(&p, &s0, &grid, &ode_opts)?;
    let unit_note = format!("time unit: hbar / ({} eV)", a.reference_energy_ev);
    let mut ode_table = CsvTable::new(["t", "rho", "rho1", "rho2"]);
    ode_table.comment(unit_note.clone());
    for (t, s) in grid.iter().zip(&ode) {
        ode_table.push(vec![*t, s.rho, s.rho1, s.rho2])?;
    }
    let rates: Vec<Value> = two_level::decay_rates(&p)
        .iter()
        .map(|z| json!({ "re": z.re, "im": z.im }))
        .collect();
    let audit = two_level::audit_analytic_offdiagonal(&p, &BlochState::new(0.4, 0.3, 0.0)?, &grid)?;
    let mut summary = json!({
        "params": p,
        "decay_rates": rates,
        "closed_form_audit": {
            "initial": audit.initial,
            "omega_squared": audit.omega_squared,
            "max_abs_diff": audit.max_abs_diff,
            "printed_max_abs": audit.printed_max_abs,
            "ode_max_abs": audit.ode_max_abs,
            "agrees": audit.agrees,
        },
    });
    let mut tables = vec![("twolevel_ode.csv".to_string(), ode_table)];

    if a.n_traj > 0 {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let mc = two_level::mc_evolve(&p, &noise, [one, zero], &grid, a.n_traj, &McOptions { dt_max })?;
        let mut t = CsvTable::new(["t", "rho", "rho1", "rho2", "stderr_rho", "stderr_rho1", "stderr_rho2"]);
        t.comment(unit_note);
        let mut worst: f64 = 0.0;
        let mut within = true;
        for ((time, b), (se, o)) in grid.iter().zip(&mc.bloch).zip(mc.stderr.iter().zip(&ode)) {
            t.push(vec![*time, b.rho, b.rho1, b.rho2, se[0], se[1], se[2]])?;
            let (m, o) = (b.to_array(), o.to_array());
            for j in 0..3 {
                let d = (m[j] - o[j]).abs();
                worst = worst.max(d);
                within &= d <= (3.0 * se[j]).max(0.02);
            }
        }
        tables.push(("twolevel_mc.csv".into(), t));
        summary["monte_carlo"] = json!({
            "n_traj": mc.n_traj,
            "steps": mc.steps,
            "max_norm_drift": mc.max_norm_drift,
            "sup_deviation_from_ode": worst,
            "within_3se_or_0_02": within,
            "correlation_time": tau_c,
        });
    }
    Ok(Artifacts {
        tables,
        documents: vec![],
        summary,
    })
}

pub fn chain(seed: u64, a: &ChainArgs) -> Result<Artifacts, CliError> {
    let units = UnitSystem::natural(a.reference_energy_ev)?;
    let t_max = positive("t_max", parse_natural_time("t_max", &a.t_max, &units)?)?;
    let dt_out = positive("dt_out", parse_natural_time("dt_out", &a.dt_out, &units)?)?;
    let dt_max = positive("dt_max", parse_natural_time("dt_max", &a.dt_max, &units)?)?;
    let boundary = match a.boundary {
        BoundaryArg::Open => Boundary::Open,
        BoundaryArg::Periodic => Boundary::Periodic,
    };
    let p = ChainParams::uniform(a.n_sites, a.alpha, a.beta0, boundary)?;
    let start = a.start_site.unwrap_or(a.n_sites / 2);
    if start >= a.n_sites {
        return Err(CliError::validation("start_site", format!("must be below n_sites = {}", a.n_sites)));
    }
    if !(a.threshold > 0.0 && a.threshold < 1.0) {
        return Err(CliError::validation("threshold", "must lie in (0, 1)"));
    }
    let grid = output_grid(t_max, dt_out);
    let opts = ChainOptions {
        dt_max,
        budget: positive("budget", a.budget)?,
    };
    let r = chain::chain_evolve(&p, seed, &chain::site_state(a.n_sites, start), &grid, a.n_traj, &opts)?;

    let unit_note = format!("time unit: hbar / ({} eV)", a.reference_energy_ev);
    let mut spread = CsvTable::new(["t", "mean", "variance", "participation"]);
    spread.comment(unit_note);
    for o in &r.observables {
        spread.push(vec![o.time, o.position_mean, o.position_variance, o.participation_ratio])?;
    }
    let profile = r.final_coherence_profile();
    let mut coherence = CsvTable::new(["k", "coherence"]);
    coherence.comment(format!("t = {t_max}"));
    for (k, v) in profile.iter().enumerate() {
        coherence.push(vec![k as f64, *v])?;
    }
    let length = match chain::coherence_length(profile, a.threshold) {
        Ok(CoherenceLength::Separation(k)) => json!(k),
        Ok(CoherenceLength::BeyondRange) => json!("beyond_range"),
        Err(Error::UndefinedLength) => json!("undefined"),
        Err(e) => return Err(e.into()),
    };
    let last = r.observables.last().expect("non-empty grid");
    Ok(Artifacts {
        tables: vec![("chain_spread.csv".into(), spread), ("chain_coherence.csv".into(), coherence)],
        documents: vec![],
        summary: json!({
            "params": p,
            "start_site": start,
            "n_traj": r.n_traj,
            "steps": r.steps,
            "final_variance": last.position_variance,
            "final_participation": last.participation_ratio,
            "coherence_length": length,
            "threshold": a.threshold,
            "max_norm_drift": r.max_norm_drift,
            "boundary_warning": r.boundary_warning,
        }),
    })
}

pub fn estimates(m: &MaterialParams, temperature: f64, a: &EstimatesArgs) -> Result<Artifacts, CliError> {
    let mut m = m.clone();
    if let Some(e) = a.fermi_energy_ev {
        m = m.with_fermi_energy_ev(e)?;
    }
    if let Some(e) = a.hop_energy_ev {
        m = m.with_tunneling_energy_ev(e)?;
    }
    let dx = match &a.delta_x {
        Some(text) => positive("delta_x", parse_length("delta_x", text)?)?,
        None => m.lattice_constant(),
    };
    let report = estimates::timescale_report_with(&m, temperature, dx)?;
    let doc = serde_json::to_value(&report).expect("report serializes");
    Ok(Artifacts {
        tables: vec![],
        documents: vec![("estimates.json".into(), doc.clone())],
        summary: doc,
    })
}
