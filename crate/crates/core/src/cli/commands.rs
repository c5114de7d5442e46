use std::collections::BTreeMap;
use std::f64::consts::PI;

use rayon::prelude::*;
use serde_json::{json, Map, Value};

use super::output::Report;
use super::{BerryArgs, ChernArgs, DriveArgs, EvolveArgs, MethodArg, PhaseDiagramArgs, SpectrumArgs};
use crate::error::{Error, Result};
use crate::evolution::{extract_phases, period, propagator_exact, propagator_rk4};
use crate::geometry::{
    aa_phase_closed, aa_phase_from_state, berry_phase_closed, berry_phases_wilson, chern_closed,
    chern_lattice, PhaseValue, WilsonOptions, MIN_GRID, MIN_WILSON_STEPS,
};
use crate::phasescan::{scan_diagram, Axis, Method, PhaseClass};
use crate::qmodel::{DriveConfig, StateLabel};
use crate::spectra::{closed_form_energy, eigensystem, labeled_spectrum_by_sector, regime_hamiltonian, Regime};

const MAX_LISTED_FAILURES: usize = 16;

fn num(x: f64) -> Value {
    Value::from(x)
}

fn error_record(e: &Error) -> Value {
    json!({ "kind": e.kind(), "message": e.to_string() })
}

fn regime_name(r: Regime) -> &'static str {
    match r {
        Regime::Adiabatic => "adiabatic",
        Regime::Nonadiabatic => "nonadiabatic",
    }
}

fn echo_drive(report: &mut Report, d: &DriveArgs) {
    report.param("b", d.b);
    report.param("t_lr", d.t_lr);
    report.param("phi", d.phi);
    report.param("omega", d.omega);
}

fn config(d: &DriveArgs, theta: f64, t_lr: f64) -> Result<DriveConfig<f64>> {
    DriveConfig::with_phase_difference(d.b, theta, d.phi, d.omega, t_lr)
}

/// `n` samples of `[0, π]`, both ends included.
fn theta_samples(n: usize) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(Error::invalid("theta_steps", "need at least 2 samples"));
    }
    Ok((0..n).map(|j| PI * j as f64 / (n - 1) as f64).collect())
}

fn label_columns(suffixes: &[&str]) -> Vec<String> {
    StateLabel::ALL
        .iter()
        .flat_map(|l| suffixes.iter().map(move |s| format!("{l}{s}")))
        .collect()
}

fn tally(counts: &mut BTreeMap<&'static str, u64>, e: &Error) {
    *counts.entry(e.kind()).or_default() += 1;
}

fn counts_value(counts: BTreeMap<&'static str, u64>) -> Value {
    Value::Object(counts.into_iter().map(|(k, v)| (k.to_owned(), Value::from(v))).collect())
}

pub fn spectrum(a: &SpectrumArgs) -> Result<Report> {
    let regime: Regime = a.regime.into();
    let thetas = match a.theta {
        Some(t) => vec![t],
        None => theta_samples(a.theta_steps)?,
    };
    let cfgs = thetas
        .iter()
        .map(|&t| config(&a.drive, t, a.drive.t_lr))
        .collect::<Result<Vec<_>>>()?;

    let mut report = Report::new("spectrum");
    echo_drive(&mut report, &a.drive);
    report.param("regime", regime_name(regime));
    report.param("theta", a.theta.map_or(Value::Null, num));
    report.param("theta_steps", thetas.len());
    report.columns = ["theta", "e0", "e1", "e2", "e3"].map(String::from).to_vec();
    report.columns.extend(label_columns(&[""]));
    report.columns.extend(label_columns(&["_closed"]));

    let mut failures = BTreeMap::new();
    let mut max_dev = 0.0f64;
    let mut max_sorted_dev = 0.0f64;
    let mut closed_error = None;
    for cfg in &cfgs {
        let es = eigensystem(&regime_hamiltonian(cfg, 0.0, regime))?;
        let closed = StateLabel::try_map(|l| closed_form_energy(cfg, l, regime));
        let labelled = labeled_spectrum_by_sector(cfg, 0.0, regime);
        let mut row = vec![num(cfg.theta())];
        row.extend(es.values.map(num));
        match &labelled {
            Ok(ls) => row.extend(ls.energies.map(num)),
            Err(e) => {
                tally(&mut failures, e);
                row.extend([Value::Null, Value::Null, Value::Null, Value::Null]);
            }
        }
        match &closed {
            Ok(c) => {
                row.extend(c.map(num));
                if let Ok(ls) = &labelled {
                    for (x, y) in ls.energies.iter().zip(c) {
                        max_dev = max_dev.max((x - y).abs());
                    }
                }
                let mut sorted = *c;
                sorted.sort_by(f64::total_cmp);
                for (x, y) in es.values.iter().zip(&sorted) {
                    max_sorted_dev = max_sorted_dev.max((x - y).abs());
                }
            }
            Err(e) => {
                closed_error.get_or_insert_with(|| error_record(e));
                row.extend([Value::Null, Value::Null, Value::Null, Value::Null]);
            }
        }
        report.rows.push(row);
    }
    report.diagnostic("max_labelled_deviation", max_dev);
    report.diagnostic("max_sorted_deviation", max_sorted_dev);
    report.diagnostic("unlabelled_rows", failures.values().sum::<u64>());
    report.diagnostic("labelling_failures", counts_value(failures));
    report.diagnostic("closed_form_error", closed_error.unwrap_or(Value::Null));
    Ok(report)
}

pub fn berry(a: &BerryArgs) -> Result<Report> {
    let regime: Regime = a.regime.into();
    if a.wilson_steps < MIN_WILSON_STEPS {
        return Err(Error::invalid("wilson_steps", format!("need at least {MIN_WILSON_STEPS}")));
    }
    let lambdas = if a.lambda.is_empty() {
        vec![2.0 * a.drive.t_lr / a.drive.b]
    } else {
        a.lambda.clone()
    };
    let thetas = theta_samples(a.theta_steps)?;
    let mut points = Vec::with_capacity(lambdas.len() * thetas.len());
    for &lambda in &lambdas {
        let t_lr = lambda * a.drive.b / 2.0;
        for &theta in &thetas {
            points.push((lambda, config(&a.drive, theta, t_lr)?));
        }
    }
    points[0].1.branch()?;

    let opts = WilsonOptions { n_steps: a.wilson_steps };
    let numeric_suffix = match regime {
        Regime::Adiabatic => "_wilson",
        Regime::Nonadiabatic => "_state",
    };
    let evaluated: Vec<(Vec<Value>, f64, Vec<Error>)> = points
        .par_iter()
        .map(|(lambda, cfg)| {
            let theta = cfg.theta();
            let mut errors = Vec::new();
            let numeric: [Option<PhaseValue<f64>>; 4] = match regime {
                Regime::Adiabatic => match berry_phases_wilson(cfg, theta, opts) {
                    Ok(g) => g.map(Some),
                    Err(e) => {
                        errors.push(e);
                        [None; 4]
                    }
                },
                Regime::Nonadiabatic => StateLabel::ALL.map(|l| aa_phase_from_state(cfg, l).map_err(|e| errors.push(e)).ok()),
            };
            let closed = StateLabel::ALL.map(|l| {
                let r = match regime {
                    Regime::Adiabatic => berry_phase_closed(cfg, theta, l),
                    Regime::Nonadiabatic => aa_phase_closed(cfg, l),
                };
                r.map_err(|e| errors.push(e)).ok()
            });
            let mut row = vec![num(*lambda), num(theta)];
            let mut worst = 0.0f64;
            for (n, c) in numeric.iter().zip(&closed) {
                let diff = match (n, c) {
                    (Some(n), Some(c)) => {
                        let d = n.circular_distance(*c);
                        worst = worst.max(d);
                        num(d)
                    }
                    _ => Value::Null,
                };
                row.push(n.map_or(Value::Null, |p| num(p.value())));
                row.push(c.map_or(Value::Null, |p| num(p.value())));
                row.push(diff);
            }
            (row, worst, errors)
        })
        .collect();

    let mut report = Report::new("berry");
    echo_drive(&mut report, &a.drive);
    report.param("regime", regime_name(regime));
    report.param("lambda", lambdas.iter().copied().map(num).collect::<Vec<_>>());
    report.param("theta_steps", a.theta_steps);
    report.param("wilson_steps", a.wilson_steps);
    report.columns = vec!["lambda".into(), "theta".into()];
    report.columns.extend(label_columns(&[numeric_suffix, "_closed", "_diff"]));

    let mut max_diff = 0.0f64;
    let mut failed = 0u64;
    let mut listed = Vec::new();
    for ((row, worst, errors), (lambda, cfg)) in evaluated.into_iter().zip(&points) {
        max_diff = max_diff.max(worst);
        if let Some(e) = errors.first() {
            failed += 1;
            if listed.len() < MAX_LISTED_FAILURES {
                listed.push(json!({ "lambda": lambda, "theta": cfg.theta(), "error": error_record(e) }));
            }
        }
        report.rows.push(row);
    }
    report.diagnostic("max_diff", max_diff);
    report.diagnostic("failed_points", failed);
    report.diagnostic("failures", listed);
    Ok(report)
}

fn chern_map(c1: [i32; 4]) -> Value {
    let mut m = Map::new();
    for l in StateLabel::ALL {
        m.insert(l.to_string(), Value::from(c1[l.index()]));
    }
    Value::Object(m)
}

pub fn chern(a: &ChernArgs) -> Result<Report> {
    let regime: Regime = a.regime.into();
    if a.resolution < MIN_GRID {
        return Err(Error::invalid("resolution", format!("need at least {MIN_GRID}")));
    }
    let cfg = config(&a.drive, 0.0, a.drive.t_lr)?;
    cfg.branch()?;
    let lattice = chern_lattice(&cfg, a.resolution, a.resolution, regime);
    let closed = StateLabel::try_map(|l| chern_closed(&cfg, l, regime));
    if let (Err(e), Err(_)) = (&lattice, &closed) {
        return Err(e.clone());
    }

    let mut report = Report::new("chern");
    echo_drive(&mut report, &a.drive);
    report.param("regime", regime_name(regime));
    report.param("resolution", a.resolution);
    report.columns = ["label", "lattice", "closed"].map(String::from).to_vec();
    for l in StateLabel::ALL {
        report.rows.push(vec![
            Value::from(l.to_string()),
            lattice.as_ref().map_or(Value::Null, |r| Value::from(r.get(l))),
            closed.as_ref().map_or(Value::Null, |c| Value::from(c[l.index()])),
        ]);
    }
    let class = |c1: [i32; 4]| PhaseClass::from_chern(c1).map_or(Value::Null, |c| Value::from(c.to_string()));
    report.summarize("lattice", lattice.as_ref().map_or(Value::Null, |r| chern_map(r.c1)));
    report.summarize("closed", closed.as_ref().map_or(Value::Null, |c| chern_map(*c)));
    report.summarize("class_lattice", lattice.as_ref().map_or(Value::Null, |r| class(r.c1)));
    report.summarize("class_closed", closed.as_ref().map_or(Value::Null, |c| class(*c)));
    match &lattice {
        Ok(r) => {
            report.diagnostic("min_gap", r.min_gap);
            report.diagnostic("max_residual", r.max_residual);
            report.diagnostic("band_sum", r.band_sum());
            report.diagnostic("lattice_error", Value::Null);
        }
        Err(e) => {
            report.diagnostic("min_gap", Value::Null);
            report.diagnostic("max_residual", Value::Null);
            report.diagnostic("band_sum", Value::Null);
            report.diagnostic("lattice_error", error_record(e));
        }
    }
    report.diagnostic("closed_error", closed.as_ref().err().map_or(Value::Null, error_record));
    Ok(report)
}

pub fn evolve(a: &EvolveArgs) -> Result<Report> {
    let cfg = config(&a.drive, a.theta, a.drive.t_lr)?;
    let t = period(&cfg)?;
    cfg.branch()?;
    let labels = match a.label {
        Some(l) => vec![l],
        None => StateLabel::ALL.to_vec(),
    };
    let rk4 = propagator_rk4(&cfg, t, a.rk4_steps)?;
    let exact = propagator_exact(&cfg, t)?;

    let mut report = Report::new("evolve");
    echo_drive(&mut report, &a.drive);
    report.param("theta", a.theta);
    report.param("label", a.label.map_or(Value::Null, |l| Value::from(l.to_string())));
    report.param("rk4_steps", a.rk4_steps);
    report.columns = [
        "label",
        "total",
        "dynamical",
        "geometric",
        "aa_closed",
        "lift_offset",
        "quasienergy",
        "sz_expectation",
        "dynamical_integral",
        "dynamical_quadrature",
        "cyclic_overlap",
        "floquet_residual",
        "quasienergy_mismatch",
    ]
    .map(String::from)
    .to_vec();

    let mut first_error = None;
    let mut failures = Vec::new();
    for l in &labels {
        match extract_phases(&cfg, *l) {
            Ok(p) => report.rows.push(vec![
                Value::from(l.to_string()),
                num(p.total.value()),
                num(p.dynamical.value()),
                num(p.geometric.value()),
                num(p.aa_closed.value()),
                num(p.lift_offset.value()),
                num(p.quasienergy),
                num(p.sz_expectation),
                num(p.dynamical_integral),
                num(p.dynamical_quadrature),
                num(p.cyclic_overlap),
                num(p.floquet_residual),
                num(p.quasienergy_mismatch),
            ]),
            Err(e) => {
                failures.push(json!({ "label": l.to_string(), "error": error_record(&e) }));
                first_error.get_or_insert(e);
            }
        }
    }
    if report.rows.is_empty() {
        return Err(first_error.expect("at least one label was attempted"));
    }
    report.summarize("period", t);
    report.diagnostic("exact_unitarity_deviation", exact.unitarity_deviation());
    report.diagnostic("rk4_max_deviation", rk4.operator.max_abs_diff(&exact));
    report.diagnostic("rk4_correction_norm", rk4.correction_norm);
    report.diagnostic("failures", failures);
    Ok(report)
}

pub fn phase_diagram(a: &PhaseDiagramArgs) -> Result<Report> {
    let method = match a.method {
        MethodArg::Closed => Method::Closed,
        MethodArg::Lattice => Method::Lattice {
            resolution: a.resolution,
        },
    };
    let cells = scan_diagram(
        Axis::new(a.b_min, a.b_max, a.n_b),
        Axis::new(a.omega_min, a.omega_max, a.n_omega),
        a.t_lr,
        a.phi,
        method,
    )?;

    let mut report = Report::new("phase-diagram");
    report.param("t_lr", a.t_lr);
    report.param("phi", a.phi);
    report.param("b_min", a.b_min);
    report.param("b_max", a.b_max);
    report.param("omega_min", a.omega_min);
    report.param("omega_max", a.omega_max);
    report.param("n_b", a.n_b);
    report.param("n_omega", a.n_omega);
    report.param("method", method.name());
    report.param("resolution", matches!(method, Method::Lattice { .. }).then_some(a.resolution));
    report.columns = ["b", "omega", "class", "c_plus", "c_minus", "error", "boundary_distance"]
        .map(String::from)
        .to_vec();

    let mut counts: BTreeMap<String, u64> = BTreeMap::new();
    for cell in &cells {
        let (class, c_plus, c_minus, error) = match &cell.class {
            Ok(c) => {
                *counts.entry(c.to_string()).or_default() += 1;
                (Value::from(c.to_string()), Value::from(c.c_plus), Value::from(c.c_minus), Value::Null)
            }
            Err(e) => {
                *counts.entry(e.kind().to_owned()).or_default() += 1;
                (Value::Null, Value::Null, Value::Null, Value::from(e.kind()))
            }
        };
        report.rows.push(vec![num(cell.b), num(cell.omega), class, c_plus, c_minus, error, num(cell.boundary_distance)]);
    }
    for c in [PhaseClass::TRIVIAL, PhaseClass::FULL, PhaseClass::MINUS_ONLY, PhaseClass::PLUS_ONLY] {
        counts.entry(c.to_string()).or_default();
    }
    report.summarize("counts", Value::Object(counts.into_iter().map(|(k, v)| (k, Value::from(v))).collect()));
    report.diagnostic("cells", cells.len());
    report.diagnostic("layout", "row-major: rows advance omega, columns advance b");
    Ok(report)
}
