//! The five experiment drivers.

use std::collections::BTreeMap;

use isomono_core::connection::characteristic_value;
use isomono_core::hitchin::{gaudin_hamiltonian, gaudin_run};
use isomono_core::isoflow::{isomonodromy_audit_with, AuditOptions, FieldSign, FlowOptions};
use isomono_core::monodromy::{big_loop_transport, default_base_point, monodromy_rep, MonodromyReport};
use isomono_core::sampling::{
    random_autonomous_state, random_flow_experiment, random_probes, random_schlesinger_state, SchlesingerSampleSpec,
};
use isomono_core::wstructures::{
    flatness_residual, identity_sweep, pole_metadata_residual, w2_residual_jet, w2n_curvature_blocks, w2n_ward_residual,
    w3_reduced_residuals, w3_structure_residuals, w3n_curvature_blocks, w3n_row3_residuals, MatrixBiJet, SweepOptions,
    WFieldSample,
};
use isomono_core::{spectral_curve, AutonomousState, Error, FuchsianConnection, SchlesingerState, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::config::{CommandName, ExperimentConfig};
use crate::report::{Check, Outcome, Table};

/// Why a command did not produce an outcome.
#[derive(Debug)]
pub enum Failure {
    /// The configuration describes an invalid system.
    Config(String),
    /// The computation itself broke down.
    Numerical(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::DimensionMismatch { .. }
            | Error::InvalidArgument(_)
            | Error::SpectrumNotTraceless(_)
            | Error::DegenerateSpectrum
            | Error::CoincidentPoints { .. }
            | Error::IndexOutOfRange { .. }
            | Error::Truncation { .. }
            | Error::JetMismatch => Failure::Config(e.to_string()),
            other => Failure::Numerical(other),
        }
    }
}

type Run = Result<Outcome, Failure>;

fn object(v: &impl Serialize) -> Map<String, Value> {
    match serde_json::to_value(v).expect("reports serialize") {
        Value::Object(m) => m,
        other => {
            let mut m = Map::new();
            m.insert("value".into(), other);
            m
        }
    }
}

fn pair(c: C64) -> Value {
    Value::from(vec![c.re, c.im])
}

fn seed(cfg: &ExperimentConfig) -> u64 {
    cfg.seed.expect("validated: seed present when randomness is used")
}

pub fn run(command: CommandName, cfg: &ExperimentConfig) -> Run {
    match command {
        CommandName::SchlesingerAudit => schlesinger_audit(cfg),
        CommandName::GaudinRun => gaudin(cfg),
        CommandName::Monodromy => monodromy(cfg),
        CommandName::SpectralCurve => curve(cfg),
        CommandName::Wcheck => wcheck(cfg),
    }
}

fn connection(cfg: &ExperimentConfig) -> Result<FuchsianConnection, Failure> {
    match (&cfg.connection, &cfg.random) {
        (Some(c), _) => Ok(c.clone()),
        (None, Some(r)) => Ok(random_schlesinger_state(&SchlesingerSampleSpec::new(r.points, r.dim), seed(cfg)).connection()?),
        (None, None) => Err(Failure::Config("missing connection".into())),
    }
}

fn check_direction(direction: usize, n: usize) -> Result<(), Failure> {
    if direction >= n {
        return Err(Failure::Config(format!(
            "field `flow.direction`: {direction} out of range for {n} marked points"
        )));
    }
    Ok(())
}

fn schlesinger_audit(cfg: &ExperimentConfig) -> Run {
    let (state, direction, t_end, sign, trivial) = match (&cfg.connection, &cfg.random) {
        (Some(conn), _) => {
            let f = cfg.flow.expect("validated: flow present with a connection");
            (SchlesingerState::from_connection(conn), f.direction, f.t_end, f.sign, conn.trivial_at_infinity())
        }
        (None, Some(r)) => {
            let e = random_flow_experiment(&SchlesingerSampleSpec::new(r.points, r.dim), r.t_abs, seed(cfg));
            let (d, t, s) = cfg.flow.map_or((e.direction, e.t_end, FieldSign::Correct), |f| (f.direction, f.t_end, f.sign));
            (e.state, d, t, s, true)
        }
        (None, None) => return Err(Failure::Config("missing connection".into())),
    };
    check_direction(direction, state.len())?;
    let opts = AuditOptions {
        ode_tol: cfg.integrator.ode_tol,
        transport_tol: cfg.integrator.ode_tol.clamp(1e-13, 1e-6),
        max_steps: cfg.integrator.max_steps,
        sign,
        max_word_len: 2,
    };
    let report = isomonodromy_audit_with(&state, direction, t_end, &opts)?;
    let th = &cfg.thresholds;
    let mut checks = vec![
        Check::below("invariant_drift", report.invariant_drift, th.invariant_drift),
        Check::below("eigen_drift", report.eigen_drift, th.eigen_drift),
        Check::below("sum_p_drift", report.sum_p_drift, th.sum_p_drift),
    ];
    if trivial {
        checks.push(Check::below("product_defect", report.product_defect, th.product_defect));
    }
    let series = &report.series;
    let table = cfg.csv.then(|| {
        let mut header = vec!["t_re".to_string(), "t_im".to_string()];
        for w in &series.words {
            header.push(format!("{w}_re"));
            header.push(format!("{w}_im"));
        }
        header.extend((1..=state.len()).map(|a| format!("eig_drift_p{a}")));
        let rows = (0..series.times.len())
            .map(|k| {
                let mut row = vec![series.times[k].re, series.times[k].im];
                row.extend(series.values[k].iter().flatten());
                row.extend(&series.eigen_drifts[k]);
                row
            })
            .collect();
        Table { header, rows }
    });
    let mut result = object(&report);
    result.remove("series");
    result.insert("sign".into(), serde_json::to_value(sign).expect("enum serializes"));
    result.insert("initial_state".into(), serde_json::to_value(&state).expect("state serializes"));
    Ok(Outcome { result, checks, table })
}

fn gaudin(cfg: &ExperimentConfig) -> Run {
    let state = match (&cfg.connection, &cfg.random) {
        (Some(c), _) => AutonomousState::new(c.points().to_vec(), c.residues().to_vec())?,
        (None, Some(r)) => random_autonomous_state(r.points, r.dim, seed(cfg)),
        (None, None) => return Err(Failure::Config("missing connection".into())),
    };
    let (direction, t_end, sign) = cfg.flow.map_or((0, C64::new(1.0, 0.0), FieldSign::Correct), |f| (f.direction, f.t_end, f.sign));
    check_direction(direction, state.len())?;
    let opts = FlowOptions {
        tol: cfg.integrator.ode_tol,
        max_steps: cfg.integrator.max_steps,
        sign,
    };
    let (trajectory, report) = gaudin_run(&state, direction, t_end, &opts)?;
    let th = &cfg.thresholds;
    let checks = vec![
        Check::below("spectral_drift", report.spectral_drift, th.spectral_drift),
        Check::below("bracket_max", report.bracket_max, th.bracket_max),
        Check::below("eigen_drift", report.eigen_drift, th.eigen_drift),
    ];
    let n = state.len();
    let table = if cfg.csv {
        let mut header = vec!["t_re".to_string(), "t_im".to_string()];
        for b in 1..=n {
            header.push(format!("H{b}_re"));
            header.push(format!("H{b}_im"));
        }
        header.extend((1..=n).map(|a| format!("eig_drift_p{a}")));
        let mut rows = Vec::with_capacity(trajectory.samples.len());
        for s in &trajectory.samples {
            let mut row = vec![s.t.re, s.t.im];
            for b in 0..n {
                let h = gaudin_hamiltonian(&s.state, b)?;
                row.extend([h.re, h.im]);
            }
            row.extend(s.state.residues.iter().map(|r| r.spectrum_drift()));
            rows.push(row);
        }
        Some(Table { header, rows })
    } else {
        None
    };
    let mut result = object(&report);
    result.insert("direction".into(), Value::from(direction));
    result.insert("t_end".into(), pair(t_end));
    result.insert("initial_state".into(), serde_json::to_value(&state).expect("state serializes"));
    Ok(Outcome { result, checks, table })
}

fn monodromy(cfg: &ExperimentConfig) -> Run {
    let conn = connection(cfg)?;
    let base = cfg.monodromy.base.unwrap_or_else(|| default_base_point(conn.points()));
    let tol = cfg.integrator.ode_tol.clamp(1e-13, 1e-6);
    let rep = monodromy_rep(&conn, base, tol)?;
    let report = MonodromyReport::new(&rep, cfg.monodromy.max_word_len.unwrap_or(2))?;
    let th = &cfg.thresholds;
    let mut checks = Vec::new();
    let mut result = object(&report);
    result.insert("order".into(), serde_json::to_value(&rep.order).expect("serializes"));
    result.insert("det_defect".into(), Value::from(rep.tolerance));
    result.insert("matrices".into(), serde_json::to_value(&rep.matrices).expect("serializes"));
    if let Some(defect) = rep.product_defect {
        checks.push(Check::below("product_defect", defect, th.product_defect));
        let big = big_loop_transport(&conn, base, tol)?;
        let distance = (&big - &rep.ordered_product()).norm();
        checks.push(Check::below("big_loop", distance, th.big_loop));
        result.insert("big_loop_distance".into(), Value::from(distance));
    }
    Ok(Outcome {
        result,
        checks,
        table: None,
    })
}

fn curve(cfg: &ExperimentConfig) -> Run {
    let conn = connection(cfg)?;
    let data = spectral_curve(&conn);
    let mut rng = ChaCha8Rng::seed_from_u64(seed(cfg));
    let probes = random_probes(conn.points(), cfg.spectral.probes, &mut rng);
    let mut residual: f64 = 0.0;
    for z in probes {
        let lambda = C64::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
        let direct = characteristic_value(&conn, lambda, z)?;
        residual = residual.max((data.evaluate(lambda, z) - direct).norm() / direct.norm().max(1.0));
    }
    let mut result = object(&data);
    result.insert("curve_residual".into(), Value::from(residual));
    result.insert("probes".into(), Value::from(cfg.spectral.probes));
    Ok(Outcome {
        result,
        checks: vec![Check::below("curve_residual", residual, cfg.thresholds.curve_residual)],
        table: None,
    })
}

fn sample_residuals(s: &WFieldSample) -> Result<BTreeMap<&'static str, f64>, Error> {
    let mut m = BTreeMap::new();
    let rows = |blocks: &[&[MatrixBiJet]]| -> Result<f64, Error> {
        blocks.iter().flat_map(|r| r.iter()).try_fold(0.0_f64, |acc, b| Ok(acc.max(b.max_valid_abs()?)))
    };
    match (s.level(), s.is_gauged()) {
        (2, false) => {
            m.insert("projective", w2_residual_jet(s)?.max_valid_abs()?);
        }
        (2, true) => {
            let b = w2n_curvature_blocks(s)?;
            m.insert("structural_rows", rows(&[&b[0]])?);
            m.insert("ward_block", b[1][0].max_valid_abs()?);
            m.insert("ward_displayed", w2n_ward_residual(s)?.max_valid_abs()?);
            m.insert("flatness", flatness_residual(s)?.max_valid_abs()?);
        }
        (3, false) => {
            let shown = w3_structure_residuals(s)?;
            let reduced = w3_reduced_residuals(s)?;
            m.insert("t_equation_displayed", shown.t_equation.norm());
            m.insert("w_equation_displayed", shown.w_equation.norm());
            m.insert("t_equation_reduced", reduced.t_equation.norm());
            m.insert("w_equation_reduced", reduced.w_equation.norm());
        }
        _ => {
            let b = w3n_curvature_blocks(s)?;
            m.insert("structural_rows", rows(&[&b[0], &b[1]])?);
            let [r1, r2, r3] = w3n_row3_residuals(s)?;
            m.insert("w_identity", r1.max_valid_abs()?);
            m.insert("t_identity", r2.max_valid_abs()?);
            m.insert("flatness", r3.max_valid_abs()?);
        }
    }
    Ok(m)
}

fn wcheck(cfg: &ExperimentConfig) -> Run {
    let w = cfg.wcheck.as_ref().expect("validated: wcheck section present");
    let th = &cfg.thresholds;
    let mut checks = Vec::new();
    let mut result = Map::new();
    if w.samples > 0 || w.maps > 0 {
        let opts = SweepOptions {
            seed: seed(cfg),
            samples: w.samples,
            dims: w.dims.clone(),
            maps: w.maps,
            order_z: w.order_z,
            order_zbar: w.order_zbar,
        };
        let sweep = identity_sweep(&opts)?;
        if w.samples > 0 {
            checks.push(Check::below("structural", sweep.structural(), th.structural));
            checks.push(Check::below("reduction", sweep.reduction(), th.reduction));
        }
        if w.maps > 0 {
            checks.push(Check::below("from_map", sweep.from_map, th.from_map));
        }
        result.insert("sweep".into(), Value::Object(object(&sweep)));
    }
    if !w.samples_explicit.is_empty() {
        let mut all = Vec::new();
        let mut structural: Option<f64> = None;
        for s in &w.samples_explicit {
            let m = sample_residuals(s)?;
            if let Some(v) = m.get("structural_rows") {
                structural = Some(structural.unwrap_or(0.0).max(*v));
            }
            all.push(m);
        }
        if let Some(v) = structural {
            checks.push(Check::below("explicit_structural", v, th.structural));
        }
        result.insert("explicit".into(), serde_json::to_value(&all).expect("maps serialize"));
    }
    if let Some(p) = &w.poles {
        let mut worst: f64 = 0.0;
        let mut per_point = Vec::new();
        for e in &p.points {
            let r = pole_metadata_residual(&e.declared, &e.residue, p.kappa, p.level)?;
            worst = worst.max(r);
            per_point.push(r);
        }
        checks.push(Check::below("pole_metadata", worst, th.pole_metadata));
        result.insert("pole_metadata".into(), Value::from(per_point));
    }
    Ok(Outcome {
        result,
        checks,
        table: None,
    })
}
