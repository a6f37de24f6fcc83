//! Experiment execution and artifact output.

use std::path::{Path, PathBuf};

use floorlab::blocks::{block_delta, find_block, verify_block};
use floorlab::equidistribution::{e, joint_floor_fraction_report, JointCharacter, SlopedSubgroup};
use floorlab::pet::{pet_step, random_family};
use floorlab::recurrence::{
    khintchine_tail, multiple_return_set, poly_delta_return_set, single_return_set, KhintchineVerdict, ReturnOptions,
    ReturnSetReport, ReturnStatus,
};
use floorlab::riesz::{Verdict, WeightScheme, WindowSchedule};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::config::{ExperimentConfig, ExperimentKind, RecurrenceMode};
use crate::CliError;

/// The output of one experiment before it is written to disk.
#[derive(Clone, Debug, PartialEq)]
pub struct Artifact {
    pub pass: bool,
    pub result: Value,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunOutcome {
    pub pass: bool,
    pub summary: PathBuf,
    pub detail: PathBuf,
}

impl RunOutcome {
    pub fn exit_code(&self) -> i32 {
        if self.pass {
            0
        } else {
            1
        }
    }
}

/// Round-trip float formatting, independent of locale.
fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn ints(v: &[i64]) -> String {
    v.iter().map(i64::to_string).collect::<Vec<_>>().join(";")
}

/// Runs the experiment and writes `<name>.json` and `<name>.csv` into `out`.
pub fn run(cfg: &ExperimentConfig, out: &Path) -> Result<RunOutcome, CliError> {
    let artifact = run_experiment(cfg)?;
    std::fs::create_dir_all(out).map_err(|e| CliError::Io(format!("{}: {e}", out.display())))?;
    let summary_path = out.join(format!("{}.json", cfg.name));
    let detail_path = out.join(format!("{}.csv", cfg.name));
    let summary = json!({
        "config": cfg,
        "kind": cfg.kind.name(),
        "pass": artifact.pass,
        "result": artifact.result,
    });
    let text = serde_json::to_string_pretty(&summary).map_err(|e| CliError::Io(e.to_string()))? + "\n";
    std::fs::write(&summary_path, text).map_err(|e| CliError::Io(format!("{}: {e}", summary_path.display())))?;
    let mut csv = artifact.header.join(",");
    csv.push('\n');
    for row in &artifact.rows {
        csv.push_str(&row.join(","));
        csv.push('\n');
    }
    std::fs::write(&detail_path, csv).map_err(|e| CliError::Io(format!("{}: {e}", detail_path.display())))?;
    Ok(RunOutcome {
        pass: artifact.pass,
        summary: summary_path,
        detail: detail_path,
    })
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Artifact, CliError> {
    match cfg.kind {
        ExperimentKind::Weyl => weyl(cfg),
        ExperimentKind::Recurrence => recurrence(cfg),
        ExperimentKind::Blocks => blocks(cfg),
        ExperimentKind::Pet => pet(cfg),
        ExperimentKind::Khintchine => khintchine(cfg),
        ExperimentKind::Haar => haar(cfg),
    }
}

fn weyl(cfg: &ExperimentConfig) -> Result<Artifact, CliError> {
    let f = cfg.catalog_function()?;
    let level = cfg.level.unwrap_or(f.level());
    let alpha = cfg.alpha_values()?;
    let d = alpha.len();
    if cfg.tau < 1 {
        return Err(CliError::Config {
            field: "tau".into(),
            message: "weyl needs tau >= 1".into(),
        });
    }
    // τ·e_j on αg and τ on {f}, at the lowest difference order
    let zero = |len: usize| vec![0i64; len];
    let mut chars = Vec::new();
    for t in 1..=cfg.tau {
        for j in 0..d {
            let mut tau = vec![zero(d); level as usize + 1];
            tau[0][j] = t;
            chars.push(JointCharacter { tau, h: zero(level as usize + 1) });
        }
        let mut h = zero(level as usize + 1);
        h[0] = t;
        chars.push(JointCharacter { tau: vec![zero(d); level as usize + 1], h });
    }
    let w = WeightScheme::from_catalog(&f, level)?;
    let schedule = WindowSchedule::with_spans(&w, &cfg.spans, 1, cfg.horizon, cfg.seed)?;
    let report = joint_floor_fraction_report(&f, level, &alpha, &chars, &schedule, &w, cfg.tolerance)?;
    let rows = report
        .rows
        .iter()
        .map(|r| {
            vec![
                ints(&r.character),
                r.window[0].to_string(),
                r.window[1].to_string(),
                num(r.span),
                num(r.expected),
                num(r.estimate_re),
                num(r.estimate_im),
                num(r.error),
                num(r.tolerance),
                r.pass.to_string(),
            ]
        })
        .collect();
    Ok(Artifact {
        pass: report.pass,
        result: json!({
            "level": level,
            "weight": w.label(),
            "characters": chars.len(),
            "windows": schedule.windows(),
            "max_error": report.max_error(),
        }),
        header: vec!["character", "m", "n", "span", "expected", "estimate_re", "estimate_im", "error", "tolerance", "pass"],
        rows,
    })
}

fn return_options(cfg: &ExperimentConfig) -> ReturnOptions {
    ReturnOptions {
        l: cfg.l,
        probes: cfg.probes,
        run_length: cfg.run_length,
        samples: cfg.samples,
        seed: cfg.seed,
    }
}

fn recurrence(cfg: &ExperimentConfig) -> Result<Artifact, CliError> {
    let f = cfg.catalog_function()?;
    let system = cfg.dynamical_system()?;
    let a = cfg.region()?;
    let opts = return_options(cfg);
    let report: ReturnSetReport = match cfg.mode {
        RecurrenceMode::Single => single_return_set(&system, &a, &f, cfg.epsilon, cfg.horizon, &opts)?,
        RecurrenceMode::Multiple => multiple_return_set(&system, &a, &f, cfg.k, cfg.horizon, &opts)?,
        RecurrenceMode::Poly => poly_delta_return_set(&system, &a, &f, &cfg.delta_polynomials()?, cfg.horizon, &opts)?,
    };
    // an empty set is "no witness", which makes no claim either way
    let pass = report.status == ReturnStatus::NoWitness
        || (report.thickness.verdict == Verdict::Pass
            && report.w_syndeticity.as_ref().is_none_or(|s| s.verdict == Verdict::Pass));
    let rows = report
        .rows
        .iter()
        .map(|r| vec![r.n.to_string(), ints(&r.shifts), num(r.measure), num(r.stderr), r.member.to_string()])
        .collect();
    let mut result = serde_json::to_value(&report).map_err(|e| CliError::Io(e.to_string()))?;
    if let Some(obj) = result.as_object_mut() {
        obj.remove("rows");
    }
    Ok(Artifact {
        pass,
        result,
        header: vec!["n", "shifts", "measure", "stderr", "member"],
        rows,
    })
}

fn blocks(cfg: &ExperimentConfig) -> Result<Artifact, CliError> {
    let f = cfg.catalog_function()?;
    let mut rows = Vec::new();
    let mut witnesses = Vec::new();
    let mut pass = true;
    for &n in &cfg.n {
        let delta = match cfg.delta {
            Some(d) => d,
            None => block_delta(f.level(), n)?,
        };
        match find_block(&f, n, delta, cfg.horizon)? {
            Some(b) => {
                verify_block(&f, &b)?;
                rows.push(vec![
                    n.to_string(),
                    num(delta),
                    b.a.to_string(),
                    b.s.to_string(),
                    b.ell.to_string(),
                    "true".into(),
                ]);
                witnesses.push(serde_json::to_value(&b).map_err(|e| CliError::Io(e.to_string()))?);
            }
            None => {
                pass = false;
                rows.push(vec![n.to_string(), num(delta), String::new(), String::new(), f.level().to_string(), "false".into()]);
                witnesses.push(json!({ "N": n, "delta": delta, "a": null }));
            }
        }
    }
    Ok(Artifact {
        pass,
        result: json!({ "level": f.level(), "horizon": cfg.horizon, "witnesses": witnesses }),
        header: vec!["N", "delta", "a", "s", "ell", "verified"],
        rows,
    })
}

fn pet(cfg: &ExperimentConfig) -> Result<Artifact, CliError> {
    let f = cfg.catalog_function()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut rows = Vec::with_capacity(cfg.families);
    let mut failures = 0usize;
    for i in 0..cfg.families {
        let family = random_family(&f, &mut rng)?;
        let m = rng.random_range(1..=4u64);
        let step = pet_step(&family, m)?;
        if !step.decreased {
            failures += 1;
        }
        rows.push(vec![
            i.to_string(),
            step.size_before.to_string(),
            step.size_after.to_string(),
            step.pivot.to_string(),
            m.to_string(),
            format!("\"{}\"", step.before),
            format!("\"{}\"", step.after),
            step.decreased.to_string(),
        ]);
    }
    Ok(Artifact {
        pass: failures == 0,
        result: json!({ "families": cfg.families, "failures": failures, "level": f.level() }),
        header: vec!["family", "size_before", "size_after", "pivot", "m", "before", "after", "decreased"],
        rows,
    })
}

fn khintchine(cfg: &ExperimentConfig) -> Result<Artifact, CliError> {
    let f = cfg.catalog_function()?;
    let level = cfg.level.unwrap_or(f.level());
    let system = cfg.dynamical_system()?;
    let a = cfg.region()?;
    let w = WeightScheme::from_catalog(&f, level)?;
    let schedule = WindowSchedule::geometric(&w, 1, cfg.n0, cfg.windows, cfg.seed)?;
    let tol = cfg.tolerance.unwrap_or(0.01);
    let report = khintchine_tail(&system, &a, &f, &w, &schedule, tol, &return_options(cfg))?;
    let rows = report
        .estimates
        .iter()
        .map(|r| {
            vec![
                r.window[0].to_string(),
                r.window[1].to_string(),
                num(r.span),
                num(r.estimate),
                num(report.measure_floor),
            ]
        })
        .collect();
    Ok(Artifact {
        pass: report.verdict == KhintchineVerdict::BoundMet,
        result: serde_json::to_value(&report).map_err(|e| CliError::Io(e.to_string()))?,
        header: vec!["m", "n", "span", "estimate", "measure_floor"],
        rows,
    })
}

fn haar(cfg: &ExperimentConfig) -> Result<Artifact, CliError> {
    let tol = cfg.tolerance.unwrap_or(1e-6);
    let mut rows = Vec::new();
    let mut max_error: f64 = 0.0;
    for (label, alpha) in cfg.alpha.iter().zip(cfg.alpha_values()?) {
        let h = SlopedSubgroup::from_real(&alpha)?;
        for tx in -cfg.tau..=cfg.tau {
            for ty in -cfg.tau..=cfg.tau {
                let (fx, fy) = (tx as f64, ty as f64);
                let z = floorlab::equidistribution::haar_integral(&h, |x, y| e(fx * x + fy * y), cfg.resolution)?;
                let expected = if h.annihilated_by(tx, ty) { 1.0 } else { 0.0 };
                let error = (z.re - expected).hypot(z.im);
                max_error = max_error.max(error);
                let mut row = vec![label.clone(), tx.to_string(), ty.to_string()];
                row.extend([num(z.re), num(z.im), num(expected), num(error), (error <= tol).to_string()]);
                rows.push(row);
            }
        }
    }
    Ok(Artifact {
        pass: max_error <= tol,
        result: json!({ "max_error": max_error, "tolerance": tol, "resolution": cfg.resolution }),
        header: vec!["alpha", "tx", "ty", "value_re", "value_im", "expected", "error", "pass"],
        rows,
    })
}
