use std::io::Write;
use std::path::{Path, PathBuf};

use nrflow::scenarios::{run_platoon, PlatoonRun};
use nrflow::{certify, root_locus, run_closed_loop, run_memoryless, Poly64, StabilityCertificate, Trace64, Verdict};
use num_complex::Complex64;
use rayon::prelude::*;
use serde_json::json;

use crate::alphas::parse_alphas;
use crate::config::{Scenario, ScenarioConfig, SystemConfig};
use crate::error::{core_exit_code, exit, status_label, CliError, Result};
use crate::trace_file::{fmt_value, write_platoon_metrics, write_trace};

/// Environment variable capping the sweep thread pool.
pub const THREADS_VAR: &str = "NRFLOW_THREADS";

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn stdout_err(source: std::io::Error) -> CliError {
    CliError::Io {
        path: PathBuf::from("<stdout>"),
        source,
    }
}

/// Coefficients rounded to `digits` decimals, for display.
fn rounded(p: &Poly64, digits: i32) -> Poly64 {
    let k = 10f64.powi(digits);
    Poly64::new(p.coeffs().iter().map(|c| (c * k).round() / k + 0.0).collect())
}

fn fmt_roots(roots: &[Complex64]) -> String {
    let parts: Vec<String> = roots
        .iter()
        .map(|z| {
            if z.im.abs() < 1e-12 {
                format!("{:.6}", z.re)
            } else {
                format!("{:.6} {} {:.6}i", z.re, if z.im < 0.0 { '-' } else { '+' }, z.im.abs())
            }
        })
        .collect();
    format!("[{}]", parts.join(", "))
}

fn trace_dims(trace: &Trace64, n: usize, m: usize) -> (usize, usize) {
    trace.records.first().map(|r| (r.x.len(), r.u.len())).unwrap_or((n, m))
}

fn write_summary(w: &mut dyn Write, trace: &Trace64) -> std::io::Result<()> {
    let s = trace.summary();
    writeln!(w, "status: {}", status_label(trace.failure.as_ref()))?;
    if let Some(e) = &trace.failure {
        writeln!(w, "failure: {e}")?;
    }
    writeln!(w, "records: {}", trace.records.len())?;
    writeln!(w, "tail_start: {}", fmt_value(s.tail_start))?;
    writeln!(w, "tail_max_tracking_error: {}", fmt_value(s.tail_max_tracking_error))?;
    writeln!(w, "tail_max_ref_pred_error: {}", fmt_value(s.tail_max_ref_pred_error))?;
    writeln!(w, "peak_input: {}", fmt_value(s.peak_input))?;
    match s.lyapunov_slope {
        Some(k) => writeln!(w, "lyapunov_slope: {}", fmt_value(k)),
        None => writeln!(w, "lyapunov_slope: none"),
    }
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "trace".into());
    path.with_file_name(format!("{stem}_{suffix}.csv"))
}

/// Trace path: `--out`, then `output.trace`, then `{name}_trace.csv`.
pub fn trace_path(cfg: &ScenarioConfig, out: Option<&Path>) -> PathBuf {
    out.map(Path::to_path_buf)
        .or_else(|| cfg.output.as_ref().and_then(|o| o.trace.as_ref()).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(format!("{}_trace.csv", cfg.name)))
}

pub fn simulate(config: &Path, out: Option<&Path>, w: &mut dyn Write) -> Result<i32> {
    let cfg = ScenarioConfig::load(config)?;
    let scenario = cfg.build(config, None)?;
    let path = trace_path(&cfg, out);
    writeln!(w, "scenario: {}", cfg.name).map_err(stdout_err)?;
    match scenario {
        Scenario::Dynamic {
            plant,
            predictor,
            controller,
            reference,
            grid,
            x0,
            u0,
        } => {
            let trace = run_closed_loop(&plant, predictor.as_ref(), &controller, &reference, &x0, &u0, &grid)?;
            let (n, m) = trace_dims(&trace, plant.state_dim(), plant.io_dim());
            write_trace(&path, &trace, n, m)?;
            write_summary(w, &trace).map_err(stdout_err)?;
            writeln!(w, "trace: {}", path.display()).map_err(stdout_err)?;
            Ok(trace.failure.as_ref().map_or(exit::OK, core_exit_code))
        }
        Scenario::Static {
            plant,
            controller,
            reference,
            grid,
            u0,
        } => {
            let trace = run_memoryless(&plant, &controller, &reference, &u0, &grid)?;
            let (n, m) = trace_dims(&trace, 0, plant.dim());
            write_trace(&path, &trace, n, m)?;
            write_summary(w, &trace).map_err(stdout_err)?;
            writeln!(w, "trace: {}", path.display()).map_err(stdout_err)?;
            Ok(trace.failure.as_ref().map_or(exit::OK, core_exit_code))
        }
        Scenario::Platoon {
            config: pcfg,
            reference,
            grid,
            final_straight,
        } => {
            let run = run_platoon(&pcfg, &reference, &grid)?;
            report_platoon(w, &run, &path, final_straight, pcfg.spacing)?;
            Ok(run.failure.as_ref().map_or(exit::OK, |(_, e)| core_exit_code(e)))
        }
    }
}

fn report_platoon(
    w: &mut dyn Write,
    run: &PlatoonRun<f64>,
    path: &Path,
    final_straight: Option<f64>,
    spacing: f64,
) -> Result<()> {
    let status = status_label(run.failure.as_ref().map(|(_, e)| e));
    writeln!(w, "status: {status}").map_err(stdout_err)?;
    if let Some((i, e)) = &run.failure {
        writeln!(w, "failure: agent {}: {e}", i + 1).map_err(stdout_err)?;
    }
    writeln!(w, "agents: {}", run.traces.len()).map_err(stdout_err)?;
    for (i, trace) in run.traces.iter().enumerate() {
        let p = sibling(path, &format!("agent{}", i + 1));
        let (n, m) = trace_dims(trace, 0, 0);
        write_trace(&p, trace, n, m)?;
        let s = trace.summary();
        writeln!(
            w,
            "agent {}: tail_max_tracking_error {} peak_input {} trace {}",
            i + 1,
            fmt_value(s.tail_max_tracking_error),
            fmt_value(s.peak_input),
            p.display()
        )
        .map_err(stdout_err)?;
    }
    let m = &run.metrics;
    let metrics_path = sibling(path, "platoon");
    write_platoon_metrics(&metrics_path, m)?;
    if !m.lateral_errors.is_empty() {
        let lat: Vec<String> = m.max_lateral_errors(0.0).iter().map(|&e| fmt_value(e)).collect();
        writeln!(w, "max_lateral_errors: {}", lat.join(" ")).map_err(stdout_err)?;
    }
    let t_end = m.times.last().copied().unwrap_or(0.0);
    let t0 = m.times.first().copied().unwrap_or(0.0);
    let tail_from = t_end - 0.25 * (t_end - t0);
    let window = match final_straight {
        Some(fs) => m.distance_range(|k| m.arclengths.iter().all(|a| a[k] >= fs)),
        None => m.distance_range(|k| m.times[k] >= tail_from),
    };
    if let Some((lo, hi)) = window {
        let label = if final_straight.is_some() { "final_straight" } else { "tail" };
        writeln!(w, "{label}_distance_range: {} {} (spacing {})", fmt_value(lo), fmt_value(hi), fmt_value(spacing))
            .map_err(stdout_err)?;
    }
    writeln!(w, "ordering_violations: {}", m.ordering_violations(t0)).map_err(stdout_err)?;
    writeln!(w, "fallback_events: {}", m.fallback_events).map_err(stdout_err)?;
    writeln!(w, "metrics: {}", metrics_path.display()).map_err(stdout_err)?;
    Ok(())
}

fn certificate_json(name: Option<&str>, c: &StabilityCertificate<f64>) -> serde_json::Value {
    let roots = |r: &[Complex64]| r.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>();
    json!({
        "name": name,
        "p": (0..=c.bivariate.m()).map(|i| c.bivariate.p(i).coeffs().to_vec()).collect::<Vec<_>>(),
        "p0": { "coeffs": c.p0.coeffs(), "roots": roots(&c.p0_roots) },
        "q": { "coeffs": c.q.coeffs(), "roots": roots(&c.q_roots) },
        "verdict": c.verdict.name(),
        "witness_alpha": c.witness_alpha,
        "rhp_root": c.rhp_root,
    })
}

pub fn certify_cmd(config: &Path, as_json: bool, w: &mut dyn Write) -> Result<i32> {
    let cfg = SystemConfig::load(config)?;
    let sys = cfg.build(config)?;
    let c = certify(&sys)?;
    if as_json {
        let v = certificate_json(cfg.name.as_deref(), &c);
        writeln!(w, "{}", serde_json::to_string_pretty(&v).expect("json")).map_err(stdout_err)?;
    } else {
        if let Some(name) = &cfg.name {
            writeln!(w, "system: {name}").map_err(stdout_err)?;
        }
        writeln!(w, "variant: {}", sys.variant()).map_err(stdout_err)?;
        for i in (1..=c.bivariate.m()).rev() {
            writeln!(w, "P{i}(s) = {}", rounded(&c.bivariate.p(i), 4)).map_err(stdout_err)?;
        }
        writeln!(w, "P0(s) = {}", rounded(&c.p0, 4)).map_err(stdout_err)?;
        writeln!(w, "P0 coefficients (ascending): {:?}", c.p0.coeffs()).map_err(stdout_err)?;
        writeln!(w, "P0 roots: {}", fmt_roots(&c.p0_roots)).map_err(stdout_err)?;
        writeln!(w, "Q(s) = {}", rounded(&c.q, 4)).map_err(stdout_err)?;
        writeln!(w, "Q coefficients (ascending): {:?}", c.q.coeffs()).map_err(stdout_err)?;
        writeln!(w, "Q roots: {}", fmt_roots(&c.q_roots)).map_err(stdout_err)?;
        writeln!(w, "verdict: {}", c.verdict.name()).map_err(stdout_err)?;
        match c.witness_alpha {
            Some(a) => writeln!(w, "witness_alpha: {a}"),
            None => writeln!(w, "witness_alpha: none"),
        }
        .map_err(stdout_err)?;
    }
    if c.rhp_root {
        eprintln!("advisory: root in RHP");
        if !as_json {
            writeln!(w, "advisory: root in RHP").map_err(stdout_err)?;
        }
    }
    Ok(match c.verdict {
        Verdict::AlphaStable => exit::OK,
        Verdict::NotCertified => exit::NOT_CERTIFIED,
    })
}

fn csv_sink(out: Option<&Path>) -> Result<csv::Writer<Box<dyn Write>>> {
    let sink: Box<dyn Write> = match out {
        Some(p) => Box::new(std::fs::File::create(p).map_err(io_err(p))?),
        None => Box::new(std::io::stdout()),
    };
    Ok(csv::Writer::from_writer(sink))
}

fn csv_label(out: Option<&Path>) -> PathBuf {
    out.map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("<stdout>"))
}

pub fn rootlocus_cmd(config: &Path, alphas: &str, out: Option<&Path>, w: &mut dyn Write) -> Result<i32> {
    let cfg = SystemConfig::load(config)?;
    let sys = cfg.build(config)?;
    let alphas = parse_alphas(alphas)?;
    let locus = root_locus(&sys, &alphas)?;
    let label = csv_label(out);
    let csv_err = |source| CliError::Csv {
        path: label.clone(),
        source,
    };
    let mut wr = csv_sink(out)?;
    wr.write_record(["alpha", "branch_id", "re", "im"]).map_err(csv_err)?;
    for (k, &a) in locus.alphas.iter().enumerate() {
        for (b, branch) in locus.branches.iter().enumerate() {
            let z = branch[k];
            wr.write_record([fmt_value(a), b.to_string(), fmt_value(z.re), fmt_value(z.im)])
                .map_err(csv_err)?;
        }
    }
    wr.flush().map_err(io_err(&label))?;
    if let Some(p) = out {
        writeln!(w, "branches: {}", locus.branches.len()).map_err(stdout_err)?;
        writeln!(w, "gains: {}", locus.alphas.len()).map_err(stdout_err)?;
        if let (Some(b), Some(&a)) = (locus.unbounded_branch(), locus.alphas.last()) {
            let z = locus.branches[b][locus.alphas.len() - 1];
            writeln!(w, "unbounded_branch: {b} (|s|/alpha = {:.4} at alpha = {a})", z.norm() / a).map_err(stdout_err)?;
        }
        writeln!(w, "ambiguous_matches: {}", locus.ambiguous.len()).map_err(stdout_err)?;
        writeln!(w, "locus: {}", p.display()).map_err(stdout_err)?;
    }
    Ok(exit::OK)
}

/// One row of a gain sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub alpha: f64,
    pub tail_max_ref_pred_error: f64,
    pub tail_max_tracking_error: f64,
    pub status: String,
}

fn sweep_point(cfg: &ScenarioConfig, config: &Path, alpha: f64) -> SweepRow {
    let row = |trace: Option<&Trace64>, status: String| {
        let (pred, track) = match trace {
            Some(t) if !t.records.is_empty() => {
                let s = t.summary();
                (s.tail_max_ref_pred_error, s.tail_max_tracking_error)
            }
            _ => (f64::NAN, f64::NAN),
        };
        SweepRow {
            alpha,
            tail_max_ref_pred_error: pred,
            tail_max_tracking_error: track,
            status,
        }
    };
    let run = cfg.build(config, Some(alpha)).and_then(|s| {
        Ok(match s {
            Scenario::Dynamic {
                plant,
                predictor,
                controller,
                reference,
                grid,
                x0,
                u0,
            } => run_closed_loop(&plant, predictor.as_ref(), &controller, &reference, &x0, &u0, &grid)?,
            Scenario::Static {
                plant,
                controller,
                reference,
                grid,
                u0,
            } => run_memoryless(&plant, &controller, &reference, &u0, &grid)?,
            Scenario::Platoon { .. } => unreachable!("rejected before the sweep"),
        })
    });
    match run {
        Ok(t) => row(Some(&t), status_label(t.failure.as_ref()).to_string()),
        Err(CliError::Core(e)) => row(None, status_label(Some(&e)).to_string()),
        Err(_) => row(None, "error".into()),
    }
}

fn thread_cap() -> Result<Option<usize>> {
    match std::env::var(THREADS_VAR) {
        Err(_) => Ok(None),
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::Usage(format!("{THREADS_VAR}='{s}' is not a positive integer"))),
        },
    }
}

pub fn sweep(config: &Path, alphas: &[f64]) -> Result<Vec<SweepRow>> {
    let cfg = ScenarioConfig::load(config)?;
    if cfg.platoon.is_some() {
        return Err(CliError::config(config, "sweep-alpha does not support platoon scenarios"));
    }
    cfg.build(config, None)?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_cap()? {
        pool = pool.num_threads(n);
    }
    let pool = pool
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start the sweep thread pool: {e}")))?;
    // collect keeps input order, and the gains arrive sorted
    Ok(pool.install(|| alphas.par_iter().map(|&a| sweep_point(&cfg, config, a)).collect()))
}

pub fn sweep_cmd(config: &Path, alphas: &str, out: Option<&Path>, w: &mut dyn Write) -> Result<i32> {
    let alphas = parse_alphas(alphas)?;
    let rows = sweep(config, &alphas)?;
    let label = csv_label(out);
    let csv_err = |source| CliError::Csv {
        path: label.clone(),
        source,
    };
    let mut wr = csv_sink(out)?;
    wr.write_record(["alpha", "tail_max_ref_pred_error", "tail_max_tracking_error", "status"])
        .map_err(csv_err)?;
    for r in &rows {
        wr.write_record([
            fmt_value(r.alpha),
            fmt_value(r.tail_max_ref_pred_error),
            fmt_value(r.tail_max_tracking_error),
            r.status.clone(),
        ])
        .map_err(csv_err)?;
    }
    wr.flush().map_err(io_err(&label))?;
    if let Some(p) = out {
        let failed = rows.iter().filter(|r| r.status != "ok").count();
        writeln!(w, "gains: {} ({failed} failed)", rows.len()).map_err(stdout_err)?;
        writeln!(w, "sweep: {}", p.display()).map_err(stdout_err)?;
    }
    Ok(exit::OK)
}
