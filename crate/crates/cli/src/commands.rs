use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime};

use clap::Args;
use serde::Serialize;
use serde_json::json;

use nullfiber::{
    kernel_basis, parse_network, same_class_certificate, trace_leaf, trace_many, trace_weight_class, CurveTrace,
    NetworkSpec, TraceConfig, Verdict, WeightMap, WeightPoint,
};

use crate::error::CliError;
use crate::output::{manifest_path, unix_seconds, write_atomic, Csv, Diagnostics, RunManifest};

#[derive(Debug, Clone, Args)]
pub struct TraceArgs {
    /// Signed number of steps.
    #[arg(long, default_value_t = 100, allow_hyphen_values = true)]
    pub steps: i64,
    /// Step size.
    #[arg(long, default_value_t = 0.02)]
    pub h: f64,
    /// Kernel coefficients (comma list) for kernels of dimension > 1.
    #[arg(long, allow_hyphen_values = true)]
    pub coeffs: Option<String>,
    /// Orientation of the first step (comma list).
    #[arg(long, allow_hyphen_values = true)]
    pub seed_dir: Option<String>,
    /// Residual tolerance of the fiber projection.
    #[arg(long = "corrector-tol", default_value_t = 1e-8)]
    pub corrector_tol: f64,
    /// Iteration cap of the fiber projection.
    #[arg(long = "corrector-iters", default_value_t = 25)]
    pub corrector_iters: usize,
    /// Output CSV path; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl TraceArgs {
    fn config(&self) -> Result<TraceConfig, CliError> {
        Ok(TraceConfig {
            step_size: self.h,
            n_steps: self.steps,
            corrector_tol: self.corrector_tol,
            corrector_max_iters: self.corrector_iters,
            seed_direction: self.seed_dir.as_deref().map(|s| parse_vec("--seed-dir", s)).transpose()?,
            kernel_coeffs: self.coeffs.as_deref().map(|s| parse_vec("--coeffs", s)).transpose()?,
            rank_tol: None,
        })
    }
}

pub fn parse_vec(name: &'static str, text: &str) -> Result<Vec<f64>, CliError> {
    text.split(',')
        .map(|t| {
            t.trim().parse::<f64>().map_err(|e| CliError::Argument {
                name,
                message: format!("`{t}`: {e}"),
            })
        })
        .collect()
}

fn load(path: &Path) -> Result<NetworkSpec, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(parse_network(&text)?)
}

fn print_json(value: &serde_json::Value) -> Result<(), CliError> {
    let mut out = std::io::stdout().lock();
    writeln!(out, "{}", serde_json::to_string_pretty(value).expect("json value")).map_err(|source| {
        CliError::Write {
            path: "<stdout>".into(),
            source,
        }
    })
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => write_atomic(path, text),
        None => std::io::stdout().lock().write_all(text.as_bytes()).map_err(|source| CliError::Write {
            path: "<stdout>".into(),
            source,
        }),
    }
}

fn write_manifest<C: Serialize>(
    out: Option<&Path>,
    command: &str,
    spec: &Path,
    config: &C,
    started: SystemTime,
    clock: Instant,
    diagnostics: Vec<Diagnostics>,
) -> Result<(), CliError> {
    let Some(out) = out else { return Ok(()) };
    let manifest = RunManifest {
        command,
        tool_version: env!("CARGO_PKG_VERSION"),
        inputs: vec![spec.display().to_string()],
        arguments: std::env::args().skip(1).collect(),
        config,
        started_unix_s: unix_seconds(started),
        wall_time_s: clock.elapsed().as_secs_f64(),
        diagnostics,
    };
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    write_atomic(&manifest_path(out), &(text + "\n"))
}

pub fn eval(spec: &Path, x: &str) -> Result<(), CliError> {
    let net = load(spec)?;
    let x = parse_vec("x", x)?;
    let layers = net.forward_layers(1, net.num_layers(), &x)?;
    let as_vec = |v: &nullfiber::DVector<f64>| v.iter().copied().collect::<Vec<f64>>();
    print_json(&json!({
        "output": as_vec(layers.last().expect("at least one layer")),
        "layers": layers.iter().map(as_vec).collect::<Vec<_>>(),
    }))
}

pub fn kernel(spec: &Path, x: &str, layer: usize, tol: Option<f64>) -> Result<(), CliError> {
    let net = load(spec)?;
    let x = parse_vec("x", x)?;
    let k = kernel_basis(&net, layer, &x, tol)?;
    let basis: Vec<Vec<f64>> = k.vectors.column_iter().map(|c| c.iter().copied().collect()).collect();
    print_json(&json!({
        "point": x,
        "layer": layer,
        "rank": k.rank,
        "kernel_dim": k.dim(),
        "singular_values": k.singular_values,
        "tol_used": k.tol_used,
        "basis": basis,
    }))
}

fn trace_csv(trace: &CurveTrace, d_in: usize, d_out: usize) -> Csv {
    let header: Vec<String> = std::iter::once("t".to_string())
        .chain((0..d_in).map(|i| format!("x_{i}")))
        .chain((0..d_out).map(|i| format!("out_{i}")))
        .chain(std::iter::once("drift".to_string()))
        .collect();
    let mut csv = Csv::new(&header);
    for k in 0..trace.len() {
        csv.row(
            std::iter::once(trace.params[k])
                .chain(trace.vertices[k].iter().copied())
                .chain(trace.outputs[k].iter().copied())
                .chain(std::iter::once(trace.drift[k])),
        );
    }
    if let Some(t) = &trace.truncated {
        csv.marker("truncated", &t.to_string());
    }
    csv
}

fn numbered(out: &Path, k: usize) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = match out.extension() {
        Some(ext) => format!("{stem}.{k}.{}", ext.to_string_lossy()),
        None => format!("{stem}.{k}"),
    };
    out.with_file_name(name)
}

pub fn trace(spec: &Path, p: &str, args: &TraceArgs, seeds: Option<&Path>) -> Result<(), CliError> {
    let started = SystemTime::now();
    let clock = Instant::now();
    let net = load(spec)?;
    let cfg = args.config()?;
    let (d_in, d_out) = (net.input_dim(), net.output_dim());

    if let Some(seeds) = seeds {
        let out = args.out.as_deref().ok_or(CliError::Argument {
            name: "--out",
            message: "required with --seeds".into(),
        })?;
        let text = std::fs::read_to_string(seeds).map_err(|source| CliError::Read {
            path: seeds.to_path_buf(),
            source,
        })?;
        let points = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| parse_vec("--seeds", l))
            .collect::<Result<Vec<_>, _>>()?;
        let traces = trace_many(&net, &points, &cfg).into_iter().collect::<Result<Vec<_>, _>>()?;
        let mut diagnostics = Vec::new();
        for (k, trace) in traces.iter().enumerate() {
            write_atomic(&numbered(out, k), trace_csv(trace, d_in, d_out).as_str())?;
            diagnostics.push(Diagnostics::of(trace));
        }
        return write_manifest(Some(out), "trace", spec, &cfg, started, clock, diagnostics);
    }

    let p = parse_vec("p", p)?;
    let trace = trace_leaf(&net, &p, &cfg)?;
    emit(args.out.as_deref(), trace_csv(&trace, d_in, d_out).as_str())?;
    write_manifest(args.out.as_deref(), "trace", spec, &cfg, started, clock, vec![Diagnostics::of(&trace)])
}

pub fn weight_trace(spec: &Path, x: &str, args: &TraceArgs) -> Result<(), CliError> {
    let started = SystemTime::now();
    let clock = Instant::now();
    let net = load(spec)?;
    let cfg = args.config()?;
    let x = parse_vec("x", x)?;
    let w = WeightPoint::first_layer_of(&net);
    let map = WeightMap::new(&net, &x)?;
    let coeffs = match &cfg.kernel_coeffs {
        Some(c) => c.clone(),
        None => {
            return Err(CliError::Argument {
                name: "--coeffs",
                message: "weight traces need kernel coefficients".into(),
            })
        }
    };
    let trace = trace_weight_class(&net, &x, &w, &coeffs, &cfg)?;

    let (rows, cols) = (net.dim(1), net.dim(0));
    let header: Vec<String> = std::iter::once("t".to_string())
        .chain((0..rows).flat_map(|a| (0..cols).map(move |b| format!("w_{a}_{b}"))))
        .chain((0..rows).map(|a| format!("b_{a}")))
        .chain((0..rows).map(|a| format!("layer1_{a}")))
        .chain((0..net.output_dim()).map(|i| format!("out_{i}")))
        .chain(std::iter::once("drift".to_string()))
        .collect();
    let mut csv = Csv::new(&header);
    for k in 0..trace.len() {
        let hidden = map.first_layer_output(trace.vertices[k].as_slice())?;
        csv.row(
            std::iter::once(trace.params[k])
                .chain(trace.vertices[k].iter().copied())
                .chain(hidden.iter().copied())
                .chain(trace.outputs[k].iter().copied())
                .chain(std::iter::once(trace.drift[k])),
        );
    }
    if let Some(t) = &trace.truncated {
        csv.marker("truncated", &t.to_string());
    }
    emit(args.out.as_deref(), csv.as_str())?;
    write_manifest(
        args.out.as_deref(),
        "weight-trace",
        spec,
        &cfg,
        started,
        clock,
        vec![Diagnostics::of(&trace)],
    )
}

pub fn certify(spec: &Path, x: &str, y: &str, budget: usize, out_tol: f64, h: f64) -> Result<(), CliError> {
    let net = load(spec)?;
    let x = parse_vec("x", x)?;
    let y = parse_vec("y", y)?;
    let cfg = TraceConfig {
        step_size: h,
        n_steps: budget as i64,
        ..Default::default()
    };
    let cert = same_class_certificate(&net, &x, &y, &cfg, out_tol)?;
    let verdict = match cert.verdict {
        Verdict::DifferentFiber => "DifferentFiber",
        Verdict::Connected => "Connected",
        Verdict::SameFiberUnknown => "SameFiberUnknown",
    };
    let evidence = cert.evidence.as_ref().map(|t| {
        t.vertices
            .iter()
            .map(|v| v.iter().copied().collect::<Vec<f64>>())
            .collect::<Vec<_>>()
    });
    print_json(&json!({
        "verdict": verdict,
        "output_gap": cert.output_gap,
        "out_tol": out_tol,
        "endpoint_distance": cert.endpoint_distance,
        "spatial_tol": cert.spatial_tol,
        "steps_used": cert.evidence.as_ref().map(|t| t.len() - 1).unwrap_or(0),
        "evidence": evidence,
    }))
}

pub fn check(spec: &Path, tol: f64) -> Result<(), CliError> {
    let net = load(spec)?;
    let report = net.check_full_rank(tol);
    let failing: Vec<usize> = report.iter().filter(|r| !r.pass).map(|r| r.layer).collect();
    print_json(&json!({
        "dims": net.dims(),
        "tol": tol,
        "layers": report,
        "all_pass": failing.is_empty(),
        "failing_layers": failing,
    }))
}
