//! Browser bindings for the level-line demo.
//!
//! Every export is a thin wrapper over a plain function in this file, so the
//! numerics are exercised by native tests and the wasm layer only converts
//! error strings.

use nullfiber::{
    kernel_basis, parse_network, trace_leaf, trace_weight_class, CurveTrace, NetworkSpec, TraceConfig, WeightPoint,
};
use wasm_bindgen::prelude::*;

/// Rows of equal width flattened into one buffer, plus a note describing why
/// a trace stopped early (empty when it ran to completion).
#[wasm_bindgen]
#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    width: usize,
    data: Vec<f64>,
    note: String,
}

#[wasm_bindgen]
impl Path {
    #[wasm_bindgen(getter)]
    pub fn width(&self) -> usize {
        self.width
    }

    #[wasm_bindgen(getter)]
    pub fn data(&self) -> Vec<f64> {
        self.data.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn note(&self) -> String {
        self.note.clone()
    }
}

impl Path {
    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks(self.width)
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.width
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }
}

fn planar(spec: &str) -> Result<NetworkSpec, String> {
    let net = parse_network(spec).map_err(|e| e.to_string())?;
    if net.input_dim() != 2 {
        return Err(format!("the demo draws two-dimensional inputs, this network takes {}", net.input_dim()));
    }
    Ok(net)
}

fn note(traces: &[&CurveTrace]) -> String {
    traces
        .iter()
        .filter_map(|t| t.truncated.as_ref().map(|r| r.to_string()))
        .collect::<Vec<_>>()
        .join("; ")
}

/// Sample a `nx` by `ny` grid over `[x_min, x_max] x [y_min, y_max]`. Each
/// cell yields `(output_0, k_x, k_y)` where `k` is the first kernel vector,
/// or `NaN` components where the kernel is trivial. Rows run along x first.
pub fn sample_field(
    spec: &str,
    x_min: f64,
    x_max: f64,
    y_min: f64,
    y_max: f64,
    nx: usize,
    ny: usize,
) -> Result<Vec<f64>, String> {
    let net = planar(spec)?;
    let step = |lo: f64, hi: f64, n: usize, i: usize| {
        if n <= 1 {
            0.5 * (lo + hi)
        } else {
            lo + (hi - lo) * i as f64 / (n - 1) as f64
        }
    };
    let mut out = Vec::with_capacity(3 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let p = [step(x_min, x_max, nx, i), step(y_min, y_max, ny, j)];
            let value = net.output(&p).map_err(|e| e.to_string())?[0];
            let k = kernel_basis(&net, 0, &p, None).map_err(|e| e.to_string())?;
            let (kx, ky) = if k.is_empty() {
                (f64::NAN, f64::NAN)
            } else {
                (k.vectors[(0, 0)], k.vectors[(1, 0)])
            };
            out.extend_from_slice(&[value, kx, ky]);
        }
    }
    Ok(out)
}

/// Trace the leaf through `(x, y)` for `steps` steps in each direction. The
/// result has rows `(x, y, output_0)` ordered from the backward end to the
/// forward end.
pub fn leaf_path(spec: &str, x: f64, y: f64, h: f64, steps: u32) -> Result<Path, String> {
    let net = planar(spec)?;
    let run = |n_steps: i64| {
        let cfg = TraceConfig {
            step_size: h,
            n_steps,
            ..Default::default()
        };
        trace_leaf(&net, &[x, y], &cfg).map_err(|e| e.to_string())
    };
    let forward = run(steps as i64)?;
    let backward = run(-(steps as i64))?;
    let mut data = Vec::with_capacity(3 * (forward.len() + backward.len()));
    let rows = backward
        .vertices
        .iter()
        .zip(&backward.outputs)
        .rev()
        .chain(forward.vertices.iter().zip(&forward.outputs).skip(1));
    for (v, o) in rows {
        data.extend_from_slice(&[v[0], v[1], o[0]]);
    }
    Ok(Path {
        width: 3,
        data,
        note: note(&[&backward, &forward]),
    })
}

/// Hold the data point `(x, y)` fixed and move the first layer's parameters
/// along the weight-space kernel combination `coeffs`. Rows are the
/// flattened parameters (weights row-major, then bias) followed by
/// `output_0`.
pub fn weight_path(spec: &str, x: f64, y: f64, coeffs: &[f64], h: f64, steps: i32) -> Result<Path, String> {
    let net = planar(spec)?;
    let w = WeightPoint::first_layer_of(&net);
    let cfg = TraceConfig {
        step_size: h,
        n_steps: steps as i64,
        ..Default::default()
    };
    let trace = trace_weight_class(&net, &[x, y], &w, coeffs, &cfg).map_err(|e| e.to_string())?;
    let width = trace.vertices[0].len() + 1;
    let mut data = Vec::with_capacity(width * trace.len());
    for (v, o) in trace.vertices.iter().zip(&trace.outputs) {
        data.extend_from_slice(v.as_slice());
        data.push(o[0]);
    }
    Ok(Path {
        width,
        data,
        note: note(&[&trace]),
    })
}

/// Dimension of the weight-space kernel at the network's own first layer.
pub fn weight_kernel_dim(spec: &str, x: f64, y: f64) -> Result<usize, String> {
    let net = planar(spec)?;
    let w = WeightPoint::first_layer_of(&net);
    nullfiber::weight_kernel(&net, &[x, y], &w, None)
        .map(|k| k.dim())
        .map_err(|e| e.to_string())
}

#[wasm_bindgen(js_name = sampleField)]
pub fn sample_field_js(
    spec: &str,
    x_min: f64,
    x_max: f64,
    y_min: f64,
    y_max: f64,
    nx: usize,
    ny: usize,
) -> Result<Vec<f64>, JsError> {
    sample_field(spec, x_min, x_max, y_min, y_max, nx, ny).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = leafPath)]
pub fn leaf_path_js(spec: &str, x: f64, y: f64, h: f64, steps: u32) -> Result<Path, JsError> {
    leaf_path(spec, x, y, h, steps).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = weightPath)]
pub fn weight_path_js(spec: &str, x: f64, y: f64, coeffs: &[f64], h: f64, steps: i32) -> Result<Path, JsError> {
    weight_path(spec, x, y, coeffs, h, steps).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = weightKernelDim)]
pub fn weight_kernel_dim_js(spec: &str, x: f64, y: f64) -> Result<usize, JsError> {
    weight_kernel_dim(spec, x, y).map_err(|e| JsError::new(&e))
}
