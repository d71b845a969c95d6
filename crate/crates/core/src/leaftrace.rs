//! Null-curve tracing: integrate `γ' = v(γ)` with `v` a unit field in the
//! kernel of the pulled-back metric, re-projecting onto the fiber
//! `N^{-1}(N(p))` after every step. Also decides whether two points can be
//! shown to share a fiber component.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{check_dim, Error, Result};
use crate::linalg::{default_rank_tol, min_norm_solve, procrustes_align};
use crate::map::SmoothMap;
use crate::pullback::{kernel_of, pseudolength_of, Polyline};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceConfig {
    pub step_size: f64,
    /// Signed step count; negative values trace against the initial direction.
    pub n_steps: i64,
    pub corrector_tol: f64,
    pub corrector_max_iters: usize,
    /// Orients the first step (the kernel vector is flipped to have a
    /// non-negative dot product with it). With a multi-dimensional kernel and
    /// no `kernel_coeffs`, its projection onto the kernel picks the direction.
    pub seed_direction: Option<Vec<f64>>,
    /// Combination of kernel basis vectors to follow when the kernel has
    /// dimension greater than one.
    pub kernel_coeffs: Option<Vec<f64>>,
    /// Relative rank threshold; `None` uses the default.
    pub rank_tol: Option<f64>,
}

impl Default for TraceConfig {
    fn default() -> Self {
        TraceConfig {
            step_size: 0.02,
            n_steps: 100,
            corrector_tol: 1e-8,
            corrector_max_iters: 25,
            seed_direction: None,
            kernel_coeffs: None,
            rank_tol: None,
        }
    }
}

impl TraceConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.step_size > 0.0 && self.step_size.is_finite()) {
            return Err(Error::InvalidArgument(format!("step size must be positive, got {}", self.step_size)));
        }
        if self.corrector_tol.is_nan() || self.corrector_tol <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "corrector tolerance must be positive, got {}",
                self.corrector_tol
            )));
        }
        Ok(())
    }
}

/// Orientation carried from one evaluation of the kernel field to the next:
/// the aligned kernel frame, the coefficients in that frame and the
/// resulting unit direction.
#[derive(Debug, Clone, PartialEq)]
pub struct Heading {
    pub frame: DMatrix<f64>,
    pub coeffs: DVector<f64>,
    pub direction: DVector<f64>,
}

impl Heading {
    pub fn kernel_dim(&self) -> usize {
        self.frame.ncols()
    }
}

fn unit_or_zero(v: DVector<f64>) -> DVector<f64> {
    let n = v.norm();
    if n > 1e-300 {
        v / n
    } else {
        v * 0.0
    }
}

/// Kernel direction at `x`.
///
/// With a previous heading the new kernel frame is rotated onto the old one
/// (orthogonal Procrustes) and the old coefficients are reused. Without one,
/// the coefficients come from `coeffs`, then from `seed`, and for a
/// one-dimensional kernel default to the single basis vector. For a
/// one-dimensional kernel the result is flipped to agree with the previous
/// direction (or `seed`).
pub fn heading_at<M: SmoothMap>(
    map: &M,
    x: &[f64],
    rank_tol: Option<f64>,
    prev: Option<&Heading>,
    seed: Option<&[f64]>,
    coeffs: Option<&[f64]>,
) -> Result<Heading> {
    let kernel = kernel_of(map, x, rank_tol)?;
    let r = kernel.dim();
    if let Some(p) = prev {
        if p.kernel_dim() != r {
            return Err(Error::StepRejected {
                from: p.kernel_dim(),
                to: r,
            });
        }
    }
    if r == 0 {
        return Err(Error::EmptyKernel);
    }
    let mut frame = match prev {
        Some(p) => procrustes_align(&kernel.vectors, &p.frame),
        None => kernel.vectors,
    };
    let coeffs = match (prev, coeffs, seed) {
        (Some(p), _, _) => p.coeffs.clone(),
        (None, Some(c), _) => {
            check_dim("kernel coefficients", r, c.len())?;
            DVector::from_column_slice(c)
        }
        (None, None, _) if r == 1 => DVector::from_element(1, 1.0),
        (None, None, Some(s)) => {
            check_dim("seed direction", x.len(), s.len())?;
            frame.transpose() * DVector::from_column_slice(s)
        }
        (None, None, None) => return Err(Error::AmbiguousDirection(r)),
    };
    let mut direction = unit_or_zero(&frame * &coeffs);
    if r == 1 {
        let reference = prev.map(|p| p.direction.clone()).or_else(|| seed.map(DVector::from_column_slice));
        if let Some(reference) = reference {
            check_dim("reference direction", x.len(), reference.len())?;
            if direction.dot(&reference) < 0.0 {
                direction.neg_mut();
                frame.neg_mut();
            }
        }
    }
    Ok(Heading {
        frame,
        coeffs,
        direction,
    })
}

/// Unit vector in the metric kernel at `x`. A one-dimensional kernel is
/// oriented to agree with `prev`; a larger kernel needs `coeffs`.
pub fn null_direction<M: SmoothMap>(
    map: &M,
    x: &[f64],
    prev: Option<&[f64]>,
    coeffs: Option<&[f64]>,
) -> Result<DVector<f64>> {
    let kernel = kernel_of(map, x, None)?;
    if kernel.dim() > 1 && coeffs.is_none() {
        return Err(Error::AmbiguousDirection(kernel.dim()));
    }
    Ok(heading_at(map, x, None, None, prev, coeffs)?.direction)
}

/// One classical Runge-Kutta step of size `h` along the kernel field, each
/// stage oriented against the previous one. Returns the new point and the
/// heading at the last stage.
pub fn rk4_step_with<M: SmoothMap>(
    map: &M,
    x: &DVector<f64>,
    h: f64,
    heading: &Heading,
    rank_tol: Option<f64>,
) -> Result<(DVector<f64>, Heading)> {
    let k1 = heading_at(map, x.as_slice(), rank_tol, Some(heading), None, None)?;
    let p2 = x + &k1.direction * (0.5 * h);
    let k2 = heading_at(map, p2.as_slice(), rank_tol, Some(&k1), None, None)?;
    let p3 = x + &k2.direction * (0.5 * h);
    let k3 = heading_at(map, p3.as_slice(), rank_tol, Some(&k2), None, None)?;
    let p4 = x + &k3.direction * h;
    let k4 = heading_at(map, p4.as_slice(), rank_tol, Some(&k3), None, None)?;
    let slope = &k1.direction + &k2.direction * 2.0 + &k3.direction * 2.0 + &k4.direction;
    Ok((x + slope * (h / 6.0), k4))
}

/// One RK4 step from `x` with the first stage oriented by `prev`.
pub fn rk4_null_step<M: SmoothMap>(
    map: &M,
    x: &[f64],
    h: f64,
    prev: Option<&[f64]>,
    coeffs: Option<&[f64]>,
) -> Result<DVector<f64>> {
    let start = heading_at(map, x, None, None, prev, coeffs)?;
    Ok(rk4_step_with(map, &DVector::from_column_slice(x), h, &start, None)?.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    pub point: DVector<f64>,
    /// `|N(point) - target|` in the output metric.
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Gauss-Newton projection of `x` onto `N^{-1}(target)` with minimum-norm
/// steps, which move orthogonally to the kernel. On failure the best iterate
/// is returned with `converged == false`.
pub fn project_to_fiber<M: SmoothMap>(
    map: &M,
    x: &[f64],
    target: &[f64],
    tol: f64,
    max_iters: usize,
) -> Result<Projection> {
    project_with_tol(map, x, target, tol, max_iters, None)
}

pub(crate) fn project_with_tol<M: SmoothMap>(
    map: &M,
    x: &[f64],
    target: &[f64],
    tol: f64,
    max_iters: usize,
    rank_tol: Option<f64>,
) -> Result<Projection> {
    check_dim("fiber target", map.codomain_dim(), target.len())?;
    let s = map.output_metric().sqrt();
    let target = DVector::from_column_slice(target);
    let rank_tol = rank_tol.unwrap_or_else(|| default_rank_tol(x.len()));
    let mut point = DVector::from_column_slice(x);
    let (value, mut jac) = map.eval_with_jacobian(x)?;
    let mut weighted = s * (value - &target);
    let mut residual = weighted.norm();
    let mut iterations = 0;
    while residual > tol && iterations < max_iters {
        iterations += 1;
        let step = min_norm_solve(&(s * &jac), &weighted, rank_tol);
        let mut scale = 1.0;
        let mut accepted = None;
        for _ in 0..40 {
            let trial = &point - &step * scale;
            let (v, j) = map.eval_with_jacobian(trial.as_slice())?;
            let w = s * (v - &target);
            if w.norm() < residual {
                accepted = Some((trial, j, w));
                break;
            }
            scale *= 0.5;
        }
        match accepted {
            Some((p, j, w)) => {
                point = p;
                jac = j;
                residual = w.norm();
                weighted = w;
            }
            None => break,
        }
    }
    Ok(Projection {
        converged: residual <= tol,
        point,
        residual,
        iterations,
    })
}

/// Why a trace stopped before its step budget.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum Truncation {
    EmptyKernel,
    StepRejected { from: usize, to: usize },
    CorrectorFailed { residual: f64 },
}

impl std::fmt::Display for Truncation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Truncation::EmptyKernel => write!(f, "empty_kernel"),
            Truncation::StepRejected { from, to } => write!(f, "step_rejected kernel dimension {from} -> {to}"),
            Truncation::CorrectorFailed { residual } => write!(f, "corrector_failed residual {residual:e}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveTrace {
    /// Signed curve parameter of each vertex (step index times step size).
    pub params: Vec<f64>,
    pub vertices: Vec<DVector<f64>>,
    pub outputs: Vec<DVector<f64>>,
    /// `|N(vertex) - N(start)|` in the output metric.
    pub drift: Vec<f64>,
    pub corrector_iters: Vec<usize>,
    pub pseudolength_estimate: f64,
    /// Kernel direction at the end of the trace, for continuing or reversing it.
    pub final_direction: Option<DVector<f64>>,
    pub truncated: Option<Truncation>,
}

impl CurveTrace {
    fn start<M: SmoothMap>(map: &M, p: &[f64]) -> Result<Self> {
        let out = map.eval(p)?;
        Ok(CurveTrace {
            params: vec![0.0],
            vertices: vec![DVector::from_column_slice(p)],
            outputs: vec![out],
            drift: vec![0.0],
            corrector_iters: vec![0],
            pseudolength_estimate: 0.0,
            final_direction: None,
            truncated: None,
        })
    }

    fn push(&mut self, t: f64, v: DVector<f64>, out: DVector<f64>, drift: f64, iters: usize) {
        self.params.push(t);
        self.vertices.push(v);
        self.outputs.push(out);
        self.drift.push(drift);
        self.corrector_iters.push(iters);
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn max_drift(&self) -> f64 {
        self.drift.iter().copied().fold(0.0, f64::max)
    }

    pub fn last(&self) -> &DVector<f64> {
        self.vertices.last().expect("trace always holds its start")
    }

    pub fn polyline(&self) -> Option<Polyline> {
        Polyline::new(self.vertices.clone()).ok()
    }

    fn finish<M: SmoothMap>(mut self, map: &M) -> Result<Self> {
        if let Some(poly) = self.polyline() {
            self.pseudolength_estimate = pseudolength_of(map, &poly, 4)?;
        }
        Ok(self)
    }
}

/// Predictor-corrector trace of the fiber component through `p`: `|n_steps|`
/// RK4 steps along the kernel field, each followed by a projection back
/// onto `N^{-1}(N(p))`. Every recorded vertex has drift at most
/// `corrector_tol`. Errors at `p` itself are returned; failures later on
/// stop the trace and are reported in [`CurveTrace::truncated`].
pub fn trace_leaf<M: SmoothMap>(map: &M, p: &[f64], cfg: &TraceConfig) -> Result<CurveTrace> {
    cfg.validate()?;
    check_dim("start point", map.domain_dim(), p.len())?;
    let mut heading = heading_at(
        map,
        p,
        cfg.rank_tol,
        None,
        cfg.seed_direction.as_deref(),
        cfg.kernel_coeffs.as_deref(),
    )?;
    let mut trace = CurveTrace::start(map, p)?;
    let target = trace.outputs[0].clone();
    let s = map.output_metric().sqrt();
    let h = cfg.step_size * cfg.n_steps.signum() as f64;
    let mut x = trace.vertices[0].clone();
    for k in 1..=cfg.n_steps.unsigned_abs() {
        let (predicted, next_heading) = match rk4_step_with(map, &x, h, &heading, cfg.rank_tol) {
            Ok(step) => step,
            Err(Error::EmptyKernel) => {
                trace.truncated = Some(Truncation::EmptyKernel);
                break;
            }
            Err(Error::StepRejected { from, to }) => {
                trace.truncated = Some(Truncation::StepRejected { from, to });
                break;
            }
            Err(e) => return Err(e),
        };
        let proj = project_with_tol(
            map,
            predicted.as_slice(),
            target.as_slice(),
            cfg.corrector_tol,
            cfg.corrector_max_iters,
            cfg.rank_tol,
        )?;
        if !proj.converged {
            trace.truncated = Some(Truncation::CorrectorFailed { residual: proj.residual });
            break;
        }
        let out = map.eval(proj.point.as_slice())?;
        let drift = (s * (&out - &target)).norm();
        x = proj.point.clone();
        trace.push(k as f64 * h, proj.point, out, drift, proj.iterations);
        heading = next_heading;
    }
    trace.final_direction = Some(heading.direction);
    trace.finish(map)
}

/// Trace from many seeds concurrently; results are in seed order.
pub fn trace_many<M: SmoothMap + Sync>(map: &M, seeds: &[Vec<f64>], cfg: &TraceConfig) -> Vec<Result<CurveTrace>> {
    let workers = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1).min(seeds.len().max(1));
    let chunk = seeds.len().div_ceil(workers).max(1);
    std::thread::scope(|scope| {
        let handles: Vec<_> = seeds
            .chunks(chunk)
            .map(|part| scope.spawn(move || part.iter().map(|p| trace_leaf(map, p, cfg)).collect::<Vec<_>>()))
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("trace worker panicked"))
            .collect()
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    DifferentFiber,
    Connected,
    SameFiberUnknown,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FiberCertificate {
    pub verdict: Verdict,
    /// `|N(x) - N(y)|` in the output metric.
    pub output_gap: f64,
    /// Distance from the last explored point to `y`, when a search ran.
    pub endpoint_distance: Option<f64>,
    pub spatial_tol: f64,
    /// Path explored from `x`; for `Connected` it ends within `spatial_tol` of `y`.
    pub evidence: Option<CurveTrace>,
}

/// Spatial tolerance used to declare that a trace reached `y`.
pub fn connect_tolerance(y: &[f64]) -> f64 {
    1e-6 * (1.0 + DVector::from_column_slice(y).norm())
}

/// Decide whether `x` and `y` lie in one equivalence class. Different
/// outputs rule it out. Otherwise a greedy search walks from `x` along the
/// fiber, each step following the kernel projection of `y - z`, for at most
/// `|cfg.n_steps|` steps of length `cfg.step_size`.
pub fn same_class_certificate<M: SmoothMap>(
    map: &M,
    x: &[f64],
    y: &[f64],
    cfg: &TraceConfig,
    out_tol: f64,
) -> Result<FiberCertificate> {
    cfg.validate()?;
    check_dim("first point", map.domain_dim(), x.len())?;
    check_dim("second point", map.domain_dim(), y.len())?;
    let s = map.output_metric().sqrt();
    let nx = map.eval(x)?;
    let ny = map.eval(y)?;
    let output_gap = (s * (&nx - &ny)).norm();
    let spatial_tol = connect_tolerance(y);
    if output_gap > out_tol {
        return Ok(FiberCertificate {
            verdict: Verdict::DifferentFiber,
            output_gap,
            endpoint_distance: None,
            spatial_tol,
            evidence: None,
        });
    }
    let goal = DVector::from_column_slice(y);
    let mut trace = CurveTrace::start(map, x)?;
    let mut z = trace.vertices[0].clone();
    let mut walked = 0.0;
    for _ in 0..cfg.n_steps.unsigned_abs() {
        let gap = (&goal - &z).norm();
        if gap <= spatial_tol {
            break;
        }
        let kernel = kernel_of(map, z.as_slice(), cfg.rank_tol)?;
        if kernel.is_empty() {
            trace.truncated = Some(Truncation::EmptyKernel);
            break;
        }
        let toward = kernel.project(&(&goal - &z));
        let reach = toward.norm();
        if reach <= 1e-3 * spatial_tol {
            break;
        }
        let len = reach.min(cfg.step_size);
        let predicted = &z + toward * (len / reach);
        let proj = project_with_tol(
            map,
            predicted.as_slice(),
            nx.as_slice(),
            cfg.corrector_tol,
            cfg.corrector_max_iters,
            cfg.rank_tol,
        )?;
        if !proj.converged {
            trace.truncated = Some(Truncation::CorrectorFailed { residual: proj.residual });
            break;
        }
        walked += len;
        let out = map.eval(proj.point.as_slice())?;
        let drift = (s * (&out - &nx)).norm();
        z = proj.point.clone();
        trace.push(walked, proj.point, out, drift, proj.iterations);
    }
    let endpoint_distance = (&goal - &z).norm();
    let verdict = if endpoint_distance <= spatial_tol {
        Verdict::Connected
    } else {
        Verdict::SameFiberUnknown
    };
    Ok(FiberCertificate {
        verdict,
        output_gap,
        endpoint_distance: Some(endpoint_distance),
        spatial_tol,
        evidence: Some(trace.finish(map)?),
    })
}
