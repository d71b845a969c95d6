//! Pullback of the output metric to earlier spaces: the degenerate metric
//! `J^T G J`, its kernel (vertical vectors), seminorms, pseudolengths of
//! polylines and upper bounds on the pseudodistance.

use nalgebra::{DMatrix, DVector};

use crate::error::{check_dim, Error, Result};
use crate::linalg::{default_rank_tol, FullSvd};
use crate::map::{NetTail, SmoothMap};
use crate::smoothnet::NetworkSpec;

/// Pulled-back metric at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricTensor {
    pub point: DVector<f64>,
    pub matrix: DMatrix<f64>,
    pub rank: usize,
    /// Singular values of `S J`, descending (`S` is the square root of the output metric).
    pub singular_values: Vec<f64>,
    pub tol_used: f64,
}

impl MetricTensor {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

/// Orthonormal basis of the metric kernel at a point, one vector per column.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelBasis {
    pub point: DVector<f64>,
    pub vectors: DMatrix<f64>,
    pub rank: usize,
    pub singular_values: Vec<f64>,
    pub tol_used: f64,
}

impl KernelBasis {
    /// Kernel dimension `r`.
    pub fn dim(&self) -> usize {
        self.vectors.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.dim() == 0
    }

    pub fn vector(&self, j: usize) -> DVector<f64> {
        self.vectors.column(j).into_owned()
    }

    /// Orthogonal projection of `v` onto the kernel.
    pub fn project(&self, v: &DVector<f64>) -> DVector<f64> {
        &self.vectors * (self.vectors.transpose() * v)
    }
}

fn resolve_tol(tol: Option<f64>, dim: usize) -> Result<f64> {
    match tol {
        None => Ok(default_rank_tol(dim)),
        Some(t) if t > 0.0 && t < 1.0 => Ok(t),
        Some(t) => Err(Error::InvalidArgument(format!("rank tolerance must lie in (0, 1), got {t}"))),
    }
}

/// `S J` at `x`, where `J` is the Jacobian of `map`.
pub(crate) fn weighted_jacobian<M: SmoothMap>(map: &M, x: &[f64]) -> Result<DMatrix<f64>> {
    let j = map.jacobian(x)?;
    Ok(map.output_metric().sqrt() * j)
}

/// Pullback `J^T G J` of the output metric through `map` at `x`.
pub fn metric_of<M: SmoothMap>(map: &M, x: &[f64], tol: Option<f64>) -> Result<MetricTensor> {
    check_dim("point", map.domain_dim(), x.len())?;
    let tol_used = resolve_tol(tol, x.len())?;
    let j = map.jacobian(x)?;
    let g = map.output_metric();
    let raw = j.transpose() * (g.matrix() * &j);
    let matrix = (&raw + raw.transpose()) * 0.5;
    let svd = FullSvd::new(&(g.sqrt() * &j));
    Ok(MetricTensor {
        point: DVector::from_column_slice(x),
        matrix,
        rank: svd.rank(tol_used),
        singular_values: svd.singular_values,
        tol_used,
    })
}

/// Kernel of the pulled-back metric through `map` at `x`, read off the SVD
/// of `S J`.
pub fn kernel_of<M: SmoothMap>(map: &M, x: &[f64], tol: Option<f64>) -> Result<KernelBasis> {
    check_dim("point", map.domain_dim(), x.len())?;
    let tol_used = resolve_tol(tol, x.len())?;
    let svd = FullSvd::new(&weighted_jacobian(map, x)?);
    Ok(KernelBasis {
        point: DVector::from_column_slice(x),
        vectors: svd.null_space(tol_used),
        rank: svd.rank(tol_used),
        singular_values: svd.singular_values,
        tol_used,
    })
}

/// Pullback of the output metric to space `at_layer` (0 = input space),
/// using the default rank tolerance.
pub fn pullback_metric(net: &NetworkSpec, at_layer: usize, x: &[f64]) -> Result<MetricTensor> {
    metric_of(&NetTail::new(net, at_layer)?, x, None)
}

/// Kernel basis of the pullback metric on space `at_layer`. `tol` is the
/// relative singular-value threshold; `None` selects the default.
pub fn kernel_basis(
    net: &NetworkSpec,
    at_layer: usize,
    x: &[f64],
    tol: Option<f64>,
) -> Result<KernelBasis> {
    kernel_of(&NetTail::new(net, at_layer)?, x, tol)
}

/// `sqrt(v^T g v)`, clamped at zero.
pub fn seminorm(metric: &MetricTensor, v: &[f64]) -> Result<f64> {
    check_dim("tangent vector", metric.dim(), v.len())?;
    let v = DVector::from_column_slice(v);
    Ok(v.dot(&(&metric.matrix * &v)).max(0.0).sqrt())
}

/// Piecewise-linear curve, uniformly parameterized over its segments.
#[derive(Debug, Clone, PartialEq)]
pub struct Polyline {
    vertices: Vec<DVector<f64>>,
}

impl Polyline {
    pub fn new(vertices: Vec<DVector<f64>>) -> Result<Self> {
        if vertices.len() < 2 {
            return Err(Error::EmptyCurve);
        }
        let d = vertices[0].len();
        for v in &vertices {
            check_dim("polyline vertex", d, v.len())?;
        }
        Ok(Polyline { vertices })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::new(rows.iter().map(|r| DVector::from_column_slice(r)).collect())
    }

    /// Straight line from `a` to `b` split into `segments` equal pieces.
    pub fn straight(a: &DVector<f64>, b: &DVector<f64>, segments: usize) -> Result<Self> {
        check_dim("polyline endpoint", a.len(), b.len())?;
        let segments = segments.max(1);
        let vertices = (0..=segments)
            .map(|k| a.lerp(b, k as f64 / segments as f64))
            .collect();
        Self::new(vertices)
    }

    pub fn vertices(&self) -> &[DVector<f64>] {
        &self.vertices
    }

    pub fn dim(&self) -> usize {
        self.vertices[0].len()
    }

    pub fn num_segments(&self) -> usize {
        self.vertices.len() - 1
    }

    /// Split every segment at its midpoint.
    pub fn refine(&self) -> Self {
        let mut vertices = Vec::with_capacity(2 * self.vertices.len() - 1);
        for pair in self.vertices.windows(2) {
            vertices.push(pair[0].clone());
            vertices.push(pair[0].lerp(&pair[1], 0.5));
        }
        vertices.push(self.vertices.last().expect("non-empty").clone());
        Polyline { vertices }
    }

    /// Euclidean length in the ambient coordinates.
    pub fn euclidean_length(&self) -> f64 {
        self.vertices.windows(2).map(|p| (&p[1] - &p[0]).norm()).sum()
    }
}

/// Pseudolength of `curve` under the pullback through `map`: midpoint rule
/// with `quad_points` nodes per segment.
pub fn pseudolength_of<M: SmoothMap>(map: &M, curve: &Polyline, quad_points: usize) -> Result<f64> {
    if quad_points == 0 {
        return Err(Error::InvalidArgument("quad_points must be at least 1".into()));
    }
    check_dim("polyline", map.domain_dim(), curve.dim())?;
    let s = map.output_metric().sqrt();
    let mut total = 0.0;
    for pair in curve.vertices().windows(2) {
        let delta = &pair[1] - &pair[0];
        let mut seg = 0.0;
        for q in 0..quad_points {
            let t = (q as f64 + 0.5) / quad_points as f64;
            let p = pair[0].lerp(&pair[1], t);
            let j = map.jacobian(p.as_slice())?;
            // |delta|_g = |S J delta|, avoiding the cancellation in delta^T g delta
            seg += (s * (j * &delta)).norm();
        }
        total += seg / quad_points as f64;
    }
    Ok(total)
}

/// Pseudolength of a polyline on space `at_layer`.
pub fn pseudolength(net: &NetworkSpec, at_layer: usize, curve: &Polyline, quad_points: usize) -> Result<f64> {
    pseudolength_of(&NetTail::new(net, at_layer)?, curve, quad_points)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundOptions {
    /// Number of polyline segments at the finest level.
    pub segments: usize,
    /// Gradient-descent iterations per refinement level.
    pub descent_iters: usize,
    /// Initial descent step; adapted by backtracking.
    pub step: f64,
    /// Quadrature nodes per segment for pseudolength evaluation.
    pub quad_points: usize,
}

impl Default for BoundOptions {
    fn default() -> Self {
        BoundOptions {
            segments: 32,
            descent_iters: 200,
            step: 0.1,
            quad_points: 8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistanceBound {
    /// Upper bound on the pseudodistance.
    pub bound: f64,
    /// Pseudolength of the straight segment, evaluated at the finest resolution.
    pub straight: f64,
    /// Polyline realizing `bound`.
    pub polyline: Polyline,
    /// `false` when some level's descent ran out of iterations before its
    /// gradient vanished. The bound is valid either way.
    pub converged: bool,
}

/// Upper bound on the pseudodistance between `x` and `y` in the domain of `map`.
///
/// The bound is the smallest pseudolength among a family of polylines from
/// `x` to `y`: the straight segment and the result of gradient descent on
/// the discrete energy `sum |N(p_{k+1}) - N(p_k)|_G^2` of the image path.
/// Descent runs on a ladder of resolutions (halving `segments` while it is
/// even), each level starting from the refined optimum of the level below,
/// so doubling `segments` never raises the bound. It is never below zero and
/// is not the infimum.
pub fn upper_bound_of<M: SmoothMap>(map: &M, x: &[f64], y: &[f64], opts: &BoundOptions) -> Result<DistanceBound> {
    check_dim("start point", map.domain_dim(), x.len())?;
    check_dim("end point", map.domain_dim(), y.len())?;
    if opts.segments == 0 || opts.quad_points == 0 {
        return Err(Error::InvalidArgument("segments and quad_points must be positive".into()));
    }
    if opts.step.is_nan() || opts.step <= 0.0 {
        return Err(Error::InvalidArgument(format!("descent step must be positive, got {}", opts.step)));
    }
    let a = DVector::from_column_slice(x);
    let b = DVector::from_column_slice(y);
    let straight = pseudolength_of(map, &Polyline::straight(&a, &b, opts.segments)?, opts.quad_points)?;
    let mut result = bound_level(map, &a, &b, opts.segments, opts)?;
    if straight < result.bound {
        result.bound = straight;
        result.polyline = Polyline::straight(&a, &b, opts.segments)?;
    }
    result.straight = straight;
    Ok(result)
}

fn bound_level<M: SmoothMap>(
    map: &M,
    a: &DVector<f64>,
    b: &DVector<f64>,
    segments: usize,
    opts: &BoundOptions,
) -> Result<DistanceBound> {
    let coarse = if segments.is_multiple_of(2) {
        Some(bound_level(map, a, b, segments / 2, opts)?)
    } else {
        None
    };
    let init = match &coarse {
        Some(c) => c.polyline.refine(),
        None => Polyline::straight(a, b, segments)?,
    };
    let init_len = pseudolength_of(map, &init, opts.quad_points)?;
    let (descended, converged) = descend_energy(map, init.clone(), opts)?;
    let len = pseudolength_of(map, &descended, opts.quad_points)?;
    let (mut best, mut best_poly) = if len < init_len {
        (len, descended)
    } else {
        (init_len, init)
    };
    let mut all_converged = converged;
    if let Some(c) = coarse {
        all_converged &= c.converged;
        if c.bound < best {
            best = c.bound;
            best_poly = c.polyline.refine();
        }
    }
    Ok(DistanceBound {
        bound: best.max(0.0),
        straight: f64::NAN,
        polyline: best_poly,
        converged: all_converged,
    })
}

fn image_energy(g: &DMatrix<f64>, outs: &[DVector<f64>]) -> f64 {
    outs.windows(2)
        .map(|p| {
            let d = &p[1] - &p[0];
            d.dot(&(g * &d))
        })
        .sum()
}

fn descend_energy<M: SmoothMap>(map: &M, mut poly: Polyline, opts: &BoundOptions) -> Result<(Polyline, bool)> {
    let g = map.output_metric().matrix().clone();
    let n = poly.vertices.len();
    if n <= 2 {
        return Ok((poly, true));
    }
    let eval_all = |p: &Polyline| -> Result<Vec<(DVector<f64>, DMatrix<f64>)>> {
        p.vertices.iter().map(|v| map.eval_with_jacobian(v.as_slice())).collect()
    };
    let mut state = eval_all(&poly)?;
    let outs = |s: &[(DVector<f64>, DMatrix<f64>)]| s.iter().map(|(o, _)| o.clone()).collect::<Vec<_>>();
    let mut energy = image_energy(&g, &outs(&state));
    let mut step = opts.step;
    for _ in 0..opts.descent_iters {
        let mut grad = vec![DVector::zeros(poly.dim()); n];
        let mut gnorm2 = 0.0;
        for k in 1..n - 1 {
            let lap = &state[k].0 * 2.0 - &state[k - 1].0 - &state[k + 1].0;
            grad[k] = state[k].1.transpose() * (&g * lap) * 2.0;
            gnorm2 += grad[k].norm_squared();
        }
        if gnorm2.sqrt() <= 1e-12 * (1.0 + energy) {
            return Ok((poly, true));
        }
        loop {
            let mut trial = poly.clone();
            for (v, g) in trial.vertices[1..n - 1].iter_mut().zip(&grad[1..n - 1]) {
                *v -= g * step;
            }
            let trial_state = eval_all(&trial)?;
            let trial_energy = image_energy(&g, &outs(&trial_state));
            if trial_energy < energy {
                poly = trial;
                state = trial_state;
                energy = trial_energy;
                step *= 1.5;
                break;
            }
            step *= 0.5;
            if step < 1e-14 {
                return Ok((poly, true));
            }
        }
    }
    Ok((poly, false))
}

/// Upper bound on the pseudodistance between two input points.
pub fn pseudodistance_upper_bound(
    net: &NetworkSpec,
    x: &[f64],
    y: &[f64],
    opts: &BoundOptions,
) -> Result<DistanceBound> {
    upper_bound_of(net, x, y, opts)
}

/// Riemannian length of the polyline through `points` under a constant metric.
pub fn constant_metric_length(sqrt_metric: &DMatrix<f64>, points: &[DVector<f64>]) -> f64 {
    points
        .windows(2)
        .map(|p| (sqrt_metric * (&p[1] - &p[0])).norm())
        .sum()
}
