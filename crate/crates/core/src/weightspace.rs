//! The first layer's weights and biases as a manifold of their own: the
//! input point is held fixed and the network becomes a map from parameter
//! space to the output space. Null curves of its pullback metric change the
//! first-layer parameters without changing the output at that point.
//!
//! Parameters are flattened row-major (`A[0][0], A[0][1], ..., A[d1-1][d0-1]`)
//! followed by the bias (`b[0], ..., b[d1-1]`).

use nalgebra::{DMatrix, DVector};

use crate::error::{check_dim, Result};
use crate::leaftrace::{trace_leaf, CurveTrace, TraceConfig};
use crate::map::SmoothMap;
use crate::pullback::{kernel_of, KernelBasis};
use crate::smoothnet::{NetworkSpec, OutputMetric};

#[derive(Debug, Clone, PartialEq)]
pub struct WeightPoint {
    pub weights: DMatrix<f64>,
    pub bias: DVector<f64>,
}

impl WeightPoint {
    pub fn new(weights: DMatrix<f64>, bias: DVector<f64>) -> Result<Self> {
        check_dim("bias", weights.nrows(), bias.len())?;
        Ok(WeightPoint { weights, bias })
    }

    /// The current first-layer parameters of `net`.
    pub fn first_layer_of(net: &NetworkSpec) -> Self {
        let l = &net.layers()[0];
        WeightPoint {
            weights: l.weights().clone(),
            bias: l.bias().clone(),
        }
    }

    pub fn flat_len(rows: usize, cols: usize) -> usize {
        rows * (cols + 1)
    }

    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(Self::flat_len(self.weights.nrows(), self.weights.ncols()));
        for row in self.weights.row_iter() {
            out.extend(row.iter());
        }
        out.extend(self.bias.iter());
        out
    }

    pub fn unflatten(flat: &[f64], rows: usize, cols: usize) -> Result<Self> {
        check_dim("flattened parameters", Self::flat_len(rows, cols), flat.len())?;
        let weights = DMatrix::from_row_slice(rows, cols, &flat[..rows * cols]);
        let bias = DVector::from_column_slice(&flat[rows * cols..]);
        Ok(WeightPoint { weights, bias })
    }
}

/// The network as a function of its first-layer parameters at a fixed input.
#[derive(Debug, Clone)]
pub struct WeightMap<'a> {
    net: &'a NetworkSpec,
    x: DVector<f64>,
}

impl<'a> WeightMap<'a> {
    pub fn new(net: &'a NetworkSpec, x: &[f64]) -> Result<Self> {
        check_dim("data point", net.input_dim(), x.len())?;
        Ok(WeightMap {
            net,
            x: DVector::from_column_slice(x),
        })
    }

    pub fn rows(&self) -> usize {
        self.net.dim(1)
    }

    pub fn cols(&self) -> usize {
        self.net.dim(0)
    }

    fn pre_activation(&self, w: &[f64]) -> Result<DVector<f64>> {
        check_dim("flattened parameters", self.domain_dim(), w.len())?;
        let (rows, cols) = (self.rows(), self.cols());
        Ok(DVector::from_fn(rows, |a, _| {
            let row = &w[a * cols..(a + 1) * cols];
            row.iter().zip(self.x.iter()).map(|(p, x)| p * x).sum::<f64>() + w[rows * cols + a]
        }))
    }

    /// Output of the first layer at the fixed input.
    pub fn first_layer_output(&self, w: &[f64]) -> Result<DVector<f64>> {
        let act = self.net.layers()[0].activation();
        Ok(self.pre_activation(w)?.map(|z| act.apply(z)))
    }
}

impl SmoothMap for WeightMap<'_> {
    fn domain_dim(&self) -> usize {
        WeightPoint::flat_len(self.rows(), self.cols())
    }

    fn codomain_dim(&self) -> usize {
        self.net.output_dim()
    }

    fn output_metric(&self) -> &OutputMetric {
        self.net.output_metric()
    }

    fn eval(&self, w: &[f64]) -> Result<DVector<f64>> {
        let y = self.first_layer_output(w)?;
        if self.net.num_layers() == 1 {
            return Ok(y);
        }
        self.net.forward(2, self.net.num_layers(), y.as_slice())
    }

    fn eval_with_jacobian(&self, w: &[f64]) -> Result<(DVector<f64>, DMatrix<f64>)> {
        let z = self.pre_activation(w)?;
        let act = self.net.layers()[0].activation();
        let y = z.map(|v| act.apply(v));
        let (rows, cols) = (self.rows(), self.cols());
        // d y_a / d A_{ab} = F'(z_a) x_b, d y_a / d b_a = F'(z_a)
        let mut first = DMatrix::zeros(rows, self.domain_dim());
        for a in 0..rows {
            let fp = act.derivative(z[a]);
            for b in 0..cols {
                first[(a, a * cols + b)] = fp * self.x[b];
            }
            first[(a, rows * cols + a)] = fp;
        }
        if self.net.num_layers() == 1 {
            return Ok((y, first));
        }
        let (out, tail) = self.net.forward_with_jacobian(2, self.net.num_layers(), y.as_slice())?;
        Ok((out, tail * first))
    }
}

fn consistent(net: &NetworkSpec, w: &WeightPoint) -> Result<()> {
    check_dim("first-layer weight rows", net.dim(1), w.weights.nrows())?;
    check_dim("first-layer weight columns", net.dim(0), w.weights.ncols())?;
    check_dim("first-layer bias", net.dim(1), w.bias.len())
}

/// Jacobian of the network output at `x` with respect to the flattened
/// first-layer parameters, evaluated at `w`.
pub fn weight_jacobian(net: &NetworkSpec, x: &[f64], w: &WeightPoint) -> Result<DMatrix<f64>> {
    consistent(net, w)?;
    WeightMap::new(net, x)?.jacobian(&w.flatten())
}

/// Kernel of the pulled-back metric on first-layer parameter space.
pub fn weight_kernel(net: &NetworkSpec, x: &[f64], w: &WeightPoint, tol: Option<f64>) -> Result<KernelBasis> {
    consistent(net, w)?;
    kernel_of(&WeightMap::new(net, x)?, &w.flatten(), tol)
}

/// Trace a null curve in first-layer parameter space, following the kernel
/// combination `coeffs`. Vertices are flattened parameter vectors; outputs
/// are full-network outputs at `x`.
pub fn trace_weight_class(
    net: &NetworkSpec,
    x: &[f64],
    w: &WeightPoint,
    coeffs: &[f64],
    cfg: &TraceConfig,
) -> Result<CurveTrace> {
    consistent(net, w)?;
    let map = WeightMap::new(net, x)?;
    let cfg = TraceConfig {
        kernel_coeffs: Some(coeffs.to_vec()),
        ..cfg.clone()
    };
    trace_leaf(&map, &w.flatten(), &cfg)
}
