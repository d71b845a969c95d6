//! Smooth fully-connected networks: a chain of layers `x -> F(Ax + b)` ending
//! in an output space carrying a constant Riemannian metric.
//!
//! Layers are numbered from 1 to `n`. Layer `i` maps the space of dimension
//! `d_{i-1}` to the space of dimension `d_i`; space 0 is the input space.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::activation::Activation;
use crate::error::{check_dim, Error, Result};
use crate::linalg::{is_symmetric, sym_sqrt, FullSvd};

#[derive(Debug, Clone, PartialEq)]
pub struct SmoothLayer {
    weights: DMatrix<f64>,
    bias: DVector<f64>,
    activation: Activation,
}

impl SmoothLayer {
    pub fn new(weights: DMatrix<f64>, bias: DVector<f64>, activation: Activation) -> Result<Self> {
        if weights.nrows() == 0 || weights.ncols() == 0 {
            return Err(Error::InvalidNetwork("empty weight matrix".into()));
        }
        check_dim("layer bias", weights.nrows(), bias.len())?;
        if weights.iter().chain(bias.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidNetwork("non-finite weight or bias".into()));
        }
        Ok(SmoothLayer {
            weights,
            bias,
            activation,
        })
    }

    /// Layer with zero bias.
    pub fn unbiased(weights: DMatrix<f64>, activation: Activation) -> Result<Self> {
        let bias = DVector::zeros(weights.nrows());
        Self::new(weights, bias, activation)
    }

    pub fn weights(&self) -> &DMatrix<f64> {
        &self.weights
    }

    pub fn bias(&self) -> &DVector<f64> {
        &self.bias
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn in_dim(&self) -> usize {
        self.weights.ncols()
    }

    pub fn out_dim(&self) -> usize {
        self.weights.nrows()
    }

    pub fn pre_activation(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        check_dim("layer input", self.in_dim(), x.len())?;
        Ok(&self.weights * x + &self.bias)
    }

    pub fn apply(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        let act = self.activation;
        Ok(self.pre_activation(x)?.map(|z| act.apply(z)))
    }

    /// `diag(F'(Ax + b)) * A`.
    pub fn jacobian(&self, x: &DVector<f64>) -> Result<DMatrix<f64>> {
        let z = self.pre_activation(x)?;
        Ok(scale_rows(&self.weights, &z, self.activation))
    }

    /// Layer output together with its Jacobian, sharing the pre-activation.
    pub(crate) fn apply_with_jacobian(&self, x: &DVector<f64>) -> Result<(DVector<f64>, DMatrix<f64>)> {
        let z = self.pre_activation(x)?;
        let act = self.activation;
        Ok((z.map(|v| act.apply(v)), scale_rows(&self.weights, &z, act)))
    }

    pub fn is_full_rank(&self, tol: f64) -> bool {
        FullSvd::new(&self.weights).rank(tol) == self.in_dim().min(self.out_dim())
    }
}

fn scale_rows(a: &DMatrix<f64>, z: &DVector<f64>, act: Activation) -> DMatrix<f64> {
    let mut j = a.clone();
    for (mut row, &zi) in j.row_iter_mut().zip(z.iter()) {
        row *= act.derivative(zi);
    }
    j
}

/// Constant symmetric positive-definite metric on the output space.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputMetric {
    matrix: DMatrix<f64>,
    sqrt: DMatrix<f64>,
}

impl OutputMetric {
    pub fn identity(dim: usize) -> Self {
        OutputMetric {
            matrix: DMatrix::identity(dim, dim),
            sqrt: DMatrix::identity(dim, dim),
        }
    }

    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::NonSpdOutputMetric(format!(
                "matrix is {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if matrix.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonSpdOutputMetric("non-finite entry".into()));
        }
        if !is_symmetric(&matrix, 1e-12) {
            return Err(Error::NonSpdOutputMetric("matrix is not symmetric".into()));
        }
        if matrix == DMatrix::identity(matrix.nrows(), matrix.ncols()) {
            return Ok(Self::identity(matrix.nrows()));
        }
        let min_eig = SymmetricEigen::new(matrix.clone()).eigenvalues.min();
        if min_eig <= 0.0 {
            return Err(Error::NonSpdOutputMetric(format!(
                "smallest eigenvalue {min_eig:e} is not positive"
            )));
        }
        let sqrt = sym_sqrt(&matrix);
        Ok(OutputMetric { matrix, sqrt })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// Symmetric square root `S` with `S * S = G`.
    pub fn sqrt(&self) -> &DMatrix<f64> {
        &self.sqrt
    }

    /// `sqrt(v^T G v)`.
    pub fn norm(&self, v: &DVector<f64>) -> f64 {
        (&self.sqrt * v).norm()
    }
}

/// A smooth network: ordered layers plus the output-space metric.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkSpec {
    layers: Vec<SmoothLayer>,
    output_metric: OutputMetric,
}

impl NetworkSpec {
    /// Network with the Euclidean metric on its output space.
    pub fn new(layers: Vec<SmoothLayer>) -> Result<Self> {
        let dim = layers.last().map(|l| l.out_dim()).unwrap_or(0);
        Self::with_metric(layers, OutputMetric::identity(dim))
    }

    pub fn with_metric(layers: Vec<SmoothLayer>, output_metric: OutputMetric) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::InvalidNetwork("network has no layers".into()));
        }
        for (i, pair) in layers.windows(2).enumerate() {
            if pair[1].in_dim() != pair[0].out_dim() {
                return Err(Error::InvalidNetwork(format!(
                    "layer {} expects input dimension {} but layer {} outputs {}",
                    i + 2,
                    pair[1].in_dim(),
                    i + 1,
                    pair[0].out_dim()
                )));
            }
        }
        let out = layers.last().expect("non-empty").out_dim();
        if output_metric.dim() != out {
            return Err(Error::NonSpdOutputMetric(format!(
                "metric is {0}x{0} but the output dimension is {out}",
                output_metric.dim()
            )));
        }
        Ok(NetworkSpec {
            layers,
            output_metric,
        })
    }

    pub fn layers(&self) -> &[SmoothLayer] {
        &self.layers
    }

    /// Layer `i`, counted from 1.
    pub fn layer(&self, i: usize) -> Option<&SmoothLayer> {
        i.checked_sub(1).and_then(|k| self.layers.get(k))
    }

    pub fn num_layers(&self) -> usize {
        self.layers.len()
    }

    pub fn output_metric(&self) -> &OutputMetric {
        &self.output_metric
    }

    /// Dimensions `d_0, d_1, ..., d_n`.
    pub fn dims(&self) -> Vec<usize> {
        std::iter::once(self.layers[0].in_dim())
            .chain(self.layers.iter().map(|l| l.out_dim()))
            .collect()
    }

    /// Dimension of space `i` (0 is the input space).
    pub fn dim(&self, i: usize) -> usize {
        if i == 0 {
            self.layers[0].in_dim()
        } else {
            self.layers[i - 1].out_dim()
        }
    }

    pub fn input_dim(&self) -> usize {
        self.dim(0)
    }

    pub fn output_dim(&self) -> usize {
        self.dim(self.num_layers())
    }

    /// Same network with the first layer's weights and bias replaced.
    pub fn with_first_layer(&self, weights: DMatrix<f64>, bias: DVector<f64>) -> Result<Self> {
        let first = &self.layers[0];
        check_dim("first-layer weight rows", first.out_dim(), weights.nrows())?;
        check_dim("first-layer weight columns", first.in_dim(), weights.ncols())?;
        let mut layers = self.layers.clone();
        layers[0] = SmoothLayer::new(weights, bias, first.activation())?;
        Ok(NetworkSpec {
            layers,
            output_metric: self.output_metric.clone(),
        })
    }

    fn check_range(&self, from: usize, to: usize) -> Result<()> {
        if from == 0 || from > to || to > self.num_layers() {
            return Err(Error::InvalidRange {
                from,
                to,
                layers: self.num_layers(),
            });
        }
        Ok(())
    }

    /// Outputs of layers `from..=to` in order, starting from `x` in space `from - 1`.
    pub fn forward_layers(&self, from: usize, to: usize, x: &[f64]) -> Result<Vec<DVector<f64>>> {
        self.check_range(from, to)?;
        check_dim("input point", self.dim(from - 1), x.len())?;
        let mut outs = Vec::with_capacity(to - from + 1);
        let mut cur = DVector::from_column_slice(x);
        for layer in &self.layers[from - 1..to] {
            cur = layer.apply(&cur)?;
            outs.push(cur.clone());
        }
        Ok(outs)
    }

    /// `Λ_to ∘ ... ∘ Λ_from (x)`.
    pub fn forward(&self, from: usize, to: usize, x: &[f64]) -> Result<DVector<f64>> {
        Ok(self.forward_layers(from, to, x)?.pop().expect("non-empty range"))
    }

    /// Full network output.
    pub fn output(&self, x: &[f64]) -> Result<DVector<f64>> {
        self.forward(1, self.num_layers(), x)
    }

    /// Value and Jacobian of the composite map over layers `from..=to`.
    pub fn forward_with_jacobian(
        &self,
        from: usize,
        to: usize,
        x: &[f64],
    ) -> Result<(DVector<f64>, DMatrix<f64>)> {
        self.check_range(from, to)?;
        check_dim("input point", self.dim(from - 1), x.len())?;
        let mut cur = DVector::from_column_slice(x);
        let mut jac = DMatrix::identity(cur.len(), cur.len());
        for layer in &self.layers[from - 1..to] {
            let (next, lj) = layer.apply_with_jacobian(&cur)?;
            jac = lj * jac;
            cur = next;
        }
        Ok((cur, jac))
    }

    /// Jacobian of the composite map over layers `from..=to` at `x`: product
    /// of the layer Jacobians along the forward pass.
    pub fn composite_jacobian(&self, from: usize, to: usize, x: &[f64]) -> Result<DMatrix<f64>> {
        Ok(self.forward_with_jacobian(from, to, x)?.1)
    }

    /// Central-difference approximation of [`Self::composite_jacobian`];
    /// truncation error is O(eps^2).
    pub fn finite_diff_jacobian(
        &self,
        from: usize,
        to: usize,
        x: &[f64],
        eps: f64,
    ) -> Result<DMatrix<f64>> {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::InvalidArgument(format!("eps must be positive, got {eps}")));
        }
        self.check_range(from, to)?;
        check_dim("input point", self.dim(from - 1), x.len())?;
        let mut jac = DMatrix::zeros(self.dim(to), x.len());
        let mut probe = x.to_vec();
        for j in 0..x.len() {
            probe[j] = x[j] + eps;
            let plus = self.forward(from, to, &probe)?;
            probe[j] = x[j] - eps;
            let minus = self.forward(from, to, &probe)?;
            probe[j] = x[j];
            jac.set_column(j, &((plus - minus) / (2.0 * eps)));
        }
        Ok(jac)
    }

    /// Singular-value report on every weight matrix.
    pub fn check_full_rank(&self, tol: f64) -> Vec<LayerRankReport> {
        self.layers
            .iter()
            .enumerate()
            .map(|(i, layer)| {
                let svd = FullSvd::new(layer.weights());
                let rank = svd.rank(tol.max(0.0));
                let expected = layer.in_dim().min(layer.out_dim());
                LayerRankReport {
                    layer: i + 1,
                    rows: layer.out_dim(),
                    cols: layer.in_dim(),
                    rank,
                    largest_singular_value: svd.sigma_max(),
                    smallest_singular_value: svd.singular_values.last().copied().unwrap_or(0.0),
                    pass: rank == expected,
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct LayerRankReport {
    pub layer: usize,
    pub rows: usize,
    pub cols: usize,
    pub rank: usize,
    pub largest_singular_value: f64,
    pub smallest_singular_value: f64,
    pub pass: bool,
}
