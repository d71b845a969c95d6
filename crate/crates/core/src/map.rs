//! The smooth-map abstraction shared by the metric, kernel and tracing code.

use nalgebra::{DMatrix, DVector};

use crate::error::{check_dim, Error, Result};
use crate::smoothnet::{NetworkSpec, OutputMetric};

/// A smooth map into a space with a constant metric. The pullback of that
/// metric is what gives the domain its (possibly degenerate) geometry.
pub trait SmoothMap {
    fn domain_dim(&self) -> usize;
    fn codomain_dim(&self) -> usize;
    fn output_metric(&self) -> &OutputMetric;
    fn eval(&self, x: &[f64]) -> Result<DVector<f64>>;
    fn eval_with_jacobian(&self, x: &[f64]) -> Result<(DVector<f64>, DMatrix<f64>)>;

    fn jacobian(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        Ok(self.eval_with_jacobian(x)?.1)
    }
}

impl<M: SmoothMap + ?Sized> SmoothMap for &M {
    fn domain_dim(&self) -> usize {
        (**self).domain_dim()
    }
    fn codomain_dim(&self) -> usize {
        (**self).codomain_dim()
    }
    fn output_metric(&self) -> &OutputMetric {
        (**self).output_metric()
    }
    fn eval(&self, x: &[f64]) -> Result<DVector<f64>> {
        (**self).eval(x)
    }
    fn eval_with_jacobian(&self, x: &[f64]) -> Result<(DVector<f64>, DMatrix<f64>)> {
        (**self).eval_with_jacobian(x)
    }
}

/// The tail of a network seen from space `at_layer`: layers
/// `at_layer + 1 ..= n`. For `at_layer == n` this is the identity on the
/// output space.
#[derive(Debug, Clone, Copy)]
pub struct NetTail<'a> {
    net: &'a NetworkSpec,
    at_layer: usize,
}

impl<'a> NetTail<'a> {
    pub fn new(net: &'a NetworkSpec, at_layer: usize) -> Result<Self> {
        if at_layer > net.num_layers() {
            return Err(Error::InvalidRange {
                from: at_layer + 1,
                to: net.num_layers(),
                layers: net.num_layers(),
            });
        }
        Ok(NetTail { net, at_layer })
    }

    pub fn net(&self) -> &'a NetworkSpec {
        self.net
    }

    pub fn at_layer(&self) -> usize {
        self.at_layer
    }

    fn is_identity(&self) -> bool {
        self.at_layer == self.net.num_layers()
    }
}

impl SmoothMap for NetTail<'_> {
    fn domain_dim(&self) -> usize {
        self.net.dim(self.at_layer)
    }

    fn codomain_dim(&self) -> usize {
        self.net.output_dim()
    }

    fn output_metric(&self) -> &OutputMetric {
        self.net.output_metric()
    }

    fn eval(&self, x: &[f64]) -> Result<DVector<f64>> {
        if self.is_identity() {
            check_dim("input point", self.domain_dim(), x.len())?;
            return Ok(DVector::from_column_slice(x));
        }
        self.net.forward(self.at_layer + 1, self.net.num_layers(), x)
    }

    fn eval_with_jacobian(&self, x: &[f64]) -> Result<(DVector<f64>, DMatrix<f64>)> {
        if self.is_identity() {
            check_dim("input point", self.domain_dim(), x.len())?;
            let d = x.len();
            return Ok((DVector::from_column_slice(x), DMatrix::identity(d, d)));
        }
        self.net
            .forward_with_jacobian(self.at_layer + 1, self.net.num_layers(), x)
    }
}

impl SmoothMap for NetworkSpec {
    fn domain_dim(&self) -> usize {
        self.input_dim()
    }
    fn codomain_dim(&self) -> usize {
        self.output_dim()
    }
    fn output_metric(&self) -> &OutputMetric {
        NetworkSpec::output_metric(self)
    }
    fn eval(&self, x: &[f64]) -> Result<DVector<f64>> {
        self.output(x)
    }
    fn eval_with_jacobian(&self, x: &[f64]) -> Result<(DVector<f64>, DMatrix<f64>)> {
        self.forward_with_jacobian(1, self.num_layers(), x)
    }
}
