//! Small reference networks with closed-form geometry.

use nalgebra::{DMatrix, DVector};

use crate::activation::Activation;
use crate::smoothnet::{NetworkSpec, SmoothLayer};

/// Single identity-activation layer `x -> A x` with
/// `A = [[1, 2, 2], [3, 1, 5]]`. Pullback of the Euclidean metric has rank 2
/// and kernel spanned by `(8, 1, -5)`.
pub fn linear_rank_two_net() -> NetworkSpec {
    let a = DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 2.0, 3.0, 1.0, 5.0]);
    NetworkSpec::new(vec![SmoothLayer::unbiased(a, Activation::Identity).expect("valid layer")])
        .expect("valid network")
}

/// Two softplus layers with `A1 = [[2, 1], [1, 0]]`, `A2 = [4, 0]` and zero
/// biases, so `N(x) = ln(1 + (1 + e^{2 x0 + x1})^4)`. Level sets are the
/// lines `2 x0 + x1 = k`.
pub fn level_line_net() -> NetworkSpec {
    let a1 = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 0.0]);
    let a2 = DMatrix::from_row_slice(1, 2, &[4.0, 0.0]);
    NetworkSpec::new(vec![
        SmoothLayer::unbiased(a1, Activation::Softplus).expect("valid layer"),
        SmoothLayer::unbiased(a2, Activation::Softplus).expect("valid layer"),
    ])
    .expect("valid network")
}

/// Closed form of [`level_line_net`].
pub fn level_line_value(x0: f64, x1: f64) -> f64 {
    (1.0 + (1.0 + (2.0 * x0 + x1).exp()).powi(4)).ln()
}

/// Parameters of the two-layer softplus chain `R^2 -> R -> R` used for
/// weight-space exploration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightFixture {
    pub a: f64,
    pub b: f64,
    pub d: f64,
    pub c: f64,
}

impl Default for WeightFixture {
    fn default() -> Self {
        WeightFixture {
            a: 0.8,
            b: -0.5,
            d: 0.1,
            c: 1.5,
        }
    }
}

impl WeightFixture {
    /// `x -> softplus(c * softplus(a x0 + b x1 + d))`, second bias zero.
    pub fn net(&self) -> NetworkSpec {
        let l1 = SmoothLayer::new(
            DMatrix::from_row_slice(1, 2, &[self.a, self.b]),
            DVector::from_vec(vec![self.d]),
            Activation::Softplus,
        )
        .expect("valid layer");
        let l2 = SmoothLayer::unbiased(DMatrix::from_row_slice(1, 1, &[self.c]), Activation::Softplus)
            .expect("valid layer");
        NetworkSpec::new(vec![l1, l2]).expect("valid network")
    }
}

/// Default weight-space fixture network.
pub fn weight_fixture_net() -> NetworkSpec {
    WeightFixture::default().net()
}
