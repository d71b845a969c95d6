//! Geometry of smooth feed-forward networks.
//!
//! A network `N = Λ_n ∘ ... ∘ Λ_1` with smooth layers `Λ_i(x) = F(A x + b)`
//! pulls the metric of its output space back to every earlier space. The
//! pulled-back metric is degenerate; its kernel is tangent to the fibers of
//! `N`, and curves tangent to the kernel (null curves) have zero length and
//! keep the output fixed.
//!
//! - [`smoothnet`]: layers, networks, forward passes and analytic Jacobians.
//! - [`pullback`]: pulled-back metric, kernel, seminorm, pseudolength,
//!   pseudodistance bounds.
//! - [`leaftrace`]: predictor-corrector tracing of null curves and
//!   same-class certificates.
//! - [`weightspace`]: the same machinery over first-layer parameters.
//! - [`spec_json`]: the network JSON format.

pub mod activation;
pub mod error;
pub mod fixtures;
pub mod leaftrace;
pub mod linalg;
pub mod map;
pub mod pullback;
pub mod smoothnet;
pub mod spec_json;
pub mod weightspace;

pub use activation::Activation;
pub use error::{Error, Result};
pub use leaftrace::{
    null_direction, project_to_fiber, rk4_null_step, same_class_certificate, trace_leaf, trace_many,
    CurveTrace, FiberCertificate, Projection, TraceConfig, Truncation, Verdict,
};
pub use map::{NetTail, SmoothMap};
pub use pullback::{
    kernel_basis, pseudodistance_upper_bound, pseudolength, pullback_metric, seminorm, BoundOptions,
    DistanceBound, KernelBasis, MetricTensor, Polyline,
};
pub use smoothnet::{LayerRankReport, NetworkSpec, OutputMetric, SmoothLayer};
pub use spec_json::{network_to_json, parse_network};
pub use weightspace::{trace_weight_class, weight_jacobian, weight_kernel, WeightMap, WeightPoint};

pub use nalgebra::{DMatrix, DVector};
