#![allow(dead_code)]

use nullfiber::{Activation, DMatrix, DVector, NetworkSpec, OutputMetric, SmoothLayer};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform_vec(rng: &mut ChaCha8Rng, dim: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..dim).map(|_| rng.random_range(lo..hi)).collect()
}

pub fn random_activation(rng: &mut ChaCha8Rng) -> Activation {
    Activation::ALL[rng.random_range(0..Activation::ALL.len())]
}

/// Random SPD metric `B B^T + I/2`.
pub fn random_metric(rng: &mut ChaCha8Rng, dim: usize) -> OutputMetric {
    let b = DMatrix::from_fn(dim, dim, |_, _| rng.random_range(-1.0..1.0));
    let g = &b * b.transpose() + DMatrix::identity(dim, dim) * 0.5;
    OutputMetric::new((&g + g.transpose()) * 0.5).unwrap()
}

/// Network with the given dimension chain, Gaussian weights scaled by
/// `1/sqrt(fan_in)`, small biases and random activations. Half the time the
/// output metric is a random SPD matrix.
pub fn random_net_with_dims(rng: &mut ChaCha8Rng, dims: &[usize]) -> NetworkSpec {
    let layers = dims
        .windows(2)
        .map(|w| {
            let scale = 1.5 / (w[0] as f64).sqrt();
            let a = DMatrix::from_fn(w[1], w[0], |_, _| {
                let z: f64 = StandardNormal.sample(rng);
                z * scale
            });
            let b = DVector::from_fn(w[1], |_, _| rng.random_range(-0.5..0.5));
            SmoothLayer::new(a, b, random_activation(rng)).unwrap()
        })
        .collect();
    let out = *dims.last().unwrap();
    let metric = if rng.random_bool(0.5) {
        random_metric(rng, out)
    } else {
        OutputMetric::identity(out)
    };
    NetworkSpec::with_metric(layers, metric).unwrap()
}

/// `n` layers in `1..=max_layers` (at least `min_layers`), widths in `1..=max_width`.
pub fn random_net(rng: &mut ChaCha8Rng, min_layers: usize, max_layers: usize, max_width: usize) -> NetworkSpec {
    let n = rng.random_range(min_layers..=max_layers);
    let dims: Vec<usize> = (0..=n).map(|_| rng.random_range(1..=max_width)).collect();
    random_net_with_dims(rng, &dims)
}

/// Network whose input space has a non-trivial kernel everywhere:
/// `d_0` in `2..=max_in`, `d_n < d_0`, hidden widths at least `d_n`.
pub fn random_fibered_net(rng: &mut ChaCha8Rng, max_layers: usize, max_in: usize, max_out: usize) -> NetworkSpec {
    let d0 = rng.random_range(2..=max_in);
    let dn = rng.random_range(1..=max_out.min(d0 - 1));
    let n = rng.random_range(1..=max_layers);
    let mut dims = vec![d0];
    for _ in 1..n {
        dims.push(rng.random_range(dn..=max_in));
    }
    dims.push(dn);
    random_net_with_dims(rng, &dims)
}

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.amax()
}

/// Pseudolength at space `k` of the image curve `s -> N_{1..k}(γ(s))`,
/// using the midpoint rule at the same `quad_points` nodes per segment as
/// the input-space computation. The image velocity is a central difference
/// of the image curve in the curve parameter, so the upstream layers enter
/// only through forward evaluations.
pub fn image_pseudolength(net: &NetworkSpec, k: usize, poly: &nullfiber::Polyline, quad_points: usize) -> f64 {
    let tail = nullfiber::NetTail::new(net, k).unwrap();
    let s = net.output_metric().sqrt();
    let push = |p: &DVector<f64>| -> DVector<f64> {
        if k == 0 {
            p.clone()
        } else {
            net.forward(1, k, p.as_slice()).unwrap()
        }
    };
    let delta = 1e-6;
    let mut total = 0.0;
    for pair in poly.vertices().windows(2) {
        let mut seg = 0.0;
        for q in 0..quad_points {
            let t = (q as f64 + 0.5) / quad_points as f64;
            let plus = push(&pair[0].lerp(&pair[1], t + delta));
            let minus = push(&pair[0].lerp(&pair[1], t - delta));
            let velocity = (plus - minus) / (2.0 * delta);
            let at = push(&pair[0].lerp(&pair[1], t));
            let j = nullfiber::SmoothMap::jacobian(&tail, at.as_slice()).unwrap();
            seg += (s * (j * velocity)).norm();
        }
        total += seg / quad_points as f64;
    }
    total
}
