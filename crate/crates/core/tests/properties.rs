mod common;

use nullfiber::linalg::{max_principal_angle, FullSvd};
use nullfiber::{
    kernel_basis, pseudodistance_upper_bound, pseudolength, pullback_metric, trace_leaf, trace_weight_class,
    weight_jacobian, weight_kernel, Activation, BoundOptions, DMatrix, DVector, NetworkSpec, Polyline,
    SmoothLayer, TraceConfig, WeightPoint,
};
use proptest::prelude::*;
use rand::RngExt;

#[test]
fn composite_jacobian_is_product_of_layer_jacobians() {
    let mut rng = common::rng(1);
    for _ in 0..300 {
        let net = common::random_net(&mut rng, 1, 5, 8);
        let x = common::uniform_vec(&mut rng, net.input_dim(), -3.0, 3.0);
        let mut cur = DVector::from_vec(x.clone());
        let mut product = DMatrix::identity(cur.len(), cur.len());
        for layer in net.layers() {
            product = layer.jacobian(&cur).unwrap() * product;
            cur = layer.apply(&cur).unwrap();
        }
        let j = net.composite_jacobian(1, net.num_layers(), &x).unwrap();
        assert!((j - product).amax() <= 1e-12);
    }
}

#[test]
fn composite_jacobian_matches_central_differences_on_sub_ranges() {
    let mut rng = common::rng(2);
    for _ in 0..200 {
        let net = common::random_net(&mut rng, 1, 5, 8);
        let n = net.num_layers();
        let from = rng.random_range(1..=n);
        let to = rng.random_range(from..=n);
        let x = common::uniform_vec(&mut rng, net.dim(from - 1), -3.0, 3.0);
        let j = net.composite_jacobian(from, to, &x).unwrap();
        let fd = net.finite_diff_jacobian(from, to, &x, 1e-5).unwrap();
        assert!((&j - fd).amax() <= 1e-5 * (1.0 + j.amax()));
    }
}

#[test]
fn pullback_is_symmetric_psd_with_bounded_rank() {
    let mut rng = common::rng(3);
    for _ in 0..1000 {
        let net = common::random_net(&mut rng, 1, 4, 6);
        let at = rng.random_range(0..=net.num_layers());
        let x = common::uniform_vec(&mut rng, net.dim(at), -3.0, 3.0);
        let m = pullback_metric(&net, at, &x).unwrap();
        assert!((&m.matrix - m.matrix.transpose()).amax() <= 1e-12);
        let eig = m.matrix.clone().symmetric_eigenvalues();
        assert!(eig.min() >= -1e-10 * eig.max().max(0.0));
        let min_dim = net.dims()[at..].iter().copied().min().unwrap();
        assert!(m.rank <= min_dim);
    }
}

#[test]
fn kernel_vectors_are_orthonormal_and_annihilated() {
    let mut rng = common::rng(4);
    for _ in 0..300 {
        let net = common::random_fibered_net(&mut rng, 4, 6, 3);
        let x = common::uniform_vec(&mut rng, net.input_dim(), -2.0, 2.0);
        let k = kernel_basis(&net, 0, &x, None).unwrap();
        assert!(k.dim() >= net.input_dim() - net.output_dim());
        let gram = k.vectors.transpose() * &k.vectors;
        assert!((gram - DMatrix::identity(k.dim(), k.dim())).amax() <= 1e-10);
        let j = net.composite_jacobian(1, net.num_layers(), &x).unwrap();
        let smax = FullSvd::new(&j).sigma_max();
        for v in k.vectors.column_iter() {
            assert!((&j * v).norm() <= 1e-8 * smax);
        }
    }
}

#[test]
fn kernel_from_weighted_jacobian_agrees_with_metric_eigenvectors() {
    let mut rng = common::rng(5);
    let mut checked = 0;
    for _ in 0..300 {
        let net = common::random_fibered_net(&mut rng, 3, 6, 3);
        let x = common::uniform_vec(&mut rng, net.input_dim(), -1.5, 1.5);
        let k = kernel_basis(&net, 0, &x, None).unwrap();
        let m = pullback_metric(&net, 0, &x).unwrap();
        let eig = nalgebra::SymmetricEigen::new(m.matrix.clone());
        let lmax = eig.eigenvalues.amax();
        let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let r = k.dim();
        // only compare when the eigenvalue gap is clear
        if r == 0 || r == order.len() || eig.eigenvalues[order[r]] < 1e-6 * lmax {
            continue;
        }
        let cols: Vec<_> = order[..r].iter().map(|&i| eig.eigenvectors.column(i).into_owned()).collect();
        let other = DMatrix::from_columns(&cols);
        assert!(max_principal_angle(&k.vectors, &other) <= 1e-6);
        checked += 1;
    }
    assert!(checked > 100);
}

#[test]
fn fixture_ranks_equal_output_dimension() {
    let lin = nullfiber::fixtures::linear_rank_two_net();
    let net = nullfiber::fixtures::level_line_net();
    let mut rng = common::rng(6);
    for _ in 0..50 {
        let x = common::uniform_vec(&mut rng, 3, -3.0, 3.0);
        assert_eq!(pullback_metric(&lin, 0, &x).unwrap().rank, 2);
        let x = common::uniform_vec(&mut rng, 2, -3.0, 3.0);
        assert_eq!(pullback_metric(&net, 0, &x).unwrap().rank, 1);
    }
}

#[test]
fn pseudolength_is_preserved_by_pushing_curves_forward() {
    let mut rng = common::rng(7);
    for _ in 0..40 {
        let net = common::random_net(&mut rng, 2, 4, 6);
        let verts: Vec<Vec<f64>> = (0..11)
            .map(|_| common::uniform_vec(&mut rng, net.input_dim(), -2.0, 2.0))
            .collect();
        let poly = Polyline::from_rows(&verts).unwrap();
        let l0 = pseudolength(&net, 0, &poly, 64).unwrap();
        for k in 1..=net.num_layers() {
            let lk = common::image_pseudolength(&net, k, &poly, 64);
            assert!((l0 - lk).abs() <= 1e-4 * (1.0 + l0), "layer {k}: {l0} vs {lk}");
        }
    }
}

#[test]
fn traces_hold_the_output_fixed() {
    let mut rng = common::rng(8);
    let mut truncated = 0;
    for _ in 0..1000 {
        let net = common::random_fibered_net(&mut rng, 3, 6, 3);
        let p = common::uniform_vec(&mut rng, net.input_dim(), -1.5, 1.5);
        let cfg = TraceConfig {
            step_size: 0.05,
            n_steps: 10,
            corrector_tol: 1e-8,
            kernel_coeffs: None,
            seed_direction: Some(common::uniform_vec(&mut rng, net.input_dim(), -1.0, 1.0)),
            ..Default::default()
        };
        let trace = trace_leaf(&net, &p, &cfg).unwrap();
        truncated += trace.truncated.is_some() as usize;
        for (k, v) in trace.vertices.iter().enumerate() {
            assert!(trace.drift[k] <= cfg.corrector_tol);
            assert_eq!(trace.outputs[k], net.output(v.as_slice()).unwrap());
        }
    }
    assert!(truncated < 100, "{truncated} truncated traces");
}

#[test]
fn traces_on_random_nets_reverse() {
    let mut rng = common::rng(9);
    for _ in 0..100 {
        let net = common::random_fibered_net(&mut rng, 3, 4, 2);
        let p = common::uniform_vec(&mut rng, net.input_dim(), -1.0, 1.0);
        let cfg = TraceConfig {
            step_size: 0.02,
            n_steps: 20,
            seed_direction: Some(common::uniform_vec(&mut rng, net.input_dim(), -1.0, 1.0)),
            ..Default::default()
        };
        let fwd = trace_leaf(&net, &p, &cfg).unwrap();
        if fwd.truncated.is_some() {
            continue;
        }
        let back = trace_leaf(
            &net,
            fwd.last().as_slice(),
            &TraceConfig {
                n_steps: -20,
                seed_direction: fwd.final_direction.as_ref().map(|d| d.as_slice().to_vec()),
                kernel_coeffs: None,
                ..cfg
            },
        )
        .unwrap();
        if back.truncated.is_some() {
            continue;
        }
        let kernel_dim = kernel_basis(&net, 0, &p, None).unwrap().dim();
        if kernel_dim == 1 {
            assert!((back.last() - DVector::from_vec(p.clone())).amax() <= 1e-3);
        }
    }
}

#[test]
fn traced_polylines_lose_pseudolength_under_step_refinement() {
    // Chords of a curved fiber leave it by O(h^2), so the pseudolength of
    // the traced polyline is O(h) and halves with the step.
    let mut rng = common::rng(10);
    for _ in 0..100 {
        let net = common::random_fibered_net(&mut rng, 3, 5, 2);
        let p = common::uniform_vec(&mut rng, net.input_dim(), -1.0, 1.0);
        let seed = common::uniform_vec(&mut rng, net.input_dim(), -1.0, 1.0);
        let run = |h: f64, n: i64| {
            let cfg = TraceConfig {
                step_size: h,
                n_steps: n,
                seed_direction: Some(seed.clone()),
                ..Default::default()
            };
            trace_leaf(&net, &p, &cfg).unwrap()
        };
        let coarse = run(0.02, 25);
        let fine = run(0.01, 50);
        if coarse.truncated.is_some() || fine.truncated.is_some() {
            continue;
        }
        let lc = pseudolength(&net, 0, &coarse.polyline().unwrap(), 16).unwrap();
        let lf = pseudolength(&net, 0, &fine.polyline().unwrap(), 16).unwrap();
        assert!(lc <= 0.05, "{lc}");
        assert!(lf <= 0.6 * lc + 1e-9, "{lf} vs {lc}");
    }
}

#[test]
fn distance_bound_does_not_grow_under_refinement() {
    let mut rng = common::rng(11);
    for _ in 0..20 {
        let net = common::random_net(&mut rng, 1, 3, 4);
        let x = common::uniform_vec(&mut rng, net.input_dim(), -1.0, 1.0);
        let y = common::uniform_vec(&mut rng, net.input_dim(), -1.0, 1.0);
        let mut prev = f64::INFINITY;
        for segments in [1, 2, 4, 8, 16] {
            let opts = BoundOptions {
                segments,
                descent_iters: 40,
                ..Default::default()
            };
            let b = pseudodistance_upper_bound(&net, &x, &y, &opts).unwrap();
            assert!(b.bound >= 0.0);
            assert!(b.bound <= prev + 1e-9);
            prev = b.bound;
        }
    }
}

#[test]
fn weight_traces_hold_the_output_fixed() {
    let mut rng = common::rng(12);
    for _ in 0..100 {
        let d0 = rng.random_range(1..=3);
        let d1 = rng.random_range(1..=3);
        let dn = rng.random_range(1..=2);
        let net = common::random_net_with_dims(&mut rng, &[d0, d1, dn]);
        let x = common::uniform_vec(&mut rng, d0, -1.5, 1.5);
        let w = WeightPoint::first_layer_of(&net);
        let k = weight_kernel(&net, &x, &w, None).unwrap();
        let jw = weight_jacobian(&net, &x, &w).unwrap();
        let smax = FullSvd::new(&jw).sigma_max();
        for v in k.vectors.column_iter() {
            assert!((&jw * v).norm() <= 1e-8 * smax);
        }
        if k.is_empty() {
            continue;
        }
        let coeffs = common::uniform_vec(&mut rng, k.dim(), -1.0, 1.0);
        let cfg = TraceConfig {
            step_size: 0.05,
            n_steps: 20,
            corrector_tol: 1e-6,
            ..Default::default()
        };
        let trace = trace_weight_class(&net, &x, &w, &coeffs, &cfg).unwrap();
        let base = net.output(&x).unwrap();
        for v in &trace.vertices {
            let p = WeightPoint::unflatten(v.as_slice(), d1, d0).unwrap();
            let moved = net.with_first_layer(p.weights, p.bias).unwrap();
            let diff = moved.output(&x).unwrap() - &base;
            assert!(net.output_metric().norm(&diff) <= 1e-6);
        }
    }
}

#[test]
fn gaussian_weights_are_almost_surely_full_rank() {
    let mut rng = common::rng(13);
    let mut passes = 0;
    for _ in 0..1000 {
        let net = common::random_net(&mut rng, 1, 4, 8);
        passes += net.check_full_rank(1e-12).iter().all(|r| r.pass) as usize;
    }
    assert!(passes >= 999, "{passes}");
}

fn arb_activation() -> impl Strategy<Value = Activation> {
    prop::sample::select(Activation::ALL.to_vec())
}

proptest! {
    #[test]
    fn activation_derivatives_are_positive(a in arb_activation(), x in -30.0f64..30.0) {
        prop_assert!(a.derivative(x) > 0.0);
    }

    #[test]
    fn weight_points_flatten_round_trip(
        rows in 1usize..5,
        cols in 1usize..5,
        seed in any::<u64>(),
    ) {
        let mut rng = common::rng(seed);
        let flat = common::uniform_vec(&mut rng, WeightPoint::flat_len(rows, cols), -5.0, 5.0);
        let w = WeightPoint::unflatten(&flat, rows, cols).unwrap();
        prop_assert_eq!(w.flatten(), flat);
    }

    #[test]
    fn network_json_round_trips(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let net = common::random_net(&mut rng, 1, 3, 4);
        let back = nullfiber::parse_network(&nullfiber::network_to_json(&net)).unwrap();
        prop_assert_eq!(back.layers(), net.layers());
        prop_assert!((back.output_metric().matrix() - net.output_metric().matrix()).amax() == 0.0);
    }

    #[test]
    fn seminorm_of_kernel_vectors_vanishes(x0 in -3.0f64..3.0, x1 in -3.0f64..3.0) {
        let net = nullfiber::fixtures::level_line_net();
        let m = pullback_metric(&net, 0, &[x0, x1]).unwrap();
        let k = kernel_basis(&net, 0, &[x0, x1], None).unwrap();
        prop_assert!(nullfiber::seminorm(&m, k.vector(0).as_slice()).unwrap() <= 1e-8);
    }
}

#[test]
fn unused_layer_constructor_is_linked() {
    let _ = SmoothLayer::unbiased(DMatrix::identity(1, 1), Activation::Identity).unwrap();
    let _ = NetworkSpec::new(vec![]).is_err();
}
