use nullfiber::fixtures::{level_line_net, level_line_value, weight_fixture_net};
use nullfiber::network_to_json;
use nullfiber_wasm::{leaf_path, sample_field, weight_kernel_dim, weight_path};

fn level_line() -> String {
    network_to_json(&level_line_net())
}

#[test]
fn field_grid_carries_values_and_kernel() {
    let grid = sample_field(&level_line(), -1.0, 1.0, -2.0, 2.0, 5, 4).unwrap();
    assert_eq!(grid.len(), 3 * 5 * 4);
    let n = 5f64.sqrt();
    for (idx, cell) in grid.chunks(3).enumerate() {
        let (i, j) = (idx % 5, idx / 5);
        let x = -1.0 + 0.5 * i as f64;
        let y = -2.0 + 4.0 * j as f64 / 3.0;
        assert!((cell[0] - level_line_value(x, y)).abs() <= 1e-12);
        assert!((cell[1] - 1.0 / n).abs() <= 1e-12 && (cell[2] + 2.0 / n).abs() <= 1e-12);
    }
}

#[test]
fn field_marks_trivial_kernels() {
    let spec = r#"{"layers": [{"activation": "tanh", "weights": [[1, 0], [0, 1]]}]}"#;
    let grid = sample_field(spec, 0.0, 1.0, 0.0, 1.0, 2, 2).unwrap();
    assert!(grid.chunks(3).all(|c| c[0].is_finite() && c[1].is_nan() && c[2].is_nan()));
}

#[test]
fn leaf_runs_both_ways_along_the_level_line() {
    let path = leaf_path(&level_line(), 0.5, 0.5, 0.05, 40).unwrap();
    assert_eq!(path.width(), 3);
    assert_eq!(path.len(), 81);
    assert!(path.note().is_empty());
    let rows: Vec<&[f64]> = path.rows().collect();
    for r in &rows {
        assert!((2.0 * r[0] + r[1] - 1.5).abs() <= 1e-6);
    }
    assert_eq!(&rows[40][..2], &[0.5, 0.5]);
    // the path is monotone along the line direction
    assert!(rows.windows(2).all(|w| w[1][0] > w[0][0]) || rows.windows(2).all(|w| w[1][0] < w[0][0]));
}

#[test]
fn weight_path_keeps_output() {
    let spec = network_to_json(&weight_fixture_net());
    assert_eq!(weight_kernel_dim(&spec, 1.0, -0.3).unwrap(), 2);
    let path = weight_path(&spec, 1.0, -0.3, &[0.6, -0.8], 0.05, 60).unwrap();
    assert_eq!(path.width(), 4);
    assert_eq!(path.len(), 61);
    let base = path.rows().next().unwrap()[3];
    for r in path.rows() {
        assert!((r[3] - base).abs() <= 1e-8);
        assert!((r[0] * 1.0 + r[1] * -0.3 + r[2] - (0.8 + 0.15 + 0.1)).abs() <= 1e-6);
    }
}

#[test]
fn bad_input_is_reported() {
    assert!(sample_field("{", 0.0, 1.0, 0.0, 1.0, 2, 2).is_err());
    let three = network_to_json(&nullfiber::fixtures::linear_rank_two_net());
    let err = leaf_path(&three, 0.0, 0.0, 0.1, 3).unwrap_err();
    assert!(err.contains("two-dimensional"));
    let spec = network_to_json(&weight_fixture_net());
    assert!(weight_path(&spec, 1.0, -0.3, &[1.0], 0.05, 3).is_err());
}
