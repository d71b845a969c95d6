//! Network spec JSON:
//!
//! ```json
//! { "layers": [ { "activation": "softplus", "weights": [[2, 1], [1, 0]], "bias": [0, 0] } ],
//!   "output_metric": [[1, 0], [0, 1]] }
//! ```
//!
//! `weights` is row-major with one inner array per output unit. `bias` and
//! `output_metric` are optional (zero bias, Euclidean metric).

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::activation::Activation;
use crate::error::{Error, Result};
use crate::smoothnet::{NetworkSpec, OutputMetric, SmoothLayer};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayerDoc {
    pub activation: Activation,
    pub weights: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bias: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkDoc {
    pub layers: Vec<LayerDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_metric: Option<Vec<Vec<f64>>>,
}

fn schema(path: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Schema {
        path: path.into(),
        message: message.into(),
    }
}

fn matrix_from_rows(rows: &[Vec<f64>], path: &str) -> Result<DMatrix<f64>> {
    let ncols = rows.first().map(Vec::len).unwrap_or(0);
    if rows.is_empty() || ncols == 0 {
        return Err(schema(path, "matrix must have at least one non-empty row"));
    }
    for (r, row) in rows.iter().enumerate() {
        if row.len() != ncols {
            return Err(schema(
                format!("{path}[{r}]"),
                format!("row has {} entries, expected {ncols}", row.len()),
            ));
        }
    }
    Ok(DMatrix::from_fn(rows.len(), ncols, |r, c| rows[r][c]))
}

fn rows_from_matrix(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

impl NetworkDoc {
    pub fn from_network(net: &NetworkSpec) -> Self {
        let layers = net
            .layers()
            .iter()
            .map(|l| LayerDoc {
                activation: l.activation(),
                weights: rows_from_matrix(l.weights()),
                bias: Some(l.bias().iter().copied().collect()),
            })
            .collect();
        let g = net.output_metric().matrix();
        let output_metric = if *g == DMatrix::identity(g.nrows(), g.ncols()) {
            None
        } else {
            Some(rows_from_matrix(g))
        };
        NetworkDoc {
            layers,
            output_metric,
        }
    }

    pub fn to_network(&self) -> Result<NetworkSpec> {
        if self.layers.is_empty() {
            return Err(schema("layers", "at least one layer is required"));
        }
        let mut layers = Vec::with_capacity(self.layers.len());
        let mut prev_out: Option<usize> = None;
        for (i, doc) in self.layers.iter().enumerate() {
            let path = format!("layers[{i}]");
            let w = matrix_from_rows(&doc.weights, &format!("{path}.weights"))?;
            if let Some((r, c)) = (0..w.nrows())
                .flat_map(|r| (0..w.ncols()).map(move |c| (r, c)))
                .find(|&(r, c)| !w[(r, c)].is_finite())
            {
                return Err(schema(format!("{path}.weights[{r}][{c}]"), "entry is not finite"));
            }
            if let Some(d) = prev_out {
                if w.ncols() != d {
                    return Err(schema(
                        format!("{path}.weights"),
                        format!("has {} columns but the previous layer outputs {d} values", w.ncols()),
                    ));
                }
            }
            let bias = match &doc.bias {
                None => DVector::zeros(w.nrows()),
                Some(b) if b.len() != w.nrows() => {
                    return Err(schema(
                        format!("{path}.bias"),
                        format!("has {} entries, expected {}", b.len(), w.nrows()),
                    ));
                }
                Some(b) => DVector::from_column_slice(b),
            };
            if let Some(k) = bias.iter().position(|v| !v.is_finite()) {
                return Err(schema(format!("{path}.bias[{k}]"), "entry is not finite"));
            }
            prev_out = Some(w.nrows());
            layers.push(SmoothLayer::new(w, bias, doc.activation).map_err(|e| schema(path, e.to_string()))?);
        }
        let out = prev_out.expect("non-empty");
        let metric = match &self.output_metric {
            None => OutputMetric::identity(out),
            Some(rows) => {
                let g = matrix_from_rows(rows, "output_metric")?;
                if g.shape() != (out, out) {
                    return Err(schema(
                        "output_metric",
                        format!("is {}x{}, expected {out}x{out}", g.nrows(), g.ncols()),
                    ));
                }
                OutputMetric::new(g).map_err(|e| schema("output_metric", e.to_string()))?
            }
        };
        NetworkSpec::with_metric(layers, metric).map_err(|e| schema("layers", e.to_string()))
    }
}

/// Parse and validate a network spec. Syntax errors carry line and column;
/// structural errors carry the offending field path.
pub fn parse_network(text: &str) -> Result<NetworkSpec> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let doc: NetworkDoc = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        schema(
            if path == "." || path == "?" { "<document>".to_string() } else { path },
            format!("{inner}"),
        )
    })?;
    doc.to_network()
}

pub fn network_to_json(net: &NetworkSpec) -> String {
    serde_json::to_string_pretty(&NetworkDoc::from_network(net)).expect("plain data serializes")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn schema_path(text: &str) -> String {
        match parse_network(text) {
            Err(Error::Schema { path, .. }) => path,
            other => panic!("expected schema error, got {other:?}"),
        }
    }

    #[test]
    fn parses_level_line_spec() {
        let text = r#"{"layers": [
            {"activation": "softplus", "weights": [[2, 1], [1, 0]], "bias": [0, 0]},
            {"activation": "softplus", "weights": [[4, 0]]}
        ]}"#;
        assert_eq!(parse_network(text).unwrap(), fixtures::level_line_net());
    }

    #[test]
    fn round_trips_through_json() {
        let net = fixtures::weight_fixture_net();
        assert_eq!(parse_network(&network_to_json(&net)).unwrap(), net);
    }

    #[test]
    fn reports_field_paths() {
        assert_eq!(
            schema_path(r#"{"layers": [{"activation": "softmax", "weights": [[1]]}]}"#),
            "layers[0].activation"
        );
        assert_eq!(
            schema_path(r#"{"layers": [{"activation": "tanh", "weights": [[1, 2], [3]]}]}"#),
            "layers[0].weights[1]"
        );
        assert_eq!(
            schema_path(r#"{"layers": [{"activation": "tanh", "weights": [[1, 2]], "bias": [0, 0]}]}"#),
            "layers[0].bias"
        );
        assert_eq!(
            schema_path(
                r#"{"layers": [{"activation": "tanh", "weights": [[1, 2]]}, {"activation": "tanh", "weights": [[1, 2]]}]}"#
            ),
            "layers[1].weights"
        );
        assert_eq!(
            schema_path(r#"{"layers": [{"activation": "tanh", "weights": [[1]]}], "output_metric": [[-1]]}"#),
            "output_metric"
        );
        assert_eq!(
            schema_path(r#"{"layers": [{"activation": "tanh", "weights": [[1]], "extra": 1}]}"#),
            "layers[0].extra"
        );
        assert_eq!(schema_path(r#"{"layers": []}"#), "layers");
    }

    #[test]
    fn syntax_errors_carry_line_numbers() {
        match parse_network("{\n\"layers\": [\n  {oops}\n]}") {
            Err(Error::Schema { message, .. }) => assert!(message.contains("line 3"), "{message}"),
            other => panic!("{other:?}"),
        }
    }
}
