//! JSON network format:
//! `{"input_dim": n, "layers": [{"W": [[...]], "v": [...]}], "W_out": [[...]]}`
//! with every entry written as a shortest round-trip decimal string.

use serde::{Deserialize, Serialize};

use super::{Layer, NetError, ReluNet};
use crate::matrix::Matrix;
use crate::scalar::Scalar;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonLayer {
    #[serde(rename = "W")]
    w: Vec<Vec<String>>,
    v: Vec<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonNet {
    input_dim: usize,
    layers: Vec<JsonLayer>,
    #[serde(rename = "W_out")]
    w_out: Vec<Vec<String>>,
}

fn rows_to_strings<T: Scalar>(m: &Matrix<T>) -> Vec<Vec<String>> {
    (0..m.rows()).map(|r| m.row(r).iter().map(|v| v.to_round_trip_string()).collect()).collect()
}

/// Byte offset of a serde_json error position (1-based line and column).
fn byte_offset(text: &str, line: usize, column: usize) -> usize {
    let mut offset = 0;
    for (i, l) in text.split_inclusive('\n').enumerate() {
        if i + 1 == line {
            return offset + column.saturating_sub(1).min(l.len());
        }
        offset += l.len();
    }
    text.len()
}

struct EntryParser<'t> {
    text: &'t str,
}

impl EntryParser<'_> {
    fn parse<T: Scalar>(&self, s: &str) -> Result<T, NetError> {
        s.trim().parse::<T>().map_err(|_| {
            let needle = format!("\"{s}\"");
            NetError::Parse {
                offset: self.text.find(&needle).unwrap_or(0),
                message: format!("invalid number {s:?}"),
            }
        })
    }

    fn matrix<T: Scalar>(&self, rows: &[Vec<String>], cols: usize, layer: usize) -> Result<Matrix<T>, NetError> {
        let mut parsed = Vec::with_capacity(rows.len());
        for r in rows {
            if r.len() != cols {
                return Err(NetError::DimensionMismatch { layer, expected: cols, found: r.len() });
            }
            parsed.push(r.iter().map(|s| self.parse(s)).collect::<Result<Vec<T>, _>>()?);
        }
        Ok(Matrix::from_rows(cols, parsed).expect("row lengths checked"))
    }
}

impl<T: Scalar> ReluNet<T> {
    /// Serializes to the JSON network format.
    pub fn to_json(&self) -> String {
        let doc = JsonNet {
            input_dim: self.input_dim,
            layers: self
                .layers
                .iter()
                .map(|l| JsonLayer {
                    w: rows_to_strings(&l.weights),
                    v: l.shift.iter().map(|v| v.to_round_trip_string()).collect(),
                })
                .collect(),
            w_out: rows_to_strings(&self.output),
        };
        serde_json::to_string(&doc).expect("plain data serializes")
    }

    /// Parses the JSON network format. Malformed text yields
    /// [`NetError::Parse`] with the byte offset of the problem.
    pub fn from_json(text: &str) -> Result<ReluNet<T>, NetError> {
        let doc: JsonNet = serde_json::from_str(text).map_err(|e| NetError::Parse {
            offset: byte_offset(text, e.line(), e.column()),
            message: e.to_string(),
        })?;
        let p = EntryParser { text };
        let mut prev = doc.input_dim;
        let mut layers = Vec::with_capacity(doc.layers.len());
        for (k, l) in doc.layers.iter().enumerate() {
            let w: Matrix<T> = p.matrix(&l.w, prev, k)?;
            let v = l.v.iter().map(|s| p.parse(s)).collect::<Result<Vec<T>, _>>()?;
            prev = w.rows();
            layers.push(Layer::new(w, v));
        }
        let out = p.matrix(&doc.w_out, prev, layers.len())?;
        ReluNet::new(doc.input_dim, layers, out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_net() -> ReluNet<f64> {
        let w0 = Matrix::from_rows(2, vec![vec![0.1, -1.0 / 3.0], vec![1e-300, 2.5]]).unwrap();
        let out = Matrix::from_rows(2, vec![vec![1.0, -0.7]]).unwrap();
        ReluNet::new(2, vec![Layer::new(w0, vec![0.2, -1e10])], out).unwrap()
    }

    #[test]
    fn round_trip_is_exact() {
        let net = sample_net();
        let text = net.to_json();
        assert!(text.contains("\"W_out\""));
        let back = ReluNet::<f64>::from_json(&text).unwrap();
        assert_eq!(back, net);
    }

    #[test]
    fn empty_object_is_rejected_with_offset() {
        match ReluNet::<f64>::from_json("{}") {
            Err(NetError::Parse { offset, .. }) => assert!(offset <= 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn bad_entries_report_their_position() {
        let text = sample_net().to_json().replace("\"2.5\"", "\"2.5x\"");
        match ReluNet::<f64>::from_json(&text) {
            Err(NetError::Parse { offset, .. }) => assert_eq!(&text[offset..offset + 6], "\"2.5x\""),
            other => panic!("unexpected {other:?}"),
        }
        let truncated = &sample_net().to_json()[..20];
        assert!(matches!(ReluNet::<f64>::from_json(truncated), Err(NetError::Parse { .. })));
    }

    #[test]
    fn ragged_rows_are_dimension_errors() {
        let text = r#"{"input_dim":2,"layers":[{"W":[["1"]],"v":["0"]}],"W_out":[["1"]]}"#;
        assert!(matches!(
            ReluNet::<f64>::from_json(text),
            Err(NetError::DimensionMismatch { layer: 0, expected: 2, found: 1 })
        ));
    }
}
