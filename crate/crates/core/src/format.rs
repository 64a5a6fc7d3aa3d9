//! JSON file formats. Every index in every file is 1-based.
//!
//! Tensor, dense form: `{"order": m, "dim": n, "values": [v_1, ..., v_{n^m}]}`
//! where position `p` holds the entry at `from_linear(p, n, m)`.
//!
//! Tensor, sparse form: `{"order": m, "dim": n, "entries": [{"index": [i_1, ..., i_m], "value": v}, ...]}`
//! with unlisted entries zero. A file carrying both `values` and `entries`
//! is rejected.
//!
//! Reduced matrix: `{"N": N, "order": m, "dim": n, "values": [...]}`,
//! row-major.
//!
//! Joint distribution: `{"order": m, "dim": n, "probs": [...]}` with
//! position of `(i_2, ..., i_m)` holding `Pr(X_t = i_2, ..., X_{t-m+2} = i_m)`,
//! most recent state first.

use serde::ser::SerializeStruct;
use serde::{Deserialize, Serialize, Serializer};
use serde_json::{json, Value};

use crate::caps::Caps;
use crate::error::{Error, Result};
use crate::indexing::{states_to_offset, MultiIndex};
use crate::limits::{JointDistribution, LimitKind, LimitOutcome};
use crate::reduced::ReducedMatrix;
use crate::tensor::StochasticTensor;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct TensorFile {
    order: usize,
    dim: usize,
    #[serde(default)]
    values: Option<Vec<f64>>,
    #[serde(default)]
    entries: Option<Vec<EntryRecord>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct EntryRecord {
    index: Vec<usize>,
    value: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct JointFile {
    order: usize,
    dim: usize,
    probs: Vec<f64>,
}

/// Parses either tensor form. Shape is checked; stochasticity is not.
pub fn parse_tensor(text: &str, caps: &Caps) -> Result<StochasticTensor> {
    let file: TensorFile =
        serde_json::from_str(text).map_err(|e| Error::Format(format!("tensor file: {e}")))?;
    tensor_from_file(file, caps)
}

pub fn tensor_from_value(value: Value, caps: &Caps) -> Result<StochasticTensor> {
    let file: TensorFile =
        serde_json::from_value(value).map_err(|e| Error::Format(format!("tensor: {e}")))?;
    tensor_from_file(file, caps)
}

fn tensor_from_file(file: TensorFile, caps: &Caps) -> Result<StochasticTensor> {
    let TensorFile {
        order,
        dim,
        values,
        entries,
    } = file;
    match (values, entries) {
        (Some(_), Some(_)) => Err(Error::Format(
            "tensor file has both \"values\" and \"entries\"".into(),
        )),
        (None, None) => Err(Error::Format(
            "tensor file needs \"values\" or \"entries\"".into(),
        )),
        (Some(values), None) => StochasticTensor::from_values_with_caps(order, dim, values, caps),
        (None, Some(entries)) => {
            if order < 2 || dim < 1 {
                return Err(Error::Shape(format!(
                    "order must be at least 2 and dim at least 1, got order {order}, dim {dim}"
                )));
            }
            let size = caps.check_entries(order, dim)?;
            let mut values = vec![0.0; size];
            let mut seen = vec![false; size];
            for entry in entries {
                if entry.index.len() != order {
                    return Err(Error::InvalidIndex(format!(
                        "entry index {:?} has length {}, expected {order}",
                        entry.index,
                        entry.index.len()
                    )));
                }
                let idx = MultiIndex::new(entry.index, dim)?;
                let off = states_to_offset(idx.states(), dim);
                if seen[off] {
                    return Err(Error::Format(format!("entry {idx} listed twice")));
                }
                seen[off] = true;
                values[off] = entry.value;
            }
            StochasticTensor::from_values_with_caps(order, dim, values, caps)
        }
    }
}

pub fn parse_joint(text: &str, tol: f64) -> Result<JointDistribution> {
    let file: JointFile = serde_json::from_str(text)
        .map_err(|e| Error::Format(format!("joint distribution file: {e}")))?;
    JointDistribution::new(file.order, file.dim, file.probs, tol)
}

impl Serialize for StochasticTensor {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("StochasticTensor", 3)?;
        s.serialize_field("order", &self.order())?;
        s.serialize_field("dim", &self.dim())?;
        s.serialize_field("values", self.values())?;
        s.end()
    }
}

pub fn reduced_to_json(q: &ReducedMatrix) -> Value {
    json!({
        "N": q.side(),
        "order": q.order(),
        "dim": q.dim(),
        "values": q.matrix().values(),
    })
}

pub fn outcome_to_json(o: &LimitOutcome) -> Value {
    let mut v = json!({
        "kind": o.kind_name(),
        "iterations": o.iterations,
        "diagnostics": o.diagnostics,
    });
    let obj = v.as_object_mut().expect("object");
    match &o.kind {
        LimitKind::RankOne { pi, limit } => {
            obj.insert("pi".into(), json!(pi));
            obj.insert("limit".into(), json!(limit));
        }
        LimitKind::General { limit } => {
            obj.insert("limit".into(), json!(limit));
        }
        LimitKind::Cycle {
            period,
            representatives,
        } => {
            obj.insert("period".into(), json!(period));
            obj.insert("representatives".into(), json!(representatives));
        }
        LimitKind::Exhausted { last } => {
            obj.insert("last".into(), json!(last));
        }
    }
    v
}
