//! Serializers that write vectors as JSON arrays and matrices as nested rows.

use serde::ser::{SerializeSeq, Serializer};

use crate::numerics::{Matrix, Vector};

pub fn vector<S: Serializer>(v: &Vector, s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(v.iter())
}

pub fn opt_vector<S: Serializer>(v: &Option<Vector>, s: S) -> Result<S::Ok, S::Error> {
    match v {
        Some(v) => vector(v, s),
        None => s.serialize_none(),
    }
}

pub fn vectors<S: Serializer>(vs: &[Vector], s: S) -> Result<S::Ok, S::Error> {
    let mut seq = s.serialize_seq(Some(vs.len()))?;
    for v in vs {
        seq.serialize_element(&v.iter().copied().collect::<Vec<f64>>())?;
    }
    seq.end()
}

pub fn matrix<S: Serializer>(m: &Matrix, s: S) -> Result<S::Ok, S::Error> {
    let mut seq = s.serialize_seq(Some(m.nrows()))?;
    for row in m.row_iter() {
        seq.serialize_element(&row.iter().copied().collect::<Vec<f64>>())?;
    }
    seq.end()
}
