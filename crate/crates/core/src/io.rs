//! JSON documents. Complex numbers are `[re, im]` pairs; point indices in
//! keys such as `"1,2"` are 1-based.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gram::{validate_gram, GramSpace};
use crate::hyperbolic::PointSet;
use crate::invariants::InvariantData;
use crate::linalg::CMat;
use crate::multalg::HartzData;
use crate::tol::Tolerances;
use crate::trees::{RootedTree, TreeWeight};

pub type ComplexPair = [f64; 2];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GramDoc {
    pub n: usize,
    #[serde(rename = "K")]
    pub k: Vec<Vec<ComplexPair>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSetDoc {
    pub d: usize,
    pub points: Vec<Vec<ComplexPair>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvariantDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    pub deltas: BTreeMap<String, f64>,
    #[serde(default)]
    pub angulars: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeDoc {
    pub parent: Vec<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edge_len: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HartzDoc {
    pub n: usize,
    #[serde(rename = "E")]
    pub e: Vec<Vec<ComplexPair>>,
}

pub fn pair(z: Complex64) -> ComplexPair {
    [z.re, z.im]
}

pub fn unpair(p: ComplexPair) -> Complex64 {
    Complex64::new(p[0], p[1])
}

pub fn matrix_to_rows(m: &CMat) -> Vec<Vec<ComplexPair>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| pair(m[(i, j)])).collect()).collect()
}

pub fn rows_to_matrix(rows: &[Vec<ComplexPair>]) -> Result<CMat> {
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    if let Some(bad) = rows.iter().find(|row| row.len() != c) {
        return Err(Error::Parse(format!("ragged matrix: row lengths {c} and {}", bad.len())));
    }
    Ok(DMatrix::from_fn(r, c, |i, j| unpair(rows[i][j])))
}

pub fn parse<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("documents serialize")
}

impl GramDoc {
    pub fn from_space(g: &GramSpace) -> Self {
        GramDoc { n: g.n(), k: matrix_to_rows(g.matrix()), labels: g.labels().map(<[String]>::to_vec) }
    }

    pub fn into_space(self, tol: &Tolerances) -> Result<GramSpace> {
        let k = rows_to_matrix(&self.k)?;
        if k.nrows() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: k.nrows() });
        }
        let g = validate_gram(k, tol)?;
        match self.labels {
            Some(labels) => g.with_labels(labels),
            None => Ok(g),
        }
    }
}

impl PointSetDoc {
    pub fn from_points(x: &PointSet) -> Self {
        PointSetDoc { d: x.dim(), points: x.points().iter().map(|p| p.iter().map(|&z| pair(z)).collect()).collect() }
    }

    pub fn into_points(self) -> Result<PointSet> {
        PointSet::new(self.d, self.points.into_iter().map(|p| p.into_iter().map(unpair).collect()).collect())
    }
}

fn index_key(idx: &[usize]) -> String {
    idx.iter().map(|i| (i + 1).to_string()).collect::<Vec<_>>().join(",")
}

fn parse_key(key: &str, len: usize) -> Result<Vec<usize>> {
    let parts: Vec<usize> = key
        .split(',')
        .map(|s| s.trim().parse::<usize>().map_err(|e| Error::Parse(format!("key {key:?}: {e}"))))
        .collect::<Result<_>>()?;
    if parts.len() != len || parts.contains(&0) {
        return Err(Error::Parse(format!("key {key:?} must hold {len} positive indices")));
    }
    Ok(parts.into_iter().map(|i| i - 1).collect())
}

impl InvariantDoc {
    pub fn from_data(j: &InvariantData) -> Self {
        InvariantDoc {
            n: Some(j.n),
            deltas: j.deltas.iter().map(|(&(a, b), &v)| (index_key(&[a, b]), v)).collect(),
            angulars: j.angulars.iter().map(|(&(r, s), &v)| (index_key(&[0, r, s]), v)).collect(),
        }
    }

    pub fn into_data(self) -> Result<InvariantData> {
        let mut deltas = BTreeMap::new();
        let mut n = self.n.unwrap_or(0);
        for (key, v) in &self.deltas {
            let ij = parse_key(key, 2)?;
            let (a, b) = (ij[0].min(ij[1]), ij[0].max(ij[1]));
            if a == b {
                return Err(Error::Parse(format!("key {key:?} repeats an index")));
            }
            n = n.max(b + 1);
            deltas.insert((a, b), *v);
        }
        let mut angulars = BTreeMap::new();
        for (key, v) in &self.angulars {
            let rs = parse_key(key, 3)?;
            if rs[0] != 0 || rs[1] == 0 || rs[2] == 0 || rs[1] == rs[2] {
                return Err(Error::Parse(format!("angular key {key:?} must be of the form \"1,r,s\"")));
            }
            // A_1sr = −A_1rs
            let (r, s, v) = if rs[1] < rs[2] { (rs[1], rs[2], *v) } else { (rs[2], rs[1], -*v) };
            angulars.insert((r, s), v);
        }
        let expected = n * n.saturating_sub(1) / 2;
        if deltas.len() != expected || angulars.len() != n.saturating_sub(1) * n.saturating_sub(2) / 2 {
            return Err(Error::Parse(format!("incomplete invariant data for n = {n}")));
        }
        Ok(InvariantData { n, deltas, angulars })
    }
}

impl TreeDoc {
    pub fn from_tree(t: &RootedTree, w: Option<&TreeWeight>) -> Self {
        TreeDoc {
            parent: t.parents().iter().map(|p| p.map_or(-1, |p| p as i64)).collect(),
            edge_len: Some((0..t.len()).map(|x| t.edge_len(x)).collect()),
            omega: w.map(|w| w.values().to_vec()),
        }
    }

    pub fn into_tree(self) -> Result<(RootedTree, Option<TreeWeight>)> {
        let t = RootedTree::from_parent_array(&self.parent, self.edge_len)?;
        let w = match self.omega {
            Some(omega) => Some(TreeWeight::new(&t, omega)?),
            None => None,
        };
        Ok((t, w))
    }
}

impl HartzDoc {
    pub fn from_data(h: &HartzData) -> Self {
        HartzDoc { n: h.n(), e: matrix_to_rows(&h.e) }
    }

    pub fn into_data(self) -> Result<HartzData> {
        let e = rows_to_matrix(&self.e)?;
        if self.n == 0 || e.nrows() != self.n - 1 || e.ncols() != self.n - 1 {
            return Err(Error::DimensionMismatch { expected: self.n.saturating_sub(1), got: e.nrows() });
        }
        Ok(HartzData { e })
    }
}
