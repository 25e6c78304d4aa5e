use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use super::scalar::{invert, Scalar};
use super::table::{multiplicity_factorial, Multiset};
use crate::error::{Error, Result};

/// Largest vertex degree accepted in a model.
pub const MAX_VERTEX_DEGREE: usize = 6;

/// A finite index set with Gaussian covariance g and interaction vertices
/// v^X. The action is S[φ] = −½ g^{xy}φ_xφ_y + Σ_X v^X φ_X / ∏ mult(X)!,
/// the sum running over index multisets, and the measure is ∝ e^{S}.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldModel<S: Scalar = f64> {
    labels: Vec<String>,
    g: Vec<Vec<S>>,
    precision: Vec<Vec<S>>,
    vertices: BTreeMap<Multiset, S>,
}

/// Symmetric elimination without pivoting: every pivot must be positive.
fn positive_definite<S: Scalar>(g: &[Vec<S>]) -> bool {
    let n = g.len();
    let mut a = g.to_vec();
    for k in 0..n {
        if !(a[k][k].to_f64() > 0.0) {
            return false;
        }
        for i in k + 1..n {
            let f = a[i][k].clone() / a[k][k].clone();
            for j in k..n {
                let t = f.clone() * a[k][j].clone();
                a[i][j] = a[i][j].clone() - t;
            }
        }
    }
    true
}

fn model_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Model(msg.into()))
}

impl<S: Scalar> FieldModel<S> {
    /// `vertices` keys are index multisets in any order; they are sorted here.
    pub fn new(labels: Vec<String>, g: Vec<Vec<S>>, vertices: Vec<(Vec<usize>, S)>) -> Result<Self> {
        let n = labels.len();
        if n == 0 {
            return model_err("the index set is empty");
        }
        if g.len() != n || g.iter().any(|r| r.len() != n) {
            return model_err(format!("covariance must be {n}×{n}"));
        }
        for i in 0..n {
            for j in 0..i {
                let (a, b) = (g[i][j].to_f64(), g[j][i].to_f64());
                if (a - b).abs() > 1e-12 * (1.0 + a.abs()) {
                    return model_err("covariance is not symmetric");
                }
            }
        }
        if !positive_definite(&g) {
            return model_err("covariance is not positive definite");
        }
        let Some(precision) = invert(&g) else {
            return model_err("covariance is singular");
        };
        let mut map = BTreeMap::new();
        for (mut idx, v) in vertices {
            if idx.is_empty() || idx.len() > MAX_VERTEX_DEGREE {
                return model_err(format!("vertex degree must lie in 1..={MAX_VERTEX_DEGREE}"));
            }
            if idx.iter().any(|&i| i >= n) {
                return model_err("vertex index outside the index set");
            }
            idx.sort_unstable();
            if map.insert(idx, v).is_some() {
                return model_err("vertex listed twice");
            }
        }
        Ok(FieldModel { labels, g, precision, vertices: map })
    }

    /// Labels `0, 1, …, n−1`.
    pub fn with_default_labels(g: Vec<Vec<S>>, vertices: Vec<(Vec<usize>, S)>) -> Result<Self> {
        let labels = (0..g.len()).map(|i| i.to_string()).collect();
        Self::new(labels, g, vertices)
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn size(&self) -> usize {
        self.labels.len()
    }

    /// g_{xy}.
    pub fn g(&self) -> &[Vec<S>] {
        &self.g
    }

    /// g^{xy}, the inverse of g.
    pub fn precision(&self) -> &[Vec<S>] {
        &self.precision
    }

    pub fn vertices(&self) -> &BTreeMap<Multiset, S> {
        &self.vertices
    }

    pub fn is_gaussian(&self) -> bool {
        self.vertices.values().all(|v| v.is_zero())
    }

    pub fn max_degree(&self) -> usize {
        self.vertices.keys().map(Vec::len).max().unwrap_or(0)
    }

    /// ∂S_I/∂φ_y as a polynomial: Σ_M v^{y∪M}/∏mult(M)! φ_M.
    pub fn interaction_gradient(&self, y: usize) -> Vec<(Multiset, S)> {
        let mut out = Vec::new();
        for (key, v) in &self.vertices {
            if let Some(pos) = key.iter().position(|&k| k == y) {
                let mut rest = key.clone();
                rest.remove(pos);
                let w = v.clone() / S::from_i64(multiplicity_factorial(&rest) as i64);
                out.push((rest, w));
            }
        }
        out
    }

    /// Same model with f64 coefficients.
    pub fn to_f64(&self) -> FieldModel<f64> {
        FieldModel {
            labels: self.labels.clone(),
            g: self.g.iter().map(|r| r.iter().map(Scalar::to_f64).collect()).collect(),
            precision: self.precision.iter().map(|r| r.iter().map(Scalar::to_f64).collect()).collect(),
            vertices: self.vertices.iter().map(|(k, v)| (k.clone(), v.to_f64())).collect(),
        }
    }
}

impl FieldModel<f64> {
    pub fn g_matrix(&self) -> DMatrix<f64> {
        let n = self.size();
        DMatrix::from_fn(n, n, |i, j| self.g[i][j])
    }

    pub fn precision_matrix(&self) -> DMatrix<f64> {
        let n = self.size();
        DMatrix::from_fn(n, n, |i, j| self.precision[i][j])
    }

    /// S_I[φ].
    pub fn interaction(&self, phi: &[f64]) -> f64 {
        self.vertices
            .iter()
            .map(|(k, v)| v * k.iter().map(|&i| phi[i]).product::<f64>() / multiplicity_factorial(k) as f64)
            .sum()
    }

    /// S[φ] = −½φ·Lφ + S_I[φ].
    pub fn action(&self, phi: &[f64]) -> f64 {
        let n = self.size();
        let mut quad = 0.0;
        for i in 0..n {
            for j in 0..n {
                quad += phi[i] * self.precision[i][j] * phi[j];
            }
        }
        -0.5 * quad + self.interaction(phi)
    }

    /// Parses the JSON model format.
    pub fn from_json(text: &str) -> Result<Self> {
        let file: ModelFile = serde_json::from_str(text).map_err(|e| Error::Model(e.to_string()))?;
        file.into_model()
    }

    pub fn to_json(&self) -> String {
        let file = ModelFile {
            labels: self.labels.clone(),
            g: self.g.clone(),
            vertices: self
                .vertices
                .iter()
                .map(|(k, v)| VertexEntry {
                    idx: k.iter().map(|&i| IndexRef::Name(self.labels[i].clone())).collect(),
                    v: *v,
                })
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("model serialises")
    }

    /// Necessary condition for e^{S} to be integrable: the top-degree part of
    /// S_I must not grow along any coordinate axis.
    pub(crate) fn check_bounded_above(&self) -> Result<()> {
        let top = self.max_degree();
        if top <= 2 {
            return Ok(());
        }
        if top % 2 == 1 {
            return model_err("odd top-degree interaction makes the measure divergent");
        }
        let n = self.size();
        for axis in 0..n {
            let mut e = vec![0.0; n];
            e[axis] = 1.0;
            let lead: f64 = self
                .vertices
                .iter()
                .filter(|(k, _)| k.len() == top)
                .map(|(k, v)| v * k.iter().map(|&i| e[i]).product::<f64>())
                .sum();
            if lead > 0.0 {
                return model_err(format!("top-degree interaction is positive along axis {axis}"));
            }
        }
        Ok(())
    }
}

impl FieldModel<BigRational> {
    /// Exact model from integer or rational entries.
    pub fn exact(g: Vec<Vec<BigRational>>, vertices: Vec<(Vec<usize>, BigRational)>) -> Result<Self> {
        Self::with_default_labels(g, vertices)
    }
}

/// The on-disk model description.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ModelFile {
    pub labels: Vec<String>,
    pub g: Vec<Vec<f64>>,
    #[serde(default)]
    pub vertices: Vec<VertexEntry>,
}

/// One vertex coefficient; indices may be label names or positions.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VertexEntry {
    pub idx: Vec<IndexRef>,
    pub v: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum IndexRef {
    Position(usize),
    Name(String),
}

impl ModelFile {
    pub fn into_model(self) -> Result<FieldModel<f64>> {
        let lookup = |r: &IndexRef| -> Result<usize> {
            match r {
                IndexRef::Position(p) => Ok(*p),
                IndexRef::Name(s) => self
                    .labels
                    .iter()
                    .position(|l| l == s)
                    .ok_or_else(|| Error::Model(format!("unknown label {s:?}"))),
            }
        };
        let vertices = self
            .vertices
            .iter()
            .map(|e| Ok((e.idx.iter().map(lookup).collect::<Result<Vec<_>>>()?, e.v)))
            .collect::<Result<Vec<_>>>()?;
        FieldModel::new(self.labels.clone(), self.g.clone(), vertices)
    }
}
