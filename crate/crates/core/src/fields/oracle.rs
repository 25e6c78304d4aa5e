use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use super::model::FieldModel;
use super::table::{GreenTable, TableKind};
use crate::error::{Error, Result};
use crate::rng;

/// A numeric expectation with an error estimate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    /// Standard error for Monte Carlo; |fine − coarse grid| for quadrature.
    pub stderr: f64,
}

/// Self-normalised importance sampling settings.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct MonteCarloConfig {
    pub seed: u64,
    pub samples: usize,
    pub block_size: usize,
}

impl MonteCarloConfig {
    pub fn new(seed: u64, samples: usize) -> Self {
        MonteCarloConfig { seed, samples, block_size: 10_000 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum OracleMethod {
    Quadrature,
    MonteCarlo(MonteCarloConfig),
}

/// Largest index set handled by the tensor-grid quadrature.
pub const QUADRATURE_MAX_LABELS: usize = 3;

fn default_points(n: usize) -> usize {
    match n {
        1 => 2001,
        2 => 401,
        _ => 101,
    }
}

/// Trapezoid quadrature of the measure ∝ e^{S[φ] + J·φ} on [−8σ, 8σ]^N,
/// σ² the largest diagonal entry of g.
#[derive(Clone, Debug)]
pub struct Quadrature {
    n: usize,
    points: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    coarse_weights: Vec<f64>,
    log_z: f64,
}

impl Quadrature {
    pub fn new(model: &FieldModel<f64>, j: &[f64]) -> Result<Self> {
        let n = model.size();
        Self::with_points(model, j, default_points(n))
    }

    /// `points` per axis; must be odd so the coarse grid nests.
    pub fn with_points(model: &FieldModel<f64>, j: &[f64], points: usize) -> Result<Self> {
        let n = model.size();
        if n > QUADRATURE_MAX_LABELS {
            return Err(Error::Capacity { what: "quadrature index set size", got: n, limit: QUADRATURE_MAX_LABELS });
        }
        if j.len() != n {
            return Err(Error::Domain("source has the wrong length".into()));
        }
        if points < 5 || points % 2 == 0 {
            return Err(Error::Domain("quadrature needs an odd number of points, at least 5".into()));
        }
        model.check_bounded_above()?;
        let sigma = (0..n).map(|i| model.g()[i][i]).fold(0.0f64, f64::max).sqrt();
        let radius = 8.0 * sigma;
        let h = 2.0 * radius / (points - 1) as f64;
        let nodes: Vec<f64> = (0..points).map(|k| -radius + k as f64 * h).collect();
        let total = points.pow(n as u32);

        let mut phi = vec![0.0; n];
        let mut log_w = vec![0.0; total];
        for (idx, lw) in log_w.iter_mut().enumerate() {
            let mut rest = idx;
            for p in phi.iter_mut() {
                *p = nodes[rest % points];
                rest /= points;
            }
            let s = model.action(&phi) + phi.iter().zip(j).map(|(a, b)| a * b).sum::<f64>();
            if !s.is_finite() {
                return Err(Error::Model("action is not finite on the grid".into()));
            }
            *lw = s;
        }
        let top = log_w.iter().cloned().fold(f64::NEG_INFINITY, f64::max);

        let mut weights = vec![0.0; total];
        let mut coarse = vec![0.0; total];
        let mut boundary: f64 = 0.0;
        let (mut sum, mut coarse_sum) = (0.0, 0.0);
        for idx in 0..total {
            let mut rest = idx;
            let mut trap = 1.0;
            let mut coarse_trap = 1.0;
            let mut on_edge = false;
            for _ in 0..n {
                let k = rest % points;
                rest /= points;
                if k == 0 || k == points - 1 {
                    trap *= 0.5;
                    coarse_trap *= 0.5;
                    on_edge = true;
                }
                if k % 2 == 1 {
                    coarse_trap = 0.0;
                }
            }
            let w = (log_w[idx] - top).exp();
            if on_edge {
                boundary = boundary.max(w);
            }
            weights[idx] = trap * w;
            coarse[idx] = coarse_trap * w;
            sum += weights[idx];
            coarse_sum += coarse[idx];
        }
        if boundary > 1e-10 {
            return Err(Error::Model(format!(
                "measure is not negligible on the grid boundary (relative weight {boundary:.2e})"
            )));
        }
        weights.iter_mut().for_each(|w| *w /= sum);
        coarse.iter_mut().for_each(|w| *w /= coarse_sum);
        let log_z = top + sum.ln() + n as f64 * h.ln();
        Ok(Quadrature { n, points, nodes, weights, coarse_weights: coarse, log_z })
    }

    /// ln ∫ e^{S[φ] + J·φ} dφ.
    pub fn log_z(&self) -> f64 {
        self.log_z
    }

    fn integrate(&self, weights: &[f64], x: &[usize]) -> f64 {
        let strides: Vec<usize> = x.iter().map(|&a| self.points.pow(a as u32)).collect();
        weights
            .iter()
            .enumerate()
            .filter(|(_, w)| **w != 0.0)
            .map(|(idx, w)| {
                w * strides
                    .iter()
                    .map(|s| self.nodes[idx / s % self.points])
                    .product::<f64>()
            })
            .sum()
    }

    /// ⟨φ_X⟩.
    pub fn moment(&self, x: &[usize]) -> f64 {
        self.integrate(&self.weights, x)
    }

    /// ⟨φ_X⟩ with the error estimate from the grid of twice the spacing.
    pub fn estimate(&self, x: &[usize]) -> Estimate {
        let value = self.moment(x);
        let coarse = self.integrate(&self.coarse_weights, x);
        Estimate { value, stderr: (value - coarse).abs() }
    }

    /// Table of ⟨φ_X⟩ for every multiset with |X| ≤ `max_order`.
    pub fn green_table(&self, max_order: usize) -> GreenTable<f64> {
        GreenTable::from_fn(TableKind::Ordinary, self.n, max_order, |x| self.moment(x))
    }

    pub fn mean(&self) -> DVector<f64> {
        DVector::from_iterator(self.n, (0..self.n).map(|a| self.moment(&[a])))
    }

    /// Connected two-point function.
    pub fn covariance(&self) -> DMatrix<f64> {
        let mean = self.mean();
        let mut c = DMatrix::zeros(self.n, self.n);
        for a in 0..self.n {
            for b in a..self.n {
                let v = self.moment(&[a, b]) - mean[a] * mean[b];
                c[(a, b)] = v;
                c[(b, a)] = v;
            }
        }
        c
    }
}

#[derive(Clone, Debug, Default)]
struct BlockSums {
    w: f64,
    w2: f64,
    wf: Vec<f64>,
    w2f: Vec<f64>,
    w2f2: Vec<f64>,
}

impl BlockSums {
    fn new(k: usize) -> Self {
        BlockSums { w: 0.0, w2: 0.0, wf: vec![0.0; k], w2f: vec![0.0; k], w2f2: vec![0.0; k] }
    }

    fn merge(&mut self, o: &BlockSums) {
        self.w += o.w;
        self.w2 += o.w2;
        for i in 0..self.wf.len() {
            self.wf[i] += o.wf[i];
            self.w2f[i] += o.w2f[i];
            self.w2f2[i] += o.w2f2[i];
        }
    }
}

/// Self-normalised importance sampling of ⟨φ_X⟩ for every X in `xs`: draws
/// from the Gaussian part N(0, g) and weights by e^{S_I}. Blocks draw from
/// their own substreams and are merged in block order, so the result depends
/// only on (seed, samples, block_size).
pub fn monte_carlo(model: &FieldModel<f64>, xs: &[Vec<usize>], cfg: MonteCarloConfig) -> Result<Vec<Estimate>> {
    if cfg.samples == 0 || cfg.block_size == 0 {
        return Err(Error::Domain("need a positive sample count and block size".into()));
    }
    model.check_bounded_above()?;
    let n = model.size();
    let chol = model
        .g_matrix()
        .cholesky()
        .ok_or_else(|| Error::Model("covariance is not positive definite".into()))?
        .l();
    let blocks = cfg.samples.div_ceil(cfg.block_size);
    let k = xs.len();
    let per_block: Vec<BlockSums> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut r = rng::stream(cfg.seed, "field-mc", b as u64);
            let count = cfg.block_size.min(cfg.samples - b * cfg.block_size);
            let mut sums = BlockSums::new(k);
            let mut z = DVector::zeros(n);
            for _ in 0..count {
                for zi in z.iter_mut() {
                    *zi = r.sample(StandardNormal);
                }
                let phi = &chol * &z;
                let phi = phi.as_slice();
                let w = model.interaction(phi).exp();
                sums.w += w;
                sums.w2 += w * w;
                for (i, x) in xs.iter().enumerate() {
                    let f: f64 = x.iter().map(|&a| phi[a]).product();
                    sums.wf[i] += w * f;
                    sums.w2f[i] += w * w * f;
                    sums.w2f2[i] += w * w * f * f;
                }
            }
            sums
        })
        .collect();
    let mut total = BlockSums::new(k);
    for s in &per_block {
        total.merge(s);
    }
    if !(total.w > 0.0) || !total.w.is_finite() {
        return Err(Error::Diagnostic("importance weights degenerate".into()));
    }
    Ok((0..k)
        .map(|i| {
            let r = total.wf[i] / total.w;
            let var = (total.w2f2[i] - 2.0 * r * total.w2f[i] + r * r * total.w2) / (total.w * total.w);
            Estimate { value: r, stderr: var.max(0.0).sqrt() }
        })
        .collect())
}

/// ⟨φ_X⟩ under the model measure at zero source.
pub fn measure_oracle(model: &FieldModel<f64>, x: &[usize], method: OracleMethod) -> Result<Estimate> {
    if x.iter().any(|&i| i >= model.size()) {
        return Err(Error::Domain("index outside the index set".into()));
    }
    match method {
        OracleMethod::Quadrature => {
            let q = Quadrature::new(model, &vec![0.0; model.size()])?;
            Ok(q.estimate(x))
        }
        OracleMethod::MonteCarlo(cfg) => Ok(monte_carlo(model, &[x.to_vec()], cfg)?[0]),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_variance() {
        let m = FieldModel::with_default_labels(vec![vec![2.0]], vec![]).unwrap();
        let e = measure_oracle(&m, &[0, 0], OracleMethod::Quadrature).unwrap();
        assert!((e.value - 2.0).abs() < 1e-6);
        let e = measure_oracle(&m, &[0, 0, 0, 0], OracleMethod::Quadrature).unwrap();
        assert!((e.value - 12.0).abs() < 1e-5);
    }

    #[test]
    fn divergent_model_rejected() {
        let m = FieldModel::with_default_labels(vec![vec![1.0]], vec![(vec![0, 0, 0, 0], 0.6)]).unwrap();
        assert!(matches!(Quadrature::new(&m, &[0.0]), Err(Error::Model(_))));
    }

    #[test]
    fn too_many_labels() {
        let g = (0..4).map(|i| (0..4).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
        let m = FieldModel::with_default_labels(g, vec![]).unwrap();
        assert!(matches!(Quadrature::new(&m, &[0.0; 4]), Err(Error::Capacity { .. })));
    }
}
