use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::expansion::EffectiveActionTable;
use super::model::FieldModel;
use super::oracle::Quadrature;
use super::table::{all_multisets, multiplicity_factorial};
use crate::combinat::RestrictedGrowth;
use crate::error::{domain, Error, Result};

/// Step in J (and φ) for the finite-difference Hessians.
pub const FD_STEP: f64 = 1e-3;

/// W[J] = ln Z[J] − ln Z[0] from the quadrature oracle.
struct Generating<'a> {
    model: &'a FieldModel<f64>,
    log_z0: f64,
}

impl<'a> Generating<'a> {
    fn new(model: &'a FieldModel<f64>) -> Result<Self> {
        let log_z0 = Quadrature::new(model, &vec![0.0; model.size()])?.log_z();
        Ok(Generating { model, log_z0 })
    }

    fn w(&self, j: &[f64]) -> Result<f64> {
        Ok(Quadrature::new(self.model, j)?.log_z() - self.log_z0)
    }

    /// Solves ∇W[J] = φ by Newton's method, using the oracle mean and
    /// covariance as gradient and Hessian.
    fn source_for(&self, phi: &[f64]) -> Result<DVector<f64>> {
        let target = DVector::from_column_slice(phi);
        let mut j = self.model.precision_matrix() * &target;
        for _ in 0..60 {
            let q = Quadrature::new(self.model, j.as_slice())?;
            let r = q.mean() - &target;
            if r.amax() < 1e-14 {
                return Ok(j);
            }
            let step = q
                .covariance()
                .cholesky()
                .ok_or_else(|| Error::Diagnostic("W is not convex at this source".into()))?
                .solve(&r);
            j -= step;
        }
        Err(Error::Diagnostic("Legendre inversion did not converge".into()))
    }

    /// Γ[φ] = W[J] − J·φ at the source solving ∇W[J] = φ.
    fn gamma(&self, phi: &[f64]) -> Result<f64> {
        let j = self.source_for(phi)?;
        Ok(self.w(j.as_slice())? - j.dot(&DVector::from_column_slice(phi)))
    }
}

/// Central second differences with one Richardson step.
fn hessian(f: &dyn Fn(&[f64]) -> Result<f64>, x: &[f64], h: f64) -> Result<DMatrix<f64>> {
    let n = x.len();
    let raw = |h: f64| -> Result<DMatrix<f64>> {
        let at = |di: &[(usize, f64)]| -> Result<f64> {
            let mut p = x.to_vec();
            for &(i, d) in di {
                p[i] += d;
            }
            f(&p)
        };
        let centre = f(x)?;
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = (at(&[(i, h)])? - 2.0 * centre + at(&[(i, -h)])?) / (h * h);
            for k in 0..i {
                let v = (at(&[(i, h), (k, h)])? - at(&[(i, h), (k, -h)])? - at(&[(i, -h), (k, h)])?
                    + at(&[(i, -h), (k, -h)])?)
                    / (4.0 * h * h);
                m[(i, k)] = v;
                m[(k, i)] = v;
            }
        }
        Ok(m)
    };
    let coarse = raw(h)?;
    let fine = raw(h / 2.0)?;
    Ok((fine * 4.0 - coarse) / 3.0)
}

fn to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect()).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LegendreReport {
    pub w2: Vec<Vec<f64>>,
    pub gamma2: Vec<Vec<f64>>,
    /// max |(W″Γ″ + 1)_{xy}|.
    pub deviation: f64,
}

/// Finite-difference check that W″[J] and Γ″[φ̄[J]] are negative inverses.
pub fn legendre_duality_check(model: &FieldModel<f64>, j: &[f64]) -> Result<LegendreReport> {
    if j.len() != model.size() {
        return domain("source has the wrong length");
    }
    let gen = Generating::new(model)?;
    let w2 = hessian(&|p| gen.w(p), j, FD_STEP)?;
    if w2.clone().cholesky().is_none() {
        return Err(Error::Diagnostic("finite-difference W″ is not positive definite".into()));
    }
    let phi_bar = Quadrature::new(model, j)?.mean();
    let gamma2 = hessian(&|p| gen.gamma(p), phi_bar.as_slice(), FD_STEP)?;
    let n = model.size();
    let prod = &w2 * &gamma2 + DMatrix::<f64>::identity(n, n);
    Ok(LegendreReport { w2: to_rows(&w2), gamma2: to_rows(&gamma2), deviation: prod.amax() })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SelfEnergyReport {
    /// π = Γ″[0] + L.
    pub pi: Vec<Vec<f64>>,
    /// max |W″ − S_k| for S_1 = G, S_2 = G + GπG, S_3 = S_2 + GπGπG.
    pub errors: Vec<f64>,
    pub strictly_decreasing: bool,
}

/// Compares W″[0] with the partial sums of G + GπG + GπGπG + ⋯.
pub fn self_energy_check(model: &FieldModel<f64>) -> Result<SelfEnergyReport> {
    let n = model.size();
    let zero = vec![0.0; n];
    let gen = Generating::new(model)?;
    let w2 = hessian(&|p| gen.w(p), &zero, FD_STEP)?;
    let phi_bar = Quadrature::new(model, &zero)?.mean();
    let gamma2 = hessian(&|p| gen.gamma(p), phi_bar.as_slice(), FD_STEP)?;
    let g = model.g_matrix();
    let pi = &gamma2 + model.precision_matrix();
    let mut partial = g.clone();
    let mut chain = g.clone();
    let mut errors = vec![(&w2 - &partial).amax()];
    for _ in 0..2 {
        chain = &chain * &pi * &g;
        partial += &chain;
        errors.push((&w2 - &partial).amax());
    }
    let strictly_decreasing = errors.windows(2).all(|w| w[1] < w[0]);
    Ok(SelfEnergyReport { pi: to_rows(&pi), errors, strictly_decreasing })
}

/// Iterates φ ← G(J + πφ + Σ_{k≥3} Γ^{(k)}φ^{k−1}/(k−1)!) from φ = 0 and
/// returns every iterate, the starting point included.
pub fn mean_field_tree_expansion(
    model: &FieldModel<f64>,
    eff: &EffectiveActionTable<f64>,
    j: &[f64],
    iterations: usize,
) -> Result<Vec<DVector<f64>>> {
    let n = model.size();
    if j.len() != n || eff.n_labels() != n {
        return domain("source and effective action must match the index set");
    }
    let g = model.g_matrix();
    let pi = DMatrix::from_fn(n, n, |x, y| eff.get(&[x, y]).copied().unwrap_or(0.0) + model.precision()[x][y]);
    let higher: Vec<(usize, Vec<usize>, f64)> = (0..n)
        .flat_map(|x| {
            all_multisets(n, eff.max_order().saturating_sub(1))
                .into_iter()
                .filter(|m| m.len() >= 2)
                .map(move |m| (x, m))
        })
        .filter_map(|(x, m)| {
            let mut key = m.clone();
            key.push(x);
            let v = *eff.get(&key).ok()?;
            (v != 0.0).then(|| (x, m.clone(), v / multiplicity_factorial(&m) as f64))
        })
        .collect();
    let jv = DVector::from_column_slice(j);
    let mut phi = DVector::zeros(n);
    let mut out = vec![phi.clone()];
    let mut last_step = f64::INFINITY;
    let mut growth = 0;
    for _ in 0..iterations {
        let mut force = &jv + &pi * &phi;
        for (x, m, w) in &higher {
            force[*x] += w * m.iter().map(|&i| phi[i]).product::<f64>();
        }
        let next = &g * force;
        let step = (&next - &phi).norm();
        if !step.is_finite() {
            return Err(Error::NonContraction("iterate is not finite".into()));
        }
        growth = if step > last_step { growth + 1 } else { 0 };
        if growth >= 3 {
            return Err(Error::NonContraction(format!("step size grew three times in a row, now {step:.3e}")));
        }
        last_step = step;
        phi = next;
        out.push(phi.clone());
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LeibnizReport {
    /// ∂^X e^{W} / e^{W} at J.
    pub lhs: f64,
    /// Σ over partitions of ∏_A ∂^A W.
    pub rhs: f64,
    pub abs_error: f64,
}

/// Finite-difference check of ∂^X e^{W} = e^{W} Σ_{𝒜∈𝔓(X)} ∏_{A∈𝒜} ∂^A W.
pub fn leibniz_check(model: &FieldModel<f64>, j: &[f64], x: &[usize], h: f64) -> Result<LeibnizReport> {
    let n = model.size();
    if j.len() != n || x.iter().any(|&i| i >= n) {
        return domain("source or index outside the index set");
    }
    if x.is_empty() || x.len() > 3 {
        return domain("the finite-difference check covers 1 ≤ |X| ≤ 3");
    }
    let base = Quadrature::new(model, j)?.log_z();
    let w = |p: &[f64]| -> Result<f64> { Ok(Quadrature::new(model, p)?.log_z() - base) };
    // nested central differences over the multiset `d`
    let deriv = |f: &dyn Fn(&[f64]) -> Result<f64>, d: &[usize]| -> Result<f64> {
        let k = d.len();
        let mut acc = 0.0;
        for signs in 0..1u32 << k {
            let mut p = j.to_vec();
            let mut sign = 1.0;
            for (bit, &i) in d.iter().enumerate() {
                if signs >> bit & 1 == 1 {
                    p[i] -= h;
                    sign = -sign;
                } else {
                    p[i] += h;
                }
            }
            acc += sign * f(&p)?;
        }
        Ok(acc / (2.0 * h).powi(k as i32))
    };
    let lhs = deriv(&|p| Ok(w(p)?.exp()), x)?;
    let mut rhs = 0.0;
    let mut cursor = RestrictedGrowth::new(x.len(), 1, x.len());
    while cursor.advance() {
        let k = cursor.num_blocks();
        let mut blocks = vec![Vec::new(); k];
        for (pos, &b) in cursor.current().iter().enumerate() {
            blocks[b as usize].push(x[pos]);
        }
        let mut term = 1.0;
        for b in &blocks {
            term *= deriv(&w, b)?;
        }
        rhs += term;
    }
    Ok(LeibnizReport { lhs, rhs, abs_error: (lhs - rhs).abs() })
}
