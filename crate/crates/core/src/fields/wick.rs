use std::collections::{BTreeMap, HashMap};

use super::scalar::Scalar;
use super::table::{greens_to_cumulants, moment_from_cumulants, GreenTable, Multiset, TableKind};
use crate::combinat::RestrictedGrowth;
use crate::error::{domain, Result};

/// A polynomial in the field variables: monomial multiset ↦ coefficient.
#[derive(Clone, Debug, PartialEq)]
pub struct WickPolynomial<S: Scalar> {
    terms: BTreeMap<Multiset, S>,
}

impl<S: Scalar> WickPolynomial<S> {
    pub fn zero() -> Self {
        WickPolynomial { terms: BTreeMap::new() }
    }

    pub fn constant(c: S) -> Self {
        Self::monomial(Vec::new(), c)
    }

    pub fn monomial(mut m: Multiset, c: S) -> Self {
        m.sort_unstable();
        let mut p = Self::zero();
        p.add_term(m, c);
        p
    }

    fn add_term(&mut self, m: Multiset, c: S) {
        if c.is_zero() {
            return;
        }
        let e = self.terms.entry(m).or_insert_with(S::zero);
        *e = e.clone() + c;
        self.terms.retain(|_, v| !v.is_zero());
    }

    pub fn terms(&self) -> &BTreeMap<Multiset, S> {
        &self.terms
    }

    /// Coefficient of a monomial given in any order.
    pub fn coefficient(&self, m: &[usize]) -> S {
        let mut k = m.to_vec();
        k.sort_unstable();
        self.terms.get(&k).cloned().unwrap_or_else(S::zero)
    }

    pub fn add_scaled(&mut self, other: &Self, c: &S) {
        for (m, v) in &other.terms {
            self.add_term(m.clone(), v.clone() * c.clone());
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (a, va) in &self.terms {
            for (b, vb) in &other.terms {
                let mut m = a.clone();
                m.extend_from_slice(b);
                m.sort_unstable();
                out.add_term(m, va.clone() * vb.clone());
            }
        }
        out
    }

    /// ⟨p⟩ in the state with the given cumulants.
    pub fn expectation(&self, cum: &GreenTable<S>) -> Result<S> {
        let mut acc = S::zero();
        for (m, v) in &self.terms {
            acc = acc + v.clone() * moment_from_cumulants(cum, m)?;
        }
        Ok(acc)
    }
}

fn as_cumulants<S: Scalar>(state: &GreenTable<S>) -> Result<GreenTable<S>> {
    match state.kind() {
        TableKind::Cumulant => Ok(state.clone()),
        TableKind::Ordinary => greens_to_cumulants(state),
    }
}

/// :φ_X: in the given state (moments or cumulants), by the recursion
/// :φ_X: = φ_X − ⟨φ_X⟩ − Σ_{𝒜, N(𝒜) ≥ 2} Σ_{A∈𝒜} (∏_{B≠A} ⟨⟨φ_B⟩⟩) :φ_A:.
pub fn wick_monomial<S: Scalar>(state: &GreenTable<S>, x: &[usize]) -> Result<WickPolynomial<S>> {
    if x.len() > 20 {
        return domain("Wick monomials are limited to 20 factors");
    }
    let cum = as_cumulants(state)?;
    let mut memo = HashMap::new();
    let all = (1u32 << x.len()) - 1;
    wick_rec(&cum, x, all, &mut memo)
}

fn wick_rec<S: Scalar>(
    cum: &GreenTable<S>,
    x: &[usize],
    mask: u32,
    memo: &mut HashMap<u32, WickPolynomial<S>>,
) -> Result<WickPolynomial<S>> {
    if let Some(p) = memo.get(&mask) {
        return Ok(p.clone());
    }
    let positions: Vec<usize> = (0..x.len()).filter(|&i| mask >> i & 1 == 1).collect();
    let labels: Vec<usize> = positions.iter().map(|&p| x[p]).collect();
    let mut out = WickPolynomial::monomial(labels.clone(), S::one());
    if positions.is_empty() {
        memo.insert(mask, out.clone());
        return Ok(out);
    }
    out.add_term(Vec::new(), -moment_from_cumulants(cum, &labels)?);
    let n = positions.len();
    if n >= 2 {
        let mut cursor = RestrictedGrowth::new(n, 2, n);
        while cursor.advance() {
            let k = cursor.num_blocks();
            let mut block_masks = vec![0u32; k];
            let mut block_labels: Vec<Vec<usize>> = vec![Vec::new(); k];
            for (i, &b) in cursor.current().iter().enumerate() {
                block_masks[b as usize] |= 1 << positions[i];
                block_labels[b as usize].push(labels[i]);
            }
            let kappas = block_labels
                .iter()
                .map(|b| cum.get(b).cloned())
                .collect::<Result<Vec<S>>>()?;
            for a in 0..k {
                let mut w = S::one();
                for (b, kb) in kappas.iter().enumerate() {
                    if b != a {
                        w = w * kb.clone();
                    }
                }
                if w.is_zero() {
                    continue;
                }
                let sub = wick_rec(cum, x, block_masks[a], memo)?;
                out.add_scaled(&sub, &-w);
            }
        }
    }
    memo.insert(mask, out.clone());
    Ok(out)
}

/// ⟨:φ_{Y_1}:⋯:φ_{Y_m}: φ_X⟩ as the sum over partitions of all factors
/// having no block inside a single Y_j, of ∏ ⟨⟨φ_A⟩⟩.
pub fn wick_product_expectation<S: Scalar>(state: &GreenTable<S>, ys: &[Vec<usize>], x: &[usize]) -> Result<S> {
    let cum = as_cumulants(state)?;
    let mut labels = Vec::new();
    let mut group = Vec::new();
    for (j, y) in ys.iter().enumerate() {
        labels.extend_from_slice(y);
        group.extend(std::iter::repeat_n(Some(j), y.len()));
    }
    labels.extend_from_slice(x);
    group.extend(std::iter::repeat_n(None, x.len()));
    let n = labels.len();
    if n == 0 {
        return Ok(S::one());
    }
    let mut acc = S::zero();
    let mut cursor = RestrictedGrowth::new(n, 1, n);
    'partitions: while cursor.advance() {
        let k = cursor.num_blocks();
        let mut blocks: Vec<Vec<usize>> = vec![Vec::new(); k];
        for (i, &b) in cursor.current().iter().enumerate() {
            blocks[b as usize].push(i);
        }
        let mut term = S::one();
        for b in &blocks {
            let g0 = group[b[0]];
            if g0.is_some() && b.iter().all(|&i| group[i] == g0) {
                continue 'partitions;
            }
            let ls: Vec<usize> = b.iter().map(|&i| labels[i]).collect();
            term = term * cum.get(&ls)?.clone();
        }
        acc = acc + term;
    }
    Ok(acc)
}

/// The same expectation by multiplying out the Wick polynomials.
pub fn wick_product_expectation_brute<S: Scalar>(
    state: &GreenTable<S>,
    ys: &[Vec<usize>],
    x: &[usize],
) -> Result<S> {
    let cum = as_cumulants(state)?;
    let mut p = WickPolynomial::monomial(x.to_vec(), S::one());
    for y in ys {
        p = p.mul(&wick_monomial(&cum, y)?);
    }
    p.expectation(&cum)
}
