use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::model::FieldModel;
use super::scalar::Scalar;
use crate::combinat::{block_mobius, for_each_pairing, RestrictedGrowth};
use crate::error::{domain, Error, Result};

/// A sorted sequence of indices into Λ.
pub type Multiset = Vec<usize>;

/// ∏ over distinct entries of (multiplicity)!.
pub fn multiplicity_factorial(m: &[usize]) -> u64 {
    let mut out = 1u64;
    let mut run = 1u64;
    for w in m.windows(2) {
        if w[0] == w[1] {
            run += 1;
            out *= run;
        } else {
            run = 1;
        }
    }
    out
}

/// All multisets over `0..n_labels` of size `0..=max_order`, ordered by size
/// then lexicographically.
pub fn all_multisets(n_labels: usize, max_order: usize) -> Vec<Multiset> {
    fn rec(n: usize, k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Multiset>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(n, k, i, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    for k in 0..=max_order {
        rec(n_labels, k, 0, &mut Vec::new(), &mut out);
    }
    out
}

/// Whether a table holds moments ⟨φ_X⟩ or cumulants ⟨⟨φ_X⟩⟩.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TableKind {
    Ordinary,
    Cumulant,
}

/// Green functions or cumulants keyed by index multiset.
#[derive(Clone, Debug, PartialEq)]
pub struct GreenTable<S: Scalar = f64> {
    kind: TableKind,
    n_labels: usize,
    values: BTreeMap<Multiset, S>,
    source: Option<Vec<f64>>,
}

impl<S: Scalar> GreenTable<S> {
    /// An empty table. Ordinary tables get ⟨φ_∅⟩ = 1.
    pub fn new(kind: TableKind, n_labels: usize) -> Self {
        let mut values = BTreeMap::new();
        if kind == TableKind::Ordinary {
            values.insert(Vec::new(), S::one());
        }
        GreenTable { kind, n_labels, values, source: None }
    }

    /// Fills every multiset up to `max_order` from `f`.
    pub fn from_fn(kind: TableKind, n_labels: usize, max_order: usize, mut f: impl FnMut(&[usize]) -> S) -> Self {
        let mut t = Self::new(kind, n_labels);
        for m in all_multisets(n_labels, max_order) {
            if m.is_empty() {
                continue;
            }
            let v = f(&m);
            t.values.insert(m, v);
        }
        t
    }

    pub fn kind(&self) -> TableKind {
        self.kind
    }

    pub fn n_labels(&self) -> usize {
        self.n_labels
    }

    /// Records the source J the table was computed at.
    pub fn with_source(mut self, j: Vec<f64>) -> Self {
        self.source = Some(j);
        self
    }

    pub fn source(&self) -> Option<&[f64]> {
        self.source.as_deref()
    }

    /// Inserts the value of an index multiset given in any order.
    pub fn insert(&mut self, mut key: Vec<usize>, value: S) -> Result<()> {
        if key.iter().any(|&i| i >= self.n_labels) {
            return domain("index outside the index set");
        }
        key.sort_unstable();
        self.values.insert(key, value);
        Ok(())
    }

    /// Value at a multiset given in any order.
    pub fn get(&self, key: &[usize]) -> Result<&S> {
        let mut k = key.to_vec();
        k.sort_unstable();
        self.values
            .get(&k)
            .ok_or_else(|| Error::Domain(format!("table has no entry for {k:?}")))
    }

    pub fn values(&self) -> &BTreeMap<Multiset, S> {
        &self.values
    }

    /// Largest order stored.
    pub fn max_order(&self) -> usize {
        self.values.keys().map(Vec::len).max().unwrap_or(0)
    }

    /// `key,value` lines with keys written as space-separated labels.
    pub fn to_csv(&self, labels: &[String]) -> String {
        let mut out = String::from("key,value\n");
        for (k, v) in &self.values {
            let key: Vec<&str> = k.iter().map(|&i| labels[i].as_str()).collect();
            let _ = writeln!(out, "{},{}", key.join(" "), v.to_f64());
        }
        out
    }
}

fn require_gaussian<S: Scalar>(model: &FieldModel<S>) -> Result<()> {
    if !model.is_gaussian() {
        return Err(Error::Model("Isserlis sums apply to models without vertices".into()));
    }
    Ok(())
}

/// ⟨φ_X⟩ in the centred Gaussian state: Σ over pairings of ∏ g_{x_p x_q}.
pub fn isserlis_green<S: Scalar>(model: &FieldModel<S>, x: &[usize]) -> Result<S> {
    require_gaussian(model)?;
    if x.iter().any(|&i| i >= model.size()) {
        return domain("index outside the index set");
    }
    if x.len() % 2 == 1 {
        return Ok(S::zero());
    }
    let g = model.g();
    let mut acc = S::zero();
    for_each_pairing(x.len(), &mut |pairs| {
        let mut t = S::one();
        for &(p, q) in pairs {
            t = t * g[x[p]][x[q]].clone();
        }
        acc = acc.clone() + t;
    });
    Ok(acc)
}

/// Isserlis Green functions for every multiset up to `max_order`.
pub fn isserlis_table<S: Scalar>(model: &FieldModel<S>, max_order: usize) -> Result<GreenTable<S>> {
    require_gaussian(model)?;
    let mut t = GreenTable::new(TableKind::Ordinary, model.size());
    for m in all_multisets(model.size(), max_order) {
        if !m.is_empty() {
            let v = isserlis_green(model, &m)?;
            t.values.insert(m, v);
        }
    }
    Ok(t)
}

/// Σ over set partitions of the positions of `x` of weight(N) ∏_blocks t(block).
fn partition_sum<S: Scalar>(
    x: &[usize],
    lookup: impl Fn(&[usize]) -> Result<S>,
    weight: impl Fn(usize) -> S,
) -> Result<S> {
    let n = x.len();
    let mut acc = S::zero();
    let mut cursor = RestrictedGrowth::new(n, 1, n);
    let mut blocks: Vec<Vec<usize>> = Vec::with_capacity(n);
    while cursor.advance() {
        let k = cursor.num_blocks();
        blocks.iter_mut().for_each(Vec::clear);
        blocks.resize(k.max(blocks.len()), Vec::new());
        for (pos, &b) in cursor.current().iter().enumerate() {
            blocks[b as usize].push(x[pos]);
        }
        let mut term = weight(k);
        for b in &mut blocks[..k] {
            b.sort_unstable();
            term = term * lookup(b)?;
        }
        acc = acc + term;
    }
    Ok(acc)
}

/// ⟨⟨φ_X⟩⟩ = Σ over partitions of (−1)^{N−1}(N−1)! ∏_A ⟨φ_A⟩ for every key
/// of the table.
pub fn greens_to_cumulants<S: Scalar>(t: &GreenTable<S>) -> Result<GreenTable<S>> {
    if t.kind != TableKind::Ordinary {
        return domain("expected a table of moments");
    }
    let mut out = GreenTable::new(TableKind::Cumulant, t.n_labels);
    out.source = t.source.clone();
    for key in t.values.keys().filter(|k| !k.is_empty()) {
        let v = partition_sum(key, |b| t.get(b).cloned(), |k| {
            S::from_i64(i64::try_from(block_mobius(k)).expect("small"))
        })?;
        out.values.insert(key.clone(), v);
    }
    Ok(out)
}

/// ⟨φ_X⟩ = Σ over partitions of ∏_A ⟨⟨φ_A⟩⟩ for every key of the table.
pub fn cumulants_to_greens<S: Scalar>(t: &GreenTable<S>) -> Result<GreenTable<S>> {
    if t.kind != TableKind::Cumulant {
        return domain("expected a table of cumulants");
    }
    let mut out = GreenTable::new(TableKind::Ordinary, t.n_labels);
    out.source = t.source.clone();
    for key in t.values.keys().filter(|k| !k.is_empty()) {
        let v = partition_sum(key, |b| t.get(b).cloned(), |_| S::one())?;
        out.values.insert(key.clone(), v);
    }
    Ok(out)
}

/// ⟨φ_M⟩ for an arbitrary multiset from a cumulant table.
pub(crate) fn moment_from_cumulants<S: Scalar>(cum: &GreenTable<S>, m: &[usize]) -> Result<S> {
    if m.is_empty() {
        return Ok(S::one());
    }
    partition_sum(m, |b| cum.get(b).cloned(), |_| S::one())
}

/// Dyson–Schwinger residual
/// ⟨φ_{x∪X}⟩ − Σ_{x′∈X} g_{xx′}⟨φ_{X∖x′}⟩ − Σ_y g_{xy} Σ_M v^{y∪M}/∏mult(M)! ⟨φ_M φ_X⟩.
pub fn ds_residual<S: Scalar>(model: &FieldModel<S>, greens: &GreenTable<S>, x: usize, xs: &[usize]) -> Result<S> {
    if greens.kind != TableKind::Ordinary {
        return domain("expected a table of moments");
    }
    let n = model.size();
    if x >= n || xs.iter().any(|&i| i >= n) {
        return domain("index outside the index set");
    }
    let g = model.g();
    let mut lhs: Vec<usize> = xs.to_vec();
    lhs.push(x);
    let mut r = greens.get(&lhs)?.clone();
    for i in 0..xs.len() {
        let mut rest = xs.to_vec();
        let xp = rest.remove(i);
        r = r - g[x][xp].clone() * greens.get(&rest)?.clone();
    }
    for (y, row) in g[x].iter().enumerate() {
        if row.is_zero() {
            continue;
        }
        for (m, w) in model.interaction_gradient(y) {
            let mut key = m;
            key.extend_from_slice(xs);
            r = r - row.clone() * w * greens.get(&key)?.clone();
        }
    }
    Ok(r)
}
