use std::collections::{BTreeMap, HashMap};

use super::scalar::{invert, Scalar};
use super::table::{all_multisets, GreenTable, Multiset, TableKind};
use crate::combinat::{enumerate_hierarchies, HNode, RestrictedGrowth};
use crate::error::{domain, Error, Result};

/// Vertex functions Γ^X of the effective action at the mean field, keyed by
/// multiset, for orders 2 up to `max_order`. Γ^x vanishes in a centred state
/// and is not stored.
#[derive(Clone, Debug, PartialEq)]
pub struct EffectiveActionTable<S: Scalar = f64> {
    n_labels: usize,
    max_order: usize,
    values: BTreeMap<Multiset, S>,
}

impl<S: Scalar> EffectiveActionTable<S> {
    /// Fills every multiset of order 2..=max_order from `f`.
    pub fn from_fn(n_labels: usize, max_order: usize, mut f: impl FnMut(&[usize]) -> S) -> Self {
        let values = all_multisets(n_labels, max_order)
            .into_iter()
            .filter(|m| m.len() >= 2)
            .map(|m| {
                let v = f(&m);
                (m, v)
            })
            .collect();
        EffectiveActionTable { n_labels, max_order, values }
    }

    pub fn n_labels(&self) -> usize {
        self.n_labels
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    pub fn values(&self) -> &BTreeMap<Multiset, S> {
        &self.values
    }

    /// Γ at an index multiset in any order.
    pub fn get(&self, key: &[usize]) -> Result<&S> {
        let mut k = key.to_vec();
        k.sort_unstable();
        self.values
            .get(&k)
            .ok_or_else(|| Error::Domain(format!("effective action has no entry for {k:?}")))
    }

    /// π^{xy} = Γ^{xy} + g^{xy}, given the bare precision g^{xy}.
    pub fn self_energy(&self, precision: &[Vec<S>]) -> Result<Vec<Vec<S>>> {
        let n = self.n_labels;
        (0..n)
            .map(|x| (0..n).map(|y| Ok(self.get(&[x, y])?.clone() + precision[x][y].clone())).collect())
            .collect()
    }
}

/// Visits each set partition of `0..n` with at least `min_blocks` and at
/// most `max_blocks` blocks, as a list of position lists.
fn for_each_partition(n: usize, min_blocks: usize, max_blocks: usize, f: &mut impl FnMut(&[Vec<usize>]) -> Result<()>) -> Result<()> {
    if n == 0 || min_blocks > max_blocks.min(n) {
        return Ok(());
    }
    let mut cursor = RestrictedGrowth::new(n, min_blocks, max_blocks.min(n));
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    while cursor.advance() {
        let k = cursor.num_blocks();
        blocks.clear();
        blocks.resize(k, Vec::new());
        for (pos, &b) in cursor.current().iter().enumerate() {
            blocks[b as usize].push(pos);
        }
        f(&blocks)?;
    }
    Ok(())
}

/// Σ over index assignments q ∈ Λ^k of body(q).
fn sum_over_indices<S: Scalar>(n_labels: usize, k: usize, mut body: impl FnMut(&[usize]) -> Result<S>) -> Result<S> {
    let mut acc = S::zero();
    let mut q = vec![0usize; k];
    loop {
        acc = acc + body(&q)?;
        let mut i = 0;
        loop {
            if i == k {
                return Ok(acc);
            }
            q[i] += 1;
            if q[i] < n_labels {
                break;
            }
            q[i] = 0;
            i += 1;
        }
    }
}

/// One step of the cumulant recurrence:
/// Σ_p C_{yp} Σ_{𝒜 ∈ 𝔓(X), N(𝒜) in the window} Σ_q Γ^{p q_1…q_N} ∏_A K(q_A ∪ A),
/// with `k(q, A)` supplying the lower cumulants (A given as positions of X).
fn recurrence_step<S: Scalar>(
    n_labels: usize,
    y: usize,
    xs_len: usize,
    blocks_window: (usize, usize),
    eff: &dyn Fn(&[usize]) -> Result<S>,
    cov: &[Vec<S>],
    k: &mut dyn FnMut(usize, &[usize]) -> Result<S>,
) -> Result<S> {
    let mut total = S::zero();
    for_each_partition(xs_len, blocks_window.0, blocks_window.1, &mut |blocks| {
        let nb = blocks.len();
        // lower cumulants for every (q, block) pair
        let mut lower: Vec<Vec<S>> = Vec::with_capacity(nb);
        for b in blocks {
            lower.push((0..n_labels).map(|q| k(q, b)).collect::<Result<Vec<S>>>()?);
        }
        for p in 0..n_labels {
            if cov[y][p].is_zero() {
                continue;
            }
            let inner = sum_over_indices(n_labels, nb, |q| {
                let mut key = Vec::with_capacity(nb + 1);
                key.push(p);
                key.extend_from_slice(q);
                let mut t = eff(&key)?;
                if t.is_zero() {
                    return Ok(t);
                }
                for (i, &qi) in q.iter().enumerate() {
                    t = t * lower[i][qi].clone();
                }
                Ok(t)
            })?;
            total = total.clone() + cov[y][p].clone() * inner;
        }
        Ok(())
    })?;
    Ok(total)
}

fn check_square<S: Scalar>(cov: &[Vec<S>], n: usize) -> Result<()> {
    if cov.len() != n || cov.iter().any(|r| r.len() != n) {
        return domain(format!("two-point cumulants must form an {n}×{n} matrix"));
    }
    Ok(())
}

/// ⟨⟨φ_y φ_X⟩⟩ by iterating the one-step recurrence
/// ⟨⟨φ_yφ_X⟩⟩ = C_{yp} Σ_{𝒜∈𝔓(X), N≥2} Γ^{p q_A…} ∏_A ⟨⟨φ_{q_A}φ_A⟩⟩,
/// with ⟨⟨φ_qφ_x⟩⟩ = C_{qx}.
pub fn cumulant_by_recurrence<S: Scalar>(
    y: usize,
    xs: &[usize],
    eff: &EffectiveActionTable<S>,
    cov2: &[Vec<S>],
) -> Result<S> {
    let n = eff.n_labels;
    check_square(cov2, n)?;
    if xs.is_empty() {
        return domain("the recurrence needs |X| ≥ 1");
    }
    if y >= n || xs.iter().any(|&x| x >= n) {
        return domain("index outside the index set");
    }
    if xs.len() + 1 > eff.max_order.max(2) {
        return domain(format!("effective action is populated only to order {}", eff.max_order));
    }
    let mut memo: HashMap<(usize, u64), S> = HashMap::new();
    let all: Vec<usize> = (0..xs.len()).collect();
    rec_cumulant(y, &all, xs, eff, cov2, &mut memo)
}

fn rec_cumulant<S: Scalar>(
    y: usize,
    positions: &[usize],
    xs: &[usize],
    eff: &EffectiveActionTable<S>,
    cov: &[Vec<S>],
    memo: &mut HashMap<(usize, u64), S>,
) -> Result<S> {
    if positions.len() == 1 {
        return Ok(cov[y][xs[positions[0]]].clone());
    }
    let mask = positions.iter().fold(0u64, |m, &p| m | 1 << p);
    if let Some(v) = memo.get(&(y, mask)) {
        return Ok(v.clone());
    }
    let lookup = |key: &[usize]| eff.get(key).cloned();
    let v = recurrence_step(
        eff.n_labels,
        y,
        positions.len(),
        (2, positions.len()),
        &lookup,
        cov,
        &mut |q, block| {
            let sub: Vec<usize> = block.iter().map(|&b| positions[b]).collect();
            rec_cumulant(q, &sub, xs, eff, cov, memo)
        },
    )?;
    memo.insert((y, mask), v.clone());
    Ok(v)
}

/// Inverts the recurrence: from cumulants up to `max_order` (C = the order-2
/// block) recovers Γ^{xy} = −(C⁻¹)_{xy} and, order by order, the higher
/// vertices by amputating C⁻¹ from every leg of the single-vertex remainder.
pub fn effective_action_from_cumulants<S: Scalar>(
    cum: &GreenTable<S>,
    max_order: usize,
) -> Result<EffectiveActionTable<S>> {
    if cum.kind() != TableKind::Cumulant {
        return domain("expected a table of cumulants");
    }
    if max_order < 2 {
        return domain("the effective action starts at order 2");
    }
    let n = cum.n_labels();
    let cov: Vec<Vec<S>> = (0..n)
        .map(|x| (0..n).map(|y| cum.get(&[x, y]).cloned()).collect())
        .collect::<Result<_>>()?;
    let amp = invert(&cov).ok_or_else(|| Error::Diagnostic("two-point cumulant matrix is singular".into()))?;
    let mut values: BTreeMap<Multiset, S> = BTreeMap::new();
    for x in 0..n {
        for y in x..n {
            values.insert(vec![x, y], -amp[x][y].clone());
        }
    }
    for order in 3..=max_order {
        let keys: Vec<Multiset> = all_multisets(n, order).into_iter().filter(|m| m.len() == order).collect();
        // remainder R(Z) = K(Z) − (trees with two or more vertices), symmetric in Z
        let mut remainder: HashMap<Multiset, S> = HashMap::new();
        for z in &keys {
            let y = z[0];
            let xs = &z[1..];
            let lookup = |key: &[usize]| -> Result<S> {
                let mut k = key.to_vec();
                k.sort_unstable();
                Ok(values.get(&k).cloned().unwrap_or_else(S::zero))
            };
            let trees = recurrence_step(n, y, xs.len(), (2, xs.len() - 1), &lookup, &cov, &mut |q, block| {
                let mut key: Vec<usize> = block.iter().map(|&b| xs[b]).collect();
                key.push(q);
                cum.get(&key).cloned()
            })?;
            remainder.insert(z.clone(), cum.get(z)?.clone() - trees);
        }
        for z in &keys {
            let v = sum_over_indices(n, order, |w| {
                let mut t = S::one();
                for (zi, wi) in z.iter().zip(w) {
                    if amp[*zi][*wi].is_zero() {
                        return Ok(S::zero());
                    }
                    t = t * amp[*zi][*wi].clone();
                }
                let mut key = w.to_vec();
                key.sort_unstable();
                Ok(t * remainder[&key].clone())
            })?;
            values.insert(z.clone(), v);
        }
    }
    Ok(EffectiveActionTable { n_labels: n, max_order, values })
}

/// Whether the root covariance leg ⟨⟨φ_yφ_p⟩⟩ is folded into the root Υ or
/// written as a separate factor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum UpsilonConvention {
    RootIncluded,
    RootSeparate,
}

/// One hierarchy's contribution to the cumulant.
#[derive(Clone, Debug, PartialEq)]
pub struct HierarchyTerm<S: Scalar> {
    /// The hierarchy over positions 1..=|X|, e.g. `{{1,2},3}`.
    pub hierarchy: String,
    /// Product of Υ coefficients, e.g. `Υ_{y x1}^{r1} Υ_{r1 x2 x3}`.
    pub symbol: String,
    pub value: S,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HierarchyExpansion<S: Scalar> {
    pub terms: Vec<HierarchyTerm<S>>,
    pub total: S,
}

fn node_symbol(node: &HNode<usize>, parent: Option<&str>, next_r: &mut usize, out: &mut Vec<String>) {
    let mut lower: Vec<String> = parent.map(|p| vec![p.to_string()]).unwrap_or_default();
    let mut upper: Vec<String> = Vec::new();
    let mut deferred: Vec<(&HNode<usize>, String)> = Vec::new();
    for c in &node.children {
        if c.is_leaf() {
            lower.push(format!("x{}", c.set[0] + 1));
        } else {
            *next_r += 1;
            let r = format!("r{next_r}");
            upper.push(r.clone());
            deferred.push((c, r));
        }
    }
    let mut s = String::from("Υ");
    if !lower.is_empty() {
        s.push_str(&format!("_{{{}}}", lower.join(" ")));
    }
    if !upper.is_empty() {
        s.push_str(&format!("^{{{}}}", upper.join(" ")));
    }
    out.push(s);
    for (c, r) in deferred {
        node_symbol(c, Some(&r), next_r, out);
    }
}

fn hierarchy_symbol(root: &HNode<usize>, conv: UpsilonConvention) -> String {
    let mut parts = Vec::new();
    let mut next_r = 0;
    match conv {
        UpsilonConvention::RootIncluded => node_symbol(root, Some("y"), &mut next_r, &mut parts),
        UpsilonConvention::RootSeparate => {
            parts.push("C_{y p}".to_string());
            let mut root_parts = Vec::new();
            node_symbol(root, None, &mut next_r, &mut root_parts);
            // the root's own leg is the bare upper index p
            let first = root_parts.remove(0);
            let with_p = match first.find("^{") {
                Some(i) => format!("{}^{{p {}", &first[..i], &first[i + 2..]),
                None => format!("{first}^{{p}}"),
            };
            parts.push(with_p);
            parts.extend(root_parts);
        }
    }
    parts.join(" ")
}

fn relabel(node: &HNode<usize>) -> HNode<usize> {
    HNode { set: node.set.iter().map(|p| p + 1).collect(), children: node.children.iter().map(relabel).collect() }
}

/// Symbolic terms of the hierarchy expansion of ⟨⟨φ_y φ_{x1}…φ_{xn}⟩⟩, one
/// per hierarchy of {1..n}.
pub fn hierarchy_symbols(n: usize, conv: UpsilonConvention) -> Result<Vec<String>> {
    if n < 2 {
        return domain("the expansion starts at |X| = 2");
    }
    let positions: Vec<usize> = (0..n).collect();
    Ok(enumerate_hierarchies(&positions)?.map(|h| hierarchy_symbol(h.root(), conv)).collect())
}

/// Value of a node: Υ with its parent leg either attached through C (the
/// lower index `z`) or left bare (`z` is then the Γ index itself).
fn eval_node<S: Scalar>(
    node: &HNode<usize>,
    z: usize,
    attach: bool,
    xs: &[usize],
    eff: &EffectiveActionTable<S>,
    cov: &[Vec<S>],
) -> Result<S> {
    if node.is_leaf() {
        return Ok(cov[z][xs[node.set[0]]].clone());
    }
    let n = eff.n_labels;
    let k = node.children.len();
    let bare = |q: usize| -> Result<S> {
        let lower: Vec<Vec<S>> = node
            .children
            .iter()
            .map(|c| (0..n).map(|r| eval_node(c, r, true, xs, eff, cov)).collect())
            .collect::<Result<_>>()?;
        sum_over_indices(n, k, |r| {
            let mut key = Vec::with_capacity(k + 1);
            key.push(q);
            key.extend_from_slice(r);
            let mut t = eff.get(&key)?.clone();
            for (i, &ri) in r.iter().enumerate() {
                t = t * lower[i][ri].clone();
            }
            Ok(t)
        })
    };
    if attach {
        let mut acc = S::zero();
        for q in 0..n {
            if !cov[z][q].is_zero() {
                acc = acc + cov[z][q].clone() * bare(q)?;
            }
        }
        Ok(acc)
    } else {
        bare(z)
    }
}

/// ⟨⟨φ_y φ_X⟩⟩ as the sum over hierarchies of X of products of Υ
/// coefficients, with each term's symbol and value.
pub fn hierarchy_cumulant_expansion<S: Scalar>(
    y: usize,
    xs: &[usize],
    eff: &EffectiveActionTable<S>,
    cov2: &[Vec<S>],
    conv: UpsilonConvention,
) -> Result<HierarchyExpansion<S>> {
    let n = eff.n_labels;
    check_square(cov2, n)?;
    if xs.len() < 2 {
        return domain("the expansion starts at |X| = 2");
    }
    if y >= n || xs.iter().any(|&x| x >= n) {
        return domain("index outside the index set");
    }
    if xs.len() + 1 > eff.max_order {
        return domain(format!("effective action is populated only to order {}", eff.max_order));
    }
    let positions: Vec<usize> = (0..xs.len()).collect();
    let mut terms = Vec::new();
    let mut total = S::zero();
    for h in enumerate_hierarchies(&positions)? {
        let root = h.root();
        let value = match conv {
            UpsilonConvention::RootIncluded => eval_node(root, y, true, xs, eff, cov2)?,
            UpsilonConvention::RootSeparate => {
                let mut acc = S::zero();
                for p in 0..n {
                    if !cov2[y][p].is_zero() {
                        acc = acc + cov2[y][p].clone() * eval_node(root, p, false, xs, eff, cov2)?;
                    }
                }
                acc
            }
        };
        total = total + value.clone();
        terms.push(HierarchyTerm {
            hierarchy: relabel(root).to_string(),
            symbol: hierarchy_symbol(root, conv),
            value,
        });
    }
    Ok(HierarchyExpansion { terms, total })
}
