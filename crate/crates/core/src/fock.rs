//! Vacuum expectations of Boson fields over a finite-dimensional one-particle
//! space, evaluated by contraction sums and, independently, by truncated
//! ladder-operator matrices.

use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::combinat::{enumerate_cycle_permutations, stirling_second_table, RestrictedGrowth};
use crate::error::{domain, Error, Result};

pub type C64 = Complex64;

/// A vector in the one-particle space ℂ^d.
#[derive(Clone, Debug, PartialEq)]
pub struct TestFunction {
    components: Vec<C64>,
}

impl TestFunction {
    pub fn new(components: Vec<C64>) -> Result<Self> {
        if components.is_empty() {
            return domain("a test function needs dimension at least 1");
        }
        Ok(TestFunction { components })
    }

    pub fn real(components: &[f64]) -> Result<Self> {
        Self::new(components.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[C64] {
        &self.components
    }

    /// ⟨self|g⟩, conjugate-linear in `self`.
    pub fn inner(&self, g: &TestFunction) -> C64 {
        self.components
            .iter()
            .zip(&g.components)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn norm_sq(&self) -> f64 {
        self.components.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// The conjugation j: componentwise complex conjugate.
    pub fn conj(&self) -> TestFunction {
        TestFunction { components: self.components.iter().map(|c| c.conj()).collect() }
    }

    pub fn scale(&self, s: C64) -> TestFunction {
        TestFunction { components: self.components.iter().map(|c| c * s).collect() }
    }

    /// Pointwise multiplication by a real diagonal operator.
    pub fn mul_diag(&self, diag: &[f64]) -> TestFunction {
        TestFunction {
            components: self.components.iter().zip(diag).map(|(c, d)| c * d).collect(),
        }
    }
}

/// One factor of a vacuum-expectation word.
#[derive(Clone, Debug, PartialEq)]
pub enum Letter {
    /// B⁺(f).
    Create(TestFunction),
    /// B⁻(g).
    Annihilate(TestFunction),
    /// B⁺(f)^α B⁻(g)^β.
    PoissonVertex { f: TestFunction, g: TestFunction, alpha: bool, beta: bool },
    /// N(f, g) = B⁺(f)B⁻(g) on the doubled space.
    ExpVertex { f: TestFunction, g: TestFunction },
}

impl Letter {
    fn dim(&self) -> usize {
        match self {
            Letter::Create(f) | Letter::Annihilate(f) => f.dim(),
            Letter::PoissonVertex { f, .. } | Letter::ExpVertex { f, .. } => f.dim(),
        }
    }

    fn dims_agree(&self) -> bool {
        match self {
            Letter::PoissonVertex { f, g, .. } | Letter::ExpVertex { f, g } => f.dim() == g.dim(),
            _ => true,
        }
    }
}

/// A product of letters. `letters()[0]` is the rightmost factor, applied to
/// the vacuum first; in 1-based vertex labels it is vertex 1.
#[derive(Clone, Debug, PartialEq)]
pub struct VertexWord {
    letters: Vec<Letter>,
}

impl VertexWord {
    /// Letters in application order (rightmost factor first).
    pub fn new(letters: Vec<Letter>) -> Result<Self> {
        let Some(first) = letters.first() else {
            return domain("a word needs at least one letter");
        };
        let d = first.dim();
        if letters.iter().any(|l| l.dim() != d || !l.dims_agree()) {
            return domain("all test functions in a word must share one dimension");
        }
        Ok(VertexWord { letters })
    }

    /// Letters as written in the operator product, left to right.
    pub fn from_product(mut written: Vec<Letter>) -> Result<Self> {
        written.reverse();
        Self::new(written)
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.letters[0].dim()
    }
}

impl fmt::Display for VertexWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, l) in self.letters.iter().enumerate().rev() {
            let i = i + 1;
            match l {
                Letter::Create(_) => write!(f, "B⁺(f{i})")?,
                Letter::Annihilate(_) => write!(f, "B⁻(g{i})")?,
                Letter::PoissonVertex { alpha, beta, .. } => {
                    if *alpha {
                        write!(f, "B⁺(f{i})")?;
                    }
                    if *beta {
                        write!(f, "B⁻(g{i})")?;
                    }
                    if !alpha && !beta {
                        write!(f, "1")?;
                    }
                }
                Letter::ExpVertex { .. } => write!(f, "N(f{i},g{i})")?,
            }
        }
        Ok(())
    }
}

/// ⟨Ω|word Ω⟩ for a word of creators and annihilators: the sum over
/// matchings of every annihilator B⁻(g_p) with an earlier-applied creator
/// B⁺(f_q) of ∏ ⟨g_p|f_q⟩.
pub fn wick_gaussian_expectation(word: &VertexWord) -> Result<C64> {
    enum Op<'a> {
        C(&'a TestFunction),
        A(&'a TestFunction),
    }
    let ops = word
        .letters
        .iter()
        .map(|l| match l {
            Letter::Create(f) => Ok(Op::C(f)),
            Letter::Annihilate(g) => Ok(Op::A(g)),
            _ => domain("Gaussian words contain only creators and annihilators"),
        })
        .collect::<Result<Vec<_>>>()?;
    let creators = ops.iter().filter(|o| matches!(o, Op::C(_))).count();
    if 2 * creators != ops.len() {
        return Ok(C64::new(0.0, 0.0));
    }

    fn rec<'a>(ops: &[Op<'a>], pos: usize, open: &mut Vec<&'a TestFunction>) -> C64 {
        if pos == ops.len() {
            return if open.is_empty() { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
        }
        match ops[pos] {
            Op::C(f) => {
                open.push(f);
                let v = rec(ops, pos + 1, open);
                open.pop();
                v
            }
            Op::A(g) => {
                let mut acc = C64::new(0.0, 0.0);
                for i in 0..open.len() {
                    let f = open.remove(i);
                    let w = g.inner(f);
                    if w != C64::new(0.0, 0.0) {
                        acc += w * rec(ops, pos + 1, open);
                    }
                    open.insert(i, f);
                }
                acc
            }
        }
    }
    Ok(rec(&ops, 0, &mut Vec::new()))
}

/// The 2ⁿ words whose sum is Q(f)ⁿ = (B⁺(f) + B⁻(f))ⁿ.
pub fn field_power_words(f: &TestFunction, n: usize) -> Vec<VertexWord> {
    (0..1u32 << n)
        .map(|mask| {
            let letters = (0..n)
                .map(|i| {
                    if mask >> i & 1 == 1 {
                        Letter::Create(f.clone())
                    } else {
                        Letter::Annihilate(f.clone())
                    }
                })
                .collect();
            VertexWord { letters }
        })
        .collect()
}

/// ⟨Ω|Q(f)ⁿΩ⟩ by summing the Gaussian contraction over all sign words.
pub fn field_moment(f: &TestFunction, n: usize) -> Result<f64> {
    if n == 0 {
        return Ok(1.0);
    }
    let mut acc = C64::new(0.0, 0.0);
    for w in field_power_words(f, n) {
        acc += wick_gaussian_expectation(&w)?;
    }
    Ok(acc.re)
}

/// Σ over partitions of the vertex indices into chains i(1) < ⋯ < i(k) of
/// ∏ ⟨g_{i(j+1)}|f_{i(j)}⟩. When `flags` is given, only partitions whose
/// chains match the exponents of each vertex contribute.
fn poisson_partition_sum(pairs: &[(&TestFunction, &TestFunction)], flags: Option<&[(bool, bool)]>) -> C64 {
    let n = pairs.len();
    let mut acc = C64::new(0.0, 0.0);
    let mut cursor = RestrictedGrowth::new(n, 1, n);
    let mut last = vec![usize::MAX; n];
    'outer: while cursor.advance() {
        let rgs = cursor.current();
        let mut term = C64::new(1.0, 0.0);
        last.iter_mut().for_each(|l| *l = usize::MAX);
        for i in 0..n {
            let b = rgs[i] as usize;
            let prev = last[b];
            if let Some(flags) = flags {
                // β_i says whether vertex i absorbs a quantum from its predecessor
                if flags[i].1 != (prev != usize::MAX) {
                    continue 'outer;
                }
                if prev != usize::MAX && !flags[prev].0 {
                    continue 'outer;
                }
            }
            if prev != usize::MAX {
                term *= pairs[i].1.inner(pairs[prev].0);
            }
            last[b] = i;
        }
        if let Some(flags) = flags {
            // the final vertex of each chain must not leave a quantum behind
            if last.iter().filter(|&&l| l != usize::MAX).any(|&l| flags[l].0) {
                continue;
            }
        }
        acc += term;
    }
    acc
}

/// ⟨Ω|word Ω⟩ for a word of Poisson vertices B⁺(f_i)^{α_i}B⁻(g_i)^{β_i}.
pub fn poisson_word_expectation(word: &VertexWord) -> Result<C64> {
    let mut pairs = Vec::with_capacity(word.len());
    let mut flags = Vec::with_capacity(word.len());
    for l in &word.letters {
        match l {
            Letter::PoissonVertex { f, g, alpha, beta } => {
                pairs.push((f, g));
                flags.push((*alpha, *beta));
            }
            _ => return domain("Poisson words contain only Poisson vertices"),
        }
    }
    Ok(poisson_partition_sum(&pairs, Some(&flags)))
}

/// ⟨Ω|∏_i (B⁺(f_i) + 1)(B⁻(g_i) + 1) Ω⟩, the sum over all exponent choices:
/// Σ over set partitions of ∏ over blocks i(k) > ⋯ > i(1) of
/// ⟨g_{i(k)}|f_{i(k−1)}⟩⋯⟨g_{i(2)}|f_{i(1)}⟩.
pub fn poisson_field_expectation(pairs: &[(TestFunction, TestFunction)]) -> Result<C64> {
    if pairs.is_empty() {
        return domain("need at least one vertex");
    }
    if pairs.len() > u8::MAX as usize {
        return Err(Error::Capacity { what: "Poisson vertices", got: pairs.len(), limit: u8::MAX as usize });
    }
    let refs: Vec<_> = pairs.iter().map(|(f, g)| (f, g)).collect();
    Ok(poisson_partition_sum(&refs, None))
}

/// Σ_m S(n,m)‖f‖^{2(n−m)}: the n-th moment of (B⁺(f) + 1)(B⁻(f) + 1).
pub fn poisson_observable_moment(f: &TestFunction, n: usize) -> Result<f64> {
    stirling_weighted(f, n, |n, m| n - m)
}

/// Σ_m S(n,m)‖f‖^{2m}: the n-th moment of the number observable
/// N(f) = (B⁺(f) + ‖f‖)(B⁻(f) + ‖f‖), a Poisson variable of intensity ‖f‖².
pub fn number_observable_moment(f: &TestFunction, n: usize) -> Result<f64> {
    stirling_weighted(f, n, |_, m| m)
}

fn stirling_weighted(f: &TestFunction, n: usize, power: impl Fn(usize, usize) -> usize) -> Result<f64> {
    use num_traits::ToPrimitive;
    if n == 0 {
        return domain("moment order must be at least 1");
    }
    let s = stirling_second_table(n);
    let lambda = f.norm_sq();
    Ok((1..=n)
        .map(|m| s[n][m].to_f64().unwrap_or(f64::INFINITY) * lambda.powi(power(n, m) as i32))
        .sum())
}

/// Σ over σ ∈ 𝔖_n of ∏ over cycles (i(1) … i(k)) of
/// ⟨g_{i(k)}|f_{i(k−1)}⟩⋯⟨g_{i(2)}|f_{i(1)}⟩⟨g_{i(1)}|f_{i(k)}⟩.
pub fn exponential_field_expectation(pairs: &[(TestFunction, TestFunction)]) -> Result<C64> {
    if pairs.is_empty() {
        return domain("need at least one vertex");
    }
    let n = pairs.len();
    let gram: Vec<Vec<C64>> = (0..n)
        .map(|i| (0..n).map(|j| pairs[i].1.inner(&pairs[j].0)).collect())
        .collect();
    let mut acc = C64::new(0.0, 0.0);
    for sigma in enumerate_cycle_permutations(n, None)? {
        let mut term = C64::new(1.0, 0.0);
        for c in sigma.cycles() {
            let k = c.len();
            for j in 0..k {
                // the successor of c[j] along the cycle takes its g
                term *= gram[c[(j + 1) % k] - 1][c[j] - 1];
            }
        }
        acc += term;
    }
    Ok(acc)
}

/// Same as [`exponential_field_expectation`] for the letters of a word of
/// exponential vertices.
pub fn exponential_word_expectation(word: &VertexWord) -> Result<C64> {
    let pairs = word
        .letters
        .iter()
        .map(|l| match l {
            Letter::ExpVertex { f, g } => Ok((f.clone(), g.clone())),
            _ => domain("exponential words contain only exponential vertices"),
        })
        .collect::<Result<Vec<_>>>()?;
    exponential_field_expectation(&pairs)
}

/// ϱ_k = 1/(e^{β(E_k − μ)} − 1) for each level.
pub fn thermal_occupation(beta: f64, energy_minus_mu: &[f64]) -> Result<Vec<f64>> {
    energy_minus_mu
        .iter()
        .map(|&e| {
            let x = beta * e;
            if !(x > 0.0) {
                return domain("β(E − μ) must be positive");
            }
            Ok(1.0 / x.exp_m1())
        })
        .collect()
}

/// ⟨f|(2ϱ + 1)f⟩, the covariance of the thermal state.
pub fn thermal_quadratic_form(f: &TestFunction, rho: &[f64]) -> Result<f64> {
    if rho.len() != f.dim() {
        return domain("ϱ must have one entry per dimension");
    }
    if rho.iter().any(|&r| !(r >= 0.0)) {
        return domain("occupation numbers must be non-negative");
    }
    Ok(f.components.iter().zip(rho).map(|(c, r)| (2.0 * r + 1.0) * c.norm_sqr()).sum())
}

/// ⟨Ω|e^{iQ(f)}Ω⟩ = exp(−½⟨f|Cf⟩) in the thermal state.
pub fn thermal_characteristic(f: &TestFunction, rho: &[f64]) -> Result<f64> {
    Ok((-0.5 * thermal_quadratic_form(f, rho)?).exp())
}

/// Creation and annihilation matrices on the number basis |0⟩, …, |M⟩.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedMode {
    levels: usize,
    creation: DMatrix<f64>,
    annihilation: DMatrix<f64>,
}

impl TruncatedMode {
    pub fn new(levels: usize) -> Result<Self> {
        if levels == 0 {
            return domain("truncation level must be positive");
        }
        let dim = levels + 1;
        let creation = DMatrix::from_fn(dim, dim, |r, c| if r == c + 1 { (r as f64).sqrt() } else { 0.0 });
        let annihilation = creation.transpose();
        Ok(TruncatedMode { levels, creation, annihilation })
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn creation(&self) -> &DMatrix<f64> {
        &self.creation
    }

    pub fn annihilation(&self) -> &DMatrix<f64> {
        &self.annihilation
    }

    /// max |([b⁻, b⁺] − 1)_{rc}| over columns c ≤ M − 1.
    pub fn commutator_defect(&self) -> f64 {
        let comm = &self.annihilation * &self.creation - &self.creation * &self.annihilation;
        let mut worst: f64 = 0.0;
        for c in 0..self.levels {
            for r in 0..=self.levels {
                let id = if r == c { 1.0 } else { 0.0 };
                worst = worst.max((comm[(r, c)] - id).abs());
            }
        }
        worst
    }
}

#[derive(Clone, Copy, Debug)]
struct Ladder {
    mode: usize,
    create: bool,
    coeff: C64,
}

/// Tensor product of `modes` truncated modes, states stored densely in
/// mixed radix (mode 0 fastest).
struct TruncatedSpace {
    mode: TruncatedMode,
    modes: usize,
    strides: Vec<usize>,
    size: usize,
}

const MAX_STATES: usize = 1 << 24;

impl TruncatedSpace {
    fn new(modes: usize, levels: usize) -> Result<Self> {
        let base = levels + 1;
        let mut strides = Vec::with_capacity(modes);
        let mut size = 1usize;
        for _ in 0..modes {
            strides.push(size);
            size = size
                .checked_mul(base)
                .filter(|&s| s <= MAX_STATES)
                .ok_or(Error::Capacity { what: "truncated Fock states", got: usize::MAX, limit: MAX_STATES })?;
        }
        Ok(TruncatedSpace { mode: TruncatedMode::new(levels)?, modes, strides, size })
    }

    fn vacuum(&self) -> Vec<C64> {
        let mut v = vec![C64::new(0.0, 0.0); self.size];
        v[0] = C64::new(1.0, 0.0);
        v
    }

    fn level(&self, idx: usize, mode: usize) -> usize {
        idx / self.strides[mode] % (self.mode.levels + 1)
    }

    fn apply(&self, op: &[Ladder], psi: &[C64]) -> Vec<C64> {
        let m = self.mode.levels;
        let mut out = vec![C64::new(0.0, 0.0); self.size];
        for (idx, amp) in psi.iter().enumerate() {
            if *amp == C64::new(0.0, 0.0) {
                continue;
            }
            for l in op {
                let n = self.level(idx, l.mode);
                let stride = self.strides[l.mode];
                if l.create {
                    if n < m {
                        out[idx + stride] += l.coeff * self.mode.creation[(n + 1, n)] * amp;
                    }
                } else if n > 0 {
                    out[idx - stride] += l.coeff * self.mode.annihilation[(n - 1, n)] * amp;
                }
            }
        }
        out
    }

    fn max_level(&self, idx: usize) -> usize {
        (0..self.modes).map(|k| self.level(idx, k)).max().unwrap_or(0)
    }
}

/// B⁺(f) and B⁻(g) as ladder sums. One copy: Σ f_k a_k† and Σ ḡ_k a_k. Two
/// copies: B⁺(f) = Σ f_k (a1_k† + a2_k), B⁻(g) = Σ ḡ_k (a1_k + a2_k†), so
/// that B⁺ and B⁻ commute.
fn creator(f: &TestFunction, copies: usize) -> Vec<Ladder> {
    let d = f.dim();
    let mut out: Vec<Ladder> =
        (0..d).map(|k| Ladder { mode: k, create: true, coeff: f.components[k] }).collect();
    if copies == 2 {
        out.extend((0..d).map(|k| Ladder { mode: d + k, create: false, coeff: f.components[k] }));
    }
    out
}

fn annihilator(g: &TestFunction, copies: usize) -> Vec<Ladder> {
    let d = g.dim();
    let mut out: Vec<Ladder> =
        (0..d).map(|k| Ladder { mode: k, create: false, coeff: g.components[k].conj() }).collect();
    if copies == 2 {
        out.extend((0..d).map(|k| Ladder { mode: d + k, create: true, coeff: g.components[k].conj() }));
    }
    out
}

/// Applies `word` to the vacuum of `mode_count` copies of the truncated
/// d-mode space and returns the vacuum component. With `mode_count = 2`
/// creators and annihilators act in the doubled representation.
pub fn truncated_oracle(mode_count: usize, levels: usize, word: &VertexWord) -> Result<C64> {
    if !(1..=2).contains(&mode_count) {
        return domain("mode_count must be 1 or 2");
    }
    if levels < word.len() {
        return Err(Error::Precision(format!(
            "truncation level {levels} is below the word length {}",
            word.len()
        )));
    }
    let space = TruncatedSpace::new(word.dim() * mode_count, levels)?;
    let mut psi = space.vacuum();
    for l in &word.letters {
        match l {
            Letter::Create(f) => psi = space.apply(&creator(f, mode_count), &psi),
            Letter::Annihilate(g) => psi = space.apply(&annihilator(g, mode_count), &psi),
            Letter::PoissonVertex { f, g, alpha, beta } => {
                if *beta {
                    psi = space.apply(&annihilator(g, mode_count), &psi);
                }
                if *alpha {
                    psi = space.apply(&creator(f, mode_count), &psi);
                }
            }
            Letter::ExpVertex { f, g } => {
                if mode_count != 2 {
                    return domain("exponential vertices need the doubled space");
                }
                psi = space.apply(&annihilator(g, 2), &psi);
                psi = space.apply(&creator(f, 2), &psi);
            }
        }
    }
    Ok(psi[0])
}

/// max over basis states with every level ≤ M − 1 of
/// ‖([B⁻(f), B⁺(g)] − ⟨f|g⟩)e‖ on one truncated copy.
pub fn ccr_defect(f: &TestFunction, g: &TestFunction, levels: usize) -> Result<f64> {
    commutator_defect(f, g, levels, 1, f.inner(g))
}

/// The same defect for the doubled representation, where B⁻(f) and B⁺(g)
/// commute.
pub fn doubled_commutator_defect(f: &TestFunction, g: &TestFunction, levels: usize) -> Result<f64> {
    commutator_defect(f, g, levels, 2, C64::new(0.0, 0.0))
}

fn commutator_defect(f: &TestFunction, g: &TestFunction, levels: usize, copies: usize, expect: C64) -> Result<f64> {
    if f.dim() != g.dim() {
        return domain("dimension mismatch");
    }
    if levels < 1 {
        return domain("truncation level must be positive");
    }
    let space = TruncatedSpace::new(f.dim() * copies, levels)?;
    let down = annihilator(f, copies);
    let up = creator(g, copies);
    let mut worst: f64 = 0.0;
    for idx in 0..space.size {
        if space.max_level(idx) >= levels {
            continue;
        }
        let mut e = vec![C64::new(0.0, 0.0); space.size];
        e[idx] = C64::new(1.0, 0.0);
        let a = space.apply(&down, &space.apply(&up, &e));
        let b = space.apply(&up, &space.apply(&down, &e));
        let defect: f64 = (0..space.size)
            .map(|k| {
                let id = if k == idx { expect } else { C64::new(0.0, 0.0) };
                (a[k] - b[k] - id).norm_sqr()
            })
            .sum::<f64>()
            .sqrt();
        worst = worst.max(defect);
    }
    Ok(worst)
}

/// ⟨ε_M(f)|ε_M(g)⟩ with ε_M(f) = Σ_{n≤M} (B⁺(f))ⁿΩ/n! built on the truncated
/// space; equals Σ_{n≤M} ⟨f|g⟩ⁿ/n!.
pub fn exponential_vector_inner(f: &TestFunction, g: &TestFunction, levels: usize) -> Result<C64> {
    if f.dim() != g.dim() {
        return domain("dimension mismatch");
    }
    let space = TruncatedSpace::new(f.dim(), levels)?;
    let build = |h: &TestFunction| {
        let up = creator(h, 1);
        let mut term = space.vacuum();
        let mut sum = term.clone();
        for n in 1..=levels {
            term = space.apply(&up, &term);
            term.iter_mut().for_each(|t| *t /= n as f64);
            sum.iter_mut().zip(&term).for_each(|(s, t)| *s += t);
        }
        sum
    };
    let ef = build(f);
    let eg = build(g);
    Ok(ef.iter().zip(&eg).map(|(a, b)| a.conj() * b).sum())
}

/// Σ_{n≤M} ⟨f|g⟩ⁿ/n!.
pub fn exponential_vector_series(f: &TestFunction, g: &TestFunction, levels: usize) -> C64 {
    let z = f.inner(g);
    let mut term = C64::new(1.0, 0.0);
    let mut sum = term;
    for n in 1..=levels {
        term *= z / n as f64;
        sum += term;
    }
    sum
}

/// ⟨Ω|Q(f)ⁿΩ⟩ for the thermal field Q = B⁺ + B⁻ with
/// B⁺(f) = B1⁺(√(1+ϱ) f) + B2⁻(j√ϱ f), computed on the truncated doubled space.
pub fn thermal_moment_oracle(f: &TestFunction, rho: &[f64], n: usize, levels: usize) -> Result<f64> {
    thermal_quadratic_form(f, rho)?;
    if levels < n {
        return Err(Error::Precision(format!("truncation level {levels} is below the order {n}")));
    }
    let d = f.dim();
    let space = TruncatedSpace::new(2 * d, levels)?;
    let mut q = Vec::with_capacity(4 * d);
    for k in 0..d {
        let a = f.components[k] * (1.0 + rho[k]).sqrt();
        let b = f.components[k] * rho[k].sqrt();
        q.push(Ladder { mode: k, create: true, coeff: a });
        q.push(Ladder { mode: k, create: false, coeff: a.conj() });
        q.push(Ladder { mode: d + k, create: false, coeff: b });
        q.push(Ladder { mode: d + k, create: true, coeff: b.conj() });
    }
    let mut psi = space.vacuum();
    for _ in 0..n {
        psi = space.apply(&q, &psi);
    }
    Ok(psi[0].re)
}

/// max(1, ∏ of the test-function norms in a word): the scale used for
/// relative comparisons of vacuum expectations.
pub fn word_scale(word: &VertexWord) -> f64 {
    let mut s = 1.0;
    for l in &word.letters {
        s *= match l {
            Letter::Create(f) | Letter::Annihilate(f) => f.norm().max(1.0),
            Letter::PoissonVertex { f, g, .. } | Letter::ExpVertex { f, g } => f.norm().max(1.0) * g.norm().max(1.0),
        };
    }
    s
}
