//! Deterministic invariant suites, one per module, each a list of named
//! checks with pass/fail and the values compared.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::arith::{
    dirichlet_convolve, euler_product_form, mobius_invert, mobius_table, multiplicative_eval, smooth_direct_sum,
    zeta_compare, DirichletSeries, Multiplicative,
};
use crate::combinat::{hierarchy_count, stirling_first_table, stirling_second, stirling_second_explicit, stirling_second_table};
use crate::error::{Error, Result};
use crate::fields::{
    cumulant_by_recurrence, cumulants_to_greens, ds_residual, effective_action_from_cumulants, greens_to_cumulants,
    hierarchy_cumulant_expansion, isserlis_table, legendre_duality_check, leibniz_check, mean_field_tree_expansion,
    self_energy_check, wick_product_expectation, wick_product_expectation_brute, EffectiveActionTable, FieldModel,
    GreenTable, Quadrature, TableKind, UpsilonConvention,
};
use crate::fock::{
    ccr_defect, doubled_commutator_defect, exponential_field_expectation, exponential_word_expectation, field_moment,
    number_observable_moment, poisson_word_expectation, thermal_moment_oracle, thermal_quadratic_form,
    truncated_oracle, wick_gaussian_expectation, word_scale, Letter, TestFunction, VertexWord, C64,
};
use crate::moments::{
    cumulants_to_moments, cumulants_to_moments_with, factorial_to_moments, moments_to_cumulants, moments_to_factorial,
    preset_moments, MomentSequence, PartitionSum, Preset,
};
use crate::rng::stream;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Moments,
    Fock,
    Fields,
    Arith,
}

impl Suite {
    pub const ALL: [Suite; 4] = [Suite::Moments, Suite::Fock, Suite::Fields, Suite::Arith];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Moments => "moments",
            Suite::Fock => "fock",
            Suite::Fields => "fields",
            Suite::Arith => "arith",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: Value,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub pass: bool,
    pub checks: Vec<Check>,
    /// Checks that do not apply to the supplied model, with the reason.
    pub skipped: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct VerifyOptions {
    /// Model for the numeric field checks; the 1-d quartic model by default.
    pub model: Option<FieldModel<f64>>,
    /// Bound on the quadrature Dyson–Schwinger residuals.
    pub ds_tolerance: f64,
    /// Bound on |W″Γ″ + 1|.
    pub legendre_tolerance: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { model: None, ds_tolerance: 1e-4, legendre_tolerance: 1e-3 }
    }
}

/// g = 1, v⁴ = −0.6.
pub fn default_quartic() -> FieldModel<f64> {
    FieldModel::with_default_labels(vec![vec![1.0]], vec![(vec![0, 0, 0, 0], -0.6)]).expect("valid model")
}

pub fn run_suite(suite: Suite, opts: &VerifyOptions) -> SuiteReport {
    let mut b = Builder::default();
    match suite {
        Suite::Moments => moments_suite(&mut b),
        Suite::Fock => fock_suite(&mut b),
        Suite::Fields => fields_suite(&mut b, opts),
        Suite::Arith => arith_suite(&mut b),
    }
    SuiteReport { suite, pass: b.checks.iter().all(|c| c.pass), checks: b.checks, skipped: b.skipped }
}

#[derive(Default)]
struct Builder {
    checks: Vec<Check>,
    skipped: Vec<String>,
}

impl Builder {
    /// Runs one check; an error fails the check and is reported in `detail`.
    fn check(&mut self, name: &str, f: impl FnOnce() -> Result<(bool, Value)>) {
        let (pass, detail) = match f() {
            Ok(r) => r,
            Err(e) => (false, json!({ "error": e.to_string() })),
        };
        self.checks.push(Check { name: name.into(), pass, detail });
    }
}

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

/// A rational with numerator in [−20, 20] and denominator in [1, 9].
pub fn random_rational(r: &mut ChaCha8Rng) -> BigRational {
    q(r.random_range(-20..=20), r.random_range(1..=9))
}

fn moments_suite(b: &mut Builder) {
    b.check("poisson-cumulants-all-lambda", || {
        let lambdas = [q(1, 3), q(1, 1), q(2, 1), q(7, 2)];
        let mut ok = true;
        for l in &lambdas {
            let m = preset_moments(&Preset::Poisson(l.clone()), 10)?;
            let c = moments_to_cumulants(&m)?;
            let f = moments_to_factorial(&m)?;
            ok &= c.tail().iter().all(|k| k == l);
            ok &= (1..=10).all(|n| f.get(n) == &num_traits::pow(l.clone(), n));
        }
        Ok((ok, json!({ "lambdas": lambdas.iter().map(|l| l.to_string()).collect::<Vec<_>>(), "order": 10 })))
    });
    b.check("gaussian-cumulants-vanish", || {
        let c = moments_to_cumulants(&preset_moments(&Preset::Gaussian, 12)?)?;
        let ok = (1..=12).all(|n| c.get(n) == &q(if n == 2 { 1 } else { 0 }, 1));
        Ok((ok, json!({ "order": 12 })))
    });
    b.check("gamma-cumulants-factorial", || {
        let l = q(3, 2);
        let c = moments_to_cumulants(&preset_moments(&Preset::Gamma(l.clone()), 10)?)?;
        let mut fact = BigRational::one();
        let mut ok = true;
        for n in 1..=10 {
            ok &= c.get(n) == &(&l * &fact);
            fact *= q(n as i64, 1);
        }
        Ok((ok, json!({ "lambda": l.to_string(), "order": 10 })))
    });
    b.check("round-trips", || {
        let mut r = stream(1, "verify-moments", 0);
        let mut ok = true;
        for _ in 0..20 {
            let seq: Vec<BigRational> = (0..12).map(|_| random_rational(&mut r)).collect();
            let m = MomentSequence::ordinary(seq);
            ok &= cumulants_to_moments(&moments_to_cumulants(&m)?)? == m;
            ok &= factorial_to_moments(&moments_to_factorial(&m)?)? == m;
        }
        Ok((ok, json!({ "sequences": 20, "order": 12 })))
    });
    b.check("partition-and-profile-sums-agree", || {
        let mut r = stream(1, "verify-moments", 1);
        let c = MomentSequence::cumulant((0..8).map(|_| random_rational(&mut r)).collect());
        let a = cumulants_to_moments_with(&c, PartitionSum::Partitions)?;
        let p = cumulants_to_moments_with(&c, PartitionSum::Profiles)?;
        Ok((a == p, json!({ "order": 8 })))
    });
    b.check("stirling-explicit-formula", || {
        let mut ok = true;
        for n in 1..=15 {
            for m in 1..=n {
                ok &= stirling_second(n, m)? == stirling_second_explicit(n, m);
            }
        }
        Ok((ok, json!({ "n_max": 15 })))
    });
    b.check("stirling-duality", || {
        let s1 = stirling_first_table(15);
        let s2 = stirling_second_table(15);
        let mut ok = true;
        for n in 0..=15 {
            for m in 0..=15 {
                let mut acc = BigInt::zero();
                for k in m..=n {
                    let t = BigInt::from(s1[n][k].clone()) * BigInt::from(s2[k][m].clone());
                    acc += if (n + k) % 2 == 0 { t } else { -t };
                }
                ok &= acc == BigInt::from((n == m) as i32);
            }
        }
        Ok((ok, json!({ "n_max": 15 })))
    });
}

fn random_function(r: &mut ChaCha8Rng, dim: usize) -> TestFunction {
    let comps = (0..dim)
        .map(|_| C64::new(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0)))
        .collect();
    TestFunction::new(comps).expect("nonempty")
}

/// Which vacuum expectation a random word exercises.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WordKind {
    Gaussian,
    Poisson,
    Exponential,
}

/// A random word of the given kind, length and dimension.
pub fn random_word(kind: WordKind, len: usize, dim: usize, r: &mut ChaCha8Rng) -> VertexWord {
    let letters = (0..len)
        .map(|_| match kind {
            WordKind::Gaussian => {
                if r.random_bool(0.5) {
                    Letter::Create(random_function(r, dim))
                } else {
                    Letter::Annihilate(random_function(r, dim))
                }
            }
            WordKind::Poisson => Letter::PoissonVertex {
                f: random_function(r, dim),
                g: random_function(r, dim),
                alpha: r.random_bool(0.6),
                beta: r.random_bool(0.6),
            },
            WordKind::Exponential => Letter::ExpVertex { f: random_function(r, dim), g: random_function(r, dim) },
        })
        .collect();
    VertexWord::new(letters).expect("consistent dimensions")
}

/// Combinatorial value, oracle value and whether they agree to 1e−10
/// relative to the word's scale.
pub fn oracle_comparison(kind: WordKind, word: &VertexWord) -> Result<(C64, C64, bool)> {
    let (value, copies) = match kind {
        WordKind::Gaussian => (wick_gaussian_expectation(word)?, 1),
        WordKind::Poisson => (poisson_word_expectation(word)?, 1),
        WordKind::Exponential => (exponential_word_expectation(word)?, 2),
    };
    let oracle = truncated_oracle(copies, word.len().max(1), word)?;
    let ok = (value - oracle).norm() <= 1e-10 * oracle.norm().max(word_scale(word));
    Ok((value, oracle, ok))
}

fn fock_suite(b: &mut Builder) {
    b.check("Q4-vacuum", || {
        let mut r = stream(2, "verify-fock", 0);
        let mut worst: f64 = 0.0;
        for dim in 1..=3 {
            let f = random_function(&mut r, dim);
            let want = 3.0 * f.norm_sq().powi(2);
            worst = worst.max((field_moment(&f, 4)? - want).abs() / want);
        }
        Ok((worst < 1e-12, json!({ "target": "3‖f‖⁴", "max_rel_error": worst })))
    });
    b.check("exponential-diagonal-factorial", || {
        let f = TestFunction::real(&[0.6, 0.8])?;
        let mut worst: f64 = 0.0;
        let mut fact = 1.0;
        for n in 1..=5 {
            fact *= n as f64;
            let pairs = vec![(f.clone(), f.clone()); n];
            worst = worst.max((exponential_field_expectation(&pairs)?.re - fact).abs());
        }
        Ok((worst < 1e-12, json!({ "n_max": 5, "max_abs_error": worst })))
    });
    for (name, kind) in [
        ("gaussian-oracle-equivalence", WordKind::Gaussian),
        ("poisson-oracle-equivalence", WordKind::Poisson),
        ("exponential-oracle-equivalence", WordKind::Exponential),
    ] {
        b.check(name, || {
            let mut r = stream(2, name, 0);
            let mut failures = 0;
            let words = 30;
            for i in 0..words {
                let len = 1 + i % 5;
                let dim = 1 + i % 3;
                let w = random_word(kind, len, dim, &mut r);
                if !oracle_comparison(kind, &w)?.2 {
                    failures += 1;
                }
            }
            Ok((failures == 0, json!({ "words": words, "failures": failures, "rel_tolerance": 1e-10 })))
        });
    }
    b.check("gaussian-moment-pattern", || {
        let f = TestFunction::real(&[0.5, -1.2])?;
        let g = preset_moments(&Preset::Gaussian, 8)?;
        let mut worst: f64 = 0.0;
        for n in 1..=8 {
            let want = g.get(n).to_f64().unwrap_or(f64::NAN) * f.norm().powi(n as i32);
            worst = worst.max((field_moment(&f, n)? - want).abs() / want.abs().max(1.0));
        }
        Ok((worst < 1e-12, json!({ "n_max": 8, "max_rel_error": worst })))
    });
    b.check("poisson-moment-pattern", || {
        let f = TestFunction::real(&[0.7, 0.4])?;
        let lambda = BigRational::from_float(f.norm_sq()).ok_or_else(|| Error::Domain("norm".into()))?;
        let p = preset_moments(&Preset::Poisson(lambda), 8)?;
        let mut worst: f64 = 0.0;
        for n in 1..=8 {
            let want = p.get(n).to_f64().unwrap_or(f64::NAN);
            worst = worst.max((number_observable_moment(&f, n)? - want).abs() / want.abs().max(1.0));
        }
        Ok((worst < 1e-12, json!({ "n_max": 8, "max_rel_error": worst })))
    });
    b.check("ccr-on-truncated-space", || {
        let mut r = stream(2, "verify-fock", 1);
        let f = random_function(&mut r, 2);
        let g = random_function(&mut r, 2);
        let d1 = ccr_defect(&f, &g, 5)?;
        let d2 = doubled_commutator_defect(&f, &g, 4)?;
        Ok((d1 < 1e-12 && d2 < 1e-12, json!({ "ccr_defect": d1, "doubled_commutator_defect": d2 })))
    });
    b.check("thermal-second-moment", || {
        let f = TestFunction::real(&[0.8, 0.3])?;
        let rho = [0.5, 1.5];
        let want = thermal_quadratic_form(&f, &rho)?;
        let got = thermal_moment_oracle(&f, &rho, 2, 4)?;
        Ok(((got - want).abs() < 1e-10, json!({ "oracle": got, "target": want })))
    });
}

fn arith_suite(b: &mut Builder) {
    b.check("mobius-convolution-unit", || {
        let mu = mobius_table(500);
        let mu = DirichletSeries::from_integers(&mu[1..])?;
        let conv = dirichlet_convolve(&mu, &DirichletSeries::ones(500)?)?;
        Ok((conv == DirichletSeries::unit(500)?, json!({ "n_max": 500 })))
    });
    b.check("mobius-inversion-sigma", || {
        let sigma: Vec<i64> = (1..=500)
            .map(|n| multiplicative_eval(Multiplicative::Sigma, n))
            .collect::<Result<_>>()?;
        let inv = mobius_invert(&DirichletSeries::from_integers(&sigma)?);
        let ok = (1..=500).all(|n| inv.get(n) == &q(n as i64, 1));
        Ok((ok, json!({ "n_max": 500 })))
    });
    b.check("multiplicative-on-coprime-pairs", || {
        let mut pairs = 0u64;
        let mut ok = true;
        for a in 1..=10_000u64 {
            for c in 1..=10_000 / a {
                if num_integer::gcd(a, c) != 1 {
                    continue;
                }
                pairs += 1;
                for f in [Multiplicative::D, Multiplicative::Sigma, Multiplicative::Phi] {
                    ok &= multiplicative_eval(f, a * c)? == multiplicative_eval(f, a)? * multiplicative_eval(f, c)?;
                }
            }
        }
        Ok((ok, json!({ "product_max": 10_000, "pairs": pairs })))
    });
    b.check("phi-not-strongly-multiplicative", || {
        let (p4, p2) = (multiplicative_eval(Multiplicative::Phi, 4)?, multiplicative_eval(Multiplicative::Phi, 2)?);
        Ok((p4 != p2 * p2, json!({ "witness": [2, 2], "phi_4": p4, "phi_2_squared": p2 * p2 })))
    });
    b.check("sum-product-exchange", || {
        let primes = [2, 3, 5, 7, 11];
        let f = |p: u64, e: u32| BigRational::from_integer(Multiplicative::Sigma.on_prime_power(p, e).into());
        let direct = smooth_direct_sum(&primes, 4, 2, f);
        let product = euler_product_form(&primes, 4, 2, f);
        Ok((direct == product, json!({ "primes": primes, "max_exp": 4, "s": 2, "value": direct.to_string() })))
    });
    b.check("zeta2-partial-sum", || {
        let z = zeta_compare(2.0, 1_000_000, 1000)?;
        let err = (z.partial_sum - std::f64::consts::PI.powi(2) / 6.0).abs();
        Ok((err <= 2e-6 && z.consistent, json!({ "partial_sum": z.partial_sum, "abs_error": err, "euler_product": z.euler_product })))
    });
}

fn rational_model() -> Result<FieldModel<BigRational>> {
    FieldModel::exact(vec![vec![q(2, 1), q(1, 3)], vec![q(1, 3), q(1, 1)]], vec![])
}

fn random_cumulants(seed_index: u64, n_labels: usize, order: usize) -> GreenTable<BigRational> {
    let mut r = stream(3, "verify-fields", seed_index);
    GreenTable::from_fn(TableKind::Cumulant, n_labels, order, |_| random_rational(&mut r))
}

/// Disjoint families (Y_1, …, Y_m; X) over two labels with total order ≤ 6.
pub fn wick_families() -> Vec<(Vec<Vec<usize>>, Vec<usize>)> {
    vec![
        (vec![vec![0, 0]], vec![]),
        (vec![vec![0, 1]], vec![1, 0]),
        (vec![vec![0], vec![1]], vec![0]),
        (vec![vec![0, 0], vec![1, 1]], vec![]),
        (vec![vec![0, 1, 1], vec![0]], vec![1, 1]),
        (vec![vec![0, 0], vec![0, 1], vec![1]], vec![0]),
        (vec![vec![0, 1, 0]], vec![1, 1, 0]),
        (vec![vec![1], vec![1], vec![0], vec![0]], vec![0, 1]),
    ]
}

fn fields_suite(b: &mut Builder, opts: &VerifyOptions) {
    b.check("isserlis-ds-exact", || {
        let m = rational_model()?;
        let t = isserlis_table(&m, 6)?;
        let mut count = 0;
        let mut ok = true;
        for xs in crate::fields::all_multisets(2, 4) {
            for x in 0..2 {
                ok &= ds_residual(&m, &t, x, &xs)?.is_zero();
                count += 1;
            }
        }
        Ok((ok, json!({ "residuals": count, "max_order": 5 })))
    });
    b.check("cumulant-round-trip", || {
        let c = random_cumulants(0, 3, 5);
        Ok((greens_to_cumulants(&cumulants_to_greens(&c)?)? == c, json!({ "labels": 3, "order": 5 })))
    });
    b.check("hierarchy-term-counts", || {
        let eff = EffectiveActionTable::from_fn(1, 7, |_| q(1, 1));
        let cov = vec![vec![q(1, 1)]];
        let mut counts = Vec::new();
        let mut ok = true;
        for k in 2..=6 {
            let e = hierarchy_cumulant_expansion(0, &vec![0; k], &eff, &cov, UpsilonConvention::RootIncluded)?;
            ok &= BigInt::from(e.terms.len()) == BigInt::from(hierarchy_count(k)?);
            counts.push(e.terms.len());
        }
        ok &= counts[..3] == [1, 4, 26];
        Ok((ok, json!({ "cumulant_orders": [3, 4, 5, 6, 7], "terms": counts })))
    });
    b.check("hierarchy-vs-recurrence", || {
        let mut r = stream(3, "verify-fields", 1);
        let eff = EffectiveActionTable::from_fn(2, 5, |_| random_rational(&mut r));
        let cov = vec![vec![q(3, 2), q(-1, 4)], vec![q(-1, 4), q(2, 3)]];
        let mut ok = true;
        let mut cases = 0;
        for xs in crate::fields::all_multisets(2, 4).into_iter().filter(|m| m.len() >= 2) {
            for y in 0..2 {
                let e = hierarchy_cumulant_expansion(y, &xs, &eff, &cov, UpsilonConvention::RootIncluded)?;
                ok &= e.total == cumulant_by_recurrence(y, &xs, &eff, &cov)?;
                cases += 1;
            }
        }
        Ok((ok, json!({ "cases": cases, "max_x": 4 })))
    });
    b.check("wick-p-prime-theorem", || {
        let c = random_cumulants(2, 2, 6);
        let families = wick_families();
        let mut ok = true;
        for (ys, x) in &families {
            ok &= wick_product_expectation(&c, ys, x)? == wick_product_expectation_brute(&c, ys, x)?;
        }
        Ok((ok, json!({ "families": families.len() })))
    });

    let model = opts.model.clone().unwrap_or_else(default_quartic);
    let n = model.size();
    b.check("ds-residual-quadrature", || {
        let order = 6;
        let t = Quadrature::new(&model, &vec![0.0; n])?.green_table(order - 1 + model.max_degree().max(2) - 1);
        let mut worst: f64 = 0.0;
        for xs in crate::fields::all_multisets(n, order - 1) {
            for x in 0..n {
                worst = worst.max(ds_residual(&model, &t, x, &xs)?.abs());
            }
        }
        Ok((worst <= opts.ds_tolerance, json!({ "max_residual": worst, "tolerance": opts.ds_tolerance, "max_order": order })))
    });
    if n <= 2 {
        b.check("leibniz-partition-identity", || {
            let j = vec![0.1; n];
            let mut worst: f64 = 0.0;
            for x in crate::fields::all_multisets(n, 3).into_iter().filter(|m| !m.is_empty()) {
                worst = worst.max(leibniz_check(&model, &j, &x, 1e-2)?.abs_error);
            }
            Ok((worst <= 1e-3, json!({ "max_abs_error": worst, "step": 1e-2 })))
        });
        b.check("legendre-duality", || {
            let rep = legendre_duality_check(&model, &vec![0.0; n])?;
            let gauss = FieldModel::with_default_labels(vec![vec![1.0, 0.3], vec![0.3, 0.8]], vec![])?;
            let rep_g = legendre_duality_check(&gauss, &[0.1, -0.2])?;
            let ok = rep.deviation <= opts.legendre_tolerance && rep_g.deviation <= opts.legendre_tolerance;
            Ok((ok, json!({ "model_deviation": rep.deviation, "gaussian_deviation": rep_g.deviation, "tolerance": opts.legendre_tolerance })))
        });
        b.check("self-energy-partial-sums", || {
            let rep = self_energy_check(&model)?;
            Ok((rep.strictly_decreasing, json!({ "errors": rep.errors })))
        });
    } else {
        b.skipped.push("finite-difference checks run for index sets of size ≤ 2".into());
    }
    b.check("tree-fixed-point", || {
        let order = 8;
        let cum = greens_to_cumulants(&Quadrature::new(&model, &vec![0.0; n])?.green_table(order))?;
        let eff = effective_action_from_cumulants(&cum, order)?;
        let j = vec![0.1; n];
        let iterates = mean_field_tree_expansion(&model, &eff, &j, 60)?;
        let last = iterates.last().expect("starting point included");
        let mean = Quadrature::new(&model, &j)?.mean();
        let err = (last - &mean).amax();
        Ok((err <= 1e-6, json!({ "tree": last.as_slice(), "quadrature": mean.as_slice(), "max_abs_error": err })))
    });
}
