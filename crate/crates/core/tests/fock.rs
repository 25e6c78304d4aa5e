use combfield::combinat::stirling_second;
use combfield::error::Error;
use combfield::fock::*;
use combfield::rng;
use combfield::verify::{oracle_comparison, random_word, WordKind};
use proptest::prelude::*;
use num_traits::ToPrimitive;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn real(v: &[f64]) -> TestFunction {
    TestFunction::real(v).unwrap()
}

fn random_fn(r: &mut ChaCha8Rng, dim: usize) -> TestFunction {
    TestFunction::new((0..dim).map(|_| c(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0))).collect()).unwrap()
}

fn close(a: C64, b: C64, tol: f64) -> bool {
    (a - b).norm() <= tol * b.norm().max(1.0)
}

#[test]
fn q4_vacuum_expectation() {
    let f = real(&[0.6, 0.8]);
    assert!((field_moment(&f, 4).unwrap() - 3.0).abs() < 1e-12);
    let g = real(&[2.0]);
    assert!((field_moment(&g, 4).unwrap() - 48.0).abs() < 1e-10);
    for n in [1, 3, 5, 7] {
        assert_eq!(field_moment(&g, n).unwrap(), 0.0);
    }
}

#[test]
fn orthogonal_pair_vanishes() {
    let w = VertexWord::from_product(vec![Letter::Annihilate(real(&[1.0, 0.0])), Letter::Create(real(&[0.0, 1.0]))]).unwrap();
    assert_eq!(wick_gaussian_expectation(&w).unwrap(), c(0.0, 0.0));
    assert!(truncated_oracle(1, 4, &w).unwrap().norm() < 1e-14);
}

#[test]
fn unbalanced_words_vanish() {
    let f = real(&[1.0]);
    let w = VertexWord::new(vec![Letter::Create(f.clone()), Letter::Create(f.clone()), Letter::Annihilate(f)]).unwrap();
    assert_eq!(wick_gaussian_expectation(&w).unwrap(), c(0.0, 0.0));
}

#[test]
fn annihilator_before_creator_vanishes() {
    // B⁺(f)B⁻(f) applied to the vacuum
    let f = real(&[1.0]);
    let w = VertexWord::from_product(vec![Letter::Create(f.clone()), Letter::Annihilate(f.clone())]).unwrap();
    assert_eq!(wick_gaussian_expectation(&w).unwrap(), c(0.0, 0.0));
    let w = VertexWord::from_product(vec![Letter::Annihilate(f.clone()), Letter::Create(f)]).unwrap();
    assert_eq!(wick_gaussian_expectation(&w).unwrap(), c(1.0, 0.0));
}

#[test]
fn mixed_dimensions_rejected() {
    let w = VertexWord::new(vec![Letter::Create(real(&[1.0])), Letter::Annihilate(real(&[1.0, 0.0]))]);
    assert!(matches!(w, Err(Error::Domain(_))));
    assert!(VertexWord::new(vec![]).is_err());
}

#[test]
fn poisson_examples() {
    let unit = real(&[1.0]);
    assert!((poisson_observable_moment(&unit, 4).unwrap() - 15.0).abs() < 1e-12);
    let two = real(&[1.0, 1.0]);
    assert!((poisson_observable_moment(&two, 3).unwrap() - 11.0).abs() < 1e-12);
    assert!((poisson_observable_moment(&random_fn(&mut rng::stream(1, "fock-test", 0), 2), 1).unwrap() - 1.0).abs() < 1e-15);

    // the summed form with f_i = g_i reproduces the observable moment
    for n in 1..=6 {
        let pairs = vec![(two.clone(), two.clone()); n];
        let v = poisson_field_expectation(&pairs).unwrap();
        let want = poisson_observable_moment(&two, n).unwrap();
        assert!(close(v, c(want, 0.0), 1e-12), "n={n}: {v} vs {want}");
    }
}

#[test]
fn number_observable_is_poisson() {
    // λ = 2: Σ S(n,m) 2^m
    let f = real(&[1.0, 1.0]);
    for n in 1..=8 {
        let want: f64 = (1..=n).map(|m| stirling_second(n, m).unwrap().to_f64().unwrap() * 2f64.powi(m as i32)).sum();
        assert!((number_observable_moment(&f, n).unwrap() - want).abs() < 1e-9 * want);
    }
}

#[test]
fn poisson_sum_equals_flag_words() {
    let mut r = rng::stream(7, "fock-test", 1);
    for n in 1..=4 {
        let pairs: Vec<_> = (0..n).map(|_| (random_fn(&mut r, 2), random_fn(&mut r, 2))).collect();
        let mut by_words = c(0.0, 0.0);
        let mut by_oracle = c(0.0, 0.0);
        for mask in 0..1u32 << (2 * n) {
            let letters = pairs
                .iter()
                .enumerate()
                .map(|(i, (f, g))| Letter::PoissonVertex {
                    f: f.clone(),
                    g: g.clone(),
                    alpha: mask >> (2 * i) & 1 == 1,
                    beta: mask >> (2 * i + 1) & 1 == 1,
                })
                .collect();
            let w = VertexWord::new(letters).unwrap();
            by_words += poisson_word_expectation(&w).unwrap();
            by_oracle += truncated_oracle(1, n, &w).unwrap();
        }
        let summed = poisson_field_expectation(&pairs).unwrap();
        assert!(close(summed, by_words, 1e-12));
        assert!(close(summed, by_oracle, 1e-10));
    }
}

#[test]
fn exponential_examples() {
    let f = real(&[1.0]);
    let mut fact = 1.0;
    for n in 1..=6 {
        fact *= n as f64;
        let v = exponential_field_expectation(&vec![(f.clone(), f.clone()); n]).unwrap();
        assert!(close(v, c(fact, 0.0), 1e-12));
    }
    let mut r = rng::stream(3, "fock-test", 2);
    let (f1, g1) = (random_fn(&mut r, 3), random_fn(&mut r, 3));
    assert!(close(exponential_field_expectation(&[(f1.clone(), g1.clone())]).unwrap(), g1.inner(&f1), 1e-14));

    // f1 ⟂ g2 and f2 ⟂ g1
    let (f1, g1, f2, g2) = (real(&[1.0, 0.0]), real(&[2.0, 0.0]), real(&[0.0, 3.0]), real(&[0.0, 0.5]));
    let pairs = [(f1.clone(), g1.clone()), (f2.clone(), g2.clone())];
    let want = g1.inner(&f1) * g2.inner(&f2);
    assert!(close(exponential_field_expectation(&pairs).unwrap(), want, 1e-14));
    let w = VertexWord::new(vec![Letter::ExpVertex { f: f1, g: g1 }, Letter::ExpVertex { f: f2, g: g2 }]).unwrap();
    assert!(close(truncated_oracle(2, 2, &w).unwrap(), want, 1e-12));
}

#[test]
fn doubled_mode_factorials() {
    let f = real(&[1.0]);
    let w = VertexWord::new(vec![Letter::ExpVertex { f: f.clone(), g: f.clone() }; 3]).unwrap();
    assert!((truncated_oracle(2, 8, &w).unwrap() - c(6.0, 0.0)).norm() < 1e-12);
    // (b⁺)ⁿ(b⁻)ⁿ and (b⁺b⁻)ⁿ agree in the doubled representation
    for n in 1..=4 {
        let mut letters = vec![Letter::Annihilate(f.clone()); n];
        letters.extend(vec![Letter::Create(f.clone()); n]);
        let split = truncated_oracle(2, 2 * n, &VertexWord::new(letters).unwrap()).unwrap();
        let paired = truncated_oracle(2, 2 * n, &VertexWord::new(vec![Letter::ExpVertex { f: f.clone(), g: f.clone() }; n]).unwrap()).unwrap();
        assert!((split - paired).norm() < 1e-10, "n={n}");
    }
}

#[test]
fn single_mode_q4_oracle() {
    let f = real(&[1.0]);
    let total: C64 = field_power_words(&f, 4).iter().map(|w| truncated_oracle(1, 8, w).unwrap()).sum();
    assert!((total - c(3.0, 0.0)).norm() < 1e-12);
}

#[test]
fn oracle_needs_enough_levels() {
    let f = real(&[1.0]);
    let w = VertexWord::new(vec![Letter::Create(f.clone()), Letter::Annihilate(f)]).unwrap();
    assert!(matches!(truncated_oracle(1, 1, &w), Err(Error::Precision(_))));
    assert!(truncated_oracle(3, 4, &w).is_err());
}

#[test]
fn exponential_vectors() {
    let zero = real(&[0.0, 0.0]);
    assert!((exponential_vector_inner(&zero, &zero, 3).unwrap() - c(1.0, 0.0)).norm() < 1e-15);
    let mut r = rng::stream(5, "fock-test", 3);
    let (f, g) = (random_fn(&mut r, 2), random_fn(&mut r, 2));
    for m in [2, 4, 8] {
        let a = exponential_vector_inner(&f, &g, m).unwrap();
        assert!(close(a, exponential_vector_series(&f, &g, m), 1e-12));
    }
    assert!(close(exponential_vector_series(&f, &g, 30), f.inner(&g).exp(), 1e-12));
}

#[test]
fn thermal_examples() {
    let f = real(&[1.0, 1.0]);
    assert!((thermal_quadratic_form(&f, &[0.0, 0.0]).unwrap() - f.norm_sq()).abs() < 1e-15);
    assert!((thermal_quadratic_form(&real(&[1.0]), &[1.0]).unwrap() - 3.0).abs() < 1e-15);
    let rho = thermal_occupation(1.0, &[1.0, 2.0]).unwrap();
    let coth = |x: f64| x.cosh() / x.sinh();
    assert!((thermal_quadratic_form(&f, &rho).unwrap() - (coth(0.5) + coth(1.0))).abs() < 1e-12);
    assert!(matches!(thermal_quadratic_form(&f, &[-0.1, 0.0]), Err(Error::Domain(_))));
    assert!(thermal_occupation(1.0, &[0.0]).is_err());
    let q = thermal_quadratic_form(&f, &rho).unwrap();
    assert!((thermal_characteristic(&f, &rho).unwrap() - (-0.5 * q).exp()).abs() < 1e-15);
}

#[test]
fn thermal_moments_are_gaussian() {
    let f = real(&[0.7, -0.4]);
    let rho = [0.5, 1.5];
    let q = thermal_quadratic_form(&f, &rho).unwrap();
    for (n, pairings) in [(2, 1.0), (4, 3.0), (6, 15.0)] {
        let v = thermal_moment_oracle(&f, &rho, n, n).unwrap();
        let want = pairings * q.powi(n as i32 / 2);
        assert!((v - want).abs() < 1e-10 * want, "n={n}: {v} vs {want}");
    }
    assert!(thermal_moment_oracle(&f, &rho, 3, 3).unwrap().abs() < 1e-12);
}

#[test]
fn truncated_mode_structure() {
    for m in 1..=8 {
        let mode = TruncatedMode::new(m).unwrap();
        assert_eq!(mode.annihilation(), &mode.creation().transpose());
        assert!(mode.commutator_defect() < 1e-12);
    }
    assert!(TruncatedMode::new(0).is_err());
}

#[test]
fn commutators_on_oracle() {
    let mut r = rng::stream(11, "fock-test", 4);
    for dim in 1..=2 {
        let (f, g) = (random_fn(&mut r, dim), random_fn(&mut r, dim));
        assert!(ccr_defect(&f, &g, 4).unwrap() < 1e-12);
        assert!(doubled_commutator_defect(&f, &g, 3).unwrap() < 1e-14);
    }
    let unit = real(&[1.0]);
    assert!(doubled_commutator_defect(&unit, &unit, 6).unwrap() < 1e-13);
}

#[test]
fn moment_patterns() {
    let f = real(&[0.6, 1.2]);
    let s = f.norm_sq();
    let mut double_fact = 1.0;
    for k in 1..=4 {
        double_fact *= (2 * k - 1) as f64;
        let v = field_moment(&f, 2 * k).unwrap();
        assert!((v - double_fact * s.powi(k as i32)).abs() < 1e-10 * v);
    }
}

fn kind() -> impl Strategy<Value = WordKind> {
    prop_oneof![Just(WordKind::Gaussian), Just(WordKind::Poisson), Just(WordKind::Exponential)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn combinatorial_matches_oracle(seed in any::<u64>(), kind in kind(), len in 1usize..=6, dim in 1usize..=3) {
        let mut r = rng::stream(seed, "fock-prop", 0);
        let w = random_word(kind, len, dim, &mut r);
        let (value, oracle, ok) = oracle_comparison(kind, &w).unwrap();
        prop_assert!(ok, "{w}: {value} vs {oracle}");
    }
}
