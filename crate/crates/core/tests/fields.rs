use combfield::combinat::hierarchy_count;
use combfield::error::Error;
use combfield::fields::*;
use combfield::rng;
use combfield::verify::{default_quartic, random_rational, wick_families};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn gaussian(g: Vec<Vec<f64>>) -> FieldModel<f64> {
    FieldModel::with_default_labels(g, vec![]).unwrap()
}

fn exact_pair() -> FieldModel<BigRational> {
    FieldModel::exact(vec![vec![q(2, 1), q(1, 3)], vec![q(1, 3), q(1, 1)]], vec![]).unwrap()
}

fn exact_triple() -> FieldModel<BigRational> {
    FieldModel::exact(
        vec![
            vec![q(3, 2), q(1, 4), q(0, 1)],
            vec![q(1, 4), q(1, 1), q(-1, 3)],
            vec![q(0, 1), q(-1, 3), q(2, 1)],
        ],
        vec![],
    )
    .unwrap()
}

fn random_table(seed: u64, kind: TableKind, labels: usize, order: usize) -> GreenTable<BigRational> {
    let mut r = rng::stream(seed, "fields-test", 0);
    GreenTable::from_fn(kind, labels, order, |_| random_rational(&mut r))
}

/// κ(x₀X) = m(x₀X) − Σ_{S ⊊ X} κ(x₀S) m(X∖S), over subsets of positions.
fn cumulant_by_subsets(m: &GreenTable<BigRational>, key: &[usize]) -> BigRational {
    let (x0, rest) = key.split_first().unwrap();
    let n = rest.len();
    let pick = |mask: u32| -> Vec<usize> { (0..n).filter(|i| mask >> i & 1 == 1).map(|i| rest[i]).collect() };
    let full = (1u32 << n) - 1;
    let mut acc = m.get(key).unwrap().clone();
    for s in 0..full {
        let mut with = vec![*x0];
        with.extend(pick(s));
        acc -= cumulant_by_subsets(m, &with) * m.get(&pick(full & !s)).unwrap();
    }
    acc
}

#[test]
fn isserlis_examples() {
    let one = gaussian(vec![vec![1.0]]);
    assert_eq!(isserlis_green(&one, &[0, 0, 0, 0]).unwrap(), 3.0);
    let quad = Quadrature::new(&one, &[0.0]).unwrap();
    assert!((quad.moment(&[0, 0, 0, 0]) - 3.0).abs() < 1e-8);
    let m = exact_pair();
    for x in [vec![0], vec![0, 1, 1], vec![1, 1, 1, 0, 0]] {
        assert!(isserlis_green(&m, &x).unwrap().is_zero());
    }
    let g = m.g();
    let want = &g[0][0] * &g[1][1] + q(2, 1) * &g[0][1] * &g[0][1];
    assert_eq!(isserlis_green(&m, &[0, 0, 1, 1]).unwrap(), want);
    assert!(matches!(isserlis_green(&m, &[0, 2]), Err(Error::Domain(_))));
}

#[test]
fn isserlis_matches_quadrature() {
    let m = exact_pair();
    let quad = Quadrature::new(&m.to_f64(), &[0.0, 0.0]).unwrap();
    for x in all_multisets(2, 6) {
        let exact: f64 = num_traits::ToPrimitive::to_f64(&isserlis_green(&m, &x).unwrap()).unwrap();
        assert!((quad.moment(&x) - exact).abs() < 1e-6 * exact.abs().max(1.0), "{x:?}");
    }
}

#[test]
fn gaussian_cumulants() {
    let m = exact_triple();
    let c = greens_to_cumulants(&isserlis_table(&m, 6).unwrap()).unwrap();
    for (key, v) in c.values() {
        if key.len() == 2 {
            assert_eq!(v, &m.g()[key[0]][key[1]]);
        } else {
            assert!(v.is_zero(), "{key:?}");
        }
    }
}

#[test]
fn low_order_cumulant_listing() {
    let t = random_table(4, TableKind::Ordinary, 3, 3);
    let c = greens_to_cumulants(&t).unwrap();
    let m = |k: &[usize]| t.get(k).unwrap().clone();
    assert_eq!(c.get(&[0, 2]).unwrap(), &(m(&[0, 2]) - m(&[0]) * m(&[2])));
    let (x, y, z) = (0, 1, 2);
    let want = m(&[x, y, z]) - m(&[x, y]) * m(&[z]) - m(&[y, z]) * m(&[x]) - m(&[x, z]) * m(&[y])
        + q(2, 1) * m(&[x]) * m(&[y]) * m(&[z]);
    assert_eq!(c.get(&[x, y, z]).unwrap(), &want);
}

#[test]
fn missing_entries_rejected() {
    let mut t = GreenTable::new(TableKind::Ordinary, 2);
    t.insert(vec![0, 1], q(1, 1)).unwrap();
    assert!(matches!(greens_to_cumulants(&t), Err(Error::Domain(_))));
    assert!(t.insert(vec![3], q(1, 1)).is_err());
}

#[test]
fn ds_residual_vanishes_on_gaussian_tables() {
    for m in [exact_pair(), exact_triple()] {
        let n = m.size();
        let t = isserlis_table(&m, 6).unwrap();
        for xs in all_multisets(n, 5) {
            for x in 0..n {
                assert!(ds_residual(&m, &t, x, &xs).unwrap().is_zero(), "x={x} X={xs:?}");
            }
        }
    }
    let t = isserlis_table(&exact_pair(), 2).unwrap();
    assert!(ds_residual(&exact_pair(), &t, 0, &[]).unwrap().is_zero());
}

#[test]
fn ds_residual_on_quartic_quadrature() {
    let m = default_quartic();
    let t = Quadrature::new(&m, &[0.0]).unwrap().green_table(8);
    for k in 0..=3 {
        let r = ds_residual(&m, &t, 0, &vec![0; k]).unwrap();
        assert!(r.abs() <= 1e-4, "|X|={k}: {r}");
    }
}

#[test]
fn oracle_examples() {
    let m = gaussian(vec![vec![2.0]]);
    let e = measure_oracle(&m, &[0, 0], OracleMethod::Quadrature).unwrap();
    assert!((e.value - 2.0).abs() < 1e-6);
    let e = measure_oracle(&m, &[0, 0, 0, 0], OracleMethod::Quadrature).unwrap();
    assert!((e.value - 12.0).abs() < 1e-5);
    assert!(measure_oracle(&m, &[1], OracleMethod::Quadrature).is_err());
}

#[test]
fn quadrature_and_monte_carlo_agree() {
    let m = default_quartic();
    let quad = measure_oracle(&m, &[0, 0], OracleMethod::Quadrature).unwrap();
    let mc = measure_oracle(&m, &[0, 0], OracleMethod::MonteCarlo(MonteCarloConfig::new(17, 1_000_000))).unwrap();
    let se = (quad.stderr.powi(2) + mc.stderr.powi(2)).sqrt();
    assert!((quad.value - mc.value).abs() <= 3.0 * se, "{quad:?} vs {mc:?}");
}

#[test]
fn monte_carlo_independent_of_workers() {
    let m = default_quartic();
    let xs = vec![vec![0, 0], vec![0, 0, 0, 0]];
    let cfg = MonteCarloConfig::new(5, 45_000);
    let run = |threads| {
        rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(|| monte_carlo(&m, &xs, cfg).unwrap())
    };
    let a = run(1);
    let b = run(3);
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(x.value.to_bits(), y.value.to_bits());
        assert_eq!(x.stderr.to_bits(), y.stderr.to_bits());
    }
}

#[test]
fn divergent_or_large_models_rejected() {
    let bad = FieldModel::with_default_labels(vec![vec![1.0]], vec![(vec![0, 0, 0, 0], 0.6)]).unwrap();
    assert!(matches!(Quadrature::new(&bad, &[0.0]), Err(Error::Model(_))));
    let eye = (0..4).map(|i| (0..4).map(|j| f64::from(u8::from(i == j))).collect()).collect();
    assert!(matches!(Quadrature::new(&gaussian(eye), &[0.0; 4]), Err(Error::Capacity { .. })));
}

#[test]
fn model_validation() {
    // not symmetric
    assert!(FieldModel::with_default_labels(vec![vec![1.0, 0.2], vec![0.3, 1.0]], vec![]).is_err());
    // not positive definite
    assert!(FieldModel::with_default_labels(vec![vec![1.0, 2.0], vec![2.0, 1.0]], vec![]).is_err());
    // degree above six
    assert!(FieldModel::with_default_labels(vec![vec![1.0]], vec![(vec![0; 8], -0.1)]).is_err());
    let m = gaussian(vec![vec![2.0, 0.5], vec![0.5, 1.0]]);
    let prod = m.g_matrix() * m.precision_matrix();
    assert!((prod - nalgebra::DMatrix::<f64>::identity(2, 2)).amax() < 1e-10);
}

#[test]
fn model_files() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../models/quartic.json");
    let m = FieldModel::from_json(&std::fs::read_to_string(path).unwrap()).unwrap();
    assert_eq!(m.labels(), ["phi"]);
    assert_eq!(m.vertices().get(&vec![0, 0, 0, 0]), Some(&-0.6));
    let back = FieldModel::from_json(&m.to_json()).unwrap();
    assert_eq!(back.g(), m.g());
    assert_eq!(back.vertices(), m.vertices());
    assert!(FieldModel::from_json("{\"labels\":[\"a\"],\"g\":[[1.0]],\"vertices\":[{\"idx\":[\"b\"],\"v\":1}]}").is_err());
}

#[test]
fn legendre_duality() {
    let g = gaussian(vec![vec![1.0, 0.3], vec![0.3, 0.8]]);
    let rep = legendre_duality_check(&g, &[0.1, -0.2]).unwrap();
    assert!(rep.deviation <= 1e-6, "{}", rep.deviation);
    let rep = legendre_duality_check(&default_quartic(), &[0.0]).unwrap();
    assert!(rep.deviation <= 1e-3, "{}", rep.deviation);
    // Gaussian limit: W″ = G and Γ″ = −L
    let one = gaussian(vec![vec![2.0]]);
    let rep = legendre_duality_check(&one, &[0.0]).unwrap();
    assert!((rep.w2[0][0] - 2.0).abs() < 1e-6);
    assert!((rep.gamma2[0][0] + 0.5).abs() < 1e-6);
}

#[test]
fn self_energy_partial_sums() {
    let weak = FieldModel::with_default_labels(vec![vec![1.0]], vec![(vec![0, 0, 0, 0], -0.1)]).unwrap();
    let rep = self_energy_check(&weak).unwrap();
    assert!(rep.strictly_decreasing, "{:?}", rep.errors);
}

#[test]
fn leibniz_partition_identity() {
    let m = FieldModel::with_default_labels(
        vec![vec![1.0, 0.2], vec![0.2, 0.7]],
        vec![(vec![0, 0, 0, 0], -0.5), (vec![0, 0, 1, 1], -0.2), (vec![1, 1, 1, 1], -0.4)],
    )
    .unwrap();
    for x in all_multisets(2, 3).into_iter().filter(|x| !x.is_empty()) {
        let rep = leibniz_check(&m, &[0.1, -0.05], &x, 1e-2).unwrap();
        assert!(rep.abs_error <= 1e-3, "{x:?}: {rep:?}");
    }
}

#[test]
fn hierarchy_term_counts() {
    let eff = EffectiveActionTable::from_fn(1, 8, |_| q(1, 1));
    let cov = vec![vec![q(1, 1)]];
    for k in 2..=6 {
        let e = hierarchy_cumulant_expansion(0, &vec![0; k], &eff, &cov, UpsilonConvention::RootIncluded).unwrap();
        assert_eq!(BigInt::from(e.terms.len()), BigInt::from(hierarchy_count(k).unwrap()));
        assert_eq!(hierarchy_symbols(k, UpsilonConvention::RootSeparate).unwrap().len(), e.terms.len());
    }
    let counts: Vec<usize> =
        (2..=4).map(|k| hierarchy_symbols(k, UpsilonConvention::RootIncluded).unwrap().len()).collect();
    assert_eq!(counts, [1, 4, 26]);
    let two = hierarchy_symbols(2, UpsilonConvention::RootIncluded).unwrap();
    assert_eq!(two.len(), 1);
    assert!(two[0].contains("x1") && two[0].contains("x2"));
}

#[test]
fn hierarchy_matches_recurrence_and_conventions() {
    let mut r = rng::stream(9, "fields-test", 1);
    let eff = EffectiveActionTable::from_fn(2, 5, |_| random_rational(&mut r));
    let cov = vec![vec![q(3, 2), q(-1, 4)], vec![q(-1, 4), q(2, 3)]];
    for xs in all_multisets(2, 4).into_iter().filter(|m| m.len() >= 2) {
        for y in 0..2 {
            let a = hierarchy_cumulant_expansion(y, &xs, &eff, &cov, UpsilonConvention::RootIncluded).unwrap();
            let b = hierarchy_cumulant_expansion(y, &xs, &eff, &cov, UpsilonConvention::RootSeparate).unwrap();
            let rec = cumulant_by_recurrence(y, &xs, &eff, &cov).unwrap();
            assert_eq!(a.total, rec);
            assert_eq!(b.total, rec);
        }
    }
}

#[test]
fn effective_action_round_trip() {
    // cumulants built from a random effective action come back to it
    let mut r = rng::stream(10, "fields-test", 2);
    let cov = vec![vec![q(1, 1), q(1, 5)], vec![q(1, 5), q(1, 2)]];
    let amp = invert(&cov).unwrap();
    let eff = EffectiveActionTable::from_fn(2, 4, |k| if k.len() == 2 { -amp[k[0]][k[1]].clone() } else { random_rational(&mut r) });
    let mut cum = GreenTable::new(TableKind::Cumulant, 2);
    for key in all_multisets(2, 4) {
        let v = match key.len() {
            0 => continue,
            1 => BigRational::zero(),
            _ => cumulant_by_recurrence(key[0], &key[1..], &eff, &cov).unwrap(),
        };
        cum.insert(key, v).unwrap();
    }
    let back = effective_action_from_cumulants(&cum, 4).unwrap();
    for (key, v) in eff.values() {
        if key.len() >= 2 {
            assert_eq!(back.get(key).unwrap(), v, "{key:?}");
        }
    }
}

#[test]
fn wick_examples() {
    let t = random_table(6, TableKind::Ordinary, 2, 4);
    let c = greens_to_cumulants(&t).unwrap();
    let w = wick_monomial(&t, &[1]).unwrap();
    assert_eq!(w.coefficient(&[1]), BigRational::one());
    assert_eq!(w.coefficient(&[]), -t.get(&[1]).unwrap());
    let e = wick_product_expectation(&t, &[vec![0], vec![1]], &[]).unwrap();
    assert_eq!(&e, c.get(&[0, 1]).unwrap());

    let g = q(5, 2);
    let gauss = isserlis_table(&FieldModel::exact(vec![vec![g.clone()]], vec![]).unwrap(), 8).unwrap();
    let w2 = wick_monomial(&gauss, &[0, 0]).unwrap();
    assert_eq!(w2.coefficient(&[0, 0]), BigRational::one());
    assert_eq!(w2.coefficient(&[]), -g.clone());
    let e = wick_product_expectation(&gauss, &[vec![0, 0], vec![0, 0]], &[]).unwrap();
    assert_eq!(e, q(2, 1) * &g * &g);
    // Hermite coefficients: :φⁿ: = Σ_k n!/(k!(n−2k)!2^k) (−g)^k φ^{n−2k}
    let fact = |n: usize| -> BigRational { (1..=n as i64).map(|i| q(i, 1)).product() };
    for n in 1..=6 {
        let w = wick_monomial(&gauss, &vec![0; n]).unwrap();
        for k in 0..=n / 2 {
            let c = fact(n) / (fact(k) * fact(n - 2 * k) * q(1 << k, 1)) * num_traits::pow(-g.clone(), k);
            assert_eq!(w.coefficient(&vec![0; n - 2 * k]), c, "n={n} k={k}");
        }
    }
}

#[test]
fn tree_expansion_examples() {
    // Gaussian: one step lands on GJ and stays there
    let g = gaussian(vec![vec![1.0, 0.3], vec![0.3, 0.8]]);
    let cum = greens_to_cumulants(&isserlis_table(&g, 4).unwrap()).unwrap();
    let eff = effective_action_from_cumulants(&cum, 4).unwrap();
    let j = [0.2, -0.1];
    let it = mean_field_tree_expansion(&g, &eff, &j, 3).unwrap();
    let gj = g.g_matrix() * nalgebra::DVector::from_column_slice(&j);
    assert!((&it[1] - &gj).amax() < 1e-12);
    assert!((&it[3] - &it[1]).amax() < 1e-12);

    let m = default_quartic();
    let cum = greens_to_cumulants(&Quadrature::new(&m, &[0.0]).unwrap().green_table(8)).unwrap();
    let eff = effective_action_from_cumulants(&cum, 8).unwrap();
    let it = mean_field_tree_expansion(&m, &eff, &[0.0], 5).unwrap();
    assert!(it.iter().all(|v| v.amax() < 1e-12));
    let it = mean_field_tree_expansion(&m, &eff, &[0.1], 60).unwrap();
    let mean = Quadrature::new(&m, &[0.1]).unwrap().mean();
    assert!((it.last().unwrap() - mean).amax() <= 1e-6);
}

#[test]
fn tree_expansion_detects_divergence() {
    let m = default_quartic();
    let eff = EffectiveActionTable::from_fn(1, 4, |k| match k.len() {
        2 => -0.2,
        _ => 5.0,
    });
    assert!(matches!(mean_field_tree_expansion(&m, &eff, &[3.0], 100), Err(Error::NonContraction(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn cumulant_round_trip(seed in any::<u64>(), labels in 1usize..=3, order in 1usize..=5) {
        let c = random_table(seed, TableKind::Cumulant, labels, order);
        prop_assert_eq!(greens_to_cumulants(&cumulants_to_greens(&c).unwrap()).unwrap(), c);
        let t = random_table(seed, TableKind::Ordinary, labels, order);
        prop_assert_eq!(cumulants_to_greens(&greens_to_cumulants(&t).unwrap()).unwrap(), t);
    }

    #[test]
    fn cumulants_match_subset_recursion(seed in any::<u64>(), labels in 1usize..=3) {
        let t = random_table(seed, TableKind::Ordinary, labels, 4);
        let c = greens_to_cumulants(&t).unwrap();
        for (key, v) in c.values() {
            if !key.is_empty() {
                prop_assert_eq!(v, &cumulant_by_subsets(&t, key));
            }
        }
    }

    #[test]
    fn wick_theorem_matches_brute_force(seed in any::<u64>()) {
        let c = random_table(seed, TableKind::Cumulant, 2, 6);
        for (ys, x) in wick_families() {
            prop_assert_eq!(
                wick_product_expectation(&c, &ys, &x).unwrap(),
                wick_product_expectation_brute(&c, &ys, &x).unwrap()
            );
        }
    }
}
