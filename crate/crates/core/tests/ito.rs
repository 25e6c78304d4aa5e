use combfield::combinat::binomial;
use combfield::error::Error;
use combfield::ito::*;
use combfield::moments::falling_power;
use combfield::rng::StreamId;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use proptest::prelude::*;
use rand::Rng;

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

/// He_{n+1} = x He_n − n He_{n−1}, coefficients lowest degree first.
fn hermite_by_recurrence(n: usize) -> Vec<BigRational> {
    let mut prev = vec![BigRational::one()];
    if n == 0 {
        return prev;
    }
    let mut cur = vec![BigRational::zero(), BigRational::one()];
    for k in 1..n {
        let mut next = vec![BigRational::zero(); k + 2];
        for (i, c) in cur.iter().enumerate() {
            next[i + 1] += c;
        }
        for (i, c) in prev.iter().enumerate() {
            next[i] -= c * q(k as i64, 1);
        }
        prev = cur;
        cur = next;
    }
    cur
}

/// C_{n+1} = (x − t − n) C_n − n t C_{n−1}, from (1+z)∂_z of the generating function.
fn charlier_by_recurrence(n: usize, x: &BigRational, t: &BigRational) -> BigRational {
    let mut prev = BigRational::one();
    if n == 0 {
        return prev;
    }
    let mut cur = x - t;
    for k in 1..n {
        let kq = q(k as i64, 1);
        let next = (x - t - &kq) * &cur - kq * t * &prev;
        prev = cur;
        cur = next;
    }
    cur
}

fn stream(name: &str, i: u64) -> StreamId {
    StreamId::new(42, name, i)
}

#[test]
fn polynomial_examples() {
    assert_eq!(hermite(3, 2.0).unwrap(), 2.0);
    assert_eq!(hermite(0, 1.7).unwrap(), 1.0);
    assert_eq!(charlier(0, 3.0, 0.5).unwrap(), 1.0);
    assert_eq!(charlier_exact(1, &q(7, 2), &q(1, 3)).unwrap(), q(7, 2) - q(1, 3));
    assert_eq!(charlier_exact(2, &q(3, 1), &q(2, 1)).unwrap(), q(-2, 1));
    assert!(hermite(31, 0.0).is_err());
}

#[test]
fn hermite_generating_vs_recurrence_and_closed_form() {
    for n in 0..=30 {
        let c = hermite_coefficients(n).unwrap();
        assert_eq!(c, hermite_by_recurrence(n), "n={n}");
        // (−1)^k n!/(2^k k!(n−2k)!) x^{n−2k}
        let fact = |m: usize| -> BigInt { (1..=m as u64).map(BigInt::from).product() };
        for k in 0..=n / 2 {
            let mut v = BigRational::new(fact(n), fact(k) * fact(n - 2 * k) * (BigInt::one() << k));
            if k % 2 == 1 {
                v = -v;
            }
            assert_eq!(c[n - 2 * k], v);
        }
    }
}

#[test]
fn charlier_matches_recurrence_and_binomial_form() {
    for n in 0..=12 {
        for (x, t) in [(q(0, 1), q(1, 1)), (q(5, 1), q(3, 2)), (q(-7, 3), q(2, 5)), (q(11, 1), q(0, 1))] {
            let c = charlier_exact(n, &x, &t).unwrap();
            assert_eq!(c, charlier_by_recurrence(n, &x, &t));
            let form: BigRational = (0..=n)
                .map(|k| {
                    BigRational::from_integer(BigInt::from(binomial(n, k)))
                        * num_traits::pow(-t.clone(), n - k)
                        * falling_power(&x, k)
                })
                .sum();
            assert_eq!(c, form);
        }
    }
}

#[test]
fn charlier_generating_function() {
    for x in 0..=8 {
        for &z in &[-0.5, -0.2, 0.25, 0.5] {
            for &t in &[0.5, 1.0, 2.0] {
                let g = charlier_generating_check(x, t, z, 12).unwrap();
                assert!(g.pass, "x={x} z={z} t={t}: {g:?}");
            }
        }
    }
    assert!(charlier_generating_check(2, 1.0, 1.0, 12).is_err());
}

#[test]
fn offdiag_wiener_low_orders() {
    let path = sample_wiener(TimeGrid::new(1.0, 50).unwrap(), &stream("low", 0));
    let w = path.end_value();
    let p2: f64 = path.increments().iter().map(|d| d * d).sum();
    assert!((offdiag_wiener(&path, 1).unwrap() - w).abs() < 1e-12);
    assert!((offdiag_wiener(&path, 2).unwrap() - (w * w - p2)).abs() < 1e-12);
    assert!(matches!(offdiag_wiener(&path, WIENER_MAX_ORDER + 1), Err(Error::Capacity { .. })));
}

#[test]
fn wiener_sampling_is_deterministic() {
    let grid = TimeGrid::new(1.0, 4).unwrap();
    let a = sample_wiener(grid, &stream("det", 3));
    let b = sample_wiener(grid, &stream("det", 3));
    let c = sample_wiener(grid, &stream("det", 4));
    assert_eq!(
        a.increments().iter().map(|x| x.to_bits()).collect::<Vec<_>>(),
        b.increments().iter().map(|x| x.to_bits()).collect::<Vec<_>>()
    );
    assert_ne!(a.increments(), c.increments());
    let p = sample_poisson(3.0, &stream("det", 0)).unwrap();
    assert_eq!(p.jump_times(), sample_poisson(3.0, &stream("det", 0)).unwrap().jump_times());
    assert!(p.jump_times().windows(2).all(|w| w[0] < w[1]));
    assert!(p.jump_times().iter().all(|&s| s > 0.0 && s <= 3.0));
}

#[test]
fn grid_validation() {
    assert!(TimeGrid::new(0.0, 4).is_err());
    assert!(TimeGrid::new(1.0, 0).is_err());
    assert!(PoissonJumps::new(1.0, vec![0.5, 0.2], stream("v", 0)).is_err());
    assert!(PoissonJumps::new(1.0, vec![0.5, 1.5], stream("v", 0)).is_err());
}

#[test]
fn wiener_end_value_mean() {
    let grid = TimeGrid::new(1.0, 1).unwrap();
    let (mean, _) = mc_mean(100_000, 42, "w1-mean", |r| {
        let p = sample_wiener(grid, &StreamId::new(r.random_range(0..u64::MAX), "w", 0));
        p.end_value()
    })
    .unwrap();
    assert!(mean.abs() <= 4.0 * (1e-5f64).sqrt(), "{mean}");
}

#[test]
fn poisson_count_mean() {
    let (mean, se) = mc_mean(100_000, 42, "n2-mean", |r| {
        let p = sample_poisson(2.0, &StreamId::new(r.random_range(0..u64::MAX), "n", 0)).unwrap();
        p.count() as f64
    })
    .unwrap();
    assert!((mean - 2.0).abs() <= 4.0 * se, "{mean} ± {se}");
}

#[test]
fn poisson_examples() {
    let jumps = PoissonJumps::new(2.0, vec![0.3, 1.1, 1.9], stream("ex", 0)).unwrap();
    assert_eq!(jumps.count(), 3);
    assert_eq!(jumps.count_at(1.1), 2);
    assert_eq!(offdiag_poisson(&jumps, 1).unwrap(), q(1, 1));
    assert_eq!(offdiag_poisson(&jumps, 2).unwrap(), q(-2, 1));
    assert_eq!(offdiag_poisson_counts(3, &q(2, 1), 2).unwrap(), q(-2, 1));
    assert!(offdiag_poisson_counts(3, &q(2, 1), POISSON_MAX_ORDER + 1).is_err());
}

#[test]
fn martingale_means_vanish() {
    for n in 1..=4 {
        let r = offdiag_poisson_mean_check(n, 1.0, 100_000, 42).unwrap();
        assert!(r.pass, "{r:?}");
        let r = offdiag_wiener_mean_check(n, 1.0, 100, 20_000, 42).unwrap();
        assert!(r.pass, "{r:?}");
    }
}

#[test]
fn exponentiated_martingales() {
    let trivial = exponentiated_martingale_check(&MartingaleKind::Wiener { z: 0.0, t: 1.0 }, 100, 1).unwrap();
    assert_eq!((trivial.estimate, trivial.stderr), (1.0, 0.0));
    assert!(trivial.pass);
    let trivial = exponentiated_martingale_check(&MartingaleKind::Poisson { z: 0.0, t: 1.0 }, 100, 1).unwrap();
    assert_eq!(trivial.estimate, 1.0);
    for kind in [MartingaleKind::Wiener { z: 0.5, t: 1.0 }, MartingaleKind::Poisson { z: 0.5, t: 1.0 }] {
        let r = exponentiated_martingale_check(&kind, 100_000, 42).unwrap();
        assert!(r.pass, "{r:?}");
        assert_eq!(r.target, 1.0);
    }
    let f = StepFunction::indicator(0.0, 1.0, 1.0).unwrap();
    let g = StepFunction::indicator(0.5, 1.0, 2.0).unwrap();
    assert!((step_inner(&f, &g) - 1.0).abs() < 1e-15);
    let r = exponentiated_martingale_check(&MartingaleKind::General { f, g }, 100_000, 42).unwrap();
    assert!((r.target - 1f64.exp()).abs() < 1e-12);
    assert!(r.pass, "{r:?}");
    assert!(exponentiated_martingale_check(&MartingaleKind::Wiener { z: 0.5, t: 1.0 }, 1, 1).is_err());
}

#[test]
fn iterated_moments() {
    let r = iterated_moment_check(1, 1, 1.0, 1.0, 100_000, 42).unwrap();
    assert!(r.pass && r.target == 1.0, "{r:?}");
    let r = iterated_moment_check(2, 2, 1.0, 1.0, 100_000, 42).unwrap();
    assert!(r.pass && r.target == 0.5, "{r:?}");
    let r = iterated_moment_check(1, 2, 1.0, 1.0, 100_000, 42).unwrap();
    assert!(r.pass && r.target == 0.0, "{r:?}");
    let r = iterated_moment_check(3, 3, 1.0, 0.5, 100_000, 42).unwrap();
    assert!(r.pass && (r.target - 0.125 / 6.0).abs() < 1e-15, "{r:?}");
    assert!(iterated_moment_check(5, 1, 1.0, 1.0, 1000, 42).is_err());
}

#[test]
fn reports_are_reproducible() {
    let a = exponentiated_martingale_check(&MartingaleKind::Wiener { z: 0.3, t: 2.0 }, 30_000, 9).unwrap();
    let b = exponentiated_martingale_check(&MartingaleKind::Wiener { z: 0.3, t: 2.0 }, 30_000, 9).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.seed, 9);
    assert_eq!(a.paths, 30_000);
}

#[test]
fn hermite_convergence_under_refinement() {
    for n in [3, 4] {
        let r = hermite_convergence(n, 1.0, &[100, 1000, 10_000], 100, 42).unwrap();
        assert!(r.pass, "{r:?}");
    }
}

proptest! {
    #[test]
    fn power_sums_match_brute_force(inc in prop::collection::vec(-2.0f64..2.0, 1..=12), n in 1usize..=4) {
        let ps = PowerSums::new(&inc, n).unwrap();
        let fast = offdiag_from_power_sums(&ps, n).unwrap();
        let slow = offdiag_brute(&inc, n);
        let scale = inc.iter().map(|x| x.abs()).sum::<f64>().max(1.0).powi(n as i32);
        prop_assert!((fast - slow).abs() <= 1e-10 * scale, "{fast} vs {slow}");
    }

    #[test]
    fn poisson_integral_is_charlier(
        mut times in prop::collection::btree_set(1u32..1000, 0..=8),
        t_num in 1u32..=4000,
        n in 1usize..=6,
    ) {
        let t_end = f64::from(t_num) / 1000.0;
        let jumps: Vec<f64> = std::mem::take(&mut times)
            .into_iter()
            .map(|k| f64::from(k) / 1000.0 * t_end)
            .collect();
        let p = PoissonJumps::new(t_end, jumps, StreamId::new(0, "prop", 0)).unwrap();
        let x = BigRational::from_integer(BigInt::from(p.count()));
        let t = exact(t_end).unwrap();
        prop_assert_eq!(offdiag_poisson(&p, n).unwrap(), charlier_exact(n, &x, &t).unwrap());
        prop_assert_eq!(charlier_exact(n, &x, &t).unwrap(), charlier_by_recurrence(n, &x, &t));
    }

    #[test]
    fn charlier_float_matches_exact(x in 0u32..20, t in 0.0f64..5.0, n in 0usize..=10) {
        let e = charlier_exact(n, &q(i64::from(x), 1), &exact(t).unwrap()).unwrap().to_f64().unwrap();
        prop_assert!((charlier(n, f64::from(x), t).unwrap() - e).abs() <= 1e-9 * e.abs().max(1.0));
    }
}
