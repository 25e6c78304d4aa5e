use combfield::combinat::{binomial, stirling_second};
use combfield::error::Error;
use combfield::moments::*;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn int(n: i64) -> BigRational {
    q(n, 1)
}

fn ints(v: &[i64]) -> Vec<BigRational> {
    v.iter().map(|&x| int(x)).collect()
}

fn binom(n: usize, k: usize) -> BigRational {
    BigRational::from_integer(BigInt::from(binomial(n, k)))
}

/// m_n = Σ_{k=1}^{n} C(n−1, k−1) κ_k m_{n−k}.
fn moments_by_recursion(kappa: &[BigRational]) -> Vec<BigRational> {
    let n_max = kappa.len();
    let mut m = vec![BigRational::one()];
    for n in 1..=n_max {
        let mut acc = BigRational::zero();
        for k in 1..=n {
            acc += binom(n - 1, k - 1) * &kappa[k - 1] * &m[n - k];
        }
        m.push(acc);
    }
    m[1..].to_vec()
}

/// Coefficients of x^{↓n} as a polynomial in x, lowest degree first.
fn falling_coeffs(n: usize) -> Vec<BigRational> {
    let mut p = vec![BigRational::one()];
    for k in 0..n {
        let mut next = vec![BigRational::zero(); p.len() + 1];
        for (i, a) in p.iter().enumerate() {
            next[i + 1] += a;
            next[i] -= a * int(k as i64);
        }
        p = next;
    }
    p
}

#[test]
fn gaussian_example() {
    let c = MomentSequence::cumulant(ints(&[0, 1, 0, 0, 0, 0]));
    let m = cumulants_to_moments(&c).unwrap();
    assert_eq!(m.tail(), ints(&[0, 1, 0, 3, 0, 15]).as_slice());
    let back = moments_to_cumulants(&MomentSequence::ordinary(ints(&[0, 1, 0, 3]))).unwrap();
    assert_eq!(back.tail(), ints(&[0, 1, 0, 0]).as_slice());
    assert_eq!(preset_moments(&Preset::Gaussian, 6).unwrap().get(6), &int(15));
}

#[test]
fn constant_cumulants_give_touchard_polynomials() {
    let lambda = q(3, 2);
    let c = MomentSequence::cumulant(vec![lambda.clone(); 8]);
    let m = cumulants_to_moments(&c).unwrap();
    for n in 1..=8 {
        let mut want = BigRational::zero();
        for k in 1..=n {
            want += BigRational::from_integer(stirling_second(n, k).unwrap().into()) * num_traits::pow(lambda.clone(), k);
        }
        assert_eq!(m.get(n), &want);
    }
}

#[test]
fn deterministic_variable() {
    let mu = q(-2, 3);
    let mut k = vec![BigRational::zero(); 7];
    k[0] = mu.clone();
    let m = cumulants_to_moments(&MomentSequence::cumulant(k)).unwrap();
    for n in 1..=7 {
        assert_eq!(m.get(n), &num_traits::pow(mu.clone(), n));
    }
}

#[test]
fn unit_gamma_cumulants() {
    let m = MomentSequence::ordinary(ints(&[1, 2, 6, 24]));
    assert_eq!(moments_to_cumulants(&m).unwrap().tail(), ints(&[1, 1, 2, 6]).as_slice());
}

#[test]
fn first_cumulant_is_mean() {
    let m = MomentSequence::ordinary(vec![q(5, 7), q(1, 1), q(-3, 2)]);
    assert_eq!(moments_to_cumulants(&m).unwrap().get(1), &q(5, 7));
}

#[test]
fn poisson_factorial_moments() {
    let lambda = q(2, 5);
    let f = moments_to_factorial(&preset_moments(&Preset::Poisson(lambda.clone()), 10).unwrap()).unwrap();
    for n in 1..=10 {
        assert_eq!(f.get(n), &num_traits::pow(lambda.clone(), n));
    }
    let c = moments_to_cumulants(&preset_moments(&Preset::Poisson(lambda.clone()), 10).unwrap()).unwrap();
    assert!(c.tail().iter().all(|k| k == &lambda));
}

#[test]
fn indicator_factorial_moments() {
    let f = MomentSequence::factorial(ints(&[1, 0, 0, 0, 0]));
    let m = factorial_to_moments(&f).unwrap();
    assert_eq!(m.tail(), ints(&[1, 1, 1, 1, 1]).as_slice());
}

#[test]
fn preset_closed_forms() {
    // Poisson λ = 1 gives the Bell numbers
    let p = preset_moments(&Preset::Poisson(int(1)), 8).unwrap();
    assert_eq!(p.tail(), ints(&[1, 2, 5, 15, 52, 203, 877, 4140]).as_slice());
    // Gamma λ = 1 gives n!
    let g = preset_moments(&Preset::Gamma(int(1)), 10).unwrap();
    let mut fact = BigRational::one();
    for n in 1..=10 {
        fact *= int(n as i64);
        assert_eq!(g.get(n), &fact);
    }
    // Gamma λ: rising powers; Gaussian: (2k)!/(2^k k!)
    let lambda = q(5, 3);
    let g = preset_moments(&Preset::Gamma(lambda.clone()), 10).unwrap();
    let gauss = preset_moments(&Preset::Gaussian, 12).unwrap();
    for n in 1..=10 {
        assert_eq!(g.get(n), &rising_power(&lambda, n));
    }
    for n in 1..=12 {
        let want = if n % 2 == 1 {
            BigRational::zero()
        } else {
            let k = n / 2;
            let num: BigInt = (1..=n as u64).map(BigInt::from).product();
            let den: BigInt = (1..=k as u64).map(BigInt::from).product::<BigInt>() << k;
            BigRational::new(num, den)
        };
        assert_eq!(gauss.get(n), &want);
    }
    let c = moments_to_cumulants(&gauss).unwrap();
    assert!((1..=12).all(|n| c.get(n) == &int((n == 2) as i64)));
}

#[test]
fn presets_reject_bad_lambda() {
    assert!(matches!(preset_moments(&Preset::Poisson(int(0)), 4), Err(Error::Domain(_))));
    assert!(matches!(preset_moments(&Preset::Gamma(q(-1, 2)), 4), Err(Error::Domain(_))));
}

#[test]
fn kind_mismatch_is_rejected() {
    let c = MomentSequence::cumulant(ints(&[1, 2]));
    assert!(moments_to_cumulants(&c).is_err());
    assert!(moments_to_factorial(&c).is_err());
}

#[test]
fn falling_and_rising_powers() {
    assert_eq!(falling_power(&int(5), 3), int(60));
    assert_eq!(rising_power(&int(5), 3), int(210));
    assert_eq!(falling_power(&q(1, 2), 0), int(1));
}

fn rational() -> impl Strategy<Value = BigRational> {
    (-30i64..=30, 1i64..=12).prop_map(|(n, d)| q(n, d))
}

proptest! {
    #[test]
    fn cumulant_round_trip(seq in prop::collection::vec(rational(), 1..=12)) {
        let m = MomentSequence::ordinary(seq);
        prop_assert_eq!(cumulants_to_moments(&moments_to_cumulants(&m).unwrap()).unwrap(), m);
    }

    #[test]
    fn factorial_round_trip(seq in prop::collection::vec(rational(), 1..=12)) {
        let m = MomentSequence::ordinary(seq);
        prop_assert_eq!(factorial_to_moments(&moments_to_factorial(&m).unwrap()).unwrap(), m);
    }

    #[test]
    fn cumulants_match_recursion(kappa in prop::collection::vec(rational(), 1..=12)) {
        let m = cumulants_to_moments(&MomentSequence::cumulant(kappa.clone())).unwrap();
        let want = moments_by_recursion(&kappa);
        prop_assert_eq!(m.tail(), want.as_slice());
    }

    #[test]
    fn factorial_moments_by_polynomial_expansion(seq in prop::collection::vec(rational(), 1..=10)) {
        let m = MomentSequence::ordinary(seq);
        let f = moments_to_factorial(&m).unwrap();
        for n in 1..=m.order() {
            let c = falling_coeffs(n);
            let want: BigRational = (0..=n).map(|k| &c[k] * m.get(k)).sum();
            prop_assert_eq!(f.get(n), &want);
        }
    }

    #[test]
    fn partition_paths_agree(kappa in prop::collection::vec(rational(), 1..=8)) {
        let c = MomentSequence::cumulant(kappa);
        prop_assert_eq!(
            cumulants_to_moments_with(&c, PartitionSum::Partitions).unwrap(),
            cumulants_to_moments_with(&c, PartitionSum::Profiles).unwrap()
        );
        let m = cumulants_to_moments(&c).unwrap();
        prop_assert_eq!(
            moments_to_cumulants_with(&m, PartitionSum::Partitions).unwrap(),
            moments_to_cumulants_with(&m, PartitionSum::Profiles).unwrap()
        );
    }
}
