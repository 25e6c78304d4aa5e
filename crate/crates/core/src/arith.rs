//! Prime factorisation, multiplicative arithmetic functions, Dirichlet
//! convolution and Möbius inversion, and truncated zeta comparisons.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{domain, Result};

/// A positive integer together with its prime factorisation.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FactoredInteger {
    n: u64,
    factors: Vec<(u64, u32)>,
}

impl FactoredInteger {
    pub fn n(&self) -> u64 {
        self.n
    }

    /// `(prime, exponent)` pairs with ascending primes.
    pub fn factors(&self) -> &[(u64, u32)] {
        &self.factors
    }
}

impl fmt::Display for FactoredInteger {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return write!(f, "1");
        }
        for (i, (p, e)) in self.factors.iter().enumerate() {
            if i > 0 {
                write!(f, "·")?;
            }
            if *e == 1 {
                write!(f, "{p}")?;
            } else {
                write!(f, "{p}^{e}")?;
            }
        }
        Ok(())
    }
}

/// Trial division; fine for n up to about 10¹².
pub fn factorize(n: u64) -> Result<FactoredInteger> {
    if n == 0 {
        return domain("0 has no prime factorisation");
    }
    let mut factors = Vec::new();
    let mut m = n;
    let mut p = 2u64;
    while p * p <= m {
        if m % p == 0 {
            let mut e = 0;
            while m % p == 0 {
                m /= p;
                e += 1;
            }
            factors.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if m > 1 {
        factors.push((m, 1));
    }
    Ok(FactoredInteger { n, factors })
}

/// The multiplicative functions in scope.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Multiplicative {
    /// Number of divisors d(n).
    D,
    /// Sum of divisors σ(n).
    Sigma,
    /// Euler's totient φ(n), with φ(1) = 1.
    Phi,
    /// Möbius function μ(n).
    Mu,
}

impl Multiplicative {
    /// Value on a prime power p^e with e ≥ 1.
    pub fn on_prime_power(self, p: u64, e: u32) -> i64 {
        let p = p as i64;
        match self {
            Multiplicative::D => e as i64 + 1,
            Multiplicative::Sigma => (0..=e).map(|k| p.pow(k)).sum(),
            Multiplicative::Phi => p.pow(e - 1) * (p - 1),
            Multiplicative::Mu => {
                if e == 1 {
                    -1
                } else {
                    0
                }
            }
        }
    }
}

/// f(n) computed from the factorisation of n by multiplicativity.
pub fn multiplicative_eval(f: Multiplicative, n: u64) -> Result<i64> {
    let fac = factorize(n)?;
    Ok(fac
        .factors()
        .iter()
        .map(|&(p, e)| f.on_prime_power(p, e))
        .product())
}

/// μ(1..=n) by a linear sieve; index 0 holds 0.
pub fn mobius_table(n: usize) -> Vec<i64> {
    let mut mu = vec![0i64; n + 1];
    if n == 0 {
        return mu;
    }
    mu[1] = 1;
    let mut is_composite = vec![false; n + 1];
    let mut primes = Vec::new();
    for i in 2..=n {
        if !is_composite[i] {
            primes.push(i);
            mu[i] = -1;
        }
        for &p in &primes {
            if i * p > n {
                break;
            }
            is_composite[i * p] = true;
            if i % p == 0 {
                mu[i * p] = 0;
                break;
            }
            mu[i * p] = -mu[i];
        }
    }
    mu
}

/// Primes not exceeding `n`.
pub fn primes_up_to(n: usize) -> Vec<usize> {
    if n < 2 {
        return Vec::new();
    }
    let mut sieve = vec![true; n + 1];
    sieve[0] = false;
    sieve[1] = false;
    let mut i = 2;
    while i * i <= n {
        if sieve[i] {
            for j in (i * i..=n).step_by(i) {
                sieve[j] = false;
            }
        }
        i += 1;
    }
    (0..=n).filter(|&k| sieve[k]).collect()
}

/// Coefficients a_1..a_N of a Dirichlet series, truncated at N.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DirichletSeries {
    coeffs: Vec<BigRational>,
}

impl DirichletSeries {
    /// `coeffs[k]` is a_{k+1}. The series must have at least one term.
    pub fn new(coeffs: Vec<BigRational>) -> Result<Self> {
        if coeffs.is_empty() {
            return domain("a Dirichlet series needs at least one coefficient");
        }
        Ok(DirichletSeries { coeffs })
    }

    /// a_n = f(n) for n = 1..=len.
    pub fn from_fn(len: usize, f: impl Fn(u64) -> BigRational) -> Result<Self> {
        Self::new((1..=len as u64).map(f).collect())
    }

    /// Integer-valued convenience constructor.
    pub fn from_integers(values: &[i64]) -> Result<Self> {
        Self::new(values.iter().map(|&v| BigRational::from_integer(v.into())).collect())
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// a_n for 1 ≤ n ≤ len.
    pub fn get(&self, n: usize) -> &BigRational {
        &self.coeffs[n - 1]
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    /// The constant sequence 1 (coefficients of ζ).
    pub fn ones(len: usize) -> Result<Self> {
        Self::from_fn(len, |_| BigRational::one())
    }

    /// The unit e = (1, 0, 0, …) of Dirichlet convolution.
    pub fn unit(len: usize) -> Result<Self> {
        Self::from_fn(len, |n| if n == 1 { BigRational::one() } else { BigRational::zero() })
    }

    /// Σ_{n≤N} a_n n^{−s} in floating point.
    pub fn evaluate(&self, s: f64) -> f64 {
        use num_traits::ToPrimitive;
        self.coeffs
            .iter()
            .enumerate()
            .rev()
            .map(|(i, a)| a.to_f64().unwrap_or(f64::NAN) * ((i + 1) as f64).powf(-s))
            .sum()
    }
}

/// c_n = Σ_{m|n} a_m b_{n/m}.
pub fn dirichlet_convolve(a: &DirichletSeries, b: &DirichletSeries) -> Result<DirichletSeries> {
    if a.len() != b.len() {
        return domain(format!("truncation lengths differ: {} vs {}", a.len(), b.len()));
    }
    let n = a.len();
    let mut c = vec![BigRational::zero(); n];
    for m in 1..=n {
        if a.get(m).is_zero() {
            continue;
        }
        for k in 1..=n / m {
            c[m * k - 1] += a.get(m) * b.get(k);
        }
    }
    DirichletSeries::new(c)
}

/// b_n = Σ_{k|n} a_k, the convolution with the constant sequence 1.
pub fn divisor_sum(a: &DirichletSeries) -> DirichletSeries {
    dirichlet_convolve(a, &DirichletSeries::ones(a.len()).expect("nonempty")).expect("equal lengths")
}

/// b_n = Σ_{k|n} μ(n/k) a_k, the inverse of [`divisor_sum`].
pub fn mobius_invert(a: &DirichletSeries) -> DirichletSeries {
    let mu = mobius_table(a.len());
    let mu = DirichletSeries::from_fn(a.len(), |k| BigRational::from_integer(BigInt::from(mu[k as usize])))
        .expect("nonempty");
    dirichlet_convolve(&mu, a).expect("equal lengths")
}

/// Σ f(n) n^{−s} over n whose prime factors lie in `primes` with exponents
/// at most `max_exp`, summed directly over those n.
pub fn smooth_direct_sum(
    primes: &[u64],
    max_exp: u32,
    s: u32,
    f: impl Fn(u64, u32) -> BigRational,
) -> BigRational {
    fn rec(
        primes: &[u64],
        max_exp: u32,
        s: u32,
        n: u64,
        value: BigRational,
        f: &impl Fn(u64, u32) -> BigRational,
        acc: &mut BigRational,
    ) {
        let Some((&p, rest)) = primes.split_first() else {
            let ns = BigRational::from_integer(BigInt::from(n).pow(s));
            *acc += value / ns;
            return;
        };
        rec(rest, max_exp, s, n, value.clone(), f, acc);
        let mut pe = n;
        for e in 1..=max_exp {
            pe *= p;
            rec(rest, max_exp, s, pe, value.clone() * f(p, e), f, acc);
        }
    }
    let mut acc = BigRational::zero();
    rec(primes, max_exp, s, 1, BigRational::one(), &f, &mut acc);
    acc
}

/// ∏_{p} Σ_{e≤max_exp} f(p^e) p^{−es}: the same sum in product form.
pub fn euler_product_form(
    primes: &[u64],
    max_exp: u32,
    s: u32,
    f: impl Fn(u64, u32) -> BigRational,
) -> BigRational {
    primes.iter().fold(BigRational::one(), |acc, &p| {
        let mut local = BigRational::one();
        for e in 1..=max_exp {
            let pes = BigRational::from_integer(BigInt::from(p).pow(e * s));
            local += f(p, e) / pes;
        }
        acc * local
    })
}

/// Partial sums and Euler products of ζ(s) with their rigorous enclosures.
#[derive(Clone, Debug, Serialize)]
pub struct ZetaReport {
    pub s: f64,
    pub n_terms: usize,
    pub p_max: usize,
    /// Σ_{n≤N} n^{−s}.
    pub partial_sum: f64,
    /// ζ(s) ∈ [zeta_lower, zeta_upper] from the integral test on the tail.
    pub zeta_lower: f64,
    pub zeta_upper: f64,
    /// ∏_{p≤P} (1 − p^{−s})^{−1}.
    pub euler_product: f64,
    /// Σ_{n≤P} n^{−s}, a lower bound for the Euler product.
    pub euler_lower: f64,
    /// Every P-smooth integer beyond P is > P, so ζ − product ≤ 1/((s−1)P^{s−1}).
    pub euler_tail_bound: f64,
    pub consistent: bool,
}

fn partial_zeta(s: f64, n: usize) -> f64 {
    (1..=n).rev().map(|k| (k as f64).powf(-s)).sum()
}

/// Compares Σ_{n≤N} n^{−s} with ∏_{p≤P}(1 − p^{−s})^{−1} inside their
/// analytic tail bounds.
pub fn zeta_compare(s: f64, n_terms: usize, p_max: usize) -> Result<ZetaReport> {
    if !(s > 1.0) {
        return domain("ζ(s) needs s > 1");
    }
    if n_terms == 0 || p_max < 2 {
        return domain("need N ≥ 1 terms and P ≥ 2");
    }
    let partial_sum = partial_zeta(s, n_terms);
    let zeta_lower = partial_sum + 1.0 / ((s - 1.0) * ((n_terms + 1) as f64).powf(s - 1.0));
    let zeta_upper = partial_sum + 1.0 / ((s - 1.0) * (n_terms as f64).powf(s - 1.0));
    let euler_product = primes_up_to(p_max)
        .into_iter()
        .map(|p| 1.0 / (1.0 - (p as f64).powf(-s)))
        .product::<f64>();
    let euler_lower = partial_zeta(s, p_max);
    let euler_tail_bound = 1.0 / ((s - 1.0) * (p_max as f64).powf(s - 1.0));
    let slack = 1e-12 * zeta_upper;
    let consistent = euler_product + slack >= euler_lower
        && euler_product <= zeta_upper + slack
        && euler_product + euler_tail_bound + slack >= zeta_lower;
    Ok(ZetaReport {
        s,
        n_terms,
        p_max,
        partial_sum,
        zeta_lower,
        zeta_upper,
        euler_product,
        euler_lower,
        euler_tail_bound,
        consistent,
    })
}
