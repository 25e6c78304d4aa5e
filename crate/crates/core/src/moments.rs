//! Exact conversions among ordinary, falling-factorial and cumulant moments of
//! a scalar random variable, and the Gaussian, Poisson and Gamma presets.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::combinat::{
    block_mobius, enumerate_partitions, profiles, rho_multiplicity, stirling_first_table, stirling_second_table,
};
use crate::error::{domain, Result};

/// Which moments a [`MomentSequence`] holds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MomentKind {
    /// 𝔼[Xⁿ].
    Ordinary,
    /// 𝔼[X^{↓n}] with x^{↓n} = x(x−1)⋯(x−n+1).
    Factorial,
    /// κ_n.
    Cumulant,
}

/// Moments of orders `0..=order()`. Ordinary and factorial sequences carry
/// the value 1 at order 0; cumulant sequences carry 0 there.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MomentSequence {
    kind: MomentKind,
    values: Vec<BigRational>,
}

impl MomentSequence {
    /// Builds a sequence from the values of orders `1..=n`.
    pub fn new(kind: MomentKind, from_order_one: Vec<BigRational>) -> Self {
        let zeroth = match kind {
            MomentKind::Cumulant => BigRational::zero(),
            _ => BigRational::one(),
        };
        let mut values = Vec::with_capacity(from_order_one.len() + 1);
        values.push(zeroth);
        values.extend(from_order_one);
        MomentSequence { kind, values }
    }

    pub fn ordinary(from_order_one: Vec<BigRational>) -> Self {
        Self::new(MomentKind::Ordinary, from_order_one)
    }

    pub fn factorial(from_order_one: Vec<BigRational>) -> Self {
        Self::new(MomentKind::Factorial, from_order_one)
    }

    pub fn cumulant(from_order_one: Vec<BigRational>) -> Self {
        Self::new(MomentKind::Cumulant, from_order_one)
    }

    /// Convenience constructor from integers.
    pub fn from_integers(kind: MomentKind, from_order_one: &[i64]) -> Self {
        Self::new(
            kind,
            from_order_one.iter().map(|&v| BigRational::from_integer(v.into())).collect(),
        )
    }

    pub fn kind(&self) -> MomentKind {
        self.kind
    }

    /// Highest order stored.
    pub fn order(&self) -> usize {
        self.values.len() - 1
    }

    /// Value at order n (n = 0 allowed).
    pub fn get(&self, n: usize) -> &BigRational {
        &self.values[n]
    }

    /// Values of orders `1..=order()`.
    pub fn tail(&self) -> &[BigRational] {
        &self.values[1..]
    }

    fn expect(&self, kind: MomentKind) -> Result<()> {
        if self.kind != kind {
            return domain(format!("expected {kind:?} moments, got {:?}", self.kind));
        }
        if kind != MomentKind::Cumulant && !self.values[0].is_one() {
            return domain("the order-0 moment must be 1");
        }
        Ok(())
    }
}

/// Strategy for the partition sums behind the cumulant conversions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PartitionSum {
    /// Visit every set partition; limited to order 8.
    Partitions,
    /// Group partitions by occupation profile and weight by ρ.
    Profiles,
}

const RAW_PARTITION_LIMIT: usize = 8;

fn int(v: impl Into<BigInt>) -> BigRational {
    BigRational::from_integer(v.into())
}

/// m_n = Σ over partitions of an n-set of ∏_blocks κ_{|block|}.
pub fn cumulants_to_moments(c: &MomentSequence) -> Result<MomentSequence> {
    cumulants_to_moments_with(c, PartitionSum::Profiles)
}

pub fn cumulants_to_moments_with(c: &MomentSequence, how: PartitionSum) -> Result<MomentSequence> {
    c.expect(MomentKind::Cumulant)?;
    let values = (1..=c.order())
        .map(|n| partition_sum(n, how, &c.values, |_| BigRational::one()))
        .collect::<Result<Vec<_>>>()?;
    Ok(MomentSequence::ordinary(values))
}

/// κ_n = Σ over partitions of (−1)^{N−1}(N−1)! ∏_blocks m_{|block|}.
pub fn moments_to_cumulants(m: &MomentSequence) -> Result<MomentSequence> {
    moments_to_cumulants_with(m, PartitionSum::Profiles)
}

pub fn moments_to_cumulants_with(m: &MomentSequence, how: PartitionSum) -> Result<MomentSequence> {
    m.expect(MomentKind::Ordinary)?;
    let values = (1..=m.order())
        .map(|n| partition_sum(n, how, &m.values, |blocks| int(block_mobius(blocks))))
        .collect::<Result<Vec<_>>>()?;
    Ok(MomentSequence::cumulant(values))
}

/// Σ over partitions 𝒜 of an n-set of weight(N(𝒜)) ∏_{A∈𝒜} x_{|A|}.
fn partition_sum(
    n: usize,
    how: PartitionSum,
    x: &[BigRational],
    weight: impl Fn(usize) -> BigRational,
) -> Result<BigRational> {
    let mut acc = BigRational::zero();
    match how {
        PartitionSum::Partitions => {
            if n > RAW_PARTITION_LIMIT {
                return domain(format!("raw partition sums are limited to order {RAW_PARTITION_LIMIT}"));
            }
            let ground: Vec<usize> = (0..n).collect();
            for p in enumerate_partitions(&ground, None)? {
                let mut term = weight(p.num_blocks());
                for b in p.blocks() {
                    term *= &x[b.len()];
                }
                acc += term;
            }
        }
        PartitionSum::Profiles => {
            for p in profiles(n, None) {
                let mut term = weight(p.blocks()) * int(rho_multiplicity(&p));
                for (j, c) in p.occupied() {
                    term *= num_traits::pow(x[j].clone(), c);
                }
                acc += term;
            }
        }
    }
    Ok(acc)
}

/// 𝔼[X^{↓n}] = Σ_m (−1)^{n+m} s(n,m) 𝔼[X^m].
pub fn moments_to_factorial(m: &MomentSequence) -> Result<MomentSequence> {
    m.expect(MomentKind::Ordinary)?;
    let s = stirling_first_table(m.order());
    let values = (1..=m.order())
        .map(|n| {
            (1..=n).fold(BigRational::zero(), |acc, k| {
                let term = int(s[n][k].clone()) * &m.values[k];
                if (n + k) % 2 == 0 {
                    acc + term
                } else {
                    acc - term
                }
            })
        })
        .collect();
    Ok(MomentSequence::factorial(values))
}

/// 𝔼[Xⁿ] = Σ_m S(n,m) 𝔼[X^{↓m}].
pub fn factorial_to_moments(f: &MomentSequence) -> Result<MomentSequence> {
    f.expect(MomentKind::Factorial)?;
    let s = stirling_second_table(f.order());
    let values = (1..=f.order())
        .map(|n| {
            (1..=n).fold(BigRational::zero(), |acc, k| acc + int(s[n][k].clone()) * &f.values[k])
        })
        .collect();
    Ok(MomentSequence::ordinary(values))
}

/// The three worked distributions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Preset {
    /// Standard Gaussian, M(t) = e^{t²/2}.
    Gaussian,
    /// Poisson with intensity λ.
    Poisson(BigRational),
    /// Gamma with shape λ and unit scale.
    Gamma(BigRational),
}

/// Ordinary moments of a preset up to order `n_max`.
pub fn preset_moments(dist: &Preset, n_max: usize) -> Result<MomentSequence> {
    if n_max == 0 {
        return domain("n_max must be at least 1");
    }
    let values = match dist {
        Preset::Gaussian => (1..=n_max)
            .map(|n| {
                if n % 2 == 1 {
                    BigRational::zero()
                } else {
                    // (2k)!/(2^k k!) = (2k−1)(2k−3)⋯1
                    int((1..n).step_by(2).fold(BigInt::one(), |acc, j| acc * j))
                }
            })
            .collect(),
        Preset::Poisson(lambda) => {
            positive(lambda)?;
            let s = stirling_second_table(n_max);
            (1..=n_max).map(|n| polynomial(&s[n], lambda)).collect()
        }
        Preset::Gamma(lambda) => {
            positive(lambda)?;
            let s = stirling_first_table(n_max);
            (1..=n_max).map(|n| polynomial(&s[n], lambda)).collect()
        }
    };
    Ok(MomentSequence::ordinary(values))
}

fn positive(lambda: &BigRational) -> Result<()> {
    if !lambda.is_positive() {
        return domain("λ must be positive");
    }
    Ok(())
}

/// Σ_m coeffs[m] λ^m.
fn polynomial(coeffs: &[num_bigint::BigUint], lambda: &BigRational) -> BigRational {
    coeffs
        .iter()
        .rev()
        .fold(BigRational::zero(), |acc, c| acc * lambda + int(c.clone()))
}

/// x^{↓n} = x(x−1)⋯(x−n+1).
pub fn falling_power(x: &BigRational, n: usize) -> BigRational {
    (0..n).fold(BigRational::one(), |acc, k| acc * (x - int(k as i64)))
}

/// x^{↑n} = x(x+1)⋯(x+n−1).
pub fn rising_power(x: &BigRational, n: usize) -> BigRational {
    (0..n).fold(BigRational::one(), |acc, k| acc * (x + int(k as i64)))
}
