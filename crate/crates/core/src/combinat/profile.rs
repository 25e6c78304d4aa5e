//! Occupation profiles of partitions, the multiplicity ρ and Bell polynomials.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{domain, Result};

use super::numbers::factorial;
use super::partition::SetPartition;

/// Block-size census of a partition: `count(j)` is the number of blocks of
/// size j. Trailing zeros are dropped so equal profiles compare equal.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OccupationProfile {
    counts: Vec<usize>,
}

impl OccupationProfile {
    /// `counts[j-1]` is the number of blocks of size j. A profile must describe
    /// at least one block.
    pub fn new(mut counts: Vec<usize>) -> Result<Self> {
        while counts.last() == Some(&0) {
            counts.pop();
        }
        if counts.is_empty() {
            return domain("an occupation profile needs at least one block");
        }
        Ok(OccupationProfile { counts })
    }

    /// n_j, zero beyond the largest block size.
    pub fn count(&self, j: usize) -> usize {
        if j == 0 {
            return 0;
        }
        self.counts.get(j - 1).copied().unwrap_or(0)
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    /// N = Σ n_j, the number of blocks.
    pub fn blocks(&self) -> usize {
        self.counts.iter().sum()
    }

    /// E = Σ j·n_j, the size of the ground set.
    pub fn size(&self) -> usize {
        self.counts.iter().enumerate().map(|(i, &c)| (i + 1) * c).sum()
    }

    /// Iterates `(j, n_j)` over block sizes that occur.
    pub fn occupied(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(i, &c)| (i + 1, c))
    }
}

/// Occupation profile of a partition.
pub fn occupation_stats<L: Ord + Clone>(p: &SetPartition<L>) -> OccupationProfile {
    let mut counts = vec![0usize; p.len()];
    for b in p.blocks() {
        counts[b.len() - 1] += 1;
    }
    OccupationProfile::new(counts).expect("a partition of a nonempty set has a block")
}

/// ρ(n) = E! / (∏_j (j!)^{n_j} ∏_j n_j!): the number of partitions of an
/// E-set sharing the profile.
pub fn rho_multiplicity(profile: &OccupationProfile) -> BigUint {
    let mut denom = BigUint::one();
    for (j, c) in profile.occupied() {
        denom *= factorial(j).pow(c as u32) * factorial(c);
    }
    factorial(profile.size()) / denom
}

/// All occupation profiles with E = n, optionally with N = m, ordered by
/// their count vectors.
pub fn profiles(n: usize, m: Option<usize>) -> Vec<OccupationProfile> {
    fn rec(rest: usize, max_part: usize, counts: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if rest == 0 {
            out.push(counts.clone());
            return;
        }
        for j in (1..=max_part.min(rest)).rev() {
            counts[j - 1] += 1;
            rec(rest - j, j, counts, out);
            counts[j - 1] -= 1;
        }
    }
    if n == 0 {
        return Vec::new();
    }
    let mut raw = Vec::new();
    rec(n, n, &mut vec![0; n], &mut raw);
    let mut out: Vec<OccupationProfile> = raw
        .into_iter()
        .map(|c| OccupationProfile::new(c).expect("n ≥ 1"))
        .filter(|p| m.is_none_or(|m| p.blocks() == m))
        .collect();
    out.sort();
    out
}

/// Partial Bell polynomial B_{n,m}(z_1, z_2, …) = Σ_{E=n, N=m} ρ ∏ z_j^{n_j}.
/// `z[j-1]` holds z_j and must cover indices up to n − m + 1.
pub fn bell_polynomial(n: usize, m: usize, z: &[BigRational]) -> Result<BigRational> {
    if n == 0 || m == 0 {
        return domain("Bell polynomials need n ≥ 1 and m ≥ 1");
    }
    if m > n {
        return Ok(BigRational::zero());
    }
    if z.len() < n - m + 1 {
        return domain(format!("need z_1..z_{} but got {} values", n - m + 1, z.len()));
    }
    let mut acc = BigRational::zero();
    for p in profiles(n, Some(m)) {
        let mut term = BigRational::from_integer(BigInt::from(rho_multiplicity(&p)));
        for (j, c) in p.occupied() {
            term *= num_traits::pow(z[j - 1].clone(), c);
        }
        acc += term;
    }
    Ok(acc)
}
