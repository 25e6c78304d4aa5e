//! Counting sequences: Stirling numbers of both kinds, Bell numbers, pairing
//! counts and hierarchy counts, all in arbitrary precision.

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};

use crate::error::{domain, Result};

fn require_positive(n: usize) -> Result<()> {
    if n == 0 {
        return domain("n must be at least 1");
    }
    Ok(())
}

pub fn factorial(n: usize) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, k| acc * BigUint::from(k))
}

pub fn binomial(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= BigUint::from(n - i);
        acc /= BigUint::from(i + 1);
    }
    acc
}

/// Rows `0..=n_max` of the unsigned Stirling triangle of the first kind, so
/// that `rows[n][m]` is s(n,m). Built from s(n+1,m) = s(n,m−1) + n·s(n,m).
pub fn stirling_first_table(n_max: usize) -> Vec<Vec<BigUint>> {
    let mut rows = vec![vec![BigUint::one()]];
    for n in 0..n_max {
        let prev = &rows[n];
        let mut next = vec![BigUint::zero(); n + 2];
        for m in 1..=n + 1 {
            let mut v = prev[m - 1].clone();
            if m <= n {
                v += &prev[m] * BigUint::from(n);
            }
            next[m] = v;
        }
        rows.push(next);
    }
    rows
}

/// Rows `0..=n_max` of the Stirling triangle of the second kind, from
/// S(n+1,m) = S(n,m−1) + m·S(n,m).
pub fn stirling_second_table(n_max: usize) -> Vec<Vec<BigUint>> {
    let mut rows = vec![vec![BigUint::one()]];
    for n in 0..n_max {
        let prev = &rows[n];
        let mut next = vec![BigUint::zero(); n + 2];
        for m in 1..=n + 1 {
            let mut v = prev[m - 1].clone();
            if m <= n {
                v += &prev[m] * BigUint::from(m);
            }
            next[m] = v;
        }
        rows.push(next);
    }
    rows
}

/// Unsigned Stirling number of the first kind s(n,m): permutations of n
/// elements with exactly m cycles. Zero for m outside `1..=n`.
pub fn stirling_first(n: usize, m: usize) -> Result<BigUint> {
    require_positive(n)?;
    if m == 0 || m > n {
        return Ok(BigUint::zero());
    }
    Ok(stirling_first_table(n).swap_remove(n).swap_remove(m))
}

/// Stirling number of the second kind S(n,m): partitions of an n-set into
/// exactly m blocks. Zero for m outside `1..=n`.
pub fn stirling_second(n: usize, m: usize) -> Result<BigUint> {
    require_positive(n)?;
    if m == 0 || m > n {
        return Ok(BigUint::zero());
    }
    Ok(stirling_second_table(n).swap_remove(n).swap_remove(m))
}

/// S(n,m) from the alternating binomial sum (1/m!) Σ_k C(m,k)(−1)^{m−k} k^n.
pub fn stirling_second_explicit(n: usize, m: usize) -> BigUint {
    let mut acc = BigInt::zero();
    for k in 0..=m {
        let term = BigInt::from(binomial(m, k)) * BigInt::from(k).pow(n as u32);
        if (m - k) % 2 == 0 {
            acc += term;
        } else {
            acc -= term;
        }
    }
    let q = acc / BigInt::from(factorial(m));
    q.to_biguint().expect("Stirling numbers are nonnegative")
}

/// Bell number B_n = Σ_m S(n,m).
pub fn bell(n: usize) -> Result<BigUint> {
    require_positive(n)?;
    Ok(stirling_second_table(n)[n].iter().sum())
}

/// `B_1..=B_{n_max}`.
pub fn bell_numbers(n_max: usize) -> Vec<BigUint> {
    let table = stirling_second_table(n_max);
    table.iter().skip(1).map(|row| row.iter().sum()).collect()
}

/// Number of pair partitions of an n-set: (2k)!/(2^k k!) for n = 2k, zero
/// for odd n, one for the empty set.
pub fn pairing_count(n: usize) -> BigUint {
    if n % 2 == 1 {
        return BigUint::zero();
    }
    (1..n).step_by(2).fold(BigUint::one(), |acc, j| acc * BigUint::from(j))
}

/// `h_0..=h_{n_max}` with h_0 = 0.
///
/// With G(x) = exp h(x), differentiating gives G_n = Σ_{j=1}^{n} C(n−1,j−1) h_j G_{n−j},
/// and the relation exp h = 2h − x + 1 pins G_0 = 1, G_1 = 1, G_n = 2h_n for n ≥ 2.
pub fn hierarchy_counts(n_max: usize) -> Vec<BigUint> {
    let mut h = vec![BigUint::zero(); n_max + 1];
    let mut g = vec![BigUint::zero(); n_max + 1];
    g[0] = BigUint::one();
    if n_max >= 1 {
        h[1] = BigUint::one();
        g[1] = BigUint::one();
    }
    for n in 2..=n_max {
        let mut acc = BigUint::zero();
        for j in 1..n {
            acc += binomial(n - 1, j - 1) * &h[j] * &g[n - j];
        }
        g[n] = &acc * 2u32;
        h[n] = acc;
    }
    h
}

/// Number of hierarchies h_n on an n-set.
pub fn hierarchy_count(n: usize) -> Result<BigUint> {
    require_positive(n)?;
    Ok(hierarchy_counts(n).swap_remove(n))
}
