use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

/// Field of coefficients for tables and tensors: `f64` for oracle work,
/// `BigRational` for exact identities.
pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
{
    fn from_i64(v: i64) -> Self;
    fn to_f64(&self) -> f64;
}

impl Scalar for f64 {
    fn from_i64(v: i64) -> Self {
        v as f64
    }

    fn to_f64(&self) -> f64 {
        *self
    }
}

impl Scalar for BigRational {
    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
}

/// Inverse of a square matrix by Gauss–Jordan elimination with partial
/// pivoting on magnitude. `None` when singular.
pub fn invert<S: Scalar>(m: &[Vec<S>]) -> Option<Vec<Vec<S>>> {
    let n = m.len();
    let mut a: Vec<Vec<S>> = m.to_vec();
    let mut inv: Vec<Vec<S>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { S::one() } else { S::zero() }).collect())
        .collect();
    for col in 0..n {
        let pivot = (col..n)
            .filter(|&r| !a[r][col].is_zero())
            .max_by(|&r, &s| a[r][col].to_f64().abs().total_cmp(&a[s][col].to_f64().abs()))?;
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let p = a[col][col].clone();
        for j in 0..n {
            a[col][j] = a[col][j].clone() / p.clone();
            inv[col][j] = inv[col][j].clone() / p.clone();
        }
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let factor = a[r][col].clone();
            for j in 0..n {
                a[r][j] = a[r][j].clone() - factor.clone() * a[col][j].clone();
                inv[r][j] = inv[r][j].clone() - factor.clone() * inv[col][j].clone();
            }
        }
    }
    Some(inv)
}
