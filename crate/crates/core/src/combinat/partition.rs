//! Set partitions in canonical form, a restricted-growth-string cursor and the
//! partition-lattice Möbius factor.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_traits::One;

use crate::error::{domain, Error, Result};

/// Default largest ground set accepted by [`enumerate_partitions`].
pub const PARTITION_GUARD: usize = 14;

/// Advances a restricted growth string to its lexicographic successor among
/// strings whose block count lies in `min_blocks..=max_blocks`.
///
/// Returns `false` (leaving `a` untouched) when `a` is the last such string.
pub(crate) fn rgs_successor(a: &mut [u8], min_blocks: usize, max_blocks: usize) -> bool {
    let n = a.len();
    if n < 2 {
        return false;
    }
    // Maximum of a[..i] for each i, kept on the stack for the common short case.
    let mut small = [0u8; 32];
    let mut large = Vec::new();
    let prefix_max: &mut [u8] = if n <= small.len() {
        &mut small[..n]
    } else {
        large.resize(n, 0);
        &mut large
    };
    let mut m = a[0];
    for i in 1..n {
        prefix_max[i] = m;
        m = m.max(a[i]);
    }
    for i in (1..n).rev() {
        let before = prefix_max[i] as usize;
        let cap = (before + 1).min(max_blocks.saturating_sub(1));
        let rem = n - i - 1;
        let mut v = a[i] as usize + 1;
        while v <= cap {
            let top = before.max(v);
            if top + 1 + rem >= min_blocks {
                a[i] = v as u8;
                let need = min_blocks.saturating_sub(top + 1);
                let zeros = rem - need;
                for slot in a.iter_mut().skip(i + 1).take(zeros) {
                    *slot = 0;
                }
                for (k, slot) in a.iter_mut().skip(i + 1 + zeros).enumerate() {
                    *slot = (top + 1 + k) as u8;
                }
                return true;
            }
            v += 1;
        }
    }
    false
}

/// First restricted growth string of length `n` with at least `min_blocks`
/// blocks: zeros followed by `1, 2, …`.
pub(crate) fn rgs_first(n: usize, min_blocks: usize) -> Vec<u8> {
    let k = min_blocks.max(1).min(n.max(1));
    let mut a = vec![0u8; n];
    for (j, slot) in a.iter_mut().skip(n + 1 - k).enumerate() {
        *slot = (j + 1) as u8;
    }
    a
}

/// Lexicographic cursor over restricted growth strings of a fixed length with
/// a bounded number of blocks.
///
/// ```
/// use combfield::combinat::RestrictedGrowth;
/// let mut c = RestrictedGrowth::new(4, 2, 2);
/// let mut n = 0;
/// while c.advance() {
///     n += 1;
/// }
/// assert_eq!(n, 7);
/// ```
#[derive(Clone, Debug)]
pub struct RestrictedGrowth {
    a: Vec<u8>,
    min_blocks: usize,
    max_blocks: usize,
    started: bool,
    empty: bool,
}

impl RestrictedGrowth {
    /// Strings of length `n` with between `min_blocks` and `max_blocks` blocks.
    /// For `n = 0` the single empty string is produced when `min_blocks = 0`.
    pub fn new(n: usize, min_blocks: usize, max_blocks: usize) -> Self {
        assert!(n <= u8::MAX as usize, "restricted growth strings are limited to 255 letters");
        let empty = if n == 0 {
            min_blocks > 0
        } else {
            min_blocks.max(1) > max_blocks.min(n)
        };
        RestrictedGrowth {
            a: rgs_first(n, min_blocks),
            min_blocks,
            max_blocks: max_blocks.min(n),
            started: false,
            empty,
        }
    }

    /// Moves to the next string; the first call positions on the first one.
    pub fn advance(&mut self) -> bool {
        if self.empty {
            return false;
        }
        if !self.started {
            self.started = true;
            return true;
        }
        if rgs_successor(&mut self.a, self.min_blocks, self.max_blocks) {
            true
        } else {
            self.empty = true;
            false
        }
    }

    pub fn current(&self) -> &[u8] {
        &self.a
    }

    pub fn num_blocks(&self) -> usize {
        self.a.iter().max().map_or(0, |&m| m as usize + 1)
    }
}

/// A partition of a finite ordered ground set into nonempty blocks.
///
/// Canonical form: labels ascend inside each block and blocks are ordered by
/// their least element. Ordering between partitions of the same ground is the
/// lexicographic order of their restricted growth strings.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SetPartition<L> {
    ground: Vec<L>,
    blocks: Vec<Vec<L>>,
}

impl<L: Ord + Clone> SetPartition<L> {
    /// Builds a partition from arbitrary blocks and puts it in canonical form.
    pub fn from_blocks(blocks: Vec<Vec<L>>) -> Result<Self> {
        let mut blocks = blocks;
        if blocks.iter().any(|b| b.is_empty()) {
            return domain("partition blocks must be nonempty");
        }
        for b in blocks.iter_mut() {
            b.sort();
        }
        blocks.sort_by(|x, y| x[0].cmp(&y[0]));
        let mut ground: Vec<L> = blocks.iter().flatten().cloned().collect();
        ground.sort();
        if ground.windows(2).any(|w| w[0] == w[1]) {
            return domain("partition blocks must be pairwise disjoint");
        }
        Ok(SetPartition { ground, blocks })
    }

    /// Decodes a restricted growth string over a sorted, duplicate-free ground.
    pub fn from_rgs(ground: &[L], rgs: &[u8]) -> Result<Self> {
        if ground.len() != rgs.len() {
            return domain("ground and restricted growth string differ in length");
        }
        if ground.windows(2).any(|w| w[0] >= w[1]) {
            return domain("ground labels must be strictly ascending");
        }
        let mut top: i32 = -1;
        for &r in rgs {
            if r as i32 > top + 1 {
                return domain("not a restricted growth string");
            }
            top = top.max(r as i32);
        }
        Ok(Self::from_rgs_unchecked(ground, rgs))
    }

    pub(crate) fn from_rgs_unchecked(ground: &[L], rgs: &[u8]) -> Self {
        let k = rgs.iter().max().map_or(0, |&m| m as usize + 1);
        let mut blocks = vec![Vec::new(); k];
        for (l, &r) in ground.iter().zip(rgs) {
            blocks[r as usize].push(l.clone());
        }
        SetPartition {
            ground: ground.to_vec(),
            blocks,
        }
    }

    /// All singletons of `ground`.
    pub fn singletons(ground: &[L]) -> Result<Self> {
        Self::from_blocks(ground.iter().map(|l| vec![l.clone()]).collect())
    }

    /// The one-block partition of `ground`.
    pub fn single_block(ground: &[L]) -> Result<Self> {
        if ground.is_empty() {
            return domain("ground must be nonempty");
        }
        Self::from_blocks(vec![ground.to_vec()])
    }

    pub fn ground(&self) -> &[L] {
        &self.ground
    }

    pub fn blocks(&self) -> &[Vec<L>] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.ground.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ground.is_empty()
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    /// Index of the block containing `label`.
    pub fn block_of(&self, label: &L) -> Option<usize> {
        self.blocks.iter().position(|b| b.binary_search(label).is_ok())
    }

    /// Restricted growth string of the partition.
    pub fn rgs(&self) -> Vec<u8> {
        self.ground
            .iter()
            .map(|l| self.block_of(l).expect("label in ground") as u8)
            .collect()
    }

    /// True when every block of `self` lies inside a block of `coarse`.
    pub fn refines(&self, coarse: &SetPartition<L>) -> bool {
        self.ground == coarse.ground
            && self.blocks.iter().all(|b| {
                let owner = coarse.block_of(&b[0]);
                owner.is_some() && b.iter().all(|l| coarse.block_of(l) == owner)
            })
    }
}

impl<L: Ord + Clone> PartialOrd for SetPartition<L> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<L: Ord + Clone> Ord for SetPartition<L> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.ground
            .cmp(&other.ground)
            .then_with(|| self.rgs().cmp(&other.rgs()))
    }
}

impl<L: fmt::Display> fmt::Display for SetPartition<L> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, b) in self.blocks.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{{")?;
            for (j, l) in b.iter().enumerate() {
                if j > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{l}")?;
            }
            write!(f, "}}")?;
        }
        write!(f, "}}")
    }
}

/// Lazy stream of the partitions of a ground set, in restricted growth order.
#[derive(Clone, Debug)]
pub struct Partitions<L> {
    ground: Vec<L>,
    cursor: RestrictedGrowth,
}

impl<L: Ord + Clone> Iterator for Partitions<L> {
    type Item = SetPartition<L>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.cursor.advance() {
            Some(SetPartition::from_rgs_unchecked(&self.ground, self.cursor.current()))
        } else {
            None
        }
    }

    fn count(mut self) -> usize {
        let mut n = 0;
        while self.cursor.advance() {
            n += 1;
        }
        n
    }
}

pub(crate) fn canonical_ground<L: Ord + Clone>(ground: &[L]) -> Result<Vec<L>> {
    let mut g = ground.to_vec();
    g.sort();
    if g.windows(2).any(|w| w[0] == w[1]) {
        return domain("ground labels must be distinct");
    }
    Ok(g)
}

/// Partitions of `ground`, optionally with exactly `m` blocks, under the
/// default size guard.
pub fn enumerate_partitions<L: Ord + Clone>(ground: &[L], m: Option<usize>) -> Result<Partitions<L>> {
    enumerate_partitions_with_limit(ground, m, PARTITION_GUARD)
}

/// As [`enumerate_partitions`] with an explicit guard on the ground size.
pub fn enumerate_partitions_with_limit<L: Ord + Clone>(
    ground: &[L],
    m: Option<usize>,
    limit: usize,
) -> Result<Partitions<L>> {
    if ground.is_empty() {
        return domain("cannot partition the empty set");
    }
    if ground.len() > limit.min(u8::MAX as usize) {
        return Err(Error::Capacity {
            what: "partition ground size",
            got: ground.len(),
            limit,
        });
    }
    let ground = canonical_ground(ground)?;
    let n = ground.len();
    let (lo, hi) = match m {
        None => (1, n),
        Some(m) if (1..=n).contains(&m) => (m, m),
        Some(m) => return domain(format!("block count {m} outside 1..={n}")),
    };
    Ok(Partitions {
        ground,
        cursor: RestrictedGrowth::new(n, lo, hi),
    })
}

/// Partition-lattice Möbius factor μ(coarse | fine) = ∏ over coarse blocks of
/// (−1)^{k−1}(k−1)!, with k the number of fine blocks inside the coarse block.
pub fn mobius_factor<L: Ord + Clone>(coarse: &SetPartition<L>, fine: &SetPartition<L>) -> Result<BigInt> {
    if coarse.ground != fine.ground {
        return domain("partitions live on different ground sets");
    }
    if !fine.refines(coarse) {
        return domain("the fine partition does not refine the coarse one");
    }
    let mut counts = vec![0usize; coarse.num_blocks()];
    for b in fine.blocks() {
        counts[coarse.block_of(&b[0]).expect("refinement checked")] += 1;
    }
    Ok(counts
        .iter()
        .fold(BigInt::one(), |acc, &k| acc * block_mobius(k)))
}

/// (−1)^{k−1}(k−1)! for a block holding k finer blocks.
pub fn block_mobius(k: usize) -> BigInt {
    let f = BigInt::from(super::numbers::factorial(k.saturating_sub(1)));
    if k % 2 == 0 {
        -f
    } else {
        f
    }
}

/// Same as [`block_mobius`] in floating point.
pub fn block_mobius_f64(k: usize) -> f64 {
    let f: f64 = (1..k).map(|j| j as f64).product();
    if k % 2 == 0 {
        -f
    } else {
        f
    }
}
