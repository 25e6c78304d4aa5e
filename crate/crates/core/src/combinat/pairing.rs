//! Pair partitions (perfect matchings) of a finite ordered set.

use std::fmt;

use crate::error::Result;

use super::partition::canonical_ground;

/// A pair partition. Each pair is stored as `(p, q)` with `p > q`, and pairs
/// are listed by ascending `q`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PairPartition<L> {
    ground: Vec<L>,
    pairs: Vec<(L, L)>,
}

impl<L: Ord + Clone> PairPartition<L> {
    pub fn ground(&self) -> &[L] {
        &self.ground
    }

    pub fn pairs(&self) -> &[(L, L)] {
        &self.pairs
    }
}

impl<L: fmt::Display> fmt::Display for PairPartition<L> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (p, q) in &self.pairs {
            write!(f, "({p},{q})")?;
        }
        write!(f, "}}")
    }
}

/// Lazy stream of pair partitions. The smallest unpaired element is matched
/// with each larger unpaired element in ascending order; the choices form a
/// mixed-radix counter whose last digit moves fastest.
#[derive(Clone, Debug)]
pub struct PairPartitions<L> {
    ground: Vec<L>,
    choice: Vec<usize>,
    started: bool,
    done: bool,
}

impl<L: Ord + Clone> PairPartitions<L> {
    fn radix(&self, j: usize) -> usize {
        self.ground.len() - 2 * j - 1
    }

    fn advance(&mut self) -> bool {
        if self.done {
            return false;
        }
        if !self.started {
            self.started = true;
            return true;
        }
        for j in (0..self.choice.len()).rev() {
            if self.choice[j] + 1 < self.radix(j) {
                self.choice[j] += 1;
                for c in self.choice.iter_mut().skip(j + 1) {
                    *c = 0;
                }
                return true;
            }
        }
        self.done = true;
        false
    }

    fn decode(&self) -> PairPartition<L> {
        let mut rest: Vec<usize> = (0..self.ground.len()).collect();
        let mut pairs = Vec::with_capacity(self.choice.len());
        for &c in &self.choice {
            let q = rest.remove(0);
            let p = rest.remove(c);
            pairs.push((self.ground[p].clone(), self.ground[q].clone()));
        }
        PairPartition {
            ground: self.ground.clone(),
            pairs,
        }
    }
}

impl<L: Ord + Clone> Iterator for PairPartitions<L> {
    type Item = PairPartition<L>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.advance() {
            Some(self.decode())
        } else {
            None
        }
    }

    fn count(mut self) -> usize {
        let mut n = 0;
        while self.advance() {
            n += 1;
        }
        n
    }
}

/// All pairings of `ground`. Odd sizes give an empty stream; the empty set
/// has exactly one (empty) pairing.
pub fn enumerate_pair_partitions<L: Ord + Clone>(ground: &[L]) -> Result<PairPartitions<L>> {
    let ground = canonical_ground(ground)?;
    let odd = ground.len() % 2 == 1;
    Ok(PairPartitions {
        choice: vec![0; ground.len() / 2],
        ground,
        started: false,
        done: odd,
    })
}

/// Calls `f` with every pairing of the positions `0..n`, each pair `(p, q)`
/// with `p > q`. Used by the contraction sums where allocation per pairing
/// would dominate.
pub fn for_each_pairing(n: usize, f: &mut impl FnMut(&[(usize, usize)])) {
    fn rec(rest: &mut Vec<usize>, acc: &mut Vec<(usize, usize)>, f: &mut impl FnMut(&[(usize, usize)])) {
        if rest.is_empty() {
            f(acc);
            return;
        }
        let q = rest.remove(0);
        for i in 0..rest.len() {
            let p = rest.remove(i);
            acc.push((p, q));
            rec(rest, acc, f);
            acc.pop();
            rest.insert(i, p);
        }
        rest.insert(0, q);
    }
    if n % 2 == 1 {
        return;
    }
    let mut rest: Vec<usize> = (0..n).collect();
    rec(&mut rest, &mut Vec::with_capacity(n / 2), f);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn four_elements() {
        let all: Vec<_> = enumerate_pair_partitions(&[1, 2, 3, 4]).unwrap().collect();
        let pairs: Vec<_> = all.iter().map(|p| p.pairs().to_vec()).collect();
        assert_eq!(
            pairs,
            vec![
                vec![(2, 1), (4, 3)],
                vec![(3, 1), (4, 2)],
                vec![(4, 1), (3, 2)],
            ]
        );
    }

    #[test]
    fn empty_and_odd() {
        assert_eq!(enumerate_pair_partitions::<u8>(&[]).unwrap().count(), 1);
        assert_eq!(enumerate_pair_partitions(&[1, 2, 3]).unwrap().count(), 0);
    }

    #[test]
    fn positional_visitor_agrees() {
        let mut n = 0;
        for_each_pairing(8, &mut |pairs| {
            assert!(pairs.iter().all(|(p, q)| p > q));
            n += 1;
        });
        assert_eq!(n, 105);
    }
}
