//! Permutations of `{1..n}` written as products of disjoint cycles.

use std::fmt;

use crate::error::{domain, Result};

/// A permutation in canonical cycle form: every cycle starts with its least
/// element and cycles are ordered by that element. The cycle `(a b c)` maps
/// a→b→c→a. Fixed points appear as one-element cycles.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CyclePermutation {
    n: usize,
    cycles: Vec<Vec<usize>>,
}

impl CyclePermutation {
    /// Builds the canonical cycle form of the map `i ↦ images[i-1]`.
    pub fn from_images(images: &[usize]) -> Result<Self> {
        let n = images.len();
        let mut seen = vec![false; n + 1];
        for &v in images {
            if v == 0 || v > n || seen[v] {
                return domain("images do not form a permutation of 1..n");
            }
            seen[v] = true;
        }
        let mut visited = vec![false; n + 1];
        let mut cycles = Vec::new();
        for start in 1..=n {
            if visited[start] {
                continue;
            }
            let mut cycle = vec![start];
            visited[start] = true;
            let mut x = images[start - 1];
            while x != start {
                visited[x] = true;
                cycle.push(x);
                x = images[x - 1];
            }
            cycles.push(cycle);
        }
        Ok(CyclePermutation { n, cycles })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn cycles(&self) -> &[Vec<usize>] {
        &self.cycles
    }

    pub fn num_cycles(&self) -> usize {
        self.cycles.len()
    }

    /// Images of `1..=n`, as a vector indexed from zero.
    pub fn images(&self) -> Vec<usize> {
        let mut out = vec![0; self.n];
        for c in &self.cycles {
            for (k, &x) in c.iter().enumerate() {
                out[x - 1] = c[(k + 1) % c.len()];
            }
        }
        out
    }
}

impl fmt::Display for CyclePermutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.cycles {
            write!(f, "(")?;
            for (k, x) in c.iter().enumerate() {
                if k > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{x}")?;
            }
            write!(f, ")")?;
        }
        Ok(())
    }
}

const CLOSE: usize = 0;

/// Lazy depth-first stream of permutations in canonical cycle form.
///
/// The flattened cycle word is built one position at a time; at each position
/// the choices are "close the current cycle" (the next cycle then opens with
/// the least unused element) followed by "extend with e" for unused e in
/// ascending order. This is the lexicographic order of the cycle lists.
#[derive(Clone, Debug)]
pub struct CyclePermutations {
    n: usize,
    target: Option<usize>,
    keys: Vec<usize>,
    word: Vec<usize>,
    started: bool,
    done: bool,
}

impl CyclePermutations {
    fn feasible(&self, cycles: usize, remaining: usize) -> bool {
        match self.target {
            None => true,
            Some(m) => cycles <= m && m <= cycles + remaining,
        }
    }

    fn least_unused(used: u64, n: usize, above: usize) -> Option<usize> {
        (above + 1..=n).find(|&e| used & (1 << e) == 0)
    }

    /// Fills positions `from..n` with the lexicographically least feasible
    /// completion given `cycles` cycles opened so far.
    fn complete(&mut self, from: usize, mut cycles: usize, mut used: u64) {
        for i in from..self.n {
            let close = match self.target {
                None => true,
                Some(m) => cycles < m,
            };
            let e = Self::least_unused(used, self.n, 0).expect("an unused element remains");
            self.keys[i] = if close { CLOSE } else { e };
            if close {
                cycles += 1;
            }
            self.word[i] = e;
            used |= 1 << e;
        }
    }

    fn advance(&mut self) -> bool {
        if self.done {
            return false;
        }
        if !self.started {
            self.started = true;
            return true;
        }
        let n = self.n;
        let mut used_before = [0u64; 64];
        let mut cycles_before = [0usize; 64];
        let mut used = 0u64;
        let mut cycles = 0usize;
        for i in 0..n {
            used_before[i] = used;
            cycles_before[i] = cycles;
            used |= 1 << self.word[i];
            if i == 0 || self.keys[i] == CLOSE {
                cycles += 1;
            }
        }
        for i in (1..n).rev() {
            let used = used_before[i];
            let remaining = n - i - 1;
            let mut key = self.keys[i];
            loop {
                let next = if key == CLOSE {
                    Self::least_unused(used, n, 0)
                } else {
                    Self::least_unused(used, n, key)
                };
                let Some(e) = next else { break };
                key = e;
                if self.feasible(cycles_before[i], remaining) {
                    self.keys[i] = e;
                    self.word[i] = e;
                    self.complete(i + 1, cycles_before[i], used | (1 << e));
                    return true;
                }
            }
        }
        self.done = true;
        false
    }

    fn decode(&self) -> CyclePermutation {
        let mut cycles: Vec<Vec<usize>> = Vec::new();
        for i in 0..self.n {
            if i == 0 || self.keys[i] == CLOSE {
                cycles.push(vec![self.word[i]]);
            } else {
                cycles.last_mut().expect("first position opens a cycle").push(self.word[i]);
            }
        }
        CyclePermutation { n: self.n, cycles }
    }
}

impl Iterator for CyclePermutations {
    type Item = CyclePermutation;

    fn next(&mut self) -> Option<Self::Item> {
        if self.advance() {
            Some(self.decode())
        } else {
            None
        }
    }

    fn count(mut self) -> usize {
        let mut k = 0;
        while self.advance() {
            k += 1;
        }
        k
    }
}

/// Permutations of `{1..n}`, optionally restricted to exactly `m` cycles.
pub fn enumerate_cycle_permutations(n: usize, m: Option<usize>) -> Result<CyclePermutations> {
    if n == 0 {
        return domain("n must be at least 1");
    }
    if n > 63 {
        return domain("cycle enumeration supports n ≤ 63");
    }
    let done = matches!(m, Some(m) if m == 0 || m > n);
    let mut it = CyclePermutations {
        n,
        target: m,
        keys: vec![CLOSE; n],
        word: vec![0; n],
        started: false,
        done,
    };
    if !done {
        it.word[0] = 1;
        it.complete(1, 1, 1 << 1);
    }
    Ok(it)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_cycles_of_three() {
        let all: Vec<_> = enumerate_cycle_permutations(3, Some(1)).unwrap().collect();
        let shown: Vec<_> = all.iter().map(|p| p.to_string()).collect();
        assert_eq!(shown, vec!["(1 2 3)", "(1 3 2)"]);
    }

    #[test]
    fn all_of_three_in_order() {
        let all: Vec<_> = enumerate_cycle_permutations(3, None).unwrap().collect();
        let shown: Vec<_> = all.iter().map(|p| p.to_string()).collect();
        assert_eq!(shown, vec!["(1)(2)(3)", "(1)(2 3)", "(1 2)(3)", "(1 2 3)", "(1 3)(2)", "(1 3 2)"]);
    }

    #[test]
    fn identity_only_for_one() {
        let all: Vec<_> = enumerate_cycle_permutations(1, None).unwrap().collect();
        assert_eq!(all.len(), 1);
        assert_eq!(all[0].images(), vec![1]);
    }

    #[test]
    fn images_round_trip() {
        for p in enumerate_cycle_permutations(5, None).unwrap() {
            assert_eq!(CyclePermutation::from_images(&p.images()).unwrap(), p);
        }
    }

    #[test]
    fn impossible_cycle_counts() {
        assert_eq!(enumerate_cycle_permutations(3, Some(4)).unwrap().count(), 0);
        assert_eq!(enumerate_cycle_permutations(3, Some(0)).unwrap().count(), 0);
        assert!(enumerate_cycle_permutations(0, None).is_err());
    }
}
