//! Enumeration of set partitions with a fixed number of blocks, as
//! restricted growth strings, plus Stirling numbers of the second kind.

use alloc::vec::Vec;

use num_bigint::BigUint;
use num_traits::{One, Zero};

/// Raised on out-of-range block counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("cannot partition {n} labels into {k} non-empty blocks")]
pub struct PartitionError {
    pub n: usize,
    pub k: usize,
}

/// Stirling number of the second kind `S(n, k)` via the recurrence
/// `S(n,k) = k·S(n−1,k) + S(n−1,k−1)`.
pub fn stirling2(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    if n == 0 {
        return BigUint::one(); // S(0,0)
    }
    if k == 0 {
        return BigUint::zero();
    }
    let mut prev = alloc::vec![BigUint::zero(); k + 1];
    prev[0] = BigUint::one();
    for i in 1..=n {
        let mut cur = alloc::vec![BigUint::zero(); k + 1];
        let limit = k.min(i);
        for j in 1..=limit {
            cur[j] = &prev[j] * BigUint::from(j) + &prev[j - 1];
        }
        prev = cur;
        prev[0] = BigUint::zero();
    }
    prev[k].clone()
}

/// Iterator over all partitions of `n` labels into exactly `k` non-empty
/// blocks, represented as restricted growth strings in lexicographic order.
///
/// A restricted growth string `a` satisfies `a[0] = 0` and
/// `a[i] ≤ max(a[0..i]) + 1`; blocks are labeled in order of their smallest
/// member. Exactly `S(n, k)` strings are produced.
#[derive(Debug, Clone)]
pub struct Partitions {
    n: usize,
    k: usize,
    state: Option<Vec<usize>>,
}

impl Partitions {
    pub fn new(n: usize, k: usize) -> Result<Partitions, PartitionError> {
        if k == 0 || k > n {
            return Err(PartitionError { n, k });
        }
        // lexicographically smallest string with exactly k blocks:
        // zeros, then 1, 2, …, k−1 at the very end
        let mut first = alloc::vec![0usize; n];
        for j in 0..k - 1 {
            first[n - (k - 1) + j] = j + 1;
        }
        Ok(Partitions {
            n,
            k,
            state: Some(first),
        })
    }

    fn advance(&self, a: &[usize]) -> Option<Vec<usize>> {
        let (n, k) = (self.n, self.k);
        for i in (1..n).rev() {
            let prefix_max = a[..i].iter().copied().max().unwrap_or(0);
            if a[i] > prefix_max || a[i] + 1 >= k {
                continue;
            }
            let v = a[i] + 1;
            let m = prefix_max.max(v);
            let missing = (k - 1).saturating_sub(m);
            let room = n - 1 - i;
            if room < missing {
                continue;
            }
            let mut next = a[..i].to_vec();
            next.push(v);
            next.resize(n - missing, 0);
            for j in 0..missing {
                next.push(m + 1 + j);
            }
            return Some(next);
        }
        None
    }
}

impl Iterator for Partitions {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let current = self.state.take()?;
        self.state = self.advance(&current);
        Some(current)
    }
}

/// Collects the blocks of a restricted growth string: `blocks[b]` holds the
/// label indices assigned to block `b`.
pub fn blocks_of(rgs: &[usize], k: usize) -> Vec<Vec<usize>> {
    let mut blocks = alloc::vec![Vec::new(); k];
    for (i, &b) in rgs.iter().enumerate() {
        blocks[b].push(i);
    }
    blocks
}
