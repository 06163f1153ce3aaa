//! Brute-force ground truth, independent of the recursion.

use itertools::Itertools;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::board::{Placement, Point};
use crate::checker::{check_full, is_costas, ComparisonLedger, Convention};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("{what} refused for order {n}: the configured cap is {cap}")]
    Cap {
        what: &'static str,
        n: usize,
        cap: usize,
    },
    #[error("{0}")]
    Input(String),
}

/// Per-operation order caps. These are budgets, not hard limits of the
/// algorithms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleCaps {
    pub exhaustive: usize,
    pub brute_c: usize,
    pub chi: usize,
    pub census: usize,
}

impl Default for OracleCaps {
    fn default() -> Self {
        OracleCaps {
            exhaustive: 10,
            brute_c: 8,
            chi: 9,
            census: 7,
        }
    }
}

fn factorial(n: usize) -> u64 {
    (1..=n as u64).product()
}

/// The permutation of `1..=n` with lexicographic rank `rank`.
pub fn unrank_permutation(n: usize, mut rank: u64) -> Vec<u8> {
    let mut pool: Vec<u8> = (1..=n as u8).collect();
    let mut out = Vec::with_capacity(n);
    for i in (0..n).rev() {
        let f = factorial(i);
        let idx = (rank / f) as usize;
        rank %= f;
        out.push(pool.remove(idx));
    }
    out
}

/// Advances to the lexicographic successor; false after the last one.
pub fn next_permutation(v: &mut [u8]) -> bool {
    let Some(i) = (1..v.len()).rev().find(|&i| v[i - 1] < v[i]) else {
        return false;
    };
    let j = (i..v.len())
        .rev()
        .find(|&j| v[j] > v[i - 1])
        .expect("successor exists");
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// Contiguous lexicographic rank intervals, one per chunk.
fn rank_ranges(total: u64, jobs: usize) -> Vec<(u64, u64)> {
    let parts = (jobs as u64 * 8).clamp(1, total.max(1));
    let step = total.div_ceil(parts);
    (0..parts)
        .map(|i| (i * step, ((i + 1) * step).min(total)))
        .filter(|(a, b)| a < b)
        .collect()
}

fn for_each_permutation_in(n: usize, (start, end): (u64, u64), mut f: impl FnMut(&[u8])) {
    let mut perm = unrank_permutation(n, start);
    for _ in start..end {
        f(&perm);
        next_permutation(&mut perm);
    }
}

fn run_pool<T: Send>(jobs: usize, work: impl FnOnce() -> T + Send) -> T {
    if jobs <= 1 {
        return work();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
        Ok(pool) => pool.install(work),
        Err(_) => work(),
    }
}

/// Checks every permutation of order `n` with the full triangle check.
/// In strict mode the ledger is charged `C(n, 3)` comparisons per
/// permutation. Arrays come back in lexicographic order.
pub fn exhaustive_costas(
    n: usize,
    convention: Convention,
    jobs: usize,
    caps: &OracleCaps,
) -> Result<(Vec<Placement>, ComparisonLedger), OracleError> {
    if n > caps.exhaustive {
        return Err(OracleError::Cap {
            what: "exhaustive search",
            n,
            cap: caps.exhaustive,
        });
    }
    if n == 0 {
        return Ok((vec![], ComparisonLedger::default()));
    }
    let ranges = rank_ranges(factorial(n), jobs);
    let parts: Vec<(Vec<Placement>, ComparisonLedger)> = run_pool(jobs, || {
        ranges
            .par_iter()
            .map(|&range| {
                let mut found = Vec::new();
                let mut ledger = ComparisonLedger::default();
                for_each_permutation_in(n, range, |perm| {
                    let p = Placement::from_permutation(perm).expect("valid permutation");
                    ledger.candidates += 1;
                    if check_full(&p, &mut ledger, convention) {
                        found.push(p);
                    }
                });
                (found, ledger)
            })
            .collect()
    });
    let mut arrays = Vec::new();
    let mut ledger = ComparisonLedger::default();
    for (found, l) in parts {
        arrays.extend(found);
        ledger += l;
    }
    Ok((arrays, ledger))
}

fn for_each_partial(n: usize, m: usize, mut f: impl FnMut(Placement)) {
    for rows in (1..=n as u8).combinations(m) {
        for cols in (1..=n as u8).permutations(m) {
            let p = Placement::new(n, rows.iter().zip(&cols).map(|(&r, &c)| Point::new(r, c)))
                .expect("distinct rows and columns");
            f(p);
        }
    }
}

/// Every `m`-point partial permutation on the `n x n` board that passes the
/// full check, sorted.
pub fn brute_phi(n: usize, m: usize, caps: &OracleCaps) -> Result<Vec<Placement>, OracleError> {
    if n > caps.brute_c {
        return Err(OracleError::Cap {
            what: "brute-force C",
            n,
            cap: caps.brute_c,
        });
    }
    if m > n {
        return Ok(vec![]);
    }
    let mut out = Vec::new();
    for_each_partial(n, m, |p| {
        if is_costas(&p) {
            out.push(p);
        }
    });
    out.sort_unstable();
    Ok(out)
}

/// `C(n, m)` by enumerating all `m`-point partial permutations.
pub fn brute_c(n: usize, m: usize, caps: &OracleCaps) -> Result<u64, OracleError> {
    if n > caps.brute_c {
        return Err(OracleError::Cap {
            what: "brute-force C",
            n,
            cap: caps.brute_c,
        });
    }
    if m > n {
        return Ok(0);
    }
    let mut count = 0;
    for_each_partial(n, m, |p| count += is_costas(&p) as u64);
    Ok(count)
}

/// Minimum number of points to delete from a full permutation so that the
/// remainder is Costas. Removal sets are tried by size, then in lexicographic
/// order of rows.
pub fn chi(p: &Placement, caps: &OracleCaps) -> Result<usize, OracleError> {
    let n = p.size();
    if n > caps.chi {
        return Err(OracleError::Cap {
            what: "chi",
            n,
            cap: caps.chi,
        });
    }
    if !p.is_full() {
        return Err(OracleError::Input(format!("{p} is not a full permutation")));
    }
    Ok(chi_unchecked(p))
}

fn chi_unchecked(p: &Placement) -> usize {
    let n = p.size();
    for r in 0..=n {
        for removed in (1..=n).combinations(r) {
            let rest = removed.iter().fold(*p, |acc, &row| acc.without_row(row));
            if is_costas(&rest) {
                return r;
            }
        }
    }
    n
}

/// Histogram of `chi` over all `n!` permutations.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ChiCensus {
    pub order: usize,
    /// `histogram[k]` permutations need exactly `k` removals.
    pub histogram: Vec<u64>,
}

impl ChiCensus {
    pub fn count(&self, k: usize) -> u64 {
        self.histogram.get(k).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.histogram.iter().sum()
    }
}

pub fn chi_census(n: usize, jobs: usize, caps: &OracleCaps) -> Result<ChiCensus, OracleError> {
    if n > caps.census {
        return Err(OracleError::Cap {
            what: "chi census",
            n,
            cap: caps.census,
        });
    }
    let ranges = rank_ranges(factorial(n), jobs);
    let parts: Vec<Vec<u64>> = run_pool(jobs, || {
        ranges
            .par_iter()
            .map(|&range| {
                let mut hist = vec![0u64; n + 1];
                for_each_permutation_in(n, range, |perm| {
                    let p = Placement::from_permutation(perm).expect("valid permutation");
                    hist[chi_unchecked(&p)] += 1;
                });
                hist
            })
            .collect()
    });
    let mut histogram = vec![0u64; n + 1];
    for h in parts {
        for (acc, v) in histogram.iter_mut().zip(h) {
            *acc += v;
        }
    }
    while histogram.len() > 1 && histogram.last() == Some(&0) {
        histogram.pop();
    }
    Ok(ChiCensus {
        order: n,
        histogram,
    })
}
