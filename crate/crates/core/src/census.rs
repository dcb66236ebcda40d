//! Streaming partial sums `S_n = sum_{m <= n} f(m) m^(-a)` and their sign
//! changes.
//!
//! `S_x` is constant on `[n, n+1)`, so sampling at integers loses no crossing.
//! Signs are produced block by block (optionally in parallel), while the
//! accumulation itself is one sequential compensated scan, so `S_n` is
//! bit-identical for every worker count.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::parallel;
use crate::sampler::SignOracle;
use crate::sieve::{PrimeRange, Sieve};
use crate::sum::{CompensatedSum, UNIT_ROUNDOFF};

/// Exponent of the critical case `f(n)/sqrt(n)`.
pub const CRITICAL_EXPONENT: f64 = 0.5;

/// `|S_n|` below this is logged as a near-zero event.
pub const NEAR_ZERO_TOL: f64 = 1e-12;

/// `n^(-exponent)`, the weight of the `n`-th term.
#[inline]
pub fn term_weight(n: u64, exponent: f64) -> f64 {
    if exponent == CRITICAL_EXPONENT {
        1.0 / (n as f64).sqrt()
    } else {
        (n as f64).powf(-exponent)
    }
}

/// Relative error bound of [`term_weight`].
pub fn term_weight_rel_err(exponent: f64) -> f64 {
    if exponent == CRITICAL_EXPONENT {
        2.0 * UNIT_ROUNDOFF
    } else {
        4.0 * UNIT_ROUNDOFF
    }
}

/// Powers of ten from `10^3` up to `x_limit`, closed with `x_limit` itself.
pub fn default_checkpoints(x_limit: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut x = 1000u64;
    while x <= x_limit {
        out.push(x);
        match x.checked_mul(10) {
            Some(next) => x = next,
            None => break,
        }
    }
    if out.last() != Some(&x_limit) {
        out.push(x_limit);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckpointRow {
    pub x: u64,
    pub s_x: f64,
    pub crossings_so_far: u64,
    pub min: f64,
    pub max: f64,
    pub rounding_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CensusReport {
    pub x_limit: u64,
    pub exponent: f64,
    /// Every `n` with `S_{n-1} S_n < 0`, ascending.
    pub crossings: Vec<u64>,
    pub final_sum: f64,
    pub running_min: f64,
    pub running_max: f64,
    pub near_zero_events: Vec<(u64, f64)>,
    /// Accumulated bound on `|computed S_x - exact S_x|`.
    pub rounding_bound: f64,
    pub checkpoints: Vec<CheckpointRow>,
}

#[derive(Debug, Clone)]
pub struct CensusOptions {
    pub exponent: f64,
    pub checkpoints: Vec<u64>,
    pub workers: usize,
    pub block_len: u64,
}

impl Default for CensusOptions {
    fn default() -> Self {
        Self {
            exponent: CRITICAL_EXPONENT,
            checkpoints: Vec::new(),
            workers: 1,
            block_len: 1 << 18,
        }
    }
}

/// Running state of the scan: compensated sum, extrema and crossing count.
#[derive(Debug, Clone)]
pub struct CrossingTracker {
    acc: CompensatedSum,
    n: u64,
    current: f64,
    min: f64,
    max: f64,
    crossings: u64,
    term_rel_err: f64,
}

impl CrossingTracker {
    pub fn new(exponent: f64) -> Self {
        Self {
            acc: CompensatedSum::new(),
            n: 0,
            current: 0.0,
            min: f64::INFINITY,
            max: f64::NEG_INFINITY,
            crossings: 0,
            term_rel_err: term_weight_rel_err(exponent),
        }
    }

    /// Adds term `n + 1`; returns `true` when it produced a sign change.
    #[inline]
    pub fn push(&mut self, term: f64) -> bool {
        let prev = self.current;
        self.acc.add(term);
        self.n += 1;
        self.current = self.acc.value();
        self.min = self.min.min(self.current);
        self.max = self.max.max(self.current);
        let crossed = prev * self.current < 0.0;
        if crossed {
            self.crossings += 1;
        }
        crossed
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn value(&self) -> f64 {
        self.current
    }

    pub fn crossings(&self) -> u64 {
        self.crossings
    }

    pub fn min(&self) -> f64 {
        self.min
    }

    pub fn max(&self) -> f64 {
        self.max
    }

    /// Term-evaluation error plus summation error.
    pub fn rounding_bound(&self) -> f64 {
        self.term_rel_err * self.acc.abs_sum() + self.acc.error_bound()
    }

    fn row(&self) -> CheckpointRow {
        CheckpointRow {
            x: self.n,
            s_x: self.current,
            crossings_so_far: self.crossings,
            min: self.min,
            max: self.max,
            rounding_bound: self.rounding_bound(),
        }
    }
}

fn validate(x_limit: u64, exponent: f64, sieve: &Sieve) -> Result<()> {
    if x_limit < 1 {
        return Err(Error::Domain("x_limit must be >= 1".into()));
    }
    if !(exponent > 0.0 && exponent <= 1.0) {
        return Err(Error::Domain(format!("exponent must lie in (0, 1], got {exponent}")));
    }
    if x_limit > sieve.capacity() {
        return Err(Error::Resource(format!(
            "x_limit {x_limit} exceeds sieve capacity {}",
            sieve.capacity()
        )));
    }
    Ok(())
}

/// Lazily yields `(n, S_n)` for `n = 1..=x_limit`.
pub struct PartialSumStream<'a> {
    oracle: SignOracle,
    sieve: &'a Sieve,
    x_limit: u64,
    exponent: f64,
    block_len: u64,
    acc: CompensatedSum,
    signs: Vec<i8>,
    block_lo: u64,
    pos: usize,
}

impl Iterator for PartialSumStream<'_> {
    type Item = (u64, f64);

    fn next(&mut self) -> Option<(u64, f64)> {
        if self.pos == self.signs.len() {
            let lo = self.block_lo + self.signs.len() as u64;
            if lo > self.x_limit {
                return None;
            }
            let hi = (lo + self.block_len - 1).min(self.x_limit);
            let range = PrimeRange::new(lo, hi).ok()?;
            // validated against the sieve at construction
            self.oracle.fill_block(self.sieve, range, &mut self.signs).ok()?;
            self.block_lo = lo;
            self.pos = 0;
        }
        let n = self.block_lo + self.pos as u64;
        let term = self.signs[self.pos] as f64 * term_weight(n, self.exponent);
        self.pos += 1;
        self.acc.add(term);
        Some((n, self.acc.value()))
    }
}

pub fn partial_sums_stream(
    oracle: SignOracle,
    sieve: &Sieve,
    x_limit: u64,
    exponent: f64,
) -> Result<PartialSumStream<'_>> {
    validate(x_limit, exponent, sieve)?;
    Ok(PartialSumStream {
        oracle,
        sieve,
        x_limit,
        exponent,
        block_len: 1 << 16,
        acc: CompensatedSum::new(),
        signs: Vec::new(),
        block_lo: 1,
        pos: 0,
    })
}

/// Census of `S_x = sum f(n)/sqrt(n)` with default checkpoints.
pub fn sign_changes(oracle: SignOracle, sieve: &Sieve, x_limit: u64) -> Result<CensusReport> {
    run_census(oracle, sieve, x_limit, &CensusOptions::default())
}

pub fn run_census(oracle: SignOracle, sieve: &Sieve, x_limit: u64, opts: &CensusOptions) -> Result<CensusReport> {
    validate(x_limit, opts.exponent, sieve)?;
    let mut checkpoints = if opts.checkpoints.is_empty() {
        default_checkpoints(x_limit)
    } else {
        opts.checkpoints
            .iter()
            .copied()
            .filter(|&c| c >= 1 && c <= x_limit)
            .collect()
    };
    checkpoints.sort_unstable();
    checkpoints.dedup();

    let pool = parallel::pool(opts.workers)?;
    let whole = PrimeRange::new(1, x_limit)?;
    let blocks: Vec<PrimeRange> = whole.chunks(opts.block_len.max(1)).collect();

    let mut tracker = CrossingTracker::new(opts.exponent);
    let mut crossings = Vec::new();
    let mut near_zero = Vec::new();
    let mut rows = Vec::with_capacity(checkpoints.len());
    let mut next_cp = checkpoints.iter().peekable();

    for batch in blocks.chunks(opts.workers) {
        let signs: Vec<Vec<i8>> = pool.install(|| {
            batch
                .par_iter()
                .map(|&r| {
                    let mut buf = Vec::new();
                    oracle.fill_block(sieve, r, &mut buf).map(|_| buf)
                })
                .collect::<Result<Vec<_>>>()
        })?;
        for (range, block) in batch.iter().zip(&signs) {
            for (n, &s) in (range.lo()..=range.hi()).zip(block) {
                if tracker.push(s as f64 * term_weight(n, opts.exponent)) {
                    crossings.push(n);
                }
                let v = tracker.value();
                if v.abs() < NEAR_ZERO_TOL {
                    near_zero.push((n, v.abs()));
                }
                if next_cp.peek() == Some(&&n) {
                    rows.push(tracker.row());
                    next_cp.next();
                }
            }
        }
    }

    Ok(CensusReport {
        x_limit,
        exponent: opts.exponent,
        crossings,
        final_sum: tracker.value(),
        running_min: tracker.min(),
        running_max: tracker.max(),
        near_zero_events: near_zero,
        rounding_bound: tracker.rounding_bound(),
        checkpoints: rows,
    })
}

/// Crossing counts at each checkpoint for a precomputed sign prefix
/// `signs[n] = f(n)` and weight table `weights[n] = n^(-a)` (index 0 unused).
pub fn crossings_at_checkpoints(signs: &[i8], weights: &[f64], checkpoints: &[u64], exponent: f64) -> Vec<u64> {
    let mut tracker = CrossingTracker::new(exponent);
    let mut out = Vec::with_capacity(checkpoints.len());
    let mut next_cp = checkpoints.iter().peekable();
    let last = checkpoints.last().copied().unwrap_or(0) as usize;
    for n in 1..=last {
        tracker.push(signs[n] as f64 * weights[n]);
        while next_cp.peek() == Some(&&(n as u64)) {
            out.push(tracker.crossings());
            next_cp.next();
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sieve() -> Sieve {
        Sieve::new(1_000_000).unwrap()
    }

    #[test]
    fn first_terms() {
        let s = sieve();
        let v: Vec<_> = partial_sums_stream(SignOracle::random(3), &s, 1, 0.5)
            .unwrap()
            .collect();
        assert_eq!(v, vec![(1, 1.0)]);
        let h: Vec<_> = partial_sums_stream(SignOracle::all_plus(), &s, 10, 1.0)
            .unwrap()
            .collect();
        assert!((h[9].1 - 2.928_968_253_968_254).abs() < 1e-15);
        let l: Vec<_> = partial_sums_stream(SignOracle::all_minus(), &s, 3, 0.5)
            .unwrap()
            .collect();
        // 1 - 1/sqrt 2 and 1 - 1/sqrt 2 - 1/sqrt 3
        assert!((l[1].1 - 0.292_893_218_813_452_5).abs() < 1e-15);
        assert!((l[2].1 + 0.284_457_050_376_173_3).abs() < 1e-15);
    }

    #[test]
    fn bad_inputs() {
        let s = Sieve::new(1000).unwrap();
        assert!(matches!(
            sign_changes(SignOracle::random(1), &s, 0),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            sign_changes(SignOracle::random(1), &s, 1001),
            Err(Error::Resource(_))
        ));
        assert!(matches!(
            partial_sums_stream(SignOracle::random(1), &s, 10, 1.5),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn all_plus_never_crosses() {
        let r = sign_changes(SignOracle::all_plus(), &sieve(), 10_000).unwrap();
        assert!(r.crossings.is_empty());
        assert_eq!(r.running_min, 1.0);
        assert!(r.checkpoints.windows(2).all(|w| w[1].s_x > w[0].s_x));
        let s: Vec<_> = partial_sums_stream(SignOracle::all_plus(), &sieve(), 2000, 0.5)
            .unwrap()
            .collect();
        assert!(s.windows(2).all(|w| w[1].1 > w[0].1));
    }

    #[test]
    fn liouville_crosses_at_three() {
        let r = sign_changes(SignOracle::all_minus(), &sieve(), 10).unwrap();
        assert_eq!(r.crossings.first(), Some(&3));
    }

    #[test]
    fn crossings_alternate() {
        let s = sieve();
        let r = sign_changes(SignOracle::random(11), &s, 100_000).unwrap();
        assert!(r.crossings.windows(2).all(|w| w[0] < w[1]));
        let sums: Vec<f64> = partial_sums_stream(SignOracle::random(11), &s, 100_000, 0.5)
            .unwrap()
            .map(|(_, v)| v)
            .collect();
        for w in r.crossings.windows(2) {
            let a = sums[(w[0] - 1) as usize];
            let b = sums[(w[1] - 1) as usize];
            assert!(a * b < 0.0);
        }
        assert!(r.rounding_bound >= 0.0);
        assert_eq!(r.final_sum, sums[99_999]);
    }

    #[test]
    fn workers_and_blocks_do_not_change_results() {
        let s = sieve();
        let o = SignOracle::random(2024);
        let base = run_census(o, &s, 300_000, &CensusOptions::default()).unwrap();
        for (workers, block_len) in [(4, 1000), (3, 77_777), (16, 1 << 16)] {
            let opts = CensusOptions {
                workers,
                block_len,
                ..CensusOptions::default()
            };
            let other = run_census(o, &s, 300_000, &opts).unwrap();
            assert_eq!(base, other);
        }
    }

    #[test]
    fn prefix_counts_match_census() {
        let s = sieve();
        let table = crate::sieve::PrefixFactorTable::new(&s, 100_000).unwrap();
        let weights: Vec<f64> = (0..=100_000u64)
            .map(|n| if n == 0 { 0.0 } else { term_weight(n, 0.5) })
            .collect();
        let o = SignOracle::random(99);
        let (mut ps, mut f) = (Vec::new(), Vec::new());
        o.fill_prefix(&table, &mut ps, &mut f);
        let cps = [1000, 10_000, 100_000];
        let counts = crossings_at_checkpoints(&f, &weights, &cps, 0.5);
        let opts = CensusOptions {
            checkpoints: cps.to_vec(),
            ..CensusOptions::default()
        };
        let r = run_census(o, &s, 100_000, &opts).unwrap();
        let expect: Vec<u64> = r.checkpoints.iter().map(|c| c.crossings_so_far).collect();
        assert_eq!(counts, expect);
    }

    #[test]
    fn checkpoints_default() {
        assert_eq!(default_checkpoints(10), vec![10]);
        assert_eq!(default_checkpoints(10_000), vec![1000, 10_000]);
        assert_eq!(default_checkpoints(25_000), vec![1000, 10_000, 25_000]);
    }
}
