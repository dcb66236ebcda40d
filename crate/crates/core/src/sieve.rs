//! Segmented sieve of Eratosthenes: primes and smallest-prime-factor tables
//! over arbitrary ranges `[lo, hi]`.
//!
//! A [`Sieve`] owns the base primes up to `sqrt(capacity)` and is immutable
//! afterwards, so it can be shared across threads and queried for any block
//! below its capacity. Every query walks the range in fixed-length segments;
//! output never depends on how a caller partitions its requests.

use crate::error::{Error, Result};

/// Default segment length (entries) used while sieving.
pub const DEFAULT_BLOCK_LEN: usize = 1 << 20;

/// Default cap on `hi - lo + 1` for a single request.
pub const DEFAULT_MAX_SPAN: u64 = 1 << 28;

/// Largest supported capacity; scans beyond it are out of desk reach.
pub const MAX_CAPACITY: u64 = 1 << 36;

/// Inclusive range of positive integers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PrimeRange {
    lo: u64,
    hi: u64,
}

impl PrimeRange {
    pub fn new(lo: u64, hi: u64) -> Result<Self> {
        if lo < 1 {
            return Err(Error::Domain(format!("range lower bound must be >= 1, got {lo}")));
        }
        if hi < lo {
            return Err(Error::Domain(format!("empty range [{lo}, {hi}]")));
        }
        Ok(Self { lo, hi })
    }

    pub fn lo(&self) -> u64 {
        self.lo
    }

    pub fn hi(&self) -> u64 {
        self.hi
    }

    pub fn len(&self) -> u64 {
        self.hi - self.lo + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, n: u64) -> bool {
        self.lo <= n && n <= self.hi
    }

    /// Splits into consecutive sub-ranges of at most `len` entries.
    pub fn chunks(&self, len: u64) -> impl Iterator<Item = PrimeRange> + '_ {
        let len = len.max(1);
        let hi = self.hi;
        let mut next = Some(self.lo);
        std::iter::from_fn(move || {
            let lo = next?;
            let end = lo.saturating_add(len - 1).min(hi);
            next = if end == hi { None } else { Some(end + 1) };
            Some(PrimeRange { lo, hi: end })
        })
    }
}

/// Smallest prime factors for `n` in `[base, base + spf.len())`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpfBlock {
    base: u64,
    spf: Vec<u64>,
}

impl SpfBlock {
    pub fn base(&self) -> u64 {
        self.base
    }

    pub fn len(&self) -> usize {
        self.spf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spf.is_empty()
    }

    /// Smallest prime factor of `n`, or `None` if `n` is outside the block.
    pub fn get(&self, n: u64) -> Option<u64> {
        let idx = n.checked_sub(self.base)?;
        self.spf.get(usize::try_from(idx).ok()?).copied()
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.spf
    }

    /// `(n, spf(n))` pairs in ascending order.
    pub fn iter(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.spf
            .iter()
            .enumerate()
            .map(move |(i, &p)| (self.base + i as u64, p))
    }
}

/// Base-prime table plus the sieving configuration.
#[derive(Debug, Clone)]
pub struct Sieve {
    capacity: u64,
    block_len: usize,
    max_span: u64,
    base_primes: Vec<u64>,
}

impl Sieve {
    /// Sieve able to answer queries for every `n <= capacity`.
    pub fn new(capacity: u64) -> Result<Self> {
        Self::with_config(capacity, DEFAULT_BLOCK_LEN, DEFAULT_MAX_SPAN)
    }

    pub fn with_config(capacity: u64, block_len: usize, max_span: u64) -> Result<Self> {
        if capacity < 1 {
            return Err(Error::Config("sieve capacity must be >= 1".into()));
        }
        if capacity > MAX_CAPACITY {
            return Err(Error::Resource(format!(
                "sieve capacity {capacity} exceeds the supported maximum {MAX_CAPACITY}"
            )));
        }
        if block_len == 0 || max_span == 0 {
            return Err(Error::Config("block length and span budget must be positive".into()));
        }
        let root = isqrt(capacity);
        let base_primes = small_primes(root);
        Ok(Self {
            capacity,
            block_len,
            max_span,
            base_primes,
        })
    }

    pub fn capacity(&self) -> u64 {
        self.capacity
    }

    pub fn block_len(&self) -> usize {
        self.block_len
    }

    pub fn max_span(&self) -> u64 {
        self.max_span
    }

    /// Primes up to `sqrt(capacity)`.
    pub fn base_primes(&self) -> &[u64] {
        &self.base_primes
    }

    /// Fails with a resource error when `range` is beyond capacity or budget.
    pub fn check(&self, range: PrimeRange) -> Result<()> {
        if range.hi > self.capacity {
            return Err(Error::Resource(format!(
                "range upper bound {} exceeds sieve capacity {}",
                range.hi, self.capacity
            )));
        }
        if range.len() > self.max_span {
            return Err(Error::Resource(format!(
                "range of {} entries exceeds block budget {}",
                range.len(),
                self.max_span
            )));
        }
        Ok(())
    }

    /// All primes `p` with `lo <= p <= hi`, ascending.
    pub fn primes_in_range(&self, range: PrimeRange) -> Result<Vec<u64>> {
        self.check(range)?;
        let mut out = Vec::new();
        let mut composite = Vec::new();
        for seg in range.chunks(self.block_len as u64) {
            self.mark_composites(seg, &mut composite);
            out.extend(
                composite
                    .iter()
                    .enumerate()
                    .filter(|&(_, &c)| !c)
                    .map(|(i, _)| seg.lo + i as u64)
                    .filter(|&n| n >= 2),
            );
        }
        Ok(out)
    }

    fn mark_composites(&self, seg: PrimeRange, composite: &mut Vec<bool>) {
        composite.clear();
        composite.resize(seg.len() as usize, false);
        for &p in &self.base_primes {
            if p * p > seg.hi {
                break;
            }
            let mut m = first_multiple_at_least(p, seg.lo).max(p * p);
            while m <= seg.hi {
                composite[(m - seg.lo) as usize] = true;
                m += p;
            }
        }
    }

    /// Smallest-prime-factor table over `range`; `spf(1) = 1`.
    pub fn spf_block(&self, range: PrimeRange) -> Result<SpfBlock> {
        self.check(range)?;
        let mut spf = vec![0u64; range.len() as usize];
        for seg in range.chunks(self.block_len as u64) {
            let off = (seg.lo - range.lo) as usize;
            let out = &mut spf[off..off + seg.len() as usize];
            for &p in &self.base_primes {
                if p * p > seg.hi {
                    break;
                }
                let mut m = first_multiple_at_least(p, seg.lo).max(p * p);
                while m <= seg.hi {
                    let slot = &mut out[(m - seg.lo) as usize];
                    if *slot == 0 {
                        *slot = p;
                    }
                    m += p;
                }
            }
            for (i, slot) in out.iter_mut().enumerate() {
                if *slot == 0 {
                    *slot = seg.lo + i as u64;
                }
            }
        }
        Ok(SpfBlock { base: range.lo, spf })
    }

    pub fn is_prime(&self, n: u64) -> Result<bool> {
        if n > self.capacity {
            return Err(Error::Resource(format!("{n} exceeds sieve capacity {}", self.capacity)));
        }
        if n < 2 {
            return Ok(false);
        }
        for &p in &self.base_primes {
            if p * p > n {
                break;
            }
            if n.is_multiple_of(p) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Prime factorization `[(p, a)]` of `n` by trial division with the base primes.
    pub fn factorize(&self, n: u64) -> Result<Vec<(u64, u32)>> {
        if n == 0 {
            return Err(Error::Domain("cannot factor 0".into()));
        }
        if n > self.capacity {
            return Err(Error::Resource(format!("{n} exceeds sieve capacity {}", self.capacity)));
        }
        let mut rest = n;
        let mut out = Vec::new();
        for &p in &self.base_primes {
            if p * p > rest {
                break;
            }
            let mut a = 0;
            while rest.is_multiple_of(p) {
                rest /= p;
                a += 1;
            }
            if a > 0 {
                out.push((p, a));
            }
        }
        if rest > 1 {
            out.push((rest, 1));
        }
        Ok(out)
    }
}

/// Prime table over `[1, limit]` in the form used by prefix recurrences:
/// for each `n >= 2`, the index of its smallest prime factor and the cofactor
/// `n / spf(n)`. Seed-independent and shared between samples.
#[derive(Debug, Clone)]
pub struct PrefixFactorTable {
    limit: u64,
    primes: Vec<u64>,
    spf_index: Vec<u32>,
    cofactor: Vec<u32>,
}

impl PrefixFactorTable {
    pub fn new(sieve: &Sieve, limit: u64) -> Result<Self> {
        if limit > u32::MAX as u64 {
            return Err(Error::Resource(format!("prefix table limit {limit} exceeds 2^32 - 1")));
        }
        let block = sieve.spf_block(PrimeRange::new(1, limit.max(1))?)?;
        let primes: Vec<u64> = block
            .iter()
            .filter(|&(n, p)| n >= 2 && n == p)
            .map(|(n, _)| n)
            .collect();
        let mut spf_index = vec![0u32; limit as usize + 1];
        let mut cofactor = vec![0u32; limit as usize + 1];
        for (n, p) in block.iter().filter(|&(n, _)| n >= 2) {
            // primes is sorted, so the search is exact
            let idx = primes.binary_search(&p).expect("spf is a listed prime");
            spf_index[n as usize] = idx as u32;
            cofactor[n as usize] = (n / p) as u32;
        }
        Ok(Self {
            limit,
            primes,
            spf_index,
            cofactor,
        })
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    /// Index into [`Self::primes`] of `spf(n)`; meaningless for `n < 2`.
    #[inline]
    pub fn spf_index(&self, n: usize) -> usize {
        self.spf_index[n] as usize
    }

    #[inline]
    pub fn cofactor(&self, n: usize) -> usize {
        self.cofactor[n] as usize
    }
}

/// Integer square root, floor.
pub fn isqrt(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r.checked_mul(r).is_none_or(|sq| sq > n) {
        r -= 1;
    }
    while (r + 1).checked_mul(r + 1).is_some_and(|sq| sq <= n) {
        r += 1;
    }
    r
}

fn first_multiple_at_least(p: u64, lo: u64) -> u64 {
    lo.div_ceil(p) * p
}

/// Plain (non-segmented) sieve of Eratosthenes for the base primes.
fn small_primes(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let n = limit as usize;
    let mut composite = vec![false; n + 1];
    let mut i = 2;
    while i * i <= n {
        if !composite[i] {
            let mut m = i * i;
            while m <= n {
                composite[m] = true;
                m += i;
            }
        }
        i += 1;
    }
    (2..=n).filter(|&k| !composite[k]).map(|k| k as u64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn naive_is_prime(n: u64) -> bool {
        n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d))
    }

    #[test]
    fn small_ranges() {
        let s = Sieve::new(1000).unwrap();
        assert_eq!(
            s.primes_in_range(PrimeRange::new(10, 20).unwrap()).unwrap(),
            vec![11, 13, 17, 19]
        );
        assert_eq!(s.primes_in_range(PrimeRange::new(1, 2).unwrap()).unwrap(), vec![2]);
        assert!(s.primes_in_range(PrimeRange::new(24, 28).unwrap()).unwrap().is_empty());
    }

    #[test]
    fn spf_examples() {
        let s = Sieve::new(1000).unwrap();
        let b = s.spf_block(PrimeRange::new(2, 10).unwrap()).unwrap();
        assert_eq!(b.as_slice(), &[2, 3, 2, 5, 2, 7, 2, 3, 2]);
        let b = s.spf_block(PrimeRange::new(1, 100).unwrap()).unwrap();
        assert_eq!(b.get(1), Some(1));
        assert_eq!(b.get(91), Some(7));
        assert_eq!(b.get(17), Some(17));
        assert_eq!(b.get(101), None);
    }

    #[test]
    fn invalid_ranges() {
        assert!(matches!(PrimeRange::new(0, 5), Err(Error::Domain(_))));
        assert!(matches!(PrimeRange::new(6, 5), Err(Error::Domain(_))));
        let s = Sieve::with_config(1000, 64, 100).unwrap();
        assert!(matches!(
            s.primes_in_range(PrimeRange::new(1, 2000).unwrap()),
            Err(Error::Resource(_))
        ));
        assert!(matches!(
            s.spf_block(PrimeRange::new(1, 500).unwrap()),
            Err(Error::Resource(_))
        ));
        assert!(matches!(Sieve::new(MAX_CAPACITY + 1), Err(Error::Resource(_))));
        assert!(matches!(Sieve::new(0), Err(Error::Config(_))));
    }

    #[test]
    fn million_matches_naive_sieve() {
        let s = Sieve::with_config(1_000_000, 1 << 14, DEFAULT_MAX_SPAN).unwrap();
        let fast = s.primes_in_range(PrimeRange::new(1, 1_000_000).unwrap()).unwrap();
        let naive = small_primes(1_000_000);
        assert_eq!(fast.len(), 78498);
        assert_eq!(fast, naive);
        for (x, expect) in [(10u64, 4usize), (100, 25), (1000, 168), (10_000, 1229), (100_000, 9592)] {
            assert_eq!(fast.iter().filter(|&&p| p <= x).count(), expect);
        }
    }

    #[test]
    fn spf_chain_is_nondecreasing() {
        let s = Sieve::new(200_000).unwrap();
        let b = s.spf_block(PrimeRange::new(1, 200_000).unwrap()).unwrap();
        for (n, p) in b.iter().skip(1) {
            assert_eq!(n % p, 0);
            assert_eq!(p == n, naive_is_prime(n) || n == 1);
            let q = n / p;
            if q > 1 {
                assert!(b.get(q).unwrap() >= p);
            }
        }
    }

    #[test]
    fn prefix_table_reconstructs_n() {
        let s = Sieve::new(50_000).unwrap();
        let t = PrefixFactorTable::new(&s, 50_000).unwrap();
        for n in 2..=50_000usize {
            let p = t.primes()[t.spf_index(n)] as usize;
            assert_eq!(p * t.cofactor(n), n);
        }
    }

    #[test]
    fn factorize_and_isqrt() {
        let s = Sieve::new(1_000_000).unwrap();
        assert_eq!(s.factorize(360).unwrap(), vec![(2, 3), (3, 2), (5, 1)]);
        assert_eq!(s.factorize(999_983).unwrap(), vec![(999_983, 1)]);
        assert!(s.is_prime(999_983).unwrap());
        assert!(!s.is_prime(1).unwrap());
        assert!(matches!(s.factorize(2_000_000), Err(Error::Resource(_))));
        assert_eq!(isqrt(u64::MAX), 4_294_967_295);
        assert_eq!(isqrt(99), 9);
    }

    proptest! {
        #[test]
        fn partition_independence(lo in 1u64..20_000, len in 1u64..5_000, cut in 0u64..5_000, block in 7usize..300) {
            let s = Sieve::with_config(30_000, block, DEFAULT_MAX_SPAN).unwrap();
            let hi = lo + len - 1;
            let whole = s.primes_in_range(PrimeRange::new(lo, hi).unwrap()).unwrap();
            let mid = lo + cut % len;
            let mut parts = s.primes_in_range(PrimeRange::new(lo, mid).unwrap()).unwrap();
            if mid < hi {
                parts.extend(s.primes_in_range(PrimeRange::new(mid + 1, hi).unwrap()).unwrap());
            }
            prop_assert_eq!(&whole, &parts);
            let naive: Vec<u64> = (lo..=hi).filter(|&n| naive_is_prime(n)).collect();
            prop_assert_eq!(whole, naive);
        }

        #[test]
        fn spf_block_matches_any_offset(lo in 1u64..20_000, len in 1u64..2_000) {
            let s = Sieve::with_config(30_000, 97, DEFAULT_MAX_SPAN).unwrap();
            let b = s.spf_block(PrimeRange::new(lo, lo + len - 1).unwrap()).unwrap();
            for (n, p) in b.iter() {
                let expect = if n == 1 { 1 } else { (2..=n).find(|d| n.is_multiple_of(*d)).unwrap() };
                prop_assert_eq!(p, expect);
            }
        }
    }
}
