//! Deterministic analytic kernel: real zeta, prime zeta and the closed forms
//! for the variance and covariance of the prime statistic `R(t)`.
//!
//! Prime sums `sum_p p^(-s)` are evaluated through the Möbius inversion
//! `P(s) = sum_k mu(k)/k log zeta(ks)`, which stays cheap for `s` arbitrarily
//! close to 1 where direct summation would need primes up to `e^(1/(s-1))`.
//! Every value carries an absolute error bound.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::sum::UNIT_ROUNDOFF;

/// Smallest admissible `s - 1` for [`zeta`] and [`prime_zeta`].
pub const MIN_S_MINUS_ONE: f64 = 1e-6;

/// A value together with an absolute bound on its truncation and rounding error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnalyticValue {
    pub value: f64,
    pub tail_bound: f64,
}

impl AnalyticValue {
    fn new(value: f64, tail_bound: f64) -> Self {
        debug_assert!(tail_bound.is_finite() && tail_bound >= 0.0);
        Self { value, tail_bound }
    }

    /// `|self - other| <= self.tail_bound + other.tail_bound + slack`.
    pub fn agrees_with(&self, other: &AnalyticValue, slack: f64) -> bool {
        (self.value - other.value).abs() <= self.tail_bound + other.tail_bound + slack
    }
}

// B_2, B_4, ..., B_26
const BERNOULLI_EVEN: [f64; 13] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
    854513.0 / 138.0,
    -236364091.0 / 2730.0,
    8553103.0 / 6.0,
];

/// Euler-Maclaurin parameters: direct terms below `N`, `M` Bernoulli corrections.
#[derive(Debug, Clone, Copy)]
pub struct EulerMaclaurin {
    pub n: u32,
    pub m: usize,
}

impl EulerMaclaurin {
    /// Depth that keeps the remainder below `1e-20` for every `s > 1`.
    pub const DEFAULT: EulerMaclaurin = EulerMaclaurin { n: 16, m: 12 };

    /// `zeta(s) - 1` with an error bound. Computing the excess over 1
    /// directly keeps full relative precision when `s` is large.
    pub fn zeta_minus_one(&self, s: f64) -> AnalyticValue {
        let n = self.n.max(2) as f64;
        let m = self.m.min(BERNOULLI_EVEN.len() - 1);
        let mut direct = 0.0;
        for k in (2..self.n.max(2)).rev() {
            direct += (k as f64).powf(-s);
        }
        let n_pow = n.powf(-s);
        if s > 60.0 {
            // tail sum_{k >= N} k^-s <= N^-s + N^(1-s)/(s-1)
            let tail = n_pow * (1.0 + n / (s - 1.0));
            return AnalyticValue::new(direct + 0.5 * tail, 0.5 * tail + 4.0 * UNIT_ROUNDOFF * direct);
        }
        let integral = n * n_pow / (s - 1.0);
        let mut corr = 0.0;
        let mut corr_abs = 0.0;
        // rising = s (s+1) ... (s+2k-2), fact = (2k)!, pow = N^(-s-2k+1)
        let mut rising = s;
        let mut fact = 2.0;
        let mut pow = n_pow / n;
        let mut next_term = 0.0;
        for k in 1..=m + 1 {
            let term = BERNOULLI_EVEN[k - 1] / fact * rising * pow;
            if k == m + 1 {
                next_term = term.abs();
                break;
            }
            corr += term;
            corr_abs += term.abs();
            let j = 2.0 * k as f64;
            rising *= (s + j - 1.0) * (s + j);
            fact *= (j + 1.0) * (j + 2.0);
            pow /= n * n;
        }
        let value = direct + integral + 0.5 * n_pow + corr;
        let rounding = 4.0 * UNIT_ROUNDOFF * (direct + integral + 0.5 * n_pow + corr_abs);
        AnalyticValue::new(value, next_term + rounding)
    }
}

fn check_s(s: f64) -> Result<()> {
    if s.is_nan() || s <= 1.0 + MIN_S_MINUS_ONE {
        return Err(Error::Domain(format!("argument must exceed 1 + 1e-6, got {s}")));
    }
    Ok(())
}

/// Riemann zeta at real `s > 1` by Euler-Maclaurin summation.
pub fn zeta(s: f64) -> Result<AnalyticValue> {
    check_s(s)?;
    let zm1 = EulerMaclaurin::DEFAULT.zeta_minus_one(s);
    Ok(AnalyticValue::new(
        1.0 + zm1.value,
        zm1.tail_bound + UNIT_ROUNDOFF * (1.0 + zm1.value),
    ))
}

/// `log zeta(s)` with error bound, accurate even when `zeta(s) - 1` is tiny.
fn log_zeta(s: f64) -> AnalyticValue {
    let zm1 = EulerMaclaurin::DEFAULT.zeta_minus_one(s);
    let value = zm1.value.ln_1p();
    // d log(1+x) = dx / (1+x)
    AnalyticValue::new(
        value,
        zm1.tail_bound / (1.0 + zm1.value) + 2.0 * UNIT_ROUNDOFF * value.abs(),
    )
}

/// Möbius function for small arguments.
pub fn mobius(mut k: u64) -> i32 {
    if k == 0 {
        return 0;
    }
    let mut mu = 1;
    let mut d = 2;
    while d * d <= k {
        if k.is_multiple_of(d) {
            k /= d;
            if k.is_multiple_of(d) {
                return 0;
            }
            mu = -mu;
        }
        d += 1;
    }
    if k > 1 {
        mu = -mu;
    }
    mu
}

const MAX_MOBIUS_TERMS: u64 = 400;

/// `sum_{k >= first} mu(k)/k log zeta(ks)`, stopping once the remaining tail
/// is negligible relative to the partial value.
///
/// For `ks >= 2`, `0 < log zeta(ks) <= zeta(ks) - 1 <= 3 * 2^(-ks)`, so the
/// tail after `K` is at most `3 * 2^(-(K+1)s) / ((K+1)(1 - 2^-s))`.
fn mobius_log_zeta_series(s: f64, first: u64) -> AnalyticValue {
    let mut value = 0.0;
    let mut err = 0.0;
    let ratio = 1.0 - (-s).exp2();
    let mut k = first;
    loop {
        let mu = mobius(k);
        if mu != 0 {
            let lz = log_zeta(k as f64 * s);
            let term = mu as f64 * lz.value / k as f64;
            value += term;
            err += lz.tail_bound / k as f64 + UNIT_ROUNDOFF * (value.abs() + term.abs());
        }
        let tail = 3.0 * (-((k + 1) as f64) * s).exp2() / ((k + 1) as f64 * ratio);
        if tail <= 0.25 * UNIT_ROUNDOFF * value.abs() || tail < 1e-300 || k >= MAX_MOBIUS_TERMS {
            return AnalyticValue::new(value, err + tail);
        }
        k += 1;
    }
}

/// Prime zeta `P(s) = sum_p p^(-s)` for real `s > 1`.
pub fn prime_zeta(s: f64) -> Result<AnalyticValue> {
    check_s(s)?;
    Ok(mobius_log_zeta_series(s, 1))
}

/// `c0 = lim_{t -> 0} (P(1+t) - log(1/t)) = sum_{k >= 2} mu(k)/k log zeta(k)`.
pub fn mertens_constant() -> AnalyticValue {
    mobius_log_zeta_series(1.0, 2)
}

fn check_open(t: f64, upper: f64, what: &str) -> Result<()> {
    if !(t > 0.0 && t < upper) {
        return Err(Error::Domain(format!("{what} must lie in (0, {upper}), got {t}")));
    }
    Ok(())
}

/// `P(1+t) - log(1/t)`, which tends to [`mertens_constant`] as `t -> 0`.
pub fn mertens_deviation(t: f64) -> Result<AnalyticValue> {
    check_open(t, 0.5, "t")?;
    let p = prime_zeta(1.0 + t)?;
    let value = p.value + t.ln();
    Ok(AnalyticValue::new(
        value,
        p.tail_bound + UNIT_ROUNDOFF * (p.value.abs() + value.abs()),
    ))
}

/// Covariance of `R(t1)` and `R(t2)`:
/// `sum_p (p^(-1/2-t1) - p^(-1/2-2t1)) (p^(-1/2-t2) - p^(-1/2-2t2))`
/// `= P(1+t1+t2) - P(1+t1+2t2) - P(1+2t1+t2) + P(1+2t1+2t2)`.
///
/// The expression is evaluated symmetrically, so swapping the arguments
/// gives a bit-identical result.
pub fn r_covariance(t1: f64, t2: f64) -> Result<AnalyticValue> {
    check_open(t1, 0.5, "t1")?;
    check_open(t2, 0.5, "t2")?;
    let a = prime_zeta(1.0 + (t1 + t2))?;
    let b = prime_zeta(1.0 + (t1 + 2.0 * t2))?;
    let c = prime_zeta(1.0 + (2.0 * t1 + t2))?;
    let d = prime_zeta(1.0 + (2.0 * t1 + 2.0 * t2))?;
    let value = (a.value + d.value) - (b.value + c.value);
    let rounding = 2.0 * UNIT_ROUNDOFF * ((a.value.abs() + d.value.abs()) + (b.value.abs() + c.value.abs()));
    Ok(AnalyticValue::new(
        value,
        (a.tail_bound + d.tail_bound) + (b.tail_bound + c.tail_bound) + rounding,
    ))
}

/// Variance of `R(t)`: `P(1+2t) - 2 P(1+3t) + P(1+4t)`, tending to `log(9/8)`.
pub fn r_variance(t: f64) -> Result<AnalyticValue> {
    r_covariance(t, t)
}

/// `log(9/8)`, the limiting variance of `R(t)`.
pub fn limiting_variance() -> f64 {
    (9.0f64 / 8.0).ln()
}

/// Mertens-line approximation of the variance:
/// `log(1/2t) + log(1/4t) - 2 log(1/3t)`.
pub fn variance_log_approx(t: f64) -> f64 {
    (1.0 / (2.0 * t)).ln() + (1.0 / (4.0 * t)).ln() - 2.0 * (1.0 / (3.0 * t)).ln()
}

/// Mertens-line approximation of the covariance for `t2 < t1`:
/// `log((t1+2t2)/(t1+t2)) + log((2t1+t2)/(2t1+2t2))`.
pub fn covariance_log_approx(t1: f64, t2: f64) -> f64 {
    ((t1 + 2.0 * t2) / (t1 + t2)).ln() + ((2.0 * t1 + t2) / (2.0 * t1 + 2.0 * t2)).ln()
}

/// `t_i = 2^(-2^i)` for `1 <= i <= 5`.
pub fn t_sequence(i: u32) -> Result<f64> {
    if !(1..=5).contains(&i) {
        return Err(Error::Domain(format!("t_sequence index must be in 1..=5, got {i}")));
    }
    Ok((-(2f64.powi(i as i32))).exp2())
}

/// Strictly decreasing evaluation points in `(0, 1/2)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TGrid {
    entries: Vec<f64>,
}

impl TGrid {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Config("t grid is empty".into()));
        }
        if let Some(bad) = entries.iter().find(|&&t| !(t > 0.0 && t < 0.5)) {
            return Err(Error::Domain(format!("grid entries must lie in (0, 1/2), got {bad}")));
        }
        if entries.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::Config("grid entries must be strictly decreasing".into()));
        }
        Ok(Self { entries })
    }

    /// `{t_i = 2^(-2^i) : i in first..=last}`.
    pub fn doubly_exponential(first: u32, last: u32) -> Result<Self> {
        Self::new((first..=last).map(t_sequence).collect::<Result<_>>()?)
    }

    /// Parses `"2^-2^i:i=1..4"`, or a comma list whose items are decimals or
    /// `2^-k`. List items are sorted into decreasing order.
    pub fn parse(spec: &str) -> Result<Self> {
        let spec = spec.trim().replace(' ', "");
        if let Some(rest) = spec.strip_prefix("2^-2^i:i=") {
            let (a, b) = rest
                .split_once("..")
                .ok_or_else(|| Error::Config(format!("bad grid range {rest:?}")))?;
            let parse = |x: &str| {
                x.trim_start_matches('=')
                    .parse::<u32>()
                    .map_err(|e| Error::Config(format!("bad grid index {x:?}: {e}")))
            };
            return Self::doubly_exponential(parse(a)?, parse(b)?);
        }
        let mut entries = spec
            .split(',')
            .filter(|s| !s.is_empty())
            .map(parse_t)
            .collect::<Result<Vec<f64>>>()?;
        entries.sort_by(|a, b| b.total_cmp(a));
        entries.dedup();
        Self::new(entries)
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Each `t` with its partner `2t`.
    pub fn pairs(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.entries.iter().map(|&t| (t, 2.0 * t))
    }

    /// Consecutive entries `(t_i, t_{i+1})`.
    pub fn consecutive(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.entries.windows(2).map(|w| (w[0], w[1]))
    }
}

/// A single `t` value: a decimal, `2^-k`, or `2^-2^k`.
pub fn parse_t(s: &str) -> Result<f64> {
    let s = s.trim();
    if let Some(exp) = s.strip_prefix("2^-") {
        if let Some(inner) = exp.strip_prefix("2^") {
            let i: u32 = inner.parse().map_err(|e| Error::Config(format!("bad t {s:?}: {e}")))?;
            return t_sequence(i);
        }
        let k: f64 = exp.parse().map_err(|e| Error::Config(format!("bad t {s:?}: {e}")))?;
        return Ok((-k).exp2());
    }
    s.parse::<f64>().map_err(|e| Error::Config(format!("bad t {s:?}: {e}")))
}
