//! Sample-dependent functionals of `f` at a finite truncation: the Dirichlet
//! series `sum f(n) n^(-1/2-t)`, the step-integral transform
//! `F(t) = int_1^X S_x x^(-1-t) dx`, the Euler product and the prime statistic
//! `R(t) = sum_p f(p) (p^(-1/2-t) - p^(-1/2-2t))`.

use serde::Serialize;

use crate::analytic::{prime_zeta, TGrid};
use crate::census::{term_weight, CRITICAL_EXPONENT};
use crate::error::{Error, Result};
use crate::sampler::SignOracle;
use crate::sieve::{PrimeRange, Sieve};
use crate::sum::{CompensatedSum, UNIT_ROUNDOFF};

/// Rows whose truncation indicator exceeds this are flagged truncation-limited.
pub const TRUNCATION_LIMIT: f64 = 0.1;

const SIGN_BLOCK: u64 = 1 << 18;

/// Truncation points: `x_limit` for sums over integers, `prime_limit` for sums
/// and products over primes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TruncationSpec {
    pub x_limit: u64,
    pub prime_limit: u64,
}

impl TruncationSpec {
    pub fn new(x_limit: u64, prime_limit: u64) -> Result<Self> {
        if x_limit < 1 {
            return Err(Error::Config("x_limit must be >= 1".into()));
        }
        if prime_limit < 2 {
            return Err(Error::Config("prime_limit must be >= 2".into()));
        }
        Ok(Self { x_limit, prime_limit })
    }

    fn check(&self, sieve: &Sieve) -> Result<()> {
        let need = self.x_limit.max(self.prime_limit);
        if need > sieve.capacity() {
            return Err(Error::Resource(format!(
                "truncation {need} exceeds sieve capacity {}",
                sieve.capacity()
            )));
        }
        Ok(())
    }
}

fn check_t(t: f64) -> Result<()> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::Domain(format!("t must be positive, got {t}")));
    }
    Ok(())
}

/// `f(1), ..., f(x_limit)`.
pub fn sign_prefix(oracle: &SignOracle, sieve: &Sieve, x_limit: u64) -> Result<Vec<i8>> {
    let mut out = Vec::with_capacity(x_limit as usize);
    let mut buf = Vec::new();
    for block in PrimeRange::new(1, x_limit)?.chunks(SIGN_BLOCK) {
        oracle.fill_block(sieve, block, &mut buf)?;
        out.extend_from_slice(&buf);
    }
    Ok(out)
}

/// Primes up to `limit` with their signs.
pub fn signed_primes(oracle: &SignOracle, sieve: &Sieve, limit: u64) -> Result<Vec<(u64, f64)>> {
    let primes = sieve.primes_in_range(PrimeRange::new(1, limit)?)?;
    Ok(primes
        .into_iter()
        .map(|p| (p, oracle.prime_sign_unchecked(p).as_f64()))
        .collect())
}

/// `sum_{n <= X} f(n) n^(-1/2-t)` over a sign prefix (`signs[i] = f(i+1)`).
pub fn dirichlet_from_signs(signs: &[i8], t: f64) -> f64 {
    let sigma = 0.5 + t;
    signs
        .iter()
        .enumerate()
        .map(|(i, &s)| s as f64 * ((i + 1) as f64).powf(-sigma))
        .collect::<CompensatedSum>()
        .value()
}

/// `int_1^X S_x x^(-1-t) dx = sum_{n <= X} f(n) n^(-1/2) (n^(-t) - X^(-t)) / t`.
///
/// `n^(-t) - X^(-t)` is formed as `X^(-t) expm1(t log(X/n))` so the difference
/// keeps its relative precision when `n` is close to `X` or `t` is small.
pub fn laplace_from_signs(signs: &[i8], t: f64) -> f64 {
    let x = signs.len() as f64;
    let x_pow = x.powf(-t);
    signs
        .iter()
        .enumerate()
        .map(|(i, &s)| {
            let n = (i + 1) as f64;
            s as f64 * term_weight((i + 1) as u64, CRITICAL_EXPONENT) * x_pow * (t * (x / n).ln()).exp_m1() / t
        })
        .collect::<CompensatedSum>()
        .value()
}

/// `S_X = sum_{n <= X} f(n)/sqrt(n)`, bit-identical to the census value.
pub fn partial_sum_from_signs(signs: &[i8]) -> f64 {
    signs
        .iter()
        .enumerate()
        .map(|(i, &s)| s as f64 * term_weight((i + 1) as u64, CRITICAL_EXPONENT))
        .collect::<CompensatedSum>()
        .value()
}

/// Truncated Dirichlet series `sum_{n <= X} f(n) n^(-1/2-t)`.
pub fn dirichlet_sum(oracle: &SignOracle, sieve: &Sieve, t: f64, spec: &TruncationSpec) -> Result<f64> {
    check_t(t)?;
    spec.check(sieve)?;
    Ok(dirichlet_from_signs(&sign_prefix(oracle, sieve, spec.x_limit)?, t))
}

/// The transform `F(t)` truncated at `X`: `int_1^X S_x x^(-1-t) dx`, exact for
/// the step function `S_x`.
pub fn laplace_transform(oracle: &SignOracle, sieve: &Sieve, t: f64, spec: &TruncationSpec) -> Result<f64> {
    check_t(t)?;
    spec.check(sieve)?;
    Ok(laplace_from_signs(&sign_prefix(oracle, sieve, spec.x_limit)?, t))
}

/// Both sides of the truncated integration-by-parts identity
/// `F_X(t) = (D_X(t) - X^(-t) S_X) / t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IdentityCheck {
    pub t: f64,
    pub x_limit: u64,
    pub laplace: f64,
    pub dirichlet: f64,
    pub s_x: f64,
    /// `|laplace - (dirichlet - X^-t S_X)/t| / |laplace|`.
    pub residual: f64,
}

pub fn verify_identity(oracle: &SignOracle, sieve: &Sieve, t: f64, x_limit: u64) -> Result<IdentityCheck> {
    check_t(t)?;
    let spec = TruncationSpec::new(x_limit, 2)?;
    spec.check(sieve)?;
    let signs = sign_prefix(oracle, sieve, x_limit)?;
    Ok(identity_from_signs(&signs, t))
}

pub fn identity_from_signs(signs: &[i8], t: f64) -> IdentityCheck {
    let laplace = laplace_from_signs(signs, t);
    let dirichlet = dirichlet_from_signs(signs, t);
    let s_x = partial_sum_from_signs(signs);
    let x = signs.len() as f64;
    let rhs = (dirichlet - x.powf(-t) * s_x) / t;
    IdentityCheck {
        t,
        x_limit: signs.len() as u64,
        laplace,
        dirichlet,
        s_x,
        residual: (laplace - rhs).abs() / laplace.abs(),
    }
}

/// `sum_{p <= P} -log(1 - f(p) p^(-1/2-t))`, the log of the truncated Euler product.
pub fn euler_product_log(oracle: &SignOracle, sieve: &Sieve, t: f64, spec: &TruncationSpec) -> Result<f64> {
    check_t(t)?;
    spec.check(sieve)?;
    let primes = signed_primes(oracle, sieve, spec.prime_limit)?;
    Ok(euler_log_from_primes(&primes, t))
}

fn euler_log_from_primes(primes: &[(u64, f64)], t: f64) -> f64 {
    let sigma = 0.5 + t;
    primes
        .iter()
        .map(|&(p, s)| -(-s * (p as f64).powf(-sigma)).ln_1p())
        .collect::<CompensatedSum>()
        .value()
}

/// Truncated Euler product against the truncated Dirichlet series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EulerComparison {
    pub t: f64,
    pub prime_limit: u64,
    pub x_limit: u64,
    pub log_product: f64,
    pub product: f64,
    pub dirichlet: f64,
    /// Bound on `|sum_{n > X} f(n) n^(-1/2-t)|`; infinite when `t <= 1/2`.
    pub dirichlet_tail: f64,
    /// Bound on `|prod_p - prod_{p <= P}|`; infinite when `t <= 1/2`.
    pub product_tail: f64,
    pub difference: f64,
    /// Whether `difference` fits within the two tails. Only meaningful for
    /// `t > 1/2`, where both series converge absolutely.
    pub within_bounds: bool,
}

/// Both truncations approximate the same limit when `1/2 + t > 1`.
pub fn euler_vs_dirichlet(
    oracle: &SignOracle,
    sieve: &Sieve,
    t: f64,
    spec: &TruncationSpec,
) -> Result<EulerComparison> {
    check_t(t)?;
    spec.check(sieve)?;
    let log_product = euler_product_log(oracle, sieve, t, spec)?;
    let dirichlet = dirichlet_sum(oracle, sieve, t, spec)?;
    let product = log_product.exp();
    let sigma = 0.5 + t;
    let (dirichlet_tail, product_tail) = if sigma > 1.0 {
        let x = spec.x_limit as f64;
        let p = spec.prime_limit as f64;
        // sum_{n > Y} n^-sigma <= Y^(1-sigma)/(sigma-1)
        let d_tail = x.powf(1.0 - sigma) / (sigma - 1.0);
        let log_tail = p.powf(1.0 - sigma) / ((sigma - 1.0) * (1.0 - p.powf(-sigma)));
        (d_tail, product * log_tail.exp_m1())
    } else {
        (f64::INFINITY, f64::INFINITY)
    };
    let difference = (product - dirichlet).abs();
    let rounding = 1e3 * UNIT_ROUNDOFF * (product.abs() + dirichlet.abs());
    Ok(EulerComparison {
        t,
        prime_limit: spec.prime_limit,
        x_limit: spec.x_limit,
        log_product,
        product,
        dirichlet,
        dirichlet_tail,
        product_tail,
        difference,
        within_bounds: sigma > 1.0 && difference <= dirichlet_tail + product_tail + rounding,
    })
}

/// Residue of the two-term expansion
/// `log prod = sum f(p) p^-s + 1/2 sum p^-2s + residue` and the universal bound
/// `P(3/2) / (3 (1 - 2^(-1/2)))` on it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExpansionResidue {
    pub t: f64,
    pub log_product: f64,
    pub linear: f64,
    pub quadratic: f64,
    pub residue: f64,
    pub bound: f64,
}

pub fn euler_expansion_residue(
    oracle: &SignOracle,
    sieve: &Sieve,
    t: f64,
    spec: &TruncationSpec,
) -> Result<ExpansionResidue> {
    check_t(t)?;
    spec.check(sieve)?;
    let primes = signed_primes(oracle, sieve, spec.prime_limit)?;
    let sigma = 0.5 + t;
    let log_product = euler_log_from_primes(&primes, t);
    let linear = compensated(primes.iter().map(|&(p, s)| s * (p as f64).powf(-sigma)));
    let quadratic = 0.5 * compensated(primes.iter().map(|&(p, _)| (p as f64).powf(-2.0 * sigma)));
    let p32 = prime_zeta(1.5)?;
    let bound = (p32.value + p32.tail_bound) / (3.0 * (1.0 - 0.5f64.sqrt()));
    Ok(ExpansionResidue {
        t,
        log_product,
        linear,
        quadratic,
        residue: log_product - linear - quadratic,
        bound,
    })
}

fn compensated<I: Iterator<Item = f64>>(it: I) -> f64 {
    it.collect::<CompensatedSum>().value()
}

fn check_r_t(t: f64) -> Result<()> {
    if !(t > 0.0 && t < 0.5) {
        return Err(Error::Domain(format!("t must lie in (0, 1/2), got {t}")));
    }
    Ok(())
}

/// `p^(-1/2-t) - p^(-1/2-2t)`, the weight of `f(p)` in `R(t)`.
#[inline]
pub fn r_weight(p: u64, t: f64) -> f64 {
    let lp = (p as f64).ln();
    -(-(0.5 + t) * lp).exp() * (-t * lp).exp_m1()
}

/// `R(t)` from explicit `(p, f(p))` pairs.
pub fn r_statistic_from_signs<I: IntoIterator<Item = (u64, f64)>>(signed: I, t: f64) -> Result<f64> {
    check_r_t(t)?;
    Ok(r_accumulate(signed, t).value())
}

fn r_accumulate<I: IntoIterator<Item = (u64, f64)>>(signed: I, t: f64) -> CompensatedSum {
    signed.into_iter().map(|(p, s)| s * r_weight(p, t)).collect()
}

/// `R(t) = sum_{p <= P} f(p) (p^(-1/2-t) - p^(-1/2-2t))`.
pub fn r_statistic(oracle: &SignOracle, sieve: &Sieve, t: f64, spec: &TruncationSpec) -> Result<f64> {
    Ok(r_statistic_range(oracle, sieve, t, PrimeRange::new(1, spec.prime_limit)?)?.value())
}

/// Partial `R(t)` over the primes of `range`, as a mergeable accumulator.
pub fn r_statistic_range(oracle: &SignOracle, sieve: &Sieve, t: f64, range: PrimeRange) -> Result<CompensatedSum> {
    check_r_t(t)?;
    let primes = sieve.primes_in_range(range)?;
    Ok(r_accumulate(
        primes.into_iter().map(|p| (p, oracle.prime_sign_unchecked(p).as_f64())),
        t,
    ))
}

/// `max_p (p^(-1/2-t) - p^(-1/2-2t))` over `primes`.
pub fn max_r_weight(primes: &[u64], t: f64) -> f64 {
    primes.iter().map(|&p| r_weight(p, t)).fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RatioRow {
    pub t: f64,
    pub f_t: f64,
    pub f_2t: f64,
    /// `F(t) > F(2t)/2`.
    pub flag: bool,
    /// `X^(-t) |S_X| / |F(t)|`.
    pub truncation_indicator: f64,
    pub truncation_limited: bool,
}

/// `F(t)` against `F(2t)` across a grid, each row with its truncation indicator.
pub fn f_ratio_scan(oracle: &SignOracle, sieve: &Sieve, grid: &TGrid, spec: &TruncationSpec) -> Result<Vec<RatioRow>> {
    spec.check(sieve)?;
    let signs = sign_prefix(oracle, sieve, spec.x_limit)?;
    let s_x = partial_sum_from_signs(&signs);
    let x = spec.x_limit as f64;
    Ok(grid
        .pairs()
        .map(|(t, t2)| {
            let f_t = laplace_from_signs(&signs, t);
            let f_2t = laplace_from_signs(&signs, t2);
            let indicator = x.powf(-t) * s_x.abs() / f_t.abs();
            RatioRow {
                t,
                f_t,
                f_2t,
                flag: f_t > f_2t / 2.0,
                truncation_indicator: indicator,
                truncation_limited: indicator > TRUNCATION_LIMIT || indicator.is_nan(),
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sieve() -> Sieve {
        Sieve::new(1_000_000).unwrap()
    }

    fn spec(x: u64, p: u64) -> TruncationSpec {
        TruncationSpec::new(x, p).unwrap()
    }

    #[test]
    fn dirichlet_examples() {
        let s = sieve();
        let h = dirichlet_sum(&SignOracle::all_plus(), &s, 0.5, &spec(10, 2)).unwrap();
        assert!((h - 2.928_968_253_968_254).abs() < 1e-15);
        for o in [SignOracle::random(1), SignOracle::all_minus()] {
            assert_eq!(dirichlet_sum(&o, &s, 0.3, &spec(1, 2)).unwrap(), 1.0);
        }
        assert!(matches!(
            dirichlet_sum(&SignOracle::random(1), &s, 0.0, &spec(10, 2)),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            dirichlet_sum(&SignOracle::random(1), &s, 0.1, &spec(2_000_000, 2)),
            Err(Error::Resource(_))
        ));
    }

    #[test]
    fn dirichlet_matches_per_term_loop() {
        let s = sieve();
        let o = SignOracle::random(31337);
        let fast = dirichlet_sum(&o, &s, 0.2, &spec(1000, 2)).unwrap();
        let mut naive = 0.0;
        for n in 1..=1000u64 {
            naive += o.value(&s, n).unwrap().as_f64() / (n as f64).powf(0.7);
        }
        assert!((fast - naive).abs() < 1e-13);
    }

    #[test]
    fn laplace_examples() {
        let s = sieve();
        let plus = SignOracle::all_plus();
        let f = laplace_transform(&plus, &s, 1.0, &spec(2, 2)).unwrap();
        assert!((f - 0.5).abs() < 1e-15);
        let f1 = laplace_transform(&plus, &s, 1.0, &spec(100, 2)).unwrap();
        let f2 = laplace_transform(&plus, &s, 2.0, &spec(100, 2)).unwrap();
        assert!(f2 < f1);
        let chk = verify_identity(&SignOracle::random(4), &s, 0.3, 100).unwrap();
        assert!(chk.residual < 1e-12, "{chk:?}");
    }

    #[test]
    fn laplace_matches_step_integral() {
        // independent route: integrate S_x exactly on each [n, n+1)
        let s = sieve();
        let o = SignOracle::random(8);
        let x = 5000u64;
        for t in [0.1, 0.7] {
            let mut acc = 0.0;
            let mut s_n = 0.0;
            for n in 1..x {
                s_n += o.value(&s, n).unwrap().as_f64() / (n as f64).sqrt();
                let a = n as f64;
                acc += s_n * (a.powf(-t) - (a + 1.0).powf(-t)) / t;
            }
            let f = laplace_transform(&o, &s, t, &spec(x, 2)).unwrap();
            assert!((f - acc).abs() < 1e-9 * f.abs().max(1.0), "t={t}: {f} vs {acc}");
        }
    }

    #[test]
    fn euler_examples() {
        let s = sieve();
        let l = euler_product_log(&SignOracle::all_minus(), &s, 0.3, &spec(10, 1000)).unwrap();
        assert!(l < 0.0);
        let cmp = euler_vs_dirichlet(&SignOracle::random(12), &s, 1.0, &spec(100_000, 100_000)).unwrap();
        assert!(cmp.within_bounds, "{cmp:?}");
        let weak = euler_vs_dirichlet(&SignOracle::random(12), &s, 0.3, &spec(1000, 1000)).unwrap();
        assert!(!weak.within_bounds);
        assert!(weak.dirichlet_tail.is_infinite());
    }

    #[test]
    fn expansion_residue_bounded() {
        let s = sieve();
        for t in [0.01, 0.1, 1.0] {
            for o in [SignOracle::random(3), SignOracle::all_minus(), SignOracle::all_plus()] {
                let r = euler_expansion_residue(&o, &s, t, &spec(10, 100_000)).unwrap();
                assert!(r.residue.abs() <= r.bound, "{r:?}");
            }
        }
    }

    #[test]
    fn r_statistic_examples() {
        let r = r_statistic_from_signs([(2, 1.0), (3, -1.0), (5, 1.0)], 0.25).unwrap();
        // 2^-3/4 - 2^-1 - 3^-3/4 + 3^-1 + 5^-3/4 - 5^-1
        assert!((r - 0.088_315_309_428_107_11).abs() < 1e-15, "{r}");
        let s = sieve();
        for t in [0.01, 0.2, 0.49] {
            assert!(r_statistic(&SignOracle::all_plus(), &s, t, &spec(2, 10_000)).unwrap() > 0.0);
        }
        let primes = s.primes_in_range(PrimeRange::new(1, 1_000_000).unwrap()).unwrap();
        assert!(max_r_weight(&primes, 0.01) < max_r_weight(&primes, 0.1));
        assert!(r_statistic_from_signs([(2, 1.0)], 0.5).is_err());
    }

    #[test]
    fn r_partition_linearity() {
        let s = sieve();
        let o = SignOracle::random(5150);
        let t = 0.1;
        let whole = r_statistic_range(&o, &s, t, PrimeRange::new(1, 200_000).unwrap()).unwrap();
        let mut a = r_statistic_range(&o, &s, t, PrimeRange::new(1, 77_777).unwrap()).unwrap();
        let b = r_statistic_range(&o, &s, t, PrimeRange::new(77_778, 200_000).unwrap()).unwrap();
        a.merge(&b);
        assert_eq!(a.count(), whole.count());
        assert!((a.value() - whole.value()).abs() <= whole.error_bound() + a.error_bound());
    }

    #[test]
    fn ratio_scan_all_plus() {
        let s = sieve();
        let grid = TGrid::new(vec![0.25, 0.1, 0.0625]).unwrap();
        let rows = f_ratio_scan(&SignOracle::all_plus(), &s, &grid, &spec(10_000, 2)).unwrap();
        assert!(rows.iter().all(|r| r.flag));
        assert!(rows.windows(2).all(|w| w[1].f_t > w[0].f_t));
    }
}
