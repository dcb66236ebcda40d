//! Ensemble experiments over independent seeds.
//!
//! Sample `i` uses the oracle seeded with `derive_seed(base_seed, i)`, so any
//! single member can be reproduced on its own. Samples are evaluated in
//! parallel and collected by index; every statistic is then computed by one
//! sequential pass, which makes results independent of the worker count.
//!
//! Statistics are compared with truncated analytic quantities (direct prime
//! sums up to the run's `P`), never with their `t -> 0` limits.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::analytic::TGrid;
use crate::census::{crossings_at_checkpoints, term_weight, CRITICAL_EXPONENT};
use crate::error::{Error, Result};
use crate::parallel;
use crate::sampler::{derive_seed, Mode, SignOracle};
use crate::sieve::{PrefixFactorTable, PrimeRange, Sieve};
use crate::stats;
use crate::sum::compensated_sum;
use crate::transforms::{r_weight, TruncationSpec};

/// Minimum ensemble size for any statistical statement in random mode.
pub const MIN_SAMPLES: usize = 100;

/// Width of every acceptance band, in standard errors.
pub const BAND_SIGMAS: f64 = 3.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleConfig {
    pub base_seed: u64,
    pub n_samples: usize,
    pub t_grid: TGrid,
    pub spec: TruncationSpec,
    pub x_checkpoints: Vec<u64>,
    pub workers: usize,
    /// `Random` for real ensembles; the deterministic modes give control runs.
    pub mode: Mode,
}

impl EnsembleConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_samples == 0 {
            return Err(Error::Config("n_samples must be >= 1".into()));
        }
        if self.mode.is_random() && self.n_samples < MIN_SAMPLES {
            return Err(Error::Config(format!(
                "random ensembles need at least {MIN_SAMPLES} samples, got {}",
                self.n_samples
            )));
        }
        if self.workers == 0 {
            return Err(Error::Config("workers must be >= 1".into()));
        }
        Ok(())
    }

    pub fn oracle(&self, index: usize) -> SignOracle {
        SignOracle::new(derive_seed(self.base_seed, index as u64), self.mode)
    }
}

/// Per-sample prime sums for every grid entry: `R(t)` and the linear sum
/// `sum_{p <= P} f(p) p^(-1/2-t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RSamples {
    pub t: Vec<f64>,
    pub prime_limit: u64,
    /// `r[g][i]` is `R(t_g)` for sample `i`.
    pub r: Vec<Vec<f64>>,
    /// `linear[g][i]` is `sum f(p) p^(-1/2-t_g)` for sample `i`.
    pub linear: Vec<Vec<f64>>,
    /// Truncated `sum_{p <= P} w_{t_g}(p) w_{t_h}(p)`.
    pub analytic_cov: Vec<Vec<f64>>,
    /// Truncated `sum_{p <= P} p^(-1-2t_g)`.
    pub second_moment: Vec<f64>,
}

// Fixed-order four-lane dot product; vectorizes and is deterministic.
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut lanes = [0.0f64; 4];
    let chunks = a.len() / 4;
    for c in 0..chunks {
        for l in 0..4 {
            lanes[l] += a[4 * c + l] * b[4 * c + l];
        }
    }
    let mut tail = 0.0;
    for k in 4 * chunks..a.len() {
        tail += a[k] * b[k];
    }
    (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]) + tail
}

impl RSamples {
    pub fn generate(config: &EnsembleConfig, sieve: &Sieve) -> Result<Self> {
        config.validate()?;
        let p_max = config.spec.prime_limit;
        if p_max > sieve.capacity() {
            return Err(Error::Resource(format!(
                "prime_limit {p_max} exceeds sieve capacity {}",
                sieve.capacity()
            )));
        }
        let t: Vec<f64> = config.t_grid.entries().to_vec();
        if let Some(bad) = t.iter().find(|&&t| !(t > 0.0 && t < 0.5)) {
            return Err(Error::Domain(format!("R(t) needs t in (0, 1/2), got {bad}")));
        }
        let primes = sieve.primes_in_range(PrimeRange::new(1, p_max)?)?;
        let weights: Vec<Vec<f64>> = t
            .iter()
            .map(|&t| primes.iter().map(|&p| r_weight(p, t)).collect())
            .collect();
        let lin_weights: Vec<Vec<f64>> = t
            .iter()
            .map(|&t| primes.iter().map(|&p| (p as f64).powf(-0.5 - t)).collect())
            .collect();

        let g = t.len();
        let mut analytic_cov = vec![vec![0.0; g]; g];
        for a in 0..g {
            for b in a..g {
                let c = compensated_sum(weights[a].iter().zip(&weights[b]).map(|(x, y)| x * y));
                analytic_cov[a][b] = c;
                analytic_cov[b][a] = c;
            }
        }
        let second_moment = lin_weights
            .iter()
            .map(|w| compensated_sum(w.iter().map(|x| x * x)))
            .collect();

        let pool = parallel::pool(config.workers)?;
        let per_sample: Vec<(Vec<f64>, Vec<f64>)> = pool.install(|| {
            (0..config.n_samples)
                .into_par_iter()
                .map_init(Vec::new, |signs: &mut Vec<f64>, i| {
                    let oracle = config.oracle(i);
                    signs.clear();
                    signs.extend(primes.iter().map(|&p| oracle.prime_sign_unchecked(p).as_f64()));
                    let r = weights.iter().map(|w| dot(signs, w)).collect();
                    let lin = lin_weights.iter().map(|w| dot(signs, w)).collect();
                    (r, lin)
                })
                .collect()
        });

        let mut r = vec![Vec::with_capacity(config.n_samples); g];
        let mut linear = vec![Vec::with_capacity(config.n_samples); g];
        for (rs, ls) in per_sample {
            for k in 0..g {
                r[k].push(rs[k]);
                linear[k].push(ls[k]);
            }
        }
        Ok(Self {
            t,
            prime_limit: p_max,
            r,
            linear,
            analytic_cov,
            second_moment,
        })
    }

    pub fn n_samples(&self) -> usize {
        self.r.first().map_or(0, Vec::len)
    }

    fn index_of(&self, t: f64) -> Result<usize> {
        self.t
            .iter()
            .position(|&x| x == t)
            .ok_or_else(|| Error::Config(format!("t = {t} is not on the ensemble grid")))
    }

    pub fn stats(&self) -> EnsembleStats {
        let n = self.n_samples();
        let per_t = self
            .t
            .iter()
            .enumerate()
            .map(|(g, &t)| {
                let m = stats::moments(&self.r[g]);
                let v_trunc = self.analytic_cov[g][g];
                let tail = self.tail_at(g);
                TStats {
                    t,
                    prime_limit: self.prime_limit,
                    n_samples: n,
                    mean: m.mean,
                    var_empirical: m.variance,
                    var_analytic_trunc: v_trunc,
                    skewness: m.skewness,
                    ks: stats::ks_distance_gaussian(&self.r[g], v_trunc),
                    tail_freq: tail.frequency,
                    chebyshev_bound: tail.chebyshev_bound,
                }
            })
            .collect();
        EnsembleStats {
            prime_limit: self.prime_limit,
            n_samples: n,
            per_t,
            covariance: stats::covariance_matrix(&self.r),
            analytic_covariance: self.analytic_cov.clone(),
        }
    }

    fn tail_at(&self, g: usize) -> TailReport {
        let t = self.t[g];
        let threshold = t.ln();
        let n = self.n_samples();
        let hits = self.linear[g].iter().filter(|&&x| x < threshold).count();
        let frequency = hits as f64 / n as f64;
        TailReport {
            t,
            prime_limit: self.prime_limit,
            n_samples: n,
            threshold,
            frequency,
            chebyshev_bound: self.second_moment[g] / (threshold * threshold),
            band: BAND_SIGMAS * (frequency * (1.0 - frequency) / n as f64).sqrt(),
        }
    }

    pub fn tail(&self, t: f64) -> Result<TailReport> {
        Ok(self.tail_at(self.index_of(t)?))
    }

    /// Every pair `(t_a, t_b)` with `a <= b`, diagonal included.
    pub fn decorrelation(&self) -> Vec<PairReport> {
        let mut out = Vec::new();
        for a in 0..self.t.len() {
            for b in a..self.t.len() {
                let (x, y) = (&self.r[a], &self.r[b]);
                let empirical = stats::covariance(x, y);
                let se = stats::covariance_standard_error(x, y);
                let analytic = self.analytic_cov[a][b];
                let (vx, vy) = (stats::covariance(x, x), stats::covariance(y, y));
                let (t1, t2) = (self.t[a], self.t[b]);
                out.push(PairReport {
                    t1,
                    t2,
                    empirical_cov: empirical,
                    analytic_cov_trunc: analytic,
                    standard_error: se,
                    within_band: (empirical - analytic).abs() <= BAND_SIGMAS * se,
                    correlation: empirical / (vx * vy).sqrt(),
                    log_approx: if a == b {
                        crate::analytic::variance_log_approx(t1)
                    } else {
                        crate::analytic::covariance_log_approx(t1, t2)
                    },
                });
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TStats {
    pub t: f64,
    pub prime_limit: u64,
    pub n_samples: usize,
    pub mean: f64,
    pub var_empirical: f64,
    pub var_analytic_trunc: f64,
    pub skewness: f64,
    /// KS distance of the `R(t)` sample to `N(0, var_analytic_trunc)`.
    pub ks: f64,
    pub tail_freq: f64,
    pub chebyshev_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleStats {
    pub prime_limit: u64,
    pub n_samples: usize,
    pub per_t: Vec<TStats>,
    /// Empirical covariance of `R` across the grid.
    pub covariance: Vec<Vec<f64>>,
    /// Truncated analytic covariance across the grid.
    pub analytic_covariance: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairReport {
    pub t1: f64,
    pub t2: f64,
    pub empirical_cov: f64,
    pub analytic_cov_trunc: f64,
    pub standard_error: f64,
    pub within_band: bool,
    pub correlation: f64,
    /// Mertens-line approximation of the untruncated covariance.
    pub log_approx: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailReport {
    pub t: f64,
    pub prime_limit: u64,
    pub n_samples: usize,
    /// `-log(1/t)`.
    pub threshold: f64,
    /// Fraction of samples with `sum f(p) p^(-1/2-t) < threshold`.
    pub frequency: f64,
    /// `sum_{p <= P} p^(-1-2t) / log^2(1/t)`.
    pub chebyshev_bound: f64,
    /// Three-sigma binomial band on `frequency`.
    pub band: f64,
}

impl TailReport {
    pub fn within_bound(&self) -> bool {
        self.frequency <= self.chebyshev_bound + self.band
    }
}

/// Moments, covariance and KS distance of `R(t)` across the ensemble.
pub fn ensemble_r(config: &EnsembleConfig, sieve: &Sieve) -> Result<EnsembleStats> {
    Ok(RSamples::generate(config, sieve)?.stats())
}

/// Empirical against truncated analytic covariance for every grid pair.
pub fn decorrelation_check(config: &EnsembleConfig, sieve: &Sieve) -> Result<Vec<PairReport>> {
    Ok(RSamples::generate(config, sieve)?.decorrelation())
}

/// Frequency of `sum_{p <= P} f(p) p^(-1/2-t) < -log(1/t)` and its Chebyshev bound.
pub fn tail_probability(config: &EnsembleConfig, sieve: &Sieve, t: f64) -> Result<TailReport> {
    let cfg = EnsembleConfig {
        t_grid: TGrid::new(vec![t])?,
        ..config.clone()
    };
    RSamples::generate(&cfg, sieve)?.tail(t)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CensusHistogram {
    pub x: u64,
    pub n_samples: usize,
    /// crossing count -> number of samples
    pub histogram: BTreeMap<u64, usize>,
    pub median: f64,
    pub frac_ge1: f64,
    pub frac_ge2: f64,
    pub frac_ge5: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CensusEnsemble {
    pub checkpoints: Vec<CensusHistogram>,
    /// `counts[i][c]`: crossings of sample `i` up to checkpoint `c`.
    pub counts: Vec<Vec<u64>>,
}

/// Distribution over seeds of the number of sign changes of `S_x` up to each checkpoint.
pub fn ensemble_census(config: &EnsembleConfig, sieve: &Sieve) -> Result<CensusEnsemble> {
    config.validate()?;
    let mut checkpoints = config.x_checkpoints.clone();
    checkpoints.sort_unstable();
    checkpoints.dedup();
    let x_max = *checkpoints
        .last()
        .ok_or_else(|| Error::Config("at least one census checkpoint is required".into()))?;
    if checkpoints[0] < 1 {
        return Err(Error::Config("checkpoints must be >= 1".into()));
    }
    if x_max > sieve.capacity() {
        return Err(Error::Resource(format!(
            "checkpoint {x_max} exceeds sieve capacity {}",
            sieve.capacity()
        )));
    }
    let table = PrefixFactorTable::new(sieve, x_max)?;
    let weights: Vec<f64> = (0..=x_max)
        .map(|n| if n == 0 { 0.0 } else { term_weight(n, CRITICAL_EXPONENT) })
        .collect();

    let pool = parallel::pool(config.workers)?;
    let counts: Vec<Vec<u64>> = pool.install(|| {
        (0..config.n_samples)
            .into_par_iter()
            .map_init(
                || (Vec::new(), Vec::new()),
                |(ps, f): &mut (Vec<i8>, Vec<i8>), i| {
                    config.oracle(i).fill_prefix(&table, ps, f);
                    crossings_at_checkpoints(f, &weights, &checkpoints, CRITICAL_EXPONENT)
                },
            )
            .collect()
    });

    let n = config.n_samples as f64;
    let hists = checkpoints
        .iter()
        .enumerate()
        .map(|(c, &x)| {
            let col: Vec<u64> = counts.iter().map(|row| row[c]).collect();
            let mut histogram = BTreeMap::new();
            for &k in &col {
                *histogram.entry(k).or_insert(0) += 1;
            }
            let frac = |m: u64| col.iter().filter(|&&k| k >= m).count() as f64 / n;
            CensusHistogram {
                x,
                n_samples: config.n_samples,
                histogram,
                median: stats::median_u64(&col),
                frac_ge1: frac(1),
                frac_ge2: frac(2),
                frac_ge5: frac(5),
            }
        })
        .collect();
    Ok(CensusEnsemble {
        checkpoints: hists,
        counts,
    })
}
