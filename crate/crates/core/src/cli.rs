//! Command-line front end.
//!
//! Every subcommand writes CSV (default) or JSON to stdout or `--out`, and a
//! JSON [`RunManifest`] to stderr or a sidecar file. Primary output depends
//! only on the arguments, never on `--workers`.

use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::analytic::{self, parse_t, TGrid};
use crate::census::{default_checkpoints, run_census, CensusOptions};
use crate::error::{Error, Result};
use crate::montecarlo::{ensemble_census, EnsembleConfig, RSamples};
use crate::sampler::{parse_seed, Mode, SignOracle};
use crate::sieve::{PrimeRange, Sieve};
use crate::transforms::{self, TruncationSpec};

#[derive(Debug, Parser)]
#[command(
    name = "signlab",
    version,
    about = "Sign changes and transform diagnostics for random multiplicative functions"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub opts: Opts,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Sign changes of S_x = sum f(n)/sqrt(n) with checkpoint rows.
    Census,
    /// Step-integral transform against the Dirichlet series identity.
    VerifyIdentity,
    /// Truncated Euler product against the Dirichlet series.
    Euler,
    /// The prime statistic R(t) for one seed.
    Rstat,
    /// F(t) against F(2t) over a t grid.
    Fscan,
    /// Exact variance of R(t) against its log approximation.
    Variance,
    /// Exact covariance of R along consecutive grid entries.
    Covariance,
    /// Ensemble moments and KS distance of R(t).
    Clt,
    /// Ensemble tail frequency against the Chebyshev bound.
    Tail,
    /// Ensemble distribution of crossing counts.
    EnsembleCensus,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Census => "census",
            Command::VerifyIdentity => "verify-identity",
            Command::Euler => "euler",
            Command::Rstat => "rstat",
            Command::Fscan => "fscan",
            Command::Variance => "variance",
            Command::Covariance => "covariance",
            Command::Clt => "clt",
            Command::Tail => "tail",
            Command::EnsembleCensus => "ensemble-census",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Opts {
    /// Base seed, decimal or 0x-prefixed hex.
    #[arg(long, global = true, default_value = "0")]
    pub seed: String,
    /// random, all_plus or all_minus (Liouville).
    #[arg(long, global = true, default_value = "random")]
    pub mode: String,
    /// Ensemble size.
    #[arg(long, global = true, default_value_t = 1000)]
    pub samples: usize,
    /// Comma-separated t values (decimal, 2^-k or 2^-2^k).
    #[arg(long, global = true)]
    pub t: Option<String>,
    /// t grid such as "2^-2^i:i=1..4" or "0.25,0.1".
    #[arg(long, global = true)]
    pub t_grid: Option<String>,
    #[arg(long, global = true, default_value_t = 100_000)]
    pub prime_limit: u64,
    #[arg(long, global = true, default_value_t = 100_000)]
    pub x_limit: u64,
    /// Comma-separated census checkpoints; powers of ten by default.
    #[arg(long, global = true)]
    pub checkpoints: Option<String>,
    #[arg(long, global = true, default_value_t = 1)]
    pub workers: usize,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Primary output file; a `<out>.manifest.json` sidecar is written next to it.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Explicit manifest path.
    #[arg(long, global = true)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub subcommand: &'static str,
    pub params: Opts,
    pub version: &'static str,
    pub duration_secs: f64,
}

/// Runs with process stdio and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    run_with(args, &mut io::stdout().lock(), &mut io::stderr().lock())
}

pub fn run_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(stderr, "{}", e.render());
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(&cli, stdout, stderr) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "signlab: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    let start = Instant::now();
    let body = produce(cli.command, &cli.opts)?;
    match &cli.opts.out {
        Some(path) => write_file(path, &body)?,
        None => stdout.write_all(&body).map_err(io_err)?,
    }
    let manifest = RunManifest {
        subcommand: cli.command.name(),
        params: cli.opts.clone(),
        version: env!("CARGO_PKG_VERSION"),
        duration_secs: start.elapsed().as_secs_f64(),
    };
    let mut text = serde_json::to_vec_pretty(&manifest).map_err(|e| Error::Resource(e.to_string()))?;
    text.push(b'\n');
    let sidecar = cli.opts.manifest.clone().or_else(|| {
        cli.opts.out.as_ref().map(|p| {
            let mut s = p.clone().into_os_string();
            s.push(".manifest.json");
            PathBuf::from(s)
        })
    });
    match sidecar {
        Some(path) => write_file(&path, &text),
        None => stderr.write_all(&text).map_err(io_err),
    }
}

fn io_err(e: io::Error) -> Error {
    Error::Resource(e.to_string())
}

fn write_file(path: &PathBuf, bytes: &[u8]) -> Result<()> {
    File::create(path)
        .and_then(|mut f| f.write_all(bytes))
        .map_err(|e| Error::Resource(format!("{}: {e}", path.display())))
}

struct Ctx<'a> {
    opts: &'a Opts,
    seed: u64,
    mode: Mode,
}

impl Ctx<'_> {
    fn oracle(&self) -> SignOracle {
        SignOracle::new(self.seed, self.mode)
    }

    fn spec(&self) -> Result<TruncationSpec> {
        TruncationSpec::new(self.opts.x_limit, self.opts.prime_limit)
    }

    fn sieve(&self, limit: u64) -> Result<Sieve> {
        Sieve::new(limit.max(self.opts.x_limit).max(self.opts.prime_limit).max(2))
    }

    fn t_values(&self, default: &[f64]) -> Result<Vec<f64>> {
        if let Some(t) = &self.opts.t {
            t.split(',').filter(|s| !s.trim().is_empty()).map(parse_t).collect()
        } else if let Some(g) = &self.opts.t_grid {
            Ok(TGrid::parse(g)?.entries().to_vec())
        } else {
            Ok(default.to_vec())
        }
    }

    fn grid(&self, default: &str) -> Result<TGrid> {
        match (&self.opts.t_grid, &self.opts.t) {
            (Some(g), _) => TGrid::parse(g),
            (None, Some(t)) => TGrid::parse(t),
            (None, None) => TGrid::parse(default),
        }
    }

    fn checkpoints(&self) -> Result<Option<Vec<u64>>> {
        let Some(list) = &self.opts.checkpoints else {
            return Ok(None);
        };
        list.split(',')
            .filter(|s| !s.trim().is_empty())
            .map(|s| {
                let s = s.trim().replace('_', "");
                let v = s
                    .parse::<f64>()
                    .map_err(|e| Error::Config(format!("bad checkpoint {s:?}: {e}")))?;
                if !(v >= 1.0 && v.fract() == 0.0 && v <= u64::MAX as f64) {
                    return Err(Error::Config(format!("bad checkpoint {s:?}")));
                }
                Ok(v as u64)
            })
            .collect::<Result<Vec<_>>>()
            .map(Some)
    }

    fn ensemble(&self, grid: TGrid) -> Result<EnsembleConfig> {
        Ok(EnsembleConfig {
            base_seed: self.seed,
            n_samples: self.opts.samples,
            t_grid: grid,
            spec: self.spec()?,
            x_checkpoints: self.checkpoints()?.unwrap_or_default(),
            workers: self.opts.workers,
            mode: self.mode,
        })
    }
}

#[derive(Serialize)]
struct CensusCsv {
    checkpoint_x: u64,
    #[serde(rename = "S_x")]
    s_x: f64,
    crossings_so_far: u64,
    min: f64,
    max: f64,
    rounding_bound: f64,
}

#[derive(Serialize)]
struct EulerCsv {
    t: f64,
    prime_limit: u64,
    x_limit: u64,
    log_product: f64,
    product: f64,
    dirichlet: f64,
    dirichlet_tail: f64,
    product_tail: f64,
    difference: f64,
    within_bounds: bool,
    expansion_residue: f64,
    residue_bound: f64,
}

#[derive(Serialize)]
struct RstatCsv {
    t: f64,
    prime_limit: u64,
    r: f64,
    max_weight: f64,
}

#[derive(Serialize)]
struct VarianceCsv {
    t: f64,
    exact: f64,
    log_approx: f64,
    difference: f64,
    tail_bound: f64,
}

#[derive(Serialize)]
struct CovarianceCsv {
    t1: f64,
    t2: f64,
    exact: f64,
    log_approx: f64,
    difference: f64,
    tail_bound: f64,
}

#[derive(Serialize)]
struct CltCsv {
    t: f64,
    #[serde(rename = "P")]
    prime_limit: u64,
    n_samples: usize,
    mean: f64,
    var_empirical: f64,
    var_analytic_trunc: f64,
    ks: f64,
    tail_freq: f64,
    chebyshev_bound: f64,
}

#[derive(Serialize)]
struct EnsembleCensusCsv {
    checkpoint_x: u64,
    n_samples: usize,
    median: f64,
    frac_ge1: f64,
    frac_ge2: f64,
    frac_ge5: f64,
    /// `count:samples` pairs separated by `;`.
    histogram: String,
}

fn csv_rows<R: Serialize>(rows: impl IntoIterator<Item = R>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row).map_err(|e| Error::Resource(e.to_string()))?;
    }
    w.into_inner().map_err(|e| Error::Resource(e.to_string()))
}

fn json<T: Serialize + ?Sized>(value: &T) -> Result<Vec<u8>> {
    let mut v = serde_json::to_vec_pretty(value).map_err(|e| Error::Resource(e.to_string()))?;
    v.push(b'\n');
    Ok(v)
}

fn emit<T, R, F>(format: Format, full: &T, to_csv: F) -> Result<Vec<u8>>
where
    T: Serialize + ?Sized,
    R: Serialize,
    F: FnOnce(&T) -> Vec<R>,
{
    match format {
        Format::Csv => csv_rows(to_csv(full)),
        Format::Json => json(full),
    }
}

/// Primary output bytes for one subcommand.
pub fn produce(command: Command, opts: &Opts) -> Result<Vec<u8>> {
    let ctx = Ctx {
        opts,
        seed: parse_seed(&opts.seed)?,
        mode: opts.mode.parse()?,
    };
    if opts.workers == 0 {
        return Err(Error::Config("workers must be >= 1".into()));
    }
    let fmt = opts.format;
    match command {
        Command::Census => {
            let x = opts.x_limit;
            let sieve = ctx.sieve(x)?;
            let checkpoints = ctx.checkpoints()?.unwrap_or_else(|| default_checkpoints(x));
            let report = run_census(
                ctx.oracle(),
                &sieve,
                x,
                &CensusOptions {
                    checkpoints,
                    workers: opts.workers,
                    ..Default::default()
                },
            )?;
            emit(fmt, &report, |r| {
                r.checkpoints
                    .iter()
                    .map(|c| CensusCsv {
                        checkpoint_x: c.x,
                        s_x: c.s_x,
                        crossings_so_far: c.crossings_so_far,
                        min: c.min,
                        max: c.max,
                        rounding_bound: c.rounding_bound,
                    })
                    .collect()
            })
        }
        Command::VerifyIdentity => {
            let ts = ctx.t_values(&[0.1, 0.3, 1.0])?;
            let sieve = ctx.sieve(opts.x_limit)?;
            let signs = transforms::sign_prefix(&ctx.oracle(), &sieve, opts.x_limit)?;
            let rows = ts
                .iter()
                .map(|&t| {
                    if !(t > 0.0 && t.is_finite()) {
                        return Err(Error::Domain(format!("t must be positive, got {t}")));
                    }
                    Ok(transforms::identity_from_signs(&signs, t))
                })
                .collect::<Result<Vec<_>>>()?;
            emit(fmt, &rows[..], |r| r.to_vec())
        }
        Command::Euler => {
            let ts = ctx.t_values(&[1.0])?;
            let spec = ctx.spec()?;
            let sieve = ctx.sieve(spec.x_limit.max(spec.prime_limit))?;
            let o = ctx.oracle();
            let rows = ts
                .iter()
                .map(|&t| {
                    let c = transforms::euler_vs_dirichlet(&o, &sieve, t, &spec)?;
                    let e = transforms::euler_expansion_residue(&o, &sieve, t, &spec)?;
                    Ok(EulerCsv {
                        t,
                        prime_limit: c.prime_limit,
                        x_limit: c.x_limit,
                        log_product: c.log_product,
                        product: c.product,
                        dirichlet: c.dirichlet,
                        dirichlet_tail: c.dirichlet_tail,
                        product_tail: c.product_tail,
                        difference: c.difference,
                        within_bounds: c.within_bounds,
                        expansion_residue: e.residue,
                        residue_bound: e.bound,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            match fmt {
                Format::Csv => csv_rows(rows),
                Format::Json => json(&rows),
            }
        }
        Command::Rstat => {
            let ts = ctx.t_values(&[0.25, 0.1, 0.0625])?;
            let spec = ctx.spec()?;
            let sieve = ctx.sieve(spec.prime_limit)?;
            let o = ctx.oracle();
            let primes = sieve.primes_in_range(PrimeRange::new(1, spec.prime_limit)?)?;
            let rows = ts
                .iter()
                .map(|&t| {
                    Ok(RstatCsv {
                        t,
                        prime_limit: spec.prime_limit,
                        r: transforms::r_statistic(&o, &sieve, t, &spec)?,
                        max_weight: transforms::max_r_weight(&primes, t),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            match fmt {
                Format::Csv => csv_rows(rows),
                Format::Json => json(&rows),
            }
        }
        Command::Fscan => {
            let grid = ctx.grid("0.25,0.0625")?;
            let spec = ctx.spec()?;
            let sieve = ctx.sieve(spec.x_limit)?;
            let rows = transforms::f_ratio_scan(&ctx.oracle(), &sieve, &grid, &spec)?;
            emit(fmt, &rows[..], |r| r.to_vec())
        }
        Command::Variance => {
            let ts = ctx.t_values(&[0.1, 0.01, 0.001, 0.0001])?;
            let rows = ts
                .iter()
                .map(|&t| {
                    let v = analytic::r_variance(t)?;
                    let approx = analytic::variance_log_approx(t);
                    Ok(VarianceCsv {
                        t,
                        exact: v.value,
                        log_approx: approx,
                        difference: v.value - approx,
                        tail_bound: v.tail_bound,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            match fmt {
                Format::Csv => csv_rows(rows),
                Format::Json => json(&rows),
            }
        }
        Command::Covariance => {
            let grid = ctx.grid("2^-2^i:i=1..4")?;
            if grid.len() < 2 {
                return Err(Error::Config("covariance needs at least two grid entries".into()));
            }
            let rows = grid
                .consecutive()
                .map(|(t1, t2)| {
                    let c = analytic::r_covariance(t1, t2)?;
                    let approx = analytic::covariance_log_approx(t1, t2);
                    Ok(CovarianceCsv {
                        t1,
                        t2,
                        exact: c.value,
                        log_approx: approx,
                        difference: c.value - approx,
                        tail_bound: c.tail_bound,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            match fmt {
                Format::Csv => csv_rows(rows),
                Format::Json => json(&rows),
            }
        }
        Command::Clt => {
            let cfg = ctx.ensemble(ctx.grid("0.25,0.1,0.0625")?)?;
            let sieve = ctx.sieve(cfg.spec.prime_limit)?;
            let samples = RSamples::generate(&cfg, &sieve)?;
            let stats = samples.stats();
            match fmt {
                Format::Csv => csv_rows(stats.per_t.iter().map(|s| CltCsv {
                    t: s.t,
                    prime_limit: s.prime_limit,
                    n_samples: s.n_samples,
                    mean: s.mean,
                    var_empirical: s.var_empirical,
                    var_analytic_trunc: s.var_analytic_trunc,
                    ks: s.ks,
                    tail_freq: s.tail_freq,
                    chebyshev_bound: s.chebyshev_bound,
                })),
                Format::Json => {
                    #[derive(Serialize)]
                    struct Full<'a> {
                        stats: &'a crate::montecarlo::EnsembleStats,
                        pairs: Vec<crate::montecarlo::PairReport>,
                    }
                    json(&Full {
                        stats: &stats,
                        pairs: samples.decorrelation(),
                    })
                }
            }
        }
        Command::Tail => {
            let cfg = ctx.ensemble(ctx.grid("0.1")?)?;
            let sieve = ctx.sieve(cfg.spec.prime_limit)?;
            let samples = RSamples::generate(&cfg, &sieve)?;
            let rows = cfg
                .t_grid
                .entries()
                .iter()
                .map(|&t| samples.tail(t))
                .collect::<Result<Vec<_>>>()?;
            emit(fmt, &rows[..], |r| r.to_vec())
        }
        Command::EnsembleCensus => {
            let mut cfg = ctx.ensemble(TGrid::new(vec![0.25])?)?;
            if cfg.x_checkpoints.is_empty() {
                cfg.x_checkpoints = default_checkpoints(opts.x_limit);
            }
            let x_max = cfg.x_checkpoints.iter().copied().max().unwrap_or(1);
            let sieve = ctx.sieve(x_max)?;
            let ens = ensemble_census(&cfg, &sieve)?;
            match fmt {
                Format::Csv => csv_rows(ens.checkpoints.iter().map(|h| {
                    EnsembleCensusCsv {
                        checkpoint_x: h.x,
                        n_samples: h.n_samples,
                        median: h.median,
                        frac_ge1: h.frac_ge1,
                        frac_ge2: h.frac_ge2,
                        frac_ge5: h.frac_ge5,
                        histogram: h
                            .histogram
                            .iter()
                            .map(|(k, v)| format!("{k}:{v}"))
                            .collect::<Vec<_>>()
                            .join(";"),
                    }
                })),
                Format::Json => json(&ens.checkpoints),
            }
        }
    }
}
