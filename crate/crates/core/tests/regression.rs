//! Values frozen from a first run; any drift means the sampler or a numeric
//! kernel changed.

use signlab::census::sign_changes;
use signlab::montecarlo::{ensemble_census, EnsembleConfig};
use signlab::transforms::f_ratio_scan;
use signlab::{Mode, Sieve, SignOracle, TGrid, TruncationSpec};

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * b.abs()
}

#[test]
fn fscan_seed_42() {
    let s = Sieve::new(1_000_000).unwrap();
    let spec = TruncationSpec::new(1_000_000, 2).unwrap();
    let grid = TGrid::new(vec![0.25, 0.0625]).unwrap();
    let rows = f_ratio_scan(&SignOracle::random(42), &s, &grid, &spec).unwrap();
    let expect = [
        (0.25, 5.927491438454525, 2.3475016561104765, 0.02969478550053227, false),
        (0.0625, 21.12265478804262, 13.000241805518822, 0.11112265942710932, true),
    ];
    for (row, (t, f_t, f_2t, ind, limited)) in rows.iter().zip(expect) {
        assert_eq!(row.t, t);
        assert!(close(row.f_t, f_t), "{row:?}");
        assert!(close(row.f_2t, f_2t), "{row:?}");
        assert!(close(row.truncation_indicator, ind), "{row:?}");
        assert_eq!(row.truncation_limited, limited);
        assert!(row.flag);
    }
}

#[test]
fn small_t_is_truncation_limited() {
    let s = Sieve::new(1_000_000).unwrap();
    let spec = TruncationSpec::new(1_000_000, 2).unwrap();
    let grid = TGrid::new(vec![0.00390625]).unwrap();
    let row = f_ratio_scan(&SignOracle::random(42), &s, &grid, &spec).unwrap()[0];
    assert!(row.truncation_indicator > 0.1);
    assert!(row.truncation_limited);
    assert!(close(row.truncation_indicator, 0.15046697373799547));
}

#[test]
fn census_seed_42() {
    let s = Sieve::new(1_000_000).unwrap();
    let r = sign_changes(SignOracle::random(42), &s, 1_000_000).unwrap();
    assert_eq!(r.crossings, [24, 25, 28, 29]);
    assert!(close(r.final_sum, 5.566101580459461));
    assert!(r.near_zero_events.is_empty());
}

#[test]
fn ensemble_census_median() {
    let s = Sieve::new(1_000_000).unwrap();
    let cfg = EnsembleConfig {
        base_seed: 2024,
        n_samples: 1000,
        t_grid: TGrid::new(vec![0.25]).unwrap(),
        spec: TruncationSpec::new(1_000_000, 2).unwrap(),
        x_checkpoints: vec![10_000, 1_000_000],
        workers: 2,
        mode: Mode::Random,
    };
    let e = ensemble_census(&cfg, &s).unwrap();
    let got: Vec<(u64, f64, f64, f64, f64)> = e
        .checkpoints
        .iter()
        .map(|h| (h.x, h.median, h.frac_ge1, h.frac_ge2, h.frac_ge5))
        .collect();
    assert_eq!(
        got,
        [
            (10_000, 0.0, 0.443, 0.442, 0.352),
            (1_000_000, 0.0, 0.464, 0.464, 0.379)
        ]
    );
}
