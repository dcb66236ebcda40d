use std::ffi::CStr;
use std::ptr;

use signlab_ffi::*;

fn last_error() -> String {
    let p = signlab_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

struct Handles {
    sieve: *mut SignlabSieve,
    oracle: *mut SignlabOracle,
}

impl Handles {
    fn new(capacity: u64, seed: u64, mode: SignlabMode) -> Self {
        let mut sieve = ptr::null_mut();
        let mut oracle = ptr::null_mut();
        unsafe {
            assert_eq!(signlab_sieve_new(capacity, &mut sieve), SignlabStatus::Ok);
            assert_eq!(signlab_oracle_new(seed, mode, &mut oracle), SignlabStatus::Ok);
        }
        Self { sieve, oracle }
    }
}

impl Drop for Handles {
    fn drop(&mut self) {
        unsafe {
            signlab_oracle_free(self.oracle);
            signlab_sieve_free(self.sieve);
        }
    }
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(signlab_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn signs_match_rust_api() {
    let h = Handles::new(10_000, 42, SignlabMode::Random);
    let sieve = signlab::Sieve::new(10_000).unwrap();
    let o = signlab::SignOracle::random(42);
    for n in 1..=500u64 {
        let mut v = 0i8;
        assert_eq!(
            unsafe { signlab_value(h.oracle, h.sieve, n, &mut v) },
            SignlabStatus::Ok
        );
        assert_eq!(v, o.value(&sieve, n).unwrap().as_i8());
    }
    let mut v = 0i8;
    assert_eq!(unsafe { signlab_prime_sign(h.oracle, 97, &mut v) }, SignlabStatus::Ok);
    assert!(v == 1 || v == -1);
    assert_eq!(
        unsafe { signlab_prime_sign(h.oracle, 91, &mut v) },
        SignlabStatus::Contract
    );
    assert!(last_error().contains("91"));
}

#[test]
fn liouville_census() {
    let h = Handles::new(1000, 0, SignlabMode::AllMinus);
    let mut c = ptr::null_mut();
    unsafe {
        assert_eq!(
            signlab_census_run(h.oracle, h.sieve, 1000, 2, &mut c),
            SignlabStatus::Ok
        );
        let n = signlab_census_crossing_count(c);
        assert!(n > 0);
        let mut buf = vec![0u64; n];
        assert_eq!(signlab_census_crossings(c, buf.as_mut_ptr(), n), n);
        assert_eq!(buf[0], 3);
        assert_eq!(signlab_census_checkpoint_count(c), 1);
        let mut row = std::mem::zeroed::<SignlabCheckpoint>();
        assert_eq!(signlab_census_checkpoint(c, 0, &mut row), SignlabStatus::Ok);
        assert_eq!(row.x, 1000);
        assert_eq!(row.crossings_so_far, n as u64);
        let mut fin = SignlabValue {
            value: 0.0,
            tail_bound: 0.0,
        };
        assert_eq!(signlab_census_final(c, &mut fin), SignlabStatus::Ok);
        assert_eq!(fin.value, row.s_x);
        assert_eq!(signlab_census_checkpoint(c, 1, &mut row), SignlabStatus::Domain);
        signlab_census_free(c);
    }
}

#[test]
fn analytic_values() {
    let mut v = SignlabValue {
        value: 0.0,
        tail_bound: 0.0,
    };
    unsafe {
        assert_eq!(signlab_zeta(2.0, &mut v), SignlabStatus::Ok);
        assert!((v.value - std::f64::consts::PI.powi(2) / 6.0).abs() < 1e-14);
        assert_eq!(signlab_prime_zeta(2.0, &mut v), SignlabStatus::Ok);
        assert!((v.value - 0.452_247_420_041_065_5).abs() < 1e-14);
        assert_eq!(signlab_r_variance(0.001, &mut v), SignlabStatus::Ok);
        assert!((v.value - (9.0f64 / 8.0).ln()).abs() < 5e-3);
        let mut w = v;
        assert_eq!(signlab_r_covariance(0.25, 0.0625, &mut v), SignlabStatus::Ok);
        assert_eq!(signlab_r_covariance(0.0625, 0.25, &mut w), SignlabStatus::Ok);
        assert_eq!(v, w);
        assert_eq!(signlab_zeta(1.0, &mut v), SignlabStatus::Domain);
        assert!(!last_error().is_empty());
        assert_eq!(signlab_r_variance(0.6, &mut v), SignlabStatus::Domain);
    }
}

#[test]
fn transforms_match_rust_api() {
    let h = Handles::new(100_000, 7, SignlabMode::Random);
    let sieve = signlab::Sieve::new(100_000).unwrap();
    let o = signlab::SignOracle::random(7);
    let spec = signlab::TruncationSpec::new(1000, 1000).unwrap();
    let mut out = 0.0;
    unsafe {
        assert_eq!(
            signlab_dirichlet_sum(h.oracle, h.sieve, 0.3, 1000, &mut out),
            SignlabStatus::Ok
        );
        assert_eq!(out, signlab::transforms::dirichlet_sum(&o, &sieve, 0.3, &spec).unwrap());
        assert_eq!(
            signlab_laplace_transform(h.oracle, h.sieve, 0.3, 1000, &mut out),
            SignlabStatus::Ok
        );
        assert_eq!(
            out,
            signlab::transforms::laplace_transform(&o, &sieve, 0.3, &spec).unwrap()
        );
        assert_eq!(
            signlab_euler_product_log(h.oracle, h.sieve, 1.0, 1000, &mut out),
            SignlabStatus::Ok
        );
        assert_eq!(
            out,
            signlab::transforms::euler_product_log(&o, &sieve, 1.0, &spec).unwrap()
        );
        assert_eq!(
            signlab_r_statistic(h.oracle, h.sieve, 0.1, 1000, &mut out),
            SignlabStatus::Ok
        );
        assert_eq!(out, signlab::transforms::r_statistic(&o, &sieve, 0.1, &spec).unwrap());
        assert_eq!(
            signlab_dirichlet_sum(h.oracle, h.sieve, 0.3, 1_000_000, &mut out),
            SignlabStatus::Resource
        );
        assert_eq!(
            signlab_laplace_transform(h.oracle, h.sieve, -1.0, 10, &mut out),
            SignlabStatus::Domain
        );
    }
}

#[test]
fn null_handles_are_reported() {
    let mut v = 0i8;
    let mut s = ptr::null_mut();
    unsafe {
        assert_eq!(signlab_prime_sign(ptr::null(), 2, &mut v), SignlabStatus::NullPointer);
        assert_eq!(signlab_sieve_new(10, ptr::null_mut()), SignlabStatus::NullPointer);
        assert_eq!(signlab_sieve_new(0, &mut s), SignlabStatus::Config);
        assert_eq!(signlab_zeta(2.0, ptr::null_mut()), SignlabStatus::NullPointer);
        assert_eq!(signlab_census_crossing_count(ptr::null()), 0);
        signlab_sieve_free(ptr::null_mut());
        signlab_oracle_free(ptr::null_mut());
        signlab_census_free(ptr::null_mut());
    }
}

#[test]
fn header_declares_every_export() {
    let dir = env!("CARGO_MANIFEST_DIR");
    let src = std::fs::read_to_string(format!("{dir}/src/lib.rs")).unwrap();
    let header = std::fs::read_to_string(format!("{dir}/include/signlab.h")).unwrap();
    let exports: Vec<&str> = src
        .lines()
        .filter_map(|l| l.split("extern \"C\" fn ").nth(1))
        .map(|rest| rest.split('(').next().unwrap())
        .collect();
    assert!(exports.len() >= 20);
    for name in exports {
        assert!(header.contains(&format!("{name}(")), "{name} missing from header");
    }
    for ty in ["SignlabSieve", "SignlabOracle", "SignlabCensus", "SIGNLAB_STATUS_PANIC"] {
        assert!(header.contains(ty));
    }
}

#[test]
fn header_compiles_as_c() {
    let dir = env!("CARGO_MANIFEST_DIR");
    let src = std::env::temp_dir().join(format!("signlab-header-{}.c", std::process::id()));
    std::fs::write(
        &src,
        "#include \"signlab.h\"\nint main(void) { SignlabValue v; return signlab_zeta(2.0, &v) != SIGNLAB_STATUS_OK; }\n",
    )
    .unwrap();
    let status = std::process::Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(format!("{dir}/include"))
        .arg(&src)
        .status();
    let _ = std::fs::remove_file(&src);
    match status {
        Ok(s) => assert!(s.success()),
        Err(e) => eprintln!("skipping: no C compiler ({e})"),
    }
}
