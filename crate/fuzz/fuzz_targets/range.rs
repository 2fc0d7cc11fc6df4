#![no_main]
use aoi_cli::range::{parse_counts, parse_range, MAX_POINTS};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|s: &str| {
    if let Ok(v) = parse_range(s) {
        assert!(!v.is_empty() && v.len() <= MAX_POINTS);
        assert!(v.iter().all(|x| x.is_finite()));
    }
    if let Ok(n) = parse_counts(s) {
        assert!(n.iter().all(|k| *k >= 1));
    }
});
