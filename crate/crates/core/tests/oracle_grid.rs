//! Exact oracles checked against each other and against Gale–Ryser.

use bct_core::harness::margin_grid;
use bct_core::instance::gale_ryser_feasible;
use bct_core::mckay::eta_log;
use bct_core::oracle::{brute_force_count, dp_count, dp_count_log, zero_variance_paths};
use num_bigint::BigUint;

#[test]
fn dp_agrees_with_brute_force_on_small_grid() {
    let grid = margin_grid(3, 4, 3);
    assert!(grid.len() > 100);
    for inst in grid {
        let brute = brute_force_count(&inst).unwrap();
        assert_eq!(dp_count(&inst).unwrap(), BigUint::from(brute), "{inst:?}");
        if brute > 0 {
            let log = dp_count_log(&inst).unwrap();
            assert!((log - (brute as f64).ln()).abs() < 1e-12);
        }
    }
}

#[test]
fn gale_ryser_matches_existence_up_to_five() {
    for inst in margin_grid(5, 5, 3) {
        if inst.m() * inst.n() > 25 {
            continue;
        }
        let exists = brute_force_count(&inst).unwrap() > 0;
        assert_eq!(gale_ryser_feasible(&inst), exists, "{inst:?}");
    }
}

#[test]
fn h_transform_has_zero_variance() {
    for inst in margin_grid(4, 4, 2) {
        let count = brute_force_count(&inst).unwrap();
        if count == 0 {
            continue;
        }
        // each path weight is the exact u = μ/η
        let u = count as f64 / eta_log(inst.cols(), inst.m()).unwrap().exp();
        let paths = zero_variance_paths(&inst).unwrap();
        let total: f64 = paths.iter().map(|p| p.probability).sum();
        assert!((total - 1.0).abs() < 1e-9, "{inst:?}");
        for p in paths {
            assert!((p.likelihood / u - 1.0).abs() < 1e-9, "{inst:?}");
        }
    }
}
