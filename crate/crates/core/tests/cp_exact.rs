//! Exhaustive checks of the conditional Poisson samplers against the pmf.

use bct_core::cp::{
    backward_law, cp_log_pmf, drafting_law, esp_build, inclusion_probabilities, subsets,
    CpDistribution, DraftingMethod,
};
use num_bigint::BigUint;

fn weight_vectors() -> Vec<Vec<f64>> {
    let mut out = vec![
        vec![1.0, 2.0, 3.0],
        vec![5.0, 5.0, 5.0, 5.0],
        vec![0.01, 100.0, 1.0, 7.5, 3.0],
        vec![1e-6, 1e6, 2.0, 2.0, 3.0, 0.5],
    ];
    for units in 1..=7usize {
        out.push((0..units).map(|i| 1.0 + (i * i % 5) as f64 * 0.7).collect());
    }
    out
}

#[test]
fn samplers_match_pmf_exhaustively() {
    for weights in weight_vectors() {
        for size in 1..=weights.len() {
            let dist = CpDistribution::from_weights(&weights, size).unwrap();
            let laws = [
                drafting_law(&dist, DraftingMethod::Direct),
                drafting_law(&dist, DraftingMethod::LeaveOneOut),
                backward_law(&dist),
            ];
            for subset in subsets(weights.len(), size) {
                let exact = cp_log_pmf(&dist, &subset).unwrap().exp();
                for law in &laws {
                    let p = law.get(&subset).copied().unwrap_or(0.0);
                    assert!(
                        (p - exact).abs() < 1e-12,
                        "{weights:?} {subset:?}: {p} vs {exact}"
                    );
                }
            }
        }
    }
}

#[test]
fn pmf_sums_to_one_up_to_twelve_units() {
    for units in 1..=12usize {
        let weights: Vec<f64> = (0..units).map(|i| 0.5 + i as f64 * 1.3).collect();
        for size in 0..=units {
            let dist = CpDistribution::from_weights(&weights, size).unwrap();
            let total: f64 = subsets(units, size)
                .iter()
                .map(|s| cp_log_pmf(&dist, s).unwrap().exp())
                .sum();
            assert!(
                (total - 1.0).abs() < 1e-10,
                "units {units} size {size}: {total}"
            );
            let incl: f64 = inclusion_probabilities(&dist).iter().sum();
            assert!((incl - size as f64).abs() < 1e-10);
        }
    }
}

fn exact_esp(weights: &[u64], order: usize) -> BigUint {
    let mut e = vec![BigUint::from(0u32); order + 1];
    e[0] = BigUint::from(1u32);
    for &w in weights {
        for i in (1..=order).rev() {
            let add = &e[i - 1] * w;
            e[i] += add;
        }
    }
    e[order].clone()
}

#[test]
fn esp_matches_big_integer_computation() {
    for units in 1..=12usize {
        let weights: Vec<u64> = (0..units).map(|i| (i as u64 * 7 + 3) % 20 + 1).collect();
        let float: Vec<f64> = weights.iter().map(|&w| w as f64).collect();
        for order in 0..=units {
            let dist = CpDistribution::from_weights(&float, order).unwrap();
            let table = esp_build(&dist);
            let exact = exact_esp(&weights, order);
            let exact_f: f64 = exact.to_string().parse().unwrap();
            let got = table.log_normalizer().exp();
            assert!(
                (got / exact_f - 1.0).abs() < 1e-10,
                "units {units} order {order}: {got} vs {exact}"
            );
        }
    }
}
