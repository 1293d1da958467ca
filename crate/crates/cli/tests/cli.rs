mod common;

use common::*;

fn ok(args: &[&str]) -> serde_json::Value {
    let out = bct(args);
    assert_eq!(out.code, 0, "{:#}", out.doc);
    assert_schema_valid(&out.doc);
    out.doc
}

fn err(args: &[&str], code: i32) -> serde_json::Value {
    let out = bct(args);
    assert_eq!(out.code, code, "{:#}", out.doc);
    assert_schema_valid(&out.doc);
    out.doc
}

#[test]
fn exact_count_of_small_instance() {
    let f = instance_file("exact_211.json", &[2, 1, 1], &[1, 1, 2]);
    let doc = ok(&["exact", &f]);
    assert_eq!(doc["results"]["mu_hat_string"], "5");
    assert_eq!(doc["instance"]["cols"], serde_json::json!([2, 1, 1]));
    let doc = ok(&["exact", &f, "--method", "brute-force"]);
    assert_eq!(doc["results"]["mu_hat_string"], "5");
}

#[test]
fn exact_count_of_infeasible_instance_is_zero() {
    let f = instance_file("exact_zero.json", &[2, 2, 0], &[3, 1]);
    let doc = ok(&["exact", &f]);
    assert_eq!(doc["results"]["mu_hat_string"], "0");
    assert_eq!(doc["results"]["feasible"], false);
    assert!(doc["results"]["log_mu_hat"].is_null());
}

#[test]
fn validate_reports_infeasibility_without_failing() {
    let f = instance_file("validate.json", &[2, 2, 0], &[3, 1]);
    let doc = ok(&["validate", &f]);
    assert_eq!(doc["results"]["feasible"], false);
    assert_eq!(doc["instance"]["m"], 2);
}

#[test]
fn estimate_on_permutation_margins_is_exact() {
    let f = instance_file("ones5.json", &[1; 5], &[1; 5]);
    let doc = ok(&["estimate", &f, "--reps", "10"]);
    let r = &doc["results"];
    let expected = 120f64.ln();
    assert!((r["log_mu_hat"].as_f64().unwrap() - expected).abs() < 1e-9);
    assert_eq!(r["cv_hat"], 0.0);
    assert_eq!(r["acceptance_rate"], 1.0);
    assert_eq!(r["reps_used"], 10);
    assert!(r["mu_hat_string"].is_null());
}

#[test]
fn chebyshev_plan_runs_pilot_then_remainder() {
    let f = instance_file("reg2_6.json", &[2; 6], &[2; 6]);
    let doc = ok(&[
        "estimate",
        &f,
        "--plan",
        "chebyshev",
        "--epsilon",
        "0.2",
        "--delta",
        "0.1",
        "--pilot",
        "200",
    ]);
    let r = &doc["results"];
    assert_eq!(r["plan_used"], "chebyshev");
    let planned = r["planned_reps"].as_u64().unwrap();
    assert_eq!(r["reps_used"].as_u64().unwrap(), planned.max(200));
    assert_eq!(doc["method"]["pilot_reps"], 200);
}

#[test]
fn max_reps_truncates_plan() {
    let f = instance_file("reg2_6_trunc.json", &[2; 6], &[2; 6]);
    let doc = ok(&[
        "estimate",
        &f,
        "--plan",
        "chebyshev",
        "--epsilon",
        "0.01",
        "--delta",
        "0.01",
        "--pilot",
        "100",
        "--max-reps",
        "300",
    ]);
    assert_eq!(doc["results"]["truncated"], true);
    assert_eq!(doc["results"]["reps_used"], 300);
}

#[test]
fn chernoff_plan_on_zero_variance_instance() {
    let f = instance_file("ones6.json", &[1; 6], &[1; 6]);
    let doc = ok(&["estimate", &f, "--plan", "chernoff", "--pilot", "100"]);
    assert_eq!(doc["results"]["plan_used"], "chernoff");
    assert_eq!(doc["results"]["planned_reps"], 1);
    assert_eq!(doc["results"]["reps_used"], 100);
}

#[test]
fn approx_and_compare() {
    let f = instance_file("reg2_5.json", &[2; 5], &[2; 5]);
    let doc = ok(&["approx", &f]);
    assert!(doc["results"]["log_mu_approx"].as_f64().unwrap() > 0.0);
    let doc = ok(&["compare", &f, "--reps", "500"]);
    assert_eq!(doc["results"]["mu_hat_string"], "2040");
    assert!(doc["results"]["log_err_sampler"].as_f64().unwrap().abs() < 0.1);
}

#[test]
fn gen_writes_a_loadable_instance() {
    let path = scratch("generated.json").display().to_string();
    let doc = ok(&[
        "gen",
        "--m",
        "8",
        "--r-max",
        "2",
        "--seed",
        "3",
        "--instance-out",
        &path,
    ]);
    assert_eq!(doc["results"]["feasible"], true);
    assert_eq!(doc["results"]["spec"]["seed"], 3);
    let again = ok(&["gen", "--m", "8", "--r-max", "2", "--seed", "3"]);
    assert_eq!(results_bytes(&doc), results_bytes(&again));
    let est = ok(&["estimate", &path, "--reps", "50"]);
    assert_eq!(est["instance"], doc["instance"]);
}

#[test]
fn seed_falls_back_to_environment() {
    let f = instance_file("reg2_4_env.json", &[2; 4], &[2; 4]);
    let flag = bct(&["estimate", &f, "--reps", "20", "--seed", "11"]);
    let env = bct_with_env(&["estimate", &f, "--reps", "20"], &[("BCT_SEED", "11")]);
    assert_eq!(env.doc["seed"], 11);
    assert_eq!(results_bytes(&flag.doc), results_bytes(&env.doc));
    let other = bct(&["estimate", &f, "--reps", "20", "--seed", "12"]);
    assert_ne!(results_bytes(&flag.doc), results_bytes(&other.doc));
}

#[test]
fn thread_count_does_not_change_results() {
    let f = instance_file("reg2_8_threads.json", &[2; 8], &[2; 8]);
    let one = ok(&[
        "estimate",
        &f,
        "--reps",
        "300",
        "--seed",
        "5",
        "--threads",
        "1",
    ]);
    let four = ok(&[
        "estimate",
        &f,
        "--reps",
        "300",
        "--seed",
        "5",
        "--threads",
        "4",
    ]);
    let auto = ok(&["estimate", &f, "--reps", "300", "--seed", "5"]);
    assert_eq!(results_bytes(&one), results_bytes(&four));
    assert_eq!(results_bytes(&one), results_bytes(&auto));
}

#[test]
fn out_flag_writes_file() {
    let f = instance_file("out_in.json", &[1, 1], &[1, 1]);
    let path = scratch("out_doc.json");
    let out = bct(&["exact", &f, "--out", &path.display().to_string()]);
    assert_eq!(out.code, 0);
    assert!(out.doc.is_null());
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    assert_schema_valid(&doc);
    assert_eq!(doc["results"]["mu_hat_string"], "2");
}

#[test]
fn errors_are_json() {
    let bad = raw_file("neg.json", r#"{"rows":[1,-1],"cols":[0]}"#);
    let doc = err(&["exact", &bad], 1);
    assert_eq!(doc["error"], "ParseError");
    assert!(doc["message"].as_str().unwrap().contains("rows[1]"));

    let mismatch = instance_file("mismatch.json", &[1], &[2]);
    assert_eq!(err(&["exact", &mismatch], 1)["error"], "MarginMismatch");

    let missing = scratch("does_not_exist.json").display().to_string();
    assert_eq!(err(&["exact", &missing], 1)["error"], "IoError");

    let f = instance_file("usage.json", &[1, 1], &[1, 1]);
    assert_eq!(
        err(
            &["estimate", &f, "--plan", "chebyshev", "--epsilon", "2"],
            2
        )["error"],
        "UsageError"
    );
    assert_eq!(err(&["estimate"], 2)["error"], "UsageError");
    assert_eq!(
        err(&["estimate", &f, "--threads", "0"], 2)["error"],
        "UsageError"
    );
}

#[test]
fn estimate_on_infeasible_instance_fails() {
    let f = instance_file("infeasible_est.json", &[2, 2, 0], &[3, 1]);
    assert_eq!(
        err(&["estimate", &f, "--reps", "10"], 1)["error"],
        "AllFailed"
    );
}

#[test]
fn oracle_refuses_oversized_brute_force() {
    let f = instance_file("big_brute.json", &[1; 6], &[1; 6]);
    assert_eq!(
        err(&["exact", &f, "--method", "brute-force"], 1)["error"],
        "TooLarge"
    );
}
