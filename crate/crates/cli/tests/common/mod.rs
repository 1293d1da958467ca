#![allow(dead_code)]

use std::path::PathBuf;
use std::process::Command;
use std::sync::OnceLock;

use serde_json::Value;

pub struct Output {
    pub code: i32,
    pub doc: Value,
}

/// Runs the `bct` binary with `BCT_SEED` cleared and parses stdout.
pub fn bct(args: &[&str]) -> Output {
    bct_with_env(args, &[])
}

pub fn bct_with_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_bct"));
    cmd.args(args).env_remove("BCT_SEED");
    for (k, v) in env {
        cmd.env(k, v);
    }
    let out = cmd.output().expect("bct runs");
    let stdout = String::from_utf8(out.stdout).expect("utf-8 output");
    let doc = if stdout.trim().is_empty() {
        Value::Null
    } else {
        serde_json::from_str(&stdout).unwrap_or_else(|e| panic!("{e}: {stdout}"))
    };
    Output {
        code: out.status.code().unwrap_or(-1),
        doc,
    }
}

/// Writes an instance file into the test scratch directory.
pub fn instance_file(name: &str, rows: &[usize], cols: &[usize]) -> String {
    let text = serde_json::json!({ "rows": rows, "cols": cols }).to_string();
    raw_file(name, &text)
}

pub fn raw_file(name: &str, text: &str) -> String {
    let path = scratch(name);
    std::fs::write(&path, text).expect("scratch file");
    path.display().to_string()
}

pub fn scratch(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name)
}

fn validator() -> &'static jsonschema::Validator {
    static V: OnceLock<jsonschema::Validator> = OnceLock::new();
    V.get_or_init(|| {
        let path = concat!(env!("CARGO_MANIFEST_DIR"), "/schema/output.schema.json");
        let schema: Value =
            serde_json::from_str(&std::fs::read_to_string(path).expect("schema file"))
                .expect("schema parses");
        jsonschema::validator_for(&schema).expect("schema compiles")
    })
}

pub fn assert_schema_valid(doc: &Value) {
    let errors: Vec<String> = validator()
        .iter_errors(doc)
        .map(|e| format!("{} at {}", e, e.instance_path))
        .collect();
    assert!(errors.is_empty(), "schema violations: {errors:?}\n{doc:#}");
}

/// The `results` section rendered exactly as emitted.
pub fn results_bytes(doc: &Value) -> String {
    serde_json::to_string(&doc["results"]).expect("results serialize")
}
