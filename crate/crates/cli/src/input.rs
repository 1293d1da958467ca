use std::path::Path;

use bct_core::Instance;
use serde::Deserialize;
use serde_json::Value;

use crate::CliError;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    rows: Vec<usize>,
    cols: Vec<usize>,
}

/// Reads `{"rows":[...],"cols":[...]}` and normalizes it.
pub fn parse_instance_file(path: &Path) -> Result<Instance, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_instance_str(&text).map_err(|e| match e {
        CliError::Parse(msg) => CliError::Parse(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn parse_instance_str(text: &str) -> Result<Instance, CliError> {
    let file: InstanceFile = serde_json::from_str(text).map_err(|e| {
        let field = match e.classify() {
            serde_json::error::Category::Data => offending_field(text),
            _ => None,
        };
        match field {
            Some(field) => CliError::Parse(format!("field `{field}`: {e}")),
            None => CliError::Parse(e.to_string()),
        }
    })?;
    Ok(Instance::new(file.rows, file.cols)?)
}

/// Path of the first margin entry that is not a non-negative integer.
fn offending_field(text: &str) -> Option<String> {
    let value: Value = serde_json::from_str(text).ok()?;
    let object = value.as_object()?;
    for key in ["rows", "cols"] {
        match object.get(key) {
            None => return Some(key.to_string()),
            Some(Value::Array(items)) => {
                if let Some(i) = items.iter().position(|v| v.as_u64().is_none()) {
                    return Some(format!("{key}[{i}]"));
                }
            }
            Some(_) => return Some(key.to_string()),
        }
    }
    None
}
