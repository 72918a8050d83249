//! Shared helpers for the JSON model files.

use serde_json::Value;

use crate::error::ModelFileError;

/// Maps a parse failure: running out of input means the file was cut short.
pub(crate) fn corrupt_json(e: serde_json::Error) -> ModelFileError {
    if e.classify() == serde_json::error::Category::Eof {
        ModelFileError::CorruptLength(format!("unexpected end of file: {e}"))
    } else {
        ModelFileError::Malformed(e.to_string())
    }
}

/// Parses JSON text and checks `format_version` against `expected`.
pub(crate) fn parse_versioned(text: &str, expected: u32) -> Result<Value, ModelFileError> {
    let value: Value = serde_json::from_str(text).map_err(corrupt_json)?;
    let found = value
        .get("format_version")
        .and_then(Value::as_u64)
        .ok_or_else(|| ModelFileError::Malformed("missing format_version".into()))?;
    if found != u64::from(expected) {
        return Err(ModelFileError::Version {
            found: u32::try_from(found).unwrap_or(u32::MAX),
            expected,
        });
    }
    Ok(value)
}

/// Unwraps values that JSON may carry as `null` (how non-finite reals serialize).
pub(crate) fn finite_values(values: Vec<Option<f64>>, what: &str) -> Result<Vec<f64>, ModelFileError> {
    values
        .into_iter()
        .map(|v| match v {
            Some(x) if x.is_finite() => Ok(x),
            _ => Err(ModelFileError::NonFinite(what.to_string())),
        })
        .collect()
}
