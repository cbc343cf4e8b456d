use std::io::Read;
use std::path::Path;

use fuchskit::connection::{build_companion, LogConnection};
use fuchskit::{Error, FuchsianOperator};
use serde::de::DeserializeOwned;

use crate::CliError;

/// Reads `-` (stdin), inline JSON, or a file.
pub fn read_source(src: &str) -> Result<String, CliError> {
    if src == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).map_err(|e| CliError::Io(format!("stdin: {e}")))?;
        return Ok(s);
    }
    let t = src.trim_start();
    if t.starts_with('{') || t.starts_with('[') {
        return Ok(src.to_string());
    }
    let path = Path::new(src);
    std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

pub fn document<T: DeserializeOwned>(src: &str) -> Result<T, CliError> {
    let text = read_source(src)?;
    serde_json::from_str(&text).map_err(|e| Error::Parse(e.to_string()).into())
}

pub fn operator(src: &str) -> Result<FuchsianOperator, CliError> {
    Ok(FuchsianOperator::parse(&read_source(src)?)?)
}

/// Either a connection document (it has a `matrix`) or an operator, whose
/// companion connection is used.
pub fn connection(src: &str) -> Result<LogConnection, CliError> {
    let text = read_source(src)?;
    let is_connection =
        serde_json::from_str::<serde_json::Value>(&text).ok().is_some_and(|v| v.get("matrix").is_some());
    if is_connection {
        serde_json::from_str(&text).map_err(|e| Error::Parse(e.to_string()).into())
    } else {
        Ok(build_companion(&FuchsianOperator::parse(&text)?)?)
    }
}
