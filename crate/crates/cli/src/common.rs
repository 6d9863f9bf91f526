use std::fs;
use std::path::Path;

use dhot_core::numtheory::BigNat;
use dhot_core::params::{parse_params, GroupParams, RootChoice};

use crate::args::ParamsSource;
use crate::error::CliError;

/// Parameters from `--params` or `--toy`; `None` when neither was given.
pub fn load_params(source: &ParamsSource) -> Result<Option<GroupParams>, CliError> {
    if source.toy {
        return Ok(Some(GroupParams::p23()));
    }
    let Some(path) = &source.params else {
        return Ok(None);
    };
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("cannot read parameter file {}: {e}", path.display())))?;
    parse_params(&text)
        .map(Some)
        .map_err(|e| CliError::config(format!("{}: {e}", path.display())))
}

/// Inline UTF-8 text, or the contents of the file after a leading `@`.
pub fn read_secret(source: &str) -> Result<Vec<u8>, CliError> {
    match source.strip_prefix('@') {
        Some(path) => fs::read(Path::new(path)).map_err(|e| CliError::config(format!("cannot read secret file {path}: {e}"))),
        None => Ok(source.as_bytes().to_vec()),
    }
}

pub fn show_secret(bytes: &[u8], raw: bool) -> String {
    if raw {
        String::from_utf8_lossy(bytes).into_owned()
    } else {
        hex::encode(bytes)
    }
}

pub fn parse_nat(what: &str, text: &str) -> Result<BigNat, CliError> {
    text.trim()
        .parse::<BigNat>()
        .map_err(|_| CliError::config(format!("{what}: `{text}` is not a non-negative integer")))
}

pub fn parse_root(params: &GroupParams, what: &str, text: &str) -> Result<RootChoice, CliError> {
    let value = parse_nat(what, text)?;
    params
        .choice_of(&value)
        .ok_or_else(|| CliError::config(format!("{what}: {value} is neither g1={} nor g2={}", params.g1, params.g2)))
}

pub fn resolve_seed(seed: Option<u64>) -> u64 {
    seed.unwrap_or_else(rand::random)
}
