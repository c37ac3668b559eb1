use super::output::write_atomic;
use super::CliError;
use crate::contfrac::E0Witness;
use crate::covering::{CellSetE, DensityCellSet};
use crate::dynamics::DensityScan;
use serde::Serialize;
use std::path::Path;

/// A file-backed domain object, told apart by its distinguishing field.
#[derive(Debug, Clone, PartialEq)]
pub enum Instance {
    /// `r_tables`: a cell set for the `M`-adic lemma.
    Covering(CellSetE),
    /// `r_map`: a dyadic density cell set.
    Density(DensityCellSet),
    /// `theta`: a block-class witness.
    Witness(E0Witness),
    /// `rows`: a recorded density scan.
    Scan(DensityScan),
}

const KINDS: [(&str, &str); 4] =
    [("r_tables", "covering"), ("r_map", "density"), ("theta", "witness"), ("rows", "scan")];

impl Instance {
    pub fn kind(&self) -> &'static str {
        match self {
            Instance::Covering(_) => "covering",
            Instance::Density(_) => "density",
            Instance::Witness(_) => "witness",
            Instance::Scan(_) => "scan",
        }
    }

    /// Pretty JSON with a trailing newline: the canonical file form.
    pub fn to_bytes(&self) -> Result<Vec<u8>, CliError> {
        fn pretty<T: Serialize>(t: &T) -> Result<Vec<u8>, CliError> {
            let mut s = serde_json::to_string_pretty(t).map_err(|e| CliError::Io(e.to_string()))?;
            s.push('\n');
            Ok(s.into_bytes())
        }
        match self {
            Instance::Covering(e) => pretty(e),
            Instance::Density(e) => pretty(e),
            Instance::Witness(w) => pretty(w),
            Instance::Scan(s) => pretty(s),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let bad = |e: serde_json::Error| CliError::usage(format!("instance schema mismatch: {e}"));
        let value: serde_json::Value = serde_json::from_str(text).map_err(bad)?;
        let obj = value
            .as_object()
            .ok_or_else(|| CliError::usage("instance schema mismatch: top level must be an object"))?;
        let kind = KINDS.iter().find(|(field, _)| obj.contains_key(*field)).map(|k| k.1).ok_or_else(|| {
            CliError::usage("instance schema mismatch: expected one of the fields r_tables, r_map, theta, rows")
        })?;
        // re-parse from text so diagnostics carry line and column
        let domain = |e: serde_json::Error| CliError::usage(format!("invalid {kind} instance: {e}"));
        Ok(match kind {
            "covering" => Instance::Covering(serde_json::from_str(text).map_err(domain)?),
            "density" => Instance::Density(serde_json::from_str(text).map_err(domain)?),
            "witness" => Instance::Witness(serde_json::from_str(text).map_err(domain)?),
            _ => Instance::Scan(serde_json::from_str(text).map_err(domain)?),
        })
    }
}

/// Read and validate a covering instance, witness or scan replay.
pub fn load_instance(path: &Path) -> Result<Instance, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    Instance::from_json(&text).map_err(|e| match e {
        CliError::Usage(m) => CliError::Usage(format!("{}: {m}", path.display())),
        other => other,
    })
}

pub fn save_instance(instance: &Instance, path: &Path) -> Result<(), CliError> {
    write_atomic(path, &instance.to_bytes()?)
}
