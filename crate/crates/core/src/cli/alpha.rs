use super::CliError;
use crate::contfrac::{expand, CFExpansion};
use clap::Args;
use serde::Serialize;

/// Rotation number by preset, decimal, or continued-fraction entries.
#[derive(Debug, Clone, Default, Args, Serialize)]
pub struct AlphaArgs {
    /// `golden`, `silver`, a decimal in (0,1), or comma-separated entries `a_1,a_2,...`.
    #[arg(long, conflicts_with = "cf")]
    pub alpha: Option<String>,
    /// Continued-fraction entries; with `--period p` the last `p` repeat forever.
    #[arg(long, value_delimiter = ',')]
    pub cf: Option<Vec<u64>>,
    #[arg(long, requires = "cf")]
    pub period: Option<usize>,
    /// Absolute uncertainty of a decimal `--alpha`.
    #[arg(long, default_value_t = 1e-15)]
    pub precision: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedAlpha {
    pub cf: CFExpansion,
    pub value: f64,
}

fn from_entries(entries: &[u64], period: Option<usize>) -> Result<CFExpansion, CliError> {
    if entries.is_empty() {
        return Err(CliError::usage("empty continued-fraction entry list"));
    }
    let cf = match period {
        None => CFExpansion::from_u64s(entries),
        Some(p) if p == 0 || p > entries.len() => {
            return Err(CliError::usage(format!("--period {p} must lie in 1..={}", entries.len())));
        }
        Some(p) => CFExpansion::periodic(&entries[..entries.len() - p], &entries[entries.len() - p..]),
    };
    cf.map_err(|e| CliError::usage(e.to_string()))
}

impl AlphaArgs {
    pub fn resolve(&self) -> Result<ResolvedAlpha, CliError> {
        let cf = match (&self.alpha, &self.cf) {
            (Some(_), Some(_)) => return Err(CliError::usage("--alpha and --cf are exclusive")),
            (None, None) => return Err(CliError::usage("one of --alpha or --cf is required")),
            (None, Some(entries)) => from_entries(entries, self.period)?,
            (Some(spec), None) => match spec.trim() {
                "golden" => CFExpansion::golden(),
                "silver" => CFExpansion::silver(),
                s if s.contains(',') => {
                    let entries = s
                        .split(',')
                        .map(|t| t.trim().parse::<u64>())
                        .collect::<Result<Vec<_>, _>>()
                        .map_err(|_| CliError::usage(format!("bad entry list {s:?}")))?;
                    from_entries(&entries, None)?
                }
                s => {
                    let x: f64 = s.parse().map_err(|_| CliError::usage(format!("unrecognized alpha {s:?}")))?;
                    if !(x > 0.0 && x < 1.0) {
                        return Err(CliError::usage(format!("alpha = {x} is not in (0,1)")));
                    }
                    if !(self.precision >= 0.0) {
                        return Err(CliError::usage("--precision must be nonnegative"));
                    }
                    let cf = expand(x, 64, self.precision).map_err(|e| CliError::usage(e.to_string()))?;
                    return Ok(ResolvedAlpha { cf, value: x });
                }
            },
        };
        let value = cf.approx_value::<f64>()?;
        Ok(ResolvedAlpha { cf, value })
    }
}
