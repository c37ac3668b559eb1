//! Escape-time classification, Siegel-disk approximation and the
//! multi-scale area statistics built on top of them.

mod fate;
mod gap;
mod sampling;
mod scan;
mod siegel;

pub use fate::{classify_f, classify_p, in_s_l, ModelP, OrbitFate};
pub use gap::{gap_probe, GapProbe};
pub use sampling::{area_fraction, AreaFraction, Counts};
pub(crate) use scan::linear_fit;
pub use scan::{deficiency_exponent, density_scan, scan_budget, DeficiencyFit, DensityScan, ScanRow};
pub(crate) use siegel::k_r_fate;
pub use siegel::{member_k_r_p, siegel_boundary, SiegelApprox};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("critical orbit escaped at step {step}")]
    OrbitEscaped { step: usize },
    #[error("point is farther than r from the Siegel disk approximation")]
    OutsideNeighborhood,
    #[error("no scale has a positive escaped fraction")]
    NoDeficiency,
    #[error("only {found} scales have a positive escaped fraction; at least 3 are needed")]
    InsufficientScales { found: usize },
}
