//! Desubstitution: cuttings and recognisability radii, pre-image fibres, period certificates,
//! unique-composition checks and the power of `σ` that fixes LI classes.

mod cutting;
mod fibre;
mod li;
mod periods;

use thiserror::Error;

use crate::lattice::LatticeError;
use crate::patterns::PatternError;
use crate::subst::SubstError;

pub use cutting::{cuttings_of_patch, recognisability_radius, AmbiguityWitness, Cutting, RecognisabilityReport};
pub use fibre::{enumerate_fibre, ClassEvidence, Fibre, DEFAULT_WINDOW_SCHEDULE};
pub use li::{li_fixing_power, uc_verify, LiPower, UcReport};
pub use periods::{
    canonical_pattern, certify_period, compute_periods, PeriodReport, PeriodVerdict, APPEARANCE_CAP_1D,
    APPEARANCE_CAP_2D, DEFAULT_NORM_BOUND,
};

/// Default recognisability search cap.
pub const DEFAULT_RECOGNISABILITY_CAP: i64 = 64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RecogError {
    #[error("patch is not in the language: {0}")]
    IllegalPatch(String),
    #[error("fibre count did not stabilize up to window {window} (at least {lower_bound} elements)")]
    NotStabilized { lower_bound: usize, window: i64 },
    #[error("unsupported source: {0}")]
    UnsupportedSource(String),
    #[error("unique composition violated: {0}")]
    UCViolation(String),
    #[error("configuration map unstable at radius {radius}: {detail}")]
    ConfigRadiusUnstable { radius: i64, detail: String },
    #[error(transparent)]
    Subst(#[from] SubstError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Pattern(#[from] PatternError),
}

impl RecogError {
    pub fn reason(&self) -> &'static str {
        match self {
            RecogError::IllegalPatch(_) => "illegal_patch",
            RecogError::NotStabilized { .. } => "not_stabilized",
            RecogError::UnsupportedSource(_) => "unsupported_source",
            RecogError::UCViolation(_) => "uc_violation",
            RecogError::ConfigRadiusUnstable { .. } => "config_radius_unstable",
            RecogError::Subst(e) => e.reason(),
            RecogError::Lattice(_) => "lattice",
            RecogError::Pattern(_) => "pattern",
        }
    }
}
