//! Executable counterparts of the characterisation argument: ratio
//! diagnostics, anchor normalization, the semigroup model of an estimator,
//! and synthesis of a score table by exact linear programming.

mod ratio;
mod semigroup;
pub mod simplex;
mod synthesis;

pub use ratio::{
    audit_ratio, normalization_denominator, normalize_psi, ratio_fn, z_via_ratio_limits, Direction,
    RatioDiagnostic, ZLimitReport,
};
pub use semigroup::{
    classify, closure_probe, closure_violation, core_probe, enumerate_multisets, level_membership,
    mu, multiset_count, CoreProbe, Level, DEFAULT_ENUMERATION_CAP,
};
pub use synthesis::{
    synthesize_psi, table_score, tie_avoiding_grid, verify_synthesis, CellViolation,
    CertificateTerm, GridPointSummary, InfeasibilityCertificate, PsiTable, Synthesis,
    SynthesisConfig, SynthesisOutcome, VerificationReport, ORIENTATION,
};
