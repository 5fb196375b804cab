//! Numerical verification of the production identities, concavity of the
//! Sharma-Mittal entropy power, the key `J_p`/`I_p` inequality and dilation
//! invariance.

mod checks;
mod report;
mod sweep;

pub use checks::{
    check_concavity, check_dilation_invariance, check_dilation_invariance_with_sigma, check_key_inequality,
    check_linear_heat, check_production_identities, check_production_identities_with_exponent, ConcavityOutcome,
    MIN_SNAPSHOTS,
};
pub use report::{CheckId, CheckKind, CheckParams, CheckReport, Sample, Tolerances};
pub use sweep::{check_pair, linspace, run_pair, PairOutcome, SweepConfig, SweepRow};
