//! Energy ledger, inequality margins and decay-rate fits.

pub(crate) mod calculus;
mod checks;
mod fit;
mod ledger;
mod report;

pub use checks::{
    field_term, field_term_closed_form, ledger_invariants, lyapunov_check, proposition_check, random_slice,
    static_inequality_check, LyapunovOptions, MultiIndex,
};
pub use fit::{fit_decay_rate, Fit};
pub use ledger::{compute_ledger, weighted_constant, z_weight, EnergyLedger, LedgerTerms, RawNorms};
pub use report::{CheckEntry, CheckReport, Locator, Status};
