//! Theorem censuses and the named-check registry.

pub mod census;
pub mod checks;
pub mod report;
pub mod rng;

pub use census::{census, rank_survivors, registered_exceptions, CensusSpec, SpaceKind, UNCLASSIFIED};
pub use checks::{check_names, check_statement, emit_check, run_check, CheckOptions, CheckReport};
pub use report::{emit_report, parse_report, CensusReport, ReportFormat};
