//! Selection rules over binary sequences, compression-based complexity
//! estimates, and the bias-versus-complexity bound that ties them together.
//!
//! The pieces, bottom up:
//!
//! - [`bitstream`]: packed sequences, deterministic sources, file formats.
//! - [`rulevm`]: finite-state selection rules, their text and binary forms,
//!   and the VM that runs them.
//! - [`complexity`]: LZ78 and block-entropy upper bounds on complexity, and
//!   the derived randomness deficiency.
//! - [`metrics`]: bias of a selection and the bound on it.
//! - [`experiment`]: ensemble runs, calibration, CSV/JSON output.
//! - [`cli`]: the `selstab` command line.

pub mod bitstream;
pub mod cli;
pub mod complexity;
pub mod error;
pub mod experiment;
pub mod metrics;
pub mod rulevm;

pub use bitstream::{frequency, generate, BitSequence, SourceSpec};
pub use complexity::{ComplexityEstimate, Estimator};
pub use error::{Error, Result};
pub use metrics::{bias, bound_report, eq2_bound, BoundReport};
pub use rulevm::{parse_rule, run_rule, HaltReason, SelectionResult, SelectionRule};
