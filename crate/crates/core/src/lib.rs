//! Resource-aware session types: a checker for potential-annotated binary
//! session types, a work-counting evaluator for process configurations, and
//! a monitor that checks the potential bound on every run.
//!
//! Programs are written in the `.rsill` surface syntax (see [`parser`]). The
//! usual pipeline is
//!
//! ```
//! use rsill_core::{parser, typechecker, runtime, Metric};
//!
//! let src = "proc main [] |1| () -> (c : 1^0) = close c";
//! let sig = parser::parse_program(src).unwrap();
//! let report = typechecker::check_signature(&sig, Metric::MESSAGES, 8);
//! assert!(report.ok());
//! let trace = runtime::run(&sig, "main", &runtime::RunOptions::default()).unwrap();
//! assert_eq!(trace.summary.total_work, 1);
//! ```

pub mod analysis;
pub mod error;
pub mod lang;
pub mod monitor;
pub mod parser;
pub mod runtime;
pub mod typechecker;

pub use error::LangError;
pub use lang::{
    eval_pot, type_equal, unfold, Arm, Branch, CostMode, IndexEnv, Metric, PotExpr, ProcDef, ProcExpr,
    SType, Signature, TypeDef,
};
