//! The program-synthesis classifier: a DSL over parsings, an MDL cost
//! model, sketch search with constraint solving under per-verification
//! time limits, and two-program compatibility classification.

pub mod classify;
pub mod dsl;
pub mod fit;
pub mod search;
pub mod smtlib;
pub mod solver;

pub use classify::{classify, Decision};
pub use dsl::{DslError, LatentRole, LinExpr, Program, Statement};
pub use fit::{fit, FitConfig, FitResult};
pub use search::{synthesize, synthesize_with_log, Budget, SynthError};
