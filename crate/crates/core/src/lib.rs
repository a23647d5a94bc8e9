//! Essence kernel metamodel, the `.ess` method description language, TOGAF
//! ADM mapping, lints and enactment.

pub mod cli;
pub mod diagnostic;
pub mod dsl;
pub mod lint;
pub mod metamodel;
pub mod progress;
pub mod togaf;
pub mod validator;

pub use diagnostic::{Diagnostic, RuleId, Severity, SourceSpan};
pub use metamodel::{ElementId, ModelDocument};
pub use validator::{check_wellformedness, resolve, ResolvedModel, ValidationConfig};
