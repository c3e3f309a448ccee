//! lattc: a batch checker for a small dependently typed proof language whose
//! typing judgements are indexed by *dependency levels* drawn from a
//! configurable meet-semilattice of theory extensions.
//!
//! Every definition is checked at a level (a canonical set of enabled
//! extensions). Extension-gated constants (`K`, `em`, `funext_ax`, `ua_ax`)
//! may only be *used* at levels above their home, while types may freely
//! *mention* them. Definitional equality is observer-indexed: arguments
//! annotated strictly above the observer are not compared.

pub mod cli;
pub mod conversion;
pub mod elaborate;
pub mod kernel;
pub mod lattice;
pub mod pipeline;
pub mod report;
pub mod syntax;
pub mod term;

pub use kernel::{GlobalEnv, TypeError};
pub use lattice::{LatticeConfig, Level};
pub use term::Term;
