//! CCP and NTCC interpreter built on an in-crate finite-domain and
//! finite-set constraint store.

pub mod ccp;
pub mod dsl;
pub mod fo;
pub mod models;
pub mod ntcc;
pub mod program;
pub mod search;
pub mod store;
pub mod term;
pub mod vars;

pub use ccp::{run_ccp, Exec, ExecError, StoreSnapshot, VarValue};
pub use program::Program;
