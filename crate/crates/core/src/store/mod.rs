//! Finite-domain integer/boolean and finite-set constraint store.
//!
//! A [`Space`] owns variable domains and propagators. Tells narrow domains or
//! register propagators; [`Space::status`] runs the pending propagators in
//! FIFO order until quiescence or failure. Guards can be reified into boolean
//! truth variables, and asks are propagators that hand a continuation id back
//! to the caller once their truth variable is assigned 1.

mod domain;
mod propagator;
mod space;

pub use domain::{IntDomain, SetDomain, Wipeout, INT_MAX, INT_MIN};
pub use space::{
    Branching, Condition, ContId, Global, Operand, Relop, Space, Status, StoreError, Tell, Truth,
    ValSel, VarId, VarKind, VarSel, VarView,
};
