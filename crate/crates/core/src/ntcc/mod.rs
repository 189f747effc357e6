//! Timed execution: one fresh store per time unit, with queues carrying
//! `next`, `!`, `*` and `unless` work across units.

pub mod cells;
mod engine;
pub mod io;
pub mod validate;

pub use engine::{
    simulate, Cell, EngineConfig, EngineError, InputHook, OutputHook, TimedEngine, Timeline, Trace,
    UnitReport,
};
