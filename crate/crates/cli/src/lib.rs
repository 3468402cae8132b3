//! Library surface of the diskflow CLI, kept separate from the binary so
//! the command implementations are directly testable.

pub mod commands;
pub mod config;
pub mod output;
