//! Library side of the `smws` command-line harness: number formatting and
//! the sweep engine, kept here so integration tests can drive them
//! directly.

pub mod fmt;
pub mod sweep;
