//! File-driven front end for [`gdm_core`]: JSON run configurations, CSV/JSON
//! output writers, and the validation studies behind the `gdm` binary.
//!
//! The library half exists so integration tests can drive studies and
//! output formatting in-process; all policy (exit codes, flag parsing)
//! lives in the binary.

pub mod config;
pub mod defaults;
pub mod harness;
pub mod io;
