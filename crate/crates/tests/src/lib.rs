//! Shared reference implementations for the acceptance checks in
//! `tests/acceptance.rs`.

pub mod oracle;
