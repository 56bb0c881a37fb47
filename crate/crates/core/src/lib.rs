//! Quantum knots and related machinery: link diagrams and braids, the bracket
//! state sum, superpositions of knot classes, multi-qubit entanglement
//! patterns, link entanglement patterns under component deletion, and
//! diagrammatic tensor networks with Yang–Baxter crossing tensors.

pub mod error;
pub mod knot;
pub mod bracket;
pub mod entangle;
pub mod laurent;
pub mod link_pattern;
pub mod quantum;
pub mod tensor;

pub use error::{Error, Result};
pub use laurent::LaurentPoly;
