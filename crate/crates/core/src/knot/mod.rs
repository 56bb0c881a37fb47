//! Link diagrams, braids and their elementary transformations.

pub mod braid;
pub mod diagram;
pub mod flat;
pub mod moves;
pub mod pd;

pub use braid::{parse_braid, BraidLetter, BraidWord};
pub use diagram::{ArcLabel, Component, Crossing, CrossingSign, DiagramJson, LinkDiagram};
pub use flat::{flatten, parse_flat, FlatDiagram, FlatNode};
pub use moves::{apply_reidemeister, enumerate_sites, faces, Face, Move, Side};
pub use pd::{parse_pd, to_pd_string};
