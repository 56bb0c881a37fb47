//! Flat diagrams: link diagrams with the over/under datum forgotten.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::knot::diagram::{ArcLabel, Crossing, CrossingSign, LinkDiagram};
use crate::knot::pd::parse_pd;

/// A 4-valent node. `arcs` is in counterclockwise order starting at an
/// incoming slot; the strand through slots 0 and 2 runs 0 → 2 and the other
/// enters at slot 3 and leaves at slot 1. Placing the 0 → 2 strand under
/// gives a positive crossing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FlatNode {
    pub arcs: [ArcLabel; 4],
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlatDiagram {
    nodes: Vec<FlatNode>,
    free_loops: Vec<ArcLabel>,
}

impl FlatDiagram {
    pub fn nodes(&self) -> &[FlatNode] {
        &self.nodes
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn free_loops(&self) -> &[ArcLabel] {
        &self.free_loops
    }

    /// The resolution with the given choice at each node: `false` gives a
    /// positive crossing, `true` a negative one.
    pub fn resolve(&self, choice: &[bool]) -> Result<LinkDiagram> {
        if choice.len() != self.nodes.len() {
            return Err(Error::Arity(format!(
                "{} choice bits for {} nodes",
                choice.len(),
                self.nodes.len()
            )));
        }
        let crossings = self
            .nodes
            .iter()
            .zip(choice)
            .map(|(n, &negative)| {
                let c = Crossing::new(n.arcs, CrossingSign::Positive);
                if negative {
                    c.switched()
                } else {
                    c
                }
            })
            .collect();
        LinkDiagram::from_parts(crossings, self.free_loops.clone())
    }

    /// Resolution number `index`: bit `N-1-k` of `index` is the choice at
    /// node `k`, so node 0 is the most significant bit.
    pub fn resolve_index(&self, index: u64) -> Result<LinkDiagram> {
        let n = self.nodes.len();
        let bits: Vec<bool> = (0..n).map(|k| (index >> (n - 1 - k)) & 1 == 1).collect();
        self.resolve(&bits)
    }
}

/// Forget the over/under datum at every crossing.
pub fn flatten(d: &LinkDiagram) -> FlatDiagram {
    FlatDiagram {
        nodes: d
            .crossings()
            .iter()
            .map(|c| FlatNode {
                arcs: match c.sign {
                    CrossingSign::Positive => c.arcs,
                    CrossingSign::Negative => c.switched().arcs,
                },
            })
            .collect(),
        free_loops: d.free_loops().to_vec(),
    }
}

/// Read a flat diagram from PD text; the over/under data in the text is
/// ignored apart from the orientation it implies.
pub fn parse_flat(text: &str) -> Result<FlatDiagram> {
    Ok(flatten(&parse_pd(text)?))
}
