use std::collections::HashMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_MAX_DIMENSION: usize = 8;
pub const DEFAULT_MAX_NODES: usize = 64;

/// A port of a node: `(node id, slot)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Port {
    pub node: usize,
    pub slot: usize,
}

impl Port {
    pub fn new(node: usize, slot: usize) -> Self {
        Self { node, slot }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    #[default]
    Tensor,
    Ket,
    Bra,
}

/// A dense tensor, row-major over its ports.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorNode {
    pub shape: Vec<usize>,
    pub entries: Vec<Complex64>,
    pub kind: NodeKind,
}

impl TensorNode {
    pub fn new(shape: Vec<usize>, entries: Vec<Complex64>) -> Result<Self> {
        let n: usize = shape.iter().product();
        if n != entries.len() {
            return Err(Error::Dimension(format!(
                "shape {shape:?} needs {n} entries, found {}",
                entries.len()
            )));
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Dimension("non-finite tensor entry".into()));
        }
        Ok(Self {
            shape,
            entries,
            kind: NodeKind::Tensor,
        })
    }

    /// A d×d matrix as a 2-port node (row port 0, column port 1).
    pub fn matrix(rows: &[Vec<Complex64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Dimension("ragged matrix".into()));
        }
        Self::new(vec![r, c], rows.concat())
    }

    pub fn rank(&self) -> usize {
        self.shape.len()
    }

    pub fn with_kind(mut self, kind: NodeKind) -> Self {
        self.kind = kind;
        self
    }
}

/// Tensor network: nodes are identified by their index, edges by theirs.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkGraph {
    nodes: Vec<TensorNode>,
    edges: Vec<(Port, Port)>,
    free_ends: Vec<Port>,
}

impl NetworkGraph {
    pub fn new(nodes: Vec<TensorNode>, edges: Vec<(Port, Port)>, free_ends: Vec<Port>) -> Result<Self> {
        let g = Self {
            nodes,
            edges,
            free_ends,
        };
        g.validate()?;
        Ok(g)
    }

    fn validate(&self) -> Result<()> {
        if self.nodes.len() > DEFAULT_MAX_NODES {
            return Err(Error::CapExceeded {
                what: "node count",
                value: self.nodes.len(),
                cap: DEFAULT_MAX_NODES,
            });
        }
        let mut used: HashMap<Port, usize> = HashMap::new();
        let dim = |p: Port| -> Result<usize> {
            self.nodes
                .get(p.node)
                .and_then(|n| n.shape.get(p.slot))
                .copied()
                .ok_or_else(|| Error::Dimension(format!("no port {}:{}", p.node, p.slot)))
        };
        let mut mark = |p: Port| -> Result<()> {
            dim(p)?;
            if used.insert(p, 1).is_some() {
                return Err(Error::Dimension(format!("port {}:{} used twice", p.node, p.slot)));
            }
            Ok(())
        };
        for &(a, b) in &self.edges {
            mark(a)?;
            mark(b)?;
            if dim(a)? != dim(b)? {
                return Err(Error::Dimension(format!(
                    "edge {}:{} - {}:{} joins dimensions {} and {}",
                    a.node,
                    a.slot,
                    b.node,
                    b.slot,
                    dim(a)?,
                    dim(b)?
                )));
            }
        }
        for &p in &self.free_ends {
            mark(p)?;
        }
        for (id, n) in self.nodes.iter().enumerate() {
            for (slot, &d) in n.shape.iter().enumerate() {
                if d == 0 || d > DEFAULT_MAX_DIMENSION {
                    return Err(Error::CapExceeded {
                        what: "port dimension",
                        value: d,
                        cap: DEFAULT_MAX_DIMENSION,
                    });
                }
                if !used.contains_key(&Port::new(id, slot)) {
                    return Err(Error::Dimension(format!("port {id}:{slot} is unconnected")));
                }
            }
        }
        Ok(())
    }

    pub fn nodes(&self) -> &[TensorNode] {
        &self.nodes
    }

    pub fn edges(&self) -> &[(Port, Port)] {
        &self.edges
    }

    pub fn free_ends(&self) -> &[Port] {
        &self.free_ends
    }

    pub fn port_dimension(&self, p: Port) -> usize {
        self.nodes[p.node].shape[p.slot]
    }

    /// Shape of the contracted tensor.
    pub fn output_shape(&self) -> Vec<usize> {
        self.free_ends.iter().map(|&p| self.port_dimension(p)).collect()
    }

    /// Remove edge `e` and append its two ports to the free ends, lower
    /// `(node, slot)` first.
    pub fn cut_edge(&self, e: usize) -> Result<Self> {
        if e >= self.edges.len() {
            return Err(Error::UnknownEdge(e));
        }
        let mut g = self.clone();
        let (a, b) = g.edges.remove(e);
        g.free_ends.push(a.min(b));
        g.free_ends.push(a.max(b));
        Ok(g)
    }

    /// Join free ends `i` and `j` with a new edge, appended last.
    pub fn reconnect(&self, i: usize, j: usize) -> Result<Self> {
        let n = self.free_ends.len();
        if i >= n {
            return Err(Error::UnknownFreeEnd(i));
        }
        if j >= n || i == j {
            return Err(Error::UnknownFreeEnd(j));
        }
        let (a, b) = (self.free_ends[i], self.free_ends[j]);
        let mut g = self.clone();
        g.free_ends.retain(|&p| p != a && p != b);
        g.edges.push((a.min(b), a.max(b)));
        g.validate()?;
        Ok(g)
    }

    fn attach(&self, end: usize, entries: &[Complex64], kind: NodeKind) -> Result<Self> {
        let p = *self.free_ends.get(end).ok_or(Error::UnknownFreeEnd(end))?;
        let d = self.port_dimension(p);
        if entries.len() != d {
            return Err(Error::Dimension(format!(
                "vector of length {} on an end of dimension {d}",
                entries.len()
            )));
        }
        let mut g = self.clone();
        g.free_ends.remove(end);
        let id = g.nodes.len();
        g.nodes
            .push(TensorNode::new(vec![d], entries.to_vec())?.with_kind(kind));
        g.edges.push((p, Port::new(id, 0)));
        g.validate()?;
        Ok(g)
    }

    pub fn insert_ket(&self, end: usize, v: &KetVector) -> Result<Self> {
        self.attach(end, &v.0, NodeKind::Ket)
    }

    pub fn insert_bra(&self, end: usize, v: &BraVector) -> Result<Self> {
        self.attach(end, &v.0, NodeKind::Bra)
    }

    /// Cut edge `e` and insert the bra on the first new end, the ket on the
    /// second. For a trace network this evaluates tr(ρ M).
    pub fn insert_ketbra(&self, e: usize, rho: &DensityInsertion) -> Result<Self> {
        let g = self.cut_edge(e)?;
        let n = g.free_ends.len();
        g.insert_ket(n - 1, &rho.ket)?.insert_bra(n - 2, &rho.bra)
    }

    /// Disjoint union; node ids of `other` are shifted and its free ends
    /// follow ours.
    pub fn juxtapose(&self, other: &NetworkGraph) -> Result<Self> {
        let off = self.nodes.len();
        let shift = |p: Port| Port::new(p.node + off, p.slot);
        let mut nodes = self.nodes.clone();
        nodes.extend(other.nodes.iter().cloned());
        let mut edges = self.edges.clone();
        edges.extend(other.edges.iter().map(|&(a, b)| (shift(a), shift(b))));
        let mut free_ends = self.free_ends.clone();
        free_ends.extend(other.free_ends.iter().map(|&p| shift(p)));
        Self::new(nodes, edges, free_ends)
    }

    /// Entrywise complex conjugate network.
    pub fn conjugate(&self) -> Self {
        let mut g = self.clone();
        for n in &mut g.nodes {
            for z in &mut n.entries {
                *z = z.conj();
            }
        }
        g
    }

    /// The probability network for a single measurement site: with the ket
    /// node b and bra node a removed, the rest R is joined to its conjugate
    /// through ρ_aa and ρ_bb, giving tr(ρ_bb R† ρ_aa R) = |⟨a|R|b⟩|².
    pub fn double(&self) -> Result<Self> {
        if !self.free_ends.is_empty() {
            return Err(Error::Shape("doubling needs a closed network".into()));
        }
        let find = |k: NodeKind| -> Result<usize> {
            let ids: Vec<usize> = (0..self.nodes.len())
                .filter(|&i| self.nodes[i].kind == k)
                .collect();
            match ids[..] {
                [id] => Ok(id),
                _ => Err(Error::Shape(format!(
                    "expected exactly one {k:?} insertion, found {}",
                    ids.len()
                ))),
            }
        };
        let (ket, bra) = (find(NodeKind::Ket)?, find(NodeKind::Bra)?);
        let partner = |id: usize| -> Port {
            self.edges
                .iter()
                .find_map(|&(a, b)| {
                    if a.node == id {
                        Some(b)
                    } else if b.node == id {
                        Some(a)
                    } else {
                        None
                    }
                })
                .expect("validated insertion is connected")
        };
        let (pq, pp) = (partner(ket), partner(bra));
        if pq.node == bra || pp.node == ket {
            return Err(Error::Shape("ket joined directly to bra".into()));
        }

        // Rest of the network with ket and bra removed and ids compacted.
        let keep: Vec<usize> = (0..self.nodes.len()).filter(|&i| i != ket && i != bra).collect();
        let remap: HashMap<usize, usize> = keep.iter().enumerate().map(|(n, &o)| (o, n)).collect();
        let mv = |p: Port| Port::new(remap[&p.node], p.slot);
        let rest = NetworkGraph {
            nodes: keep.iter().map(|&i| self.nodes[i].clone()).collect(),
            edges: self
                .edges
                .iter()
                .filter(|(a, b)| ![a.node, b.node].iter().any(|n| *n == ket || *n == bra))
                .map(|&(a, b)| (mv(a), mv(b)))
                .collect(),
            free_ends: vec![mv(pp), mv(pq)],
        };
        let half = rest.nodes.len();
        let mut g = rest.juxtapose(&rest.conjugate())?;
        let a = &self.nodes[bra].entries;
        let b = &self.nodes[ket].entries;
        let outer = |u: &[Complex64]| -> Vec<Complex64> {
            u.iter()
                .flat_map(|x| u.iter().map(move |y| x * y.conj()))
                .collect()
        };
        let (da, db) = (a.len(), b.len());
        let rho_a = g.nodes.len();
        g.nodes.push(TensorNode::new(vec![da, da], outer(a))?);
        g.nodes.push(TensorNode::new(vec![db, db], outer(b))?);
        let (p, q) = (mv(pp), mv(pq));
        let conj = |x: Port| Port::new(x.node + half, x.slot);
        g.edges.push((p, Port::new(rho_a, 0)));
        g.edges.push((conj(p), Port::new(rho_a, 1)));
        g.edges.push((q, Port::new(rho_a + 1, 0)));
        g.edges.push((conj(q), Port::new(rho_a + 1, 1)));
        g.free_ends.clear();
        g.validate()?;
        Ok(g)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&NetworkJson::from(self)).expect("network serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let j: NetworkJson = serde_json::from_str(text).map_err(|e| {
            Error::parse(line_offset(text, e.line(), e.column()), e.to_string())
        })?;
        j.try_into()
    }
}

fn line_offset(text: &str, line: usize, column: usize) -> usize {
    let before: usize = text
        .split_inclusive('\n')
        .take(line.saturating_sub(1))
        .map(str::len)
        .sum();
    before + column.saturating_sub(1)
}

/// A ket |v⟩.
#[derive(Debug, Clone, PartialEq)]
pub struct KetVector(pub Vec<Complex64>);

/// A covector; entries are used as given, so ⟨a| holds conj(a).
#[derive(Debug, Clone, PartialEq)]
pub struct BraVector(pub Vec<Complex64>);

impl KetVector {
    pub fn basis(d: usize, i: usize) -> Result<Self> {
        if i >= d {
            return Err(Error::Dimension(format!("basis index {i} for dimension {d}")));
        }
        let mut v = vec![Complex64::new(0.0, 0.0); d];
        v[i] = Complex64::new(1.0, 0.0);
        Ok(Self(v))
    }

    pub fn dual(&self) -> BraVector {
        BraVector(self.0.iter().map(|z| z.conj()).collect())
    }
}

/// ρ with entries `ket_i · bra_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityInsertion {
    pub ket: KetVector,
    pub bra: BraVector,
}

impl DensityInsertion {
    pub fn new(ket: KetVector, bra: BraVector) -> Self {
        Self { ket, bra }
    }

    /// The insertion whose trace against M is the amplitude ⟨a|M|b⟩.
    pub fn for_amplitude(a: &KetVector, b: &KetVector) -> Self {
        Self::new(b.clone(), a.dual())
    }

    pub fn matrix(&self) -> Vec<Vec<Complex64>> {
        self.ket
            .0
            .iter()
            .map(|k| self.bra.0.iter().map(|b| k * b).collect())
            .collect()
    }
}

/// A chain M1 - M2 - ... whose contraction is the ordered product, with
/// free ends (row of M1, column of Mk).
pub fn matrix_chain_network(ms: &[TensorNode]) -> Result<NetworkGraph> {
    if ms.is_empty() {
        return Err(Error::Shape("empty matrix chain".into()));
    }
    if ms.iter().any(|m| m.rank() != 2) {
        return Err(Error::Shape("chain entries must be matrices".into()));
    }
    let mut edges = Vec::new();
    for i in 1..ms.len() {
        let (c, r) = (ms[i - 1].shape[1], ms[i].shape[0]);
        if c != r {
            return Err(Error::Dimension(format!(
                "matrix {} has {c} columns but matrix {i} has {r} rows",
                i - 1
            )));
        }
        edges.push((Port::new(i - 1, 1), Port::new(i, 0)));
    }
    NetworkGraph::new(
        ms.to_vec(),
        edges,
        vec![Port::new(0, 0), Port::new(ms.len() - 1, 1)],
    )
}

/// One node with its column joined to its row.
pub fn trace_network(m: &TensorNode) -> Result<NetworkGraph> {
    if m.rank() != 2 || m.shape[0] != m.shape[1] {
        return Err(Error::Shape(format!("trace needs a square matrix, got {:?}", m.shape)));
    }
    NetworkGraph::new(vec![m.clone()], vec![(Port::new(0, 0), Port::new(0, 1))], vec![])
}

#[derive(Serialize, Deserialize)]
struct NodeJson {
    id: usize,
    shape: Vec<usize>,
    entries: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "is_tensor")]
    kind: NodeKind,
}

fn is_tensor(k: &NodeKind) -> bool {
    *k == NodeKind::Tensor
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NetworkJson {
    nodes: Vec<NodeJson>,
    edges: Vec<[[usize; 2]; 2]>,
    free_ends: Vec<[usize; 2]>,
}

impl From<&NetworkGraph> for NetworkJson {
    fn from(g: &NetworkGraph) -> Self {
        let p = |p: Port| [p.node, p.slot];
        NetworkJson {
            nodes: g
                .nodes
                .iter()
                .enumerate()
                .map(|(id, n)| NodeJson {
                    id,
                    shape: n.shape.clone(),
                    entries: n.entries.iter().map(|z| [z.re, z.im]).collect(),
                    kind: n.kind,
                })
                .collect(),
            edges: g.edges.iter().map(|&(a, b)| [p(a), p(b)]).collect(),
            free_ends: g.free_ends.iter().map(|&x| p(x)).collect(),
        }
    }
}

impl TryFrom<NetworkJson> for NetworkGraph {
    type Error = Error;

    fn try_from(j: NetworkJson) -> Result<Self> {
        let mut nodes = Vec::with_capacity(j.nodes.len());
        for (i, n) in j.nodes.into_iter().enumerate() {
            if n.id != i {
                return Err(Error::Dimension(format!("node ids must be 0..n in order, found {} at {i}", n.id)));
            }
            let entries = n.entries.iter().map(|&[re, im]| Complex64::new(re, im)).collect();
            nodes.push(TensorNode::new(n.shape, entries)?.with_kind(n.kind));
        }
        let p = |[n, s]: [usize; 2]| Port::new(n, s);
        NetworkGraph::new(
            nodes,
            j.edges.into_iter().map(|[a, b]| (p(a), p(b))).collect(),
            j.free_ends.into_iter().map(p).collect(),
        )
    }
}
