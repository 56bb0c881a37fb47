use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use super::contract::{contract, Tensor};
use super::network::{DensityInsertion, KetVector, NetworkGraph, Port, TensorNode};
use crate::error::{Error, Result};
use crate::knot::{BraidLetter, BraidWord};

pub type CMatrix = DMatrix<Complex64>;

/// Tolerance the default crossing tensor must meet.
pub const DEFAULT_R_TOLERANCE: f64 = 1e-12;
/// Tolerance a user supplied tensor must meet before building a network.
pub const NETWORK_R_TOLERANCE: f64 = 1e-9;

/// An operator on V⊗V, dim V = d. As a node its ports are
/// `[out1, out2, in1, in2]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossingTensor {
    d: usize,
    r: CMatrix,
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

impl CrossingTensor {
    pub fn new(r: CMatrix) -> Result<Self> {
        let n = r.nrows();
        let d = (n as f64).sqrt().round() as usize;
        if r.ncols() != n || d * d != n || d == 0 {
            return Err(Error::Shape(format!(
                "crossing tensor must be d²×d², got {}×{}",
                r.nrows(),
                r.ncols()
            )));
        }
        Ok(Self { d, r })
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Shape("crossing tensor must be square".into()));
        }
        Self::new(CMatrix::from_row_slice(n, n, &rows.concat()))
    }

    /// The Bell-basis change matrix, verified unitary and braided.
    pub fn bell() -> Result<Self> {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        #[rustfmt::skip]
        let rows = [
            1.0, 0.0, 0.0, 1.0,
            0.0, 1.0, -1.0, 0.0,
            0.0, 1.0, 1.0, 0.0,
            -1.0, 0.0, 0.0, 1.0,
        ];
        let r = Self::new(CMatrix::from_row_iterator(4, 4, rows.iter().map(|&x| c(s * x))))?;
        r.verify(DEFAULT_R_TOLERANCE)?;
        Ok(r)
    }

    pub fn identity(d: usize) -> Self {
        Self {
            d,
            r: CMatrix::identity(d * d, d * d),
        }
    }

    pub fn swap(d: usize) -> Self {
        let mut r = CMatrix::zeros(d * d, d * d);
        for i in 0..d {
            for j in 0..d {
                r[(j * d + i, i * d + j)] = c(1.0);
            }
        }
        Self { d, r }
    }

    pub fn dimension(&self) -> usize {
        self.d
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.r
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        is_unitary(&self.r, tol)
    }

    pub fn check_yang_baxter(&self, tol: f64) -> bool {
        check_yang_baxter(self, tol)
    }

    pub fn verify(&self, tol: f64) -> Result<()> {
        if !self.is_unitary(tol) {
            return Err(Error::CrossingTensor(format!("not unitary within {tol:e}")));
        }
        if !self.check_yang_baxter(tol) {
            return Err(Error::CrossingTensor(format!(
                "fails the Yang–Baxter equation within {tol:e}"
            )));
        }
        Ok(())
    }

    fn node(&self, inverse: bool) -> TensorNode {
        let m = if inverse { self.r.adjoint() } else { self.r.clone() };
        let n = self.d * self.d;
        let entries = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|ij| m[ij]).collect();
        TensorNode::new(vec![self.d; 4], entries).expect("shape matches")
    }
}

pub fn is_unitary(m: &CMatrix, tol: f64) -> bool {
    m.is_square() && max_abs_diff(&(m.adjoint() * m), &CMatrix::identity(m.nrows(), m.ncols())) <= tol
}

fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// (R⊗I)(I⊗R)(R⊗I) = (I⊗R)(R⊗I)(I⊗R) entrywise within `tol`.
pub fn check_yang_baxter(r: &CrossingTensor, tol: f64) -> bool {
    let id = CMatrix::identity(r.d, r.d);
    let r1 = r.r.kronecker(&id);
    let r2 = id.kronecker(&r.r);
    max_abs_diff(&(&r1 * &r2 * &r1), &(&r2 * &r1 * &r2)) <= tol
}

/// The closure network of a braid together with its measurement sites.
#[derive(Debug, Clone)]
pub struct LinkNetwork {
    pub graph: NetworkGraph,
    pub braid: BraidWord,
    /// `closure_edges[j]` closes strand position `j`.
    pub closure_edges: Vec<usize>,
    /// Component of the closure through position `j`.
    pub position_components: Vec<usize>,
    r: CrossingTensor,
}

/// One crossing node per letter (R for positive letters, R⁻¹ for negative),
/// plus one identity node per strand position whose row feeds the top of
/// the braid and whose column receives the bottom. Node j (< n) is the
/// identity at position j; the edge from its row is the closure edge, so
/// cutting it puts the bra on the braid output and the ket on its input.
/// The contraction is the plain trace of the braid operator, first letter
/// applied first.
pub fn link_to_network(b: &BraidWord, r: &CrossingTensor) -> Result<LinkNetwork> {
    r.verify(NETWORK_R_TOLERANCE)?;
    let n = b.strand_count();
    let d = r.d;
    let eye: Vec<Complex64> = (0..d * d)
        .map(|k| c(if k / d == k % d { 1.0 } else { 0.0 }))
        .collect();
    let mut nodes: Vec<TensorNode> = (0..n)
        .map(|_| TensorNode::new(vec![d, d], eye.clone()).expect("identity"))
        .collect();
    let mut edges = Vec::new();
    let mut closure_edges = vec![usize::MAX; n];
    // Port currently carrying the output at each position.
    let mut cur: Vec<Port> = (0..n).map(|j| Port::new(j, 0)).collect();
    let mut join = |edges: &mut Vec<(Port, Port)>, from: Port, to: Port, j: usize| {
        if from.node < n && from.slot == 0 {
            closure_edges[j] = edges.len();
        }
        edges.push((from, to));
    };
    let pos = |l: &BraidLetter| l.index - 1;
    for l in b.letters() {
        let id = nodes.len();
        nodes.push(r.node(l.exponent < 0));
        let i = pos(l);
        join(&mut edges, cur[i], Port::new(id, 2), i);
        join(&mut edges, cur[i + 1], Port::new(id, 3), i + 1);
        cur[i] = Port::new(id, 0);
        cur[i + 1] = Port::new(id, 1);
    }
    for (j, &p) in cur.iter().enumerate() {
        join(&mut edges, p, Port::new(j, 1), j);
    }
    let graph = NetworkGraph::new(nodes, edges, vec![])?;
    let (_, position_components) = b.closure_with_strands();
    Ok(LinkNetwork {
        graph,
        braid: b.clone(),
        closure_edges,
        position_components,
        r: r.clone(),
    })
}

/// The braid with every strand of component `c` removed, or `None` when
/// nothing would remain.
pub fn delete_braid_component(ln: &LinkNetwork, c: usize) -> Result<Option<BraidWord>> {
    let n = ln.braid.strand_count();
    if !ln.position_components.contains(&c) {
        return Err(Error::UnknownComponent(c));
    }
    let gone: Vec<bool> = (0..n).map(|j| ln.position_components[j] == c).collect();
    let kept = gone.iter().filter(|g| !**g).count();
    if kept == 0 {
        return Ok(None);
    }
    // at[p] is the top position of the strand now at position p.
    let mut at: Vec<usize> = (0..n).collect();
    let mut letters = Vec::new();
    for l in ln.braid.letters() {
        let i = l.index - 1;
        let (x, y) = (at[i], at[i + 1]);
        if !gone[x] && !gone[y] {
            let rank = at[..i].iter().filter(|&&s| !gone[s]).count();
            letters.push(BraidLetter::new(rank + 1, l.exponent));
        }
        at.swap(i, i + 1);
    }
    BraidWord::new(kept, letters).map(Some)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeasureReport {
    pub component: usize,
    pub edge: usize,
    /// Contraction with the insertion.
    pub cut: Complex64,
    /// Contraction of the uncut network.
    pub uncut: Complex64,
    /// Evaluation of the braid with the component deleted.
    pub deleted: Option<Complex64>,
}

fn scalar(t: Tensor) -> Complex64 {
    t.scalar().expect("closed network")
}

pub fn measure_edge(ln: &LinkNetwork, e: usize, rho: &DensityInsertion) -> Result<MeasureReport> {
    let j = ln
        .closure_edges
        .iter()
        .position(|&x| x == e)
        .ok_or(Error::UnknownEdge(e))?;
    let component = ln.position_components[j];
    let cut = scalar(contract(&ln.graph.insert_ketbra(e, rho)?)?);
    let uncut = scalar(contract(&ln.graph)?);
    let deleted = match delete_braid_component(ln, component)? {
        Some(w) => Some(scalar(contract(&link_to_network(&w, &ln.r)?.graph)?)),
        None => None,
    };
    Ok(MeasureReport {
        component,
        edge: e,
        cut,
        uncut,
        deleted,
    })
}

/// Measure at the closure edge of the first position of component `c`.
pub fn measure_component(ln: &LinkNetwork, c: usize, rho: &DensityInsertion) -> Result<MeasureReport> {
    let j = ln
        .position_components
        .iter()
        .position(|&x| x == c)
        .ok_or(Error::UnknownComponent(c))?;
    measure_edge(ln, ln.closure_edges[j], rho)
}

/// Basis insertion ρ for the amplitude ⟨e_a| · |e_b⟩.
pub fn basis_insertion(d: usize, a: usize, b: usize) -> Result<DensityInsertion> {
    Ok(DensityInsertion::for_amplitude(
        &KetVector::basis(d, a)?,
        &KetVector::basis(d, b)?,
    ))
}
