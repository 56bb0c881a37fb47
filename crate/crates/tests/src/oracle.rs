//! Slow reference implementations used to check the library.

use std::collections::{BTreeMap, BTreeSet};

use knotwork::knot::{BraidWord, LinkDiagram};
use knotwork::tensor::NetworkGraph;
use knotwork::LaurentPoly;
use nalgebra::DMatrix;
use num_complex::Complex64;

pub type Poly = BTreeMap<i32, i128>;

fn add(p: &mut Poly, e: i32, c: i128) {
    let v = p.entry(e).or_insert(0);
    *v += c;
    if *v == 0 {
        p.remove(&e);
    }
}

fn shift(p: &Poly, by: i32) -> Poly {
    p.iter().map(|(&e, &c)| (e + by, c)).collect()
}

fn sum(a: Poly, b: &Poly) -> Poly {
    let mut a = a;
    for (&e, &c) in b {
        add(&mut a, e, c);
    }
    a
}

/// δ^k with δ = -A² - A⁻².
fn delta_pow(k: usize) -> Poly {
    let mut p: Poly = BTreeMap::from([(0, 1)]);
    for _ in 0..k {
        let mut q = Poly::new();
        for (&e, &c) in &p {
            add(&mut q, e + 2, -c);
            add(&mut q, e - 2, -c);
        }
        p = q;
    }
    p
}

/// The bracket by the skein relation ⟨X⟩ = A⟨A-smoothing⟩ + A⁻¹⟨B-smoothing⟩.
/// Each smoothing renames one arc label to another; once no crossings remain
/// the loops are the distinct names left.
pub fn skein_bracket(d: &LinkDiagram) -> Poly {
    let crossings: Vec<[u32; 4]> = d.crossings().iter().map(|c| c.arcs).collect();
    let labels: BTreeSet<u32> = crossings.iter().flatten().copied().collect();
    let names: BTreeMap<u32, u32> = labels.iter().map(|&l| (l, l)).collect();
    skein(&crossings, names, d.free_loops().len())
}

fn skein(rest: &[[u32; 4]], names: BTreeMap<u32, u32>, free: usize) -> Poly {
    let Some((&[a, b, c, d], tail)) = rest.split_first() else {
        let loops = names.values().collect::<BTreeSet<_>>().len() + free;
        return delta_pow(loops.saturating_sub(1));
    };
    let rename = |names: &BTreeMap<u32, u32>, from: u32, to: u32| -> BTreeMap<u32, u32> {
        let (from, to) = (names[&from], names[&to]);
        names
            .iter()
            .map(|(&k, &v)| (k, if v == from { to } else { v }))
            .collect()
    };
    let a_names = rename(&rename(&names, b, a), d, c);
    let b_names = rename(&rename(&names, d, a), c, b);
    sum(shift(&skein(tail, a_names, free), 1), &shift(&skein(tail, b_names, free), -1))
}

pub fn as_poly(p: &LaurentPoly) -> Poly {
    p.terms().collect()
}

fn c1() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

/// Operator of a braid on (C^d)^{⊗n}: letter operators multiplied with the
/// first letter rightmost.
pub fn dense_braid_operator(b: &BraidWord, r: &DMatrix<Complex64>, d: usize) -> DMatrix<Complex64> {
    let n = b.strand_count();
    let dim = d.pow(n as u32);
    let mut op = DMatrix::<Complex64>::identity(dim, dim);
    let rinv = r.adjoint();
    for l in b.letters() {
        let i = l.index - 1;
        let left = DMatrix::<Complex64>::identity(d.pow(i as u32), d.pow(i as u32));
        let right_n = d.pow((n - i - 2) as u32);
        let right = DMatrix::<Complex64>::identity(right_n, right_n);
        let m = if l.exponent > 0 { r } else { &rinv };
        let full = left.kronecker(m).kronecker(&right);
        op = full * op;
    }
    op
}

pub fn dense_braid_trace(b: &BraidWord, r: &DMatrix<Complex64>, d: usize) -> Complex64 {
    dense_braid_operator(b, r, d).trace()
}

/// Sum over every assignment of values to every edge and free end, in
/// free-end row-major order.
pub fn brute_force_contract(g: &NetworkGraph) -> Vec<Complex64> {
    let edges = g.edges();
    let ends = g.free_ends();
    let dims: Vec<usize> = edges
        .iter()
        .map(|&(a, _)| g.port_dimension(a))
        .chain(ends.iter().map(|&p| g.port_dimension(p)))
        .collect();
    let mut slot_of = BTreeMap::new();
    for (k, &(a, b)) in edges.iter().enumerate() {
        slot_of.insert(a, k);
        slot_of.insert(b, k);
    }
    for (k, &p) in ends.iter().enumerate() {
        slot_of.insert(p, edges.len() + k);
    }
    let out_len: usize = ends.iter().map(|&p| g.port_dimension(p)).product();
    let mut out = vec![Complex64::new(0.0, 0.0); out_len];
    let total: usize = dims.iter().product();
    let mut val = vec![0usize; dims.len()];
    for _ in 0..total {
        let mut prod = c1();
        for (id, node) in g.nodes().iter().enumerate() {
            let mut off = 0;
            for (s, &dim) in node.shape.iter().enumerate() {
                off = off * dim + val[slot_of[&knotwork::tensor::Port::new(id, s)]];
            }
            prod *= node.entries[off];
        }
        let mut o = 0;
        for (k, &p) in ends.iter().enumerate() {
            o = o * g.port_dimension(p) + val[edges.len() + k];
        }
        out[o] += prod;
        for k in (0..val.len()).rev() {
            val[k] += 1;
            if val[k] < dims[k] {
                break;
            }
            val[k] = 0;
        }
    }
    out
}

/// Whether qubit `q` factors out: the 2×2^(n-1) reshape has all 2×2 minors
/// below `tol` relative to the largest squared amplitude.
pub fn qubit_factors_out(amps: &[Complex64], q: usize, tol: f64) -> bool {
    let n = amps.len().trailing_zeros() as usize;
    let shift = n - 1 - q;
    let row = |b: usize| -> Vec<Complex64> {
        (0..1usize << (n - 1))
            .map(|r| {
                let high = (r >> shift) << (shift + 1);
                let low = r & ((1 << shift) - 1);
                amps[high | (b << shift) | low]
            })
            .collect()
    };
    let (r0, r1) = (row(0), row(1));
    let scale = amps.iter().map(|a| a.norm_sqr()).fold(0.0, f64::max);
    for j in 0..r0.len() {
        for k in j + 1..r0.len() {
            if (r0[j] * r1[k] - r0[k] * r1[j]).norm() > tol * scale {
                return false;
            }
        }
    }
    true
}

pub fn fully_product_oracle(amps: &[Complex64], tol: f64) -> bool {
    let n = amps.len().trailing_zeros() as usize;
    n == 1 || (0..n).all(|q| qubit_factors_out(amps, q, tol))
}
