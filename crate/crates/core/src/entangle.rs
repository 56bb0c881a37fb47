//! Multi-qubit pure states: partial measurement, product tests, entanglement
//! patterns and local basis changes.
//!
//! Amplitudes are stored densely in binary-index order with qubit 0 as the
//! most significant bit, so `|q0 q1 … q(n-1)⟩` reads left to right.

use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_QUBIT_CAP: usize = 20;
/// Environment variable overriding the qubit cap.
pub const QUBIT_CAP_ENV: &str = "KNOTWORK_QUBIT_CAP";

/// Relative singular-value threshold below which a reshaped amplitude matrix
/// counts as rank one.
pub const RANK_TOLERANCE: f64 = 1e-9;
const NEAR_LOW: f64 = 1e-12;
const NEAR_HIGH: f64 = 1e-6;
const NORM_TOLERANCE: f64 = 1e-9;

pub fn qubit_cap() -> usize {
    std::env::var(QUBIT_CAP_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .filter(|&v: &usize| v > 0)
        .unwrap_or(DEFAULT_QUBIT_CAP)
}

/// A 2×2 complex matrix, row-major.
pub type Mat2 = [[Complex64; 2]; 2];

#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    qubits: usize,
    amplitudes: Vec<Complex64>,
    normalized: bool,
}

impl PureState {
    /// A state from 2^n amplitudes. Flagged normalized when Σ|a|² = 1 within
    /// 1e-9.
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        let len = amplitudes.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::InvalidState(format!(
                "{len} amplitudes is not 2^n for n ≥ 1"
            )));
        }
        let qubits = len.trailing_zeros() as usize;
        let cap = qubit_cap();
        if qubits > cap {
            return Err(Error::CapExceeded {
                what: "qubit count",
                value: qubits,
                cap,
            });
        }
        if amplitudes.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::InvalidState("non-finite amplitude".into()));
        }
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        Ok(Self {
            qubits,
            amplitudes,
            normalized: (norm - 1.0).abs() <= NORM_TOLERANCE,
        })
    }

    pub fn from_real(amplitudes: &[f64]) -> Result<Self> {
        Self::new(amplitudes.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    /// Sparse construction from `(bitstring, amplitude)` pairs.
    pub fn from_terms(qubits: usize, terms: &[(&str, Complex64)]) -> Result<Self> {
        if qubits == 0 || qubits > qubit_cap() {
            return Err(Error::InvalidState(format!("bad qubit count {qubits}")));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << qubits];
        for (bits, a) in terms {
            amps[parse_bits(bits, qubits)?] += a;
        }
        Self::new(amps)
    }

    /// Computational basis state `|index⟩`.
    pub fn basis(qubits: usize, index: usize) -> Result<Self> {
        let mut amps = vec![Complex64::new(0.0, 0.0); 1usize << qubits];
        *amps
            .get_mut(index)
            .ok_or_else(|| Error::InvalidState(format!("basis index {index} out of range")))? =
            Complex64::new(1.0, 0.0);
        Self::new(amps)
    }

    pub fn qubit_count(&self) -> usize {
        self.qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitude(&self, bits: &str) -> Result<Complex64> {
        Ok(self.amplitudes[parse_bits(bits, self.qubits)?])
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn normalized(&self) -> Result<PureState> {
        let n = self.norm_sqr().sqrt();
        if n == 0.0 {
            return Err(Error::Unnormalized("zero vector".into()));
        }
        Ok(PureState {
            qubits: self.qubits,
            amplitudes: self.amplitudes.iter().map(|a| a / n).collect(),
            normalized: true,
        })
    }

    fn require_normalized(&self) -> Result<()> {
        if !self.normalized {
            return Err(Error::Unnormalized(format!(
                "Σ|a|² = {} (normalize the state first)",
                self.norm_sqr()
            )));
        }
        Ok(())
    }

    fn check_qubit(&self, q: usize) -> Result<()> {
        if q >= self.qubits {
            return Err(Error::InvalidState(format!(
                "qubit {q} out of range for {} qubits",
                self.qubits
            )));
        }
        Ok(())
    }

    /// Largest entrywise distance to another state of the same size.
    pub fn max_abs_diff(&self, other: &PureState) -> f64 {
        if self.qubits != other.qubits {
            return f64::INFINITY;
        }
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Text form accepted by [`parse_state`]: one `<bits> <re> <im>` line per
    /// nonzero amplitude.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (i, a) in self.amplitudes.iter().enumerate() {
            if *a != Complex64::new(0.0, 0.0) {
                out.push_str(&format!(
                    "{} {} {}\n",
                    bit_string(i, self.qubits),
                    fmt_sig(a.re),
                    fmt_sig(a.im)
                ));
            }
        }
        out
    }
}

impl fmt::Display for PureState {
    /// Ket sum such as `0.707106781187|000⟩ + 0.707106781187|111⟩`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, a) in self.amplitudes.iter().enumerate() {
            if *a == Complex64::new(0.0, 0.0) {
                continue;
            }
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            let coeff = if a.im == 0.0 {
                fmt_sig(a.re)
            } else {
                format!("({}{:+}i)", fmt_sig(a.re), a.im)
            };
            write!(f, "{}|{}⟩", coeff, bit_string(i, self.qubits))?;
        }
        if first {
            f.write_str("0")?;
        }
        Ok(())
    }
}

/// 12 significant digits, trailing zeros trimmed.
pub fn fmt_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    let s = format!("{:.*e}", 11, x);
    let v: f64 = s.parse().unwrap();
    let mut t = format!("{v}");
    if t.contains('e') || t.len() > 20 {
        t = format!("{v:e}");
    }
    t
}

pub fn bit_string(index: usize, qubits: usize) -> String {
    (0..qubits)
        .map(|q| if (index >> (qubits - 1 - q)) & 1 == 1 { '1' } else { '0' })
        .collect()
}

fn parse_bits(bits: &str, qubits: usize) -> Result<usize> {
    if bits.len() != qubits || !bits.chars().all(|c| c == '0' || c == '1') {
        return Err(Error::InvalidState(format!(
            "`{bits}` is not a {qubits}-bit string"
        )));
    }
    Ok(usize::from_str_radix(bits, 2).expect("binary digits"))
}

/// (|00⋯0⟩ + |11⋯1⟩)/√2.
pub fn ghz(n: usize) -> Result<PureState> {
    if n < 2 {
        return Err(Error::InvalidState(format!("GHZ needs n ≥ 2, got {n}")));
    }
    if n > qubit_cap() {
        return Err(Error::CapExceeded {
            what: "qubit count",
            value: n,
            cap: qubit_cap(),
        });
    }
    let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
    let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    amps[0] = h;
    amps[(1 << n) - 1] = h;
    PureState::new(amps)
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeBranch {
    pub qubit: usize,
    pub outcome: u8,
    pub probability: f64,
    /// The renormalized state of the other qubits; `None` when the outcome
    /// has probability zero or no qubits remain.
    pub residual: Option<PureState>,
}

/// Measure qubit `q` and post-select outcome `b`.
pub fn project_qubit(s: &PureState, q: usize, b: u8) -> Result<OutcomeBranch> {
    s.require_normalized()?;
    s.check_qubit(q)?;
    if b > 1 {
        return Err(Error::InvalidState(format!("outcome {b} is not a bit")));
    }
    let n = s.qubits;
    let shift = n - 1 - q;
    let rest: Vec<Complex64> = (0..1usize << (n - 1))
        .map(|r| {
            let high = (r >> shift) << (shift + 1);
            let low = r & ((1 << shift) - 1);
            s.amplitudes[high | ((b as usize) << shift) | low]
        })
        .collect();
    let probability: f64 = rest.iter().map(|a| a.norm_sqr()).sum();
    let residual = if probability > 0.0 && n > 1 {
        let norm = probability.sqrt();
        let mut r = PureState::new(rest.iter().map(|a| a / norm).collect())?;
        r.normalized = true;
        Some(r)
    } else {
        None
    };
    Ok(OutcomeBranch {
        qubit: q,
        outcome: b,
        probability,
        residual,
    })
}

/// Outcome of the singular-value product test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProductTest {
    pub product: bool,
    /// σ₂/σ₁ of the reshaped amplitude matrix.
    pub ratio: f64,
    /// Set when the ratio is within a few orders of magnitude of the
    /// threshold, where the verdict is sensitive to rounding.
    pub near_threshold: bool,
}

/// Rank test of the amplitude matrix with rows indexed by the `left` qubits.
pub fn product_test(s: &PureState, left: &[usize]) -> Result<ProductTest> {
    let n = s.qubits;
    let mut in_left = vec![false; n];
    for &q in left {
        s.check_qubit(q)?;
        in_left[q] = true;
    }
    let l = in_left.iter().filter(|&&x| x).count();
    if l == 0 || l == n {
        return Err(Error::InvalidState(
            "bipartition side must be a nonempty proper subset".into(),
        ));
    }
    let lq: Vec<usize> = (0..n).filter(|&q| in_left[q]).collect();
    let rq: Vec<usize> = (0..n).filter(|&q| !in_left[q]).collect();
    let gather = |idx: usize, qs: &[usize]| {
        qs.iter()
            .fold(0usize, |acc, &q| (acc << 1) | ((idx >> (n - 1 - q)) & 1))
    };
    let mut m = DMatrix::<Complex64>::zeros(1 << lq.len(), 1 << rq.len());
    for (idx, a) in s.amplitudes.iter().enumerate() {
        m[(gather(idx, &lq), gather(idx, &rq))] = *a;
    }
    let sv = m.svd(false, false).singular_values;
    let mut v: Vec<f64> = sv.iter().copied().collect();
    v.sort_by(|a, b| b.total_cmp(a));
    let s1 = v[0];
    if s1 == 0.0 {
        return Err(Error::InvalidState("zero vector".into()));
    }
    let ratio = v.get(1).copied().unwrap_or(0.0) / s1;
    Ok(ProductTest {
        product: ratio <= RANK_TOLERANCE,
        ratio,
        near_threshold: ratio > NEAR_LOW && ratio < NEAR_HIGH,
    })
}

/// Whether the state factors as ψ_left ⊗ ψ_right.
pub fn is_product_bipartition(s: &PureState, left: &[usize]) -> Result<bool> {
    Ok(product_test(s, left)?.product)
}

/// Whether every qubit factors off on its own, i.e. the state is a product
/// of single-qubit states. A 1-qubit state is trivially product.
pub fn is_fully_product(s: &PureState) -> bool {
    full_product_test(s).0
}

/// (fully product, any single-qubit cut near the threshold)
fn full_product_test(s: &PureState) -> (bool, bool) {
    if s.qubits == 1 {
        return (true, false);
    }
    let mut product = true;
    let mut near = false;
    for q in 0..s.qubits {
        let t = product_test(s, &[q]).expect("valid single-qubit cut");
        product &= t.product;
        near |= t.near_threshold;
    }
    (product, near)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchSummary {
    pub outcome: u8,
    pub probability: f64,
    /// `None` for a zero-probability branch.
    pub residual_entangled: Option<bool>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub near_threshold: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternRow {
    pub qubit: usize,
    pub branches: [BranchSummary; 2],
}

impl PatternRow {
    /// Probability that measuring this qubit leaves an entangled residual.
    pub fn entangled_probability(&self) -> f64 {
        self.branches
            .iter()
            .filter(|b| b.residual_entangled == Some(true))
            .map(|b| b.probability)
            .sum()
    }

    /// Both outcomes possible and both give the same verdict.
    pub fn is_deterministic(&self) -> bool {
        let v: Vec<bool> = self.branches.iter().filter_map(|b| b.residual_entangled).collect();
        v.windows(2).all(|w| w[0] == w[1])
    }
}

/// For every qubit and outcome: probability and whether the residual is
/// entangled (not fully product).
pub fn entanglement_pattern(s: &PureState) -> Result<Vec<PatternRow>> {
    s.require_normalized()?;
    if s.qubits < 2 {
        return Err(Error::InvalidState("pattern needs at least 2 qubits".into()));
    }
    (0..s.qubits)
        .into_par_iter()
        .map(|q| {
            let branch = |b: u8| -> Result<BranchSummary> {
                let br = project_qubit(s, q, b)?;
                let (entangled, near) = match &br.residual {
                    Some(r) => {
                        let (p, near) = full_product_test(r);
                        (Some(!p), near)
                    }
                    None => (None, false),
                };
                Ok(BranchSummary {
                    outcome: b,
                    probability: br.probability,
                    residual_entangled: entangled,
                    near_threshold: near,
                })
            };
            Ok(PatternRow {
                qubit: q,
                branches: [branch(0)?, branch(1)?],
            })
        })
        .collect()
}

/// Re-express qubit `q` in a new basis: column x of `m` holds the new-basis
/// coordinates of `|x⟩`, so c'_y = Σ_x m[y][x]·c_x. The result is flagged
/// unnormalized when `m` is not unitary.
pub fn apply_local_basis_change(s: &PureState, q: usize, m: &Mat2) -> Result<PureState> {
    s.check_qubit(q)?;
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let scale = m.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max);
    if det.norm() <= 1e-12 * scale * scale || scale == 0.0 {
        return Err(Error::Singular);
    }
    let n = s.qubits;
    let shift = n - 1 - q;
    let mut out = s.amplitudes.clone();
    for (i, slot) in out.iter_mut().enumerate() {
        let y = (i >> shift) & 1;
        let i0 = i & !(1 << shift);
        let i1 = i0 | (1 << shift);
        *slot = m[y][0] * s.amplitudes[i0] + m[y][1] * s.amplitudes[i1];
    }
    Ok(PureState {
        qubits: n,
        amplitudes: out,
        normalized: s.normalized && is_unitary(m, 1e-12),
    })
}

pub fn is_unitary(m: &Mat2, tol: f64) -> bool {
    for i in 0..2 {
        for j in 0..2 {
            let dot: Complex64 = (0..2).map(|k| m[k][i].conj() * m[k][j]).sum();
            let want = if i == j { 1.0 } else { 0.0 };
            if (dot - want).norm() > tol {
                return false;
            }
        }
    }
    true
}

pub fn invert(m: &Mat2) -> Result<Mat2> {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    if det.norm() == 0.0 {
        return Err(Error::Singular);
    }
    Ok([
        [m[1][1] / det, -m[0][1] / det],
        [-m[1][0] / det, m[0][0] / det],
    ])
}

/// Parse a complex number: `1`, `-0.5`, `2i`, `-i`, `1+2i`, `0.5-1e-3i`.
pub fn parse_complex(text: &str) -> Option<Complex64> {
    let t: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if t.is_empty() {
        return None;
    }
    if let Some(body) = t.strip_suffix(['i', 'j']) {
        // split at the last sign that is not part of an exponent
        let bytes = body.as_bytes();
        let split = (1..bytes.len())
            .rev()
            .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
        let (re, im) = match split {
            Some(k) => (&body[..k], &body[k..]),
            None => ("0", body),
        };
        let im = match im {
            "" | "+" => 1.0,
            "-" => -1.0,
            s => s.parse().ok()?,
        };
        Some(Complex64::new(re.parse().ok()?, im))
    } else {
        Some(Complex64::new(t.parse().ok()?, 0.0))
    }
}

/// Parse a 2×2 matrix written row-major as `a,b;c,d`.
pub fn parse_matrix(text: &str) -> Result<Mat2> {
    let rows: Vec<&str> = text.split(';').collect();
    if rows.len() != 2 {
        return Err(Error::parse(0, "matrix must have two rows separated by `;`"));
    }
    let mut m = [[Complex64::new(0.0, 0.0); 2]; 2];
    let mut pos = 0;
    for (r, row) in rows.iter().enumerate() {
        let cols: Vec<&str> = row.split(',').collect();
        if cols.len() != 2 {
            return Err(Error::parse(pos, "each matrix row needs two entries"));
        }
        for (c, e) in cols.iter().enumerate() {
            m[r][c] = parse_complex(e)
                .ok_or_else(|| Error::parse(pos, format!("bad matrix entry `{}`", e.trim())))?;
        }
        pos += row.len() + 1;
    }
    Ok(m)
}

/// Parse a state file: `ghz <n>`, or lines `<bitstring> <re> [<im>]`.
/// `#` starts a comment. Unlisted amplitudes are zero.
pub fn parse_state(text: &str) -> Result<PureState> {
    let mut terms: Vec<(usize, String, Complex64)> = Vec::new();
    let mut qubits = None;
    let mut offset = 0;
    for line in text.split_inclusive('\n') {
        let start = offset;
        offset += line.len();
        let body = line.split('#').next().unwrap_or("");
        let toks: Vec<&str> = body.split_whitespace().collect();
        if toks.is_empty() {
            continue;
        }
        let at = start + body.find(toks[0]).unwrap_or(0);
        if toks[0].eq_ignore_ascii_case("ghz") {
            let n: usize = toks
                .get(1)
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| Error::parse(at, "expected `ghz <n>`"))?;
            if !terms.is_empty() || toks.len() != 2 {
                return Err(Error::parse(at, "`ghz <n>` must be the only entry"));
            }
            let rest = &text[offset..];
            if rest.lines().any(|l| !l.split('#').next().unwrap_or("").trim().is_empty()) {
                return Err(Error::parse(offset, "`ghz <n>` must be the only entry"));
            }
            return ghz(n);
        }
        let bits = toks[0];
        if bits.is_empty() || !bits.chars().all(|c| c == '0' || c == '1') {
            return Err(Error::parse(at, format!("expected a bitstring, found `{bits}`")));
        }
        match qubits {
            None => qubits = Some(bits.len()),
            Some(q) if q != bits.len() => {
                return Err(Error::parse(
                    at,
                    format!("bitstring `{bits}` has {} bits, expected {q}", bits.len()),
                ))
            }
            _ => {}
        }
        if toks.len() < 2 || toks.len() > 3 {
            return Err(Error::parse(at, "expected `<bits> <re> <im>`"));
        }
        let num = |t: &str| -> Result<f64> {
            t.parse()
                .map_err(|_| Error::parse(at, format!("bad number `{t}`")))
        };
        let re = num(toks[1])?;
        let im = if toks.len() == 3 { num(toks[2])? } else { 0.0 };
        if terms.iter().any(|(_, b, _)| b == bits) {
            return Err(Error::parse(at, format!("duplicate entry for |{bits}⟩")));
        }
        terms.push((at, bits.to_string(), Complex64::new(re, im)));
    }
    let q = qubits.ok_or_else(|| Error::parse(0, "empty state file"))?;
    let pairs: Vec<(&str, Complex64)> = terms.iter().map(|(_, b, a)| (b.as_str(), *a)).collect();
    PureState::from_terms(q, &pairs)
}
