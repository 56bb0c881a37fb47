//! Braid words and their closures.
//!
//! Text form: `n=<strands>: s<i>[^±1] ...`, generators numbered from 1.
//! Strands are drawn top to bottom; in σ_i the strand entering at position i
//! (counting from the left) passes under the one entering at i+1, which gives
//! a positive crossing when both strands are oriented downward.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::knot::diagram::{ArcLabel, Crossing, CrossingSign, LinkDiagram};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BraidLetter {
    /// Generator index, 1 ≤ index < strand count.
    pub index: usize,
    /// +1 or -1.
    pub exponent: i8,
}

impl BraidLetter {
    pub fn new(index: usize, exponent: i8) -> Self {
        Self { index, exponent }
    }

    pub fn inverse(self) -> Self {
        Self::new(self.index, -self.exponent)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BraidWord {
    strand_count: usize,
    letters: Vec<BraidLetter>,
}

impl BraidWord {
    pub fn new(strand_count: usize, letters: Vec<BraidLetter>) -> Result<Self> {
        if strand_count == 0 {
            return Err(Error::InvalidBraid("strand count must be positive".into()));
        }
        for l in &letters {
            if l.index == 0 || l.index >= strand_count {
                return Err(Error::InvalidBraid(format!(
                    "generator s{} out of range for {strand_count} strands",
                    l.index
                )));
            }
            if l.exponent != 1 && l.exponent != -1 {
                return Err(Error::InvalidBraid(format!("exponent {} is not ±1", l.exponent)));
            }
        }
        Ok(Self {
            strand_count,
            letters,
        })
    }

    pub fn identity(strand_count: usize) -> Result<Self> {
        Self::new(strand_count, Vec::new())
    }

    pub fn strand_count(&self) -> usize {
        self.strand_count
    }

    pub fn letters(&self) -> &[BraidLetter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn inverse(&self) -> BraidWord {
        BraidWord {
            strand_count: self.strand_count,
            letters: self.letters.iter().rev().map(|l| l.inverse()).collect(),
        }
    }

    /// `self` followed by `other`.
    pub fn concat(&self, other: &BraidWord) -> Result<BraidWord> {
        if self.strand_count != other.strand_count {
            return Err(Error::InvalidBraid(format!(
                "cannot concatenate braids on {} and {} strands",
                self.strand_count, other.strand_count
            )));
        }
        let mut letters = self.letters.clone();
        letters.extend_from_slice(&other.letters);
        Ok(BraidWord {
            strand_count: self.strand_count,
            letters,
        })
    }

    /// The same word viewed on more strands.
    pub fn with_strands(&self, strand_count: usize) -> Result<BraidWord> {
        BraidWord::new(strand_count, self.letters.clone())
    }

    /// `perm[j]` is the bottom position reached by the strand starting at top
    /// position `j` (0-based).
    pub fn permutation(&self) -> Vec<usize> {
        let mut at: Vec<usize> = (0..self.strand_count).collect();
        for l in &self.letters {
            at.swap(l.index - 1, l.index);
        }
        let mut perm = vec![0; self.strand_count];
        for (pos, &strand) in at.iter().enumerate() {
            perm[strand] = pos;
        }
        perm
    }

    pub fn cycle_count(&self) -> usize {
        let perm = self.permutation();
        let mut seen = vec![false; perm.len()];
        let mut cycles = 0;
        for s in 0..perm.len() {
            if !seen[s] {
                cycles += 1;
                let mut j = s;
                while !seen[j] {
                    seen[j] = true;
                    j = perm[j];
                }
            }
        }
        cycles
    }

    pub fn closure(&self) -> LinkDiagram {
        self.closure_with_strands().0
    }

    /// The closure together with the component of each top position.
    pub fn closure_with_strands(&self) -> (LinkDiagram, Vec<usize>) {
        let n = self.strand_count;
        let mut cur: Vec<ArcLabel> = (1..=n as ArcLabel).collect();
        let mut next = n as ArcLabel;
        let mut crossings = Vec::with_capacity(self.letters.len());
        for l in &self.letters {
            let i = l.index - 1;
            let (x_in, y_in) = (cur[i], cur[i + 1]);
            let (x_out, y_out) = (next + 1, next + 2);
            next += 2;
            crossings.push(if l.exponent > 0 {
                Crossing::new([x_in, y_out, x_out, y_in], CrossingSign::Positive)
            } else {
                Crossing::new([y_in, x_in, y_out, x_out], CrossingSign::Negative)
            });
            cur[i] = y_out;
            cur[i + 1] = x_out;
        }
        for (j, &bottom) in cur.iter().enumerate() {
            let top = j as ArcLabel + 1;
            if bottom != top {
                for c in &mut crossings {
                    for a in &mut c.arcs {
                        if *a == bottom {
                            *a = top;
                        }
                    }
                }
            }
        }
        let free = (0..n)
            .filter(|&j| cur[j] == j as ArcLabel + 1)
            .map(|j| j as ArcLabel + 1)
            .collect();
        let raw = LinkDiagram::from_parts(crossings, free).expect("braid closure is a valid diagram");
        let (d, map) = raw.compact_labels_with_map();
        let strands = (1..=n as ArcLabel)
            .map(|top| d.component_of_arc(map[&top]).expect("top arc present"))
            .collect();
        (d, strands)
    }
}

impl fmt::Display for BraidWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n={}:", self.strand_count)?;
        for l in &self.letters {
            if l.exponent > 0 {
                write!(f, " s{}", l.index)?;
            } else {
                write!(f, " s{}^-1", l.index)?;
            }
        }
        Ok(())
    }
}

impl std::str::FromStr for BraidWord {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        parse_braid(s)
    }
}

/// Parse `n=<k>: s<i>[^±1] ...`. `#` starts a comment; letters may be
/// separated by whitespace or commas.
pub fn parse_braid(text: &str) -> Result<BraidWord> {
    let mut body = String::with_capacity(text.len());
    for line in text.split_inclusive('\n') {
        let keep = line.find('#').map_or(line, |i| &line[..i]);
        body.push_str(keep);
        // keep byte offsets aligned with the input
        body.extend(std::iter::repeat_n(' ', line.len() - keep.len()));
    }
    let start = body.len() - body.trim_start().len();
    let rest = &body[start..];
    if !rest.starts_with("n=") {
        return Err(Error::parse(start, "expected `n=<strands>:`"));
    }
    let colon = rest
        .find(':')
        .ok_or_else(|| Error::parse(start, "missing `:` after strand count"))?;
    let n: usize = rest[2..colon]
        .trim()
        .parse()
        .map_err(|_| Error::parse(start + 2, "strand count is not a positive integer"))?;
    if n == 0 {
        return Err(Error::parse(start + 2, "strand count must be positive"));
    }

    let mut letters = Vec::new();
    let words = &rest[colon + 1..];
    let base = start + colon + 1;
    let mut pos = 0;
    for tok in words.split(|c: char| c.is_whitespace() || c == ',') {
        let at = base + pos;
        pos += tok.len() + 1;
        if tok.is_empty() {
            continue;
        }
        let Some(spec) = tok.strip_prefix('s').or_else(|| tok.strip_prefix('S')) else {
            return Err(Error::parse(at, format!("expected generator `s<i>`, found `{tok}`")));
        };
        let (idx, exp) = match spec.split_once('^') {
            Some((i, e)) => {
                let e = e.trim_start_matches('{').trim_end_matches('}');
                let exp = match e {
                    "1" | "+1" => 1,
                    "-1" => -1,
                    _ => return Err(Error::parse(at, format!("bad exponent `{e}` (use ^-1 or ^1)"))),
                };
                (i, exp)
            }
            None => (spec, 1),
        };
        let index: usize = idx
            .parse()
            .map_err(|_| Error::parse(at, format!("bad generator index in `{tok}`")))?;
        if index == 0 || index >= n {
            return Err(Error::parse(
                at,
                format!("generator s{index} out of range for {n} strands"),
            ));
        }
        letters.push(BraidLetter::new(index, exp));
    }
    BraidWord::new(n, letters)
}
