//! Text form of link diagrams.
//!
//! ```text
//! # comment to end of line
//! orient: -7            (optional; reverse the component containing arc 7)
//! X[1,5,2,4] X[3,1,4,6], X[5,3,6,2]
//! O[2]                  (two crossing-free circles)
//! ```
//!
//! Each `X[a,b,c,d]` lists arc labels counterclockwise starting at the
//! incoming under-strand, so `a → c` fixes the direction of every strand that
//! passes under somewhere. A component that only ever passes over is oriented
//! so that its smallest arc leaves the first crossing slot where it occurs.
//! Labels are positive integers; each must occur exactly twice.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::knot::diagram::{ArcLabel, Crossing, CrossingSign, LinkDiagram};

#[derive(Debug, Clone, PartialEq, Eq)]
enum Token {
    Cross([ArcLabel; 4]),
    Loops(usize),
    Orient(Vec<(ArcLabel, bool)>),
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn peek(&self) -> Option<u8> {
        self.src.as_bytes().get(self.pos).copied()
    }

    fn skip_separators(&mut self) {
        while let Some(c) = self.peek() {
            if c == b'#' {
                while let Some(c) = self.peek() {
                    if c == b'\n' {
                        break;
                    }
                    self.pos += 1;
                }
            } else if c.is_ascii_whitespace() || c == b',' || c == b';' {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(Error::parse(self.pos, format!("expected '{}'", c as char)))
        }
    }

    fn number(&mut self) -> Result<u64> {
        while matches!(self.peek(), Some(b' ' | b'\t')) {
            self.pos += 1;
        }
        let start = self.pos;
        while matches!(self.peek(), Some(b'0'..=b'9')) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::parse(start, "expected a number"));
        }
        let n = self.src[start..self.pos]
            .parse()
            .map_err(|_| Error::parse(start, "number out of range"))?;
        while matches!(self.peek(), Some(b' ' | b'\t')) {
            self.pos += 1;
        }
        Ok(n)
    }

    fn label(&mut self) -> Result<ArcLabel> {
        let start = self.pos;
        let n = self.number()?;
        if n == 0 || n > ArcLabel::MAX as u64 / 2 {
            return Err(Error::parse(start, "arc labels must be positive and below 2^31"));
        }
        Ok(n as ArcLabel)
    }

    fn tokens(mut self) -> Result<Vec<(usize, Token)>> {
        let mut out = Vec::new();
        loop {
            self.skip_separators();
            let start = self.pos;
            let Some(c) = self.peek() else { break };
            match c {
                b'X' => {
                    self.pos += 1;
                    self.expect(b'[')?;
                    let mut arcs = [0; 4];
                    for (i, slot) in arcs.iter_mut().enumerate() {
                        if i > 0 {
                            if self.peek() == Some(b']') {
                                return Err(Error::parse(
                                    start,
                                    format!("crossing has {i} arcs (expected 4)"),
                                ));
                            }
                            self.expect(b',')?;
                        }
                        *slot = self.label()?;
                    }
                    if self.peek() == Some(b',') {
                        return Err(Error::parse(start, "crossing has more than 4 arcs"));
                    }
                    self.expect(b']')?;
                    out.push((start, Token::Cross(arcs)));
                }
                b'O' => {
                    self.pos += 1;
                    self.expect(b'[')?;
                    let k = self.number()? as usize;
                    self.expect(b']')?;
                    out.push((start, Token::Loops(k)));
                }
                b'o' if self.src[self.pos..].starts_with("orient:") => {
                    self.pos += "orient:".len();
                    let mut items = Vec::new();
                    loop {
                        while matches!(self.peek(), Some(b' ' | b'\t' | b',')) {
                            self.pos += 1;
                        }
                        match self.peek() {
                            Some(b'-') => {
                                self.pos += 1;
                                items.push((self.label()?, true));
                            }
                            Some(b'+') => {
                                self.pos += 1;
                                items.push((self.label()?, false));
                            }
                            Some(b'0'..=b'9') => items.push((self.label()?, false)),
                            _ => break,
                        }
                    }
                    out.push((start, Token::Orient(items)));
                }
                _ => return Err(Error::parse(start, format!("unexpected character '{}'", c as char))),
            }
        }
        Ok(out)
    }
}

/// Parse the PD text form into a validated, oriented diagram.
pub fn parse_pd(text: &str) -> Result<LinkDiagram> {
    let tokens = Lexer { src: text, pos: 0 }.tokens()?;
    let mut tuples = Vec::new();
    let mut positions = Vec::new();
    let mut loops = 0usize;
    let mut reversals = Vec::new();
    for (pos, t) in tokens {
        match t {
            Token::Cross(a) => {
                tuples.push(a);
                positions.push(pos);
            }
            Token::Loops(k) => loops += k,
            Token::Orient(items) => reversals.extend(items.into_iter().map(|i| (pos, i))),
        }
    }

    // every label exactly twice
    let mut count: BTreeMap<ArcLabel, (usize, usize)> = BTreeMap::new();
    for (i, t) in tuples.iter().enumerate() {
        for &a in t {
            let e = count.entry(a).or_insert((0, i));
            e.0 += 1;
        }
    }
    for (&a, &(n, first)) in &count {
        if n != 2 {
            return Err(Error::parse(
                positions[first],
                format!("arc {a} appears {n} times (expected 2)"),
            ));
        }
    }
    if tuples.is_empty() && loops == 0 {
        return Err(Error::parse(0, "empty diagram"));
    }

    let signs = orient(&tuples, &positions)?;
    let crossings: Vec<Crossing> = tuples
        .iter()
        .zip(signs)
        .map(|(&a, s)| Crossing::new(a, s))
        .collect();
    let base = count.keys().next_back().copied().unwrap_or(0);
    let free: Vec<ArcLabel> = (1..=loops as ArcLabel).map(|k| base + k).collect();
    let mut d = LinkDiagram::from_parts(crossings, free)
        .map_err(|e| Error::parse(0, e.to_string()))?;

    let mut to_reverse = BTreeSet::new();
    for (pos, (arc, rev)) in reversals {
        let comp = d
            .component_of_arc(arc)
            .ok_or_else(|| Error::parse(pos, format!("orient: unknown arc {arc}")))?;
        if rev {
            to_reverse.insert(comp);
        }
    }
    for comp in to_reverse {
        d = d.reverse_component(comp)?;
    }
    Ok(d)
}

/// Strand traversal of unsigned tuples: for each component, the list of
/// (crossing, entry slot) passages.
fn trace_passages(tuples: &[[ArcLabel; 4]]) -> Vec<Vec<(usize, usize)>> {
    let mut occ: BTreeMap<ArcLabel, Vec<(usize, usize)>> = BTreeMap::new();
    for (x, t) in tuples.iter().enumerate() {
        for (s, &a) in t.iter().enumerate() {
            occ.entry(a).or_default().push((x, s));
        }
    }
    let mut visited = BTreeSet::new();
    let mut comps = Vec::new();
    for (&start, o) in &occ {
        if visited.contains(&start) {
            continue;
        }
        // smallest arc runs from its first occurrence into its second
        let mut passages = Vec::new();
        let mut arc = start;
        let mut entry = o[1];
        loop {
            visited.insert(arc);
            passages.push(entry);
            let (x, s) = entry;
            let exit = (x, (s + 2) % 4);
            let next = tuples[x][exit.1];
            if visited.contains(&next) {
                break;
            }
            let o = &occ[&next];
            entry = if o[0] == exit { o[1] } else { o[0] };
            arc = next;
        }
        comps.push(passages);
    }
    comps
}

fn orient(tuples: &[[ArcLabel; 4]], positions: &[usize]) -> Result<Vec<CrossingSign>> {
    let mut over_entry: Vec<Option<usize>> = vec![None; tuples.len()];
    for passages in trace_passages(tuples) {
        let forced: BTreeSet<bool> = passages
            .iter()
            .filter(|(_, s)| s % 2 == 0)
            .map(|&(_, s)| s == 0)
            .collect();
        let forward = match forced.len() {
            0 => true,
            1 => *forced.iter().next().unwrap(),
            _ => {
                let bad = passages
                    .iter()
                    .find(|(_, s)| *s == 2)
                    .map(|&(x, _)| positions[x])
                    .unwrap_or(0);
                return Err(Error::parse(
                    bad,
                    "under-strand entered from slot c; inconsistent orientation",
                ));
            }
        };
        for &(x, s) in passages.iter().filter(|(_, s)| s % 2 == 1) {
            let entry = if forward { s } else { (s + 2) % 4 };
            over_entry[x] = Some(entry);
        }
    }
    Ok(over_entry
        .into_iter()
        .map(|e| match e {
            Some(3) => CrossingSign::Positive,
            _ => CrossingSign::Negative,
        })
        .collect())
}

/// Canonical text form. Over-only components whose orientation differs from
/// the default get an `orient:` header so the text reparses to this diagram.
pub fn to_pd_string(d: &LinkDiagram) -> String {
    let tuples: Vec<[ArcLabel; 4]> = d.crossings().iter().map(|c| c.arcs).collect();
    let default_signs = orient(&tuples, &vec![0; tuples.len()]).expect("valid diagram");
    let mut reversed = BTreeSet::new();
    for (x, (c, s)) in d.crossings().iter().zip(default_signs).enumerate() {
        if c.sign != s {
            let comp = d.crossing_components(x).expect("valid id").1;
            reversed.insert(d.components()[comp].min_label());
        }
    }
    let mut out = String::new();
    if !reversed.is_empty() {
        out.push_str("orient:");
        for a in &reversed {
            out.push_str(&format!(" -{a}"));
        }
        out.push('\n');
    }
    let body: Vec<String> = d
        .crossings()
        .iter()
        .map(|c| format!("X[{},{},{},{}]", c.arcs[0], c.arcs[1], c.arcs[2], c.arcs[3]))
        .chain((!d.free_loops().is_empty()).then(|| format!("O[{}]", d.free_loops().len())))
        .collect();
    out.push_str(&body.join(" "));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknot_token() {
        let u = parse_pd("O[1]").unwrap();
        assert_eq!(u.component_count(), 1);
        assert_eq!(u.crossing_count(), 0);
        assert_eq!(u.writhe(), 0);
    }

    #[test]
    fn hopf_parses_with_two_components() {
        let h = parse_pd("X[1,3,2,4] X[2,4,1,3]").unwrap();
        assert_eq!(h.component_count(), 2);
        assert_eq!(h.linking_number(0, 1).unwrap(), 1);
        assert_eq!(h.writhe(), 2);
    }

    #[test]
    fn arity_error_reports_position() {
        let e = parse_pd("X[1,3,2,4] X[2,4,1]").unwrap_err();
        assert!(matches!(e, Error::Parse { pos: 11, .. }), "{e:?}");
        assert!(parse_pd("X[1,2,3,4,5]").is_err());
    }

    #[test]
    fn label_count_error() {
        let e = parse_pd("X[1,3,2,4] X[2,4,1,5]").unwrap_err();
        assert!(matches!(e, Error::Parse { .. }));
        assert!(e.to_string().contains("arc 3 appears 1 times"), "{e}");
    }

    #[test]
    fn garbage_and_empty() {
        assert!(matches!(parse_pd("Y[1]"), Err(Error::Parse { pos: 0, .. })));
        assert!(parse_pd("  # nothing\n").is_err());
        assert!(parse_pd("X[0,1,1,0]").is_err());
    }

    #[test]
    fn inconsistent_under_strands() {
        // arc 1 enters the first crossing under, arc 2 enters the second from slot c
        assert!(parse_pd("X[1,3,2,4] X[1,4,2,3]").is_err());
    }

    #[test]
    fn comments_commas_and_loops() {
        let d = parse_pd("# hopf plus a circle\nX[1,3,2,4], X[2,4,1,3]\nO[1]").unwrap();
        assert_eq!(d.component_count(), 3);
        assert_eq!(d.free_loops(), &[5]);
    }

    #[test]
    fn orient_header_reverses() {
        let h = parse_pd("orient: -3\nX[1,3,2,4] X[2,4,1,3]").unwrap();
        assert_eq!(h.linking_number(0, 1).unwrap(), -1);
        let h2 = parse_pd("orient: -1\nX[1,3,2,4] X[2,4,1,3]").unwrap();
        assert_eq!(h2.linking_number(0, 1).unwrap(), -1);
        assert!(parse_pd("orient: -9\nX[1,3,2,4] X[2,4,1,3]").is_err());
    }

    #[test]
    fn serialization_keeps_orientation() {
        for src in [
            "X[1,3,2,4] X[2,4,1,3]",
            "orient: -3\nX[1,3,2,4] X[2,4,1,3]",
            "X[1,5,2,4] X[3,1,4,6] X[5,3,6,2] O[2]",
        ] {
            let d = parse_pd(src).unwrap();
            let again = parse_pd(&to_pd_string(&d)).unwrap();
            assert_eq!(again, d, "{src}");
        }
    }

    #[test]
    fn kink_with_repeated_label() {
        let k = parse_pd("X[1,2,2,1]").unwrap();
        assert_eq!(k.component_count(), 1);
        assert_eq!(k.crossing_count(), 1);
    }
}
