//! Reidemeister moves at explicit sites, and enumeration of valid sites.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::knot::diagram::{ArcLabel, Crossing, CrossingSign, LinkDiagram};

/// Side of an oriented arc.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "move", rename_all = "snake_case")]
pub enum Move {
    /// Add a kink on `arc`, looping into the face on `side`; the new crossing
    /// has the given sign.
    R1Add {
        arc: ArcLabel,
        side: Side,
        sign: CrossingSign,
    },
    /// Remove a kink crossing.
    R1Remove { crossing: usize },
    /// Push arc `over` across arc `under` through a face they share.
    /// `under_side`/`over_side` say on which side of each arc that face lies.
    R2Add {
        under: ArcLabel,
        under_side: Side,
        over: ArcLabel,
        over_side: Side,
    },
    /// Remove a bigon: the under-strand leaves `first` and enters `second`.
    R2Remove { first: usize, second: usize },
    /// Slide across the triangular face bounded by these three arcs.
    R3 { arcs: [ArcLabel; 3] },
}

impl Move {
    pub fn kind(&self) -> &'static str {
        match self {
            Move::R1Add { .. } => "R1+",
            Move::R1Remove { .. } => "R1-",
            Move::R2Add { .. } => "R2+",
            Move::R2Remove { .. } => "R2-",
            Move::R3 { .. } => "R3",
        }
    }
}

/// A face of the diagram: the (arc, side) pairs bounding it, in order.
pub type Face = Vec<(ArcLabel, Side)>;

/// Faces traced by always turning left. Free loops are not included.
pub fn faces(d: &LinkDiagram) -> Vec<Face> {
    let ends = d.arc_ends();
    let crossings = d.crossings();
    let mut seen: BTreeSet<(ArcLabel, bool)> = BTreeSet::new();
    let mut out = Vec::new();
    for &arc in ends.keys() {
        for forward in [true, false] {
            if seen.contains(&(arc, forward)) {
                continue;
            }
            let mut face = Vec::new();
            let (mut a, mut fwd) = (arc, forward);
            while seen.insert((a, fwd)) {
                face.push((a, if fwd { Side::Left } else { Side::Right }));
                let (x, s) = if fwd { ends[&a].head } else { ends[&a].tail };
                let leave = (s + 3) % 4;
                let next = crossings[x].arcs[leave];
                fwd = ends[&next].tail == (x, leave);
                a = next;
            }
            out.push(face);
        }
    }
    out
}

fn fresh(d: &LinkDiagram) -> impl FnMut() -> ArcLabel {
    let mut next = d.max_label();
    move || {
        next += 1;
        next
    }
}

/// Replace the head occurrence of `arc` with `label`.
fn relabel_head(d: &LinkDiagram, crossings: &mut [Crossing], arc: ArcLabel, label: ArcLabel) {
    let (x, s) = d.arc_ends()[&arc].head;
    crossings[x].arcs[s] = label;
}

fn has_arc(d: &LinkDiagram, a: ArcLabel) -> bool {
    d.component_of_arc(a).is_some()
}

/// Apply a Reidemeister move at the given site.
pub fn apply_reidemeister(d: &LinkDiagram, mv: &Move) -> Result<LinkDiagram> {
    match *mv {
        Move::R1Add { arc, side, sign } => r1_add(d, arc, side, sign),
        Move::R1Remove { crossing } => r1_remove(d, crossing),
        Move::R2Add {
            under,
            under_side,
            over,
            over_side,
        } => r2_add(d, under, under_side, over, over_side),
        Move::R2Remove { first, second } => r2_remove(d, first, second),
        Move::R3 { arcs } => r3(d, arcs),
    }
}

fn r1_add(d: &LinkDiagram, k: ArcLabel, side: Side, sign: CrossingSign) -> Result<LinkDiagram> {
    if !has_arc(d, k) {
        return Err(Error::MoveRejected(format!("R1+: no arc {k}")));
    }
    let mut next = fresh(d);
    let mut crossings = d.crossings().to_vec();
    let mut free = d.free_loops().to_vec();
    let m = next();
    let p = if d.is_free_loop(k) {
        free.retain(|&l| l != k);
        k
    } else {
        let p = next();
        relabel_head(d, &mut crossings, k, p);
        p
    };
    let arcs = match (side, sign) {
        (Side::Left, CrossingSign::Positive) => [k, p, m, m],
        (Side::Left, CrossingSign::Negative) => [m, k, p, m],
        (Side::Right, CrossingSign::Negative) => [k, m, m, p],
        (Side::Right, CrossingSign::Positive) => [m, m, p, k],
    };
    crossings.push(Crossing::new(arcs, sign));
    LinkDiagram::from_parts(crossings, free)
}

/// The loop arc of a kink crossing, if it has one.
fn kink_loop(c: &Crossing) -> Option<(usize, ArcLabel)> {
    (0..4).find_map(|s| (c.arcs[s] == c.arcs[(s + 1) % 4]).then_some((s, c.arcs[s])))
}

fn r1_remove(d: &LinkDiagram, id: usize) -> Result<LinkDiagram> {
    let c = d.crossing(id)?;
    let Some((s, m)) = kink_loop(c) else {
        return Err(Error::MoveRejected(format!("R1-: crossing {id} is not a kink")));
    };
    let i = c.arcs[(s + 2) % 4];
    let o = c.arcs[(s + 3) % 4];
    d.splice(&BTreeSet::from([id]), &[(i, m), (m, o)], &BTreeSet::new())
}

fn r2_add(
    d: &LinkDiagram,
    under: ArcLabel,
    under_side: Side,
    over: ArcLabel,
    over_side: Side,
) -> Result<LinkDiagram> {
    for a in [under, over] {
        if !has_arc(d, a) {
            return Err(Error::MoveRejected(format!("R2+: no arc {a}")));
        }
    }
    if under == over {
        return Err(Error::MoveRejected("R2+: arcs must differ".into()));
    }
    if !d.is_free_loop(under) && !d.is_free_loop(over) {
        let share = faces(d).iter().any(|f| {
            f.contains(&(under, under_side)) && f.contains(&(over, over_side))
        });
        if !share {
            return Err(Error::MoveRejected(format!(
                "R2+: arcs {under} and {over} do not bound a common face on the given sides"
            )));
        }
    }
    let mut next = fresh(d);
    let mut crossings = d.crossings().to_vec();
    let mut free = d.free_loops().to_vec();
    let (p0, p1) = (under, next());
    let p2 = if d.is_free_loop(under) {
        free.retain(|&l| l != under);
        under
    } else {
        let p2 = next();
        relabel_head(d, &mut crossings, under, p2);
        p2
    };
    let (q0, q1) = (over, next());
    let q2 = if d.is_free_loop(over) {
        free.retain(|&l| l != over);
        over
    } else {
        let q2 = next();
        relabel_head(d, &mut crossings, over, q2);
        q2
    };
    use CrossingSign::{Negative as N, Positive as P};
    let parallel = under_side != over_side;
    let (first, second) = match (under_side, parallel) {
        (Side::Right, true) => (([p0, q0, p1, q1], N), ([p1, q2, p2, q1], P)),
        (Side::Right, false) => (([p0, q2, p1, q1], P), ([p1, q0, p2, q1], N)),
        (Side::Left, true) => (([p0, q1, p1, q0], P), ([p1, q1, p2, q2], N)),
        (Side::Left, false) => (([p0, q1, p1, q2], N), ([p1, q1, p2, q0], P)),
    };
    crossings.push(Crossing::new(first.0, first.1));
    crossings.push(Crossing::new(second.0, second.1));
    LinkDiagram::from_parts(crossings, free)
}

/// Slot (1 or 3) of the over-arc shared by a bigon pair, if `first`/`second`
/// form one.
fn bigon_slot(d: &LinkDiagram, first: usize, second: usize) -> Option<usize> {
    if first == second {
        return None;
    }
    let (a, b) = (d.crossings().get(first)?, d.crossings().get(second)?);
    if a.arcs[2] != b.arcs[0] || a.sign == b.sign {
        return None;
    }
    [1, 3].into_iter().find(|&s| a.arcs[s] == b.arcs[s])
}

fn r2_remove(d: &LinkDiagram, first: usize, second: usize) -> Result<LinkDiagram> {
    d.crossing(first)?;
    d.crossing(second)?;
    let Some(s) = bigon_slot(d, first, second) else {
        return Err(Error::MoveRejected(format!(
            "R2-: crossings {first} and {second} do not form a removable bigon"
        )));
    };
    let (a, b) = (d.crossings()[first], d.crossings()[second]);
    let o = (s + 2) % 4;
    let fuse = [
        (a.arcs[0], a.arcs[2]),
        (b.arcs[0], b.arcs[2]),
        (a.arcs[s], a.arcs[o]),
        (b.arcs[s], b.arcs[o]),
    ];
    d.splice(&BTreeSet::from([first, second]), &fuse, &BTreeSet::new())
}

/// Per-strand data of an R3 triangle.
struct TriStrand {
    s_in: ArcLabel,
    mid: ArcLabel,
    s_out: ArcLabel,
    first: usize,
    second: usize,
    under_first: bool,
    under_second: bool,
}

fn r3_strands(d: &LinkDiagram, arcs: [ArcLabel; 3]) -> Result<Vec<TriStrand>> {
    let reject = |why: &str| Error::MoveRejected(format!("R3 at {arcs:?}: {why}"));
    let set: BTreeSet<ArcLabel> = arcs.iter().copied().collect();
    if set.len() != 3 || arcs.iter().any(|&a| d.is_free_loop(a) || !has_arc(d, a)) {
        return Err(reject("need three distinct arcs at crossings"));
    }
    let is_face = faces(d).iter().any(|f| {
        f.len() == 3 && f.iter().map(|(a, _)| *a).collect::<BTreeSet<_>>() == set
    });
    if !is_face {
        return Err(reject("arcs do not bound a triangular face"));
    }
    let ends = d.arc_ends();
    let mut strands = Vec::new();
    let mut roles = Vec::new();
    let mut xs = BTreeSet::new();
    for &m in &arcs {
        let (x1, s1) = ends[&m].tail;
        let (x2, s2) = ends[&m].head;
        if x1 == x2 {
            return Err(reject("an arc of the triangle is a loop"));
        }
        xs.insert(x1);
        xs.insert(x2);
        let c1 = &d.crossings()[x1];
        let c2 = &d.crossings()[x2];
        strands.push(TriStrand {
            s_in: c1.arcs[(s1 + 2) % 4],
            mid: m,
            s_out: c2.arcs[(s2 + 2) % 4],
            first: x1,
            second: x2,
            under_first: s1 == 2,
            under_second: s2 == 0,
        });
        // over at slots 1 and 3
        roles.push((s1 % 2 == 1, s2 % 2 == 1));
    }
    if xs.len() != 3 {
        return Err(reject("triangle needs three distinct crossings"));
    }
    let top = roles.iter().filter(|r| **r == (true, true)).count();
    let bottom = roles.iter().filter(|r| **r == (false, false)).count();
    if top != 1 || bottom != 1 {
        return Err(reject("no strand passes over (or under) both of its triangle crossings"));
    }
    Ok(strands)
}

fn r3(d: &LinkDiagram, arcs: [ArcLabel; 3]) -> Result<LinkDiagram> {
    let strands = r3_strands(d, arcs)?;
    // (under in/out, over in/out) per crossing after the slide
    let mut new_under: BTreeMap<usize, (ArcLabel, ArcLabel)> = BTreeMap::new();
    let mut new_over: BTreeMap<usize, (ArcLabel, ArcLabel)> = BTreeMap::new();
    for st in &strands {
        let visits = [
            (st.first, st.under_first, (st.mid, st.s_out)),
            (st.second, st.under_second, (st.s_in, st.mid)),
        ];
        for (x, under, pair) in visits {
            if under {
                new_under.insert(x, pair);
            } else {
                new_over.insert(x, pair);
            }
        }
    }
    let mut crossings = d.crossings().to_vec();
    for (&x, &under) in &new_under {
        let over = new_over[&x];
        crossings[x] = Crossing::from_strands(under, over, crossings[x].sign);
    }
    LinkDiagram::from_parts(crossings, d.free_loops().to_vec())
}

/// Every valid site for every move type, in a deterministic order.
pub fn enumerate_sites(d: &LinkDiagram) -> Vec<Move> {
    let mut out = Vec::new();
    let labels: Vec<ArcLabel> = d.arc_labels().collect();
    for &arc in &labels {
        for side in [Side::Left, Side::Right] {
            for sign in [CrossingSign::Positive, CrossingSign::Negative] {
                out.push(Move::R1Add { arc, side, sign });
            }
        }
    }
    for (id, c) in d.crossings().iter().enumerate() {
        if kink_loop(c).is_some() {
            out.push(Move::R1Remove { crossing: id });
        }
    }

    let fs = faces(d);
    let mut r2 = BTreeSet::new();
    for f in &fs {
        for &(a, sa) in f {
            for &(b, sb) in f {
                if a != b {
                    r2.insert(Move::R2Add {
                        under: a,
                        under_side: sa,
                        over: b,
                        over_side: sb,
                    });
                }
            }
        }
    }
    for &l in d.free_loops() {
        for &other in &labels {
            if other == l {
                continue;
            }
            for sa in [Side::Left, Side::Right] {
                for sb in [Side::Left, Side::Right] {
                    r2.insert(Move::R2Add {
                        under: l,
                        under_side: sa,
                        over: other,
                        over_side: sb,
                    });
                    r2.insert(Move::R2Add {
                        under: other,
                        under_side: sb,
                        over: l,
                        over_side: sa,
                    });
                }
            }
        }
    }
    out.extend(r2);

    let n = d.crossing_count();
    for first in 0..n {
        for second in 0..n {
            if bigon_slot(d, first, second).is_some() {
                out.push(Move::R2Remove { first, second });
            }
        }
    }

    let mut r3 = BTreeSet::new();
    for f in fs.iter().filter(|f| f.len() == 3) {
        let mut arcs = [f[0].0, f[1].0, f[2].0];
        arcs.sort_unstable();
        if r3_strands(d, arcs).is_ok() {
            r3.insert(arcs);
        }
    }
    out.extend(r3.into_iter().map(|arcs| Move::R3 { arcs }));
    out
}
