//! Oriented link diagrams in planar-diagram (PD) form.
//!
//! A crossing is a 4-tuple of arc labels listed counterclockwise, starting at
//! the incoming under-strand. The under-strand therefore always runs from slot
//! 0 to slot 2. The over-strand runs 3 → 1 on a positive crossing and 1 → 3 on
//! a negative one: a crossing is positive when the under-strand passes from
//! right to left beneath the over-strand, seen along the over-strand's
//! direction.
//!
//! Planarity is not checked; any combinatorially closed PD code is accepted.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type ArcLabel = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CrossingSign {
    Positive,
    Negative,
}

impl CrossingSign {
    pub fn value(self) -> i32 {
        match self {
            CrossingSign::Positive => 1,
            CrossingSign::Negative => -1,
        }
    }
}

impl std::ops::Neg for CrossingSign {
    type Output = CrossingSign;
    fn neg(self) -> CrossingSign {
        match self {
            CrossingSign::Positive => CrossingSign::Negative,
            CrossingSign::Negative => CrossingSign::Positive,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Crossing {
    pub arcs: [ArcLabel; 4],
    pub sign: CrossingSign,
}

impl Crossing {
    pub fn new(arcs: [ArcLabel; 4], sign: CrossingSign) -> Self {
        Self { arcs, sign }
    }

    /// Slot through which the over-strand enters.
    pub fn over_in_slot(&self) -> usize {
        match self.sign {
            CrossingSign::Positive => 3,
            CrossingSign::Negative => 1,
        }
    }

    pub fn is_incoming(&self, slot: usize) -> bool {
        slot == 0 || slot == self.over_in_slot()
    }

    /// The same crossing with over and under exchanged. Orientation is kept,
    /// so the sign flips.
    pub fn switched(&self) -> Crossing {
        let [a, b, c, d] = self.arcs;
        match self.sign {
            // over runs d -> b; it becomes the under-strand entering at d
            CrossingSign::Positive => Crossing::new([d, a, b, c], CrossingSign::Negative),
            // over runs b -> d
            CrossingSign::Negative => Crossing::new([b, c, d, a], CrossingSign::Positive),
        }
    }

    /// Build a crossing from the in/out arcs of its two strands.
    pub fn from_strands(
        under: (ArcLabel, ArcLabel),
        over: (ArcLabel, ArcLabel),
        sign: CrossingSign,
    ) -> Crossing {
        let (u_in, u_out) = under;
        let (o_in, o_out) = over;
        match sign {
            CrossingSign::Positive => Crossing::new([u_in, o_out, u_out, o_in], sign),
            CrossingSign::Negative => Crossing::new([u_in, o_in, u_out, o_out], sign),
        }
    }

    /// (incoming, outgoing) arcs of the under-strand.
    pub fn under_strand(&self) -> (ArcLabel, ArcLabel) {
        (self.arcs[0], self.arcs[2])
    }

    /// (incoming, outgoing) arcs of the over-strand.
    pub fn over_strand(&self) -> (ArcLabel, ArcLabel) {
        match self.sign {
            CrossingSign::Positive => (self.arcs[3], self.arcs[1]),
            CrossingSign::Negative => (self.arcs[1], self.arcs[3]),
        }
    }
}

/// A position `(crossing index, slot)` in the PD code.
pub type SlotRef = (usize, usize);

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Component {
    /// Arc labels in traversal order, starting from the smallest label.
    pub arcs: Vec<ArcLabel>,
}

impl Component {
    pub fn min_label(&self) -> ArcLabel {
        self.arcs[0]
    }
}

/// An oriented link diagram. Crossing ids are indices into `crossings`.
/// Components are numbered by increasing smallest arc label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinkDiagram {
    crossings: Vec<Crossing>,
    free_loops: Vec<ArcLabel>,
    components: Vec<Component>,
    arc_component: BTreeMap<ArcLabel, usize>,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct ArcEnds {
    pub tail: SlotRef,
    pub head: SlotRef,
}

impl LinkDiagram {
    /// Assemble and validate a diagram from signed crossings and the labels of
    /// crossing-free circles.
    pub fn from_parts(crossings: Vec<Crossing>, free_loops: Vec<ArcLabel>) -> Result<Self> {
        let ends = arc_ends(&crossings)?;
        let mut seen = BTreeSet::new();
        for &l in &free_loops {
            if ends.contains_key(&l) {
                return Err(Error::InvalidDiagram(format!(
                    "free loop label {l} also appears at a crossing"
                )));
            }
            if !seen.insert(l) {
                return Err(Error::InvalidDiagram(format!("duplicate free loop label {l}")));
            }
        }
        if crossings.is_empty() && free_loops.is_empty() {
            return Err(Error::InvalidDiagram("diagram has no components".into()));
        }

        let mut components = Vec::new();
        let mut visited = BTreeSet::new();
        for (&start, _) in ends.iter() {
            if visited.contains(&start) {
                continue;
            }
            let mut arcs = Vec::new();
            let mut arc = start;
            loop {
                visited.insert(arc);
                arcs.push(arc);
                let (x, s) = ends[&arc].head;
                let next = crossings[x].arcs[(s + 2) % 4];
                if next == start {
                    break;
                }
                if visited.contains(&next) {
                    return Err(Error::InvalidDiagram(format!(
                        "strand through arc {next} does not close up"
                    )));
                }
                arc = next;
            }
            components.push(Component { arcs });
        }
        for &l in &free_loops {
            components.push(Component { arcs: vec![l] });
        }
        components.sort_by_key(|c| c.min_label());
        let mut arc_component = BTreeMap::new();
        for (i, c) in components.iter().enumerate() {
            for &a in &c.arcs {
                arc_component.insert(a, i);
            }
        }
        let mut free_loops = free_loops;
        free_loops.sort_unstable();
        Ok(Self {
            crossings,
            free_loops,
            components,
            arc_component,
        })
    }

    /// `k` disjoint crossing-free circles.
    pub fn unlink(k: usize) -> Self {
        assert!(k >= 1, "unlink needs at least one component");
        Self::from_parts(Vec::new(), (1..=k as ArcLabel).collect()).expect("valid unlink")
    }

    pub fn unknot() -> Self {
        Self::unlink(1)
    }

    pub fn crossings(&self) -> &[Crossing] {
        &self.crossings
    }

    pub fn crossing(&self, id: usize) -> Result<&Crossing> {
        self.crossings.get(id).ok_or(Error::UnknownCrossing(id))
    }

    pub fn crossing_count(&self) -> usize {
        self.crossings.len()
    }

    pub fn free_loops(&self) -> &[ArcLabel] {
        &self.free_loops
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn component_count(&self) -> usize {
        self.components.len()
    }

    pub fn component_of_arc(&self, arc: ArcLabel) -> Option<usize> {
        self.arc_component.get(&arc).copied()
    }

    pub fn arc_labels(&self) -> impl Iterator<Item = ArcLabel> + '_ {
        self.arc_component.keys().copied()
    }

    pub fn max_label(&self) -> ArcLabel {
        self.arc_component.keys().next_back().copied().unwrap_or(0)
    }

    pub fn is_free_loop(&self, arc: ArcLabel) -> bool {
        self.free_loops.binary_search(&arc).is_ok()
    }

    pub(crate) fn arc_ends(&self) -> BTreeMap<ArcLabel, ArcEnds> {
        arc_ends(&self.crossings).expect("validated diagram")
    }

    /// Components of the (under, over) strands at a crossing.
    pub fn crossing_components(&self, id: usize) -> Result<(usize, usize)> {
        let c = self.crossing(id)?;
        Ok((
            self.arc_component[&c.arcs[0]],
            self.arc_component[&c.arcs[1]],
        ))
    }

    /// Sum of crossing signs.
    pub fn writhe(&self) -> i32 {
        self.crossings.iter().map(|c| c.sign.value()).sum()
    }

    /// Sum of the signs of crossings whose two strands belong to the same
    /// component. Unlike the writhe it does not depend on the relative
    /// orientation of different components.
    pub fn self_writhe(&self) -> i32 {
        self.crossings
            .iter()
            .filter(|c| self.arc_component[&c.arcs[0]] == self.arc_component[&c.arcs[1]])
            .map(|c| c.sign.value())
            .sum()
    }

    /// Half the signed count of crossings between components `i` and `j`.
    pub fn linking_number(&self, i: usize, j: usize) -> Result<i32> {
        let n = self.component_count();
        for c in [i, j] {
            if c >= n {
                return Err(Error::UnknownComponent(c));
            }
        }
        if i == j {
            return Err(Error::InvalidDiagram(
                "linking number needs two distinct components".into(),
            ));
        }
        let mut total = 0;
        for x in &self.crossings {
            let cu = self.arc_component[&x.arcs[0]];
            let co = self.arc_component[&x.arcs[1]];
            if (cu == i && co == j) || (cu == j && co == i) {
                total += x.sign.value();
            }
        }
        if total % 2 != 0 {
            return Err(Error::InvalidDiagram(format!(
                "odd signed crossing count {total} between components {i} and {j}; diagram is not planar"
            )));
        }
        Ok(total / 2)
    }

    /// Matrix of pairwise linking numbers (zero diagonal).
    pub fn linking_matrix(&self) -> Result<Vec<Vec<i32>>> {
        let n = self.component_count();
        let mut m = vec![vec![0; n]; n];
        for i in 0..n {
            for j in (i + 1)..n {
                let lk = self.linking_number(i, j)?;
                m[i][j] = lk;
                m[j][i] = lk;
            }
        }
        Ok(m)
    }

    /// Exchange over and under at crossing `id`. An involution.
    pub fn switch_crossing(&self, id: usize) -> Result<LinkDiagram> {
        let c = *self.crossing(id)?;
        let mut crossings = self.crossings.clone();
        crossings[id] = c.switched();
        Ok(Self::from_parts(crossings, self.free_loops.clone()).expect("switch keeps validity"))
    }

    /// Mirror image: every crossing switched.
    pub fn mirror(&self) -> LinkDiagram {
        let crossings = self.crossings.iter().map(Crossing::switched).collect();
        Self::from_parts(crossings, self.free_loops.clone()).expect("mirror keeps validity")
    }

    /// Reverse the orientation of component `comp`.
    pub fn reverse_component(&self, comp: usize) -> Result<LinkDiagram> {
        if comp >= self.component_count() {
            return Err(Error::UnknownComponent(comp));
        }
        let crossings = self
            .crossings
            .iter()
            .map(|x| {
                let mut y = *x;
                if self.arc_component[&x.arcs[0]] == comp {
                    y.arcs = [x.arcs[2], x.arcs[3], x.arcs[0], x.arcs[1]];
                    y.sign = -y.sign;
                }
                if self.arc_component[&x.arcs[1]] == comp {
                    y.sign = -y.sign;
                }
                y
            })
            .collect();
        Self::from_parts(crossings, self.free_loops.clone())
    }

    /// Remove component `comp`. Crossings it takes part in disappear and the
    /// other strand through each of them is fused into a single arc.
    pub fn delete_component(&self, comp: usize) -> Result<LinkDiagram> {
        if comp >= self.component_count() {
            return Err(Error::UnknownComponent(comp));
        }
        if self.component_count() == 1 {
            return Err(Error::LastComponent);
        }
        let mut remove = BTreeSet::new();
        let mut fuse = Vec::new();
        for (id, x) in self.crossings.iter().enumerate() {
            let cu = self.arc_component[&x.arcs[0]];
            let co = self.arc_component[&x.arcs[1]];
            if cu == comp || co == comp {
                remove.insert(id);
                if cu != comp {
                    fuse.push((x.arcs[0], x.arcs[2]));
                }
                if co != comp {
                    fuse.push((x.arcs[1], x.arcs[3]));
                }
            }
        }
        let drop: BTreeSet<ArcLabel> = self.components[comp].arcs.iter().copied().collect();
        self.splice(&remove, &fuse, &drop)
    }

    /// Remove the given crossings, identify the given arc pairs (the smaller
    /// label survives) and drop the given labels. Arc classes that no longer
    /// touch any crossing become free loops.
    pub(crate) fn splice(
        &self,
        remove: &BTreeSet<usize>,
        fuse: &[(ArcLabel, ArcLabel)],
        drop: &BTreeSet<ArcLabel>,
    ) -> Result<LinkDiagram> {
        let mut uf = LabelUnion::default();
        for &(a, b) in fuse {
            uf.union(a, b);
        }
        let crossings: Vec<Crossing> = self
            .crossings
            .iter()
            .enumerate()
            .filter(|(id, _)| !remove.contains(id))
            .map(|(_, x)| Crossing::new(x.arcs.map(|a| uf.find(a)), x.sign))
            .collect();
        let present: BTreeSet<ArcLabel> = crossings.iter().flat_map(|x| x.arcs).collect();
        let mut free = BTreeSet::new();
        for a in self.arc_labels() {
            if drop.contains(&a) {
                continue;
            }
            let r = uf.find(a);
            if !present.contains(&r) {
                free.insert(r);
            }
        }
        Self::from_parts(crossings, free.into_iter().collect())
    }

    /// Disjoint union; arcs of `other` are shifted past this diagram's labels.
    pub fn disjoint_union(&self, other: &LinkDiagram) -> LinkDiagram {
        let off = self.max_label();
        let mut crossings = self.crossings.clone();
        crossings.extend(
            other
                .crossings
                .iter()
                .map(|x| Crossing::new(x.arcs.map(|a| a + off), x.sign)),
        );
        let mut free = self.free_loops.clone();
        free.extend(other.free_loops.iter().map(|a| a + off));
        Self::from_parts(crossings, free).expect("disjoint union of valid diagrams")
    }

    /// Relabel arcs 1, 2, … in order of first appearance (crossings first,
    /// then free loops).
    pub fn compact_labels(&self) -> LinkDiagram {
        self.compact_labels_with_map().0
    }

    pub(crate) fn compact_labels_with_map(&self) -> (LinkDiagram, HashMap<ArcLabel, ArcLabel>) {
        let mut map = HashMap::new();
        let mut next = 1;
        let mut label = |a: ArcLabel, map: &mut HashMap<ArcLabel, ArcLabel>| {
            *map.entry(a).or_insert_with(|| {
                let l = next;
                next += 1;
                l
            })
        };
        let crossings = self
            .crossings
            .iter()
            .map(|x| Crossing::new(x.arcs.map(|a| label(a, &mut map)), x.sign))
            .collect();
        let free = self.free_loops.iter().map(|&a| label(a, &mut map)).collect();
        let d = Self::from_parts(crossings, free).expect("relabeling keeps validity");
        (d, map)
    }
}

/// Tail and head slot for every arc label; rejects codes where a label does
/// not occur exactly twice or is not entered exactly once.
pub(crate) fn arc_ends(crossings: &[Crossing]) -> Result<BTreeMap<ArcLabel, ArcEnds>> {
    let mut tails: BTreeMap<ArcLabel, Vec<SlotRef>> = BTreeMap::new();
    let mut heads: BTreeMap<ArcLabel, Vec<SlotRef>> = BTreeMap::new();
    for (x, c) in crossings.iter().enumerate() {
        for (s, &a) in c.arcs.iter().enumerate() {
            if c.is_incoming(s) {
                heads.entry(a).or_default().push((x, s));
            } else {
                tails.entry(a).or_default().push((x, s));
            }
        }
    }
    let labels: BTreeSet<ArcLabel> = tails.keys().chain(heads.keys()).copied().collect();
    let mut out = BTreeMap::new();
    for a in labels {
        let t = tails.get(&a).map(Vec::as_slice).unwrap_or(&[]);
        let h = heads.get(&a).map(Vec::as_slice).unwrap_or(&[]);
        if t.len() + h.len() != 2 {
            return Err(Error::InvalidDiagram(format!(
                "arc {a} appears {} times (expected 2)",
                t.len() + h.len()
            )));
        }
        if t.len() != 1 {
            return Err(Error::InvalidDiagram(format!(
                "arc {a} is inconsistently oriented"
            )));
        }
        out.insert(
            a,
            ArcEnds {
                tail: t[0],
                head: h[0],
            },
        );
    }
    Ok(out)
}

/// Union-find over arc labels keeping the smallest label as representative.
#[derive(Default)]
pub(crate) struct LabelUnion {
    parent: HashMap<ArcLabel, ArcLabel>,
}

impl LabelUnion {
    pub fn find(&mut self, a: ArcLabel) -> ArcLabel {
        let p = *self.parent.get(&a).unwrap_or(&a);
        if p == a {
            return a;
        }
        let r = self.find(p);
        self.parent.insert(a, r);
        r
    }

    pub fn union(&mut self, a: ArcLabel, b: ArcLabel) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent.insert(hi, lo);
        }
    }
}

impl fmt::Display for LinkDiagram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::knot::pd::to_pd_string(self))
    }
}

/// Stable JSON shape for a diagram.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiagramJson {
    pub crossings: Vec<CrossingJson>,
    pub free_loops: Vec<ArcLabel>,
    pub components: Vec<ComponentJson>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrossingJson {
    pub id: usize,
    pub arcs: [ArcLabel; 4],
    pub sign: CrossingSign,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentJson {
    pub id: usize,
    pub arcs: Vec<ArcLabel>,
}

impl LinkDiagram {
    pub fn to_json(&self) -> DiagramJson {
        DiagramJson {
            crossings: self
                .crossings
                .iter()
                .enumerate()
                .map(|(id, c)| CrossingJson {
                    id,
                    arcs: c.arcs,
                    sign: c.sign,
                })
                .collect(),
            free_loops: self.free_loops.clone(),
            components: self
                .components
                .iter()
                .enumerate()
                .map(|(id, c)| ComponentJson {
                    id,
                    arcs: c.arcs.clone(),
                })
                .collect(),
        }
    }

    /// Rebuild from JSON. Components are recomputed and must agree with the
    /// stored ones.
    pub fn from_json(j: &DiagramJson) -> Result<LinkDiagram> {
        let mut crossings = vec![None; j.crossings.len()];
        for c in &j.crossings {
            let slot = crossings
                .get_mut(c.id)
                .ok_or(Error::UnknownCrossing(c.id))?;
            *slot = Some(Crossing::new(c.arcs, c.sign));
        }
        let crossings = crossings
            .into_iter()
            .enumerate()
            .map(|(i, c)| c.ok_or(Error::UnknownCrossing(i)))
            .collect::<Result<Vec<_>>>()?;
        let d = LinkDiagram::from_parts(crossings, j.free_loops.clone())?;
        let stored: Vec<Vec<ArcLabel>> = j.components.iter().map(|c| c.arcs.clone()).collect();
        let computed: Vec<Vec<ArcLabel>> = d.components.iter().map(|c| c.arcs.clone()).collect();
        if !stored.is_empty() && stored != computed {
            return Err(Error::InvalidDiagram(
                "stored components disagree with the crossings".into(),
            ));
        }
        Ok(d)
    }
}

impl Serialize for LinkDiagram {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

impl<'de> Deserialize<'de> for LinkDiagram {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = DiagramJson::deserialize(d)?;
        LinkDiagram::from_json(&j).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::knot::pd::parse_pd;

    fn hopf() -> LinkDiagram {
        parse_pd("X[1,3,2,4] X[2,4,1,3]").unwrap()
    }

    fn trefoil() -> LinkDiagram {
        parse_pd("X[1,5,2,4] X[3,1,4,6] X[5,3,6,2]").unwrap()
    }

    #[test]
    fn hopf_components_and_linking() {
        let h = hopf();
        assert_eq!(h.component_count(), 2);
        assert_eq!(h.linking_number(0, 1).unwrap().abs(), 1);
        assert_eq!(h.linking_number(0, 1), h.linking_number(1, 0));
        assert!(matches!(h.linking_number(0, 2), Err(Error::UnknownComponent(2))));
    }

    #[test]
    fn right_trefoil_writhe() {
        let t = trefoil();
        assert_eq!(t.component_count(), 1);
        assert_eq!(t.writhe(), 3);
        assert_eq!(t.mirror().writhe(), -3);
    }

    #[test]
    fn switch_is_involution() {
        let t = trefoil();
        for id in 0..3 {
            assert_eq!(t.switch_crossing(id).unwrap().switch_crossing(id).unwrap(), t);
        }
        assert!(matches!(t.switch_crossing(3), Err(Error::UnknownCrossing(3))));
    }

    #[test]
    fn switch_hopf_crossing_unlinks() {
        let h = hopf().switch_crossing(0).unwrap();
        assert_eq!(h.linking_number(0, 1).unwrap(), 0);
    }

    #[test]
    fn delete_from_hopf_leaves_unknot() {
        let h = hopf();
        for c in 0..2 {
            let r = h.delete_component(c).unwrap();
            assert_eq!(r.component_count(), 1);
            assert_eq!(r.crossing_count(), 0);
        }
    }

    #[test]
    fn delete_last_component_rejected() {
        assert_eq!(LinkDiagram::unknot().delete_component(0), Err(Error::LastComponent));
        assert_eq!(
            LinkDiagram::unlink(2).delete_component(5),
            Err(Error::UnknownComponent(5))
        );
        let u = LinkDiagram::unlink(2).delete_component(1).unwrap();
        assert_eq!(u.component_count(), 1);
    }

    #[test]
    fn reverse_component_flips_linking_sign() {
        let h = hopf();
        let lk = h.linking_number(0, 1).unwrap();
        let r = h.reverse_component(1).unwrap();
        assert_eq!(r.linking_number(0, 1).unwrap(), -lk);
        // reversing a knot keeps its writhe
        assert_eq!(trefoil().reverse_component(0).unwrap().writhe(), 3);
    }

    #[test]
    fn json_round_trip() {
        let t = trefoil();
        let s = serde_json::to_string(&t).unwrap();
        let back: LinkDiagram = serde_json::from_str(&s).unwrap();
        assert_eq!(back, t);
        assert!(s.starts_with("{\"crossings\":[{\"id\":0,\"arcs\":[1,5,2,4],\"sign\":\"positive\"}"));
    }

    #[test]
    fn inconsistent_orientation_rejected() {
        // arc 2 would be entered twice
        let bad = vec![
            Crossing::new([1, 3, 2, 4], CrossingSign::Positive),
            Crossing::new([2, 4, 1, 3], CrossingSign::Negative),
        ];
        assert!(LinkDiagram::from_parts(bad, vec![]).is_err());
    }
}
