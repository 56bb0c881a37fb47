//! The bracket state sum and the normalized invariant built from it.
//!
//! Normalization is ⟨unknot⟩ = 1: a state with `a` A-smoothings, `b`
//! B-smoothings and `k` loops weighs A^(a−b)·δ^(k−1) with δ = −A² − A⁻². The
//! other common convention (δ^k) differs by an overall factor of δ.
//!
//! At a crossing `[a, b, c, d]` the A-smoothing joins a–b and c–d, the regions
//! swept counterclockwise from the incoming under-strand; the B-smoothing
//! joins a–d and b–c.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::knot::{ArcLabel, LinkDiagram};
use crate::laurent::LaurentPoly;

pub const DEFAULT_CROSSING_CAP: usize = 24;
/// Environment variable overriding the state-sum crossing cap.
pub const CROSSING_CAP_ENV: &str = "KNOTWORK_CROSSING_CAP";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BracketConfig {
    /// Largest crossing count accepted by the state sum.
    pub cap: usize,
    pub parallel: bool,
}

impl Default for BracketConfig {
    fn default() -> Self {
        Self {
            cap: DEFAULT_CROSSING_CAP,
            parallel: true,
        }
    }
}

impl BracketConfig {
    /// Defaults with the cap taken from `KNOTWORK_CROSSING_CAP` when set.
    pub fn from_env() -> Self {
        let mut c = Self::default();
        if let Some(cap) = std::env::var(CROSSING_CAP_ENV)
            .ok()
            .and_then(|v| v.trim().parse().ok())
            .filter(|&v: &usize| v > 0)
        {
            c.cap = cap;
        }
        c
    }

    pub fn serial(mut self) -> Self {
        self.parallel = false;
        self
    }

    fn check(&self, d: &LinkDiagram) -> Result<()> {
        // 2^N must also fit the state index
        let cap = self.cap.min(62);
        if d.crossing_count() > cap {
            return Err(Error::CapExceeded {
                what: "crossing count",
                value: d.crossing_count(),
                cap,
            });
        }
        Ok(())
    }
}

/// One smoothing of every crossing. `choices[k]` is true for a B-smoothing
/// at crossing `k`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SmoothingState {
    pub choices: Vec<bool>,
    pub loop_count: usize,
}

impl SmoothingState {
    pub fn a_count(&self) -> usize {
        self.choices.iter().filter(|&&b| !b).count()
    }

    pub fn b_count(&self) -> usize {
        self.choices.iter().filter(|&&b| b).count()
    }

    /// Choices as a string of `A`/`B`, crossing 0 first.
    pub fn label(&self) -> String {
        self.choices.iter().map(|&b| if b { 'B' } else { 'A' }).collect()
    }
}

/// Crossings with arcs renumbered densely, ready for loop counting.
struct Smoother {
    slots: Vec<[u32; 4]>,
    arc_count: usize,
    free: usize,
}

impl Smoother {
    fn new(d: &LinkDiagram) -> Self {
        let mut index: BTreeMap<ArcLabel, u32> = BTreeMap::new();
        for c in d.crossings() {
            for a in c.arcs {
                let n = index.len() as u32;
                index.entry(a).or_insert(n);
            }
        }
        Self {
            slots: d.crossings().iter().map(|c| c.arcs.map(|a| index[&a])).collect(),
            arc_count: index.len(),
            free: d.free_loops().len(),
        }
    }

    fn n(&self) -> usize {
        self.slots.len()
    }

    /// Loop count of state `index` (crossing 0 is the most significant bit)
    /// using `parent` as scratch space.
    fn loops(&self, index: u64, parent: &mut [u32]) -> usize {
        for (i, p) in parent.iter_mut().enumerate() {
            *p = i as u32;
        }
        let n = self.n();
        let mut classes = self.arc_count;
        for (k, [a, b, c, d]) in self.slots.iter().enumerate() {
            let pairs = if (index >> (n - 1 - k)) & 1 == 0 {
                [(a, b), (c, d)]
            } else {
                [(a, d), (b, c)]
            };
            for (x, y) in pairs {
                let (rx, ry) = (find(parent, *x), find(parent, *y));
                if rx != ry {
                    parent[rx.max(ry) as usize] = rx.min(ry);
                    classes -= 1;
                }
            }
        }
        classes + self.free
    }

    /// Counts indexed by [b_count][loop_count] over states in `range`.
    fn tally(&self, range: std::ops::Range<u64>) -> Vec<Vec<u64>> {
        let n = self.n();
        let mut table = vec![vec![0u64; self.arc_count + self.free + 1]; n + 1];
        let mut parent = vec![0u32; self.arc_count];
        for index in range {
            let loops = self.loops(index, &mut parent);
            table[index.count_ones() as usize][loops] += 1;
        }
        table
    }
}

fn find(parent: &mut [u32], mut x: u32) -> u32 {
    while parent[x as usize] != x {
        let p = parent[x as usize];
        parent[x as usize] = parent[p as usize];
        x = p;
    }
    x
}

/// Weight A^(a−b)·δ^(loops−1) of a state.
pub fn state_weight(state: &SmoothingState) -> LaurentPoly {
    weight(state.a_count(), state.b_count(), state.loop_count)
}

fn weight(a: usize, b: usize, loops: usize) -> LaurentPoly {
    let mono = LaurentPoly::monomial(1, a as i32 - b as i32);
    mono * LaurentPoly::delta().pow(loops.saturating_sub(1) as u32)
}

/// All 2^N smoothing states, streamed in lexicographic order of the choice
/// bits (crossing 0 most significant, A before B).
pub fn enumerate_states(d: &LinkDiagram) -> Result<impl Iterator<Item = SmoothingState>> {
    enumerate_states_with(d, &BracketConfig::from_env())
}

pub fn enumerate_states_with(
    d: &LinkDiagram,
    config: &BracketConfig,
) -> Result<impl Iterator<Item = SmoothingState>> {
    config.check(d)?;
    let sm = Smoother::new(d);
    let n = sm.n();
    let mut parent = vec![0u32; sm.arc_count];
    Ok((0..1u64 << n).map(move |index| {
        let loop_count = sm.loops(index, &mut parent);
        SmoothingState {
            choices: (0..n).map(|k| (index >> (n - 1 - k)) & 1 == 1).collect(),
            loop_count,
        }
    }))
}

/// The bracket ⟨d⟩ with ⟨unknot⟩ = 1.
pub fn bracket(d: &LinkDiagram) -> Result<LaurentPoly> {
    bracket_with(d, &BracketConfig::from_env())
}

pub fn bracket_with(d: &LinkDiagram, config: &BracketConfig) -> Result<LaurentPoly> {
    config.check(d)?;
    let sm = Smoother::new(d);
    let n = sm.n();
    let total = 1u64 << n;
    const CHUNK: u64 = 1 << 12;
    let table = if config.parallel && total > CHUNK {
        let chunks = total.div_ceil(CHUNK);
        (0..chunks)
            .into_par_iter()
            .map(|i| sm.tally(i * CHUNK..((i + 1) * CHUNK).min(total)))
            .reduce(
                || vec![vec![0u64; sm.arc_count + sm.free + 1]; n + 1],
                |mut acc, t| {
                    for (ra, rt) in acc.iter_mut().zip(t) {
                        for (x, y) in ra.iter_mut().zip(rt) {
                            *x += y;
                        }
                    }
                    acc
                },
            )
    } else {
        sm.tally(0..total)
    };
    let mut out = LaurentPoly::zero();
    let delta = LaurentPoly::delta();
    let mut delta_pows = vec![LaurentPoly::one()];
    for b in 0..=n {
        for (loops, &count) in table[b].iter().enumerate() {
            if count == 0 {
                continue;
            }
            while delta_pows.len() < loops {
                let next = delta_pows.last().unwrap().clone() * delta.clone();
                delta_pows.push(next);
            }
            let term = LaurentPoly::monomial(count as i128, n as i32 - 2 * b as i32)
                * delta_pows[loops - 1].clone();
            out = out + term;
        }
    }
    Ok(out)
}

/// (−A³)^(−writhe)·⟨d⟩, invariant under all three Reidemeister moves.
pub fn normalized_invariant(d: &LinkDiagram) -> Result<LaurentPoly> {
    normalized_invariant_with(d, &BracketConfig::from_env())
}

pub fn normalized_invariant_with(d: &LinkDiagram, config: &BracketConfig) -> Result<LaurentPoly> {
    Ok(LaurentPoly::minus_a_cubed_pow(-d.writhe()) * bracket_with(d, config)?)
}

/// Whether the normalized invariant equals that of the unlink with the same
/// number of components, δ^(c−1). A necessary condition for triviality only:
/// some nontrivial links pass it.
pub fn is_bracket_trivial(d: &LinkDiagram) -> Result<bool> {
    is_bracket_trivial_with(d, &BracketConfig::from_env())
}

pub fn is_bracket_trivial_with(d: &LinkDiagram, config: &BracketConfig) -> Result<bool> {
    Ok(normalized_invariant_with(d, config)? == unlink_value(d.component_count()))
}

/// δ^(c−1), the bracket of the c-component unlink.
pub fn unlink_value(c: usize) -> LaurentPoly {
    LaurentPoly::delta().pow(c.saturating_sub(1) as u32)
}

/// Bracket computed by sweeping the crossings one at a time and keeping, for
/// each way the processed part can connect the still-open arcs, the summed
/// weight. Exponential only in the width of the sweep, so it handles braid
/// closures far beyond the state-sum cap.
pub fn bracket_by_contraction(d: &LinkDiagram) -> LaurentPoly {
    let sm = Smoother::new(d);
    let n = sm.n();
    if n == 0 {
        return unlink_value(sm.free);
    }

    // greedy order: next crossing shares the most arcs with the processed set
    let mut done = vec![false; n];
    let mut touched = vec![0u8; sm.arc_count];
    let mut order = Vec::with_capacity(n);
    for _ in 0..n {
        let best = (0..n)
            .filter(|&k| !done[k])
            .max_by_key(|&k| {
                let shared = sm.slots[k].iter().filter(|&&a| touched[a as usize] > 0).count();
                (shared, std::cmp::Reverse(k))
            })
            .unwrap();
        done[best] = true;
        for a in sm.slots[best] {
            touched[a as usize] += 1;
        }
        order.push(best);
    }

    type Key = (Vec<(u32, u32)>, bool);
    let mut states: HashMap<Key, LaurentPoly> = HashMap::new();
    states.insert((Vec::new(), false), LaurentPoly::one());
    let delta = LaurentPoly::delta();

    for &k in &order {
        let slots = sm.slots[k];
        let mut next: HashMap<Key, LaurentPoly> = HashMap::new();
        for ((matching, first_done), poly) in states {
            let partner: HashMap<u32, u32> = matching
                .iter()
                .flat_map(|&(x, y)| [(x, y), (y, x)])
                .collect();
            for (smooth, exp) in [([(0, 1), (2, 3)], 1), ([(0, 3), (1, 2)], -1)] {
                let (pairs, loops) = smooth_crossing(&slots, smooth, &partner);
                let mut m: Vec<(u32, u32)> = matching
                    .iter()
                    .copied()
                    .filter(|(x, y)| !slots.contains(x) && !slots.contains(y))
                    .collect();
                m.extend(pairs);
                m.sort_unstable();
                let mut fd = first_done;
                let mut w = LaurentPoly::monomial(1, exp);
                for _ in 0..loops {
                    if fd {
                        w = w * delta.clone();
                    } else {
                        fd = true;
                    }
                }
                let entry = next.entry((m, fd)).or_insert_with(LaurentPoly::zero);
                *entry = entry.clone() + poly.clone() * w;
            }
        }
        states = next;
    }
    let mut out = LaurentPoly::zero();
    for ((m, fd), p) in states {
        debug_assert!(m.is_empty());
        let free = if fd { sm.free } else { sm.free.saturating_sub(1) };
        out = out + p * delta.pow(free as u32);
    }
    out
}

/// Connect the ends at one crossing. Returns the new open-arc pairs and the
/// number of loops closed.
fn smooth_crossing(
    slots: &[u32; 4],
    smooth: [(usize, usize); 2],
    partner: &HashMap<u32, u32>,
) -> (Vec<(u32, u32)>, usize) {
    #[derive(Clone, Copy)]
    enum Far {
        Slot(usize),
        Open(u32),
    }
    let mut sp = [0usize; 4];
    for (x, y) in smooth {
        sp[x] = y;
        sp[y] = x;
    }
    let slot_of = |a: u32, not: usize| (0..4).find(|&t| t != not && slots[t] == a);
    let mut far = [Far::Open(0); 4];
    for s in 0..4 {
        let a = slots[s];
        far[s] = if let Some(t) = slot_of(a, s) {
            // both ends of this arc are here
            Far::Slot(t)
        } else if let Some(&p) = partner.get(&a) {
            match slot_of(p, 4) {
                Some(t) => Far::Slot(t),
                None => Far::Open(p),
            }
        } else {
            Far::Open(a)
        };
    }
    let mut visited = [false; 4];
    let mut pairs = Vec::new();
    for s in 0..4 {
        if visited[s] {
            continue;
        }
        if let Far::Open(start) = far[s] {
            let mut cur = s;
            loop {
                visited[cur] = true;
                let t = sp[cur];
                visited[t] = true;
                match far[t] {
                    Far::Open(end) => {
                        pairs.push((start.min(end), start.max(end)));
                        break;
                    }
                    Far::Slot(u) => cur = u,
                }
            }
        }
    }
    let mut loops = 0;
    for s in 0..4 {
        if visited[s] {
            continue;
        }
        loops += 1;
        let mut cur = s;
        while !visited[cur] {
            visited[cur] = true;
            let t = sp[cur];
            visited[t] = true;
            match far[t] {
                Far::Slot(u) => cur = u,
                Far::Open(_) => unreachable!("closed walk reached an open end"),
            }
        }
    }
    (pairs, loops)
}
