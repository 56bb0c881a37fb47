//! Entanglement patterns of links under component deletion, Brunnian
//! detection and construction, probabilistic links, and comparison with the
//! measurement patterns of multi-qubit states.
//!
//! "Linked" means failing the bracket triviality test. That test is only a
//! necessary condition for being unlinked, so a `false` flag means "not
//! detected as linked". Linking numbers are attached as corroborating
//! evidence.

use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bracket::{self, BracketConfig};
use crate::entangle::PatternRow;
use crate::error::{Error, Result};
use crate::knot::{parse_pd, BraidLetter, BraidWord, LinkDiagram};
use crate::laurent::LaurentPoly;
use crate::quantum::seeded_rng;

pub const DEFAULT_COMPONENT_CAP: usize = 16;
/// Environment variable overriding the component cap.
pub const COMPONENT_CAP_ENV: &str = "KNOTWORK_COMPONENT_CAP";

/// Absolute tolerance when comparing link and state probabilities.
pub const MATCH_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PatternConfig {
    pub bracket: BracketConfig,
    /// Fall back to the sweep algorithm when a diagram is over the state-sum
    /// cap instead of refusing.
    pub allow_contraction: bool,
    pub component_cap: usize,
}

impl Default for PatternConfig {
    fn default() -> Self {
        Self {
            bracket: BracketConfig::default(),
            allow_contraction: true,
            component_cap: DEFAULT_COMPONENT_CAP,
        }
    }
}

impl PatternConfig {
    pub fn from_env() -> Self {
        let component_cap = std::env::var(COMPONENT_CAP_ENV)
            .ok()
            .and_then(|v| v.trim().parse().ok())
            .filter(|&v: &usize| v > 0)
            .unwrap_or(DEFAULT_COMPONENT_CAP);
        Self {
            bracket: BracketConfig::from_env(),
            component_cap,
            ..Self::default()
        }
    }

    /// Bracket of `d` by whichever engine the caps allow.
    fn bracket(&self, d: &LinkDiagram) -> Result<LaurentPoly> {
        let inner = self.bracket.serial();
        match bracket::bracket_with(d, &inner) {
            Err(e) if e.is_cap_overflow() && self.allow_contraction => {
                Ok(bracket::bracket_by_contraction(d))
            }
            r => r,
        }
    }

    fn is_trivial(&self, d: &LinkDiagram) -> Result<bool> {
        let v = LaurentPoly::minus_a_cubed_pow(-d.writhe()) * self.bracket(d)?;
        Ok(v == bracket::unlink_value(d.component_count()))
    }

    fn check_components(&self, d: &LinkDiagram, min: usize) -> Result<()> {
        let n = d.component_count();
        if n < min {
            return Err(Error::Arity(format!("need at least {min} components, found {n}")));
        }
        if n > self.component_cap {
            return Err(Error::CapExceeded {
                what: "component count",
                value: n,
                cap: self.component_cap,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkPattern {
    pub component_count: usize,
    pub full_linked: bool,
    /// `remainder_linked[c]`: whether deleting component `c` leaves a link
    /// detected as linked.
    pub remainder_linked: Vec<bool>,
    pub linking_matrix: Vec<Vec<i32>>,
}

pub fn link_pattern(d: &LinkDiagram) -> Result<LinkPattern> {
    link_pattern_with(d, &PatternConfig::from_env())
}

pub fn link_pattern_with(d: &LinkDiagram, config: &PatternConfig) -> Result<LinkPattern> {
    config.check_components(d, 2)?;
    let linking_matrix = d.linking_matrix()?;
    let full_linked = !config.is_trivial(d)?;
    let remainder_linked = (0..d.component_count())
        .into_par_iter()
        .map(|c| Ok(!config.is_trivial(&d.delete_component(c)?)?))
        .collect::<Result<Vec<_>>>()?;
    Ok(LinkPattern {
        component_count: d.component_count(),
        full_linked,
        remainder_linked,
        linking_matrix,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Brunnian {
    Brunnian,
    NotBrunnian,
    /// The diagram was too large to decide under the configured caps.
    Indeterminate,
}

/// Linked as a whole, with every single deletion leaving a totally unlinked
/// remainder and all pairwise linking numbers zero.
pub fn is_brunnian(d: &LinkDiagram) -> Brunnian {
    is_brunnian_with(d, &PatternConfig::from_env())
}

pub fn is_brunnian_with(d: &LinkDiagram, config: &PatternConfig) -> Brunnian {
    if config.check_components(d, 3).is_err() {
        return if d.component_count() < 3 {
            Brunnian::NotBrunnian
        } else {
            Brunnian::Indeterminate
        };
    }
    match d.linking_matrix() {
        Ok(m) if m.iter().flatten().any(|&x| x != 0) => return Brunnian::NotBrunnian,
        Ok(_) => {}
        Err(_) => return Brunnian::Indeterminate,
    }
    let verdict = || -> Result<Brunnian> {
        if config.is_trivial(d)? {
            return Ok(Brunnian::NotBrunnian);
        }
        let all_unlinked = (0..d.component_count())
            .into_par_iter()
            .map(|c| config.is_trivial(&d.delete_component(c)?))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .all(|t| t);
        Ok(if all_unlinked {
            Brunnian::Brunnian
        } else {
            Brunnian::NotBrunnian
        })
    };
    verdict().unwrap_or(Brunnian::Indeterminate)
}

/// The weaving word: the new strand (position n+1) makes a full twist with
/// the last old strand.
pub fn template_weave(n: usize) -> Result<BraidWord> {
    BraidWord::new(n + 1, vec![BraidLetter::new(n, -1), BraidLetter::new(n, -1)])
}

/// A Brunnian braid on one more strand: B·W·B⁻¹·W⁻¹ with W from
/// [`template_weave`]. The input must be Brunnian and the output is verified.
pub fn brunnian_template(b: &BraidWord, config: &PatternConfig) -> Result<BraidWord> {
    match is_brunnian_with(&b.closure(), config) {
        Brunnian::Brunnian => {}
        Brunnian::NotBrunnian => return Err(Error::NotBrunnian),
        Brunnian::Indeterminate => {
            return Err(Error::Budget("input closure too large to verify".into()))
        }
    }
    let n = b.strand_count();
    let big = b.with_strands(n + 1)?;
    let w = template_weave(n)?;
    let out = big.concat(&w)?.concat(&big.inverse())?.concat(&w.inverse())?;
    match is_brunnian_with(&out.closure(), config) {
        Brunnian::Brunnian => Ok(out),
        v => Err(Error::TemplateVerification(format!(
            "closure of {out} is {v:?}"
        ))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Influence {
    pub crossing: usize,
    /// Chance that cutting the component switches the crossing.
    pub probability: f64,
}

/// A link in which cutting a component may switch one crossing between
/// other components.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbabilisticLink {
    base: LinkDiagram,
    influences: BTreeMap<usize, Influence>,
}

impl ProbabilisticLink {
    /// Influences switch with probability 1/2.
    pub fn new(base: LinkDiagram, influences: BTreeMap<usize, usize>) -> Result<Self> {
        Self::with_probabilities(
            base,
            influences
                .into_iter()
                .map(|(c, x)| (c, Influence { crossing: x, probability: 0.5 }))
                .collect(),
        )
    }

    /// Extension with an arbitrary switch probability per component.
    pub fn with_probabilities(
        base: LinkDiagram,
        influences: BTreeMap<usize, Influence>,
    ) -> Result<Self> {
        for (&c, inf) in &influences {
            if c >= base.component_count() {
                return Err(Error::UnknownComponent(c));
            }
            let (u, o) = base.crossing_components(inf.crossing)?;
            if u == c || o == c {
                return Err(Error::InvalidInfluence(format!(
                    "crossing {} involves component {c} and would not survive its deletion",
                    inf.crossing
                )));
            }
            if !(0.0..=1.0).contains(&inf.probability) {
                return Err(Error::InvalidInfluence(format!(
                    "switch probability {} not in [0, 1]",
                    inf.probability
                )));
            }
        }
        Ok(Self { base, influences })
    }

    pub fn base(&self) -> &LinkDiagram {
        &self.base
    }

    pub fn influences(&self) -> &BTreeMap<usize, Influence> {
        &self.influences
    }

    fn check(&self, c: usize) -> Result<()> {
        if c >= self.base.component_count() {
            return Err(Error::UnknownComponent(c));
        }
        Ok(())
    }

    /// The (probability, remainder) branches of cutting component `c`.
    pub fn cut_branches(&self, c: usize) -> Result<Vec<(f64, LinkDiagram)>> {
        self.check(c)?;
        let plain = self.base.delete_component(c)?;
        Ok(match self.influences.get(&c) {
            None => vec![(1.0, plain)],
            Some(inf) => {
                let switched = self.base.switch_crossing(inf.crossing)?.delete_component(c)?;
                vec![(inf.probability, switched), (1.0 - inf.probability, plain)]
            }
        })
    }
}

/// Cut component `c`, first switching its influenced crossing with the
/// configured probability using the seeded generator.
pub fn cut_probabilistic(p: &ProbabilisticLink, c: usize, seed: u64) -> Result<LinkDiagram> {
    p.check(c)?;
    let mut d = p.base.clone();
    if let Some(inf) = p.influences.get(&c) {
        let u: f64 = seeded_rng(seed).random();
        if u < inf.probability {
            d = d.switch_crossing(inf.crossing)?;
        }
    }
    d.delete_component(c)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutDistribution {
    pub linked: f64,
    pub unlinked: f64,
}

/// Exact distribution of linked/unlinked remainders after cutting `c`.
pub fn cut_distribution(p: &ProbabilisticLink, c: usize) -> Result<CutDistribution> {
    cut_distribution_with(p, c, &PatternConfig::from_env())
}

pub fn cut_distribution_with(
    p: &ProbabilisticLink,
    c: usize,
    config: &PatternConfig,
) -> Result<CutDistribution> {
    let mut out = CutDistribution {
        linked: 0.0,
        unlinked: 0.0,
    };
    for (w, d) in p.cut_branches(c)? {
        if config.is_trivial(&d)? {
            out.unlinked += w;
        } else {
            out.linked += w;
        }
    }
    Ok(out)
}

/// Parse a probabilistic link: PD text plus lines
/// `influence <component> <crossing> [<probability>]`. A probability other
/// than 1/2 is the generalized extension and must be enabled with a
/// `general` line.
pub fn parse_problink(text: &str) -> Result<ProbabilisticLink> {
    let mut pd = String::new();
    let mut influences = BTreeMap::new();
    let mut general = false;
    let mut offset = 0;
    for line in text.split_inclusive('\n') {
        let start = offset;
        offset += line.len();
        let body = line.split('#').next().unwrap_or("");
        let toks: Vec<&str> = body.split_whitespace().collect();
        match toks.first().copied() {
            Some("influence") => {
                let at = start + body.find("influence").unwrap_or(0);
                let num = |i: usize| -> Result<usize> {
                    toks.get(i)
                        .and_then(|t| t.parse().ok())
                        .ok_or_else(|| Error::parse(at, "expected `influence <component> <crossing>`"))
                };
                let (c, x) = (num(1)?, num(2)?);
                let probability = match toks.get(3) {
                    None => 0.5,
                    Some(t) => t
                        .parse()
                        .map_err(|_| Error::parse(at, format!("bad probability `{t}`")))?,
                };
                if toks.len() > 4 {
                    return Err(Error::parse(at, "trailing tokens after influence"));
                }
                if influences
                    .insert(c, (at, Influence { crossing: x, probability }))
                    .is_some()
                {
                    return Err(Error::parse(at, format!("component {c} has two influences")));
                }
                pd.push_str(&" ".repeat(line.len()));
            }
            Some("general") if toks.len() == 1 => {
                general = true;
                pd.push_str(&" ".repeat(line.len()));
            }
            _ => pd.push_str(line),
        }
    }
    let base = parse_pd(&pd)?;
    for (at, inf) in influences.values() {
        if inf.probability != 0.5 && !general {
            return Err(Error::parse(
                *at,
                "switch probabilities other than 1/2 need a `general` line",
            ));
        }
    }
    ProbabilisticLink::with_probabilities(
        base,
        influences.into_iter().map(|(c, (_, i))| (c, i)).collect(),
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchEntry {
    pub component: usize,
    pub qubit: usize,
    /// Probability that cutting the component leaves a linked remainder.
    pub linked_probability: f64,
    /// Probability that measuring the qubit leaves an entangled residual.
    pub entangled_probability: f64,
    pub matched: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchReport {
    /// `pairing[q]` is the component paired with qubit `q`.
    pub pairing: Vec<usize>,
    pub entries: Vec<MatchEntry>,
    pub full_match: bool,
    pub note: String,
}

pub const BASIS_NOTE: &str =
    "the correspondence depends on the measurement basis; a different basis can change the state pattern";

/// Compare a link's deletion pattern with a state's measurement pattern.
/// Each pair is compared as a distribution: the chance of a linked
/// remainder against the chance of an entangled residual. With `prob`
/// given, link chances come from its cut distributions; otherwise they are
/// 0 or 1 from `lp`. With `search`, every pairing of components with qubits
/// is tried and the one with most matches is reported (identity first on
/// ties); otherwise component i is paired with qubit i.
pub fn aravind_match(
    lp: &LinkPattern,
    pattern: &[PatternRow],
    prob: Option<&ProbabilisticLink>,
    search: bool,
) -> Result<MatchReport> {
    aravind_match_with(lp, pattern, prob, search, &PatternConfig::from_env())
}

pub fn aravind_match_with(
    lp: &LinkPattern,
    pattern: &[PatternRow],
    prob: Option<&ProbabilisticLink>,
    search: bool,
    config: &PatternConfig,
) -> Result<MatchReport> {
    let n = lp.component_count;
    if pattern.len() != n {
        return Err(Error::Arity(format!(
            "link has {n} components but the state has {} qubits",
            pattern.len()
        )));
    }
    if let Some(p) = prob {
        if p.base.component_count() != n {
            return Err(Error::Arity("probabilistic link and pattern differ in size".into()));
        }
    }
    let linked: Vec<f64> = (0..n)
        .map(|c| match prob {
            Some(p) => cut_distribution_with(p, c, config).map(|d| d.linked),
            None => Ok(if lp.remainder_linked[c] { 1.0 } else { 0.0 }),
        })
        .collect::<Result<_>>()?;
    let mut by_qubit = vec![0.0; n];
    for row in pattern {
        *by_qubit
            .get_mut(row.qubit)
            .ok_or_else(|| Error::Arity(format!("pattern row for qubit {}", row.qubit)))? =
            row.entangled_probability();
    }
    let entry = |q: usize, c: usize| MatchEntry {
        component: c,
        qubit: q,
        linked_probability: linked[c],
        entangled_probability: by_qubit[q],
        matched: (linked[c] - by_qubit[q]).abs() <= MATCH_TOLERANCE,
    };
    let score = |pairing: &[usize]| pairing.iter().enumerate().filter(|(q, &c)| entry(*q, c).matched).count();

    let mut best: Vec<usize> = (0..n).collect();
    if search {
        if n > 8 {
            return Err(Error::CapExceeded {
                what: "pairing search size",
                value: n,
                cap: 8,
            });
        }
        let mut best_score = score(&best);
        let mut perm: Vec<usize> = (0..n).collect();
        while next_permutation(&mut perm) {
            let s = score(&perm);
            if s > best_score {
                best_score = s;
                best = perm.clone();
            }
        }
    }
    let entries: Vec<MatchEntry> = best.iter().enumerate().map(|(q, &c)| entry(q, c)).collect();
    Ok(MatchReport {
        full_match: entries.iter().all(|e| e.matched),
        pairing: best,
        entries,
        note: BASIS_NOTE.into(),
    })
}

fn next_permutation(p: &mut [usize]) -> bool {
    let n = p.len();
    if n < 2 {
        return false;
    }
    let Some(i) = (0..n - 1).rev().find(|&i| p[i] < p[i + 1]) else {
        return false;
    };
    let j = (i + 1..n).rev().find(|&j| p[j] > p[i]).unwrap();
    p.swap(i, j);
    p[i + 1..].reverse();
    true
}
