//! Quantum knots: finitely supported superpositions of knot classes with
//! measurement semantics.
//!
//! Knot classes are identified by component count and the bracket
//! normalized by self-writhe, (−A³)^(−w_self)·⟨d⟩. For knots this is the
//! usual normalized invariant; for links it also ignores the relative
//! orientation of components. It is a proxy for knot type, not a classifier:
//! distinct knots can share a key. Mirror images get distinct keys whenever
//! the invariant tells them apart.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::OnceLock;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bracket::{self, BracketConfig, SmoothingState};
use crate::error::{Error, Result};
use crate::knot::{parse_braid, parse_pd, FlatDiagram, LinkDiagram};
use crate::laurent::LaurentPoly;

/// Generator behind every seeded sample: ChaCha with 8 rounds, seeded
/// through `SeedableRng::seed_from_u64` (rand_chacha 0.9).
pub const RNG_ALGORITHM: &str = "chacha8/seed_from_u64";

pub const NORM_TOLERANCE: f64 = 1e-9;

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct KnotClassKey {
    pub component_count: usize,
    pub fingerprint: String,
}

impl KnotClassKey {
    pub fn of(d: &LinkDiagram) -> Result<Self> {
        Self::of_with(d, &BracketConfig::from_env())
    }

    pub fn of_with(d: &LinkDiagram, config: &BracketConfig) -> Result<Self> {
        let b = bracket::bracket_with(d, config)?;
        Ok(Self::from_bracket(d, &b))
    }

    pub(crate) fn from_bracket(d: &LinkDiagram, b: &LaurentPoly) -> Self {
        let v = LaurentPoly::minus_a_cubed_pow(-d.self_writhe()) * b.clone();
        Self {
            component_count: d.component_count(),
            fingerprint: v.to_string(),
        }
    }

    /// Catalog name (`unknot`, `trefoil_R`, `hopf`, …) when the key matches
    /// one of the built-in examples.
    pub fn name(&self) -> Option<&'static str> {
        catalog().get(self).copied()
    }
}

impl fmt::Display for KnotClassKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.name() {
            Some(n) => f.write_str(n),
            None => write!(f, "{}-component[{}]", self.component_count, self.fingerprint),
        }
    }
}

fn catalog() -> &'static BTreeMap<KnotClassKey, &'static str> {
    static CATALOG: OnceLock<BTreeMap<KnotClassKey, &'static str>> = OnceLock::new();
    CATALOG.get_or_init(|| {
        let trefoil = parse_pd("X[1,5,2,4] X[3,1,4,6] X[5,3,6,2]").expect("trefoil");
        let braid = |w: &str| parse_braid(w).expect("catalog braid").closure();
        let entries = [
            ("unknot", LinkDiagram::unknot()),
            ("unlink2", LinkDiagram::unlink(2)),
            ("unlink3", LinkDiagram::unlink(3)),
            ("unlink4", LinkDiagram::unlink(4)),
            ("trefoil_L", trefoil.mirror()),
            ("trefoil_R", trefoil),
            ("figure_eight", braid("n=3: s1 s2^-1 s1 s2^-1")),
            ("cinquefoil_R", braid("n=2: s1 s1 s1 s1 s1")),
            ("cinquefoil_L", braid("n=2: s1^-1 s1^-1 s1^-1 s1^-1 s1^-1")),
            ("hopf", braid("n=2: s1 s1")),
            ("solomon", braid("n=2: s1 s1 s1 s1")),
            ("borromean", braid("n=3: s1 s2^-1 s1 s2^-1 s1 s2^-1")),
        ];
        let cfg = BracketConfig::default().serial();
        entries
            .into_iter()
            .map(|(name, d)| (KnotClassKey::of_with(&d, &cfg).expect("small catalog diagram"), name))
            .collect()
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub amplitude: Complex64,
    pub representative: LinkDiagram,
}

/// Q = Σ ρ(K)e^{iθ(K)} |K⟩ over finitely many classes K.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumKnot {
    terms: BTreeMap<KnotClassKey, Term>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementOutcome {
    pub key: KnotClassKey,
    pub probability: f64,
    pub collapsed: QuantumKnot,
}

impl QuantumKnot {
    /// Group diagrams by class, sum amplitudes within a class and normalize.
    /// The first diagram seen in a class is kept as its representative.
    pub fn from_weighted_diagrams(items: &[(LinkDiagram, Complex64)]) -> Result<Self> {
        Self::from_weighted_diagrams_with(items, &BracketConfig::from_env())
    }

    pub fn from_weighted_diagrams_with(
        items: &[(LinkDiagram, Complex64)],
        config: &BracketConfig,
    ) -> Result<Self> {
        let keys = items
            .iter()
            .map(|(d, _)| KnotClassKey::of_with(d, config))
            .collect::<Result<Vec<_>>>()?;
        Self::merge(items.iter().zip(keys).map(|((d, a), k)| (k, d.clone(), *a)), false)
    }

    /// Coherent merging adds amplitudes within a class. Incoherent merging
    /// treats the inputs as orthogonal states, so a class gets probability
    /// Σ|a|²; its amplitude keeps the phase of the first input.
    fn merge(
        items: impl IntoIterator<Item = (KnotClassKey, LinkDiagram, Complex64)>,
        incoherent: bool,
    ) -> Result<Self> {
        let mut terms: BTreeMap<KnotClassKey, (Term, f64, Complex64)> = BTreeMap::new();
        for (key, d, a) in items {
            terms
                .entry(key)
                .and_modify(|(t, w, _)| {
                    t.amplitude += a;
                    *w += a.norm_sqr();
                })
                .or_insert((
                    Term {
                        amplitude: a,
                        representative: d,
                    },
                    a.norm_sqr(),
                    a,
                ));
        }
        let mut terms: BTreeMap<KnotClassKey, Term> = terms
            .into_iter()
            .map(|(k, (mut t, w, first))| {
                if incoherent {
                    let phase = if first.norm() > 0.0 {
                        first / first.norm()
                    } else {
                        Complex64::new(1.0, 0.0)
                    };
                    t.amplitude = phase * w.sqrt();
                }
                (k, t)
            })
            .collect();
        terms.retain(|_, t| t.amplitude != Complex64::new(0.0, 0.0));
        if terms.is_empty() {
            return Err(Error::Unnormalized("all amplitudes are zero".into()));
        }
        Ok(Self { terms }.normalize())
    }

    /// Every resolution of a flat diagram, weighted by `rule` (given the
    /// choice bits, node 0 first) and merged by class. Distinct resolutions
    /// are distinct diagram states, so a class is observed with probability
    /// Σ|a|² over its resolutions.
    pub fn from_flat_diagram<F>(f: &FlatDiagram, rule: F, config: &BracketConfig) -> Result<Self>
    where
        F: Fn(&[bool]) -> Complex64 + Sync,
    {
        let n = f.node_count();
        if n > config.cap.min(62) {
            return Err(Error::CapExceeded {
                what: "flat diagram node count",
                value: n,
                cap: config.cap.min(62),
            });
        }
        let inner = BracketConfig {
            parallel: false,
            ..*config
        };
        let classify = |index: u64| -> Result<(KnotClassKey, LinkDiagram, Complex64)> {
            let bits: Vec<bool> = (0..n).map(|k| (index >> (n - 1 - k)) & 1 == 1).collect();
            let d = f.resolve(&bits)?;
            let key = KnotClassKey::of_with(&d, &inner)?;
            Ok((key, d, rule(&bits)))
        };
        let resolved: Vec<_> = if config.parallel {
            (0..1u64 << n).into_par_iter().map(classify).collect::<Result<_>>()?
        } else {
            (0..1u64 << n).map(classify).collect::<Result<_>>()?
        };
        Self::merge(resolved, true)
    }

    /// Uniform amplitude 1/√(2^N) on every resolution.
    pub fn from_flat_uniform(f: &FlatDiagram) -> Result<Self> {
        let amp = Complex64::new((0.5f64).powi(f.node_count() as i32).sqrt(), 0.0);
        Self::from_flat_diagram(f, |_| amp, &BracketConfig::from_env())
    }

    pub fn terms(&self) -> &BTreeMap<KnotClassKey, Term> {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.terms.values().map(|t| t.amplitude.norm_sqr()).sum()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() <= NORM_TOLERANCE
    }

    pub fn normalize(mut self) -> Self {
        let norm = self.norm_sqr().sqrt();
        if norm > 0.0 && (norm - 1.0).abs() > f64::EPSILON {
            for t in self.terms.values_mut() {
                t.amplitude /= norm;
            }
        }
        self
    }

    /// |amplitude|² per class.
    pub fn outcome_distribution(&self) -> BTreeMap<KnotClassKey, f64> {
        self.terms
            .iter()
            .map(|(k, t)| (k.clone(), t.amplitude.norm_sqr()))
            .collect()
    }

    /// Sample a class with probability |amplitude|² and collapse onto it.
    pub fn measure(&self, seed: u64) -> Result<MeasurementOutcome> {
        if !self.is_normalized() {
            return Err(Error::Unnormalized(format!(
                "total probability {} is not 1",
                self.norm_sqr()
            )));
        }
        let u: f64 = seeded_rng(seed).random();
        let mut acc = 0.0;
        let mut chosen = None;
        for (k, t) in &self.terms {
            let p = t.amplitude.norm_sqr();
            if p == 0.0 {
                continue;
            }
            acc += p;
            chosen = Some((k, t, p));
            if u < acc {
                break;
            }
        }
        let (key, term, probability) = chosen.expect("normalized state has a positive term");
        let collapsed = QuantumKnot {
            terms: BTreeMap::from([(
                key.clone(),
                Term {
                    amplitude: Complex64::new(1.0, 0.0),
                    representative: term.representative.clone(),
                },
            )]),
        };
        Ok(MeasurementOutcome {
            key: key.clone(),
            probability,
            collapsed,
        })
    }

    pub fn to_json(&self) -> Vec<TermJson> {
        self.terms
            .iter()
            .map(|(k, t)| TermJson {
                key: k.clone(),
                name: k.name().map(str::to_string),
                amplitude_re: t.amplitude.re,
                amplitude_im: t.amplitude.im,
                representative: t.representative.clone(),
            })
            .collect()
    }

    /// Rebuild from JSON; every representative must reproduce its key.
    pub fn from_json(terms: &[TermJson]) -> Result<Self> {
        let mut out = BTreeMap::new();
        for t in terms {
            let key = KnotClassKey::of(&t.representative)?;
            if key != t.key {
                return Err(Error::InvalidDiagram(format!(
                    "representative does not belong to class {}",
                    t.key
                )));
            }
            out.insert(
                key,
                Term {
                    amplitude: Complex64::new(t.amplitude_re, t.amplitude_im),
                    representative: t.representative.clone(),
                },
            );
        }
        if out.is_empty() {
            return Err(Error::Unnormalized("no terms".into()));
        }
        Ok(Self { terms: out })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermJson {
    pub key: KnotClassKey,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub name: Option<String>,
    pub amplitude_re: f64,
    pub amplitude_im: f64,
    pub representative: LinkDiagram,
}

impl Serialize for QuantumKnot {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

impl<'de> Deserialize<'de> for QuantumKnot {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let terms = Vec::<TermJson>::deserialize(d)?;
        QuantumKnot::from_json(&terms).map_err(serde::de::Error::custom)
    }
}

/// |K⟩ = Σ_S ⟨K|S⟩|S⟩: each smoothing state with its weight. The weights
/// sum to the bracket.
pub fn internal_state_expansion(d: &LinkDiagram) -> Result<Vec<(SmoothingState, LaurentPoly)>> {
    Ok(bracket::enumerate_states(d)?
        .map(|s| {
            let w = bracket::state_weight(&s);
            (s, w)
        })
        .collect())
}
