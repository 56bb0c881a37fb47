//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use knotwork::bracket::{bracket, bracket_with, normalized_invariant, BracketConfig};
use knotwork::knot::{apply_reidemeister, enumerate_sites, parse_braid, parse_pd, BraidLetter, BraidWord, LinkDiagram, Move};
use knotwork::link_pattern::{is_brunnian, Brunnian};
use knotwork::quantum::{KnotClassKey, QuantumKnot};
use knotwork::tensor::{
    basis_insertion, contract, link_to_network, trace_network, CrossingTensor, DensityInsertion, KetVector,
    NetworkGraph, TensorNode,
};
use knotwork::LaurentPoly;
use knotwork_tests::oracle::{as_poly, skein_bracket};
use num_complex::Complex64;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;
use statrs::distribution::{ChiSquared, ContinuousCDF};

type Outcome = Result<String, String>;

fn data(name: &str) -> String {
    format!("{}/../../data/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn read(name: &str) -> String {
    std::fs::read_to_string(data(name)).unwrap()
}

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn cli(args: &[&str]) -> Result<Value, String> {
    let mut full = vec!["knotwork".to_string(), "--format".into(), "json".into()];
    full.extend(args.iter().map(|a| a.to_string()));
    let out = knotwork_cli::run(full);
    if out.code != 0 {
        return Err(format!("knotwork {} exited {}: {}", args.join(" "), out.code, out.stderr.trim()));
    }
    serde_json::from_str(&out.stdout).map_err(|e| e.to_string())
}

fn random_braid(rng: &mut ChaCha8Rng, strands: std::ops::RangeInclusive<usize>, max_len: usize) -> BraidWord {
    let n = rng.random_range(strands);
    let len = if n < 2 { 0 } else { rng.random_range(0..=max_len) };
    let letters = (0..len)
        .map(|_| BraidLetter::new(rng.random_range(1..n), if rng.random_bool(0.5) { 1 } else { -1 }))
        .collect();
    BraidWord::new(n, letters).unwrap()
}

fn bracket_correctness() -> Outcome {
    let start = Instant::now();
    let mut shipped = 0;
    for f in ["hopf.pd", "trefoil.pd", "flat_trefoil.pd", "flat_hopf.pd", "borromean.pd", "link_l.pd", "borromean.braid"] {
        let text = read(f);
        let d = if f.ends_with(".braid") {
            parse_braid(&text).unwrap().closure()
        } else {
            parse_pd(&text).unwrap()
        };
        ensure(as_poly(&bracket(&d).unwrap()) == skein_bracket(&d), format!("{f} differs from skein oracle"))?;
        shipped += 1;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut random = 0;
    while random < 200 {
        let mut d = random_braid(&mut rng, 1..=4, 6).closure();
        if rng.random_bool(0.5) {
            let sites = enumerate_sites(&d);
            if let Some(m) = sites.choose(&mut rng) {
                let next = apply_reidemeister(&d, m).unwrap();
                if next.crossing_count() <= 6 {
                    d = next;
                }
            }
        }
        if rng.random_bool(0.25) {
            d = d.disjoint_union(&LinkDiagram::unlink(1));
        }
        if d.crossing_count() > 6 {
            continue;
        }
        ensure(
            as_poly(&bracket(&d).unwrap()) == skein_bracket(&d),
            format!("random diagram {random} differs from skein oracle"),
        )?;
        random += 1;
    }
    let t = start.elapsed();
    ensure(t < Duration::from_secs(10), format!("took {t:.2?}"))?;
    Ok(format!("{shipped} shipped + {random} random diagrams equal the skein oracle in {t:.2?}"))
}

fn move_invariance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    let mut applied = 0;
    while applied < 500 {
        let mut d = random_braid(&mut rng, 2..=4, 6).closure();
        let want = normalized_invariant(&d).unwrap();
        for _ in 0..10 {
            let sites: Vec<Move> = enumerate_sites(&d)
                .into_iter()
                .filter(|m| match m {
                    Move::R1Add { .. } => d.crossing_count() < 10,
                    Move::R2Add { .. } => d.crossing_count() + 2 <= 10,
                    _ => true,
                })
                .collect();
            // favour R3 when available so every kind is exercised
            let r3: Vec<&Move> = sites.iter().filter(|m| matches!(m, Move::R3 { .. })).collect();
            let m = if !r3.is_empty() && rng.random_bool(0.3) {
                (*r3.choose(&mut rng).unwrap()).clone()
            } else {
                match sites.choose(&mut rng) {
                    Some(m) => m.clone(),
                    None => break,
                }
            };
            let next = apply_reidemeister(&d, &m).unwrap();
            ensure(next.crossing_count() <= 10, "move exceeded 10 crossings")?;
            ensure(normalized_invariant(&next).unwrap() == want, format!("invariant changed under {m:?}"))?;
            let dw = next.writhe() - d.writhe();
            let (b0, b1) = (bracket(&d).unwrap(), bracket(&next).unwrap());
            let kind = match m {
                Move::R1Add { .. } | Move::R1Remove { .. } => {
                    ensure(dw.abs() == 1, "R1 did not change the writhe by one")?;
                    ensure(b1 == LaurentPoly::minus_a_cubed_pow(dw) * b0, format!("R1 factor wrong under {m:?}"))?;
                    "R1"
                }
                Move::R2Add { .. } | Move::R2Remove { .. } => {
                    ensure(b1 == b0, format!("bracket changed under {m:?}"))?;
                    "R2"
                }
                Move::R3 { .. } => {
                    ensure(b1 == b0, format!("bracket changed under {m:?}"))?;
                    "R3"
                }
            };
            *counts.entry(kind).or_default() += 1;
            applied += 1;
            d = next;
            if applied == 500 {
                break;
            }
        }
    }
    ensure(counts.len() == 3, format!("not every move kind applied: {counts:?}"))?;
    Ok(format!("{applied} moves ({counts:?}) kept the invariant; R1 scaled the bracket by -A^(±3)"))
}

fn link_claims() -> Outcome {
    let hopf = cli(&["link", "pattern", &data("hopf.pd")])?;
    ensure(hopf["full_linked"] == true, "Hopf link not linked")?;
    ensure(hopf["remainder_linked"] == serde_json::json!([false, false]), "Hopf cut not unlinked")?;
    let borr = cli(&["link", "pattern", &data("borromean.pd")])?;
    ensure(
        borr["full_linked"] == true && borr["remainder_linked"] == serde_json::json!([false, false, false]),
        "Borromean pattern wrong",
    )?;
    let verdict = cli(&["link", "brunnian", &data("borromean.pd")])?;
    ensure(verdict["verdict"] == "brunnian", "Borromean not brunnian")?;
    let l = cli(&["link", "pattern", &data("link_l.pd")])?;
    ensure(
        l["remainder_linked"] == serde_json::json!([true, false, false]),
        format!("link L cut pattern {}", l["remainder_linked"]),
    )?;
    Ok("Hopf (linked; cut unlinked), Borromean brunnian, L cuts (linked, unlinked, unlinked)".into())
}

fn row_flags(pattern: &Value) -> Vec<[bool; 2]> {
    pattern
        .as_array()
        .unwrap()
        .iter()
        .map(|r| {
            let b = &r["branches"];
            [b[0]["residual_entangled"] == true, b[1]["residual_entangled"] == true]
        })
        .collect()
}

fn state_claims() -> Outcome {
    let ghz = cli(&["state", "pattern", &data("ghz3.state")])?;
    ensure(row_flags(&ghz["rows"]).iter().all(|f| *f == [false, false]), "GHZ(3) not all unentangled")?;
    let changed = cli(&["state", "basis-change", &data("ghz3.state"), "--qubit", "0", "--matrix", "1,1;1,-1", "--pattern"])?;
    let flags = row_flags(&changed["pattern"]);
    ensure(
        flags == vec![[true, true], [false, false], [false, false]],
        format!("basis-changed GHZ flags {flags:?}"),
    )?;
    let mut probs = Vec::new();
    for (bit, entangled) in [("0", false), ("1", true)] {
        let p = cli(&["state", "project", &data("mixed_pattern.state"), "--qubit", "0", "--bit", bit])?;
        let prob = p["probability"].as_f64().unwrap();
        ensure((prob - 0.5).abs() <= 1e-9, format!("outcome {bit} probability {prob}"))?;
        ensure(p["residual_entangled"] == entangled, format!("outcome {bit} residual flag"))?;
        probs.push(prob);
    }
    Ok(format!(
        "GHZ(3) unentangled; basis-changed GHZ (entangled, unentangled, unentangled); mixed state qubit 0 {probs:?} (unentangled, entangled)"
    ))
}

fn aravind_matches() -> Outcome {
    let a = cli(&["link", "match", &data("borromean.pd"), &data("ghz3.state")])?;
    let b = cli(&["link", "match", &data("link_l.pd"), &data("ghz3_hadamard.state")])?;
    let c = cli(&["link", "match", &data("probabilistic_borromean.problink"), &data("mixed_pattern.state")])?;
    let mut failures = Vec::new();
    if a["full_match"] != true {
        failures.push("GHZ(3)/Borromean".to_string());
    }
    if b["full_match"] != true {
        failures.push("basis-changed GHZ/L".to_string());
    }
    if c["full_match"] != true {
        let rows: Vec<String> = c["entries"]
            .as_array()
            .unwrap()
            .iter()
            .filter(|e| e["matched"] != true)
            .map(|e| {
                format!(
                    "qubit {} entangled with p={} but component {} cuts linked with p={}",
                    e["qubit"], e["entangled_probability"], e["component"], e["linked_probability"]
                )
            })
            .collect();
        failures.push(format!("probabilistic Borromean/mixed state: {}", rows.join("; ")));
    }
    if failures.is_empty() {
        Ok("GHZ(3)/Borromean, basis-changed GHZ/L and probabilistic Borromean/mixed state all match".into())
    } else {
        Err(format!("no full match for {}", failures.join(", ")))
    }
}

fn quantum_sampling() -> Outcome {
    let start = Instant::now();
    let f = knotwork::knot::parse_flat(&read("flat_trefoil.pd")).unwrap();
    let q = QuantumKnot::from_flat_uniform(&f).unwrap();
    let n: u64 = 100_000;
    let mut counts: BTreeMap<KnotClassKey, u64> = BTreeMap::new();
    for seed in 0..n {
        *counts.entry(q.measure(seed).unwrap().key).or_default() += 1;
    }
    let t = start.elapsed();
    let want: BTreeMap<&str, f64> = BTreeMap::from([("unknot", 0.75), ("trefoil_L", 0.125), ("trefoil_R", 0.125)]);
    let dist = q.outcome_distribution();
    ensure(dist.len() == 3, format!("{} outcome classes", dist.len()))?;
    let mut chi2 = 0.0;
    let mut parts = Vec::new();
    for (k, p) in &dist {
        let name = k.to_string();
        let w = *want.get(name.as_str()).ok_or(format!("unexpected class {name}"))?;
        ensure((p - w).abs() < 1e-12, format!("{name} exact probability {p}"))?;
        let got = *counts.get(k).unwrap_or(&0) as f64;
        let mean = n as f64 * w;
        let sd = (n as f64 * w * (1.0 - w)).sqrt();
        ensure((got - mean).abs() <= 3.0 * sd, format!("{name}: {got} outside {mean} ± 3·{sd:.1}"))?;
        chi2 += (got - mean).powi(2) / mean;
        parts.push(format!("{name} {:.4}", got / n as f64));
    }
    let pval = ChiSquared::new(2.0).unwrap().sf(chi2);
    ensure(pval > 0.001, format!("chi-square p = {pval:.2e}"))?;
    ensure(t < Duration::from_secs(5), format!("sampling took {t:.2?}"))?;
    Ok(format!("{n} samples: {}; chi-square p = {pval:.3}; {t:.2?}", parts.join(", ")))
}

fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect()
}

fn insertion_identities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for d in [2usize, 3, 4] {
        for _ in 0..100 {
            let m = TensorNode::new(vec![d, d], random_vec(&mut rng, d * d)).unwrap();
            let (a, b) = (KetVector(random_vec(&mut rng, d)), KetVector(random_vec(&mut rng, d)));
            let amp: Complex64 = (0..d * d)
                .map(|k| a.0[k / d].conj() * m.entries[k] * b.0[k % d])
                .sum();
            let g = trace_network(&m)
                .unwrap()
                .insert_ketbra(0, &DensityInsertion::for_amplitude(&a, &b))
                .unwrap();
            let tr = contract(&g).unwrap().scalar().unwrap();
            let doubled = contract(&g.double().unwrap()).unwrap().scalar().unwrap();
            let e1 = (tr - amp).norm();
            let e2 = (doubled - Complex64::new(amp.norm_sqr(), 0.0)).norm();
            worst = worst.max(e1).max(e2);
            ensure(e1 <= 1e-9, format!("d={d}: tr(ρM) off by {e1:.2e}"))?;
            ensure(e2 <= 1e-9, format!("d={d}: doubling off by {e2:.2e}"))?;
        }
    }
    Ok(format!("300 trials over d = 2, 3, 4; worst deviation {worst:.1e}"))
}

/// One random braid-relation rewrite that keeps the braid element.
fn rewrite(w: &BraidWord, rng: &mut ChaCha8Rng) -> (BraidWord, &'static str) {
    let n = w.strand_count();
    let mut ls = w.letters().to_vec();
    let r3_sites: Vec<usize> = (0..ls.len().saturating_sub(2))
        .filter(|&p| {
            let (x, y, z) = (ls[p], ls[p + 1], ls[p + 2]);
            x == z && x.exponent == y.exponent && x.index.abs_diff(y.index) == 1
        })
        .collect();
    let r2_sites: Vec<usize> = (0..ls.len().saturating_sub(1))
        .filter(|&p| ls[p + 1] == ls[p].inverse())
        .collect();
    match rng.random_range(0..4) {
        0 if !r3_sites.is_empty() => {
            let p = *r3_sites.choose(rng).unwrap();
            let (x, y) = (ls[p], ls[p + 1]);
            ls.splice(p..p + 3, [y, x, y]);
            (BraidWord::new(n, ls).unwrap(), "R3")
        }
        1 if n >= 3 => {
            // insert both sides of a braid relation at one position
            let i = rng.random_range(1..n - 1);
            let e = if rng.random_bool(0.5) { 1 } else { -1 };
            let p = rng.random_range(0..=ls.len());
            let (x, y) = (BraidLetter::new(i, e), BraidLetter::new(i + 1, e));
            ls.splice(p..p, [x, y, x, y.inverse(), x.inverse(), y.inverse()]);
            (BraidWord::new(n, ls).unwrap(), "R3")
        }
        2 if !r2_sites.is_empty() => {
            let p = *r2_sites.choose(rng).unwrap();
            ls.drain(p..p + 2);
            (BraidWord::new(n, ls).unwrap(), "R2")
        }
        _ => {
            let x = BraidLetter::new(rng.random_range(1..n), if rng.random_bool(0.5) { 1 } else { -1 });
            let p = rng.random_range(0..=ls.len());
            ls.splice(p..p, [x, x.inverse()]);
            (BraidWord::new(n, ls).unwrap(), "R2")
        }
    }
}

fn yang_baxter_stack() -> Outcome {
    let r = CrossingTensor::bell().unwrap();
    ensure(r.is_unitary(1e-12), "default R not unitary at 1e-12")?;
    ensure(r.check_yang_baxter(1e-12), "default R fails YBE at 1e-12")?;
    let eval = |w: &BraidWord| contract(&link_to_network(w, &r).unwrap().graph).unwrap().scalar().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    let mut completeness = 0;
    for t in 0..100 {
        let w = random_braid(&mut rng, 2..=4, 10);
        let base = eval(&w);
        let mut cur = w.clone();
        for _ in 0..4 {
            let (next, kind) = rewrite(&cur, &mut rng);
            let v = eval(&next);
            ensure(
                (v - base).norm() <= 1e-9 * base.norm().max(1.0),
                format!("word {t} ({w}): {kind} rewrite changed {base} to {v}"),
            )?;
            *counts.entry(kind).or_default() += 1;
            cur = next;
        }
        let ln = link_to_network(&w, &r).unwrap();
        for &e in &ln.closure_edges {
            let total: Complex64 = (0..2)
                .map(|a| {
                    let g = ln.graph.insert_ketbra(e, &basis_insertion(2, a, a).unwrap()).unwrap();
                    contract(&g).unwrap().scalar().unwrap()
                })
                .sum();
            ensure(
                (total - base).norm() <= 1e-9 * base.norm().max(1.0),
                format!("word {t}: completeness sum {total} vs {base}"),
            )?;
            completeness += 1;
        }
    }
    Ok(format!(
        "R unitary and YBE at 1e-12; 100 words with rewrites {counts:?} unchanged; {completeness} completeness sums match"
    ))
}

fn brunnian_template() -> Outcome {
    let out = cli(&["link", "template", "--braid", &data("borromean.braid")])?;
    let word = parse_braid(out["output"].as_str().unwrap()).map_err(|e| e.to_string())?;
    ensure(word.strand_count() == 4, format!("{} strands", word.strand_count()))?;
    let closure = word.closure();
    ensure(closure.component_count() == 4, format!("{} components", closure.component_count()))?;
    let v = is_brunnian(&closure);
    ensure(v == Brunnian::Brunnian, format!("template output is {v:?}"))?;
    Ok(format!("{word} is brunnian"))
}

fn performance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut diagrams = Vec::new();
    for n in [2usize, 3, 4, 5, 6] {
        let letters = (0..16)
            .map(|_| BraidLetter::new(rng.random_range(1..n), if rng.random_bool(0.5) { 1 } else { -1 }))
            .collect();
        diagrams.push(BraidWord::new(n, letters).unwrap().closure());
    }
    diagrams.push(parse_braid(&read("borromean.braid")).unwrap().closure().disjoint_union(
        &parse_braid("n=3: s1 s2^-1 s1 s2^-1 s1 s2^-1 s1 s2^-1 s1 s2^-1").unwrap().closure(),
    ));
    let mut serial_worst = Duration::ZERO;
    let mut parallel_worst = Duration::ZERO;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
    for d in &diagrams {
        ensure(d.crossing_count() == 16, format!("{} crossings", d.crossing_count()))?;
        let cfg = BracketConfig::default();
        let start = Instant::now();
        let s = bracket_with(d, &cfg.serial()).unwrap();
        serial_worst = serial_worst.max(start.elapsed());
        let start = Instant::now();
        let p = pool.install(|| bracket_with(d, &cfg)).unwrap();
        parallel_worst = parallel_worst.max(start.elapsed());
        ensure(s == p, "serial and parallel brackets differ")?;
    }
    let mut net_worst = Duration::ZERO;
    for f in ["borromean_network.json", "trace_diag.json", "matrix_chain.json", "amplitude.json"] {
        let g = NetworkGraph::from_json(&read(f)).unwrap();
        let start = Instant::now();
        contract(&g).unwrap();
        net_worst = net_worst.max(start.elapsed());
    }
    ensure(serial_worst < Duration::from_secs(5), format!("serial bracket took {serial_worst:.2?}"))?;
    ensure(parallel_worst < Duration::from_secs(2), format!("4-thread bracket took {parallel_worst:.2?}"))?;
    ensure(net_worst < Duration::from_secs(1), format!("network contraction took {net_worst:.2?}"))?;
    Ok(format!(
        "16-crossing bracket worst {serial_worst:.2?} serial, {parallel_worst:.2?} on 4 threads; shipped networks worst {net_worst:.2?}"
    ))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("bracket correctness", bracket_correctness),
        ("move invariance", move_invariance),
        ("link pattern claims", link_claims),
        ("state pattern claims", state_claims),
        ("link/state matches", aravind_matches),
        ("quantum knot sampling", quantum_sampling),
        ("insertion identities", insertion_identities),
        ("Yang-Baxter stack", yang_baxter_stack),
        ("Brunnian template", brunnian_template),
        ("performance envelope", performance),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match result {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail}", i + 1);
            }
        }
    }
    println!("{} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
