use knotwork::bracket::{self, bracket_by_contraction};
use knotwork::entangle::{
    apply_local_basis_change, bit_string, entanglement_pattern, fmt_sig, is_fully_product, is_unitary, parse_matrix,
    parse_state, project_qubit, PatternRow, PureState,
};
use knotwork::knot::{apply_reidemeister, enumerate_sites, parse_flat, to_pd_string, LinkDiagram};
use knotwork::link_pattern::{
    aravind_match_with, brunnian_template, cut_distribution_with, cut_probabilistic, is_brunnian_with,
    link_pattern_with, parse_problink, Brunnian, LinkPattern, ProbabilisticLink,
};
use knotwork::quantum::{internal_state_expansion, QuantumKnot, TermJson, RNG_ALGORITHM};
use knotwork::tensor::{
    basis_insertion, contract, link_to_network, measure_component, BraVector, CrossingTensor, KetVector, NetworkGraph,
    Tensor,
};
use knotwork::LaurentPoly;
use num_complex::Complex64;
use serde_json::{json, Value};

use crate::format::{complex, complex_json, table};
use crate::input::{self, at, CliError};
use crate::{Ctx, Report};

type Out = Result<Report, CliError>;

fn core<T>(r: knotwork::Result<T>) -> Result<T, CliError> {
    r.map_err(|e| CliError::from_core("<input>", "", e))
}

fn bracket_of(ctx: &Ctx, d: &LinkDiagram) -> Result<(LaurentPoly, &'static str), CliError> {
    match bracket::bracket_with(d, &ctx.bracket) {
        Ok(b) => Ok((b, "state-sum")),
        Err(e) if e.is_cap_overflow() && ctx.pattern.allow_contraction => Ok((bracket_by_contraction(d), "sweep")),
        Err(e) => Err(CliError::from_core("<input>", "", e)),
    }
}

fn matrix_text(m: &[Vec<i32>]) -> String {
    m.iter()
        .map(|r| {
            let cells: Vec<String> = r.iter().map(|x| format!("{x:>3}")).collect();
            format!("  {}\n", cells.join(" "))
        })
        .collect()
}

pub fn knot_parse(_ctx: &mut Ctx, input: &str) -> Out {
    let d = input::diagram(input)?;
    let lk = core(d.linking_matrix())?;
    let pd = to_pd_string(&d);
    let text = format!(
        "pd: {pd}\ncomponents: {}\ncrossings: {}\nfree loops: {}\nwrithe: {}\nlinking matrix:\n{}",
        d.component_count(),
        d.crossing_count(),
        d.free_loops().len(),
        d.writhe(),
        matrix_text(&lk)
    );
    Ok(Report {
        text,
        json: json!({
            "pd": pd,
            "components": d.component_count(),
            "crossings": d.crossing_count(),
            "free_loops": d.free_loops().len(),
            "writhe": d.writhe(),
            "linking_matrix": lk,
            "diagram": d,
        }),
    })
}

pub fn knot_bracket(ctx: &mut Ctx, input: &str, normalized: bool) -> Out {
    let d = input::diagram(input)?;
    let (mut b, engine) = bracket_of(ctx, &d)?;
    if normalized {
        b = LaurentPoly::minus_a_cubed_pow(-d.writhe()) * b;
    }
    Ok(Report {
        text: b.to_string(),
        json: json!({
            "polynomial": b.to_string(),
            "terms": b,
            "normalized": normalized,
            "writhe": d.writhe(),
            "engine": engine,
        }),
    })
}

pub fn knot_jones(ctx: &mut Ctx, input: &str) -> Out {
    let d = input::diagram(input)?;
    let (b, _) = bracket_of(ctx, &d)?;
    let f = LaurentPoly::minus_a_cubed_pow(-d.writhe()) * b;
    let jones = f.to_jones_string();
    Ok(Report {
        text: jones.clone(),
        json: json!({ "jones": jones, "normalized_bracket": f.to_string() }),
    })
}

pub fn knot_moves(ctx: &mut Ctx, input: &str, apply: Option<usize>) -> Out {
    let d = input::diagram(input)?;
    let sites = enumerate_sites(&d);
    match apply {
        None => {
            let rows: Vec<Vec<String>> = sites
                .iter()
                .enumerate()
                .map(|(i, m)| vec![i.to_string(), m.kind().to_string(), serde_json::to_string(m).unwrap()])
                .collect();
            Ok(Report {
                text: table(&["index", "kind", "move"], &rows),
                json: json!({ "sites": sites }),
            })
        }
        Some(k) => {
            let mv = sites
                .get(k)
                .ok_or_else(|| CliError::invalid(input, format!("no move site {k}; {} sites", sites.len())))?;
            let out = core(apply_reidemeister(&d, mv))?;
            let before = LaurentPoly::minus_a_cubed_pow(-d.writhe()) * bracket_of(ctx, &d)?.0;
            let after = LaurentPoly::minus_a_cubed_pow(-out.writhe()) * bracket_of(ctx, &out)?.0;
            let pd = to_pd_string(&out);
            Ok(Report {
                text: format!(
                    "{pd}\n# {} applied; normalized invariant {}\n",
                    mv.kind(),
                    if before == after { "unchanged" } else { "CHANGED" }
                ),
                json: json!({
                    "move": mv,
                    "pd": pd,
                    "diagram": out,
                    "invariant_unchanged": before == after,
                }),
            })
        }
    }
}

fn load_qknot(ctx: &Ctx, flat: Option<String>, input: Option<String>) -> Result<QuantumKnot, CliError> {
    match (flat, input) {
        (Some(path), None) => {
            let text = input::read(&path)?;
            let f = at(&path, &text, parse_flat(&text))?;
            let one = Complex64::new(1.0, 0.0);
            at(&path, &text, QuantumKnot::from_flat_diagram(&f, |_| one, &ctx.bracket))
        }
        (None, Some(path)) => {
            let text = input::read(&path)?;
            let terms: Vec<TermJson> = serde_json::from_str::<Value>(&text)
                .ok()
                .and_then(|v| {
                    let t = v.get("terms").cloned().unwrap_or(v);
                    serde_json::from_value(t).ok()
                })
                .ok_or_else(|| CliError::invalid(&path, "expected quantum knot JSON (a list of terms)"))?;
            at(&path, &text, QuantumKnot::from_json(&terms))
        }
        _ => Err(CliError::invalid("<arguments>", "give exactly one of --flat <file> or a quantum knot JSON file")),
    }
}

fn class_name(k: &knotwork::quantum::KnotClassKey) -> String {
    k.to_string()
}

pub fn qknot_resolve(ctx: &mut Ctx, flat: Option<String>, input: Option<String>) -> Out {
    let q = load_qknot(ctx, flat, input)?;
    let rows: Vec<Vec<String>> = q
        .terms()
        .iter()
        .map(|(k, t)| {
            vec![
                class_name(k),
                complex(t.amplitude),
                fmt_sig(t.amplitude.norm_sqr()),
                to_pd_string(&t.representative),
            ]
        })
        .collect();
    Ok(Report {
        text: table(&["class", "amplitude", "probability", "representative"], &rows),
        json: json!({ "terms": q.to_json() }),
    })
}

pub fn qknot_dist(ctx: &mut Ctx, flat: Option<String>, input: Option<String>) -> Out {
    let q = load_qknot(ctx, flat, input)?;
    let dist = q.outcome_distribution();
    let rows: Vec<Vec<String>> = dist.iter().map(|(k, p)| vec![class_name(k), fmt_sig(*p)]).collect();
    let map: serde_json::Map<String, Value> = dist.iter().map(|(k, p)| (class_name(k), json!(p))).collect();
    Ok(Report {
        text: table(&["class", "probability"], &rows),
        json: Value::Object(map),
    })
}

pub fn qknot_measure(ctx: &mut Ctx, flat: Option<String>, input: Option<String>, seed: u64) -> Out {
    let q = load_qknot(ctx, flat, input)?;
    let m = core(q.measure(seed))?;
    Ok(Report {
        text: format!(
            "class: {}\nprobability: {}\nseed: {seed}\nrng: {RNG_ALGORITHM}\n",
            class_name(&m.key),
            fmt_sig(m.probability)
        ),
        json: json!({
            "class": class_name(&m.key),
            "probability": m.probability,
            "seed": seed,
            "rng": RNG_ALGORITHM,
            "collapsed": m.collapsed.to_json(),
        }),
    })
}

pub fn qknot_expand(ctx: &mut Ctx, input: &str) -> Out {
    let d = input::diagram(input)?;
    if d.crossing_count() > ctx.bracket.cap.min(62) {
        return Err(CliError::Cap(format!(
            "crossing count {} exceeds cap {}",
            d.crossing_count(),
            ctx.bracket.cap
        )));
    }
    let states = core(internal_state_expansion(&d))?;
    let total: LaurentPoly = states.iter().map(|(_, w)| w.clone()).sum();
    let rows: Vec<Vec<String>> = states
        .iter()
        .map(|(s, w)| {
            vec![
                s.label(),
                s.a_count().to_string(),
                s.b_count().to_string(),
                s.loop_count.to_string(),
                w.to_string(),
            ]
        })
        .collect();
    let mut text = table(&["state", "A", "B", "loops", "weight"], &rows);
    text.push_str(&format!("sum: {total}\n"));
    Ok(Report {
        text,
        json: json!({
            "states": states.iter().map(|(s, w)| json!({
                "state": s.label(),
                "a": s.a_count(),
                "b": s.b_count(),
                "loops": s.loop_count,
                "weight": w.to_string(),
            })).collect::<Vec<_>>(),
            "bracket": total.to_string(),
        }),
    })
}

/// A state file, rescaled to unit norm when needed.
fn load_state(ctx: &mut Ctx, path: &str) -> Result<PureState, CliError> {
    let text = input::read(path)?;
    let s = at(path, &text, parse_state(&text))?;
    if s.is_normalized() {
        return Ok(s);
    }
    ctx.notes.push(format!("{path}: state rescaled to unit norm"));
    at(path, &text, s.normalized())
}

fn entangled_word(flag: Option<bool>) -> &'static str {
    match flag {
        Some(true) => "entangled",
        Some(false) => "unentangled",
        None => "undefined",
    }
}

fn pattern_report(rows: &[PatternRow]) -> Report {
    let table_rows: Vec<Vec<String>> = rows
        .iter()
        .flat_map(|r| {
            r.branches.iter().map(move |b| {
                let mut flag = entangled_word(b.residual_entangled).to_string();
                if b.near_threshold {
                    flag.push_str(" (near threshold)");
                }
                vec![r.qubit.to_string(), b.outcome.to_string(), fmt_sig(b.probability), flag]
            })
        })
        .collect();
    Report {
        text: table(&["qubit", "outcome", "probability", "residual"], &table_rows),
        json: json!({ "rows": rows }),
    }
}

pub fn state_pattern(ctx: &mut Ctx, input: &str) -> Out {
    let s = load_state(ctx, input)?;
    let rows = core(entanglement_pattern(&s))?;
    Ok(pattern_report(&rows))
}

pub fn state_project(ctx: &mut Ctx, input: &str, qubit: usize, bit: u8) -> Out {
    let s = load_state(ctx, input)?;
    let b = core(project_qubit(&s, qubit, bit))?;
    let entangled = b.residual.as_ref().map(|r| !is_fully_product(r));
    let residual_text = b.residual.as_ref().map_or("undefined".to_string(), |r| r.to_string());
    Ok(Report {
        text: format!(
            "probability: {}\nresidual: {residual_text}\nresidual state: {}\n",
            fmt_sig(b.probability),
            entangled_word(entangled)
        ),
        json: json!({
            "qubit": qubit,
            "outcome": bit,
            "probability": b.probability,
            "residual": b.residual.as_ref().map(state_json),
            "residual_entangled": entangled,
        }),
    })
}

fn state_json(s: &PureState) -> Value {
    let amps: Vec<Value> = s
        .amplitudes()
        .iter()
        .enumerate()
        .filter(|(_, a)| a.norm() != 0.0)
        .map(|(i, a)| json!([bit_string(i, s.qubit_count()), a.re, a.im]))
        .collect();
    json!({ "qubits": s.qubit_count(), "amplitudes": amps, "normalized": s.is_normalized() })
}

pub fn state_basis_change(_ctx: &mut Ctx, input: &str, qubit: usize, matrix: &str, pattern: bool) -> Out {
    let text = input::read(input)?;
    let s = at(input, &text, parse_state(&text))?;
    let m = at("<matrix>", matrix, parse_matrix(matrix))?;
    let out = core(apply_local_basis_change(&s, qubit, &m))?;
    let unitary = is_unitary(&m, 1e-12);
    let mut body = String::new();
    if !out.is_normalized() {
        body.push_str("# unnormalized\n");
    }
    body.push_str(&out.to_text());
    let mut j = state_json(&out);
    j["matrix_unitary"] = json!(unitary);
    if pattern {
        let rows = core(entanglement_pattern(&core(out.normalized())?))?;
        let r = pattern_report(&rows);
        body.push('\n');
        body.push_str(&r.text);
        j["pattern"] = r.json["rows"].clone();
    }
    Ok(Report { text: body, json: j })
}

fn linked_word(b: bool) -> &'static str {
    if b {
        "linked"
    } else {
        "unlinked"
    }
}

fn pattern_text(p: &LinkPattern) -> String {
    let mut s = format!(
        "components: {}\nlink: {}\n",
        p.component_count,
        linked_word(p.full_linked)
    );
    for (c, &l) in p.remainder_linked.iter().enumerate() {
        s.push_str(&format!("cut {c}: {}\n", linked_word(l)));
    }
    s.push_str("linking matrix:\n");
    s.push_str(&matrix_text(&p.linking_matrix));
    s
}

fn has_influences(text: &str) -> bool {
    text.lines()
        .any(|l| l.split('#').next().unwrap_or("").trim_start().starts_with("influence"))
}

/// A link file; probabilistic links yield their base diagram too.
fn load_link(path: &str) -> Result<(LinkDiagram, Option<ProbabilisticLink>), CliError> {
    let text = input::read(path)?;
    if has_influences(&text) {
        let p = at(path, &text, parse_problink(&text))?;
        Ok((p.base().clone(), Some(p)))
    } else {
        Ok((input::diagram(path)?, None))
    }
}

pub fn link_pattern(ctx: &mut Ctx, input: &str) -> Out {
    let (d, _) = load_link(input)?;
    let p = at(input, "", link_pattern_with(&d, &ctx.pattern))?;
    Ok(Report {
        text: pattern_text(&p),
        json: serde_json::to_value(&p).unwrap(),
    })
}

pub fn link_brunnian(ctx: &mut Ctx, input: &str) -> Out {
    let (d, _) = load_link(input)?;
    let v = is_brunnian_with(&d, &ctx.pattern);
    let word = match v {
        Brunnian::Brunnian => "brunnian",
        Brunnian::NotBrunnian => "not brunnian",
        Brunnian::Indeterminate => "indeterminate",
    };
    Ok(Report {
        text: word.to_string(),
        json: json!({ "verdict": v, "components": d.component_count(), "crossings": d.crossing_count() }),
    })
}

pub fn link_template(ctx: &mut Ctx, braid: &str) -> Out {
    let b = input::braid(braid)?;
    let out = core(brunnian_template(&b, &ctx.pattern))?;
    Ok(Report {
        text: out.to_string(),
        json: json!({
            "input": b.to_string(),
            "output": out.to_string(),
            "strands": out.strand_count(),
            "crossings": out.len(),
            "brunnian": true,
        }),
    })
}

pub fn link_cutprob(ctx: &mut Ctx, input: &str, component: usize, seed: u64) -> Out {
    let text = input::read(input)?;
    let p = at(input, &text, parse_problink(&text))?;
    let rem = core(cut_probabilistic(&p, component, seed))?;
    let dist = core(cut_distribution_with(&p, component, &ctx.pattern))?;
    let linked = match rem.component_count() {
        0 | 1 => false,
        _ => !core(
            bracket::is_bracket_trivial_with(&rem, &ctx.bracket)
                .or_else(|e| if e.is_cap_overflow() && ctx.pattern.allow_contraction {
                    let v = LaurentPoly::minus_a_cubed_pow(-rem.writhe()) * bracket_by_contraction(&rem);
                    Ok(v == bracket::unlink_value(rem.component_count()))
                } else {
                    Err(e)
                }),
        )?,
    };
    let switched = p.influences().contains_key(&component) && {
        let plain = core(p.base().delete_component(component))?;
        plain != rem
    };
    Ok(Report {
        text: format!(
            "switched: {}\nremainder linked: {}\ndistribution: linked {}, unlinked {}\nseed: {seed}\nrng: {RNG_ALGORITHM}\nremainder:\n{}",
            if switched { "yes" } else { "no" },
            if linked { "yes" } else { "no" },
            fmt_sig(dist.linked),
            fmt_sig(dist.unlinked),
            indent(&to_pd_string(&rem)),
        ),
        json: json!({
            "component": component,
            "seed": seed,
            "rng": RNG_ALGORITHM,
            "switched": switched,
            "remainder": to_pd_string(&rem),
            "remainder_linked": linked,
            "distribution": { "linked": dist.linked, "unlinked": dist.unlinked },
        }),
    })
}

pub fn link_match(ctx: &mut Ctx, link: &str, state: &str, search: bool) -> Out {
    let (d, prob) = load_link(link)?;
    let p = at(link, "", link_pattern_with(&d, &ctx.pattern))?;
    let s = load_state(ctx, state)?;
    let rows = core(entanglement_pattern(&s))?;
    let r = core(aravind_match_with(&p, &rows, prob.as_ref(), search, &ctx.pattern))?;
    let table_rows: Vec<Vec<String>> = r
        .entries
        .iter()
        .map(|e| {
            vec![
                e.component.to_string(),
                e.qubit.to_string(),
                fmt_sig(e.linked_probability),
                fmt_sig(e.entangled_probability),
                if e.matched { "yes" } else { "no" }.to_string(),
            ]
        })
        .collect();
    let mut text = table(&["component", "qubit", "P(linked)", "P(entangled)", "match"], &table_rows);
    text.push_str(&format!(
        "full match: {}\nnote: {}\n",
        if r.full_match { "yes" } else { "no" },
        r.note
    ));
    Ok(Report {
        text,
        json: serde_json::to_value(&r).unwrap(),
    })
}

fn load_network(path: &str) -> Result<NetworkGraph, CliError> {
    let text = input::read(path)?;
    at(path, &text, NetworkGraph::from_json(&text))
}

fn tensor_report(t: &Tensor) -> (String, Value) {
    if let Some(z) = t.scalar() {
        return (complex(z), json!({ "shape": [], "value": complex_json(z) }));
    }
    let mut text = format!("shape: {:?}\n", t.shape);
    let mut idx = vec![0usize; t.shape.len()];
    for z in &t.entries {
        let label: Vec<String> = idx.iter().map(|i| i.to_string()).collect();
        text.push_str(&format!("[{}] {}\n", label.join(","), complex(*z)));
        for k in (0..idx.len()).rev() {
            idx[k] += 1;
            if idx[k] < t.shape[k] {
                break;
            }
            idx[k] = 0;
        }
    }
    let entries: Vec<Value> = t.entries.iter().map(|&z| complex_json(z)).collect();
    (text, json!({ "shape": t.shape, "entries": entries }))
}

fn network_value(g: &NetworkGraph) -> Result<Value, CliError> {
    Ok(serde_json::from_str(&g.to_json()).expect("network JSON"))
}

pub fn net_eval(_ctx: &mut Ctx, input: &str) -> Out {
    let g = load_network(input)?;
    let t = at(input, "", contract(&g))?;
    let (text, json) = tensor_report(&t);
    Ok(Report { text, json })
}

fn parse_vector(arg: &str) -> Result<Vec<Complex64>, CliError> {
    arg.split(',')
        .map(|e| {
            knotwork::entangle::parse_complex(e)
                .ok_or_else(|| CliError::invalid("<vector>", format!("bad entry `{}`", e.trim())))
        })
        .collect()
}

pub fn net_cut(_ctx: &mut Ctx, input: &str, edge: usize, ket: Option<&str>, bra: Option<&str>) -> Out {
    let g = load_network(input)?;
    let mut g = at(input, "", g.cut_edge(edge))?;
    let n = g.free_ends().len();
    if let Some(k) = ket {
        g = at(input, "", g.insert_ket(n - 1, &KetVector(parse_vector(k)?)))?;
    }
    if let Some(b) = bra {
        let a = KetVector(parse_vector(b)?);
        let bv: BraVector = a.dual();
        g = at(input, "", g.insert_bra(n - 2, &bv))?;
    }
    let t = at(input, "", contract(&g))?;
    let (text, value) = tensor_report(&t);
    Ok(Report {
        text,
        json: json!({ "tensor": value, "network": network_value(&g)? }),
    })
}

pub fn net_double(_ctx: &mut Ctx, input: &str) -> Out {
    let g = load_network(input)?;
    let single = at(input, "", contract(&g))?;
    let dg = at(input, "", g.double())?;
    let t = at(input, "", contract(&dg))?;
    let (text, value) = tensor_report(&t);
    let amp = single.scalar().unwrap_or_default();
    Ok(Report {
        text: format!("{}\namplitude: {}\n", text.trim_end(), complex(amp)),
        json: json!({ "tensor": value, "amplitude": complex_json(amp), "network": network_value(&dg)? }),
    })
}

fn crossing_tensor(spec: &str) -> Result<CrossingTensor, CliError> {
    match spec {
        "default" | "bell" => CrossingTensor::bell().map_err(|e| CliError::invalid("<r>", e.to_string())),
        "swap" => Ok(CrossingTensor::swap(2)),
        "identity" => Ok(CrossingTensor::identity(2)),
        path => {
            let text = input::read(path)?;
            let rows: Vec<Vec<[f64; 2]>> = serde_json::from_str(&text)
                .map_err(|e| CliError::invalid(path, format!("expected rows of [re, im]: {e}")))?;
            let rows: Vec<Vec<Complex64>> = rows
                .into_iter()
                .map(|r| r.into_iter().map(|[re, im]| Complex64::new(re, im)).collect())
                .collect();
            at(path, &text, CrossingTensor::from_rows(&rows))
        }
    }
}

pub fn net_from_braid(_ctx: &mut Ctx, word: &str, r: &str) -> Out {
    let b = input::braid(word)?;
    let r = crossing_tensor(r)?;
    let ln = core(link_to_network(&b, &r))?;
    Ok(Report {
        text: ln.graph.to_json(),
        json: network_value(&ln.graph)?,
    })
}

pub fn net_measure(_ctx: &mut Ctx, word: &str, component: usize, a: usize, b: usize, r: &str) -> Out {
    let w = input::braid(word)?;
    let r = crossing_tensor(r)?;
    let ln = core(link_to_network(&w, &r))?;
    let rho = core(basis_insertion(r.dimension(), a, b))?;
    let m = core(measure_component(&ln, component, &rho))?;
    let deleted = m.deleted.map_or("none".to_string(), complex);
    Ok(Report {
        text: format!(
            "component: {}\nedge: {}\ncut value: {}\nuncut value: {}\ndeleted-component value: {deleted}\n",
            m.component,
            m.edge,
            complex(m.cut),
            complex(m.uncut)
        ),
        json: json!({
            "component": m.component,
            "edge": m.edge,
            "cut": complex_json(m.cut),
            "uncut": complex_json(m.uncut),
            "deleted": m.deleted.map(complex_json),
        }),
    })
}

fn indent(text: &str) -> String {
    text.lines().map(|l| format!("  {l}\n")).collect()
}
