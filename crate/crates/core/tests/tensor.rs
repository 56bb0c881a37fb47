#[path = "../../tests/src/oracle.rs"]
#[allow(dead_code)]
mod oracle;

use knotwork::knot::{parse_braid, BraidLetter, BraidWord};
use knotwork::tensor::{
    basis_insertion, check_yang_baxter, contract, contract_with, link_to_network, matrix_chain_network,
    measure_component, trace_network, ContractConfig, ContractionOrder, CrossingTensor, DensityInsertion,
    KetVector, NetworkGraph, Port, TensorNode,
};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn data(name: &str) -> String {
    std::fs::read_to_string(format!("{}/../../data/{name}", env!("CARGO_MANIFEST_DIR"))).unwrap()
}

fn z(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn random_entries(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|_| z(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect()
}

fn random_matrix(rng: &mut ChaCha8Rng, d: usize) -> TensorNode {
    TensorNode::new(vec![d, d], random_entries(rng, d * d)).unwrap()
}

fn random_ket(rng: &mut ChaCha8Rng, d: usize) -> KetVector {
    KetVector(random_entries(rng, d))
}

/// A random network with every port of dimension `d` and at most `labels`
/// edges plus free ends.
fn random_network(seed: u64, d: usize, labels: usize) -> NetworkGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let count = rng.random_range(1..=5);
        let ranks: Vec<usize> = (0..count).map(|_| rng.random_range(1..=4)).collect();
        let mut ports: Vec<Port> = ranks
            .iter()
            .enumerate()
            .flat_map(|(n, &r)| (0..r).map(move |s| Port::new(n, s)))
            .collect();
        ports.shuffle(&mut rng);
        let free = rng.random_range(0..=ports.len().min(3));
        let free = if (ports.len() - free) % 2 == 1 { free + 1 } else { free };
        if free > ports.len() || (ports.len() - free) / 2 + free > labels {
            continue;
        }
        let ends = ports[..free].to_vec();
        let edges = ports[free..].chunks(2).map(|p| (p[0], p[1])).collect();
        let nodes = ranks
            .iter()
            .map(|&r| TensorNode::new(vec![d; r], random_entries(&mut rng, d.pow(r as u32))).unwrap())
            .collect();
        return NetworkGraph::new(nodes, edges, ends).unwrap();
    }
}

fn close(a: &[Complex64], b: &[Complex64], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).norm() <= tol * (1.0 + y.norm()))
}

fn dense(r: &CrossingTensor) -> nalgebra::DMatrix<Complex64> {
    r.matrix().clone()
}

#[test]
fn shipped_examples() {
    let t = contract(&NetworkGraph::from_json(&data("trace_diag.json")).unwrap()).unwrap();
    assert!((t.scalar().unwrap() - z(8.0, 0.0)).norm() < 1e-12);
    let a = NetworkGraph::from_json(&data("amplitude.json")).unwrap();
    assert!((contract(&a).unwrap().scalar().unwrap() - z(2.0, 0.0)).norm() < 1e-12);
    assert!((contract(&a.double().unwrap()).unwrap().scalar().unwrap() - z(4.0, 0.0)).norm() < 1e-12);
    let chain = NetworkGraph::from_json(&data("matrix_chain.json")).unwrap();
    assert!(close(&contract(&chain).unwrap().entries, &oracle::brute_force_contract(&chain), 1e-12));
}

#[test]
fn trace_and_chain() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let m = random_matrix(&mut rng, 3);
    let tr: Complex64 = (0..3).map(|i| m.entries[i * 3 + i]).sum();
    assert!((contract(&trace_network(&m).unwrap()).unwrap().scalar().unwrap() - tr).norm() < 1e-12);
    let (x, y) = (random_matrix(&mut rng, 3), random_matrix(&mut rng, 3));
    let g = matrix_chain_network(&[x.clone(), y.clone()]).unwrap();
    let out = contract(&g).unwrap();
    assert_eq!(out.shape, vec![3, 3]);
    for i in 0..3 {
        for j in 0..3 {
            let want: Complex64 = (0..3).map(|k| x.entries[i * 3 + k] * y.entries[k * 3 + j]).sum();
            assert!((out.entries[i * 3 + j] - want).norm() < 1e-12);
        }
    }
    assert!(matrix_chain_network(&[x, TensorNode::new(vec![2, 2], vec![z(1.0, 0.0); 4]).unwrap()]).is_err());
}

#[test]
fn cut_then_reconnect() {
    for seed in 0..40 {
        let g = random_network(seed, 2, 10);
        if g.edges().is_empty() {
            continue;
        }
        let want = contract(&g).unwrap();
        let cut = g.cut_edge(0).unwrap();
        let n = cut.free_ends().len();
        let back = cut.reconnect(n - 2, n - 1).unwrap();
        assert!(close(&contract(&back).unwrap().entries, &want.entries, 1e-10));
    }
    let g = trace_network(&TensorNode::new(vec![2, 2], vec![z(1.0, 0.0); 4]).unwrap()).unwrap();
    assert!(g.cut_edge(1).is_err());
    let c = g.cut_edge(0).unwrap();
    assert!(c.reconnect(0, 0).is_err());
    assert!(c.insert_ket(0, &KetVector(vec![z(1.0, 0.0); 3])).is_err());
}

#[test]
fn insertion_identities() {
    for d in [2, 3, 4] {
        let mut rng = ChaCha8Rng::seed_from_u64(d as u64);
        for _ in 0..100 {
            let m = random_matrix(&mut rng, d);
            let (a, b) = (random_ket(&mut rng, d), random_ket(&mut rng, d));
            // ⟨a|M|b⟩
            let amp: Complex64 = (0..d)
                .flat_map(|i| (0..d).map(move |j| (i, j)))
                .map(|(i, j)| a.0[i].conj() * m.entries[i * d + j] * b.0[j])
                .sum();
            let rho = DensityInsertion::for_amplitude(&a, &b);
            let g = trace_network(&m).unwrap().insert_ketbra(0, &rho).unwrap();
            let got = contract(&g).unwrap().scalar().unwrap();
            assert!((got - amp).norm() < 1e-10 * (1.0 + amp.norm()));
            let p = contract(&g.double().unwrap()).unwrap().scalar().unwrap();
            assert!((p - z(amp.norm_sqr(), 0.0)).norm() < 1e-10 * (1.0 + amp.norm_sqr()));
        }
    }
}

#[test]
fn doubling_needs_insertions() {
    let g = trace_network(&TensorNode::new(vec![2, 2], vec![z(1.0, 0.0); 4]).unwrap()).unwrap();
    assert!(g.double().is_err());
    assert!(g.cut_edge(0).unwrap().double().is_err());
}

#[test]
fn crossing_tensors() {
    for d in [2, 3] {
        assert!(check_yang_baxter(&CrossingTensor::identity(d), 1e-12));
        assert!(check_yang_baxter(&CrossingTensor::swap(d), 1e-12));
        assert!(CrossingTensor::swap(d).is_unitary(1e-12));
    }
    let bell = CrossingTensor::bell().unwrap();
    assert!(bell.is_unitary(1e-12) && bell.check_yang_baxter(1e-12));
    let mut rows: Vec<Vec<Complex64>> = (0..4)
        .map(|i| (0..4).map(|j| z(if i == j { 1.0 } else { 0.0 }, 0.0)).collect())
        .collect();
    rows[0][1] = z(0.5, 0.0);
    assert!(CrossingTensor::from_rows(&rows).unwrap().verify(1e-9).is_err());
    let w = parse_braid("n=2: s1").unwrap();
    assert!(link_to_network(&w, &CrossingTensor::from_rows(&rows).unwrap()).is_err());
}

#[test]
fn braid_relations_hold_in_networks() {
    let r = CrossingTensor::bell().unwrap();
    let eval = |w: &str| {
        let ln = link_to_network(&parse_braid(w).unwrap(), &r).unwrap();
        contract(&ln.graph).unwrap().scalar().unwrap()
    };
    let pairs = [
        ("n=3: s1 s1^-1 s2", "n=3: s2"),
        ("n=3: s1 s2 s1 s2^-1", "n=3: s2 s1 s2 s2^-1"),
        ("n=3: s1 s2 s1", "n=3: s2 s1 s2"),
        ("n=4: s1 s3 s2^-1", "n=4: s3 s1 s2^-1"),
    ];
    for (a, b) in pairs {
        assert!((eval(a) - eval(b)).norm() < 1e-10, "{a} vs {b}");
    }
}

#[test]
fn identity_braid_amplitude() {
    let r = CrossingTensor::bell().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for n in 1..=4 {
        let ln = link_to_network(&BraidWord::new(n, vec![]).unwrap(), &r).unwrap();
        let (a, b) = (random_ket(&mut rng, 2), random_ket(&mut rng, 2));
        let inner: Complex64 = a.0.iter().zip(&b.0).map(|(x, y)| x.conj() * y).sum();
        let rho = DensityInsertion::for_amplitude(&a, &b);
        let got = contract(&ln.graph.insert_ketbra(ln.closure_edges[0], &rho).unwrap())
            .unwrap()
            .scalar()
            .unwrap();
        let want = inner * 2f64.powi(n as i32 - 1);
        assert!((got - want).norm() < 1e-12 * (1.0 + want.norm()));
    }
}

#[test]
fn borromean_network() {
    let b = parse_braid(&data("borromean.braid")).unwrap();
    let r = CrossingTensor::bell().unwrap();
    let ln = link_to_network(&b, &r).unwrap();
    let full = contract(&ln.graph).unwrap().scalar().unwrap();
    assert!((full - oracle::dense_braid_trace(&b, &dense(&r), 2)).norm() < 1e-10);
    let shipped = NetworkGraph::from_json(&data("borromean_network.json")).unwrap();
    assert!((contract(&shipped).unwrap().scalar().unwrap() - full).norm() < 1e-10);
    let m = measure_component(&ln, 0, &basis_insertion(2, 0, 0).unwrap()).unwrap();
    assert!((m.uncut - full).norm() < 1e-12);
    let deleted = m.deleted.unwrap();
    assert!((m.cut - deleted).norm() > 1e-6);
}

#[test]
fn completeness() {
    let r = CrossingTensor::bell().unwrap();
    for w in ["n=3: s1 s2^-1 s1 s2^-1 s1 s2^-1", "n=2: s1 s1 s1", "n=3: s1 s2"] {
        let ln = link_to_network(&parse_braid(w).unwrap(), &r).unwrap();
        let uncut = contract(&ln.graph).unwrap().scalar().unwrap();
        for &e in &ln.closure_edges {
            let total: Complex64 = (0..2)
                .map(|a| {
                    let g = ln.graph.insert_ketbra(e, &basis_insertion(2, a, a).unwrap()).unwrap();
                    contract(&g).unwrap().scalar().unwrap()
                })
                .sum();
            assert!((total - uncut).norm() < 1e-10, "{w}");
        }
    }
}

#[test]
fn json_round_trip() {
    let g = random_network(3, 3, 8);
    let back = NetworkGraph::from_json(&g.to_json()).unwrap();
    assert_eq!(back, g);
    assert!(NetworkGraph::from_json("{\"nodes\": []}").is_err());
}

fn word_strategy() -> impl Strategy<Value = BraidWord> {
    (2usize..=4).prop_flat_map(|n| {
        prop::collection::vec((1..n, any::<bool>()), 0..=8).prop_map(move |ls| {
            BraidWord::new(
                n,
                ls.into_iter()
                    .map(|(i, p)| BraidLetter::new(i, if p { 1 } else { -1 }))
                    .collect(),
            )
            .unwrap()
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn contraction_matches_brute_force(seed in any::<u64>(), d in 2usize..=3) {
        let g = random_network(seed, d, if d == 2 { 12 } else { 8 });
        let want = oracle::brute_force_contract(&g);
        let greedy = contract(&g).unwrap();
        prop_assert_eq!(greedy.shape.clone(), g.output_shape());
        prop_assert!(close(&greedy.entries, &want, 1e-10));
        let seq = contract_with(&g, &ContractConfig { order: ContractionOrder::Sequential, ..Default::default() }).unwrap();
        prop_assert!(close(&seq.entries, &want, 1e-10));
    }

    #[test]
    fn network_matches_dense_trace(b in word_strategy()) {
        let r = CrossingTensor::bell().unwrap();
        let ln = link_to_network(&b, &r).unwrap();
        let got = contract(&ln.graph).unwrap().scalar().unwrap();
        let want = oracle::dense_braid_trace(&b, &dense(&r), 2);
        prop_assert!((got - want).norm() < 1e-9 * (1.0 + want.norm()));
    }
}
