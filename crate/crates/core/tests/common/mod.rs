//! Random graph generators and brute-force oracles shared by the
//! integration tests and the acceptance suite.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use beliefgraph_core::{BeliefNode, BeliefSystem, Edge, EdgeKind, NodeId};
use proptest::prelude::*;
use rand::Rng;

pub fn id(s: &str) -> NodeId {
    NodeId::new(s).unwrap()
}

pub fn name(i: usize) -> String {
    format!("v{i:02}")
}

/// Ordered pairs `(s, t)` with `s != t`, in a fixed order.
pub fn ordered_pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n)
        .flat_map(|s| (0..n).map(move |t| (s, t)))
        .filter(|&(s, t)| s != t)
        .collect()
}

pub fn kind_of(k: usize) -> EdgeKind {
    EdgeKind::ALL[k % 3]
}

pub fn assemble(
    scores: &[(f64, f64)],
    edges: impl IntoIterator<Item = (usize, usize, EdgeKind, f64)>,
) -> BeliefSystem {
    let nodes = scores
        .iter()
        .enumerate()
        .map(|(i, &(cred, conf))| BeliefNode::new(id(&name(i)), format!("claim {i}"), cred, conf))
        .collect();
    let edges = edges
        .into_iter()
        .map(|(s, t, k, w)| Edge::new(id(&name(s)), id(&name(t)), k, w))
        .collect();
    beliefgraph_core::build_system(nodes, edges).unwrap()
}

/// Arbitrary system with up to `max_nodes` nodes. Each ordered pair carries
/// an edge with probability `density`.
pub fn arb_system(max_nodes: usize, density: f64) -> impl Strategy<Value = BeliefSystem> {
    (0..=max_nodes)
        .prop_flat_map(move |n| {
            (
                prop::collection::vec((0.0..=1.0f64, 0.0..=1.0f64), n),
                prop::collection::vec(
                    prop::option::weighted(density, (0..3usize, 0.05..4.0f64)),
                    n * n.saturating_sub(1),
                ),
            )
        })
        .prop_map(|(scores, slots)| {
            let pairs = ordered_pairs(scores.len());
            assemble(
                &scores,
                pairs
                    .into_iter()
                    .zip(slots)
                    .filter_map(|((s, t), slot)| slot.map(|(k, w)| (s, t, kind_of(k), w))),
            )
        })
}

/// Arbitrary system whose support edges form a DAG (support only runs from
/// lower to higher index; other kinds may point anywhere).
pub fn arb_support_dag(max_nodes: usize, density: f64) -> impl Strategy<Value = BeliefSystem> {
    arb_system(max_nodes, density).prop_map(|sys| {
        let scores: Vec<(f64, f64)> = sys.nodes().iter().map(|n| (n.cred, n.conf)).collect();
        let index = |nid: &NodeId| sys.index_of(nid).unwrap();
        let edges: Vec<_> = sys
            .edges()
            .iter()
            .filter(|e| e.kind != EdgeKind::Support || index(&e.source) < index(&e.target))
            .map(|e| (index(&e.source), index(&e.target), e.kind, e.weight))
            .collect();
        assemble(&scores, edges)
    })
}

/// Same shape as [`arb_system`], driven by a plain RNG.
pub fn random_graph(rng: &mut impl Rng, max_nodes: usize, density: f64) -> BeliefSystem {
    let n = rng.random_range(0..=max_nodes);
    let scores: Vec<(f64, f64)> = (0..n).map(|_| (rng.random(), rng.random())).collect();
    let mut edges = Vec::new();
    for (s, t) in ordered_pairs(n) {
        if rng.random_bool(density) {
            let kind = kind_of(rng.random_range(0..3));
            edges.push((s, t, kind, rng.random_range(0.05..4.0)));
        }
    }
    assemble(&scores, edges)
}

/// Random system whose only edges are support edges from lower to higher index.
pub fn random_support_dag(rng: &mut impl Rng, max_nodes: usize, density: f64) -> BeliefSystem {
    let n = rng.random_range(1..=max_nodes);
    let scores: Vec<(f64, f64)> = (0..n).map(|_| (rng.random(), rng.random())).collect();
    let mut edges = Vec::new();
    for s in 0..n {
        for t in s + 1..n {
            if rng.random_bool(density) {
                edges.push((s, t, EdgeKind::Support, rng.random_range(0.05..4.0)));
            }
        }
    }
    assemble(&scores, edges)
}

/// Node ids selected by the bits of `mask`, in id order.
pub fn subset(sys: &BeliefSystem, mask: u64) -> Vec<NodeId> {
    sys.nodes()
        .iter()
        .enumerate()
        .filter(|(i, _)| mask >> i & 1 == 1)
        .map(|(_, n)| n.id.clone())
        .collect()
}

/// Local coherence straight from the definition: the induced edge set is
/// every edge with both endpoints in the subset; none may be a contradiction.
pub fn oracle_locally_coherent(sys: &BeliefSystem, set: &[NodeId]) -> bool {
    let set: BTreeSet<&NodeId> = set.iter().collect();
    !sys.edges().iter().any(|e| {
        set.contains(&e.source) && set.contains(&e.target) && e.kind == EdgeKind::Contradiction
    })
}

/// Undermined set by naive iteration from the empty set until nothing changes.
pub fn oracle_undermined(sys: &BeliefSystem, carry: &[EdgeKind]) -> BTreeSet<NodeId> {
    let mut current: BTreeSet<NodeId> = BTreeSet::new();
    loop {
        let mut next = BTreeSet::new();
        for e in sys.edges() {
            if e.kind == EdgeKind::Contradiction
                || (carry.contains(&e.kind) && current.contains(&e.source))
            {
                next.insert(e.target.clone());
            }
        }
        if next == current {
            return current;
        }
        current = next;
    }
}

pub fn objective_weight(node: &BeliefNode, objective: beliefgraph_core::Objective) -> f64 {
    use beliefgraph_core::Objective::*;
    match objective {
        Count => 1.0,
        TotalCred => node.cred,
        TotalConf => node.conf,
    }
}

/// Best coherent subset by exhaustive enumeration. Among sets with the
/// optimal score the winner contains the smallest node id on which the
/// candidates differ.
pub fn oracle_best_subset(
    sys: &BeliefSystem,
    objective: beliefgraph_core::Objective,
) -> (Vec<NodeId>, f64) {
    let n = sys.node_count();
    assert!(
        n <= 20,
        "exhaustive search is only feasible on small graphs"
    );
    let mut best: Option<(u64, f64)> = None;
    for mask in 0..(1u64 << n) {
        let set = subset(sys, mask);
        if !oracle_locally_coherent(sys, &set) {
            continue;
        }
        let score: f64 = sys
            .nodes()
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, node)| objective_weight(node, objective))
            .sum();
        let better = match best {
            None => true,
            Some((bm, bs)) => score > bs || (score == bs && prefers(mask, bm)),
        };
        if better {
            best = Some((mask, score));
        }
    }
    let (mask, score) = best.expect("the empty set is always coherent");
    (subset(sys, mask), score)
}

/// Whether `a` holds the lowest-index bit on which `a` and `b` differ.
fn prefers(a: u64, b: u64) -> bool {
    let diff = a ^ b;
    diff != 0 && a & (diff & diff.wrapping_neg()) != 0
}

/// Number of nodes incident to at least one contradiction edge.
pub fn conflict_vertex_count(sys: &BeliefSystem) -> usize {
    sys.edges()
        .iter()
        .filter(|e| e.kind == EdgeKind::Contradiction)
        .flat_map(|e| [&e.source, &e.target])
        .collect::<BTreeSet<_>>()
        .len()
}

/// Confidence on a support DAG by one pass in topological order: sources keep
/// their assigned confidence, every other node takes the weighted mean of its
/// supporters' values.
pub fn oracle_dag_confidence(sys: &BeliefSystem) -> BTreeMap<NodeId, f64> {
    let supports: Vec<&Edge> = sys
        .edges()
        .iter()
        .filter(|e| e.kind == EdgeKind::Support)
        .collect();
    let mut indegree: BTreeMap<&NodeId, usize> = sys.nodes().iter().map(|n| (&n.id, 0)).collect();
    for e in &supports {
        *indegree.get_mut(&e.target).unwrap() += 1;
    }
    let mut ready: Vec<&NodeId> = indegree
        .iter()
        .filter(|(_, &d)| d == 0)
        .map(|(&k, _)| k)
        .collect();
    let mut order = Vec::new();
    while let Some(v) = ready.pop() {
        order.push(v.clone());
        for e in supports.iter().filter(|e| &e.source == v) {
            let d = indegree.get_mut(&e.target).unwrap();
            *d -= 1;
            if *d == 0 {
                ready.push(&e.target);
            }
        }
    }
    assert_eq!(
        order.len(),
        sys.node_count(),
        "support subgraph has a cycle"
    );

    let mut out = BTreeMap::new();
    for v in order {
        let incoming: Vec<&&Edge> = supports.iter().filter(|e| e.target == v).collect();
        let value = if incoming.is_empty() {
            sys.node(&v).unwrap().conf
        } else {
            let mass: f64 = incoming.iter().map(|e| e.weight * out[&e.source]).sum();
            let total: f64 = incoming.iter().map(|e| e.weight).sum();
            mass / total
        };
        out.insert(v, value);
    }
    out
}

/// Length in edges of the longest support path.
pub fn support_depth(sys: &BeliefSystem) -> usize {
    let mut depth: BTreeMap<&NodeId, usize> = BTreeMap::new();
    // relax |N| times; enough for any DAG
    for _ in 0..sys.node_count() {
        for e in sys.edges().iter().filter(|e| e.kind == EdgeKind::Support) {
            let d = depth.get(&e.source).copied().unwrap_or(0) + 1;
            let slot = depth.entry(&e.target).or_insert(0);
            *slot = (*slot).max(d);
        }
    }
    depth.values().copied().max().unwrap_or(0)
}

/// Copy of `sys` with every support edge into `target` scaled by `factor`.
pub fn rescale_into(sys: &BeliefSystem, factors: &BTreeMap<NodeId, f64>) -> BeliefSystem {
    let edges = sys
        .edges()
        .iter()
        .map(|e| {
            let mut e = e.clone();
            if e.kind == EdgeKind::Support {
                e.weight *= factors.get(&e.target).copied().unwrap_or(1.0);
            }
            e
        })
        .collect();
    BeliefSystem::build(sys.nodes().to_vec(), edges, sys.metadata().clone()).unwrap()
}
