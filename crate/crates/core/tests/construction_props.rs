mod common;

use std::collections::BTreeSet;

use beliefgraph_core::{build_system, BeliefNode, Edge, EdgeKind};
use common::*;
use proptest::prelude::*;

type RawNode = (u8, f64, f64);
type RawEdge = (u8, u8, usize, f64);

fn raw_inputs() -> impl Strategy<Value = (Vec<RawNode>, Vec<RawEdge>)> {
    let score = prop_oneof![8 => 0.0..=1.0f64, 1 => -1.0..2.0f64, 1 => Just(f64::NAN)];
    let weight = prop_oneof![8 => 0.01..5.0f64, 1 => -2.0..=0.0f64, 1 => Just(f64::INFINITY)];
    (
        prop::collection::vec((0u8..8, score.clone(), score), 0..8),
        prop::collection::vec((0u8..9, 0u8..9, 0usize..3, weight), 0..10),
    )
}

/// Name of the first validation failure, checking nodes then edges in input order.
fn expected_error(nodes: &[RawNode], edges: &[RawEdge]) -> Option<&'static str> {
    let unit = |x: f64| (0.0..=1.0).contains(&x);
    let mut seen = BTreeSet::new();
    for &(n, cred, conf) in nodes {
        if !unit(cred) || !unit(conf) {
            return Some("ScoreOutOfRange");
        }
        if !seen.insert(n) {
            return Some("DuplicateNodeId");
        }
    }
    let mut pairs = BTreeSet::new();
    for &(s, t, _, w) in edges {
        if s == t {
            return Some("SelfLoop");
        }
        if !(w > 0.0 && w.is_finite()) {
            return Some("NonPositiveWeight");
        }
        if !seen.contains(&s) || !seen.contains(&t) {
            return Some("DanglingEdgeEndpoint");
        }
        if !pairs.insert((s, t)) {
            return Some("DuplicateEdge");
        }
    }
    None
}

proptest! {
    #[test]
    fn construction_is_total((nodes, edges) in raw_inputs()) {
        let built = build_system(
            nodes.iter().map(|&(n, cred, conf)| BeliefNode::new(id(&name(n as usize)), "", cred, conf)).collect(),
            edges.iter().map(|&(s, t, k, w)| {
                Edge::new(id(&name(s as usize)), id(&name(t as usize)), kind_of(k), w)
            }).collect(),
        );
        match (built, expected_error(&nodes, &edges)) {
            (Ok(sys), None) => {
                prop_assert_eq!(sys.node_count(), nodes.len());
                prop_assert_eq!(sys.edge_count(), edges.len());
                prop_assert!(sys.nodes().windows(2).all(|w| w[0].id < w[1].id));
                prop_assert!(sys.edges().windows(2).all(|w| (&w[0].source, &w[0].target) < (&w[1].source, &w[1].target)));
                let counts = sys.kind_counts();
                for (k, kind) in EdgeKind::ALL.iter().enumerate() {
                    prop_assert_eq!(counts[k], sys.edges().iter().filter(|e| e.kind == *kind).count());
                }
            }
            (Err(e), Some(kind)) => prop_assert_eq!(e.kind(), kind),
            (got, want) => prop_assert!(false, "got {:?}, expected {:?}", got.map(|_| ()), want),
        }
    }
}
