use crate::model::{build_system, BeliefNode, BeliefSystem, Edge, EdgeKind, NodeId};

pub(crate) fn ids(names: &[&str]) -> Vec<NodeId> {
    names.iter().map(|n| NodeId::new(*n).unwrap()).collect()
}

/// Nodes with cred = conf = 0.5 and unit-weight edges.
pub(crate) fn graph(names: &[&str], edges: &[(&str, &str, EdgeKind)]) -> BeliefSystem {
    scored(
        &names.iter().map(|n| (*n, 0.5, 0.5)).collect::<Vec<_>>(),
        &edges
            .iter()
            .map(|&(s, t, k)| (s, t, k, 1.0))
            .collect::<Vec<_>>(),
    )
}

pub(crate) fn scored(
    nodes: &[(&str, f64, f64)],
    edges: &[(&str, &str, EdgeKind, f64)],
) -> BeliefSystem {
    build_system(
        nodes
            .iter()
            .map(|&(n, cred, conf)| BeliefNode::new(NodeId::new(n).unwrap(), n, cred, conf))
            .collect(),
        edges
            .iter()
            .map(|&(s, t, k, w)| Edge::new(NodeId::new(s).unwrap(), NodeId::new(t).unwrap(), k, w))
            .collect(),
    )
    .unwrap()
}
