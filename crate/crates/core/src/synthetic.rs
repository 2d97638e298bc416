//! Seeded random belief systems for benchmarks and fuzzing.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{build_system, BeliefNode, BeliefSystem, Edge, EdgeKind, NodeId};

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub nodes: usize,
    /// Requested edge count; capped at the number of admissible ordered pairs.
    pub edges: usize,
    /// Relative frequencies of support, qualification and contradiction.
    pub kind_mix: [f64; 3],
    /// Only emit edges from lower to higher node index.
    pub acyclic: bool,
    /// Edge weights are drawn from `[weight_range.0, weight_range.1)`.
    pub weight_range: (f64, f64),
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            nodes: 100,
            edges: 300,
            kind_mix: [0.6, 0.2, 0.2],
            acyclic: false,
            weight_range: (0.1, 2.0),
            seed: 0,
        }
    }
}

/// Node ids are `n` followed by a zero-padded index, so id order matches
/// generation order.
pub fn node_name(i: usize, total: usize) -> String {
    let width = total.saturating_sub(1).to_string().len();
    format!("n{i:0width$}")
}

pub fn random_system(spec: &SyntheticSpec) -> BeliefSystem {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n = spec.nodes;
    let ids: Vec<NodeId> = (0..n)
        .map(|i| NodeId::new(node_name(i, n)).expect("non-empty"))
        .collect();
    let nodes = ids
        .iter()
        .map(|id| {
            BeliefNode::new(
                id.clone(),
                format!("belief {id}"),
                rng.random::<f64>(),
                rng.random::<f64>(),
            )
        })
        .collect();

    let pairs = if spec.acyclic {
        n * n.saturating_sub(1) / 2
    } else {
        n * n.saturating_sub(1)
    };
    let target = spec.edges.min(pairs);
    let total_mix: f64 = spec.kind_mix.iter().sum();
    let mut seen = HashSet::with_capacity(target);
    let mut edges = Vec::with_capacity(target);
    // dense requests enumerate all pairs and sample from them instead of rejecting
    if target * 2 > pairs {
        let mut all: Vec<(usize, usize)> = (0..n)
            .flat_map(|s| (0..n).map(move |t| (s, t)))
            .filter(|&(s, t)| if spec.acyclic { s < t } else { s != t })
            .collect();
        for i in 0..target {
            let j = rng.random_range(i..all.len());
            all.swap(i, j);
        }
        all.truncate(target);
        all.sort_unstable();
        seen.extend(all);
    } else {
        while seen.len() < target {
            let s = rng.random_range(0..n);
            let t = rng.random_range(0..n);
            let (s, t) = if spec.acyclic {
                (s.min(t), s.max(t))
            } else {
                (s, t)
            };
            if s != t {
                seen.insert((s, t));
            }
        }
    }
    let mut chosen: Vec<(usize, usize)> = seen.into_iter().collect();
    chosen.sort_unstable();
    for (s, t) in chosen {
        let mut pick = rng.random::<f64>() * total_mix;
        let mut kind = EdgeKind::Contradiction;
        for (k, &share) in EdgeKind::ALL.iter().zip(&spec.kind_mix) {
            if pick < share {
                kind = *k;
                break;
            }
            pick -= share;
        }
        let (lo, hi) = spec.weight_range;
        let weight = lo + (hi - lo) * rng.random::<f64>();
        edges.push(Edge::new(ids[s].clone(), ids[t].clone(), kind, weight));
    }
    build_system(nodes, edges).expect("generator emits valid systems")
}
