//! Structure-derived confidence.
//!
//! A node's derived confidence is the support-weighted average of its
//! supporters' confidences:
//!
//! ```text
//! conf'(j) = Σ w(i,j)·conf(i) / Σ w(i,j)     over support edges i -> j
//! ```
//!
//! Nodes without incoming support keep their assigned confidence. The map is
//! iterated Jacobi-style from the assigned scores, with optional damping,
//! until the max-norm change drops to the tolerance. Qualification and
//! contradiction edges play no part.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{BeliefSystem, EdgeKind, NodeId};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PropagationConfig {
    /// Step size toward the update, in `(0, 1]`. `None` picks 1.0 when the
    /// support subgraph is acyclic and 0.5 otherwise.
    pub damping: Option<f64>,
    /// Max-norm convergence threshold.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for PropagationConfig {
    fn default() -> Self {
        PropagationConfig {
            damping: None,
            tolerance: 1e-9,
            max_iterations: 10_000,
        }
    }
}

impl PropagationConfig {
    pub fn validate(&self) -> Result<()> {
        if let Some(d) = self.damping {
            if !(d > 0.0 && d <= 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "damping must lie in (0, 1], got {d}"
                )));
            }
        }
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "tolerance must be a positive finite number, got {}",
                self.tolerance
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidParameter(
                "max_iterations must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropagationResult {
    pub conf_out: BTreeMap<NodeId, f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Max-norm change of the last sweep.
    pub residual: f64,
    /// Damping actually used.
    pub damping: f64,
}

impl PropagationResult {
    /// A copy of `sys` with its confidences replaced by the derived ones.
    pub fn apply(&self, sys: &BeliefSystem) -> Result<BeliefSystem> {
        sys.with_confidences(&self.conf_out)
    }
}

/// Whether the subgraph of support edges has no directed cycle.
pub fn support_is_acyclic(sys: &BeliefSystem) -> bool {
    let n = sys.node_count();
    let mut indegree = vec![0usize; n];
    for (ei, e) in sys.edges().iter().enumerate() {
        if e.kind == EdgeKind::Support {
            indegree[sys.endpoints(ei).1] += 1;
        }
    }
    let mut ready: Vec<usize> = (0..n).filter(|&i| indegree[i] == 0).collect();
    let mut seen = 0;
    while let Some(v) = ready.pop() {
        seen += 1;
        for &ei in sys.out_edges(v) {
            if sys.edges()[ei].kind == EdgeKind::Support {
                let t = sys.endpoints(ei).1;
                indegree[t] -= 1;
                if indegree[t] == 0 {
                    ready.push(t);
                }
            }
        }
    }
    seen == n
}

struct Supporters {
    /// (source index, weight) per target, in source order.
    lists: Vec<Vec<(usize, f64)>>,
    totals: Vec<f64>,
}

impl Supporters {
    fn of(sys: &BeliefSystem) -> Self {
        let lists: Vec<Vec<(usize, f64)>> = (0..sys.node_count())
            .map(|j| {
                sys.in_edges(j)
                    .iter()
                    .map(|&ei| (ei, &sys.edges()[ei]))
                    .filter(|(_, e)| e.kind == EdgeKind::Support)
                    .map(|(ei, e)| (sys.endpoints(ei).0, e.weight))
                    .collect()
            })
            .collect();
        let totals = lists
            .iter()
            .map(|l| l.iter().map(|&(_, w)| w).sum())
            .collect();
        Supporters { lists, totals }
    }
}

pub fn propagate_confidence(
    sys: &BeliefSystem,
    cfg: &PropagationConfig,
) -> Result<PropagationResult> {
    cfg.validate()?;
    let damping = cfg
        .damping
        .unwrap_or_else(|| if support_is_acyclic(sys) { 1.0 } else { 0.5 });
    let supporters = Supporters::of(sys);
    let mut cur: Vec<f64> = sys.nodes().iter().map(|n| n.conf).collect();
    let mut next = cur.clone();
    let mut iterations = 0;
    let mut residual = 0.0;
    let mut converged = false;

    while iterations < cfg.max_iterations {
        iterations += 1;
        residual = 0.0f64;
        for (j, list) in supporters.lists.iter().enumerate() {
            if list.is_empty() {
                next[j] = cur[j];
                continue;
            }
            let mass: f64 = list.iter().map(|&(i, w)| w * cur[i]).sum();
            let target = mass / supporters.totals[j];
            let stepped = if damping == 1.0 {
                target
            } else {
                (1.0 - damping) * cur[j] + damping * target
            };
            // rounding guard; the exact update is a convex combination
            next[j] = stepped.clamp(0.0, 1.0);
            residual = residual.max((next[j] - cur[j]).abs());
        }
        std::mem::swap(&mut cur, &mut next);
        debug_assert!(cur.iter().all(|c| (0.0..=1.0).contains(c)));
        if residual <= cfg.tolerance {
            converged = true;
            break;
        }
    }

    Ok(PropagationResult {
        conf_out: sys
            .nodes()
            .iter()
            .zip(cur)
            .map(|(n, c)| (n.id.clone(), c))
            .collect(),
        iterations,
        converged,
        residual,
        damping,
    })
}
