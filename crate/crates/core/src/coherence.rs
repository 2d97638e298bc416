//! Structural coherence: local and global coherence, the undermined set, and
//! the two forms of structural incoherence (contradictory cycles/chains and
//! undersupported beliefs).
//!
//! A node subset is locally coherent when the subgraph it induces carries no
//! contradiction edge. Because every edge has exactly one of three kinds, that
//! single test covers both "no contradiction between members" and "only
//! support or qualification edges inside". A system is globally coherent when
//! its whole node set is locally coherent, i.e. it has no contradiction edge
//! at all; the finer path structure is reported by [`undermined_set`],
//! [`find_contradiction_cycles`] and [`find_contradiction_chains`].
//!
//! Undermining is read as a forward closure: every contradiction target is
//! undermined, and so is anything that receives support from an undermined
//! node. Qualification edges do not carry undermining unless
//! [`UnderminingPolicy::SupportAndQualification`] is selected.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::diagnostics::Thresholds;
use crate::error::{Error, Result};
use crate::graph::{scc_ids, UnionFind};
use crate::model::{BeliefSystem, Edge, EdgeKind, NodeId};

/// Which edge kinds transmit undermining from an undermined node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnderminingPolicy {
    #[default]
    SupportOnly,
    SupportAndQualification,
}

impl UnderminingPolicy {
    fn carries(self, kind: EdgeKind) -> bool {
        match self {
            UnderminingPolicy::SupportOnly => kind == EdgeKind::Support,
            UnderminingPolicy::SupportAndQualification => kind != EdgeKind::Contradiction,
        }
    }
}

/// Bounds for the exponential enumerations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnumerationLimits {
    /// Maximum number of items returned.
    pub max_results: usize,
    /// Maximum number of search steps (edge visits) before giving up.
    pub max_steps: u64,
}

impl Default for EnumerationLimits {
    fn default() -> Self {
        EnumerationLimits {
            max_results: 10_000,
            max_steps: 2_000_000,
        }
    }
}

impl EnumerationLimits {
    fn validate(&self) -> Result<()> {
        if self.max_results == 0 || self.max_steps == 0 {
            return Err(Error::InvalidParameter(
                "enumeration limits must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Output of a bounded enumeration. `truncated` is set when either limit cut
/// the search short, in which case `items` is a subset of the full answer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Enumeration<T> {
    pub items: Vec<T>,
    pub truncated: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum UndersupportReason {
    /// No incoming support edge at all.
    NoSupport,
    /// Every supporter is itself undermined.
    IncoherentSupport,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Undersupported {
    pub node: NodeId,
    pub reason: UndersupportReason,
}

fn subset_mask<'a, I>(sys: &BeliefSystem, subset: I) -> Result<Vec<bool>>
where
    I: IntoIterator<Item = &'a NodeId>,
{
    let mut mask = vec![false; sys.node_count()];
    for id in subset {
        mask[sys.require_index(id)?] = true;
    }
    Ok(mask)
}

/// Whether the subgraph induced by `subset` contains no contradiction edge.
pub fn is_locally_coherent<'a, I>(sys: &BeliefSystem, subset: I) -> Result<bool>
where
    I: IntoIterator<Item = &'a NodeId>,
{
    let mask = subset_mask(sys, subset)?;
    Ok(is_locally_coherent_mask(sys, &mask))
}

pub(crate) fn is_locally_coherent_mask(sys: &BeliefSystem, mask: &[bool]) -> bool {
    sys.edges().iter().enumerate().all(|(ei, e)| {
        let (s, t) = sys.endpoints(ei);
        e.kind != EdgeKind::Contradiction || !(mask[s] && mask[t])
    })
}

/// Whether the system has no contradiction edge.
pub fn is_globally_coherent(sys: &BeliefSystem) -> bool {
    sys.edges()
        .iter()
        .all(|e| e.kind != EdgeKind::Contradiction)
}

pub fn contradiction_edges(sys: &BeliefSystem) -> Vec<Edge> {
    sys.edges()
        .iter()
        .filter(|e| e.kind == EdgeKind::Contradiction)
        .cloned()
        .collect()
}

/// Nodes undermined by upstream contradictions, under the default
/// support-only policy.
pub fn undermined_set(sys: &BeliefSystem) -> BTreeSet<NodeId> {
    undermined_set_with(sys, UnderminingPolicy::SupportOnly)
}

pub fn undermined_set_with(sys: &BeliefSystem, policy: UnderminingPolicy) -> BTreeSet<NodeId> {
    undermined_mask(sys, policy)
        .iter()
        .enumerate()
        .filter(|(_, &u)| u)
        .map(|(i, _)| sys.id_at(i).clone())
        .collect()
}

pub(crate) fn undermined_mask(sys: &BeliefSystem, policy: UnderminingPolicy) -> Vec<bool> {
    let mut undermined = vec![false; sys.node_count()];
    let mut queue = Vec::new();
    for (ei, e) in sys.edges().iter().enumerate() {
        if e.kind == EdgeKind::Contradiction {
            let t = sys.endpoints(ei).1;
            if !undermined[t] {
                undermined[t] = true;
                queue.push(t);
            }
        }
    }
    while let Some(v) = queue.pop() {
        for &ei in sys.out_edges(v) {
            if policy.carries(sys.edges()[ei].kind) {
                let t = sys.endpoints(ei).1;
                if !undermined[t] {
                    undermined[t] = true;
                    queue.push(t);
                }
            }
        }
    }
    undermined
}

/// Simple directed cycles that traverse at least one contradiction edge.
///
/// Each cycle is rotated to start at its smallest node id (the closing edge
/// back to the first node is implied) and the list is sorted
/// lexicographically.
pub fn find_contradiction_cycles(
    sys: &BeliefSystem,
    limits: EnumerationLimits,
) -> Result<Enumeration<Vec<NodeId>>> {
    limits.validate()?;
    let scc = scc_ids(sys);
    let n = sys.node_count();
    let mut budget = Budget::new(limits.max_steps);
    let mut found: Vec<Vec<usize>> = Vec::new();
    let mut truncated = false;

    let mut reach = vec![false; n];
    let mut on_path = vec![false; n];
    'edges: for (ek, e) in sys.edges().iter().enumerate() {
        if e.kind != EdgeKind::Contradiction {
            continue;
        }
        let (u, v) = sys.endpoints(ek);
        if scc[u] != scc[v] {
            continue;
        }
        let comp = scc[u];
        // Each cycle is generated from its first contradiction edge in edge
        // order, so earlier contradiction edges are off limits here.
        let allowed = |ei: usize| {
            let (s, t) = sys.endpoints(ei);
            scc[s] == comp
                && scc[t] == comp
                && (ei >= ek || sys.edges()[ei].kind != EdgeKind::Contradiction)
        };

        // nodes that can reach u over allowed edges
        reach.iter_mut().for_each(|r| *r = false);
        reach[u] = true;
        let mut queue = vec![u];
        while let Some(x) = queue.pop() {
            for &ei in sys.in_edges(x) {
                if !budget.step() {
                    truncated = true;
                    break 'edges;
                }
                let s = sys.endpoints(ei).0;
                if !reach[s] && allowed(ei) {
                    reach[s] = true;
                    queue.push(s);
                }
            }
        }
        if !reach[v] {
            continue;
        }

        // DFS over simple paths v ~> u
        let mut path = vec![u, v];
        on_path[u] = true;
        on_path[v] = true;
        let mut stack: Vec<usize> = vec![0];
        let mut aborted = false;
        while let Some(pos) = stack.last_mut() {
            let x = *path.last().expect("path holds at least u and v");
            let out = sys.out_edges(x);
            if *pos >= out.len() {
                stack.pop();
                if path.len() > 2 {
                    on_path[path.pop().expect("non-empty")] = false;
                }
                continue;
            }
            let ei = out[*pos];
            *pos += 1;
            if !budget.step() {
                aborted = true;
                break;
            }
            if !allowed(ei) {
                continue;
            }
            let y = sys.endpoints(ei).1;
            if y == u {
                if found.len() == limits.max_results {
                    aborted = true;
                    break;
                }
                found.push(canonical_rotation(&path));
            } else if !on_path[y] && reach[y] {
                on_path[y] = true;
                path.push(y);
                stack.push(0);
            }
        }
        for &x in &path {
            on_path[x] = false;
        }
        if aborted {
            truncated = true;
            break;
        }
    }

    found.sort();
    Ok(Enumeration {
        items: to_ids(sys, found),
        truncated,
    })
}

fn canonical_rotation(cycle: &[usize]) -> Vec<usize> {
    let start = cycle
        .iter()
        .enumerate()
        .min_by_key(|&(_, &x)| x)
        .map(|(i, _)| i)
        .unwrap_or(0);
    cycle[start..]
        .iter()
        .chain(&cycle[..start])
        .copied()
        .collect()
}

fn to_ids(sys: &BeliefSystem, paths: Vec<Vec<usize>>) -> Vec<Vec<NodeId>> {
    paths
        .into_iter()
        .map(|p| p.into_iter().map(|i| sys.id_at(i).clone()).collect())
        .collect()
}

struct Budget {
    left: u64,
}

impl Budget {
    fn new(steps: u64) -> Self {
        Budget { left: steps }
    }

    fn step(&mut self) -> bool {
        if self.left == 0 {
            return false;
        }
        self.left -= 1;
        true
    }
}

/// Maximal simple directed paths of at most `max_len` nodes that traverse at
/// least one contradiction edge.
///
/// A path is maximal when it already has `max_len` nodes, or when no
/// predecessor of its first node and no successor of its last node can be
/// added without repeating a node.
pub fn find_contradiction_chains(
    sys: &BeliefSystem,
    max_len: usize,
    limits: EnumerationLimits,
) -> Result<Enumeration<Vec<NodeId>>> {
    if max_len < 2 {
        return Err(Error::InvalidParameter(format!(
            "chain length bound must be at least 2, got {max_len}"
        )));
    }
    limits.validate()?;
    let mut search = ChainSearch {
        sys,
        max_len,
        max_results: limits.max_results,
        budget: Budget::new(limits.max_steps),
        on_path: vec![false; sys.node_count()],
        found: Vec::new(),
        aborted: false,
    };
    for (ek, e) in sys.edges().iter().enumerate() {
        if e.kind != EdgeKind::Contradiction {
            continue;
        }
        let (u, v) = sys.endpoints(ek);
        // Each path is generated from its first contradiction edge: the
        // prefix ending at u is built backwards over non-contradiction edges.
        let mut prefix = vec![u];
        search.on_path[u] = true;
        search.extend_prefix(&mut prefix, v);
        search.on_path[u] = false;
        if search.aborted {
            break;
        }
    }
    let mut found = search.found;
    found.sort();
    Ok(Enumeration {
        items: to_ids(sys, found),
        truncated: search.aborted,
    })
}

struct ChainSearch<'a> {
    sys: &'a BeliefSystem,
    max_len: usize,
    max_results: usize,
    budget: Budget,
    on_path: Vec<bool>,
    found: Vec<Vec<usize>>,
    aborted: bool,
}

impl ChainSearch<'_> {
    /// `prefix` is stored reversed: `prefix[0]` is u, the last element is the
    /// path's first node.
    fn extend_prefix(&mut self, prefix: &mut Vec<usize>, v: usize) {
        if self.aborted {
            return;
        }
        if !self.on_path[v] {
            self.on_path[v] = true;
            let mut path: Vec<usize> = prefix.iter().rev().copied().collect();
            path.push(v);
            self.extend_suffix(&mut path);
            self.on_path[v] = false;
        }
        // room for one more prefix node plus v
        if prefix.len() + 2 > self.max_len {
            return;
        }
        let first = *prefix.last().expect("prefix holds u");
        for &ei in self.sys.in_edges(first) {
            if !self.budget.step() {
                self.aborted = true;
                return;
            }
            if self.sys.edges()[ei].kind == EdgeKind::Contradiction {
                continue;
            }
            let p = self.sys.endpoints(ei).0;
            if self.on_path[p] || p == v {
                continue;
            }
            self.on_path[p] = true;
            prefix.push(p);
            self.extend_prefix(prefix, v);
            prefix.pop();
            self.on_path[p] = false;
            if self.aborted {
                return;
            }
        }
    }

    fn extend_suffix(&mut self, path: &mut Vec<usize>) {
        if self.aborted {
            return;
        }
        let mut extended = false;
        if path.len() < self.max_len {
            let last = *path.last().expect("non-empty");
            for &ei in self.sys.out_edges(last) {
                if !self.budget.step() {
                    self.aborted = true;
                    return;
                }
                let y = self.sys.endpoints(ei).1;
                if self.on_path[y] {
                    continue;
                }
                extended = true;
                self.on_path[y] = true;
                path.push(y);
                self.extend_suffix(path);
                path.pop();
                self.on_path[y] = false;
                if self.aborted {
                    return;
                }
            }
        }
        if extended {
            return;
        }
        if path.len() < self.max_len {
            let first = path[0];
            for &ei in self.sys.in_edges(first) {
                if !self.budget.step() {
                    self.aborted = true;
                    return;
                }
                if !self.on_path[self.sys.endpoints(ei).0] {
                    return;
                }
            }
        }
        if self.found.len() == self.max_results {
            self.aborted = true;
            return;
        }
        self.found.push(path.clone());
    }
}

/// High-confidence nodes with no support, or whose supporters are all undermined.
pub fn undersupported_beliefs(sys: &BeliefSystem, th: &Thresholds) -> Vec<Undersupported> {
    let undermined = undermined_mask(sys, UnderminingPolicy::SupportOnly);
    undersupported_with(sys, th, &undermined)
}

pub(crate) fn undersupported_with(
    sys: &BeliefSystem,
    th: &Thresholds,
    undermined: &[bool],
) -> Vec<Undersupported> {
    sys.nodes()
        .iter()
        .enumerate()
        .filter(|(_, n)| n.conf >= th.tau_high)
        .filter_map(|(i, n)| {
            let mut supporters = sys
                .in_edges(i)
                .iter()
                .filter(|&&ei| sys.edges()[ei].kind == EdgeKind::Support)
                .map(|&ei| sys.endpoints(ei).0)
                .peekable();
            let reason = if supporters.peek().is_none() {
                UndersupportReason::NoSupport
            } else if supporters.all(|s| undermined[s]) {
                UndersupportReason::IncoherentSupport
            } else {
                return None;
            };
            Some(Undersupported {
                node: n.id.clone(),
                reason,
            })
        })
        .collect()
}

/// Node sets of the tension zones: weakly connected components of the graph
/// formed by the contradiction edges and their endpoints. Each set is sorted;
/// zones are ordered by their smallest id.
pub fn tension_zone_sets(sys: &BeliefSystem) -> Vec<Vec<NodeId>> {
    zone_groups(sys)
        .into_iter()
        .map(|g| g.into_iter().map(|i| sys.id_at(i).clone()).collect())
        .collect()
}

fn zone_groups(sys: &BeliefSystem) -> Vec<Vec<usize>> {
    let mut uf = UnionFind::new(sys.node_count());
    let mut touched = vec![false; sys.node_count()];
    for (ei, e) in sys.edges().iter().enumerate() {
        if e.kind == EdgeKind::Contradiction {
            let (s, t) = sys.endpoints(ei);
            touched[s] = true;
            touched[t] = true;
            uf.union(s, t);
        }
    }
    uf.groups(|x| touched[x])
}

/// The tension zones as induced subsystems.
pub fn tension_zones(sys: &BeliefSystem) -> Vec<BeliefSystem> {
    zone_groups(sys)
        .into_iter()
        .map(|g| {
            let mut keep = vec![false; sys.node_count()];
            for i in g {
                keep[i] = true;
            }
            sys.induced_by_mask(&keep)
        })
        .collect()
}

/// Knobs for [`coherence_report`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoherenceOptions {
    pub policy: UnderminingPolicy,
    /// `None` skips cycle enumeration.
    pub cycles: Option<EnumerationLimits>,
    pub chain_max_len: usize,
    /// `None` skips chain enumeration.
    pub chains: Option<EnumerationLimits>,
}

impl Default for CoherenceOptions {
    fn default() -> Self {
        CoherenceOptions {
            policy: UnderminingPolicy::SupportOnly,
            cycles: Some(EnumerationLimits::default()),
            chain_max_len: 5,
            chains: Some(EnumerationLimits::default()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoherenceReport {
    pub globally_coherent: bool,
    pub contradiction_edges: Vec<Edge>,
    /// `None` when cycle enumeration was skipped.
    pub contradiction_cycles: Option<Enumeration<Vec<NodeId>>>,
    /// `None` when chain enumeration was skipped.
    pub contradiction_chains: Option<Enumeration<Vec<NodeId>>>,
    pub undermined: Vec<NodeId>,
    pub undersupported: Vec<Undersupported>,
    pub tension_zones: Vec<Vec<NodeId>>,
}

pub fn coherence_report(
    sys: &BeliefSystem,
    th: &Thresholds,
    opts: &CoherenceOptions,
) -> Result<CoherenceReport> {
    th.validate()?;
    let cycles = opts
        .cycles
        .map(|l| find_contradiction_cycles(sys, l))
        .transpose()?;
    let chains = opts
        .chains
        .map(|l| find_contradiction_chains(sys, opts.chain_max_len, l))
        .transpose()?;
    let undermined = undermined_mask(sys, opts.policy);
    let contradiction_edges = contradiction_edges(sys);
    Ok(CoherenceReport {
        globally_coherent: contradiction_edges.is_empty(),
        contradiction_edges,
        contradiction_cycles: cycles,
        contradiction_chains: chains,
        undermined: undermined
            .iter()
            .enumerate()
            .filter(|(_, &u)| u)
            .map(|(i, _)| sys.id_at(i).clone())
            .collect(),
        undersupported: undersupported_with(sys, th, &undermined),
        tension_zones: tension_zone_sets(sys),
    })
}
