//! Coherent-subgraph extraction.
//!
//! A node set is locally coherent exactly when it is an independent set of the
//! conflict graph (one undirected edge per pair of nodes joined by a
//! contradiction in either direction). This turns "find the best coherent
//! subgraph" into maximum-weight independent set and "list the coherent
//! regions" into maximal independent set enumeration.
//!
//! Nodes untouched by any contradiction belong to every maximal coherent set
//! and to every optimal one, so the solvers only search over conflict
//! vertices, one connected component of the conflict graph at a time.
//!
//! Ties between optimal sets are broken toward the set that contains the
//! smallest node id on which they differ.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::coherence::Enumeration;
use crate::error::{Error, Result};
use crate::graph::{BitSet, UnionFind};
use crate::model::{BeliefSystem, EdgeKind, NodeId};

/// Undirected graph of pairwise contradictions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConflictGraph {
    pub vertices: Vec<NodeId>,
    /// Pairs `(u, v)` with `u < v`, sorted.
    pub conflicts: Vec<(NodeId, NodeId)>,
    #[serde(skip)]
    adjacency: Vec<Vec<usize>>,
}

impl ConflictGraph {
    pub fn of(sys: &BeliefSystem) -> ConflictGraph {
        let n = sys.node_count();
        let mut pairs = BTreeSet::new();
        for (ei, e) in sys.edges().iter().enumerate() {
            if e.kind == EdgeKind::Contradiction {
                let (s, t) = sys.endpoints(ei);
                pairs.insert((s.min(t), s.max(t)));
            }
        }
        let mut adjacency = vec![Vec::new(); n];
        for &(a, b) in &pairs {
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        ConflictGraph {
            vertices: sys.nodes().iter().map(|n| n.id.clone()).collect(),
            conflicts: pairs
                .into_iter()
                .map(|(a, b)| (sys.id_at(a).clone(), sys.id_at(b).clone()))
                .collect(),
            adjacency,
        }
    }

    /// Dense-index neighbors of vertex `i` (same indexing as the source system).
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adjacency[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adjacency[i].len()
    }

    pub fn conflicts_between(&self, a: &NodeId, b: &NodeId) -> bool {
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        self.conflicts
            .binary_search_by(|(x, y)| (x, y).cmp(&(a, b)))
            .is_ok()
    }

    /// Whether no two members of `set` conflict.
    pub fn is_independent<'a, I>(&self, set: I) -> bool
    where
        I: IntoIterator<Item = &'a NodeId>,
    {
        let members: BTreeSet<&NodeId> = set.into_iter().collect();
        !self
            .conflicts
            .iter()
            .any(|(a, b)| members.contains(a) && members.contains(b))
    }
}

pub fn conflict_graph(sys: &BeliefSystem) -> ConflictGraph {
    ConflictGraph::of(sys)
}

/// Per-node weight used by the extraction objective.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    Count,
    TotalCred,
    TotalConf,
}

impl Objective {
    pub fn weights(self, sys: &BeliefSystem) -> Vec<f64> {
        sys.nodes()
            .iter()
            .map(|n| match self {
                Objective::Count => 1.0,
                Objective::TotalCred => n.cred,
                Objective::TotalConf => n.conf,
            })
            .collect()
    }

    /// Score of a node set, summed in id order.
    pub fn score<'a, I>(self, sys: &BeliefSystem, set: I) -> Result<f64>
    where
        I: IntoIterator<Item = &'a NodeId>,
    {
        let weights = self.weights(sys);
        let mut idx = set
            .into_iter()
            .map(|id| sys.require_index(id))
            .collect::<Result<Vec<_>>>()?;
        idx.sort_unstable();
        idx.dedup();
        Ok(idx.iter().map(|&i| weights[i]).sum())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Exact,
    Heuristic,
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractOptions {
    /// In [`Mode::Auto`], the largest number of conflict vertices solved exactly.
    pub auto_exact_limit: usize,
}

impl Default for ExtractOptions {
    fn default() -> Self {
        ExtractOptions {
            auto_exact_limit: 40,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtractionResult {
    /// Sorted node ids of the extracted, locally coherent set.
    pub nodes: Vec<NodeId>,
    pub score: f64,
    /// True iff produced by the exact solver.
    pub exact: bool,
}

pub fn max_coherent_subgraph(
    sys: &BeliefSystem,
    objective: Objective,
    mode: Mode,
) -> Result<ExtractionResult> {
    max_coherent_subgraph_with(sys, objective, mode, &ExtractOptions::default())
}

pub fn max_coherent_subgraph_with(
    sys: &BeliefSystem,
    objective: Objective,
    mode: Mode,
    opts: &ExtractOptions,
) -> Result<ExtractionResult> {
    let weights = objective.weights(sys);
    if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
        return Err(Error::InvalidParameter(
            "objective weights must be finite and non-negative".into(),
        ));
    }
    let cg = ConflictGraph::of(sys);
    let conflict_vertices = (0..sys.node_count()).filter(|&i| cg.degree(i) > 0).count();
    let exact = match mode {
        Mode::Exact => true,
        Mode::Heuristic => false,
        Mode::Auto => conflict_vertices <= opts.auto_exact_limit,
    };

    let mut chosen: Vec<usize> = (0..sys.node_count())
        .filter(|&i| cg.degree(i) == 0)
        .collect();
    if exact {
        for comp in conflict_components(sys, &cg) {
            chosen.extend(ComponentSolver::new(&cg, &comp, &weights).solve());
        }
    } else {
        chosen.extend(greedy(&cg, &weights));
    }
    chosen.sort_unstable();
    Ok(ExtractionResult {
        score: chosen.iter().map(|&i| weights[i]).sum(),
        nodes: chosen.into_iter().map(|i| sys.id_at(i).clone()).collect(),
        exact,
    })
}

/// Connected components of the conflict graph with at least one conflict,
/// each sorted ascending.
fn conflict_components(sys: &BeliefSystem, cg: &ConflictGraph) -> Vec<Vec<usize>> {
    let n = sys.node_count();
    let mut uf = UnionFind::new(n);
    for i in 0..n {
        for &j in cg.neighbors(i) {
            uf.union(i, j);
        }
    }
    uf.groups(|i| cg.degree(i) > 0)
}

/// Exact maximum-weight independent set on one conflict component.
struct ComponentSolver<'a> {
    /// Component vertices, ascending global index.
    vertices: &'a [usize],
    weights: Vec<f64>,
    /// Closed neighborhoods in local indices.
    closed: Vec<BitSet>,
    /// Local vertices, highest degeneracy rank first.
    branch_order: Vec<usize>,
    eps: f64,
}

impl<'a> ComponentSolver<'a> {
    fn new(cg: &ConflictGraph, vertices: &'a [usize], weights: &[f64]) -> Self {
        let k = vertices.len();
        let local = |g: usize| vertices.binary_search(&g).expect("neighbor in component");
        let mut closed = vec![BitSet::new(k); k];
        for (li, &g) in vertices.iter().enumerate() {
            closed[li].insert(li);
            for &h in cg.neighbors(g) {
                closed[li].insert(local(h));
            }
        }
        let w: Vec<f64> = vertices.iter().map(|&g| weights[g]).collect();
        let total: f64 = w.iter().sum();
        let mut solver = ComponentSolver {
            vertices,
            weights: w,
            closed,
            branch_order: Vec::new(),
            eps: 1e-9 * total.max(1.0),
        };
        solver.branch_order = solver.degeneracy_order();
        solver
    }

    /// Vertices in reverse min-degree elimination order.
    fn degeneracy_order(&self) -> Vec<usize> {
        let k = self.vertices.len();
        let mut degree: Vec<usize> = self.closed.iter().map(|c| c.len() - 1).collect();
        let mut removed = vec![false; k];
        let mut order = Vec::with_capacity(k);
        for _ in 0..k {
            let v = (0..k)
                .filter(|&v| !removed[v])
                .min_by_key(|&v| (degree[v], v))
                .expect("vertices remain");
            removed[v] = true;
            order.push(v);
            for u in self.closed[v].iter() {
                if u != v && !removed[u] {
                    degree[u] -= 1;
                }
            }
        }
        order.reverse();
        order
    }

    /// Upper bound on the best independent subset of `cand`: greedily cover
    /// `cand` with cliques (heaviest vertex first) and sum each clique's
    /// heaviest weight.
    fn clique_cover_bound(&self, cand: &BitSet) -> f64 {
        let mut verts: Vec<usize> = cand.iter().collect();
        verts.sort_by(|&a, &b| self.weights[b].total_cmp(&self.weights[a]).then(a.cmp(&b)));
        let mut cliques: Vec<(BitSet, f64)> = Vec::new();
        for v in verts {
            // a clique accepts v when v is adjacent to all its members
            match cliques
                .iter_mut()
                .find(|(members, _)| members.and_not(&self.closed[v]).is_empty())
            {
                Some((members, _)) => members.insert(v),
                None => {
                    let mut members = BitSet::new(self.vertices.len());
                    members.insert(v);
                    cliques.push((members, self.weights[v]));
                }
            }
        }
        cliques.iter().map(|&(_, w)| w).sum()
    }

    fn solve(&self) -> Vec<usize> {
        let k = self.vertices.len();
        let mut all = BitSet::new(k);
        for v in 0..k {
            all.insert(v);
        }
        let mut best = f64::NEG_INFINITY;
        self.optimum(&all, 0.0, &mut best);
        let mut chosen = Vec::new();
        let found = self.preferred(&all, 0, 0.0, best, &mut chosen);
        debug_assert!(found, "an optimal set exists");
        chosen.into_iter().map(|li| self.vertices[li]).collect()
    }

    /// Finds the optimum value, branching in degeneracy order.
    fn optimum(&self, cand: &BitSet, value: f64, best: &mut f64) {
        if cand.is_empty() {
            if value > *best {
                *best = value;
            }
            return;
        }
        if value + self.clique_cover_bound(cand) <= *best + self.eps {
            return;
        }
        let v = *self
            .branch_order
            .iter()
            .find(|&&v| cand.contains(v))
            .expect("candidate set is non-empty");
        self.optimum(
            &cand.and_not(&self.closed[v]),
            value + self.weights[v],
            best,
        );
        let mut rest = cand.clone();
        rest.remove(v);
        self.optimum(&rest, value, best);
    }

    /// Include-first search in ascending vertex order; the first set reaching
    /// `target` is the tie-break winner among optimal sets.
    fn preferred(
        &self,
        cand: &BitSet,
        from: usize,
        value: f64,
        target: f64,
        chosen: &mut Vec<usize>,
    ) -> bool {
        let Some(v) = cand.iter().find(|&v| v >= from) else {
            return value >= target - self.eps;
        };
        if value + self.clique_cover_bound(cand) < target - self.eps {
            return false;
        }
        chosen.push(v);
        if self.preferred(
            &cand.and_not(&self.closed[v]),
            v + 1,
            value + self.weights[v],
            target,
            chosen,
        ) {
            return true;
        }
        chosen.pop();
        let mut rest = cand.clone();
        rest.remove(v);
        self.preferred(&rest, v + 1, value, target, chosen)
    }
}

/// Greedy weighted independent set over conflict vertices: repeatedly take the
/// vertex maximizing weight / (remaining degree + 1), smallest index on ties.
fn greedy(cg: &ConflictGraph, weights: &[f64]) -> Vec<usize> {
    let n = weights.len();
    let mut alive: Vec<bool> = (0..n).map(|i| cg.degree(i) > 0).collect();
    let mut degree: Vec<usize> = (0..n).map(|i| cg.degree(i)).collect();
    let mut chosen = Vec::new();
    loop {
        let mut pick: Option<(usize, f64)> = None;
        for v in (0..n).filter(|&v| alive[v]) {
            let ratio = weights[v] / (degree[v] as f64 + 1.0);
            if pick.is_none_or(|(_, r)| ratio > r) {
                pick = Some((v, ratio));
            }
        }
        let Some((v, _)) = pick else { break };
        chosen.push(v);
        let mut dead = vec![v];
        dead.extend(cg.neighbors(v).iter().copied().filter(|&u| alive[u]));
        for &d in &dead {
            alive[d] = false;
        }
        for &d in &dead {
            for &u in cg.neighbors(d) {
                if alive[u] {
                    degree[u] -= 1;
                }
            }
        }
    }
    chosen
}

/// Inclusion-maximal coherent node sets (maximal independent sets of the
/// conflict graph), sorted, at most `limit` of them.
pub fn enumerate_maximal_coherent(
    sys: &BeliefSystem,
    limit: usize,
) -> Result<Enumeration<Vec<NodeId>>> {
    if limit == 0 {
        return Err(Error::InvalidParameter("limit must be at least 1".into()));
    }
    let cg = ConflictGraph::of(sys);
    let n = sys.node_count();
    let free: Vec<usize> = (0..n).filter(|&i| cg.degree(i) == 0).collect();

    let mut closed = vec![BitSet::new(n); n];
    let mut pool = BitSet::new(n);
    for i in (0..n).filter(|&i| cg.degree(i) > 0) {
        pool.insert(i);
        closed[i].insert(i);
        for &j in cg.neighbors(i) {
            closed[i].insert(j);
        }
    }
    let mut mis = MisEnumerator {
        closed: &closed,
        limit,
        found: Vec::new(),
        truncated: false,
    };
    mis.expand(&mut Vec::new(), pool, BitSet::new(n));

    let mut sets: Vec<Vec<usize>> = mis
        .found
        .into_iter()
        .map(|mut s| {
            s.extend(&free);
            s.sort_unstable();
            s
        })
        .collect();
    sets.sort();
    Ok(Enumeration {
        items: sets
            .into_iter()
            .map(|s| s.into_iter().map(|i| sys.id_at(i).clone()).collect())
            .collect(),
        truncated: mis.truncated,
    })
}

/// Bron–Kerbosch with pivoting, run on the complement of the conflict graph.
struct MisEnumerator<'a> {
    closed: &'a [BitSet],
    limit: usize,
    found: Vec<Vec<usize>>,
    truncated: bool,
}

impl MisEnumerator<'_> {
    fn expand(&mut self, current: &mut Vec<usize>, mut cand: BitSet, mut excluded: BitSet) {
        if self.truncated {
            return;
        }
        if cand.is_empty() {
            if excluded.is_empty() {
                if self.found.len() == self.limit {
                    self.truncated = true;
                } else {
                    self.found.push(current.clone());
                }
            }
            return;
        }
        // pivot: the vertex compatible with the most candidates
        let pivot = cand
            .iter()
            .chain(excluded.iter())
            .max_by_key(|&u| (cand.and_not(&self.closed[u]).len(), std::cmp::Reverse(u)))
            .expect("candidates are non-empty");
        let branch: Vec<usize> = cand.and(&self.closed[pivot]).iter().collect();
        for v in branch {
            current.push(v);
            self.expand(
                current,
                cand.and_not(&self.closed[v]),
                excluded.and_not(&self.closed[v]),
            );
            current.pop();
            if self.truncated {
                return;
            }
            cand.remove(v);
            excluded.insert(v);
        }
    }
}

/// Weakly connected components of the support/qualification subgraph that
/// contain no contradiction endpoint. Each set sorted, ordered by smallest id.
pub fn coherent_islands(sys: &BeliefSystem) -> Vec<Vec<NodeId>> {
    let n = sys.node_count();
    let mut uf = UnionFind::new(n);
    let mut tense = vec![false; n];
    for (ei, e) in sys.edges().iter().enumerate() {
        let (s, t) = sys.endpoints(ei);
        if e.kind == EdgeKind::Contradiction {
            tense[s] = true;
            tense[t] = true;
        } else {
            uf.union(s, t);
        }
    }
    uf.groups(|_| true)
        .into_iter()
        .filter(|g| g.iter().all(|&i| !tense[i]))
        .map(|g| g.into_iter().map(|i| sys.id_at(i).clone()).collect())
        .collect()
}
