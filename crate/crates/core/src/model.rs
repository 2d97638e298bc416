//! The belief-system data model.
//!
//! A [`BeliefSystem`] is a finite set of beliefs (nodes) joined by typed,
//! weighted, directed epistemic relations (edges). Every node carries two
//! independent scores in `[0, 1]`: a credibility reflecting trust in the
//! belief's source, and a confidence reflecting its structural support.
//!
//! Systems are validated once, at construction, and are immutable afterwards.
//! Nodes are stored sorted by id and edges sorted by `(source, target)`, so
//! every accessor yields a deterministic order. Internally each node also has
//! a dense index (its position in that sorted order) which the analysis
//! modules use for adjacency.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, ScoreField};

/// Identifier of a belief. Non-empty and case-sensitive.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct NodeId(String);

impl NodeId {
    pub fn new(id: impl Into<String>) -> Result<Self> {
        let id = id.into();
        if id.is_empty() {
            return Err(Error::EmptyNodeId);
        }
        Ok(NodeId(id))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for NodeId {
    type Error = Error;

    fn try_from(value: String) -> Result<Self> {
        NodeId::new(value)
    }
}

impl From<NodeId> for String {
    fn from(id: NodeId) -> String {
        id.0
    }
}

impl FromStr for NodeId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        NodeId::new(s)
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl AsRef<str> for NodeId {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

impl std::borrow::Borrow<str> for NodeId {
    fn borrow(&self) -> &str {
        &self.0
    }
}

/// The kind of epistemic relation an edge encodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeKind {
    /// The source justifies or reinforces the target.
    Support,
    /// The source contextualizes or nuances the target.
    Qualification,
    /// The source undermines or negates the target.
    Contradiction,
}

impl EdgeKind {
    pub const ALL: [EdgeKind; 3] = [
        EdgeKind::Support,
        EdgeKind::Qualification,
        EdgeKind::Contradiction,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EdgeKind::Support => "support",
            EdgeKind::Qualification => "qualification",
            EdgeKind::Contradiction => "contradiction",
        }
    }

    pub fn parse(s: &str) -> Option<EdgeKind> {
        match s {
            "support" => Some(EdgeKind::Support),
            "qualification" => Some(EdgeKind::Qualification),
            "contradiction" => Some(EdgeKind::Contradiction),
            _ => None,
        }
    }
}

impl fmt::Display for EdgeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One belief with its propositional content and its two scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeliefNode {
    pub id: NodeId,
    /// Opaque content, stored verbatim.
    #[serde(rename = "text")]
    pub content: String,
    pub cred: f64,
    pub conf: f64,
}

impl BeliefNode {
    pub fn new(id: NodeId, content: impl Into<String>, cred: f64, conf: f64) -> Self {
        BeliefNode {
            id,
            content: content.into(),
            cred,
            conf,
        }
    }
}

/// A directed epistemic relation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    #[serde(rename = "from")]
    pub source: NodeId,
    #[serde(rename = "to")]
    pub target: NodeId,
    pub kind: EdgeKind,
    pub weight: f64,
}

impl Edge {
    pub fn new(source: NodeId, target: NodeId, kind: EdgeKind, weight: f64) -> Self {
        Edge {
            source,
            target,
            kind,
            weight,
        }
    }
}

/// Edge direction relative to a queried node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    In,
    Out,
}

/// Which input item a validation error refers to (index into the input lists).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Item {
    Node(usize),
    Edge(usize),
}

/// A validated, immutable belief system.
#[derive(Debug, Clone, Default)]
pub struct BeliefSystem {
    nodes: Vec<BeliefNode>,
    index: HashMap<NodeId, usize>,
    edges: Vec<Edge>,
    ends: Vec<(usize, usize)>,
    outgoing: Vec<Vec<usize>>,
    incoming: Vec<Vec<usize>>,
    metadata: BTreeMap<String, String>,
}

impl PartialEq for BeliefSystem {
    fn eq(&self, other: &Self) -> bool {
        self.nodes == other.nodes && self.edges == other.edges && self.metadata == other.metadata
    }
}

fn check_score(node: &BeliefNode, field: ScoreField, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::ScoreOutOfRange {
            node: node.id.clone(),
            field,
            value,
        })
    }
}

/// Validates and builds a belief system from node and edge lists.
///
/// Validation stops at the first error, checking nodes in input order and
/// then edges in input order.
pub fn build_system(nodes: Vec<BeliefNode>, edges: Vec<Edge>) -> Result<BeliefSystem> {
    BeliefSystem::build(nodes, edges, BTreeMap::new())
}

impl BeliefSystem {
    /// Like [`build_system`], with a metadata map attached.
    pub fn build(
        nodes: Vec<BeliefNode>,
        edges: Vec<Edge>,
        metadata: BTreeMap<String, String>,
    ) -> Result<BeliefSystem> {
        Self::build_located(nodes, edges, metadata).map_err(|(e, _)| e)
    }

    pub(crate) fn build_located(
        mut nodes: Vec<BeliefNode>,
        mut edges: Vec<Edge>,
        metadata: BTreeMap<String, String>,
    ) -> std::result::Result<BeliefSystem, (Error, Item)> {
        let mut seen = BTreeSet::new();
        for (i, node) in nodes.iter().enumerate() {
            let located = |e| (e, Item::Node(i));
            check_score(node, ScoreField::Cred, node.cred).map_err(located)?;
            check_score(node, ScoreField::Conf, node.conf).map_err(located)?;
            if !seen.insert(&node.id) {
                return Err(located(Error::DuplicateNodeId(node.id.clone())));
            }
        }

        let mut pairs = BTreeSet::new();
        for (i, edge) in edges.iter().enumerate() {
            let located = |e| (e, Item::Edge(i));
            if edge.source == edge.target {
                return Err(located(Error::SelfLoop(edge.source.clone())));
            }
            if !(edge.weight.is_finite() && edge.weight > 0.0) {
                return Err(located(Error::NonPositiveWeight {
                    from: edge.source.clone(),
                    to: edge.target.clone(),
                    weight: edge.weight,
                }));
            }
            for end in [&edge.source, &edge.target] {
                if !seen.contains(end) {
                    return Err(located(Error::DanglingEdgeEndpoint {
                        from: edge.source.clone(),
                        to: edge.target.clone(),
                        missing: end.clone(),
                    }));
                }
            }
            if !pairs.insert((&edge.source, &edge.target)) {
                return Err(located(Error::DuplicateEdge {
                    from: edge.source.clone(),
                    to: edge.target.clone(),
                }));
            }
        }
        drop(pairs);
        drop(seen);

        nodes.sort_by(|a, b| a.id.cmp(&b.id));
        edges.sort_by(|a, b| (&a.source, &a.target).cmp(&(&b.source, &b.target)));
        Ok(Self::assemble(nodes, edges, metadata))
    }

    /// Builds the index structures from already validated, sorted lists.
    fn assemble(
        nodes: Vec<BeliefNode>,
        edges: Vec<Edge>,
        metadata: BTreeMap<String, String>,
    ) -> BeliefSystem {
        let index: HashMap<NodeId, usize> = nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (n.id.clone(), i))
            .collect();
        let mut outgoing = vec![Vec::new(); nodes.len()];
        let mut incoming = vec![Vec::new(); nodes.len()];
        let mut ends = Vec::with_capacity(edges.len());
        for (ei, e) in edges.iter().enumerate() {
            let (s, t) = (index[&e.source], index[&e.target]);
            ends.push((s, t));
            // edges are sorted by (source, target), so per-source lists come out sorted by target
            outgoing[s].push(ei);
            incoming[t].push(ei);
        }
        // per-target lists are in edge order, i.e. already sorted by source
        BeliefSystem {
            nodes,
            index,
            edges,
            ends,
            outgoing,
            incoming,
            metadata,
        }
    }

    pub fn empty() -> BeliefSystem {
        BeliefSystem::default()
    }

    /// Nodes sorted by id.
    pub fn nodes(&self) -> &[BeliefNode] {
        &self.nodes
    }

    /// Edges sorted by `(source, target)`.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn metadata(&self) -> &BTreeMap<String, String> {
        &self.metadata
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn contains(&self, id: &NodeId) -> bool {
        self.index.contains_key(id)
    }

    pub fn node(&self, id: &NodeId) -> Option<&BeliefNode> {
        self.index.get(id).map(|&i| &self.nodes[i])
    }

    /// Dense index of a node (its position in [`nodes`](Self::nodes)).
    pub fn index_of(&self, id: &NodeId) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub(crate) fn require_index(&self, id: &NodeId) -> Result<usize> {
        self.index_of(id)
            .ok_or_else(|| Error::UnknownNode(id.clone()))
    }

    pub fn id_at(&self, index: usize) -> &NodeId {
        &self.nodes[index].id
    }

    /// `(source, target)` dense indices of edge `edge`.
    pub fn endpoints(&self, edge: usize) -> (usize, usize) {
        self.ends[edge]
    }

    /// Indices of edges leaving node `index`, sorted by target.
    pub fn out_edges(&self, index: usize) -> &[usize] {
        &self.outgoing[index]
    }

    /// Indices of edges entering node `index`, sorted by source.
    pub fn in_edges(&self, index: usize) -> &[usize] {
        &self.incoming[index]
    }

    pub fn edge_between(&self, source: &NodeId, target: &NodeId) -> Option<&Edge> {
        let s = self.index_of(source)?;
        let t = self.index_of(target)?;
        self.outgoing[s]
            .iter()
            .copied()
            .find(|&ei| self.ends[ei].1 == t)
            .map(|ei| &self.edges[ei])
    }

    /// Edges incident to `id` in the given direction, optionally restricted to one kind.
    pub fn neighbors(
        &self,
        id: &NodeId,
        direction: Direction,
        kind: Option<EdgeKind>,
    ) -> Result<Vec<&Edge>> {
        let i = self.require_index(id)?;
        let list = match direction {
            Direction::In => &self.incoming[i],
            Direction::Out => &self.outgoing[i],
        };
        Ok(list
            .iter()
            .map(|&ei| &self.edges[ei])
            .filter(|e| kind.is_none_or(|k| e.kind == k))
            .collect())
    }

    /// The subsystem induced by `subset`: those nodes and every edge with both
    /// endpoints among them. Scores and metadata are preserved.
    pub fn induced_subgraph<'a, I>(&self, subset: I) -> Result<BeliefSystem>
    where
        I: IntoIterator<Item = &'a NodeId>,
    {
        let mut keep = vec![false; self.nodes.len()];
        for id in subset {
            keep[self.require_index(id)?] = true;
        }
        Ok(self.induced_by_mask(&keep))
    }

    pub(crate) fn induced_by_mask(&self, keep: &[bool]) -> BeliefSystem {
        let nodes = self
            .nodes
            .iter()
            .zip(keep)
            .filter(|(_, &k)| k)
            .map(|(n, _)| n.clone())
            .collect();
        let edges = self
            .edges
            .iter()
            .zip(&self.ends)
            .filter(|(_, &(s, t))| keep[s] && keep[t])
            .map(|(e, _)| e.clone())
            .collect();
        Self::assemble(nodes, edges, self.metadata.clone())
    }

    /// A copy of this system with confidence scores replaced from `conf`.
    /// Nodes absent from the map keep their current confidence.
    pub fn with_confidences(&self, conf: &BTreeMap<NodeId, f64>) -> Result<BeliefSystem> {
        let nodes = self
            .nodes
            .iter()
            .map(|n| {
                let mut n = n.clone();
                if let Some(&c) = conf.get(&n.id) {
                    n.conf = c;
                }
                n
            })
            .collect();
        BeliefSystem::build(nodes, self.edges.clone(), self.metadata.clone())
    }

    /// Number of edges of each kind, in [`EdgeKind::ALL`] order.
    pub fn kind_counts(&self) -> [usize; 3] {
        let mut counts = [0; 3];
        for e in &self.edges {
            counts[e.kind as usize] += 1;
        }
        counts
    }
}
