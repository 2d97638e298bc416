//! The canonical JSON document:
//!
//! ```json
//! {"nodes":[{"id":"a","text":"...","cred":0.9,"conf":0.2}],
//!  "edges":[{"from":"a","to":"b","kind":"support","weight":1.0}],
//!  "metadata":{"title":"..."}}
//! ```
//!
//! Output uses this fixed key order, nodes sorted by id, edges by
//! `(from, to)` and metadata keys sorted, so equal systems serialize to
//! identical bytes. On input `kind` defaults to `support`, `weight` to 1.0
//! and `cred`/`conf` to 0.5, each with a warning; `metadata` may be omitted.
//! Unknown keys are rejected.

use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::{Map, Value};

use super::{Location, ParseReport, Warning, DEFAULT_SCORE, DEFAULT_WEIGHT};
use crate::error::{Error, Result};
use crate::model::{BeliefNode, BeliefSystem, Edge, EdgeKind, NodeId};

#[derive(Serialize)]
struct Document<'a> {
    nodes: &'a [BeliefNode],
    edges: &'a [Edge],
    metadata: &'a BTreeMap<String, String>,
}

impl<'a> Document<'a> {
    fn of(sys: &'a BeliefSystem) -> Self {
        Document {
            nodes: sys.nodes(),
            edges: sys.edges(),
            metadata: sys.metadata(),
        }
    }
}

/// Compact canonical JSON.
pub fn to_json(sys: &BeliefSystem) -> String {
    serde_json::to_string(&Document::of(sys)).expect("document serializes")
}

/// Indented canonical JSON.
pub fn to_json_pretty(sys: &BeliefSystem) -> String {
    serde_json::to_string_pretty(&Document::of(sys)).expect("document serializes")
}

pub fn from_json(text: &str) -> Result<BeliefSystem> {
    parse_json(text).map(|r| r.system)
}

fn schema(path: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Schema {
        path: path.into(),
        message: message.into(),
    }
}

fn object<'v>(v: &'v Value, path: &str) -> Result<&'v Map<String, Value>> {
    v.as_object()
        .ok_or_else(|| schema(path, "expected an object"))
}

fn array<'v>(v: &'v Value, path: &str) -> Result<&'v Vec<Value>> {
    v.as_array()
        .ok_or_else(|| schema(path, "expected an array"))
}

fn reject_unknown(obj: &Map<String, Value>, path: &str, allowed: &[&str]) -> Result<()> {
    match obj.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(k) => Err(schema(format!("{path}.{k}"), "unknown key")),
        None => Ok(()),
    }
}

fn string(obj: &Map<String, Value>, path: &str, key: &str) -> Result<Option<String>> {
    match obj.get(key) {
        None => Ok(None),
        Some(Value::String(s)) => Ok(Some(s.clone())),
        Some(_) => Err(schema(format!("{path}.{key}"), "expected a string")),
    }
}

fn number(obj: &Map<String, Value>, path: &str, key: &str) -> Result<Option<f64>> {
    match obj.get(key) {
        None => Ok(None),
        Some(v) => v
            .as_f64()
            .map(Some)
            .ok_or_else(|| schema(format!("{path}.{key}"), "expected a number")),
    }
}

fn node_id(obj: &Map<String, Value>, path: &str, key: &str) -> Result<NodeId> {
    let s = string(obj, path, key)?.ok_or_else(|| schema(format!("{path}.{key}"), "missing"))?;
    NodeId::new(s).map_err(|_| schema(format!("{path}.{key}"), "node id must not be empty"))
}

/// Parses a JSON document, reporting applied defaults as warnings.
pub fn parse_json(text: &str) -> Result<ParseReport> {
    let doc: Value = serde_json::from_str(text).map_err(|e| {
        let message = e.to_string();
        let found = match message.rfind(" at line ") {
            Some(cut) => message[..cut].to_string(),
            None => message,
        };
        Error::Syntax {
            line: e.line(),
            column: e.column().max(1),
            expected: "well-formed JSON".into(),
            found,
        }
    })?;
    let root = object(&doc, "$")?;
    reject_unknown(root, "$", &["nodes", "edges", "metadata"])?;
    let mut warnings = Vec::new();
    let mut warn = |path: String, message: String| {
        warnings.push(Warning {
            location: Location::Path { path },
            message,
        })
    };

    let raw_nodes = array(
        root.get("nodes")
            .ok_or_else(|| schema("nodes", "missing"))?,
        "nodes",
    )?;
    let mut nodes = Vec::with_capacity(raw_nodes.len());
    for (i, v) in raw_nodes.iter().enumerate() {
        let path = format!("nodes[{i}]");
        let obj = object(v, &path)?;
        reject_unknown(obj, &path, &["id", "text", "cred", "conf"])?;
        let id = node_id(obj, &path, "id")?;
        let text =
            string(obj, &path, "text")?.ok_or_else(|| schema(format!("{path}.text"), "missing"))?;
        let mut score = |key: &str| -> Result<f64> {
            Ok(match number(obj, &path, key)? {
                Some(x) => x,
                None => {
                    warn(
                        format!("{path}.{key}"),
                        format!("belief `{id}`: {key} not given, defaulted to {DEFAULT_SCORE}"),
                    );
                    DEFAULT_SCORE
                }
            })
        };
        let cred = score("cred")?;
        let conf = score("conf")?;
        nodes.push(BeliefNode::new(id, text, cred, conf));
    }

    let raw_edges = array(
        root.get("edges")
            .ok_or_else(|| schema("edges", "missing"))?,
        "edges",
    )?;
    let mut edges = Vec::with_capacity(raw_edges.len());
    for (i, v) in raw_edges.iter().enumerate() {
        let path = format!("edges[{i}]");
        let obj = object(v, &path)?;
        reject_unknown(obj, &path, &["from", "to", "kind", "weight"])?;
        let source = node_id(obj, &path, "from")?;
        let target = node_id(obj, &path, "to")?;
        let kind = match string(obj, &path, "kind")? {
            Some(k) => EdgeKind::parse(&k).ok_or_else(|| {
                schema(
                    format!("{path}.kind"),
                    format!(
                        "unknown edge kind `{k}`, expected support, qualification or contradiction"
                    ),
                )
            })?,
            None => {
                warn(
                    format!("{path}.kind"),
                    format!("edge {source} -> {target}: kind not given, defaulted to support"),
                );
                EdgeKind::Support
            }
        };
        let weight = match number(obj, &path, "weight")? {
            Some(w) => w,
            None => {
                warn(
                    format!("{path}.weight"),
                    format!("edge {source} -> {target}: weight not given, defaulted to {DEFAULT_WEIGHT}"),
                );
                DEFAULT_WEIGHT
            }
        };
        edges.push(Edge::new(source, target, kind, weight));
    }

    let mut metadata = BTreeMap::new();
    if let Some(v) = root.get("metadata") {
        for (k, v) in object(v, "metadata")? {
            let s = v
                .as_str()
                .ok_or_else(|| schema(format!("metadata.{k}"), "expected a string"))?;
            metadata.insert(k.clone(), s.to_string());
        }
    }

    let system = BeliefSystem::build(nodes, edges, metadata)?;
    Ok(ParseReport { system, warnings })
}
