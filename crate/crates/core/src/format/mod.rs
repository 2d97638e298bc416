//! Text formats: the BGL authoring language, the canonical JSON document, and
//! DOT/GraphML exports.

mod bgl;
mod dot;
mod graphml;
mod json;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::diagnostics::{DivergenceClass, GraphReport};
use crate::model::{BeliefSystem, NodeId};

pub use bgl::{is_ident, parse_bgl, render_bgl};
pub use dot::to_dot;
pub use graphml::to_graphml;
pub use json::{from_json, parse_json, to_json, to_json_pretty};

/// Where a parse warning points.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Location {
    /// 1-based position in a text document.
    Text { line: usize, column: usize },
    /// Path inside a JSON document, e.g. `edges[2].weight`.
    Path { path: String },
}

impl std::fmt::Display for Location {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Location::Text { line, column } => write!(f, "{line}:{column}"),
            Location::Path { path } => f.write_str(path),
        }
    }
}

/// One default applied while parsing.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Warning {
    #[serde(flatten)]
    pub location: Location,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParseReport {
    pub system: BeliefSystem,
    /// In source order.
    pub warnings: Vec<Warning>,
}

/// Input document format.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputFormat {
    Bgl,
    Json,
}

impl InputFormat {
    /// `.json` files are JSON; everything else is read as BGL.
    pub fn from_path(path: &std::path::Path) -> InputFormat {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("json") => InputFormat::Json,
            _ => InputFormat::Bgl,
        }
    }

    pub fn parse(self, text: &str) -> crate::Result<ParseReport> {
        match self {
            InputFormat::Bgl => parse_bgl(text),
            InputFormat::Json => parse_json(text),
        }
    }
}

pub const DEFAULT_SCORE: f64 = 0.5;
pub const DEFAULT_WEIGHT: f64 = 1.0;

/// Per-node style classes for exports, typically derived from a [`GraphReport`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DiagnosticsOverlay {
    pub classes: BTreeMap<NodeId, BTreeSet<String>>,
}

impl DiagnosticsOverlay {
    /// Classes: `undermined`, `undersupported`, `tension`, `divergent`,
    /// `credible-unsupported`, `dubious-reinforced`, `violation`.
    pub fn from_report(report: &GraphReport) -> Self {
        let mut overlay = DiagnosticsOverlay::default();
        for id in &report.coherence.undermined {
            overlay.add(id, "undermined");
        }
        for u in &report.coherence.undersupported {
            overlay.add(&u.node, "undersupported");
        }
        for zone in &report.coherence.tension_zones {
            for id in zone {
                overlay.add(id, "tension");
            }
        }
        for e in &report.divergence_assigned {
            match e.class {
                DivergenceClass::CredibleUnsupported => {
                    overlay.add(&e.node, "divergent");
                    overlay.add(&e.node, "credible-unsupported");
                }
                DivergenceClass::DubiousReinforced => {
                    overlay.add(&e.node, "divergent");
                    overlay.add(&e.node, "dubious-reinforced");
                }
                _ => {}
            }
        }
        for v in &report.consistency_violations {
            overlay.add(v.node(), "violation");
        }
        overlay
    }

    pub fn add(&mut self, id: &NodeId, class: &str) {
        self.classes
            .entry(id.clone())
            .or_default()
            .insert(class.to_string());
    }

    pub(crate) fn classes_of(&self, id: &NodeId) -> Option<String> {
        self.classes
            .get(id)
            .filter(|c| !c.is_empty())
            .map(|c| c.iter().cloned().collect::<Vec<_>>().join(" "))
    }
}

pub(crate) fn fmt_score(x: f64) -> String {
    format!("{x:.2}")
}
