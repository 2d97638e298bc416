use std::fmt::Write as _;

use super::{fmt_score, DiagnosticsOverlay};
use crate::model::{BeliefSystem, EdgeKind};

pub(crate) fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => {}
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

/// Graphviz rendering. Support edges are solid, qualification dashed and
/// contradiction bold red; every edge also carries a `kind` attribute. The
/// overlay, if any, adds a `class` attribute and a fill color per node.
pub fn to_dot(sys: &BeliefSystem, overlay: Option<&DiagnosticsOverlay>) -> String {
    let mut out = String::from("digraph belief {\n");
    for n in sys.nodes() {
        let label = format!(
            "{}\ncred={} conf={}",
            n.id,
            fmt_score(n.cred),
            fmt_score(n.conf)
        );
        let _ = write!(
            out,
            "  {} [shape=box, label={}, tooltip={}, cred={}, conf={}",
            quote(n.id.as_str()),
            quote(&label),
            quote(&n.content),
            n.cred,
            n.conf
        );
        if let Some(classes) = overlay.and_then(|o| o.classes_of(&n.id)) {
            let fill = if classes.contains("undermined") || classes.contains("violation") {
                "#f4cccc"
            } else if classes.contains("divergent") {
                "#fff2cc"
            } else {
                "#eeeeee"
            };
            let _ = write!(
                out,
                ", class={}, style=filled, fillcolor=\"{fill}\"",
                quote(&classes)
            );
        }
        out.push_str("];\n");
    }
    for e in sys.edges() {
        let style = match e.kind {
            EdgeKind::Support => "style=solid",
            EdgeKind::Qualification => "style=dashed",
            EdgeKind::Contradiction => "style=bold, color=red, fontcolor=red",
        };
        let _ = writeln!(
            out,
            "  {} -> {} [kind={}, {style}, weight={}, label=\"{}\"];",
            quote(e.source.as_str()),
            quote(e.target.as_str()),
            e.kind,
            e.weight,
            e.weight
        );
    }
    out.push_str("}\n");
    out
}
