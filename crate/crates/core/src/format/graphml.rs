use std::fmt::Write as _;

use super::{fmt_score, DiagnosticsOverlay};
use crate::model::{BeliefSystem, EdgeKind};

fn xml_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

/// GraphML rendering carrying the same attributes as the DOT export.
pub fn to_graphml(sys: &BeliefSystem, overlay: Option<&DiagnosticsOverlay>) -> String {
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    out.push_str("<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n");
    for (id, target, name, ty) in [
        ("label", "node", "label", "string"),
        ("text", "node", "text", "string"),
        ("cred", "node", "cred", "double"),
        ("conf", "node", "conf", "double"),
        ("class", "node", "class", "string"),
        ("kind", "edge", "kind", "string"),
        ("weight", "edge", "weight", "double"),
        ("style", "edge", "style", "string"),
    ] {
        let _ = writeln!(
            out,
            "  <key id=\"{id}\" for=\"{target}\" attr.name=\"{name}\" attr.type=\"{ty}\"/>"
        );
    }
    out.push_str("  <graph id=\"belief\" edgedefault=\"directed\">\n");
    for n in sys.nodes() {
        let label = format!(
            "{}\ncred={} conf={}",
            n.id,
            fmt_score(n.cred),
            fmt_score(n.conf)
        );
        let _ = writeln!(out, "    <node id=\"{}\">", xml_escape(n.id.as_str()));
        let _ = writeln!(
            out,
            "      <data key=\"label\">{}</data>",
            xml_escape(&label)
        );
        let _ = writeln!(
            out,
            "      <data key=\"text\">{}</data>",
            xml_escape(&n.content)
        );
        let _ = writeln!(out, "      <data key=\"cred\">{}</data>", n.cred);
        let _ = writeln!(out, "      <data key=\"conf\">{}</data>", n.conf);
        if let Some(classes) = overlay.and_then(|o| o.classes_of(&n.id)) {
            let _ = writeln!(
                out,
                "      <data key=\"class\">{}</data>",
                xml_escape(&classes)
            );
        }
        out.push_str("    </node>\n");
    }
    for (i, e) in sys.edges().iter().enumerate() {
        let style = match e.kind {
            EdgeKind::Support => "solid",
            EdgeKind::Qualification => "dashed",
            EdgeKind::Contradiction => "bold",
        };
        let _ = writeln!(
            out,
            "    <edge id=\"e{i}\" source=\"{}\" target=\"{}\">",
            xml_escape(e.source.as_str()),
            xml_escape(e.target.as_str())
        );
        let _ = writeln!(out, "      <data key=\"kind\">{}</data>", e.kind);
        let _ = writeln!(out, "      <data key=\"weight\">{}</data>", e.weight);
        let _ = writeln!(out, "      <data key=\"style\">{style}</data>");
        out.push_str("    </edge>\n");
    }
    out.push_str("  </graph>\n</graphml>\n");
    out
}
