use std::fmt::Write;

use super::InvalidDocument;
use crate::prov::*;

/// Renders a valid document as a Graphviz digraph.
///
/// Node statements are sorted by id, edges follow relation order, and each
/// activity's attributes hang off it in a note node joined by a dashed edge.
pub fn to_dot(doc: &ProvDocument) -> Result<String, InvalidDocument> {
    let violations = validate(doc);
    if !violations.is_empty() {
        return Err(InvalidDocument(violations));
    }

    let mut nodes: Vec<(String, String)> = Vec::new();
    for e in doc.entities.values() {
        let mut attrs = format!("shape=\"ellipse\", label=\"{}\"", escape(&e.id.local));
        if e.logged_by == LoggedBy::User {
            attrs.push_str(", yprov_logged=\"user\"");
        }
        nodes.push((e.id.to_string(), attrs));
    }
    for a in doc.activities.values() {
        nodes.push((
            a.id.to_string(),
            format!("shape=\"box\", label=\"{}\"", escape(&a.id.local)),
        ));
        let mut lines = vec![
            format!("{ATTR_COMMAND}: {}", a.command),
            format!("{ATTR_START_TIME}: {}", a.start_time),
            format!("{ATTR_END_TIME}: {}", a.end_time),
            format!("{ATTR_EXIT_STATUS}: {}", a.exit_status),
        ];
        if let Some(c) = &a.git_commit {
            lines.push(format!("{ATTR_GIT_COMMIT}: {c}"));
        }
        lines.extend(a.extra_attributes.iter().map(|(k, v)| format!("{k}: {v}")));
        let label: String = lines.iter().map(|l| format!("{}\\l", escape(l))).collect();
        nodes.push((note_id(&a.id), format!("shape=\"note\", label=\"{label}\"")));
    }
    for g in doc.agents.values() {
        let label = format!(
            "{}\\n{}@{}",
            escape(&g.id.local),
            escape(&g.username),
            escape(&g.hostname)
        );
        nodes.push((g.id.to_string(), format!("shape=\"house\", label=\"{label}\"")));
    }
    nodes.sort();

    let mut out = String::from("digraph provenance {\n  rankdir=\"LR\";\n");
    for (id, attrs) in &nodes {
        let _ = writeln!(out, "  \"{}\" [{attrs}];", escape(id));
    }
    for r in &doc.relations {
        let _ = writeln!(
            out,
            "  \"{}\" -> \"{}\" [label=\"{}\"];",
            escape(&r.subject.to_string()),
            escape(&r.object.to_string()),
            r.kind.section()
        );
    }
    for a in doc.activities.values() {
        let _ = writeln!(
            out,
            "  \"{}\" -> \"{}\" [style=\"dashed\", arrowhead=\"none\"];",
            escape(&a.id.to_string()),
            escape(&note_id(&a.id))
        );
    }
    out.push_str("}\n");
    Ok(out)
}

fn note_id(activity: &QualifiedName) -> String {
    format!("{activity}#attrs")
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            _ => out.push(c),
        }
    }
    out
}
