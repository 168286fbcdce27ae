use std::fmt::Write;

use crate::graph::Scalar;
use crate::policy::{ConditionType, Decision};

use super::document::{ExprDecl, ModelDocument};

const KEYWORDS: [&str; 14] = [
    "node", "edge", "policy", "permit", "deny", "score", "subject", "action", "object", "not", "and", "or",
    "true", "false",
];

fn is_bare(name: &str) -> bool {
    let mut chars = name.chars();
    chars.next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
        && !KEYWORDS.contains(&name)
}

fn quoted(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

pub(crate) fn name(s: &str) -> String {
    if is_bare(s) {
        s.to_owned()
    } else {
        quoted(s)
    }
}

fn scalar(v: &Scalar) -> String {
    match v {
        Scalar::Str(s) => quoted(s),
        Scalar::Int(i) => i.to_string(),
        Scalar::Decimal(d) => format!("{d:?}"),
        Scalar::Bool(b) => b.to_string(),
    }
}

fn expr(e: &ExprDecl) -> String {
    match e {
        ExprDecl::Name(n) => name(n),
        ExprDecl::Not(inner) => format!("not {}", expr(inner)),
        ExprDecl::And(xs) | ExprDecl::Or(xs) => {
            let op = if matches!(e, ExprDecl::And(_)) {
                " and "
            } else {
                " or "
            };
            let parts: Vec<String> = xs.iter().map(expr).collect();
            format!("({})", parts.join(op))
        }
    }
}

/// Canonical text of a document.
///
/// Nodes are sorted by name and edges by `(from, type, to)`. Policies keep
/// their order, which is their sequence order. Within a slot, conditions are
/// sorted and deduplicated.
pub fn serialize_model(doc: &ModelDocument) -> String {
    let mut sections: Vec<String> = Vec::new();

    let mut nodes: Vec<_> = doc.nodes.iter().collect();
    nodes.sort_by(|a, b| a.name.cmp(&b.name));
    if !nodes.is_empty() {
        let mut s = String::new();
        for n in nodes {
            s.push_str("node ");
            s.push_str(&name(&n.name));
            if !n.labels.is_empty() {
                let _ = write!(s, ": {}", n.labels.join(", "));
            }
            if !n.properties.is_empty() {
                let props: Vec<String> = n
                    .properties
                    .iter()
                    .map(|(k, v)| format!("{k} = {}", scalar(v)))
                    .collect();
                let _ = write!(s, " {{ {} }}", props.join(", "));
            }
            s.push('\n');
        }
        sections.push(s);
    }

    let mut edges: Vec<_> = doc.edges.iter().map(|e| (&e.from, &e.rel_type, &e.to)).collect();
    edges.sort();
    edges.dedup();
    if !edges.is_empty() {
        let mut s = String::new();
        for (from, rel, to) in edges {
            let _ = writeln!(s, "edge {} -[{rel}]-> {}", name(from), name(to));
        }
        sections.push(s);
    }

    for p in &doc.policies {
        let mut s = format!(
            "policy {} {}",
            name(&p.name),
            match p.decision {
                Decision::Permit => "permit",
                Decision::Deny => "deny",
            }
        );
        if let Some(score) = p.score {
            let _ = write!(s, " score {score}");
        }
        s.push_str(" {\n");
        for slot in ConditionType::ALL {
            let mut exprs: Vec<String> = p.slot(slot).map(expr).collect();
            if exprs.is_empty() {
                continue;
            }
            exprs.sort();
            exprs.dedup();
            let _ = writeln!(s, "    {}: {};", slot.keyword(), exprs.join("; "));
        }
        s.push_str("}\n");
        sections.push(s);
    }

    sections.join("\n")
}
