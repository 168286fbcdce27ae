use std::collections::HashMap;
use std::fmt::Write as _;

use abac_graph::dsl::{Diagnostic, DiagnosticKind, ModelDocument};
use abac_graph::{
    AccessQuery, CombiningAlgorithm, ConditionExpr, ConditionType, Error, EvaluationResult, Model, NodeRef,
    PolicyMatch,
};

fn quoted(name: &str) -> String {
    let bare = name.chars().next().is_some_and(|c| c.is_alphabetic() || c == '_')
        && name.chars().all(|c| c.is_alphanumeric() || c == '_');
    if bare {
        name.to_owned()
    } else {
        format!("{name:?}")
    }
}

fn render(model: &Model, expr: &ConditionExpr) -> String {
    match expr {
        ConditionExpr::Ref(n) => quoted(model.graph().name_of(*n).unwrap_or("?")),
        ConditionExpr::Not(inner) => format!("not {}", render(model, inner)),
        ConditionExpr::And(xs) | ConditionExpr::Or(xs) => {
            let op = if matches!(expr, ConditionExpr::And(_)) {
                " and "
            } else {
                " or "
            };
            let parts: Vec<String> = xs.iter().map(|x| render(model, x)).collect();
            format!("({})", parts.join(op))
        }
    }
}

fn hops(n: usize) -> String {
    if n == 1 {
        "1 hop".to_owned()
    } else {
        format!("{n} hops")
    }
}

/// Leaf reachability for one condition, e.g. `Doctor (1 hop)`.
fn describe(model: &Model, expr: &ConditionExpr, closure: &HashMap<NodeRef, usize>) -> String {
    let reached: Vec<String> = expr
        .leaves()
        .into_iter()
        .filter_map(|leaf| closure.get(&leaf).map(|h| (leaf, *h)))
        .map(|(leaf, h)| {
            format!(
                "{} {}",
                quoted(model.graph().name_of(leaf).unwrap_or("?")),
                hops(h)
            )
        })
        .collect();
    let text = render(model, expr);
    match (expr, reached.is_empty()) {
        (ConditionExpr::Ref(_), false) => format!("{text} ({})", hops(closure[&expr.leaves()[0]])),
        (_, true) => format!("{text} (no leaf reached)"),
        (_, false) => format!("{text} (reached {})", reached.join(", ")),
    }
}

fn names(model: &Model, matches: &[PolicyMatch]) -> String {
    if matches.is_empty() {
        return "none".to_owned();
    }
    let names: Vec<&str> = matches
        .iter()
        .map(|m| model.policy(m.policy).map_or("?", |p| p.name.as_str()))
        .collect();
    names.join(", ")
}

pub fn explain(model: &Model, q: &AccessQuery, result: &EvaluationResult) -> abac_graph::Result<String> {
    let g = model.graph();
    let depth = model.attr_depth();
    let name = |n: NodeRef| g.name_of(n).unwrap_or("?");
    let mut out = String::new();
    let _ = writeln!(
        out,
        "query: subject {}, action {}, object {}",
        name(q.sub),
        name(q.act),
        name(q.obj)
    );
    let _ = writeln!(out, "attribute depth {depth}, algorithm {}", result.algorithm);

    if result.matches.is_empty() {
        let _ = writeln!(out, "no matching policies; default Deny");
        let _ = writeln!(out, "decision: {}", result.decision);
        return Ok(out);
    }

    let mut closures = HashMap::new();
    for slot in ConditionType::ALL {
        closures.insert(slot, g.attribute_closure(q.primitive(slot), depth)?);
    }

    for m in &result.matches {
        let policy = model
            .policy(m.policy)
            .ok_or_else(|| Error::UnknownPolicy(format!("{:?}", m.policy)))?;
        let _ = writeln!(
            out,
            "match {} ({}, score {})",
            policy.name, policy.decision, policy.score
        );
        for slot in ConditionType::ALL {
            let conds: Vec<String> = policy
                .conditions
                .get(slot)
                .iter()
                .map(|c| describe(model, c, &closures[&slot]))
                .collect();
            let _ = writeln!(
                out,
                "  {}: {}; length {}",
                slot.keyword(),
                conds.join("; "),
                m.len(slot)
            );
        }
        let _ = writeln!(out, "  total length {}", m.total_len);
    }

    match result.algorithm {
        CombiningAlgorithm::FirstApplicable => {
            let _ = writeln!(out, "first applicable: {}", names(model, &result.considered));
        }
        CombiningAlgorithm::MaxScoreDenyOverrides => {
            let top = result.considered.first().map_or(0, |m| m.score);
            let _ = writeln!(
                out,
                "highest score {top} keeps {}",
                names(model, &result.considered)
            );
        }
        CombiningAlgorithm::ShortestPathDenyOverrides => {
            let min = result.considered.first().map_or(0, |m| m.total_len);
            let _ = writeln!(
                out,
                "shortest length {min} keeps {}",
                names(model, &result.considered)
            );
        }
        CombiningAlgorithm::DenyOverrides | CombiningAlgorithm::PermitOverrides => {}
    }
    let _ = writeln!(out, "deciding: {}", names(model, &result.deciding));
    let _ = writeln!(out, "decision: {}", result.decision);
    Ok(out)
}

pub struct Validation {
    pub diagnostics: Vec<Diagnostic>,
    pub text: String,
    pub code: u8,
}

fn is_policy_issue(d: &Diagnostic) -> bool {
    matches!(
        d.kind,
        DiagnosticKind::Model(
            Error::MissingConditionType { .. }
                | Error::DanglingConditionRef { .. }
                | Error::DuplicatePolicyName(_)
                | Error::ConditionOnPolicyNode { .. }
                | Error::DegenerateCompound(_)
        )
    )
}

/// Structural problems (names, edges, cycles, depth) give exit 2; a model
/// whose only problems are invalid policies gives exit 1.
pub fn validate(doc: &ModelDocument, depth: Option<usize>) -> Validation {
    let (mut model, diagnostics) = doc.build();
    let structural = diagnostics.iter().any(|d| !is_policy_issue(d));
    if structural {
        return Validation {
            diagnostics,
            text: String::new(),
            code: 2,
        };
    }
    if let Err(err) = model.freeze() {
        let position = match &err {
            Error::AttributeCycle(name) => doc.nodes.iter().find(|n| &n.name == name).map(|n| n.position),
            _ => None,
        };
        let diag = Diagnostic {
            position: position.unwrap_or_default(),
            kind: DiagnosticKind::Model(err),
        };
        return Validation {
            diagnostics: vec![diag],
            text: String::new(),
            code: 2,
        };
    }
    if let Some(depth) = depth {
        if let Err(err) = model.set_attr_depth(depth) {
            let diag = Diagnostic {
                position: Default::default(),
                kind: DiagnosticKind::Model(err),
            };
            return Validation {
                diagnostics: vec![diag],
                text: String::new(),
                code: 2,
            };
        }
    }

    let mut text = String::new();
    let mut created = model.policies().iter().map(|(_, p)| p.name.as_str()).peekable();
    let mut invalid = 0;
    for decl in &doc.policies {
        if created.peek() == Some(&decl.name.as_str()) {
            created.next();
            let _ = writeln!(text, "{}: valid", decl.name);
        } else {
            invalid += 1;
            let _ = writeln!(text, "{}: invalid", decl.name);
        }
    }
    let total = doc.policies.len();
    let noun = if total == 1 { "policy" } else { "policies" };
    if invalid == 0 {
        let _ = writeln!(
            text,
            "{total} {noun} valid; attribute depth {}",
            model.attr_depth()
        );
    } else {
        let _ = writeln!(
            text,
            "{invalid} of {total} {noun} invalid; attribute depth {}",
            model.attr_depth()
        );
    }
    Validation {
        diagnostics,
        text,
        code: u8::from(invalid > 0),
    }
}
