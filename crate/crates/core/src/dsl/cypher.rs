//! Neo4j Cypher export: data scripts, policy scripts and decision queries.

use std::collections::HashMap;
use std::fmt::Write;

use crate::combiner::CombiningAlgorithm;
use crate::error::{Error, Result};
use crate::graph::Scalar;
use crate::policy::ConditionType;

use super::document::{ExprDecl, ModelDocument};

fn literal(s: &str) -> String {
    format!("'{}'", s.replace('\\', "\\\\").replace('\'', "''"))
}

fn symbol(s: &str) -> String {
    let mut chars = s.chars();
    let plain = chars.next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_');
    if plain {
        s.to_owned()
    } else {
        format!("`{}`", s.replace('`', "``"))
    }
}

fn value(v: &Scalar) -> String {
    match v {
        Scalar::Str(s) => literal(s),
        Scalar::Int(i) => i.to_string(),
        Scalar::Decimal(d) => format!("{d:?}"),
        Scalar::Bool(b) => b.to_string(),
    }
}

fn by_name(name: &str) -> String {
    format!("{{name:{}}}", literal(name))
}

/// One `create` per node and one `merge` per edge, in document order.
pub fn emit_cypher_data(doc: &ModelDocument) -> String {
    let mut out = String::new();
    for n in &doc.nodes {
        let labels: String = n.labels.iter().map(|l| format!(":{}", symbol(l))).collect();
        let mut props = vec![format!("name:{}", literal(&n.name))];
        props.extend(
            n.properties
                .iter()
                .map(|(k, v)| format!("{}:{}", symbol(k), value(v))),
        );
        let _ = writeln!(out, "create ({labels} {{{}}});", props.join(", "));
    }
    for e in &doc.edges {
        let _ = writeln!(
            out,
            "match (a {}), (b {}) merge (a)-[:{}]->(b);",
            by_name(&e.from),
            by_name(&e.to),
            symbol(&e.rel_type)
        );
    }
    out
}

struct PolicyScript {
    matches: Vec<String>,
    vars: HashMap<String, String>,
    body: Vec<String>,
    helpers: usize,
}

impl PolicyScript {
    fn condition_var(&mut self, name: &str) -> String {
        if let Some(v) = self.vars.get(name) {
            return v.clone();
        }
        let v = format!("c{}", self.vars.len() + 1);
        self.matches.push(format!("({v} {})", by_name(name)));
        self.vars.insert(name.to_owned(), v.clone());
        v
    }

    /// Connects `expr` into `target` with condition edges of `rel`. Compound
    /// expressions become NOT/AND/OR helper nodes.
    fn connect(&mut self, expr: &ExprDecl, rel: &str, target: &str) {
        let (label, children): (&str, Vec<&ExprDecl>) = match expr {
            ExprDecl::Name(n) => {
                let v = self.condition_var(n);
                self.body.push(format!("merge ({target})<-[:{rel}]-({v})"));
                return;
            }
            ExprDecl::Not(inner) => ("NOT", vec![&**inner]),
            ExprDecl::And(xs) => ("AND", xs.iter().collect()),
            ExprDecl::Or(xs) => ("OR", xs.iter().collect()),
        };
        self.helpers += 1;
        let helper = format!("n{}", self.helpers);
        self.body.push(format!("create ({helper}:{label})"));
        self.body.push(format!("merge ({target})<-[:{rel}]-({helper})"));
        for child in children {
            self.connect(child, rel, &helper);
        }
    }
}

/// One statement per policy: match the condition nodes, create the policy
/// node, merge the condition edges.
pub fn emit_cypher_policies(doc: &ModelDocument) -> String {
    let mut out = String::new();
    for p in &doc.policies {
        let mut script = PolicyScript {
            matches: Vec::new(),
            vars: HashMap::new(),
            body: Vec::new(),
            helpers: 0,
        };
        for slot in ConditionType::ALL {
            for expr in p.slot(slot) {
                script.connect(expr, slot.rel_type(), "pol");
            }
        }
        let _ = writeln!(out, "// {} - {}", p.name, p.decision);
        if !script.matches.is_empty() {
            let _ = writeln!(out, "match {}", script.matches.join(", "));
        }
        let _ = writeln!(
            out,
            "create (pol:Policy {{name:{}, decision:{}, score:{}}})",
            literal(&p.name),
            literal(&p.decision.to_string()),
            p.score.unwrap_or(0)
        );
        let body = script.body.join("\n");
        let _ = writeln!(out, "{body};");
        out.push('\n');
    }
    out
}

const STAGES: [(ConditionType, &str, &str, &str); 3] = [
    (ConditionType::Subject, "Subject", "sub", "SUBJECT_NAME"),
    (ConditionType::Object, "Object", "obj", "OBJECT_NAME"),
    (ConditionType::Action, "Action", "act", "ACTION_NAME"),
];

const DENY_OVERRIDES_RETURN: &str =
    "return case when count(pol) = 0 or 'Deny' in collect(pol.decision) then 'Deny' else 'Permit' end as decision";
const PERMIT_OVERRIDES_RETURN: &str =
    "return case when 'Permit' in collect(pol.decision) then 'Permit' else 'Deny' end as decision";

/// The matching statement for one access query with the decision clause of
/// `algorithm`. The query is read from a parameter map `$AQ` with keys
/// `SUBJECT_NAME`, `OBJECT_NAME` and `ACTION_NAME`.
///
/// Only deny-overrides, permit-overrides and shortest-path-deny-overrides
/// have a complete statement form.
pub fn emit_cypher_decision_query(algorithm: CombiningAlgorithm, depth: usize) -> Result<String> {
    let shortest = match algorithm {
        CombiningAlgorithm::DenyOverrides | CombiningAlgorithm::PermitOverrides => false,
        CombiningAlgorithm::ShortestPathDenyOverrides => true,
        other => return Err(Error::UnsupportedAlgorithm(other.name().to_owned())),
    };

    let mut out = String::new();
    out.push_str("// AQ: {\"SUBJECT_NAME\": ..., \"OBJECT_NAME\": ..., \"ACTION_NAME\": ...}\n");
    out.push_str("with $AQ as req\n");
    // Per-stage path lengths carried forward in the shortest-path form.
    let mut lens: Vec<String> = Vec::new();
    for (i, (slot, title, var, param)) in STAGES.iter().enumerate() {
        let rel = slot.rel_type();
        let pol = if i == 0 { "pol:Policy" } else { "pol" };
        let path = if shortest { "path=" } else { "" };
        let carried: String = lens.iter().map(|l| format!("{l}, ")).collect();
        let _ = writeln!(out, "// Stage {} - {title} Conditions", i + 1);
        let _ = writeln!(
            out,
            "match {path}({var} {{name:req.{param}}})-[:HAS_ATTR*0..{depth}]->(sc)-[:{rel}]->({pol})"
        );
        if shortest {
            let len = format!("{var}_len");
            let _ = writeln!(
                out,
                "with req, pol, {carried}min(length(path)) as {len}, size(collect(distinct sc)) as sat_cons"
            );
            lens.push(len);
        } else {
            let _ = writeln!(out, "with req, pol, size(collect(distinct sc)) as sat_cons");
        }
        let carried: String = lens.iter().map(|l| format!("{l}, ")).collect();
        let _ = writeln!(out, "match (pol)<-[:{rel}]-(rc)");
        let _ = writeln!(
            out,
            "with req, pol, {carried}sat_cons, size(collect(rc)) as req_cons where req_cons = sat_cons"
        );
    }
    match algorithm {
        CombiningAlgorithm::PermitOverrides => out.push_str(PERMIT_OVERRIDES_RETURN),
        CombiningAlgorithm::ShortestPathDenyOverrides => {
            let _ = writeln!(out, "with pol, {} as plen", lens.join(" + "));
            out.push_str("with plen, collect(pol) as pols order by plen asc limit 1\n");
            out.push_str("unwind pols as pol\n");
            out.push_str(DENY_OVERRIDES_RETURN);
        }
        _ => out.push_str(DENY_OVERRIDES_RETURN),
    }
    out.push('\n');
    Ok(out)
}
