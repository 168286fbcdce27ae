use std::collections::{BTreeMap, HashMap};

use crate::error::Error;
use crate::graph::{Properties, Scalar};
use crate::model::Model;
use crate::policy::{ConditionExpr, ConditionType, Conditions, Decision};

use super::{Diagnostic, Position};

#[derive(Debug, Clone, PartialEq)]
pub struct NodeDecl {
    pub name: String,
    pub labels: Vec<String>,
    pub properties: BTreeMap<String, Scalar>,
    pub position: Position,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeDecl {
    pub from: String,
    pub rel_type: String,
    pub to: String,
    pub position: Position,
}

/// A condition expression with node names left unresolved.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ExprDecl {
    Name(String),
    Not(Box<ExprDecl>),
    And(Vec<ExprDecl>),
    Or(Vec<ExprDecl>),
}

impl ExprDecl {
    fn names(&self) -> Vec<&str> {
        match self {
            ExprDecl::Name(n) => vec![n.as_str()],
            ExprDecl::Not(inner) => inner.names(),
            ExprDecl::And(xs) | ExprDecl::Or(xs) => xs.iter().flat_map(ExprDecl::names).collect(),
        }
    }

    fn resolve(&self, model: &Model) -> Option<ConditionExpr> {
        Some(match self {
            ExprDecl::Name(n) => ConditionExpr::Ref(model.find_node(n)?),
            ExprDecl::Not(inner) => ConditionExpr::not(inner.resolve(model)?),
            ExprDecl::And(xs) => {
                ConditionExpr::And(xs.iter().map(|x| x.resolve(model)).collect::<Option<_>>()?)
            }
            ExprDecl::Or(xs) => {
                ConditionExpr::Or(xs.iter().map(|x| x.resolve(model)).collect::<Option<_>>()?)
            }
        })
    }

    fn from_expr(model: &Model, expr: &ConditionExpr) -> Self {
        match expr {
            ConditionExpr::Ref(n) => ExprDecl::Name(model.graph().name_of(*n).unwrap_or_default().to_owned()),
            ConditionExpr::Not(inner) => ExprDecl::Not(Box::new(Self::from_expr(model, inner))),
            ConditionExpr::And(xs) => ExprDecl::And(xs.iter().map(|x| Self::from_expr(model, x)).collect()),
            ConditionExpr::Or(xs) => ExprDecl::Or(xs.iter().map(|x| Self::from_expr(model, x)).collect()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolicyDecl {
    pub name: String,
    pub decision: Decision,
    pub score: Option<i64>,
    /// Condition expressions in source order, tagged with their slot.
    pub conditions: Vec<(ConditionType, ExprDecl)>,
    pub position: Position,
}

impl PolicyDecl {
    pub fn slot(&self, slot: ConditionType) -> impl Iterator<Item = &ExprDecl> {
        self.conditions
            .iter()
            .filter(move |(t, _)| *t == slot)
            .map(|(_, e)| e)
    }
}

/// Declarations of a model file, each kind in source order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ModelDocument {
    pub nodes: Vec<NodeDecl>,
    pub edges: Vec<EdgeDecl>,
    pub policies: Vec<PolicyDecl>,
}

impl ModelDocument {
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty() && self.edges.is_empty() && self.policies.is_empty()
    }

    /// Builds and freezes the model. Either every declaration loads or the
    /// full list of problems is returned.
    pub fn load(&self) -> Result<Model, Vec<Diagnostic>> {
        let (model, mut errors) = self.build();
        if !errors.is_empty() {
            return Err(errors);
        }
        let mut model = model;
        if let Err(err) = model.freeze() {
            let position = match &err {
                Error::AttributeCycle(name) => self.node_position(name),
                _ => Position::default(),
            };
            errors.push(Diagnostic::model(position, err));
            return Err(errors);
        }
        Ok(model)
    }

    /// Builds an unfrozen model from every declaration that loads, plus the
    /// problems with the rest. Policies with issues are left out.
    pub fn build(&self) -> (Model, Vec<Diagnostic>) {
        let mut model = Model::new();
        let mut errors = Vec::new();

        for node in &self.nodes {
            let props: Properties = node.properties.clone();
            if let Err(err) = model.add_node(&node.name, node.labels.iter().cloned(), props) {
                errors.push(Diagnostic::model(node.position, err));
            }
        }

        for edge in &self.edges {
            let ends = [&edge.from, &edge.to].map(|n| model.node_ref(n));
            match ends {
                [Ok(from), Ok(to)] => {
                    if let Err(err) = model.add_edge(from, &edge.rel_type, to) {
                        errors.push(Diagnostic::model(edge.position, err));
                    }
                }
                [a, b] => {
                    for err in [a.err(), b.err()].into_iter().flatten() {
                        errors.push(Diagnostic::model(edge.position, err));
                    }
                }
            }
        }

        for decl in &self.policies {
            let issues = self.policy_issues(&model, decl);
            if !issues.is_empty() {
                errors.extend(issues.into_iter().map(|e| Diagnostic::model(decl.position, e)));
                continue;
            }
            let mut conditions = Conditions::new();
            for (slot, expr) in &decl.conditions {
                conditions.insert(*slot, expr.resolve(&model).expect("names checked"));
            }
            if let Err(err) = model.create_policy(&decl.name, decl.decision, decl.score, conditions) {
                errors.push(Diagnostic::model(decl.position, err));
            }
        }
        (model, errors)
    }

    /// Missing slots and unknown condition names of one policy.
    pub fn policy_issues(&self, model: &Model, decl: &PolicyDecl) -> Vec<Error> {
        let mut issues = Vec::new();
        let missing: Vec<ConditionType> = ConditionType::ALL
            .into_iter()
            .filter(|t| decl.slot(*t).next().is_none())
            .collect();
        if !missing.is_empty() {
            issues.push(Error::MissingConditionType {
                policy: decl.name.clone(),
                missing,
            });
        }
        let mut seen = Vec::new();
        for (_, expr) in &decl.conditions {
            for name in expr.names() {
                if model.find_node(name).is_none() && !seen.contains(&name) {
                    seen.push(name);
                    issues.push(Error::DanglingConditionRef {
                        policy: decl.name.clone(),
                        target: name.to_owned(),
                    });
                }
            }
        }
        issues
    }

    fn node_position(&self, name: &str) -> Position {
        self.nodes
            .iter()
            .find(|n| n.name == name)
            .map_or_else(Position::default, |n| n.position)
    }

    /// Describes a model as declarations: nodes and edges in creation order,
    /// policies by sequence number.
    pub fn from_model(model: &Model) -> Self {
        let graph = model.graph();
        let nodes = graph
            .nodes()
            .map(|(_, n)| NodeDecl {
                name: n.name().to_owned(),
                labels: n.labels().to_vec(),
                properties: n.properties().clone(),
                position: Position::default(),
            })
            .collect();
        let names: HashMap<_, _> = graph.nodes().map(|(r, n)| (r, n.name())).collect();
        let edges = graph
            .edges()
            .iter()
            .map(|e| EdgeDecl {
                from: names[&e.from].to_owned(),
                rel_type: e.rel_type.clone(),
                to: names[&e.to].to_owned(),
                position: Position::default(),
            })
            .collect();
        let policies = model
            .policies()
            .iter()
            .map(|(_, p)| PolicyDecl {
                name: p.name.clone(),
                decision: p.decision,
                score: (p.score != 0).then_some(p.score),
                conditions: p
                    .conditions
                    .iter()
                    .flat_map(|(slot, set)| set.iter().map(move |e| (slot, ExprDecl::from_expr(model, e))))
                    .collect(),
                position: Position::default(),
            })
            .collect();
        ModelDocument {
            nodes,
            edges,
            policies,
        }
    }
}
