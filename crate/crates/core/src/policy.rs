//! Policies, condition expressions and their validation.
//!
//! A policy is a Permit or Deny decision guarded by three condition sets, one
//! per query slot. Every expression in a set must hold for the policy to
//! match, so a set reads as a conjunction. Expressions are normally bare
//! node references; `Not`, `And` and `Or` build compound conditions.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeRef};

/// The slot of the access query a condition constrains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ConditionType {
    Subject,
    Action,
    Object,
}

impl ConditionType {
    pub const ALL: [ConditionType; 3] = [
        ConditionType::Subject,
        ConditionType::Action,
        ConditionType::Object,
    ];

    /// Relationship type used for the condition edge.
    pub fn rel_type(self) -> &'static str {
        match self {
            ConditionType::Subject => "SUB_CON",
            ConditionType::Action => "ACT_CON",
            ConditionType::Object => "OBJ_CON",
        }
    }

    /// Slot keyword in the model language.
    pub fn keyword(self) -> &'static str {
        match self {
            ConditionType::Subject => "subject",
            ConditionType::Action => "action",
            ConditionType::Object => "object",
        }
    }

    pub fn from_keyword(word: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|t| t.keyword() == word)
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for ConditionType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.rel_type())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ConditionExpr {
    Ref(NodeRef),
    Not(Box<ConditionExpr>),
    And(Vec<ConditionExpr>),
    Or(Vec<ConditionExpr>),
}

impl ConditionExpr {
    #[allow(clippy::should_implement_trait)]
    pub fn not(inner: ConditionExpr) -> Self {
        ConditionExpr::Not(Box::new(inner))
    }

    pub fn is_ref(&self) -> bool {
        matches!(self, ConditionExpr::Ref(_))
    }

    pub fn contains_negation(&self) -> bool {
        match self {
            ConditionExpr::Ref(_) => false,
            ConditionExpr::Not(_) => true,
            ConditionExpr::And(xs) | ConditionExpr::Or(xs) => xs.iter().any(Self::contains_negation),
        }
    }

    /// Every referenced node, left to right.
    pub fn leaves(&self) -> Vec<NodeRef> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves(&self, out: &mut Vec<NodeRef>) {
        match self {
            ConditionExpr::Ref(n) => out.push(*n),
            ConditionExpr::Not(inner) => inner.collect_leaves(out),
            ConditionExpr::And(xs) | ConditionExpr::Or(xs) => xs.iter().for_each(|x| x.collect_leaves(out)),
        }
    }

    fn well_formed(&self) -> bool {
        match self {
            ConditionExpr::Ref(_) => true,
            ConditionExpr::Not(inner) => inner.well_formed(),
            ConditionExpr::And(xs) | ConditionExpr::Or(xs) => {
                xs.len() >= 2 && xs.iter().all(Self::well_formed)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Decision {
    Permit,
    Deny,
}

impl fmt::Display for Decision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Decision::Permit => "Permit",
            Decision::Deny => "Deny",
        })
    }
}

impl FromStr for Decision {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "Permit" | "permit" => Ok(Decision::Permit),
            "Deny" | "deny" => Ok(Decision::Deny),
            _ => Err(format!("unknown decision {s:?}")),
        }
    }
}

/// Condition sets keyed by slot. Sets deduplicate structurally equal expressions.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Conditions([BTreeSet<ConditionExpr>; 3]);

impl Conditions {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, slot: ConditionType, expr: ConditionExpr) -> Self {
        self.insert(slot, expr);
        self
    }

    pub fn with_refs(mut self, slot: ConditionType, nodes: impl IntoIterator<Item = NodeRef>) -> Self {
        for n in nodes {
            self.insert(slot, ConditionExpr::Ref(n));
        }
        self
    }

    pub fn insert(&mut self, slot: ConditionType, expr: ConditionExpr) -> bool {
        self.0[slot.index()].insert(expr)
    }

    pub fn get(&self, slot: ConditionType) -> &BTreeSet<ConditionExpr> {
        &self.0[slot.index()]
    }

    pub fn clear(&mut self, slot: ConditionType) {
        self.0[slot.index()].clear();
    }

    pub fn iter(&self) -> impl Iterator<Item = (ConditionType, &BTreeSet<ConditionExpr>)> {
        ConditionType::ALL.into_iter().map(move |t| (t, self.get(t)))
    }

    pub fn missing_types(&self) -> BTreeSet<ConditionType> {
        self.iter()
            .filter(|(_, s)| s.is_empty())
            .map(|(t, _)| t)
            .collect()
    }

    pub fn is_simple(&self) -> bool {
        self.0.iter().flatten().all(ConditionExpr::is_ref)
    }
}

/// Sequence number of a stored policy; also its handle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PolicyId(u32);

impl PolicyId {
    pub fn new(seq: u32) -> Self {
        PolicyId(seq)
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Policy {
    pub name: String,
    pub decision: Decision,
    pub score: i64,
    /// Creation order; drives first-applicable.
    pub seq: u64,
    pub conditions: Conditions,
}

impl Policy {
    pub fn new(name: impl Into<String>, decision: Decision, conditions: Conditions) -> Self {
        Policy {
            name: name.into(),
            decision,
            score: 0,
            seq: 0,
            conditions,
        }
    }

    pub fn is_simple(&self) -> bool {
        self.conditions.is_simple()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ValidityReport {
    pub valid: bool,
    pub missing_types: BTreeSet<ConditionType>,
    pub dangling_refs: BTreeSet<String>,
}

/// Checks a policy value against a graph: every slot populated and every
/// reference pointing at a live node.
pub fn validate(graph: &Graph, policy: &Policy) -> ValidityReport {
    let missing_types = policy.conditions.missing_types();
    let dangling_refs: BTreeSet<String> = policy
        .conditions
        .iter()
        .flat_map(|(_, set)| set.iter())
        .flat_map(ConditionExpr::leaves)
        .filter(|n| !graph.contains(*n))
        .map(|n| graph.name_of(n).map_or_else(|| n.to_string(), str::to_owned))
        .collect();
    ValidityReport {
        valid: missing_types.is_empty() && dangling_refs.is_empty(),
        missing_types,
        dangling_refs,
    }
}

#[derive(Debug, Clone, Default)]
pub struct PolicyStore {
    policies: Vec<Policy>,
    by_name: HashMap<String, PolicyId>,
}

impl PolicyStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub(crate) fn create(
        &mut self,
        graph: &Graph,
        name: &str,
        decision: Decision,
        score: Option<i64>,
        conditions: Conditions,
    ) -> Result<PolicyId> {
        if self.by_name.contains_key(name) {
            return Err(Error::DuplicatePolicyName(name.to_owned()));
        }
        for (_, set) in conditions.iter() {
            for expr in set {
                if !expr.well_formed() {
                    return Err(Error::DegenerateCompound(name.to_owned()));
                }
                for leaf in expr.leaves() {
                    let Some(node) = graph.node(leaf) else {
                        return Err(Error::DanglingConditionRef {
                            policy: name.to_owned(),
                            target: graph
                                .name_of(leaf)
                                .map_or_else(|| leaf.to_string(), str::to_owned),
                        });
                    };
                    if node.is_policy() {
                        return Err(Error::ConditionOnPolicyNode {
                            policy: name.to_owned(),
                            target: node.name().to_owned(),
                        });
                    }
                }
            }
        }
        let missing = conditions.missing_types();
        if !missing.is_empty() {
            return Err(Error::MissingConditionType {
                policy: name.to_owned(),
                missing: missing.into_iter().collect(),
            });
        }
        let id = PolicyId(u32::try_from(self.policies.len()).expect("policy count exceeds u32"));
        self.policies.push(Policy {
            name: name.to_owned(),
            decision,
            score: score.unwrap_or(0),
            seq: id.0 as u64,
            conditions,
        });
        self.by_name.insert(name.to_owned(), id);
        Ok(id)
    }

    pub fn get(&self, id: PolicyId) -> Option<&Policy> {
        self.policies.get(id.index())
    }

    pub fn find(&self, name: &str) -> Option<PolicyId> {
        self.by_name.get(name).copied()
    }

    /// Policies in creation order.
    pub fn iter(&self) -> impl Iterator<Item = (PolicyId, &Policy)> + '_ {
        self.policies
            .iter()
            .enumerate()
            .map(|(i, p)| (PolicyId(i as u32), p))
    }

    pub fn len(&self) -> usize {
        self.policies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.policies.is_empty()
    }

    pub fn required_conditions(&self, id: PolicyId, slot: ConditionType) -> Result<&BTreeSet<ConditionExpr>> {
        self.get(id)
            .map(|p| p.conditions.get(slot))
            .ok_or_else(|| Error::UnknownPolicy(format!("{}", id.0)))
    }

    pub fn validate_policy(&self, graph: &Graph, id: PolicyId) -> Result<ValidityReport> {
        self.get(id)
            .map(|p| validate(graph, p))
            .ok_or_else(|| Error::UnknownPolicy(format!("{}", id.0)))
    }
}

/// Rewrites a policy with `And`/`Or` conditions into simple policies, one per
/// combination of disjunctive-normal-form terms across the three slots.
///
/// Outputs are named `<name>#1`, `<name>#2`, ... and keep the decision, score
/// and sequence number of the original.
pub fn dnf_expand(policy: &Policy) -> Result<Vec<Policy>> {
    let mut slot_terms: Vec<Vec<BTreeSet<NodeRef>>> = Vec::with_capacity(3);
    for (_, set) in policy.conditions.iter() {
        let mut terms = vec![BTreeSet::new()];
        for expr in set {
            let expr_terms =
                dnf_terms(expr).ok_or_else(|| Error::NegationNotExpandable(policy.name.clone()))?;
            terms = conjoin(&terms, &expr_terms);
        }
        slot_terms.push(terms);
    }

    let mut out = Vec::new();
    for sub in &slot_terms[0] {
        for act in &slot_terms[1] {
            for obj in &slot_terms[2] {
                let conditions = Conditions::new()
                    .with_refs(ConditionType::Subject, sub.iter().copied())
                    .with_refs(ConditionType::Action, act.iter().copied())
                    .with_refs(ConditionType::Object, obj.iter().copied());
                out.push(Policy {
                    name: format!("{}#{}", policy.name, out.len() + 1),
                    decision: policy.decision,
                    score: policy.score,
                    seq: policy.seq,
                    conditions,
                });
            }
        }
    }
    Ok(out)
}

/// DNF terms of an expression, or `None` if it contains a negation.
fn dnf_terms(expr: &ConditionExpr) -> Option<Vec<BTreeSet<NodeRef>>> {
    match expr {
        ConditionExpr::Ref(n) => Some(vec![BTreeSet::from([*n])]),
        ConditionExpr::Not(_) => None,
        ConditionExpr::Or(xs) => {
            let mut terms = Vec::new();
            for x in xs {
                for t in dnf_terms(x)? {
                    push_unique(&mut terms, t);
                }
            }
            Some(terms)
        }
        ConditionExpr::And(xs) => {
            let mut terms = vec![BTreeSet::new()];
            for x in xs {
                terms = conjoin(&terms, &dnf_terms(x)?);
            }
            Some(terms)
        }
    }
}

fn conjoin(left: &[BTreeSet<NodeRef>], right: &[BTreeSet<NodeRef>]) -> Vec<BTreeSet<NodeRef>> {
    let mut out = Vec::new();
    for l in left {
        for r in right {
            push_unique(&mut out, l.union(r).copied().collect());
        }
    }
    out
}

fn push_unique(terms: &mut Vec<BTreeSet<NodeRef>>, term: BTreeSet<NodeRef>) {
    if !terms.contains(&term) {
        terms.push(term);
    }
}
