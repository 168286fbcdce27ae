//! Policy matching for access queries.
//!
//! [`matching_policies`] is the counting algorithm: for each slot it computes
//! the `HAS_ATTR` closure of the query primitive, walks the reverse condition
//! index from every reached node, and counts satisfied conditions per policy.
//! A simple policy matches when, in every slot, the satisfied count equals
//! the required count. Compound policies are evaluated recursively against
//! the same closures.
//!
//! [`matching_policies_oracle`] answers the same question by enumerating
//! attribute paths per condition and serves as the reference in tests.

mod oracle;

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeRef};
use crate::model::Model;
use crate::policy::{ConditionExpr, ConditionType, Decision, Policy, PolicyId};

pub use oracle::matching_policies_oracle;

/// Subject, action and object nodes of a request.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct AccessQuery {
    pub sub: NodeRef,
    pub act: NodeRef,
    pub obj: NodeRef,
}

impl AccessQuery {
    pub fn new(sub: NodeRef, act: NodeRef, obj: NodeRef) -> Self {
        AccessQuery { sub, act, obj }
    }

    pub fn primitive(&self, slot: ConditionType) -> NodeRef {
        match slot {
            ConditionType::Subject => self.sub,
            ConditionType::Action => self.act,
            ConditionType::Object => self.obj,
        }
    }
}

/// A policy that matched, with its path lengths.
///
/// Each per-slot length is the shortest attribute path from the query
/// primitive to a satisfied condition, plus one for the condition edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolicyMatch {
    pub policy: PolicyId,
    pub decision: Decision,
    pub score: i64,
    pub seq: u64,
    pub len_sub: usize,
    pub len_act: usize,
    pub len_obj: usize,
    pub total_len: usize,
}

impl PolicyMatch {
    pub(crate) fn new(id: PolicyId, policy: &Policy, lens: [usize; 3]) -> Self {
        PolicyMatch {
            policy: id,
            decision: policy.decision,
            score: policy.score,
            seq: policy.seq,
            len_sub: lens[0],
            len_act: lens[1],
            len_obj: lens[2],
            total_len: lens.iter().sum(),
        }
    }

    pub fn len(&self, slot: ConditionType) -> usize {
        match slot {
            ConditionType::Subject => self.len_sub,
            ConditionType::Action => self.len_act,
            ConditionType::Object => self.len_obj,
        }
    }
}

/// Whether `x` reaches `c` over at most `depth` `HAS_ATTR` hops. A node
/// always satisfies itself.
pub fn is_satisfied(graph: &Graph, x: NodeRef, c: NodeRef, depth: usize) -> Result<bool> {
    graph.check(c)?;
    Ok(graph.attribute_closure(x, depth)?.contains_key(&c))
}

pub fn eval_condition_expr(graph: &Graph, x: NodeRef, expr: &ConditionExpr, depth: usize) -> Result<bool> {
    for leaf in expr.leaves() {
        graph.check(leaf)?;
    }
    let closure = graph.attribute_closure(x, depth)?;
    Ok(eval_in_closure(expr, &closure))
}

pub(crate) fn eval_in_closure(expr: &ConditionExpr, closure: &HashMap<NodeRef, usize>) -> bool {
    match expr {
        ConditionExpr::Ref(c) => closure.contains_key(c),
        ConditionExpr::Not(inner) => !eval_in_closure(inner, closure),
        ConditionExpr::And(xs) => xs.iter().all(|x| eval_in_closure(x, closure)),
        ConditionExpr::Or(xs) => xs.iter().any(|x| eval_in_closure(x, closure)),
    }
}

type Closures = [HashMap<NodeRef, usize>; 3];

fn query_closures(model: &Model, q: &AccessQuery) -> Result<Closures> {
    let graph = model.graph();
    let depth = model.attr_depth();
    let closure = |slot: ConditionType| -> Result<HashMap<NodeRef, usize>> {
        let x = q.primitive(slot);
        if let Some(node) = graph.node(x) {
            if node.is_policy() {
                return Err(Error::UnknownNode(node.name().to_owned()));
            }
        }
        graph.attribute_closure(x, depth)
    };
    Ok([
        closure(ConditionType::Subject)?,
        closure(ConditionType::Action)?,
        closure(ConditionType::Object)?,
    ])
}

/// Slot lengths of a policy against precomputed closures, or `None` if some
/// condition fails. A slot with no satisfied reference (only negations)
/// gets `depth + 1`.
fn policy_lengths(policy: &Policy, closures: &Closures, depth: usize) -> Option<[usize; 3]> {
    let mut lens = [0; 3];
    for (slot, set) in policy.conditions.iter() {
        let closure = &closures[slot.index()];
        if !set.iter().all(|e| eval_in_closure(e, closure)) {
            return None;
        }
        lens[slot.index()] = set
            .iter()
            .flat_map(ConditionExpr::leaves)
            .filter_map(|c| closure.get(&c).map(|hops| hops + 1))
            .min()
            .unwrap_or(depth + 1);
    }
    Some(lens)
}

#[derive(Clone, Copy)]
struct Tally {
    satisfied: [usize; 3],
    shortest: [usize; 3],
}

/// Every valid policy matching `q`, ordered by sequence number.
pub fn matching_policies(model: &Model, q: &AccessQuery) -> Result<Vec<PolicyMatch>> {
    let index = model.index()?;
    let closures = query_closures(model, q)?;

    let mut tallies: HashMap<PolicyId, Tally> = HashMap::new();
    for slot in ConditionType::ALL {
        let by_condition = &index.by_condition[slot.index()];
        for (node, &hops) in &closures[slot.index()] {
            let Some(policies) = by_condition.get(node) else {
                continue;
            };
            for &id in policies {
                let tally = tallies.entry(id).or_insert(Tally {
                    satisfied: [0; 3],
                    shortest: [usize::MAX; 3],
                });
                tally.satisfied[slot.index()] += 1;
                let s = &mut tally.shortest[slot.index()];
                *s = (*s).min(hops + 1);
            }
        }
    }

    let mut matches: Vec<PolicyMatch> = tallies
        .into_iter()
        .filter(|(id, tally)| tally.satisfied == index.required[id.index()])
        .map(|(id, tally)| {
            let policy = model.policy(id).expect("indexed policy");
            PolicyMatch::new(id, policy, tally.shortest)
        })
        .collect();

    let depth = model.attr_depth();
    for &id in &index.compound {
        let policy = model.policy(id).expect("indexed policy");
        if let Some(lens) = policy_lengths(policy, &closures, depth) {
            matches.push(PolicyMatch::new(id, policy, lens));
        }
    }

    matches.sort_by_key(|m| m.seq);
    Ok(matches)
}

/// Total path length of a matching policy.
pub fn policy_length(model: &Model, q: &AccessQuery, id: PolicyId) -> Result<usize> {
    let index = model.index()?;
    let policy = model
        .policy(id)
        .ok_or_else(|| Error::UnknownPolicy(format!("{}", id.index())))?;
    let closures = query_closures(model, q)?;
    if !index.valid[id.index()] {
        return Err(Error::NotMatching {
            policy: policy.name.clone(),
        });
    }
    policy_lengths(policy, &closures, model.attr_depth())
        .map(|lens| lens.iter().sum())
        .ok_or_else(|| Error::NotMatching {
            policy: policy.name.clone(),
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Properties, HAS_ATTR};
    use crate::policy::Conditions;
    use ConditionType::*;

    /// s -> Senior, s -> Employee, t -> Manager, u -> Suspended -> Flagged
    fn org() -> (Model, HashMap<&'static str, NodeRef>) {
        let mut m = Model::new();
        let mut r = HashMap::new();
        for name in [
            "s",
            "t",
            "u",
            "Senior",
            "Employee",
            "Manager",
            "Suspended",
            "Flagged",
            "View",
            "Reports",
        ] {
            r.insert(name, m.add_node(name, ["Attribute"], Properties::new()).unwrap());
        }
        for (a, b) in [
            ("s", "Senior"),
            ("s", "Employee"),
            ("t", "Manager"),
            ("u", "Employee"),
            ("u", "Suspended"),
            ("Suspended", "Flagged"),
        ] {
            m.add_edge(r[a], HAS_ATTR, r[b]).unwrap();
        }
        (m, r)
    }

    #[test]
    fn satisfaction_is_reflexive_and_bounded() {
        let (mut m, r) = org();
        m.freeze().unwrap();
        let g = m.graph();
        assert!(is_satisfied(g, r["s"], r["s"], 0).unwrap());
        assert!(is_satisfied(g, r["u"], r["Flagged"], 2).unwrap());
        assert!(!is_satisfied(g, r["u"], r["Flagged"], 1).unwrap());
        assert!(!is_satisfied(g, r["s"], r["Manager"], 5).unwrap());
    }

    #[test]
    fn expression_truth_table() {
        let (m, r) = org();
        let g = m.graph();
        let or = ConditionExpr::Or(vec![
            ConditionExpr::Ref(r["Manager"]),
            ConditionExpr::And(vec![
                ConditionExpr::Ref(r["Senior"]),
                ConditionExpr::Ref(r["Employee"]),
            ]),
        ]);
        assert!(eval_condition_expr(g, r["s"], &or, 2).unwrap());
        assert!(eval_condition_expr(g, r["t"], &or, 2).unwrap());
        assert!(!eval_condition_expr(g, r["u"], &or, 2).unwrap());
        let not_self = ConditionExpr::not(ConditionExpr::Ref(r["s"]));
        assert!(!eval_condition_expr(g, r["s"], &not_self, 2).unwrap());
        let not_suspended = ConditionExpr::not(ConditionExpr::Ref(r["Suspended"]));
        assert!(eval_condition_expr(g, r["s"], &not_suspended, 2).unwrap());
        assert!(!eval_condition_expr(g, r["u"], &not_suspended, 2).unwrap());
    }

    #[test]
    fn negation_only_slot_uses_sentinel_length() {
        let (mut m, r) = org();
        let conds = Conditions::new()
            .with(Subject, ConditionExpr::not(ConditionExpr::Ref(r["Suspended"])))
            .with_refs(Action, [r["View"]])
            .with_refs(Object, [r["Reports"]]);
        let id = m.create_policy("P", Decision::Permit, None, conds).unwrap();
        m.freeze().unwrap();
        let q = AccessQuery::new(r["s"], r["View"], r["Reports"]);
        let found = matching_policies(&m, &q).unwrap();
        assert_eq!(found.len(), 1);
        let depth = m.attr_depth();
        assert_eq!(
            (found[0].len_sub, found[0].len_act, found[0].len_obj),
            (depth + 1, 1, 1)
        );
        assert_eq!(policy_length(&m, &q, id).unwrap(), depth + 3);

        let q = AccessQuery::new(r["u"], r["View"], r["Reports"]);
        assert!(matching_policies(&m, &q).unwrap().is_empty());
        assert!(matches!(
            policy_length(&m, &q, id),
            Err(Error::NotMatching { .. })
        ));
    }

    #[test]
    fn reflexive_policy_has_length_three() {
        let (mut m, r) = org();
        let id = m
            .create_policy(
                "Self",
                Decision::Permit,
                None,
                Conditions::new()
                    .with_refs(Subject, [r["s"]])
                    .with_refs(Action, [r["View"]])
                    .with_refs(Object, [r["Reports"]]),
            )
            .unwrap();
        m.freeze().unwrap();
        let q = AccessQuery::new(r["s"], r["View"], r["Reports"]);
        assert_eq!(policy_length(&m, &q, id), Ok(3));
    }

    #[test]
    fn requires_frozen_model() {
        let (m, r) = org();
        let q = AccessQuery::new(r["s"], r["View"], r["Reports"]);
        assert_eq!(matching_policies(&m, &q), Err(Error::NotFrozen));
    }
}
