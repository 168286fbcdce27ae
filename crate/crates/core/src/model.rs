use std::collections::{BTreeSet, HashMap};

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeRef, Properties};
use crate::matcher::AccessQuery;
use crate::policy::{
    self, ConditionExpr, ConditionType, Conditions, Decision, PolicyId, PolicyStore, ValidityReport,
};

/// A graph plus the policies attached to it.
///
/// Built single-threaded, then [frozen](Model::freeze). Freezing validates
/// the attribute subgraph and builds the reverse condition index that the
/// matcher walks. A frozen model is immutable and `Sync`.
#[derive(Debug, Clone, Default)]
pub struct Model {
    graph: Graph,
    policies: PolicyStore,
    index: Option<MatchIndex>,
}

/// Per-slot reverse index from condition node to the simple policies that
/// require it, plus the bookkeeping the counting matcher needs.
#[derive(Debug, Clone, Default)]
pub(crate) struct MatchIndex {
    pub(crate) valid: Vec<bool>,
    pub(crate) by_condition: [HashMap<NodeRef, Vec<PolicyId>>; 3],
    pub(crate) required: Vec<[usize; 3]>,
    pub(crate) compound: Vec<PolicyId>,
}

impl Model {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn policies(&self) -> &PolicyStore {
        &self.policies
    }

    pub fn add_node<I, S>(&mut self, name: &str, labels: I, properties: Properties) -> Result<NodeRef>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.graph.add_node(name, labels, properties)
    }

    pub fn add_edge(&mut self, from: NodeRef, rel_type: &str, to: NodeRef) -> Result<()> {
        self.graph.add_edge(from, rel_type, to)
    }

    pub fn remove_node(&mut self, node: NodeRef) -> Result<()> {
        self.graph.remove_node(node)
    }

    pub fn find_node(&self, name: &str) -> Option<NodeRef> {
        self.graph.find_node(name)
    }

    /// Node handle by name, or `UnknownNode`.
    pub fn node_ref(&self, name: &str) -> Result<NodeRef> {
        self.graph
            .find_node(name)
            .ok_or_else(|| Error::UnknownNode(name.to_owned()))
    }

    pub fn create_policy(
        &mut self,
        name: &str,
        decision: Decision,
        score: Option<i64>,
        conditions: Conditions,
    ) -> Result<PolicyId> {
        if self.is_frozen() {
            return Err(Error::Frozen);
        }
        self.policies
            .create(&self.graph, name, decision, score, conditions)
    }

    pub fn find_policy(&self, name: &str) -> Option<PolicyId> {
        self.policies.find(name)
    }

    pub fn policy(&self, id: PolicyId) -> Option<&policy::Policy> {
        self.policies.get(id)
    }

    pub fn validate_policy(&self, id: PolicyId) -> Result<ValidityReport> {
        self.policies.validate_policy(&self.graph, id)
    }

    pub fn required_conditions(&self, id: PolicyId, slot: ConditionType) -> Result<&BTreeSet<ConditionExpr>> {
        self.policies.required_conditions(id, slot)
    }

    pub fn freeze(&mut self) -> Result<()> {
        if self.is_frozen() {
            return Ok(());
        }
        self.graph.freeze()?;
        self.index = Some(self.build_index());
        Ok(())
    }

    pub fn is_frozen(&self) -> bool {
        self.index.is_some()
    }

    pub fn attr_depth(&self) -> usize {
        self.graph.attr_depth()
    }

    /// Raises the traversal bound above the longest attribute chain.
    pub fn set_attr_depth(&mut self, depth: usize) -> Result<()> {
        self.graph.set_attr_depth(depth)
    }

    /// Resolves an access query given by node names.
    pub fn query(&self, subject: &str, action: &str, object: &str) -> Result<AccessQuery> {
        Ok(AccessQuery {
            sub: self.node_ref(subject)?,
            act: self.node_ref(action)?,
            obj: self.node_ref(object)?,
        })
    }

    pub(crate) fn index(&self) -> Result<&MatchIndex> {
        self.index.as_ref().ok_or(Error::NotFrozen)
    }

    fn build_index(&self) -> MatchIndex {
        let mut index = MatchIndex::default();
        for (id, pol) in self.policies.iter() {
            let valid = policy::validate(&self.graph, pol).valid;
            index.valid.push(valid);
            let mut required = [0; 3];
            for (slot, set) in pol.conditions.iter() {
                required[slot.index()] = set.len();
            }
            index.required.push(required);
            if !valid {
                continue;
            }
            if !pol.is_simple() {
                index.compound.push(id);
                continue;
            }
            for (slot, set) in pol.conditions.iter() {
                for expr in set {
                    if let ConditionExpr::Ref(node) = expr {
                        index.by_condition[slot.index()]
                            .entry(*node)
                            .or_default()
                            .push(id);
                    }
                }
            }
        }
        index
    }
}
