//! Reference matcher. Evaluates every condition of every policy directly by
//! enumerating simple `HAS_ATTR` paths, with no closures and no index.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeRef};
use crate::model::Model;
use crate::policy::{ConditionExpr, Policy};

use super::{AccessQuery, PolicyMatch};

struct PathSearch<'g> {
    graph: &'g Graph,
    depth: usize,
    memo: HashMap<(NodeRef, NodeRef), Option<usize>>,
}

impl PathSearch<'_> {
    /// Shortest simple path length from `from` to `to`, found by visiting
    /// every simple path of at most `depth` edges.
    fn shortest(&mut self, from: NodeRef, to: NodeRef) -> Option<usize> {
        if let Some(&known) = self.memo.get(&(from, to)) {
            return known;
        }
        let mut best = None;
        let mut on_path = vec![from];
        self.walk(from, to, &mut on_path, &mut best);
        self.memo.insert((from, to), best);
        best
    }

    fn walk(&self, node: NodeRef, to: NodeRef, on_path: &mut Vec<NodeRef>, best: &mut Option<usize>) {
        let hops = on_path.len() - 1;
        if node == to {
            *best = Some(best.map_or(hops, |b: usize| b.min(hops)));
            return;
        }
        if hops == self.depth {
            return;
        }
        for &next in self.graph.attributes_of(node) {
            if !on_path.contains(&next) {
                on_path.push(next);
                self.walk(next, to, on_path, best);
                on_path.pop();
            }
        }
    }

    fn holds(&mut self, x: NodeRef, expr: &ConditionExpr) -> bool {
        match expr {
            ConditionExpr::Ref(c) => self.shortest(x, *c).is_some(),
            ConditionExpr::Not(inner) => !self.holds(x, inner),
            ConditionExpr::And(xs) => xs.iter().all(|e| self.holds(x, e)),
            ConditionExpr::Or(xs) => xs.iter().any(|e| self.holds(x, e)),
        }
    }
}

fn is_valid(graph: &Graph, policy: &Policy) -> bool {
    policy.conditions.iter().all(|(_, set)| {
        !set.is_empty()
            && set
                .iter()
                .flat_map(ConditionExpr::leaves)
                .all(|c| graph.contains(c))
    })
}

/// Same contract as [`super::matching_policies`], computed policy by policy.
pub fn matching_policies_oracle(model: &Model, q: &AccessQuery) -> Result<Vec<PolicyMatch>> {
    if !model.is_frozen() {
        return Err(Error::NotFrozen);
    }
    let graph = model.graph();
    for x in [q.sub, q.act, q.obj] {
        match graph.node(x) {
            None => return Err(Error::UnknownNode(x.to_string())),
            Some(node) if node.is_policy() => return Err(Error::UnknownNode(node.name().to_owned())),
            Some(_) => {}
        }
    }
    let depth = model.attr_depth();
    let mut search = PathSearch {
        graph,
        depth,
        memo: HashMap::new(),
    };

    let mut out = Vec::new();
    'policies: for (id, policy) in model.policies().iter() {
        if !is_valid(graph, policy) {
            continue;
        }
        let mut lens = [0; 3];
        for (slot, set) in policy.conditions.iter() {
            let x = q.primitive(slot);
            for expr in set {
                if !search.holds(x, expr) {
                    continue 'policies;
                }
            }
            let mut shortest: Option<usize> = None;
            for expr in set {
                for c in expr.leaves() {
                    if let Some(hops) = search.shortest(x, c) {
                        shortest = Some(shortest.map_or(hops + 1, |s| s.min(hops + 1)));
                    }
                }
            }
            lens[slot.index()] = shortest.unwrap_or(depth + 1);
        }
        out.push(PolicyMatch::new(id, policy, lens));
    }
    Ok(out)
}
