//! In-memory directed property graph holding primitives and attributes.
//!
//! Nodes are addressed by a unique name and by a dense [`NodeRef`]. Edges are
//! typed and stored with set semantics: a `(from, rel_type, to)` triple exists
//! at most once. `HAS_ATTR` edges get their own adjacency lists because every
//! access decision walks them.
//!
//! The graph is built by a single writer and then [frozen](Graph::freeze).
//! Freezing checks that the `HAS_ATTR` subgraph is acyclic and fixes the
//! attribute depth used to bound traversals. A frozen graph rejects mutation
//! and can be shared between threads.

use std::collections::hash_map::Entry;
use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};
use std::fmt;

use crate::error::{Error, Result};

pub const HAS_ATTR: &str = "HAS_ATTR";

pub const LABEL_PRIMITIVE: &str = "Primitive";
pub const LABEL_ATTRIBUTE: &str = "Attribute";
pub const LABEL_POLICY: &str = "Policy";

/// Stable handle to a node. Handles are never reused, even after removal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeRef(u32);

impl NodeRef {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// Scalar property value.
#[derive(Debug, Clone, PartialEq)]
pub enum Scalar {
    Str(String),
    Int(i64),
    Decimal(f64),
    Bool(bool),
}

impl From<&str> for Scalar {
    fn from(s: &str) -> Self {
        Scalar::Str(s.to_owned())
    }
}

impl From<i64> for Scalar {
    fn from(v: i64) -> Self {
        Scalar::Int(v)
    }
}

impl From<f64> for Scalar {
    fn from(v: f64) -> Self {
        Scalar::Decimal(v)
    }
}

impl From<bool> for Scalar {
    fn from(v: bool) -> Self {
        Scalar::Bool(v)
    }
}

pub type Properties = BTreeMap<String, Scalar>;

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    name: String,
    labels: Vec<String>,
    properties: Properties,
    removed: bool,
}

impl Node {
    pub fn name(&self) -> &str {
        &self.name
    }

    /// Labels in declaration order, without duplicates.
    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn has_label(&self, label: &str) -> bool {
        self.labels.iter().any(|l| l == label)
    }

    pub fn properties(&self) -> &Properties {
        &self.properties
    }

    pub fn is_policy(&self) -> bool {
        self.has_label(LABEL_POLICY)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Edge {
    pub from: NodeRef,
    pub rel_type: String,
    pub to: NodeRef,
}

#[derive(Debug, Clone, Default)]
pub struct Graph {
    nodes: Vec<Node>,
    by_name: HashMap<String, NodeRef>,
    edges: Vec<Edge>,
    edge_set: HashSet<Edge>,
    attr_out: Vec<Vec<NodeRef>>,
    attr_in: Vec<Vec<NodeRef>>,
    attr_depth: usize,
    frozen: bool,
}

impl Graph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_node<I, S>(&mut self, name: &str, labels: I, properties: Properties) -> Result<NodeRef>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.ensure_mutable()?;
        if name.is_empty() {
            return Err(Error::EmptyName);
        }
        if self.by_name.contains_key(name) {
            return Err(Error::DuplicateName(name.to_owned()));
        }
        if properties.contains_key("name") {
            return Err(Error::ReservedProperty(name.to_owned()));
        }
        let mut ordered: Vec<String> = Vec::new();
        for label in labels {
            let label = label.into();
            if !ordered.contains(&label) {
                ordered.push(label);
            }
        }
        let node = Node {
            name: name.to_owned(),
            labels: ordered,
            properties,
            removed: false,
        };
        if node.has_label(LABEL_PRIMITIVE) && node.is_policy() {
            return Err(Error::ConflictingLabels(name.to_owned()));
        }
        let id = NodeRef(u32::try_from(self.nodes.len()).expect("node count exceeds u32"));
        self.nodes.push(node);
        self.attr_out.push(Vec::new());
        self.attr_in.push(Vec::new());
        self.by_name.insert(name.to_owned(), id);
        Ok(id)
    }

    /// Adds an edge. Re-adding an existing triple succeeds without effect.
    pub fn add_edge(&mut self, from: NodeRef, rel_type: &str, to: NodeRef) -> Result<()> {
        self.ensure_mutable()?;
        self.check(from)?;
        self.check(to)?;
        if rel_type == HAS_ATTR && from == to {
            return Err(Error::SelfLoopOnHasAttr(self.nodes[from.index()].name.clone()));
        }
        let edge = Edge {
            from,
            rel_type: rel_type.to_owned(),
            to,
        };
        if !self.edge_set.insert(edge.clone()) {
            return Ok(());
        }
        if rel_type == HAS_ATTR {
            self.attr_out[from.index()].push(to);
            self.attr_in[to.index()].push(from);
        }
        self.edges.push(edge);
        Ok(())
    }

    /// Removes a node and every edge touching it. The handle is retired and
    /// the name becomes free again. Policies that referenced the node are left
    /// dangling and turn invalid.
    pub fn remove_node(&mut self, node: NodeRef) -> Result<()> {
        self.ensure_mutable()?;
        self.check(node)?;
        let name = std::mem::take(&mut self.nodes[node.index()].name);
        self.by_name.remove(&name);
        self.nodes[node.index()].name = name;
        self.nodes[node.index()].removed = true;
        self.edges.retain(|e| e.from != node && e.to != node);
        self.edge_set.retain(|e| e.from != node && e.to != node);
        for succ in std::mem::take(&mut self.attr_out[node.index()]) {
            self.attr_in[succ.index()].retain(|&n| n != node);
        }
        for pred in std::mem::take(&mut self.attr_in[node.index()]) {
            self.attr_out[pred.index()].retain(|&n| n != node);
        }
        Ok(())
    }

    pub fn find_node(&self, name: &str) -> Option<NodeRef> {
        self.by_name.get(name).copied()
    }

    /// The node behind a live handle.
    pub fn node(&self, node: NodeRef) -> Option<&Node> {
        self.nodes.get(node.index()).filter(|n| !n.removed)
    }

    /// Name of a node, including retired ones. Used for diagnostics.
    pub fn name_of(&self, node: NodeRef) -> Option<&str> {
        self.nodes.get(node.index()).map(|n| n.name.as_str())
    }

    pub fn contains(&self, node: NodeRef) -> bool {
        self.node(node).is_some()
    }

    pub fn nodes(&self) -> impl Iterator<Item = (NodeRef, &Node)> + '_ {
        self.nodes
            .iter()
            .enumerate()
            .filter(|(_, n)| !n.removed)
            .map(|(i, n)| (NodeRef(i as u32), n))
    }

    pub fn node_count(&self) -> usize {
        self.by_name.len()
    }

    /// Edges in insertion order.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, from: NodeRef, rel_type: &str, to: NodeRef) -> bool {
        self.edge_set.contains(&Edge {
            from,
            rel_type: rel_type.to_owned(),
            to,
        })
    }

    /// Direct `HAS_ATTR` successors of a node.
    pub fn attributes_of(&self, node: NodeRef) -> &[NodeRef] {
        self.attr_out.get(node.index()).map_or(&[], Vec::as_slice)
    }

    /// Nodes reachable from `start` over at most `max_depth` outgoing
    /// `HAS_ATTR` edges, with their minimal hop counts. `start` maps to 0.
    pub fn attribute_closure(&self, start: NodeRef, max_depth: usize) -> Result<HashMap<NodeRef, usize>> {
        self.check(start)?;
        let mut hops = HashMap::new();
        hops.insert(start, 0);
        let mut queue = VecDeque::from([(start, 0)]);
        while let Some((node, d)) = queue.pop_front() {
            if d == max_depth {
                continue;
            }
            for &next in &self.attr_out[node.index()] {
                if let Entry::Vacant(slot) = hops.entry(next) {
                    slot.insert(d + 1);
                    queue.push_back((next, d + 1));
                }
            }
        }
        Ok(hops)
    }

    /// Length of the longest `HAS_ATTR` chain, computed over a topological
    /// order of the attribute subgraph.
    pub fn graph_attribute_depth(&self) -> Result<usize> {
        let n = self.nodes.len();
        let mut indegree: Vec<usize> = self.attr_in.iter().map(Vec::len).collect();
        let mut longest = vec![0usize; n];
        let mut queue: VecDeque<usize> = (0..n).filter(|&i| indegree[i] == 0).collect();
        let mut seen = 0;
        let mut depth = 0;
        while let Some(i) = queue.pop_front() {
            seen += 1;
            depth = depth.max(longest[i]);
            for succ in &self.attr_out[i] {
                let j = succ.index();
                longest[j] = longest[j].max(longest[i] + 1);
                indegree[j] -= 1;
                if indegree[j] == 0 {
                    queue.push_back(j);
                }
            }
        }
        if seen == n {
            return Ok(depth);
        }
        // Every leftover node has a leftover predecessor, so walking backwards
        // inside the leftover set must revisit a node, and that node is on a cycle.
        let mut current = (0..n).find(|&i| indegree[i] > 0).expect("leftover node");
        let mut visited = HashSet::new();
        while visited.insert(current) {
            current = self.attr_in[current]
                .iter()
                .map(|p| p.index())
                .find(|&p| indegree[p] > 0)
                .expect("leftover predecessor");
        }
        Err(Error::AttributeCycle(self.nodes[current].name.clone()))
    }

    /// Checks acyclicity, fixes the attribute depth and forbids further mutation.
    pub fn freeze(&mut self) -> Result<()> {
        if self.frozen {
            return Ok(());
        }
        self.attr_depth = self.graph_attribute_depth()?;
        self.frozen = true;
        Ok(())
    }

    pub fn is_frozen(&self) -> bool {
        self.frozen
    }

    /// Traversal bound used by matching. Defaults to the longest chain.
    pub fn attr_depth(&self) -> usize {
        self.attr_depth
    }

    /// Raises the traversal bound. Values below the longest chain are rejected
    /// since they would hide satisfied conditions.
    pub fn set_attr_depth(&mut self, depth: usize) -> Result<()> {
        if !self.frozen {
            return Err(Error::NotFrozen);
        }
        let required = self.graph_attribute_depth()?;
        if depth < required {
            return Err(Error::DepthTooShallow {
                requested: depth,
                required,
            });
        }
        self.attr_depth = depth;
        Ok(())
    }

    pub(crate) fn check(&self, node: NodeRef) -> Result<()> {
        if self.contains(node) {
            Ok(())
        } else {
            Err(Error::UnknownNode(node.to_string()))
        }
    }

    fn ensure_mutable(&self) -> Result<()> {
        if self.frozen {
            Err(Error::Frozen)
        } else {
            Ok(())
        }
    }
}
