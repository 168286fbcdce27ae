//! Seeded random models for property and acceptance tests.
#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap, VecDeque};

use abac_graph::dsl::{EdgeDecl, ExprDecl, ModelDocument, NodeDecl, PolicyDecl, Position};
use abac_graph::{
    AccessQuery, ConditionExpr, ConditionType, Conditions, Decision, Model, NodeRef, Properties, Scalar,
};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum ExprSpec {
    Ref(usize),
    Not(Box<ExprSpec>),
    And(Vec<ExprSpec>),
    Or(Vec<ExprSpec>),
}

impl ExprSpec {
    pub fn to_expr(&self, refs: &[NodeRef]) -> ConditionExpr {
        match self {
            ExprSpec::Ref(i) => ConditionExpr::Ref(refs[*i]),
            ExprSpec::Not(e) => ConditionExpr::Not(Box::new(e.to_expr(refs))),
            ExprSpec::And(xs) => ConditionExpr::And(xs.iter().map(|x| x.to_expr(refs)).collect()),
            ExprSpec::Or(xs) => ConditionExpr::Or(xs.iter().map(|x| x.to_expr(refs)).collect()),
        }
    }

    /// Truth value given the set of nodes reachable from the query primitive.
    pub fn holds(&self, reach: &BTreeSet<usize>) -> bool {
        match self {
            ExprSpec::Ref(i) => reach.contains(i),
            ExprSpec::Not(e) => !e.holds(reach),
            ExprSpec::And(xs) => xs.iter().all(|x| x.holds(reach)),
            ExprSpec::Or(xs) => xs.iter().any(|x| x.holds(reach)),
        }
    }
}

#[derive(Debug, Clone)]
pub struct PolicySpec {
    pub name: String,
    pub decision: Decision,
    pub score: i64,
    pub conditions: [Vec<ExprSpec>; 3],
}

/// Plain description of a model. Node `i` is named `n{i}`.
#[derive(Debug, Clone, Default)]
pub struct ModelSpec {
    pub layers: Vec<usize>,
    pub has_attr: Vec<(usize, usize)>,
    pub other: Vec<(usize, &'static str, usize)>,
    pub policies: Vec<PolicySpec>,
    /// The query each generated policy was drawn around.
    pub anchors: Vec<[usize; 3]>,
}

impl ModelSpec {
    pub fn node_count(&self) -> usize {
        self.layers.len()
    }

    pub fn name(i: usize) -> String {
        format!("n{i}")
    }

    /// Builds the model and returns it unfrozen with its node handles.
    pub fn build_unfrozen(&self) -> (Model, Vec<NodeRef>) {
        let mut m = Model::new();
        let refs: Vec<NodeRef> = self
            .layers
            .iter()
            .enumerate()
            .map(|(i, layer)| {
                let label = if *layer == 0 { "Primitive" } else { "Attribute" };
                m.add_node(&Self::name(i), [label], Properties::new()).unwrap()
            })
            .collect();
        for &(a, b) in &self.has_attr {
            m.add_edge(refs[a], "HAS_ATTR", refs[b]).unwrap();
        }
        for &(a, rel, b) in &self.other {
            m.add_edge(refs[a], rel, refs[b]).unwrap();
        }
        for p in &self.policies {
            let mut c = Conditions::new();
            for slot in ConditionType::ALL {
                for e in &p.conditions[slot.index()] {
                    c.insert(slot, e.to_expr(&refs));
                }
            }
            m.create_policy(&p.name, p.decision, Some(p.score), c).unwrap();
        }
        (m, refs)
    }

    pub fn build(&self) -> (Model, Vec<NodeRef>) {
        let (mut m, refs) = self.build_unfrozen();
        m.freeze().unwrap();
        (m, refs)
    }

    /// Minimal hop counts over HAS_ATTR from `start`, unbounded.
    pub fn reach(&self, start: usize) -> HashMap<usize, usize> {
        let mut out = HashMap::from([(start, 0)]);
        let mut queue = VecDeque::from([start]);
        while let Some(x) = queue.pop_front() {
            let d = out[&x];
            for &(a, b) in &self.has_attr {
                if a == x && !out.contains_key(&b) {
                    out.insert(b, d + 1);
                    queue.push_back(b);
                }
            }
        }
        out
    }

    pub fn reach_set(&self, start: usize) -> BTreeSet<usize> {
        self.reach(start).into_keys().collect()
    }

    /// Longest HAS_ATTR chain, by exhaustive search.
    pub fn depth(&self) -> usize {
        fn longest(spec: &ModelSpec, x: usize) -> usize {
            spec.has_attr
                .iter()
                .filter(|(a, _)| *a == x)
                .map(|&(_, b)| 1 + longest(spec, b))
                .max()
                .unwrap_or(0)
        }
        (0..self.node_count())
            .map(|x| longest(self, x))
            .max()
            .unwrap_or(0)
    }

    pub fn random_query(&self, rng: &mut ChaCha8Rng) -> [usize; 3] {
        let n = self.node_count();
        let primitives: Vec<usize> = (0..n).filter(|i| self.layers[*i] == 0).collect();
        [(); 3].map(|_| {
            if rng.gen_bool(0.8) {
                *primitives.choose(rng).unwrap()
            } else {
                rng.gen_range(0..n)
            }
        })
    }

    /// A random query, or half of the time a policy's anchor query.
    pub fn probe_query(&self, rng: &mut ChaCha8Rng) -> [usize; 3] {
        if !self.anchors.is_empty() && rng.gen_bool(0.5) {
            *self.anchors.choose(rng).unwrap()
        } else {
            self.random_query(rng)
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct GenParams {
    pub min_nodes: usize,
    pub max_nodes: usize,
    pub max_depth: usize,
    pub max_policies: usize,
    pub max_out_degree: usize,
    /// Probability that a slot gets a compound expression.
    pub compound: f64,
    pub negation: bool,
}

impl GenParams {
    pub fn simple(max_nodes: usize, max_depth: usize, max_policies: usize) -> Self {
        GenParams {
            min_nodes: 3,
            max_nodes,
            max_depth,
            max_policies,
            max_out_degree: 3,
            compound: 0.0,
            negation: false,
        }
    }

    pub fn compound(max_nodes: usize, max_policies: usize, negation: bool) -> Self {
        GenParams {
            compound: 0.6,
            negation,
            ..GenParams::simple(max_nodes, 3, max_policies)
        }
    }
}

/// A layered DAG: HAS_ATTR edges only go from a lower layer to a higher one,
/// so chains are never longer than the number of layers minus one.
pub fn random_spec(rng: &mut ChaCha8Rng, p: &GenParams) -> ModelSpec {
    let n = rng.gen_range(p.min_nodes..=p.max_nodes.max(p.min_nodes));
    let top = rng.gen_range(0..=p.max_depth);
    let layers: Vec<usize> = (0..n)
        .map(|i| if i < 3 { 0 } else { rng.gen_range(0..=top) })
        .collect();

    let mut has_attr = BTreeSet::new();
    for a in 0..n {
        let higher: Vec<usize> = (0..n).filter(|b| layers[*b] > layers[a]).collect();
        if higher.is_empty() {
            continue;
        }
        for _ in 0..rng.gen_range(0..=p.max_out_degree) {
            has_attr.insert((a, *higher.choose(rng).unwrap()));
        }
    }
    let mut other = Vec::new();
    for _ in 0..rng.gen_range(0..=n / 4) {
        other.push((rng.gen_range(0..n), "OWNER_OF", rng.gen_range(0..n)));
    }

    let mut spec = ModelSpec {
        layers,
        has_attr: has_attr.into_iter().collect(),
        other,
        policies: Vec::new(),
        anchors: Vec::new(),
    };

    let count = rng.gen_range(0..=p.max_policies);
    for k in 0..count {
        // Anchor each policy on a query so that a good share of them match.
        let anchor = spec.random_query(rng);
        let conditions = [0, 1, 2].map(|slot| {
            let reach: Vec<usize> = spec.reach_set(anchor[slot]).into_iter().collect();
            let mut pick = |rng: &mut ChaCha8Rng| {
                if rng.gen_bool(0.85) {
                    *reach.choose(rng).unwrap()
                } else {
                    rng.gen_range(0..n)
                }
            };
            let mut exprs = BTreeSet::new();
            for _ in 0..rng.gen_range(1..=3) {
                let e = if rng.gen_bool(p.compound) {
                    random_compound(rng, &mut pick, 2, p.negation)
                } else {
                    ExprSpec::Ref(pick(rng))
                };
                exprs.insert(e);
            }
            exprs.into_iter().collect()
        });
        spec.policies.push(PolicySpec {
            name: format!("P{k}"),
            decision: if rng.gen_bool(0.6) {
                Decision::Permit
            } else {
                Decision::Deny
            },
            score: rng.gen_range(-3..=3),
            conditions,
        });
        spec.anchors.push(anchor);
    }
    spec
}

fn random_compound(
    rng: &mut ChaCha8Rng,
    pick: &mut dyn FnMut(&mut ChaCha8Rng) -> usize,
    depth: usize,
    negation: bool,
) -> ExprSpec {
    let leaf = depth == 0 || rng.gen_bool(0.3);
    if leaf {
        return ExprSpec::Ref(pick(rng));
    }
    match rng.gen_range(0..if negation { 3 } else { 2 }) {
        0 | 1 => {
            let children = (0..rng.gen_range(2..=3))
                .map(|_| random_compound(rng, pick, depth - 1, negation))
                .collect();
            if rng.gen_bool(0.5) {
                ExprSpec::And(children)
            } else {
                ExprSpec::Or(children)
            }
        }
        _ => ExprSpec::Not(Box::new(random_compound(rng, pick, depth - 1, negation))),
    }
}

pub fn query(refs: &[NodeRef], q: [usize; 3]) -> AccessQuery {
    AccessQuery::new(refs[q[0]], refs[q[1]], refs[q[2]])
}

// Documents with awkward names, for the text format.

const NAME_PIECES: [&str; 18] = [
    "a",
    "Doctor",
    "node",
    "not",
    "or",
    "subject",
    "Peter's",
    "x y",
    "\"q\"",
    "back\\slash",
    "tab\there",
    "#hash",
    "ünï",
    "1st",
    "_u",
    "-",
    "edge",
    "true",
];

fn random_name(rng: &mut ChaCha8Rng) -> String {
    let parts = rng.gen_range(1..=3);
    (0..parts)
        .map(|_| *NAME_PIECES.choose(rng).unwrap())
        .collect::<Vec<_>>()
        .join("")
}

fn random_scalar(rng: &mut ChaCha8Rng) -> Scalar {
    match rng.gen_range(0..4) {
        0 => Scalar::Str(random_name(rng)),
        1 => Scalar::Int(rng.gen_range(-1_000_000..1_000_000)),
        2 => Scalar::Decimal(f64::from(rng.gen_range(-4000..4000)) / 64.0 + 0.5),
        _ => Scalar::Bool(rng.gen()),
    }
}

fn random_decl_expr(rng: &mut ChaCha8Rng, names: &[String], depth: usize) -> ExprDecl {
    if depth == 0 || rng.gen_bool(0.5) {
        return ExprDecl::Name(names.choose(rng).unwrap().clone());
    }
    match rng.gen_range(0..3) {
        0 => ExprDecl::Not(Box::new(random_decl_expr(rng, names, depth - 1))),
        k => {
            let xs = (0..rng.gen_range(2..=3))
                .map(|_| random_decl_expr(rng, names, depth - 1))
                .collect();
            if k == 1 {
                ExprDecl::And(xs)
            } else {
                ExprDecl::Or(xs)
            }
        }
    }
}

/// A document that loads: unique names, acyclic HAS_ATTR, every policy
/// complete and referring to declared nodes.
pub fn random_document(rng: &mut ChaCha8Rng) -> ModelDocument {
    let mut names: Vec<String> = Vec::new();
    for _ in 0..rng.gen_range(1..=12) {
        let name = random_name(rng);
        if !names.contains(&name) {
            names.push(name);
        }
    }
    const LABELS: [&str; 8] = [
        "Primitive",
        "Attribute",
        "Subject",
        "Role",
        "node",
        "Group",
        "Object",
        "Action",
    ];
    let nodes = names
        .iter()
        .map(|name| {
            let label_count = rng.gen_range(0..=3);
            let prop_count = rng.gen_range(0..=2);
            NodeDecl {
                name: name.clone(),
                labels: LABELS
                    .choose_multiple(rng, label_count)
                    .map(|s| s.to_string())
                    .collect(),
                properties: (0..prop_count)
                    .map(|i| (["size", "tag", "ok"][i].to_string(), random_scalar(rng)))
                    .collect(),
                position: Position::default(),
            }
        })
        .collect();
    let n = names.len();
    let mut edges = Vec::new();
    for _ in 0..rng.gen_range(0..=2 * n) {
        let a = rng.gen_range(0..n);
        let b = rng.gen_range(0..n);
        let rel = ["HAS_ATTR", "OWNER_OF", "KNOWS"][rng.gen_range(0..3)];
        // HAS_ATTR only forwards in declaration order, so no cycles.
        if rel == "HAS_ATTR" && a >= b {
            continue;
        }
        edges.push(EdgeDecl {
            from: names[a].clone(),
            rel_type: rel.to_string(),
            to: names[b].clone(),
            position: Position::default(),
        });
    }
    let policies = (0..rng.gen_range(0..=4))
        .map(|k| {
            let mut conditions = Vec::new();
            for slot in ConditionType::ALL {
                for _ in 0..rng.gen_range(1..=2) {
                    conditions.push((slot, random_decl_expr(rng, &names, 2)));
                }
            }
            conditions.shuffle(rng);
            PolicyDecl {
                name: if rng.gen_bool(0.3) {
                    format!("{}{k}", random_name(rng))
                } else {
                    format!("P{k}")
                },
                decision: if rng.gen() {
                    Decision::Permit
                } else {
                    Decision::Deny
                },
                score: if rng.gen() {
                    Some(rng.gen_range(-9..=9))
                } else {
                    None
                },
                conditions,
                position: Position::default(),
            }
        })
        .collect();
    ModelDocument {
        nodes,
        edges,
        policies,
    }
}

pub type NodeSignature = (String, Vec<String>, Vec<(String, Scalar)>);

/// Name-based description of a model, equal for isomorphic models.
#[derive(Debug, PartialEq)]
pub struct Signature {
    pub nodes: Vec<NodeSignature>,
    pub edges: BTreeSet<(String, String, String)>,
    pub policies: Vec<(String, Decision, i64, [BTreeSet<String>; 3])>,
}

fn render(m: &Model, e: &ConditionExpr) -> String {
    match e {
        ConditionExpr::Ref(r) => format!("{:?}", m.graph().name_of(*r).unwrap()),
        ConditionExpr::Not(x) => format!("!{}", render(m, x)),
        ConditionExpr::And(xs) => format!(
            "&[{}]",
            xs.iter().map(|x| render(m, x)).collect::<Vec<_>>().join(",")
        ),
        ConditionExpr::Or(xs) => format!(
            "|[{}]",
            xs.iter().map(|x| render(m, x)).collect::<Vec<_>>().join(",")
        ),
    }
}

pub fn signature(m: &Model) -> Signature {
    let g = m.graph();
    let mut nodes: Vec<_> = g
        .nodes()
        .map(|(_, n)| {
            let mut labels = n.labels().to_vec();
            labels.sort();
            let props = n
                .properties()
                .iter()
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect();
            (n.name().to_owned(), labels, props)
        })
        .collect();
    nodes.sort_by(|a, b| a.0.cmp(&b.0));
    let edges = g
        .edges()
        .iter()
        .map(|e| {
            (
                g.name_of(e.from).unwrap().to_owned(),
                e.rel_type.clone(),
                g.name_of(e.to).unwrap().to_owned(),
            )
        })
        .collect();
    let policies = m
        .policies()
        .iter()
        .map(|(_, p)| {
            let conds =
                ConditionType::ALL.map(|t| p.conditions.get(t).iter().map(|e| render(m, e)).collect());
            (p.name.clone(), p.decision, p.score, conds)
        })
        .collect();
    Signature {
        nodes,
        edges,
        policies,
    }
}

/// Inputs that must be rejected with positioned errors.
pub const MALFORMED: [&str; 24] = [
    "node",
    "node \"\"",
    "node A:",
    "node A: ,",
    "node A { x }",
    "node A { x = }",
    "node A { x = 1, x = 2 }",
    "node A { x = 1",
    "node \"unterminated",
    "edge A -[HAS_ATTR]->",
    "edge A -[]-> B",
    "edge A HAS_ATTR B",
    "edge A -[HAS_ATTR] B",
    "policy P",
    "policy P allow { }",
    "policy P permit { }",
    "policy P permit score x { subject: a }",
    "policy P permit { subject: }",
    "policy P permit { subject: a b }",
    "policy P permit { subject: (a and b or c) }",
    "policy P permit { subject: (a) }",
    "policy P permit { subject: not }",
    "nodes A",
    "node A @",
];
