use thiserror::Error;

use crate::policy::ConditionType;

/// Errors raised while building or querying a model.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("node name must not be empty")]
    EmptyName,

    #[error("a node named {0:?} already exists")]
    DuplicateName(String),

    #[error("unknown node {0}")]
    UnknownNode(String),

    #[error("node {0:?} cannot carry both the Primitive and Policy labels")]
    ConflictingLabels(String),

    #[error("property key \"name\" is reserved (node {0:?})")]
    ReservedProperty(String),

    #[error("HAS_ATTR self-loop on node {0:?}")]
    SelfLoopOnHasAttr(String),

    #[error("HAS_ATTR cycle through node {0:?}")]
    AttributeCycle(String),

    #[error("attribute depth {requested} is below the longest attribute chain ({required})")]
    DepthTooShallow { requested: usize, required: usize },

    #[error("the model is frozen and cannot be modified")]
    Frozen,

    #[error("the model must be frozen before it is queried")]
    NotFrozen,

    #[error("a policy named {0:?} already exists")]
    DuplicatePolicyName(String),

    #[error("unknown policy {0:?}")]
    UnknownPolicy(String),

    #[error("policy {policy:?} has no {} condition", missing.iter().map(|t| t.rel_type()).collect::<Vec<_>>().join(", "))]
    MissingConditionType {
        policy: String,
        missing: Vec<ConditionType>,
    },

    #[error("policy {policy:?} references unknown node {target}")]
    DanglingConditionRef { policy: String, target: String },

    #[error("policy {policy:?} uses policy node {target:?} as a condition")]
    ConditionOnPolicyNode { policy: String, target: String },

    #[error("compound condition in policy {0:?} needs at least two operands")]
    DegenerateCompound(String),

    #[error("policy {0:?} contains a negation and cannot be expanded to simple policies")]
    NegationNotExpandable(String),

    #[error("policy {policy:?} does not match the query")]
    NotMatching { policy: String },

    #[error("unknown combining algorithm {0:?}")]
    UnknownAlgorithm(String),

    #[error("combining algorithm {0} has no Cypher form")]
    UnsupportedAlgorithm(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
