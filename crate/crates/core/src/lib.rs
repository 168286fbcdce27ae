//! Attribute-based access control over a property graph.
//!
//! Subjects, actions, objects and their attributes are nodes joined by
//! `HAS_ATTR` edges. A policy requires condition nodes for each of the three
//! query slots; it matches an access query when every condition is reachable
//! from the corresponding query node within the graph's attribute depth.
//! Matching policies are reduced to Permit or Deny by a [`CombiningAlgorithm`].
//!
//! ```
//! use abac_graph::{dsl, evaluate, CombiningAlgorithm, Decision};
//!
//! let model = dsl::load_model(abac_graph::HEALTHCARE_MODEL).unwrap();
//! let q = model.query("John", "Write", "MR_1234").unwrap();
//! let result = evaluate(&model, &q, CombiningAlgorithm::DenyOverrides).unwrap();
//! assert_eq!(result.decision, Decision::Permit);
//! ```

pub mod combiner;
pub mod dsl;
pub mod error;
pub mod graph;
pub mod matcher;
pub mod model;
pub mod policy;

pub use combiner::{combine, evaluate, CombiningAlgorithm, EvaluationResult};
pub use error::{Error, Result};
pub use graph::{Graph, Node, NodeRef, Properties, Scalar, HAS_ATTR};
pub use matcher::{
    eval_condition_expr, is_satisfied, matching_policies, matching_policies_oracle, policy_length,
    AccessQuery, PolicyMatch,
};
pub use model::Model;
pub use policy::{
    dnf_expand, ConditionExpr, ConditionType, Conditions, Decision, Policy, PolicyId, ValidityReport,
};

/// The hospital records sample model: four staff and patients, a medical
/// record, a profile, two actions and three permit policies.
pub const HEALTHCARE_MODEL: &str = include_str!("../data/healthcare.abac");
