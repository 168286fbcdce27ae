//! Policy combining: reduce the matching policies of a query to one decision.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::matcher::{matching_policies, AccessQuery, PolicyMatch};
use crate::model::Model;
use crate::policy::Decision;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum CombiningAlgorithm {
    #[default]
    DenyOverrides,
    PermitOverrides,
    FirstApplicable,
    MaxScoreDenyOverrides,
    ShortestPathDenyOverrides,
}

impl CombiningAlgorithm {
    pub const ALL: [CombiningAlgorithm; 5] = [
        CombiningAlgorithm::DenyOverrides,
        CombiningAlgorithm::PermitOverrides,
        CombiningAlgorithm::FirstApplicable,
        CombiningAlgorithm::MaxScoreDenyOverrides,
        CombiningAlgorithm::ShortestPathDenyOverrides,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CombiningAlgorithm::DenyOverrides => "deny-overrides",
            CombiningAlgorithm::PermitOverrides => "permit-overrides",
            CombiningAlgorithm::FirstApplicable => "first-applicable",
            CombiningAlgorithm::MaxScoreDenyOverrides => "max-score-deny-overrides",
            CombiningAlgorithm::ShortestPathDenyOverrides => "shortest-path-deny-overrides",
        }
    }
}

impl fmt::Display for CombiningAlgorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CombiningAlgorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::UnknownAlgorithm(s.to_owned()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvaluationResult {
    pub decision: Decision,
    pub algorithm: CombiningAlgorithm,
    /// All matching policies, by sequence number.
    pub matches: Vec<PolicyMatch>,
    /// The matches left after the algorithm's restriction step (max score,
    /// min length, first match); equal to `matches` otherwise.
    pub considered: Vec<PolicyMatch>,
    /// The matches that produced the decision.
    pub deciding: Vec<PolicyMatch>,
}

fn with_decision(matches: &[PolicyMatch], decision: Decision) -> Vec<PolicyMatch> {
    matches
        .iter()
        .filter(|m| m.decision == decision)
        .cloned()
        .collect()
}

/// Deny if nothing matched or anything denies.
fn deny_overrides(matches: &[PolicyMatch]) -> (Decision, Vec<PolicyMatch>) {
    let denies = with_decision(matches, Decision::Deny);
    if matches.is_empty() || !denies.is_empty() {
        (Decision::Deny, denies)
    } else {
        (Decision::Permit, matches.to_vec())
    }
}

pub fn combine(matches: &[PolicyMatch], algorithm: CombiningAlgorithm) -> EvaluationResult {
    let considered: Vec<PolicyMatch> = match algorithm {
        CombiningAlgorithm::DenyOverrides | CombiningAlgorithm::PermitOverrides => matches.to_vec(),
        CombiningAlgorithm::FirstApplicable => matches
            .iter()
            .min_by_key(|m| m.seq)
            .cloned()
            .into_iter()
            .collect(),
        CombiningAlgorithm::MaxScoreDenyOverrides => match matches.iter().map(|m| m.score).max() {
            Some(top) => matches.iter().filter(|m| m.score == top).cloned().collect(),
            None => Vec::new(),
        },
        CombiningAlgorithm::ShortestPathDenyOverrides => match matches.iter().map(|m| m.total_len).min() {
            Some(min) => matches.iter().filter(|m| m.total_len == min).cloned().collect(),
            None => Vec::new(),
        },
    };

    let (decision, deciding) = match algorithm {
        CombiningAlgorithm::PermitOverrides => {
            let permits = with_decision(&considered, Decision::Permit);
            if permits.is_empty() {
                (Decision::Deny, with_decision(&considered, Decision::Deny))
            } else {
                (Decision::Permit, permits)
            }
        }
        CombiningAlgorithm::FirstApplicable => match considered.first() {
            Some(first) => (first.decision, considered.clone()),
            None => (Decision::Deny, Vec::new()),
        },
        _ => deny_overrides(&considered),
    };

    EvaluationResult {
        decision,
        algorithm,
        matches: matches.to_vec(),
        considered,
        deciding,
    }
}

/// Matches `q` against the model and combines the result.
pub fn evaluate(model: &Model, q: &AccessQuery, algorithm: CombiningAlgorithm) -> Result<EvaluationResult> {
    let matches = matching_policies(model, q)?;
    Ok(combine(&matches, algorithm))
}
