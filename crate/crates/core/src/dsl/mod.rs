//! The `.abac` model language.
//!
//! A model file declares nodes, edges and policies in any order:
//!
//! ```text
//! # primitives and attributes
//! node John: Subject, User, Primitive
//! node Doctor: Role, Attribute
//! edge John -[HAS_ATTR]-> Doctor
//!
//! policy Rounds permit score 2 {
//!     subject: Doctor; not Suspended;
//!     action: (Read or Write);
//!     object: "Hospital Records";
//! }
//! ```
//!
//! Names are bare identifiers or double-quoted strings. Several expressions
//! in one slot must all hold. [`load_model`] turns text into a frozen
//! [`Model`]; every problem found is returned as a positioned [`Diagnostic`].

mod cypher;
mod document;
mod lexer;
mod parser;
mod serialize;

use std::fmt;

use thiserror::Error;

use crate::error::Error;
use crate::model::Model;

pub use cypher::{emit_cypher_data, emit_cypher_decision_query, emit_cypher_policies};
pub use document::{EdgeDecl, ExprDecl, ModelDocument, NodeDecl, PolicyDecl};
pub use serialize::serialize_model;

/// 1-based line and column. Declarations not read from text sit at 0:0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Position {
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DiagnosticKind {
    #[error("expected {}, found {found}", expected.join(" or "))]
    Syntax { expected: Vec<String>, found: String },

    #[error("duplicate property {0:?}")]
    DuplicateProperty(String),

    #[error("cannot mix `and` and `or` in one group; add parentheses")]
    MixedOperators,

    #[error(transparent)]
    Model(#[from] Error),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub position: Position,
    pub kind: DiagnosticKind,
}

impl Diagnostic {
    pub(crate) fn syntax(position: Position, expected: Vec<String>, found: String) -> Self {
        Diagnostic {
            position,
            kind: DiagnosticKind::Syntax { expected, found },
        }
    }

    pub(crate) fn model(position: Position, error: Error) -> Self {
        Diagnostic {
            position,
            kind: DiagnosticKind::Model(error),
        }
    }

    pub fn is_syntax(&self) -> bool {
        !matches!(self.kind, DiagnosticKind::Model(_))
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.position, self.kind)
    }
}

impl std::error::Error for Diagnostic {}

/// Parses text into a document without checking names or policies.
pub fn parse_document(text: &str) -> Result<ModelDocument, Vec<Diagnostic>> {
    parser::parse(text)
}

/// Parses text and checks that it loads, returning the document.
pub fn parse_model(text: &str) -> Result<ModelDocument, Vec<Diagnostic>> {
    let doc = parse_document(text)?;
    doc.load()?;
    Ok(doc)
}

/// Parses and loads text into a frozen model.
pub fn load_model(text: &str) -> Result<Model, Vec<Diagnostic>> {
    parse_document(text)?.load()
}
