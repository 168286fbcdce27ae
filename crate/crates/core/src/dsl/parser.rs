use std::collections::BTreeMap;

use crate::graph::Scalar;
use crate::policy::{ConditionType, Decision};

use super::document::{EdgeDecl, ExprDecl, ModelDocument, NodeDecl, PolicyDecl};
use super::lexer::{tokenize, Tok, Token};
use super::{Diagnostic, DiagnosticKind, Position};

const STATEMENT_KEYWORDS: [&str; 3] = ["node", "edge", "policy"];

struct Parser {
    tokens: Vec<Token>,
    at: usize,
    errors: Vec<Diagnostic>,
}

type Parsed<T> = Result<T, Diagnostic>;

pub(crate) fn parse(text: &str) -> Result<ModelDocument, Vec<Diagnostic>> {
    let (tokens, lex_errors) = tokenize(text);
    let mut p = Parser {
        tokens,
        at: 0,
        errors: lex_errors,
    };
    let mut doc = ModelDocument::default();
    while p.peek() != &Tok::Eof {
        let start = p.at;
        if let Err(err) = p.statement(&mut doc) {
            p.errors.push(err);
            p.recover(start);
        }
    }
    if p.errors.is_empty() {
        Ok(doc)
    } else {
        p.errors.sort_by_key(|d| d.position);
        Err(p.errors)
    }
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.at].tok
    }

    fn peek_at(&self, offset: usize) -> &Tok {
        let i = (self.at + offset).min(self.tokens.len() - 1);
        &self.tokens[i].tok
    }

    fn pos(&self) -> Position {
        self.tokens[self.at].pos
    }

    fn bump(&mut self) -> Token {
        let token = self.tokens[self.at].clone();
        if token.tok != Tok::Eof {
            self.at += 1;
        }
        token
    }

    fn unexpected(&self, expected: &[&str]) -> Diagnostic {
        Diagnostic::syntax(
            self.pos(),
            expected.iter().map(|s| s.to_string()).collect(),
            self.peek().describe(),
        )
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Parsed<()> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected(&[what]))
        }
    }

    fn is_keyword(&self, word: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == word)
    }

    /// Skips to the start of the next declaration.
    fn recover(&mut self, start: usize) {
        if self.at == start {
            self.bump();
        }
        while !matches!(self.peek(), Tok::Eof) && !STATEMENT_KEYWORDS.iter().any(|k| self.is_keyword(k)) {
            self.bump();
        }
    }

    fn statement(&mut self, doc: &mut ModelDocument) -> Parsed<()> {
        let position = self.pos();
        match self.peek() {
            Tok::Ident(k) if k == "node" => {
                self.bump();
                doc.nodes.push(self.node(position)?);
            }
            Tok::Ident(k) if k == "edge" => {
                self.bump();
                doc.edges.push(self.edge(position)?);
            }
            Tok::Ident(k) if k == "policy" => {
                self.bump();
                doc.policies.push(self.policy(position)?);
            }
            _ => return Err(self.unexpected(&["`node`", "`edge`", "`policy`"])),
        }
        Ok(())
    }

    fn name(&mut self) -> Parsed<String> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            Tok::Str(s) if !s.is_empty() => {
                self.bump();
                Ok(s)
            }
            _ => Err(self.unexpected(&["name"])),
        }
    }

    fn ident(&mut self, what: &str) -> Parsed<String> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            _ => Err(self.unexpected(&[what])),
        }
    }

    fn node(&mut self, position: Position) -> Parsed<NodeDecl> {
        let name = self.name()?;
        let mut labels = Vec::new();
        if *self.peek() == Tok::Colon {
            self.bump();
            labels.push(self.ident("label")?);
            while *self.peek() == Tok::Comma {
                self.bump();
                labels.push(self.ident("label")?);
            }
        }
        let mut properties = BTreeMap::new();
        if *self.peek() == Tok::LBrace {
            self.bump();
            loop {
                let key_pos = self.pos();
                let key = self.ident("property name")?;
                self.expect(Tok::Eq, "'='")?;
                let value = self.scalar()?;
                if properties.insert(key.clone(), value).is_some() {
                    return Err(Diagnostic {
                        position: key_pos,
                        kind: DiagnosticKind::DuplicateProperty(key),
                    });
                }
                match self.peek() {
                    Tok::Comma => {
                        self.bump();
                    }
                    Tok::RBrace => {
                        self.bump();
                        break;
                    }
                    _ => return Err(self.unexpected(&["','", "'}'"])),
                }
            }
        }
        Ok(NodeDecl {
            name,
            labels,
            properties,
            position,
        })
    }

    fn scalar(&mut self) -> Parsed<Scalar> {
        let value = match self.peek().clone() {
            Tok::Str(s) => Scalar::Str(s),
            Tok::Int(v) => Scalar::Int(v),
            Tok::Dec(v) => Scalar::Decimal(v),
            Tok::Ident(s) if s == "true" => Scalar::Bool(true),
            Tok::Ident(s) if s == "false" => Scalar::Bool(false),
            _ => return Err(self.unexpected(&["string", "number", "`true`", "`false`"])),
        };
        self.bump();
        Ok(value)
    }

    fn edge(&mut self, position: Position) -> Parsed<EdgeDecl> {
        let from = self.name()?;
        self.expect(Tok::EdgeOpen, "'-['")?;
        let rel_type = self.ident("relationship type")?;
        self.expect(Tok::EdgeClose, "']->'")?;
        let to = self.name()?;
        Ok(EdgeDecl {
            from,
            rel_type,
            to,
            position,
        })
    }

    fn policy(&mut self, position: Position) -> Parsed<PolicyDecl> {
        let name = self.name()?;
        let decision = match self.peek() {
            Tok::Ident(s) if s == "permit" => Decision::Permit,
            Tok::Ident(s) if s == "deny" => Decision::Deny,
            _ => return Err(self.unexpected(&["`permit`", "`deny`"])),
        };
        self.bump();
        let mut score = None;
        if self.is_keyword("score") {
            self.bump();
            match *self.peek() {
                Tok::Int(v) => {
                    self.bump();
                    score = Some(v);
                }
                _ => return Err(self.unexpected(&["integer"])),
            }
        }
        self.expect(Tok::LBrace, "'{'")?;
        let mut conditions = Vec::new();
        loop {
            self.slot(&mut conditions)?;
            if *self.peek() == Tok::RBrace {
                self.bump();
                break;
            }
        }
        Ok(PolicyDecl {
            name,
            decision,
            score,
            conditions,
            position,
        })
    }

    fn slot_start(&self) -> Option<ConditionType> {
        match (self.peek(), self.peek_at(1)) {
            (Tok::Ident(s), Tok::Colon) => ConditionType::from_keyword(s),
            _ => None,
        }
    }

    fn slot(&mut self, out: &mut Vec<(ConditionType, ExprDecl)>) -> Parsed<()> {
        let Some(slot) = self.slot_start() else {
            return Err(self.unexpected(&["`subject`", "`action`", "`object`"]));
        };
        self.bump();
        self.bump();
        out.push((slot, self.expr()?));
        while *self.peek() == Tok::Semi {
            self.bump();
            if *self.peek() == Tok::RBrace || self.slot_start().is_some() {
                break;
            }
            out.push((slot, self.expr()?));
        }
        match self.peek() {
            Tok::RBrace => Ok(()),
            _ if self.slot_start().is_some() => Ok(()),
            _ => Err(self.unexpected(&["';'", "'}'"])),
        }
    }

    fn expr(&mut self) -> Parsed<ExprDecl> {
        if self.is_keyword("not") {
            self.bump();
            return Ok(ExprDecl::Not(Box::new(self.expr()?)));
        }
        if *self.peek() != Tok::LParen {
            return self.name().map(ExprDecl::Name);
        }
        self.bump();
        let mut operands = vec![self.expr()?];
        let mut op: Option<String> = None;
        loop {
            match self.peek().clone() {
                Tok::RParen if op.is_some() => {
                    self.bump();
                    break;
                }
                Tok::Ident(word) if word == "and" || word == "or" => {
                    if op.as_ref().is_some_and(|o| *o != word) {
                        return Err(Diagnostic {
                            position: self.pos(),
                            kind: DiagnosticKind::MixedOperators,
                        });
                    }
                    self.bump();
                    op = Some(word);
                    operands.push(self.expr()?);
                }
                _ if op.is_some() => return Err(self.unexpected(&["`and`", "`or`", "')'"])),
                _ => return Err(self.unexpected(&["`and`", "`or`"])),
            }
        }
        Ok(match op.as_deref() {
            Some("and") => ExprDecl::And(operands),
            _ => ExprDecl::Or(operands),
        })
    }
}
