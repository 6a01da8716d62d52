//! Surface syntax: signature declarations, descriptions, principles,
//! relational clauses and queries.

mod ast;
mod lexer;
mod parser;
mod resolve;

use std::fmt;

pub use ast::{Conditional, Description, Goal, Grammar, Principle, Query, RawSignature, RelationClause, TypeDecl};
pub use parser::{parse_description, parse_goal, parse_grammar, parse_query, parse_signature};
pub use resolve::{resolve, Desc, DescDisplay, ResolveError, Scope, Slot};

pub(crate) use lexer::{Pos, Tok};
pub(crate) use parser::Parser;

/// Words that cannot name types, features or relations.
pub fn is_reserved(name: &str) -> bool {
    parser::is_keyword(name)
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl ParseError {
    pub(crate) fn new(pos: Pos, message: impl Into<String>) -> Self {
        ParseError {
            line: pos.line,
            col: pos.col,
            message: message.into(),
        }
    }

    pub(crate) fn at_line(line: usize, message: impl Into<String>) -> Self {
        ParseError {
            line,
            col: 1,
            message: message.into(),
        }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.col, self.message)
    }
}
