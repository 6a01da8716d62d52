use std::collections::HashMap;

use super::ast::{Conditional, Description, Goal, Grammar, Principle, Query, RawSignature, RelationClause, TypeDecl};
use super::lexer::{tokenize, Pos, Spanned, Tok};
use super::ParseError;

const KEYWORDS: &[&str] = &["sub", "intro", "goal", "if", "true", "fail", "fswhen"];

pub(crate) fn is_keyword(s: &str) -> bool {
    KEYWORDS.contains(&s)
}

pub(crate) struct Parser {
    toks: Vec<Spanned>,
    at: usize,
    anon: usize,
}

impl Parser {
    pub(crate) fn new(src: &str) -> Result<Self, ParseError> {
        Ok(Parser {
            toks: tokenize(src)?,
            at: 0,
            anon: 0,
        })
    }

    pub(crate) fn peek(&self) -> &Tok {
        &self.toks[self.at].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.at + k).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn line(&self) -> usize {
        self.pos().line
    }

    pub(crate) fn pos(&self) -> Pos {
        self.toks[self.at].pos
    }

    pub(crate) fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].tok.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    pub(crate) fn error(&self, msg: impl Into<String>) -> ParseError {
        ParseError::new(self.pos(), msg)
    }

    fn unexpected(&self, wanted: &str) -> ParseError {
        self.error(format!("expected {wanted}, found {}", self.peek()))
    }

    pub(crate) fn expect(&mut self, tok: Tok) -> Result<(), ParseError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected(&tok.to_string()))
        }
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.bump();
            true
        } else {
            false
        }
    }

    fn eat_keyword(&mut self, kw: &str) -> bool {
        if matches!(self.peek(), Tok::Atom(a) if a == kw) {
            self.bump();
            true
        } else {
            false
        }
    }

    pub(crate) fn at_eof(&self) -> bool {
        *self.peek() == Tok::Eof
    }

    pub(crate) fn name(&mut self, what: &str) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Atom(a) if !is_keyword(&a) => {
                self.bump();
                Ok(a)
            }
            _ => Err(self.unexpected(what)),
        }
    }

    fn var(&mut self) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Var(v) => {
                self.bump();
                Ok(self.rename_anon(v))
            }
            _ => Err(self.unexpected("a variable")),
        }
    }

    fn rename_anon(&mut self, v: String) -> String {
        if v == "_" {
            self.anon += 1;
            format!("_{}", self.anon)
        } else {
            v
        }
    }

    // desc := conj (';' desc)?
    pub(crate) fn desc(&mut self) -> Result<Description, ParseError> {
        let left = self.conj()?;
        if self.eat(&Tok::Semi) {
            let right = self.desc()?;
            return Ok(Description::Or(Box::new(left), Box::new(right)));
        }
        Ok(left)
    }

    // conj := path (',' conj)?
    fn conj(&mut self) -> Result<Description, ParseError> {
        let left = self.path()?;
        if self.eat(&Tok::Comma) {
            let right = self.conj()?;
            return Ok(Description::And(Box::new(left), Box::new(right)));
        }
        Ok(left)
    }

    // path := name ':' path | atom
    pub(crate) fn path(&mut self) -> Result<Description, ParseError> {
        match self.peek().clone() {
            Tok::Atom(a) if !is_keyword(&a) => {
                self.bump();
                if self.eat(&Tok::Colon) {
                    let value = self.path()?;
                    Ok(Description::Feat(a, Box::new(value)))
                } else {
                    Ok(Description::Type(a))
                }
            }
            Tok::Var(v) => {
                self.bump();
                Ok(Description::Var(self.rename_anon(v)))
            }
            Tok::LParen => {
                self.bump();
                let d = self.desc()?;
                self.expect(Tok::RParen)?;
                Ok(d)
            }
            _ => Err(self.unexpected("a description")),
        }
    }

    // goal := gconj (';' goal)?
    fn goal(&mut self) -> Result<Goal, ParseError> {
        let left = self.goal_conj()?;
        if self.eat(&Tok::Semi) {
            let right = self.goal()?;
            return Ok(Goal::Disj(Box::new(left), Box::new(right)));
        }
        Ok(left)
    }

    fn goal_conj(&mut self) -> Result<Goal, ParseError> {
        let left = self.goal_atom()?;
        if self.eat(&Tok::Comma) {
            let right = self.goal_conj()?;
            return Ok(Goal::Conj(Box::new(left), Box::new(right)));
        }
        Ok(left)
    }

    fn goal_atom(&mut self) -> Result<Goal, ParseError> {
        match self.peek().clone() {
            Tok::LParen => {
                self.bump();
                let g = self.goal()?;
                self.expect(Tok::RParen)?;
                Ok(g)
            }
            Tok::Var(_) => {
                let v = self.var()?;
                if self.eat(&Tok::Eq) {
                    let desc = self.path()?;
                    Ok(Goal::Unify { var: v, desc })
                } else if self.eat(&Tok::NotEq) {
                    let w = self.var()?;
                    Ok(Goal::Ineq(v, w))
                } else {
                    Err(self.unexpected("`=` or `=\\=`"))
                }
            }
            Tok::Atom(a) if a == "true" => {
                self.bump();
                Ok(Goal::True)
            }
            Tok::Atom(a) if a == "fail" => {
                self.bump();
                Ok(Goal::Fail)
            }
            Tok::Atom(a) if a == "fswhen" => {
                self.bump();
                self.expect(Tok::LParen)?;
                let cond = self.cond_atom()?;
                self.expect(Tok::Comma)?;
                let body = self.goal()?;
                self.expect(Tok::RParen)?;
                Ok(Goal::FsWhen {
                    cond,
                    body: Box::new(body),
                })
            }
            Tok::Atom(_) => {
                let rel = self.name("a relation name")?;
                let args = self.args()?;
                Ok(Goal::Call { rel, args })
            }
            _ => Err(self.unexpected("a goal")),
        }
    }

    fn args(&mut self) -> Result<Vec<Description>, ParseError> {
        let mut args = Vec::new();
        if self.eat(&Tok::LParen) {
            loop {
                args.push(self.path()?);
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
            self.expect(Tok::RParen)?;
        }
        Ok(args)
    }

    // inside parentheses: cconj (';' cond)?
    fn cond(&mut self) -> Result<Conditional, ParseError> {
        let left = self.cond_conj()?;
        if self.eat(&Tok::Semi) {
            let right = self.cond()?;
            return Ok(Conditional::Or(Box::new(left), Box::new(right)));
        }
        Ok(left)
    }

    fn cond_conj(&mut self) -> Result<Conditional, ParseError> {
        let left = self.cond_atom()?;
        if self.eat(&Tok::Comma) {
            let right = self.cond_conj()?;
            return Ok(Conditional::And(Box::new(left), Box::new(right)));
        }
        Ok(left)
    }

    // The first argument of fswhen/2 is a single atomic conditional or a
    // parenthesized one, since a bare comma there separates the goal.
    fn cond_atom(&mut self) -> Result<Conditional, ParseError> {
        if self.eat(&Tok::LParen) {
            let c = self.cond()?;
            self.expect(Tok::RParen)?;
            return Ok(c);
        }
        let var = self.var()?;
        self.expect(Tok::Eq)?;
        let desc = self.path()?;
        Ok(Conditional::Atomic { var, desc })
    }
}

impl Parser {
    fn type_decl(&mut self) -> Result<TypeDecl, ParseError> {
        let line = self.line();
        let name = self.name("a type name")?;
        let mut subs = Vec::new();
        let mut intro = Vec::new();
        if self.eat_keyword("sub") {
            self.expect(Tok::LBracket)?;
            if !self.eat(&Tok::RBracket) {
                loop {
                    subs.push(self.name("a type name")?);
                    if !self.eat(&Tok::Comma) {
                        break;
                    }
                }
                self.expect(Tok::RBracket)?;
            }
        }
        if self.eat_keyword("intro") {
            self.expect(Tok::LBracket)?;
            if !self.eat(&Tok::RBracket) {
                loop {
                    let feat = self.name("a feature name")?;
                    self.expect(Tok::Colon)?;
                    let value = self.name("a type name")?;
                    intro.push((feat, value));
                    if !self.eat(&Tok::Comma) {
                        break;
                    }
                }
                self.expect(Tok::RBracket)?;
            }
        }
        self.expect(Tok::Dot)?;
        Ok(TypeDecl { name, subs, intro, line })
    }

    fn starts_clause(&self) -> bool {
        match (self.peek(), self.peek_at(1)) {
            (Tok::Atom(a), next) if !is_keyword(a) => {
                matches!(next, Tok::LParen | Tok::Dot) || matches!(next, Tok::Atom(k) if k == "if")
            }
            _ => false,
        }
    }

    fn clause(&mut self) -> Result<RelationClause, ParseError> {
        let line = self.line();
        let name = self.name("a relation name")?;
        let args = self.args()?;
        let body = if self.eat_keyword("if") { self.goal()? } else { Goal::True };
        self.expect(Tok::Dot)?;
        Ok(RelationClause { name, args, body, line })
    }

    fn principle(&mut self) -> Result<Principle, ParseError> {
        let pos = self.pos();
        let antecedent = self.desc()?;
        self.expect(Tok::Arrow)?;
        let consequent = self.desc()?;
        let attachment = if self.eat_keyword("goal") { self.goal()? } else { Goal::True };
        self.expect(Tok::Dot)?;
        let vars = antecedent.vars_of();
        if !vars.is_empty() {
            return Err(ParseError::new(
                pos,
                format!(
                    "shared/antecedent variables unsupported: {} in `{}`",
                    vars.join(", "),
                    antecedent
                ),
            ));
        }
        Ok(Principle {
            antecedent,
            consequent,
            attachment,
            line: pos.line,
        })
    }
}

pub fn parse_signature(text: &str) -> Result<RawSignature, ParseError> {
    let mut p = Parser::new(text)?;
    let mut decls = Vec::new();
    while !p.at_eof() {
        decls.push(p.type_decl()?);
    }
    Ok(RawSignature { decls })
}

pub fn parse_description(text: &str) -> Result<Description, ParseError> {
    let mut p = Parser::new(text)?;
    let d = p.desc()?;
    if !p.at_eof() {
        return Err(p.error(format!("trailing input at {}", p.peek())));
    }
    Ok(d)
}

pub fn parse_goal(text: &str) -> Result<Goal, ParseError> {
    let mut p = Parser::new(text)?;
    let g = p.goal()?;
    if !p.at_eof() {
        return Err(p.error(format!("trailing input at {}", p.peek())));
    }
    Ok(g)
}

/// `Desc` or `Desc goal Goal`, with an optional final `.`.
pub fn parse_query(text: &str) -> Result<Query, ParseError> {
    let mut p = Parser::new(text)?;
    let desc = p.desc()?;
    let goal = if p.eat_keyword("goal") { p.goal()? } else { Goal::True };
    p.eat(&Tok::Dot);
    if !p.at_eof() {
        return Err(p.error(format!("trailing input at {}", p.peek())));
    }
    Ok(Query { desc, goal })
}

pub fn parse_grammar(text: &str) -> Result<Grammar, ParseError> {
    let mut p = Parser::new(text)?;
    let mut grammar = Grammar::default();
    while !p.at_eof() {
        if p.starts_clause() {
            grammar.clauses.push(p.clause()?);
        } else {
            grammar.principles.push(p.principle()?);
        }
    }
    check_arities(&grammar)?;
    Ok(grammar)
}

fn check_arities(grammar: &Grammar) -> Result<(), ParseError> {
    let mut arity: HashMap<&str, usize> = HashMap::new();
    for c in &grammar.clauses {
        match arity.get(c.name.as_str()) {
            Some(&n) if n != c.arity() => {
                return Err(ParseError::at_line(
                    c.line,
                    format!("arity mismatch: {}/{} already defined as {}/{}", c.name, c.arity(), c.name, n),
                ));
            }
            _ => {
                arity.insert(&c.name, c.arity());
            }
        }
    }
    let goals = grammar
        .clauses
        .iter()
        .map(|c| (&c.body, c.line))
        .chain(grammar.principles.iter().map(|p| (&p.attachment, p.line)));
    for (goal, line) in goals {
        check_calls(goal, &arity, line)?;
    }
    Ok(())
}

fn check_calls(goal: &Goal, arity: &HashMap<&str, usize>, line: usize) -> Result<(), ParseError> {
    match goal {
        Goal::Call { rel, args } => match arity.get(rel.as_str()) {
            Some(&n) if n != args.len() => Err(ParseError::at_line(
                line,
                format!("arity mismatch: call to {}/{} but {}/{} is defined", rel, args.len(), rel, n),
            )),
            _ => Ok(()),
        },
        Goal::Conj(a, b) | Goal::Disj(a, b) => {
            check_calls(a, arity, line)?;
            check_calls(b, arity, line)
        }
        Goal::FsWhen { body, .. } => check_calls(body, arity, line),
        _ => Ok(()),
    }
}
