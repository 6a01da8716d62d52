//! Compilation of principles into trigger-keyed suspension programs.
//!
//! A principle `α ==> γ goal ρ` becomes a program posted on every node whose
//! type reaches `trigger(α)`. The program waits, through a chain of type
//! delays, until the node is subsumed by the satisfier of `α`, then adds `γ`
//! and runs `ρ`.

mod cover;
mod ir;
mod reduce;
mod simplify;

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

pub use cover::{compile_subtype_cover, CoverRule, SubtypeCoverRules};
pub use ir::{Ir, RelId};
pub use reduce::{trigger, Cond};

use crate::desclang::{resolve, Desc, Grammar, Principle, Query, RelationClause, ResolveError, Scope, Slot};
use crate::signature::{derangement_analysis, Signature, TypeId};
use reduce::Reducer;
use simplify::Simplifier;

/// The slot every principle program receives its node in.
pub const ROOT: Slot = Slot(0);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CompileError {
    #[error("line {line}: {error}")]
    Resolve { line: usize, error: ResolveError },
    #[error("line {line}: unknown relation `{name}/{arity}`")]
    UnknownRelation { name: String, arity: usize, line: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompiledConstraint {
    pub trigger: TypeId,
    pub program: Ir,
    /// Slot names; the frame size is `scope.len()`.
    pub scope: Scope,
    pub once_cells: u32,
    pub source: String,
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompiledClause {
    pub head: Vec<Desc>,
    pub body: Ir,
    pub scope: Scope,
    pub once_cells: u32,
    pub source: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Relation {
    pub name: String,
    pub arity: usize,
    pub clauses: Vec<CompiledClause>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompiledGrammar {
    pub constraints: Vec<CompiledConstraint>,
    pub relations: Vec<Relation>,
    pub cover: SubtypeCoverRules,
    pub warnings: Vec<String>,
}

/// A query ready to run: a description of the root plus a goal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompiledQuery {
    pub desc: Desc,
    pub goal: Ir,
    pub scope: Scope,
    pub once_cells: u32,
}

impl CompiledGrammar {
    pub fn relation_names(&self) -> Vec<String> {
        self.relations.iter().map(|r| r.name.clone()).collect()
    }

    fn relation_index(&self) -> HashMap<(String, usize), RelId> {
        self.relations
            .iter()
            .enumerate()
            .map(|(i, r)| ((r.name.clone(), r.arity), RelId(i as u32)))
            .collect()
    }

    /// Indented listing of every constraint and covering rule.
    pub fn dump(&self, sig: &Signature) -> String {
        let names = self.relation_names();
        let mut out = String::new();
        for (i, c) in self.constraints.iter().enumerate() {
            if i > 0 {
                out.push('\n');
            }
            out.push_str(&format!("% {}\n", c.source));
            out.push_str(&format!("trigger: {}\n", sig.type_name(c.trigger)));
            out.push_str(&c.program.dump(sig, &c.scope, &names));
        }
        for r in &self.relations {
            for c in &r.clauses {
                if !out.is_empty() {
                    out.push('\n');
                }
                out.push_str(&format!("% {}\nclause: {}/{}\n", c.source, r.name, r.arity));
                out.push_str(&c.body.dump(sig, &c.scope, &names));
            }
        }
        if !self.cover.is_empty() {
            if !out.is_empty() {
                out.push('\n');
            }
            out.push_str(&self.cover.dump(sig));
        }
        out
    }

    pub fn compile_query(&self, sig: &Signature, q: &Query) -> Result<CompiledQuery, CompileError> {
        let mut scope = Scope::new();
        let desc = resolve(sig, &q.desc, &mut scope).map_err(|error| CompileError::Resolve { line: 1, error })?;
        let relations = self.relation_index();
        let mut r = Reducer {
            sig,
            scope: &mut scope,
            once_cells: 0,
            relations: &relations,
            line: 1,
        };
        let mut seen: HashSet<Slot> = desc.slots().into_iter().collect();
        let goal = r.goal(&q.goal, &mut seen)?;
        let once_cells = r.once_cells;
        let mut simp = Simplifier { sig, warnings: Vec::new() };
        let goal = simp.run(goal, &HashMap::new());
        Ok(CompiledQuery {
            desc,
            goal,
            scope,
            once_cells,
        })
    }
}

/// Compiles every principle and relation clause, and derives the
/// subtype-covering rules of the signature.
pub fn compile_grammar(sig: &Signature, g: &Grammar) -> Result<CompiledGrammar, CompileError> {
    let mut out = CompiledGrammar::default();
    let mut index: HashMap<(String, usize), RelId> = HashMap::new();
    for c in &g.clauses {
        let key = (c.name.clone(), c.arity());
        if let std::collections::hash_map::Entry::Vacant(e) = index.entry(key) {
            e.insert(RelId(out.relations.len() as u32));
            out.relations.push(Relation {
                name: c.name.clone(),
                arity: c.arity(),
                clauses: Vec::new(),
            });
        }
    }
    for c in &g.clauses {
        let compiled = compile_clause(sig, c, &index)?;
        let id = index[&(c.name.clone(), c.arity())];
        out.relations[id.0 as usize].clauses.push(compiled);
    }
    for p in &g.principles {
        match compile_principle(sig, p, &index, &mut out.warnings)? {
            Some(c) => out.constraints.push(c),
            None => out.warnings.push(format!(
                "line {}: antecedent unsatisfiable; principle dropped: {p}",
                p.line
            )),
        }
    }
    out.cover = compile_subtype_cover(&derangement_analysis(sig));
    Ok(out)
}

/// Compiles one principle; `None` when its antecedent can never hold.
pub fn compile_principle(
    sig: &Signature,
    p: &Principle,
    relations: &HashMap<(String, usize), RelId>,
    warnings: &mut Vec<String>,
) -> Result<Option<CompiledConstraint>, CompileError> {
    let Some(mut c) = reduce_principle(sig, p, relations)? else {
        return Ok(None);
    };
    let mut simp = Simplifier { sig, warnings: Vec::new() };
    let known = HashMap::from([(ROOT, c.trigger)]);
    c.program = simp.run(c.program, &known);
    warnings.extend(simp.warnings.into_iter().map(|w| format!("line {}: {w}", p.line)));
    Ok(Some(c))
}

/// Compiles a principle without static simplification.
pub fn compile_principle_unsimplified(
    sig: &Signature,
    p: &Principle,
    relations: &HashMap<(String, usize), RelId>,
) -> Result<Option<CompiledConstraint>, CompileError> {
    reduce_principle(sig, p, relations)
}

fn reduce_principle(
    sig: &Signature,
    p: &Principle,
    relations: &HashMap<(String, usize), RelId>,
) -> Result<Option<CompiledConstraint>, CompileError> {
    let mut scope = Scope::new();
    let root = scope.fresh();
    debug_assert_eq!(root, ROOT);
    let antecedent =
        resolve(sig, &p.antecedent, &mut scope).map_err(|error| CompileError::Resolve { line: p.line, error })?;
    let Some(trig) = trigger(sig, &antecedent) else {
        return Ok(None);
    };
    let mut r = Reducer {
        sig,
        scope: &mut scope,
        once_cells: 0,
        relations,
        line: p.line,
    };
    let waiting = r.reduce(&Cond::Atomic(root, antecedent), Ir::Hole, &HashSet::new());
    let consequent = r.resolve_desc(&p.consequent)?;
    let mut seen: HashSet<Slot> = consequent.slots().into_iter().collect();
    let attachment = r.goal(&p.attachment, &mut seen)?;
    let once_cells = r.once_cells;
    let body = Ir::seq(
        Ir::UnifySlotDesc {
            slot: root,
            desc: consequent,
        },
        attachment,
    );
    Ok(Some(CompiledConstraint {
        trigger: trig,
        program: waiting.fill_hole(&body),
        scope,
        once_cells,
        source: p.to_string(),
        line: p.line,
    }))
}

fn compile_clause(
    sig: &Signature,
    c: &RelationClause,
    relations: &HashMap<(String, usize), RelId>,
) -> Result<CompiledClause, CompileError> {
    let mut scope = Scope::new();
    let mut r = Reducer {
        sig,
        scope: &mut scope,
        once_cells: 0,
        relations,
        line: c.line,
    };
    let head = c.args.iter().map(|a| r.resolve_desc(a)).collect::<Result<Vec<_>, _>>()?;
    let mut seen: HashSet<Slot> = head.iter().flat_map(Desc::slots).collect();
    let body = r.goal(&c.body, &mut seen)?;
    let once_cells = r.once_cells;
    let mut simp = Simplifier { sig, warnings: Vec::new() };
    let body = simp.run(body, &HashMap::new());
    Ok(CompiledClause {
        head,
        body,
        scope,
        once_cells,
        source: c.to_string(),
    })
}

#[cfg(test)]
mod tests;
