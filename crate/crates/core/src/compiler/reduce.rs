//! Trigger types and the reduction of conditionals to type delays.

use std::collections::{HashMap, HashSet};

use super::ir::{Ir, RelId};
use super::CompileError;
use crate::desclang::{resolve, Conditional, Desc, Goal, Scope, Slot};
use crate::signature::{Signature, TypeId};

/// The most specific type every satisfier's root must have, or `None` when
/// the description is unsatisfiable at the type level.
pub fn trigger(sig: &Signature, d: &Desc) -> Option<TypeId> {
    match d {
        Desc::Var(_) => Some(TypeId::BOT),
        Desc::Type(t) => Some(*t),
        Desc::Feat(f, _) => Some(sig.intro(*f)),
        Desc::And(a, b) => sig.join(trigger(sig, a)?, trigger(sig, b)?),
        Desc::Or(a, b) => match (trigger(sig, a), trigger(sig, b)) {
            (Some(x), Some(y)) => Some(sig.meet(x, y)),
            (x, None) | (None, x) => x,
        },
    }
}

/// A resolved conditional.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Cond {
    Atomic(Slot, Desc),
    And(Box<Cond>, Box<Cond>),
    Or(Box<Cond>, Box<Cond>),
}

impl Cond {
    fn vars(&self, out: &mut Vec<Slot>) {
        match self {
            Cond::Atomic(v, d) => {
                if !out.contains(v) {
                    out.push(*v);
                }
                for s in d.slots() {
                    if !out.contains(&s) {
                        out.push(s);
                    }
                }
            }
            Cond::And(a, b) | Cond::Or(a, b) => {
                a.vars(out);
                b.vars(out);
            }
        }
    }
}

/// Compilation state for one principle, clause or query.
pub(crate) struct Reducer<'a> {
    pub sig: &'a Signature,
    pub scope: &'a mut Scope,
    pub once_cells: u32,
    pub relations: &'a HashMap<(String, usize), RelId>,
    pub line: usize,
}

enum Wrap {
    TypeWhen(TypeId, Slot),
    Farg(crate::signature::FeatId, Slot, Slot),
    Ident(Slot, Slot),
    Bind(Slot, Slot),
}

impl Reducer<'_> {
    pub fn resolve_desc(&mut self, d: &crate::desclang::Description) -> Result<Desc, CompileError> {
        resolve(self.sig, d, self.scope).map_err(|e| CompileError::Resolve {
            line: self.line,
            error: e,
        })
    }

    pub fn cond(&mut self, c: &Conditional) -> Result<Cond, CompileError> {
        Ok(match c {
            Conditional::Atomic { var, desc } => {
                let v = self.scope.slot(var);
                Cond::Atomic(v, self.resolve_desc(desc)?)
            }
            Conditional::And(a, b) => Cond::And(Box::new(self.cond(a)?), Box::new(self.cond(b)?)),
            Conditional::Or(a, b) => Cond::Or(Box::new(self.cond(a)?), Box::new(self.cond(b)?)),
        })
    }

    /// `fswhen(c, g)` as nested delays. `seen` holds the slots that may
    /// already be bound when the conditional is reached.
    pub fn reduce(&mut self, c: &Cond, g: Ir, seen: &HashSet<Slot>) -> Ir {
        match c {
            Cond::And(c1, c2) => {
                let mut after = seen.clone();
                let mut vs = Vec::new();
                c1.vars(&mut vs);
                after.extend(vs);
                let inner = self.reduce(c2, g, &after);
                self.reduce(c1, inner, seen)
            }
            Cond::Or(c1, c2) => {
                let cell = self.once_cells;
                self.once_cells += 1;
                let guarded = Ir::OnceGuard {
                    cell,
                    body: Box::new(g),
                };
                let left = self.reduce(c1, guarded.clone(), seen);
                let right = self.reduce(c2, guarded, seen);
                Ir::both(left, right)
            }
            Cond::Atomic(v, d) if d.is_disjunctive() => {
                let mut parts = d.disjuncts().into_iter().map(|x| Cond::Atomic(*v, x));
                let first = parts.next().expect("at least one disjunct");
                let lifted = parts.fold(first, |acc, x| Cond::Or(Box::new(acc), Box::new(x)));
                self.reduce(&lifted, g, seen)
            }
            Cond::Atomic(v, d) => {
                let mut seen = seen.clone();
                let mut wraps = Vec::new();
                self.desc_reduce(d, *v, &mut seen, &mut wraps);
                wraps.into_iter().rev().fold(g, |inner, w| match w {
                    Wrap::TypeWhen(t, s) => Ir::type_when(t, s, inner),
                    Wrap::Farg(f, s, dest) => Ir::Farg {
                        feat: f,
                        slot: s,
                        dest,
                        body: Box::new(inner),
                    },
                    Wrap::Ident(a, b) => Ir::IdentWhen {
                        left: a,
                        right: b,
                        body: Box::new(inner),
                    },
                    Wrap::Bind(x, s) => Ir::seq(
                        Ir::UnifySlotDesc {
                            slot: s,
                            desc: Desc::Var(x),
                        },
                        inner,
                    ),
                })
            }
        }
    }

    /// Delays for a disjunction-free description, outermost first. The left
    /// conjunct of a conjunction is waited on before the right one.
    fn desc_reduce(&mut self, d: &Desc, v: Slot, seen: &mut HashSet<Slot>, out: &mut Vec<Wrap>) {
        match d {
            Desc::Var(x) => {
                if seen.insert(*x) {
                    out.push(Wrap::Bind(*x, v));
                } else {
                    out.push(Wrap::Ident(v, *x));
                }
            }
            Desc::Type(t) => out.push(Wrap::TypeWhen(*t, v)),
            Desc::Feat(f, sub) => {
                let dest = self.scope.fresh();
                out.push(Wrap::TypeWhen(self.sig.intro(*f), v));
                out.push(Wrap::Farg(*f, v, dest));
                self.desc_reduce(sub, dest, seen, out);
            }
            Desc::And(a, b) => {
                self.desc_reduce(a, v, seen, out);
                self.desc_reduce(b, v, seen, out);
            }
            Desc::Or(..) => unreachable!("disjunctions are lifted before desc_reduce"),
        }
    }

    /// Compiles a relational goal. `seen` collects slots that may be bound
    /// once the goal has run.
    pub fn goal(&mut self, g: &Goal, seen: &mut HashSet<Slot>) -> Result<Ir, CompileError> {
        Ok(match g {
            Goal::True => Ir::Done,
            Goal::Fail => Ir::Fail,
            Goal::Conj(a, b) => {
                let a = self.goal(a, seen)?;
                Ir::seq(a, self.goal(b, seen)?)
            }
            Goal::Disj(a, b) => {
                let mut left_seen = seen.clone();
                let a = self.goal(a, &mut left_seen)?;
                let b = self.goal(b, seen)?;
                seen.extend(left_seen);
                Ir::Choice(Box::new(a), Box::new(b))
            }
            Goal::Call { rel, args } => {
                let id = *self
                    .relations
                    .get(&(rel.clone(), args.len()))
                    .ok_or_else(|| CompileError::UnknownRelation {
                        name: rel.clone(),
                        arity: args.len(),
                        line: self.line,
                    })?;
                let args = args.iter().map(|a| self.resolve_desc(a)).collect::<Result<Vec<_>, _>>()?;
                for a in &args {
                    seen.extend(a.slots());
                }
                Ir::CallRel { rel: id, args }
            }
            Goal::Unify { var, desc } => {
                let slot = self.scope.slot(var);
                let desc = self.resolve_desc(desc)?;
                seen.insert(slot);
                seen.extend(desc.slots());
                Ir::UnifySlotDesc { slot, desc }
            }
            Goal::FsWhen { cond, body } => {
                let c = self.cond(cond)?;
                let before = seen.clone();
                let mut vs = Vec::new();
                c.vars(&mut vs);
                seen.extend(vs);
                let body = self.goal(body, seen)?;
                self.reduce(&c, body, &before)
            }
            Goal::Ineq(a, b) => {
                let (a, b) = (self.scope.slot(a), self.scope.slot(b));
                seen.insert(a);
                seen.insert(b);
                Ir::Ineq(a, b)
            }
        })
    }
}
