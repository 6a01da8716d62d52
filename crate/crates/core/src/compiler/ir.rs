//! The suspension-program language principles compile to, and its textual
//! dump.

use std::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::desclang::{Desc, Scope, Slot};
use crate::signature::{FeatId, Signature, TypeId};

/// Index into the compiled grammar's relation table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RelId(pub u32);

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Ir {
    Done,
    Fail,
    /// Run `body` once the slot's node is at least as specific as the most
    /// general satisfier of `ty`.
    TypeWhen { ty: TypeId, slot: Slot, body: Box<Ir> },
    /// Bind `dest` to the value of `feat` at `slot`, then run `body`.
    Farg { feat: FeatId, slot: Slot, dest: Slot, body: Box<Ir> },
    /// Run `body` once the two slots' nodes are identical; drop it once they
    /// can no longer be unified.
    IdentWhen { left: Slot, right: Slot, body: Box<Ir> },
    /// Run `body` unless another guard on the same cell already ran.
    OnceGuard { cell: u32, body: Box<Ir> },
    UnifySlotDesc { slot: Slot, desc: Desc },
    Seq(Box<Ir>, Box<Ir>),
    /// Two independent programs, posted one after the other.
    Both(Box<Ir>, Box<Ir>),
    /// Nondeterministic choice, left first.
    Choice(Box<Ir>, Box<Ir>),
    CallRel { rel: RelId, args: Vec<Desc> },
    Ineq(Slot, Slot),
    /// Placeholder filled in after compilation of the antecedent.
    Hole,
}

impl Ir {
    pub fn seq(a: Ir, b: Ir) -> Ir {
        Ir::Seq(Box::new(a), Box::new(b))
    }

    pub fn both(a: Ir, b: Ir) -> Ir {
        Ir::Both(Box::new(a), Box::new(b))
    }

    pub fn type_when(ty: TypeId, slot: Slot, body: Ir) -> Ir {
        Ir::TypeWhen {
            ty,
            slot,
            body: Box::new(body),
        }
    }

    pub(crate) fn fill_hole(self, with: &Ir) -> Ir {
        let f = |b: Box<Ir>| Box::new(b.fill_hole(with));
        match self {
            Ir::Hole => with.clone(),
            Ir::TypeWhen { ty, slot, body } => Ir::TypeWhen { ty, slot, body: f(body) },
            Ir::Farg { feat, slot, dest, body } => Ir::Farg {
                feat,
                slot,
                dest,
                body: f(body),
            },
            Ir::IdentWhen { left, right, body } => Ir::IdentWhen { left, right, body: f(body) },
            Ir::OnceGuard { cell, body } => Ir::OnceGuard { cell, body: f(body) },
            Ir::Seq(a, b) => Ir::Seq(f(a), f(b)),
            Ir::Both(a, b) => Ir::Both(f(a), f(b)),
            Ir::Choice(a, b) => Ir::Choice(f(a), f(b)),
            other => other,
        }
    }

    /// Number of `TypeWhen` constructs.
    pub fn type_when_count(&self) -> usize {
        match self {
            Ir::TypeWhen { body, .. } => 1 + body.type_when_count(),
            Ir::Farg { body, .. } | Ir::IdentWhen { body, .. } | Ir::OnceGuard { body, .. } => body.type_when_count(),
            Ir::Seq(a, b) | Ir::Both(a, b) | Ir::Choice(a, b) => a.type_when_count() + b.type_when_count(),
            _ => 0,
        }
    }

    /// Indented listing, one construct per line.
    pub fn dump(&self, sig: &Signature, scope: &Scope, rel_names: &[String]) -> String {
        let mut out = String::new();
        Dumper { sig, scope, rel_names }.write(self, 0, &mut out);
        out
    }
}

struct Dumper<'a> {
    sig: &'a Signature,
    scope: &'a Scope,
    rel_names: &'a [String],
}

impl Dumper<'_> {
    fn slot(&self, s: Slot) -> String {
        self.scope.name(s)
    }

    fn desc(&self, d: &Desc) -> String {
        d.to_description(self.sig, self.scope).to_string()
    }

    fn line(&self, depth: usize, text: &str, out: &mut String) {
        let _ = writeln!(out, "{}{}", "  ".repeat(depth), text);
    }

    fn is_simple(ir: &Ir) -> bool {
        matches!(
            ir,
            Ir::Done | Ir::Fail | Ir::UnifySlotDesc { .. } | Ir::CallRel { .. } | Ir::Ineq(..) | Ir::Hole
        )
    }

    fn write(&self, ir: &Ir, depth: usize, out: &mut String) {
        match ir {
            Ir::Done => self.line(depth, "done", out),
            Ir::Fail => self.line(depth, "fail", out),
            Ir::Hole => self.line(depth, "hole", out),
            Ir::TypeWhen { ty, slot, body } => {
                self.line(depth, &format!("typewhen({}, {})", self.sig.type_name(*ty), self.slot(*slot)), out);
                self.write(body, depth + 1, out);
            }
            Ir::Farg { feat, slot, dest, body } => {
                let text = format!(
                    "farg({}, {}, {})",
                    self.sig.feat_name(*feat),
                    self.slot(*slot),
                    self.slot(*dest)
                );
                self.line(depth, &text, out);
                self.write(body, depth, out);
            }
            Ir::IdentWhen { left, right, body } => {
                self.line(depth, &format!("identwhen({}, {})", self.slot(*left), self.slot(*right)), out);
                self.write(body, depth + 1, out);
            }
            Ir::OnceGuard { cell, body } => {
                self.line(depth, &format!("once({cell})"), out);
                self.write(body, depth + 1, out);
            }
            Ir::UnifySlotDesc { slot, desc } => {
                self.line(depth, &format!("unify({}, {})", self.slot(*slot), self.desc(desc)), out);
            }
            Ir::Seq(a, b) if Self::is_simple(a) => {
                self.write(a, depth, out);
                self.write(b, depth, out);
            }
            Ir::Seq(a, b) => self.branches("seq", a, b, depth, out),
            Ir::Both(a, b) => self.branches("both", a, b, depth, out),
            Ir::Choice(a, b) => self.branches("choice", a, b, depth, out),
            Ir::CallRel { rel, args } => {
                let name = self.rel_names.get(rel.0 as usize).map(String::as_str).unwrap_or("?");
                let args: Vec<String> = args.iter().map(|a| self.desc(a)).collect();
                self.line(depth, &format!("call({name}({}))", args.join(", ")), out);
            }
            Ir::Ineq(a, b) => self.line(depth, &format!("ineq({}, {})", self.slot(*a), self.slot(*b)), out),
        }
    }

    fn branches(&self, head: &str, a: &Ir, b: &Ir, depth: usize, out: &mut String) {
        self.line(depth, head, out);
        for part in [a, b] {
            self.line(depth + 1, "branch", out);
            self.write(part, depth + 2, out);
        }
    }
}
