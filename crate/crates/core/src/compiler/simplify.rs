//! Static removal of delays that are already satisfied by the least type a
//! slot can have.

use std::collections::HashMap;

use super::ir::Ir;
use crate::desclang::{Desc, Slot};
use crate::signature::{Signature, TypeId};

pub(crate) struct Simplifier<'a> {
    pub sig: &'a Signature,
    pub warnings: Vec<String>,
}

type Known = HashMap<Slot, TypeId>;

impl Simplifier<'_> {
    pub fn run(&mut self, ir: Ir, known: &Known) -> Ir {
        let sig = self.sig;
        let ty_of = |k: &Known, s: Slot| k.get(&s).copied().unwrap_or(TypeId::BOT);
        match ir {
            Ir::TypeWhen { ty, slot, body } => {
                let have = ty_of(known, slot);
                if sig.subsumes(ty, have) {
                    return self.run(*body, known);
                }
                match sig.join(have, ty) {
                    None => {
                        self.warnings.push(format!(
                            "typewhen({}) on a slot of type {} never fires",
                            sig.type_name(ty),
                            sig.type_name(have)
                        ));
                        Ir::Done
                    }
                    Some(j) => {
                        let mut inner = known.clone();
                        inner.insert(slot, j);
                        let body = self.run(*body, &inner);
                        if body == Ir::Done {
                            Ir::Done
                        } else {
                            Ir::type_when(ty, slot, body)
                        }
                    }
                }
            }
            Ir::Farg { feat, slot, dest, body } => {
                let have = ty_of(known, slot);
                let value = sig
                    .approp(have, feat)
                    .or_else(|| sig.approp(sig.intro(feat), feat))
                    .expect("a feature is appropriate at its introducer");
                let mut inner = known.clone();
                inner.insert(dest, value);
                let body = self.run(*body, &inner);
                if body == Ir::Done {
                    Ir::Done
                } else {
                    Ir::Farg {
                        feat,
                        slot,
                        dest,
                        body: Box::new(body),
                    }
                }
            }
            Ir::IdentWhen { left, right, body } => {
                let body = self.run(*body, known);
                if left == right || body == Ir::Done {
                    body
                } else {
                    Ir::IdentWhen {
                        left,
                        right,
                        body: Box::new(body),
                    }
                }
            }
            Ir::OnceGuard { cell, body } => match self.run(*body, known) {
                Ir::Done => Ir::Done,
                body => Ir::OnceGuard {
                    cell,
                    body: Box::new(body),
                },
            },
            Ir::UnifySlotDesc { slot, desc: Desc::Type(t) } if sig.subsumes(t, ty_of(known, slot)) => Ir::Done,
            Ir::Seq(a, b) => {
                let (a, b) = (self.run(*a, known), self.run(*b, known));
                match (a, b) {
                    (Ir::Done, x) | (x, Ir::Done) => x,
                    (Ir::Fail, _) => Ir::Fail,
                    (a, b) => Ir::seq(a, b),
                }
            }
            Ir::Both(a, b) => match (self.run(*a, known), self.run(*b, known)) {
                (Ir::Done, x) | (x, Ir::Done) => x,
                (a, b) => Ir::both(a, b),
            },
            Ir::Choice(a, b) => Ir::Choice(Box::new(self.run(*a, known)), Box::new(self.run(*b, known))),
            other => other,
        }
    }
}
