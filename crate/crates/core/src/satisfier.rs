//! Adding descriptions to feature structures, and most general satisfiers.

use std::ops::ControlFlow;

use crate::desclang::{Desc, Slot};
use crate::signature::{Signature, TypeId};
use crate::tfs::{FeatureStructure, Heap, NodeId, TfsError};

/// Variable bindings of one description scope.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Binding {
    nodes: Vec<Option<NodeId>>,
}

impl Binding {
    pub fn new() -> Self {
        Binding::default()
    }

    pub fn get(&self, s: Slot) -> Option<NodeId> {
        self.nodes.get(s.0 as usize).copied().flatten()
    }

    pub fn set(&mut self, s: Slot, n: Option<NodeId>) {
        let i = s.0 as usize;
        if self.nodes.len() <= i {
            self.nodes.resize(i + 1, None);
        }
        self.nodes[i] = n;
    }

    pub fn iter(&self) -> impl Iterator<Item = (Slot, NodeId)> + '_ {
        self.nodes
            .iter()
            .enumerate()
            .filter_map(|(i, n)| n.map(|n| (Slot(i as u32), n)))
    }
}

enum Pending<'d, 'p> {
    Nil,
    Cons(NodeId, &'d Desc, &'p Pending<'d, 'p>),
}

type Cont<'k> = dyn FnMut(&mut Heap<'_>, &mut Binding) -> ControlFlow<()> + 'k;

/// Enumerates the ways of making `node` satisfy `d`, calling `k` once per
/// solution with the heap and binding in that solution's state. Disjuncts
/// are explored left to right; every change is undone before returning.
/// `k` stops the enumeration by returning `Break`.
pub fn unify_with_desc(heap: &mut Heap<'_>, node: NodeId, d: &Desc, b: &mut Binding, k: &mut Cont<'_>) -> ControlFlow<()> {
    step(heap, node, d, &Pending::Nil, b, k)
}

fn next(heap: &mut Heap<'_>, rest: &Pending<'_, '_>, b: &mut Binding, k: &mut Cont<'_>) -> ControlFlow<()> {
    match rest {
        Pending::Nil => k(heap, b),
        Pending::Cons(n, d, tail) => step(heap, *n, d, tail, b, k),
    }
}

fn step(heap: &mut Heap<'_>, node: NodeId, d: &Desc, rest: &Pending<'_, '_>, b: &mut Binding, k: &mut Cont<'_>) -> ControlFlow<()> {
    let sig = heap.signature();
    match d {
        Desc::Var(s) => match b.get(*s) {
            Some(prev) => {
                let m = heap.mark();
                let r = if heap.unify(node, prev) {
                    next(heap, rest, b, k)
                } else {
                    ControlFlow::Continue(())
                };
                heap.undo_to(m);
                r
            }
            None => {
                b.set(*s, Some(node));
                let r = next(heap, rest, b, k);
                b.set(*s, None);
                r
            }
        },
        Desc::Type(t) => {
            let m = heap.mark();
            let r = if heap.promote(node, *t) {
                next(heap, rest, b, k)
            } else {
                ControlFlow::Continue(())
            };
            heap.undo_to(m);
            r
        }
        Desc::Feat(f, v) => {
            let m = heap.mark();
            let r = if heap.promote(node, sig.intro(*f)) {
                let val = heap.arc(node, *f).expect("feature appropriate after promotion");
                step(heap, val, v, rest, b, k)
            } else {
                ControlFlow::Continue(())
            };
            heap.undo_to(m);
            r
        }
        Desc::And(l, r) => {
            let later = Pending::Cons(node, r, rest);
            step(heap, node, l, &later, b, k)
        }
        Desc::Or(l, r) => {
            step(heap, node, l, rest, b, k)?;
            step(heap, node, r, rest, b, k)
        }
    }
}

/// One most general satisfier per satisfiable disjunct, left to right, with
/// mutually subsuming duplicates removed.
pub fn mgsats(sig: &Signature, d: &Desc) -> Result<Vec<FeatureStructure>, TfsError> {
    let mut heap = Heap::new(sig);
    let root = heap.fresh(TypeId::BOT)?;
    let mut out: Vec<FeatureStructure> = Vec::new();
    let _ = unify_with_desc(&mut heap, root, d, &mut Binding::new(), &mut |h, _| {
        let fs = h.export(root);
        if !out.iter().any(|o| o.equivalent(sig, &fs)) {
            out.push(fs);
        }
        ControlFlow::Continue(())
    });
    Ok(out)
}

/// Whether `fs` lies in the denotation of `d`: some most general satisfier
/// of `d` subsumes it.
pub fn satisfies(sig: &Signature, fs: &FeatureStructure, d: &Desc) -> Result<bool, TfsError> {
    Ok(mgsats(sig, d)?.iter().any(|m| m.subsumes(sig, fs)))
}
