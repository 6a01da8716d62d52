//! Mutable feature-structure graphs with union-find node identity and a
//! trail for backtracking.

use std::collections::hash_map::DefaultHasher;
use std::collections::{HashMap, HashSet};
use std::fmt;
use std::hash::{Hash, Hasher};

use super::fs::{FeatureStructure, FsNode};
use super::TfsError;
use crate::signature::{FeatId, Signature, TypeId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub u32);

impl NodeId {
    fn idx(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n{}", self.0)
    }
}

/// Something that happened to the graph and may wake suspensions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Event {
    Created(NodeId),
    Promoted(NodeId),
    Instantiated(FeatId, NodeId),
    Bound { survivor: NodeId, absorbed: NodeId },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct Cell {
    ty: TypeId,
    parent: Option<NodeId>,
    arcs: Vec<(FeatId, NodeId)>,
}

#[derive(Debug, Clone)]
enum Undo {
    Cell(NodeId, Cell),
    Push,
    Ineq,
}

/// A point the heap can be rolled back to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Mark {
    trail: usize,
    events: usize,
}

enum Work {
    Merge(NodeId, NodeId),
    Promote(NodeId, TypeId),
}

pub struct Heap<'s> {
    sig: &'s Signature,
    cells: Vec<Cell>,
    trail: Vec<Undo>,
    ineqs: Vec<(NodeId, NodeId)>,
    events: Vec<Event>,
    record: bool,
}

impl<'s> Heap<'s> {
    pub fn new(sig: &'s Signature) -> Self {
        Heap {
            sig,
            cells: Vec::new(),
            trail: Vec::new(),
            ineqs: Vec::new(),
            events: Vec::new(),
            record: false,
        }
    }

    pub fn signature(&self) -> &'s Signature {
        self.sig
    }

    /// Turns event recording on or off. Off by default.
    pub fn record_events(&mut self, on: bool) {
        self.record = on;
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn event_count(&self) -> usize {
        self.events.len()
    }

    pub fn node_count(&self) -> usize {
        self.cells.len()
    }

    pub fn find(&self, mut n: NodeId) -> NodeId {
        while let Some(p) = self.cells[n.idx()].parent {
            n = p;
        }
        n
    }

    pub fn same(&self, a: NodeId, b: NodeId) -> bool {
        self.find(a) == self.find(b)
    }

    pub fn ty(&self, n: NodeId) -> TypeId {
        self.cells[self.find(n).idx()].ty
    }

    pub fn arcs(&self, n: NodeId) -> &[(FeatId, NodeId)] {
        &self.cells[self.find(n).idx()].arcs
    }

    /// Value of feature `f` at `n`, resolved to its representative.
    pub fn arc(&self, n: NodeId, f: FeatId) -> Option<NodeId> {
        let arcs = self.arcs(n);
        arcs.binary_search_by_key(&f, |&(g, _)| g)
            .ok()
            .map(|i| self.find(arcs[i].1))
    }

    /// Inequations as stored (endpoints not resolved).
    pub fn inequations(&self) -> &[(NodeId, NodeId)] {
        &self.ineqs
    }

    pub fn mark(&self) -> Mark {
        Mark {
            trail: self.trail.len(),
            events: self.events.len(),
        }
    }

    pub fn undo_to(&mut self, m: Mark) {
        while self.trail.len() > m.trail {
            match self.trail.pop().expect("trail is longer than mark") {
                Undo::Cell(n, c) => self.cells[n.idx()] = c,
                Undo::Push => {
                    self.cells.pop();
                }
                Undo::Ineq => {
                    self.ineqs.pop();
                }
            }
        }
        self.events.truncate(m.events);
    }

    fn emit(&mut self, e: Event) {
        if self.record {
            self.events.push(e);
        }
    }

    fn save(&mut self, n: NodeId) {
        let old = self.cells[n.idx()].clone();
        self.trail.push(Undo::Cell(n, old));
    }

    fn push_cell(&mut self, ty: TypeId) -> NodeId {
        let n = NodeId(self.cells.len() as u32);
        self.cells.push(Cell {
            ty,
            parent: None,
            arcs: Vec::new(),
        });
        self.trail.push(Undo::Push);
        self.emit(Event::Created(n));
        n
    }

    /// Allocates the most general satisfier of `t`.
    pub fn fresh(&mut self, t: TypeId) -> Result<NodeId, TfsError> {
        if !self.sig.has_finite_mgsat(t) {
            return Err(TfsError::InfiniteSatisfier(self.sig.type_name(t).to_string()));
        }
        Ok(self.fresh_finite(t))
    }

    fn fresh_finite(&mut self, t: TypeId) -> NodeId {
        let n = self.push_cell(t);
        let feats = self.sig.approp_features(t);
        let mut arcs = Vec::with_capacity(feats.len());
        for &(f, r) in feats {
            arcs.push((f, self.fresh_finite(r)));
        }
        self.cells[n.idx()].arcs = arcs;
        n
    }

    /// Destructive unification. On failure the heap is left unchanged.
    pub fn unify(&mut self, a: NodeId, b: NodeId) -> bool {
        self.run(vec![Work::Merge(a, b)])
    }

    /// Refines the type of `n` to at least `t`.
    pub fn promote(&mut self, n: NodeId, t: TypeId) -> bool {
        self.run(vec![Work::Promote(n, t)])
    }

    /// Whether `unify(a, b)` would succeed; the heap is unchanged.
    pub fn trial_unify(&mut self, a: NodeId, b: NodeId) -> bool {
        let m = self.mark();
        let ok = self.unify(a, b);
        self.undo_to(m);
        ok
    }

    pub fn trial_promote(&mut self, n: NodeId, t: TypeId) -> bool {
        let m = self.mark();
        let ok = self.promote(n, t);
        self.undo_to(m);
        ok
    }

    /// Records that `a` and `b` may never be identified.
    pub fn add_inequation(&mut self, a: NodeId, b: NodeId) -> bool {
        if self.same(a, b) {
            return false;
        }
        self.ineqs.push((a, b));
        self.trail.push(Undo::Ineq);
        true
    }

    fn run(&mut self, mut work: Vec<Work>) -> bool {
        let m = self.mark();
        let ok = self.drain(&mut work) && self.ineqs.iter().all(|&(a, b)| !self.same(a, b));
        if !ok {
            self.undo_to(m);
        }
        ok
    }

    fn drain(&mut self, work: &mut Vec<Work>) -> bool {
        while let Some(w) = work.pop() {
            match w {
                Work::Merge(a, b) => {
                    let (x, y) = (self.find(a), self.find(b));
                    if x == y {
                        continue;
                    }
                    let (tx, ty) = (self.cells[x.idx()].ty, self.cells[y.idx()].ty);
                    let Some(t) = self.sig.join(tx, ty) else {
                        return false;
                    };
                    self.save(x);
                    self.save(y);
                    let ya = std::mem::take(&mut self.cells[y.idx()].arcs);
                    self.cells[y.idx()].parent = Some(x);
                    let mut merged = self.cells[x.idx()].arcs.clone();
                    for (f, v) in ya {
                        match merged.binary_search_by_key(&f, |&(g, _)| g) {
                            Ok(i) => work.push(Work::Merge(merged[i].1, v)),
                            Err(i) => merged.insert(i, (f, v)),
                        }
                    }
                    self.cells[x.idx()].arcs = merged;
                    self.emit(Event::Bound { survivor: x, absorbed: y });
                    if t != tx {
                        self.cells[x.idx()].ty = t;
                        self.emit(Event::Promoted(x));
                    }
                    if !self.close(x, work) {
                        return false;
                    }
                }
                Work::Promote(n, t) => {
                    let x = self.find(n);
                    let cur = self.cells[x.idx()].ty;
                    let Some(j) = self.sig.join(cur, t) else {
                        return false;
                    };
                    if j == cur {
                        continue;
                    }
                    self.save(x);
                    self.cells[x.idx()].ty = j;
                    self.emit(Event::Promoted(x));
                    if !self.close(x, work) {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Re-establishes appropriateness at `x` after its type changed or it
    /// absorbed another node: values are pushed down to their restrictions
    /// and missing features are added at maximal generality.
    fn close(&mut self, x: NodeId, work: &mut Vec<Work>) -> bool {
        let t = self.cells[x.idx()].ty;
        for &(f, r) in self.sig.approp_features(t) {
            let existing = self.cells[x.idx()]
                .arcs
                .binary_search_by_key(&f, |&(g, _)| g);
            match existing {
                Ok(i) => {
                    let v = self.cells[x.idx()].arcs[i].1;
                    work.push(Work::Promote(v, r));
                }
                Err(i) => {
                    if !self.sig.has_finite_mgsat(r) {
                        return false;
                    }
                    let v = self.fresh_finite(r);
                    // the cell was already saved by the caller
                    self.cells[x.idx()].arcs.insert(i, (f, v));
                    self.emit(Event::Instantiated(f, x));
                }
            }
        }
        true
    }

    /// Copies a frozen structure into the heap and returns its root.
    pub fn import(&mut self, fs: &FeatureStructure) -> NodeId {
        let base = self.cells.len() as u32;
        for node in fs.nodes() {
            self.push_cell(node.ty);
        }
        for (i, node) in fs.nodes().iter().enumerate() {
            self.cells[base as usize + i].arcs = node
                .feats
                .iter()
                .map(|&(f, v)| (f, NodeId(base + v as u32)))
                .collect();
        }
        for &(a, b) in fs.inequations() {
            self.ineqs.push((NodeId(base + a as u32), NodeId(base + b as u32)));
            self.trail.push(Undo::Ineq);
        }
        NodeId(base)
    }

    /// Canonical snapshot of the structure reachable from `root`: nodes in
    /// depth-first preorder following features in canonical order.
    pub fn export(&self, root: NodeId) -> FeatureStructure {
        let (fs, _) = self.export_with_map(root);
        fs
    }

    /// Like [`Heap::export`], also returning the heap representative of
    /// every exported node.
    pub fn export_with_map(&self, root: NodeId) -> (FeatureStructure, Vec<NodeId>) {
        let mut order: Vec<NodeId> = Vec::new();
        let mut index: HashMap<NodeId, usize> = HashMap::new();
        let mut stack = vec![self.find(root)];
        while let Some(n) = stack.pop() {
            if index.contains_key(&n) {
                continue;
            }
            index.insert(n, order.len());
            order.push(n);
            for &(_, v) in self.arcs(n).iter().rev() {
                let v = self.find(v);
                if !index.contains_key(&v) {
                    stack.push(v);
                }
            }
        }
        let nodes = order
            .iter()
            .map(|&n| FsNode {
                ty: self.ty(n),
                feats: self.arcs(n).iter().map(|&(f, v)| (f, index[&self.find(v)])).collect(),
            })
            .collect();
        let mut ineqs = Vec::new();
        for &(a, b) in &self.ineqs {
            if let (Some(&i), Some(&j)) = (index.get(&self.find(a)), index.get(&self.find(b))) {
                ineqs.push((i, j));
            }
        }
        (FeatureStructure::from_parts(nodes, ineqs), order)
    }

    /// Whether the structure at `n` is at least as specific as the most
    /// general satisfier of `t`.
    pub fn subsumed_by_mgsat(&self, n: NodeId, t: TypeId) -> bool {
        let mut seen = HashSet::new();
        self.pattern_check(n, t, &mut seen)
    }

    fn pattern_check(&self, n: NodeId, t: TypeId, seen: &mut HashSet<(NodeId, TypeId)>) -> bool {
        let n = self.find(n);
        if !seen.insert((n, t)) {
            return true;
        }
        if !self.sig.subsumes(t, self.ty(n)) {
            return false;
        }
        self.sig.approp_features(t).iter().all(|&(f, r)| match self.arc(n, f) {
            Some(v) => self.pattern_check(v, r, seen),
            None => false,
        })
    }

    /// Hash of the complete heap state, for checking trail restoration.
    pub fn state_hash(&self) -> u64 {
        let mut h = DefaultHasher::new();
        self.cells.hash(&mut h);
        self.ineqs.hash(&mut h);
        h.finish()
    }

    /// Checks total well-typedness of everything reachable from `root`.
    pub fn audit(&self, root: NodeId) -> Result<(), String> {
        let fs = self.export(root);
        fs.check_well_typed(self.sig)
    }
}
