use std::collections::HashSet;
use std::rc::Rc;

use super::{Answer, Bound, QueryConfig, QueryResult};
use crate::compiler::{CompiledGrammar, CompiledQuery, CoverRule, Ir, RelId};
use crate::desclang::{Desc, Scope, Slot};
use crate::signature::{Signature, TypeId};
use crate::tfs::{Event, FeatureStructure, Heap, Mark, NodeId};

#[derive(Clone)]
enum Task<'a> {
    Run(&'a Ir, usize),
    Desc(NodeId, &'a Desc, usize),
    Clauses {
        rel: RelId,
        args: Rc<[NodeId]>,
        next: usize,
        depth: usize,
    },
    Promote {
        node: NodeId,
        subs: Rc<[TypeId]>,
        next: usize,
    },
}

enum Cont<'a> {
    Nil,
    Cons(Task<'a>, Rc<Cont<'a>>),
}

type K<'a> = Rc<Cont<'a>>;

fn cons<'a>(t: Task<'a>, rest: K<'a>) -> K<'a> {
    Rc::new(Cont::Cons(t, rest))
}

struct Frame {
    slots: Vec<Option<NodeId>>,
    onces: Vec<bool>,
    depth: usize,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Status {
    Live,
    Fired,
    Dismissed,
}

enum Kind<'a> {
    TypeWhen { ty: TypeId, node: NodeId, body: &'a Ir },
    IdentWhen { left: NodeId, right: NodeId, body: &'a Ir },
    Cover { rule: &'a CoverRule, node: NodeId },
}

struct Suspension<'a> {
    kind: Kind<'a>,
    frame: usize,
    status: Status,
}

enum Undo {
    Slot(usize, Slot, Option<NodeId>),
    Once(usize, u32),
    Status(usize, Status),
    PushSusp,
    PushFrame,
    PushPosted,
}

struct ChoicePoint<'a> {
    heap: Mark,
    trail: usize,
    processed: usize,
    extensions: usize,
    cont: K<'a>,
    #[cfg(debug_assertions)]
    snapshot: Snapshot,
}

#[cfg(debug_assertions)]
#[derive(Debug, PartialEq, Eq)]
struct Snapshot {
    heap: u64,
    statuses: Vec<Status>,
    frames: Vec<(Vec<Option<NodeId>>, Vec<bool>)>,
    posted: usize,
}

enum Leaf {
    Stop,
    Resume,
    Backtrack,
}

enum Verdict {
    Stay,
    Fire,
    Dismiss,
    Fail,
}

pub(super) struct Machine<'a> {
    sig: &'a Signature,
    grammar: &'a CompiledGrammar,
    cfg: &'a QueryConfig,
    heap: Heap<'a>,
    frames: Vec<Frame>,
    susps: Vec<Suspension<'a>>,
    /// (constraint index or `usize::MAX - type` for cover, node) pairs
    /// already posted.
    posted: Vec<(usize, NodeId)>,
    trail: Vec<Undo>,
    choices: Vec<ChoicePoint<'a>>,
    processed: usize,
    extensions: usize,
    root: Option<NodeId>,
    query_scope: Option<&'a Scope>,
    cont: K<'a>,
    steps: usize,
    seen_answers: HashSet<FeatureStructure>,
    result: QueryResult,
}

const COVER_KEY: usize = usize::MAX / 2;

impl<'a> Machine<'a> {
    pub fn new(sig: &'a Signature, grammar: &'a CompiledGrammar, cfg: &'a QueryConfig) -> Self {
        let mut heap = Heap::new(sig);
        heap.record_events(true);
        Machine {
            sig,
            grammar,
            cfg,
            heap,
            frames: Vec::new(),
            susps: Vec::new(),
            posted: Vec::new(),
            trail: Vec::new(),
            choices: Vec::new(),
            processed: 0,
            extensions: 0,
            root: None,
            query_scope: None,
            cont: Rc::new(Cont::Nil),
            steps: 0,
            seen_answers: HashSet::new(),
            result: QueryResult::default(),
        }
    }

    fn trace(&mut self, line: impl FnOnce() -> String) {
        if self.cfg.trace {
            self.result.trace.push(line());
        }
    }

    fn exceeded(&mut self, b: Bound) {
        if !self.result.exceeded.contains(&b) {
            self.result.exceeded.push(b);
        }
    }

    fn new_frame(&mut self, size: usize, onces: u32, depth: usize) -> usize {
        self.frames.push(Frame {
            slots: vec![None; size],
            onces: vec![false; onces as usize],
            depth,
        });
        self.trail.push(Undo::PushFrame);
        self.frames.len() - 1
    }

    fn set_slot(&mut self, frame: usize, s: Slot, n: Option<NodeId>) {
        let slots = &mut self.frames[frame].slots;
        if slots.len() <= s.0 as usize {
            slots.resize(s.0 as usize + 1, None);
        }
        let old = slots[s.0 as usize];
        slots[s.0 as usize] = n;
        self.trail.push(Undo::Slot(frame, s, old));
    }

    fn slot(&self, frame: usize, s: Slot) -> Option<NodeId> {
        self.frames[frame].slots.get(s.0 as usize).copied().flatten()
    }

    /// The node in a slot, creating an unconstrained one if it is empty.
    fn slot_node(&mut self, frame: usize, s: Slot) -> NodeId {
        match self.slot(frame, s) {
            Some(n) => self.heap.find(n),
            None => {
                let n = self.heap.fresh(TypeId::BOT).expect("bot has a finite satisfier");
                self.set_slot(frame, s, Some(n));
                n
            }
        }
    }

    fn set_status(&mut self, id: usize, st: Status) {
        let old = self.susps[id].status;
        self.susps[id].status = st;
        self.trail.push(Undo::Status(id, old));
    }

    fn suspend(&mut self, kind: Kind<'a>, frame: usize) -> usize {
        self.susps.push(Suspension {
            kind,
            frame,
            status: Status::Live,
        });
        self.trail.push(Undo::PushSusp);
        self.susps.len() - 1
    }

    fn undo_to(&mut self, len: usize) {
        while self.trail.len() > len {
            match self.trail.pop().expect("trail longer than mark") {
                Undo::Slot(f, s, old) => self.frames[f].slots[s.0 as usize] = old,
                Undo::Once(f, c) => self.frames[f].onces[c as usize] = false,
                Undo::Status(id, old) => self.susps[id].status = old,
                Undo::PushSusp => {
                    self.susps.pop();
                }
                Undo::PushFrame => {
                    self.frames.pop();
                }
                Undo::PushPosted => {
                    self.posted.pop();
                }
            }
        }
    }

    fn choice(&mut self, alt: K<'a>) {
        self.choices.push(ChoicePoint {
            heap: self.heap.mark(),
            trail: self.trail.len(),
            processed: self.processed,
            extensions: self.extensions,
            cont: alt,
            #[cfg(debug_assertions)]
            snapshot: self.snapshot(),
        });
    }

    #[cfg(debug_assertions)]
    fn snapshot(&self) -> Snapshot {
        Snapshot {
            heap: self.heap.state_hash(),
            statuses: self.susps.iter().map(|s| s.status).collect(),
            frames: self.frames.iter().map(|f| (f.slots.clone(), f.onces.clone())).collect(),
            posted: self.posted.len(),
        }
    }

    fn backtrack(&mut self) -> bool {
        match self.choices.pop() {
            None => false,
            Some(cp) => {
                self.heap.undo_to(cp.heap);
                self.undo_to(cp.trail);
                self.processed = cp.processed;
                self.extensions = cp.extensions;
                self.cont = cp.cont;
                #[cfg(debug_assertions)]
                debug_assert_eq!(self.snapshot(), cp.snapshot, "backtracking must restore the store");
                true
            }
        }
    }

    pub fn start_query(&mut self, q: &'a CompiledQuery) {
        let frame = self.new_frame(q.scope.len(), q.once_cells, 0);
        self.query_scope = Some(&q.scope);
        let root = self.heap.fresh(TypeId::BOT).expect("bot has a finite satisfier");
        self.root = Some(root);
        let nil = Rc::new(Cont::Nil);
        self.cont = cons(Task::Desc(root, &q.desc, frame), cons(Task::Run(&q.goal, frame), nil));
    }

    pub fn start_structure(&mut self, fs: &FeatureStructure) {
        let root = self.heap.import(fs);
        self.root = Some(root);
    }

    pub fn start_single(&mut self, fs: &FeatureStructure, index: usize) {
        let root = self.heap.import(fs);
        self.root = Some(root);
        self.processed = self.heap.event_count();
        let c = &self.grammar.constraints[index];
        if self.sig.subsumes(c.trigger, self.heap.ty(root)) {
            let frame = self.new_frame(c.scope.len(), c.once_cells, 0);
            self.set_slot(frame, Slot(0), Some(root));
            self.cont = cons(Task::Run(&c.program, frame), Rc::new(Cont::Nil));
        }
    }

    pub fn run(mut self) -> QueryResult {
        // events from building the initial state
        match self.process_events() {
            Ok(tasks) => self.cont = prepend(tasks, self.cont.clone()),
            Err(()) => {
                if !self.backtrack() {
                    return self.result;
                }
            }
        }
        loop {
            self.steps += 1;
            if self.steps > self.cfg.max_steps {
                self.exceeded(Bound::Steps);
                return self.result;
            }
            let (task, rest) = match &*self.cont {
                Cont::Nil => {
                    match self.at_leaf() {
                        Leaf::Stop => return self.result,
                        Leaf::Resume => {}
                        Leaf::Backtrack => {
                            if !self.backtrack() {
                                return self.result;
                            }
                        }
                    }
                    continue;
                }
                Cont::Cons(t, rest) => (t.clone(), rest.clone()),
            };
            let next = self
                .exec(task, rest)
                .and_then(|k| self.process_events().map(|tasks| prepend(tasks, k)));
            match next {
                Ok(k) => self.cont = k,
                Err(()) => {
                    self.trace(|| "fail".to_string());
                    if !self.backtrack() {
                        return self.result;
                    }
                }
            }
        }
    }

    /// Handles an exhausted continuation: records an answer or, when
    /// maximizing, schedules the next promotion.
    fn at_leaf(&mut self) -> Leaf {
        if self.cfg.maximize {
            if let Some((node, subs)) = self.next_promotion() {
                if self.extensions >= self.cfg.extension_depth {
                    self.exceeded(Bound::ExtensionDepth);
                    return Leaf::Backtrack;
                }
                self.cont = cons(
                    Task::Promote {
                        node,
                        subs: subs.into(),
                        next: 0,
                    },
                    Rc::new(Cont::Nil),
                );
                return Leaf::Resume;
            }
            if self.live().next().is_some() {
                return Leaf::Backtrack;
            }
        }
        let answer = self.answer();
        if self.cfg.maximize && !self.seen_answers.insert(answer.structure.clone()) {
            return Leaf::Backtrack;
        }
        if self.result.answers.len() >= self.cfg.answer_limit {
            self.result.truncated = true;
            return Leaf::Stop;
        }
        self.result.answers.push(answer);
        // keep looking: one more answer decides whether the limit truncated
        Leaf::Backtrack
    }

    fn live(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.susps.len()).filter(|&i| self.susps[i].status == Status::Live)
    }

    fn watched(&self, id: usize) -> Vec<NodeId> {
        match &self.susps[id].kind {
            Kind::TypeWhen { node, .. } => vec![*node],
            Kind::IdentWhen { left, right, .. } => vec![*left, *right],
            Kind::Cover { rule, node } => {
                let mut v = vec![*node];
                v.extend(rule.features.iter().filter_map(|&f| self.heap.arc(*node, f)));
                v
            }
        }
    }

    /// The first non-maximal node watched by the oldest live suspension
    /// that has one, with its immediate subtypes.
    fn next_promotion(&self) -> Option<(NodeId, Vec<TypeId>)> {
        for id in self.live() {
            for n in self.watched(id) {
                let t = self.heap.ty(n);
                if !self.sig.is_maximal(t) {
                    return Some((self.heap.find(n), self.sig.immediate_subtypes(t).to_vec()));
                }
            }
        }
        None
    }

    fn answer(&self) -> Answer {
        let root = self.root.expect("machine started");
        let (structure, order) = self.heap.export_with_map(root);
        let residue = self.live().map(|id| self.describe(id, &structure, &order)).collect();
        let mut bindings = Vec::new();
        if let Some(scope) = self.query_scope {
            for (s, name) in scope.named() {
                if name.starts_with('_') {
                    continue;
                }
                if let Some(n) = self.slot(0, s) {
                    bindings.push((name.to_string(), self.heap.export(n)));
                }
            }
        }
        Answer {
            structure,
            bindings,
            residue,
        }
    }

    fn describe(&self, id: usize, fs: &FeatureStructure, order: &[NodeId]) -> String {
        let at = |n: NodeId| {
            let n = self.heap.find(n);
            match order.iter().position(|&m| m == n) {
                Some(i) => path_string(self.sig, fs, i),
                None => format!("detached node {n}"),
            }
        };
        match &self.susps[id].kind {
            Kind::TypeWhen { ty, node, .. } => format!("typewhen({}) at {}", self.sig.type_name(*ty), at(*node)),
            Kind::IdentWhen { left, right, .. } => format!("identwhen at {} and {}", at(*left), at(*right)),
            Kind::Cover { rule, node } => format!("subtype_cover({}) at {}", self.sig.type_name(rule.ty), at(*node)),
        }
    }

    fn exec(&mut self, task: Task<'a>, rest: K<'a>) -> Result<K<'a>, ()> {
        match task {
            Task::Run(ir, frame) => self.run_ir(ir, frame, rest),
            Task::Desc(node, d, frame) => self.add_desc(node, d, frame, rest),
            Task::Clauses { rel, args, next, depth } => {
                let relation = &self.grammar.relations[rel.0 as usize];
                if next >= relation.clauses.len() {
                    return Err(());
                }
                if next + 1 < relation.clauses.len() {
                    let alt = Task::Clauses {
                        rel,
                        args: args.clone(),
                        next: next + 1,
                        depth,
                    };
                    self.choice(cons(alt, rest.clone()));
                }
                let clause = &relation.clauses[next];
                self.trace(|| format!("call {}/{} clause {}", relation.name, relation.arity, next + 1));
                let frame = self.new_frame(clause.scope.len(), clause.once_cells, depth);
                let mut k = cons(Task::Run(&clause.body, frame), rest);
                for (i, h) in clause.head.iter().enumerate().rev() {
                    k = cons(Task::Desc(args[i], h, frame), k);
                }
                Ok(k)
            }
            Task::Promote { node, subs, next } => {
                if next + 1 < subs.len() {
                    let alt = Task::Promote {
                        node,
                        subs: subs.clone(),
                        next: next + 1,
                    };
                    self.choice(cons(alt, rest.clone()));
                }
                self.extensions += 1;
                let t = subs[next];
                self.trace(|| format!("extend {node} to {}", self.sig.type_name(t)));
                if self.heap.promote(node, t) {
                    Ok(rest)
                } else {
                    Err(())
                }
            }
        }
    }

    fn run_ir(&mut self, ir: &'a Ir, frame: usize, rest: K<'a>) -> Result<K<'a>, ()> {
        match ir {
            Ir::Done | Ir::Hole => Ok(rest),
            Ir::Fail => Err(()),
            Ir::TypeWhen { ty, slot, body } => {
                let node = self.slot_node(frame, *slot);
                if self.heap.subsumed_by_mgsat(node, *ty) {
                    Ok(cons(Task::Run(body, frame), rest))
                } else if self.sig.join(self.heap.ty(node), *ty).is_none() {
                    Ok(rest)
                } else {
                    let id = self.suspend(
                        Kind::TypeWhen {
                            ty: *ty,
                            node,
                            body,
                        },
                        frame,
                    );
                    self.trace(|| format!("post #{id} typewhen({}) on {node}", self.sig.type_name(*ty)));
                    Ok(rest)
                }
            }
            Ir::Farg { feat, slot, dest, body } => {
                let node = self.slot_node(frame, *slot);
                match self.heap.arc(node, *feat) {
                    Some(v) => {
                        self.set_slot(frame, *dest, Some(v));
                        Ok(cons(Task::Run(body, frame), rest))
                    }
                    None => {
                        debug_assert!(false, "farg on a node without the feature");
                        Ok(rest)
                    }
                }
            }
            Ir::IdentWhen { left, right, body } => {
                let a = self.slot_node(frame, *left);
                let b = self.slot_node(frame, *right);
                if self.heap.same(a, b) {
                    Ok(cons(Task::Run(body, frame), rest))
                } else if !self.heap.trial_unify(a, b) {
                    Ok(rest)
                } else {
                    let id = self.suspend(Kind::IdentWhen { left: a, right: b, body }, frame);
                    self.trace(|| format!("post #{id} identwhen on {a}, {b}"));
                    Ok(rest)
                }
            }
            Ir::OnceGuard { cell, body } => {
                if self.frames[frame].onces[*cell as usize] {
                    self.trace(|| format!("once skip {frame}.{cell}"));
                    Ok(rest)
                } else {
                    self.frames[frame].onces[*cell as usize] = true;
                    self.trail.push(Undo::Once(frame, *cell));
                    self.trace(|| format!("once enter {frame}.{cell}"));
                    Ok(cons(Task::Run(body, frame), rest))
                }
            }
            Ir::UnifySlotDesc { slot, desc } => {
                let node = self.slot_node(frame, *slot);
                Ok(cons(Task::Desc(node, desc, frame), rest))
            }
            Ir::Seq(a, b) | Ir::Both(a, b) => Ok(cons(Task::Run(a, frame), cons(Task::Run(b, frame), rest))),
            Ir::Choice(a, b) => {
                self.choice(cons(Task::Run(b, frame), rest.clone()));
                Ok(cons(Task::Run(a, frame), rest))
            }
            Ir::CallRel { rel, args } => {
                let depth = self.frames[frame].depth + 1;
                if depth > self.cfg.sld_depth {
                    self.exceeded(Bound::SldDepth);
                    return Err(());
                }
                let nodes: Vec<NodeId> = args
                    .iter()
                    .map(|_| self.heap.fresh(TypeId::BOT).expect("bot has a finite satisfier"))
                    .collect();
                let mut k = cons(
                    Task::Clauses {
                        rel: *rel,
                        args: nodes.clone().into(),
                        next: 0,
                        depth,
                    },
                    rest,
                );
                for (n, d) in nodes.iter().zip(args).rev() {
                    k = cons(Task::Desc(*n, d, frame), k);
                }
                Ok(k)
            }
            Ir::Ineq(a, b) => {
                let x = self.slot_node(frame, *a);
                let y = self.slot_node(frame, *b);
                if self.heap.add_inequation(x, y) {
                    Ok(rest)
                } else {
                    Err(())
                }
            }
        }
    }

    fn add_desc(&mut self, node: NodeId, d: &'a Desc, frame: usize, rest: K<'a>) -> Result<K<'a>, ()> {
        match d {
            Desc::Var(s) => match self.slot(frame, *s) {
                Some(prev) => self.heap.unify(node, prev).then_some(rest).ok_or(()),
                None => {
                    self.set_slot(frame, *s, Some(node));
                    Ok(rest)
                }
            },
            Desc::Type(t) => self.heap.promote(node, *t).then_some(rest).ok_or(()),
            Desc::Feat(f, v) => {
                if !self.heap.promote(node, self.sig.intro(*f)) {
                    return Err(());
                }
                let val = self.heap.arc(node, *f).expect("feature appropriate after promotion");
                Ok(cons(Task::Desc(val, v, frame), rest))
            }
            Desc::And(a, b) => Ok(cons(Task::Desc(node, a, frame), cons(Task::Desc(node, b, frame), rest))),
            Desc::Or(a, b) => {
                self.choice(cons(Task::Desc(node, b, frame), rest.clone()));
                Ok(cons(Task::Desc(node, a, frame), rest))
            }
        }
    }

    fn was_posted(&self, key: usize, rep: NodeId) -> bool {
        self.posted.iter().any(|&(k, n)| k == key && self.heap.find(n) == rep)
    }

    /// Reacts to graph events since the last call: posts principles and
    /// covering checks on nodes that reached their types, and re-examines
    /// suspensions. Returns the bodies to run, in firing order.
    fn process_events(&mut self) -> Result<Vec<Task<'a>>, ()> {
        let mut out = Vec::new();
        while self.processed < self.heap.event_count() {
            let events: Vec<Event> = self.heap.events()[self.processed..].to_vec();
            self.processed = self.heap.event_count();
            let mut touched: Vec<NodeId> = Vec::new();
            for e in &events {
                let n = match *e {
                    Event::Created(n) | Event::Promoted(n) | Event::Instantiated(_, n) => n,
                    Event::Bound { survivor, .. } => survivor,
                };
                let rep = self.heap.find(n);
                if !touched.contains(&rep) {
                    touched.push(rep);
                }
            }

            for id in 0..self.susps.len() {
                if self.susps[id].status != Status::Live {
                    continue;
                }
                let relevant = match &self.susps[id].kind {
                    Kind::TypeWhen { node, .. } => touched.contains(&self.heap.find(*node)),
                    Kind::IdentWhen { .. } | Kind::Cover { .. } => true,
                };
                if !relevant {
                    continue;
                }
                self.trace(|| format!("wake #{id}"));
                match self.examine(id) {
                    Verdict::Stay => {}
                    Verdict::Fire => {
                        self.set_status(id, Status::Fired);
                        self.trace(|| format!("fire #{id}"));
                        let frame = self.susps[id].frame;
                        match self.susps[id].kind {
                            Kind::TypeWhen { body, .. } | Kind::IdentWhen { body, .. } => out.push(Task::Run(body, frame)),
                            Kind::Cover { .. } => {}
                        }
                    }
                    Verdict::Dismiss => {
                        self.set_status(id, Status::Dismissed);
                        self.trace(|| format!("dismiss #{id}"));
                    }
                    Verdict::Fail => return Err(()),
                }
            }

            for rep in touched {
                let rep = self.heap.find(rep);
                let ty = self.heap.ty(rep);
                if self.cfg.universal {
                    for (ci, c) in self.grammar.constraints.iter().enumerate() {
                        if c.program == Ir::Done || !self.sig.subsumes(c.trigger, ty) || self.was_posted(ci, rep) {
                            continue;
                        }
                        self.posted.push((ci, rep));
                        self.trail.push(Undo::PushPosted);
                        let frame = self.new_frame(c.scope.len(), c.once_cells, 0);
                        self.set_slot(frame, Slot(0), Some(rep));
                        self.trace(|| format!("post principle {} on {rep}", ci + 1));
                        out.push(Task::Run(&c.program, frame));
                    }
                }
                if self.cfg.subtype_covering {
                    if let Some(rule) = self.grammar.cover.rule_for(ty) {
                        let key = COVER_KEY + ty.0 as usize;
                        if !self.was_posted(key, rep) {
                            self.posted.push((key, rep));
                            self.trail.push(Undo::PushPosted);
                            let id = self.suspend(Kind::Cover { rule, node: rep }, 0);
                            self.trace(|| format!("post #{id} subtype_cover({}) on {rep}", self.sig.type_name(ty)));
                            match self.examine(id) {
                                Verdict::Stay => {}
                                Verdict::Dismiss | Verdict::Fire => {
                                    self.set_status(id, Status::Dismissed);
                                    self.trace(|| format!("dismiss #{id}"));
                                }
                                Verdict::Fail => return Err(()),
                            }
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    fn examine(&mut self, id: usize) -> Verdict {
        match self.susps[id].kind {
            Kind::TypeWhen { ty, node, .. } => {
                if self.heap.subsumed_by_mgsat(node, ty) {
                    Verdict::Fire
                } else if self.sig.join(self.heap.ty(node), ty).is_none() {
                    Verdict::Dismiss
                } else {
                    Verdict::Stay
                }
            }
            Kind::IdentWhen { left, right, .. } => {
                if self.heap.same(left, right) {
                    Verdict::Fire
                } else if !self.heap.trial_unify(left, right) {
                    Verdict::Dismiss
                } else {
                    Verdict::Stay
                }
            }
            Kind::Cover { rule, node } => self.cover_step(id, rule, node),
        }
    }

    /// The three covering rules, in order: dismissal on retyping, dismissal
    /// on a safe product, and counting the products still reachable.
    fn cover_step(&mut self, id: usize, rule: &'a CoverRule, node: NodeId) -> Verdict {
        let node = self.heap.find(node);
        if self.heap.ty(node) != rule.ty {
            return Verdict::Dismiss;
        }
        let values: Vec<NodeId> = rule
            .features
            .iter()
            .map(|&f| self.heap.arc(node, f).expect("feature appropriate at deranged type"))
            .collect();
        let safe = rule
            .products
            .iter()
            .any(|p| p.iter().zip(&values).all(|(&t, &v)| self.heap.subsumed_by_mgsat(v, t)));
        if safe {
            return Verdict::Dismiss;
        }
        let mut consistent: Vec<usize> = Vec::new();
        let mut carriers: Vec<TypeId> = Vec::new();
        for &(m, p) in &rule.carriers {
            if self.heap.trial_promote(node, m) {
                if !consistent.contains(&p) {
                    consistent.push(p);
                }
                carriers.push(m);
            }
        }
        self.trace(|| format!("cover #{id} N={}", consistent.len()));
        match consistent.len() {
            0 => Verdict::Fail,
            1 => {
                let p = consistent[0];
                let target = carriers
                    .iter()
                    .filter(|&&m| rule.carriers.contains(&(m, p)))
                    .fold(None, |acc: Option<TypeId>, &m| Some(acc.map_or(m, |a| self.sig.meet(a, m))))
                    .expect("one consistent carrier");
                let ok = rule.products[p]
                    .iter()
                    .zip(&values)
                    .all(|(&t, &v)| self.heap.promote(v, t))
                    && self.heap.promote(node, target);
                if ok {
                    Verdict::Dismiss
                } else {
                    Verdict::Fail
                }
            }
            _ => Verdict::Stay,
        }
    }
}

fn prepend<'a>(tasks: Vec<Task<'a>>, rest: K<'a>) -> K<'a> {
    tasks.into_iter().rev().fold(rest, |k, t| cons(t, k))
}

/// The first path reaching node `i` in a canonical depth-first walk.
fn path_string(sig: &Signature, fs: &FeatureStructure, target: usize) -> String {
    fn walk(fs: &FeatureStructure, n: usize, target: usize, seen: &mut [bool], path: &mut Vec<crate::signature::FeatId>) -> bool {
        if n == target {
            return true;
        }
        if seen[n] {
            return false;
        }
        seen[n] = true;
        for &(f, v) in &fs.nodes()[n].feats {
            path.push(f);
            if walk(fs, v, target, seen, path) {
                return true;
            }
            path.pop();
        }
        false
    }
    let mut path = Vec::new();
    let mut seen = vec![false; fs.nodes().len()];
    walk(fs, 0, target, &mut seen, &mut path);
    if path.is_empty() {
        "root".to_string()
    } else {
        path.iter().map(|&f| sig.feat_name(f)).collect::<Vec<_>>().join(":")
    }
}
