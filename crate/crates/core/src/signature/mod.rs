//! Type signatures: a finite meet semi-lattice of types with
//! appropriateness conditions and unique feature introduction.

mod derange;

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::desclang::{self, ParseError, RawSignature};

pub use derange::{derangement_analysis, DerangedType, DerangementReport};

pub const BOT: &str = "bot";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TypeId(pub u32);

/// Features are numbered in lexicographic order of their names, so
/// `FeatId` order is the canonical feature order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct FeatId(pub u32);

impl TypeId {
    pub const BOT: TypeId = TypeId(0);

    fn idx(self) -> usize {
        self.0 as usize
    }
}

impl FeatId {
    fn idx(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SignatureError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("line {line}: `bot` cannot be declared as a subtype of `{parent}`")]
    BotNotRoot { parent: String, line: usize },
    #[error("line {line}: `{name}` is a reserved word and cannot name a type or feature")]
    Reserved { name: String, line: usize },
    #[error("subtype cycle through {}", .0.join(" < "))]
    Cycle(Vec<String>),
    #[error("types `{0}` and `{1}` have no greatest lower bound")]
    MissingMeet(String, String),
    #[error("types `{0}` and `{1}` have upper bounds but no least upper bound")]
    MissingJoin(String, String),
    #[error("line {line}: unknown value type `{value}` for feature `{feat}`")]
    UnknownValueType { feat: String, value: String, line: usize },
    #[error("feature `{feat}` has no unique introducer (introduced at {})", .minimal.join(", "))]
    NoUniqueIntroducer { feat: String, minimal: Vec<String> },
    #[error("feature `{feat}` at `{ty}`: restriction `{declared}` does not narrow inherited `{inherited}`")]
    NotNarrowing {
        feat: String,
        ty: String,
        declared: String,
        inherited: String,
    },
    #[error("feature `{feat}` at `{ty}`: inherited restrictions are inconsistent")]
    InconsistentRestriction { feat: String, ty: String },
}

/// A validated type signature. Immutable after construction.
#[derive(Debug, Clone)]
pub struct Signature {
    type_names: Vec<String>,
    type_index: HashMap<String, TypeId>,
    feat_names: Vec<String>,
    feat_index: HashMap<String, FeatId>,
    /// Immediate subtypes in declaration order.
    subs: Vec<Vec<TypeId>>,
    /// `le[a * n + b]` iff a is at least as general as b.
    le: Vec<bool>,
    joins: Vec<Option<TypeId>>,
    meets: Vec<TypeId>,
    intro: Vec<TypeId>,
    /// Appropriate features per type, sorted by feature id.
    approp: Vec<Vec<(FeatId, TypeId)>>,
    maximal_below: Vec<Vec<TypeId>>,
    finite_mgsat: Vec<bool>,
}

impl Signature {
    pub fn parse(text: &str) -> Result<Signature, SignatureError> {
        let raw = desclang::parse_signature(text)?;
        validate(&raw)
    }

    pub fn type_count(&self) -> usize {
        self.type_names.len()
    }

    pub fn feature_count(&self) -> usize {
        self.feat_names.len()
    }

    pub fn types(&self) -> impl Iterator<Item = TypeId> {
        (0..self.type_names.len() as u32).map(TypeId)
    }

    pub fn features(&self) -> impl Iterator<Item = FeatId> {
        (0..self.feat_names.len() as u32).map(FeatId)
    }

    pub fn type_id(&self, name: &str) -> Option<TypeId> {
        self.type_index.get(name).copied()
    }

    pub fn feat_id(&self, name: &str) -> Option<FeatId> {
        self.feat_index.get(name).copied()
    }

    pub fn type_name(&self, t: TypeId) -> &str {
        &self.type_names[t.idx()]
    }

    pub fn feat_name(&self, f: FeatId) -> &str {
        &self.feat_names[f.idx()]
    }

    /// `general ⊑ specific`: every object of type `specific` is also of type `general`.
    pub fn subsumes(&self, general: TypeId, specific: TypeId) -> bool {
        self.le[general.idx() * self.type_count() + specific.idx()]
    }

    /// Least upper bound (unification); `None` when the types are inconsistent.
    pub fn join(&self, a: TypeId, b: TypeId) -> Option<TypeId> {
        self.joins[a.idx() * self.type_count() + b.idx()]
    }

    /// Greatest lower bound (generalization); always defined.
    pub fn meet(&self, a: TypeId, b: TypeId) -> TypeId {
        self.meets[a.idx() * self.type_count() + b.idx()]
    }

    pub fn immediate_subtypes(&self, t: TypeId) -> &[TypeId] {
        &self.subs[t.idx()]
    }

    pub fn is_maximal(&self, t: TypeId) -> bool {
        self.subs[t.idx()].is_empty()
    }

    /// Maximal types below `t` (including `t` itself when maximal), in
    /// depth-first declaration order.
    pub fn maximal_subtypes(&self, t: TypeId) -> &[TypeId] {
        &self.maximal_below[t.idx()]
    }

    pub fn intro(&self, f: FeatId) -> TypeId {
        self.intro[f.idx()]
    }

    pub fn approp(&self, t: TypeId, f: FeatId) -> Option<TypeId> {
        let feats = &self.approp[t.idx()];
        feats.binary_search_by_key(&f, |&(g, _)| g).ok().map(|i| feats[i].1)
    }

    pub fn approp_features(&self, t: TypeId) -> &[(FeatId, TypeId)] {
        &self.approp[t.idx()]
    }

    /// Whether the most general satisfier of `t` is a finite structure.
    pub fn has_finite_mgsat(&self, t: TypeId) -> bool {
        self.finite_mgsat[t.idx()]
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for t in self.types() {
            write!(f, "{}", self.type_name(t))?;
            let subs = self.immediate_subtypes(t);
            if !subs.is_empty() {
                let names: Vec<_> = subs.iter().map(|&s| self.type_name(s)).collect();
                write!(f, " sub [{}]", names.join(", "))?;
            }
            let own: Vec<String> = self
                .approp_features(t)
                .iter()
                .filter(|&&(g, r)| self.intro(g) == t || !self.is_inherited(t, g, r))
                .map(|&(g, r)| format!("{}:{}", self.feat_name(g), self.type_name(r)))
                .collect();
            if !own.is_empty() {
                write!(f, " intro [{}]", own.join(", "))?;
            }
            writeln!(f, ".")?;
        }
        Ok(())
    }
}

impl Signature {
    fn is_inherited(&self, t: TypeId, g: FeatId, r: TypeId) -> bool {
        self.types()
            .filter(|&u| u != t && self.subsumes(u, t))
            .any(|u| self.approp(u, g) == Some(r))
    }
}

struct Builder {
    names: Vec<String>,
    index: HashMap<String, TypeId>,
}

impl Builder {
    fn intern(&mut self, name: &str) -> TypeId {
        if let Some(&t) = self.index.get(name) {
            return t;
        }
        let t = TypeId(self.names.len() as u32);
        self.names.push(name.to_string());
        self.index.insert(name.to_string(), t);
        t
    }
}

/// Checks raw declarations and builds the lattice tables.
///
/// Types that are declared without a supertype become immediate subtypes of
/// `bot`. A clause's `intro` list both introduces features and refines
/// inherited ones; which of the two happens is decided by whether the
/// feature is already appropriate at a supertype.
pub fn validate(raw: &RawSignature) -> Result<Signature, SignatureError> {
    let mut b = Builder {
        names: Vec::new(),
        index: HashMap::new(),
    };
    b.intern(BOT);

    for d in &raw.decls {
        for name in std::iter::once(&d.name).chain(d.subs.iter()) {
            if desclang_reserved(name) {
                return Err(SignatureError::Reserved {
                    name: name.clone(),
                    line: d.line,
                });
            }
        }
        b.intern(&d.name);
        for s in &d.subs {
            if s == BOT {
                return Err(SignatureError::BotNotRoot {
                    parent: d.name.clone(),
                    line: d.line,
                });
            }
            b.intern(s);
        }
    }
    let n = b.names.len();

    let mut subs: Vec<Vec<TypeId>> = vec![Vec::new(); n];
    let mut has_parent = vec![false; n];
    for d in &raw.decls {
        let t = b.index[&d.name];
        for s in &d.subs {
            let s = b.index[s];
            if !subs[t.idx()].contains(&s) {
                subs[t.idx()].push(s);
            }
            has_parent[s.idx()] = true;
        }
    }
    for (t, &parented) in has_parent.iter().enumerate().skip(1) {
        if !parented {
            subs[0].push(TypeId(t as u32));
        }
    }

    check_acyclic(&subs, &b.names)?;

    // reflexive-transitive closure: le[a][b] iff a ⊑ b
    let mut le = vec![false; n * n];
    for a in 0..n {
        let mut stack = vec![a];
        while let Some(x) = stack.pop() {
            if le[a * n + x] {
                continue;
            }
            le[a * n + x] = true;
            stack.extend(subs[x].iter().map(|s| s.idx()));
        }
    }

    let mut meets = vec![TypeId::BOT; n * n];
    let mut joins = vec![None; n * n];
    for x in 0..n {
        for y in x..n {
            let lower: Vec<usize> = (0..n).filter(|&c| le[c * n + x] && le[c * n + y]).collect();
            let greatest = lower.iter().copied().find(|&g| lower.iter().all(|&l| le[l * n + g]));
            let Some(g) = greatest else {
                return Err(SignatureError::MissingMeet(b.names[x].clone(), b.names[y].clone()));
            };
            meets[x * n + y] = TypeId(g as u32);
            meets[y * n + x] = TypeId(g as u32);

            let upper: Vec<usize> = (0..n).filter(|&c| le[x * n + c] && le[y * n + c]).collect();
            if !upper.is_empty() {
                let least = upper.iter().copied().find(|&l| upper.iter().all(|&u| le[l * n + u]));
                let Some(l) = least else {
                    return Err(SignatureError::MissingJoin(b.names[x].clone(), b.names[y].clone()));
                };
                joins[x * n + y] = Some(TypeId(l as u32));
                joins[y * n + x] = Some(TypeId(l as u32));
            }
        }
    }

    // features, numbered in name order
    let mut feat_names: Vec<String> = raw
        .decls
        .iter()
        .flat_map(|d| d.intro.iter().map(|(f, _)| f.clone()))
        .collect();
    feat_names.sort();
    feat_names.dedup();
    for (f, line) in raw.decls.iter().flat_map(|d| d.intro.iter().map(move |(f, _)| (f, d.line))) {
        if desclang_reserved(f) {
            return Err(SignatureError::Reserved { name: f.clone(), line });
        }
    }
    let feat_index: HashMap<String, FeatId> = feat_names
        .iter()
        .enumerate()
        .map(|(i, f)| (f.clone(), FeatId(i as u32)))
        .collect();
    let nf = feat_names.len();

    // declared restrictions: (type, feature) -> value type
    let mut declared: Vec<Vec<(TypeId, TypeId)>> = vec![Vec::new(); nf];
    for d in &raw.decls {
        let t = b.index[&d.name];
        for (f, v) in &d.intro {
            let Some(&vt) = b.index.get(v) else {
                return Err(SignatureError::UnknownValueType {
                    feat: f.clone(),
                    value: v.clone(),
                    line: d.line,
                });
            };
            let fid = feat_index[f];
            let entry = &mut declared[fid.idx()];
            match entry.iter_mut().find(|(dt, _)| *dt == t) {
                Some(slot) => {
                    let joined = joins[slot.1.idx() * n + vt.idx()].ok_or_else(|| {
                        SignatureError::InconsistentRestriction {
                            feat: f.clone(),
                            ty: d.name.clone(),
                        }
                    })?;
                    slot.1 = joined;
                }
                None => entry.push((t, vt)),
            }
        }
    }

    let mut intro = vec![TypeId::BOT; nf];
    for (fi, decls) in declared.iter().enumerate() {
        let minimal: Vec<TypeId> = decls
            .iter()
            .map(|&(t, _)| t)
            .filter(|&t| !decls.iter().any(|&(u, _)| u != t && le[u.idx() * n + t.idx()]))
            .collect();
        if minimal.len() != 1 {
            return Err(SignatureError::NoUniqueIntroducer {
                feat: feat_names[fi].clone(),
                minimal: minimal.iter().map(|t| b.names[t.idx()].clone()).collect(),
            });
        }
        intro[fi] = minimal[0];
    }

    let mut approp: Vec<Vec<(FeatId, TypeId)>> = vec![Vec::new(); n];
    for t in 0..n {
        for fi in 0..nf {
            if !le[intro[fi].idx() * n + t] {
                continue;
            }
            let mut value = TypeId::BOT;
            for &(dt, r) in &declared[fi] {
                if le[dt.idx() * n + t] {
                    value = joins[value.idx() * n + r.idx()].ok_or_else(|| {
                        SignatureError::InconsistentRestriction {
                            feat: feat_names[fi].clone(),
                            ty: b.names[t].clone(),
                        }
                    })?;
                }
            }
            approp[t].push((FeatId(fi as u32), value));
        }
    }
    for (fi, decls) in declared.iter().enumerate() {
        for &(dt, r) in decls {
            let inherited = approp[dt.idx()]
                .iter()
                .find(|&&(g, _)| g.idx() == fi)
                .map(|&(_, v)| v)
                .expect("declared feature is appropriate at its declaring type");
            if inherited != r {
                // the join of all upstream restrictions differs from the
                // local one, so the local one failed to narrow some of them
                let upstream = decls
                    .iter()
                    .find(|&&(u, ur)| u != dt && le[u.idx() * n + dt.idx()] && !le[ur.idx() * n + r.idx()])
                    .map(|&(_, ur)| ur)
                    .unwrap_or(inherited);
                return Err(SignatureError::NotNarrowing {
                    feat: feat_names[fi].clone(),
                    ty: b.names[dt.idx()].clone(),
                    declared: b.names[r.idx()].clone(),
                    inherited: b.names[upstream.idx()].clone(),
                });
            }
        }
    }

    let mut maximal_below = vec![Vec::new(); n];
    for (t, out) in maximal_below.iter_mut().enumerate() {
        let mut seen = vec![false; n];
        collect_maximal(t, &subs, &mut seen, out);
    }

    let finite_mgsat = finite_satisfiers(&approp);

    Ok(Signature {
        type_index: b.index,
        type_names: b.names,
        feat_names,
        feat_index,
        subs,
        le,
        joins,
        meets,
        intro,
        approp,
        maximal_below,
        finite_mgsat,
    })
}

fn desclang_reserved(name: &str) -> bool {
    crate::desclang::is_reserved(name)
}

fn collect_maximal(t: usize, subs: &[Vec<TypeId>], seen: &mut [bool], out: &mut Vec<TypeId>) {
    if seen[t] {
        return;
    }
    seen[t] = true;
    if subs[t].is_empty() {
        out.push(TypeId(t as u32));
    }
    for s in &subs[t] {
        collect_maximal(s.idx(), subs, seen, out);
    }
}

fn check_acyclic(subs: &[Vec<TypeId>], names: &[String]) -> Result<(), SignatureError> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        New,
        Active,
        Done,
    }
    fn visit(t: usize, subs: &[Vec<TypeId>], marks: &mut [Mark], path: &mut Vec<usize>) -> Option<Vec<usize>> {
        match marks[t] {
            Mark::Done => return None,
            Mark::Active => {
                let start = path.iter().position(|&p| p == t).unwrap_or(0);
                let mut cycle = path[start..].to_vec();
                cycle.push(t);
                return Some(cycle);
            }
            Mark::New => {}
        }
        marks[t] = Mark::Active;
        path.push(t);
        for s in &subs[t] {
            if let Some(c) = visit(s.idx(), subs, marks, path) {
                return Some(c);
            }
        }
        path.pop();
        marks[t] = Mark::Done;
        None
    }
    let mut marks = vec![Mark::New; subs.len()];
    for t in 0..subs.len() {
        if let Some(cycle) = visit(t, subs, &mut marks, &mut Vec::new()) {
            return Err(SignatureError::Cycle(cycle.into_iter().map(|i| names[i].clone()).collect()));
        }
    }
    Ok(())
}

/// A type's most general satisfier is infinite iff an appropriateness
/// chain from it revisits a type.
fn finite_satisfiers(approp: &[Vec<(FeatId, TypeId)>]) -> Vec<bool> {
    #[derive(Clone, Copy, PartialEq)]
    enum State {
        Unknown,
        Visiting,
        Finite,
        Infinite,
    }
    fn visit(t: usize, approp: &[Vec<(FeatId, TypeId)>], st: &mut [State]) -> bool {
        match st[t] {
            State::Finite => return true,
            State::Infinite | State::Visiting => return false,
            State::Unknown => {}
        }
        st[t] = State::Visiting;
        let ok = approp[t].iter().all(|&(_, r)| visit(r.idx(), approp, st));
        st[t] = if ok { State::Finite } else { State::Infinite };
        ok
    }
    let mut st = vec![State::Unknown; approp.len()];
    (0..approp.len()).map(|t| visit(t, approp, &mut st)).collect()
}

#[cfg(test)]
pub(crate) mod fixtures {
    pub const SIG_A: &str = "\
bot sub [a, polarity].
polarity sub [plus, minus].
a sub [b, c] intro [f:polarity, g:polarity].
b intro [f:plus, g:minus].
c intro [f:minus, g:plus].
";

    pub const SIG_B: &str = "\
sign intro [synsem:syntax_semantics].
syntax_semantics intro [loc:local].
local intro [cat:category].
category intro [head:head, marking:marking].
head sub [verb].
verb intro [vform:vform].
vform sub [bse].
marking sub [fin, unmarked].
";
}
