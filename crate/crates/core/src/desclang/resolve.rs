//! Name resolution of descriptions against a signature.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::Description;
use crate::signature::{FeatId, Signature, TypeId};

/// Index of a variable (or compiler-generated slot) within one scope.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Slot(pub u32);

impl fmt::Display for Slot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "${}", self.0)
    }
}

/// A description whose types, features and variables are resolved.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Desc {
    Var(Slot),
    Type(TypeId),
    Feat(FeatId, Box<Desc>),
    And(Box<Desc>, Box<Desc>),
    Or(Box<Desc>, Box<Desc>),
}

impl Desc {
    pub fn is_disjunctive(&self) -> bool {
        match self {
            Desc::Var(_) | Desc::Type(_) => false,
            Desc::Feat(_, d) => d.is_disjunctive(),
            Desc::And(a, b) => a.is_disjunctive() || b.is_disjunctive(),
            Desc::Or(..) => true,
        }
    }

    /// Slots in first-occurrence order.
    pub fn slots(&self) -> Vec<Slot> {
        fn walk(d: &Desc, out: &mut Vec<Slot>) {
            match d {
                Desc::Var(s) => {
                    if !out.contains(s) {
                        out.push(*s);
                    }
                }
                Desc::Type(_) => {}
                Desc::Feat(_, d) => walk(d, out),
                Desc::And(a, b) | Desc::Or(a, b) => {
                    walk(a, out);
                    walk(b, out);
                }
            }
        }
        let mut out = Vec::new();
        walk(self, &mut out);
        out
    }

    /// Disjunctive normal form: a list of disjunction-free descriptions
    /// whose disjunction is equivalent to `self`, left disjuncts first.
    pub fn disjuncts(&self) -> Vec<Desc> {
        match self {
            Desc::Var(_) | Desc::Type(_) => vec![self.clone()],
            Desc::Feat(f, d) => d.disjuncts().into_iter().map(|x| Desc::Feat(*f, Box::new(x))).collect(),
            Desc::And(a, b) => {
                let right = b.disjuncts();
                let mut out = Vec::new();
                for x in a.disjuncts() {
                    for y in &right {
                        out.push(Desc::And(Box::new(x.clone()), Box::new(y.clone())));
                    }
                }
                out
            }
            Desc::Or(a, b) => {
                let mut out = a.disjuncts();
                out.extend(b.disjuncts());
                out
            }
        }
    }

    /// Converts back to surface syntax using the signature's names and the
    /// scope's variable names.
    pub fn to_description(&self, sig: &Signature, scope: &Scope) -> Description {
        match self {
            Desc::Var(s) => Description::Var(scope.name(*s)),
            Desc::Type(t) => Description::Type(sig.type_name(*t).to_string()),
            Desc::Feat(f, d) => Description::feat(sig.feat_name(*f), d.to_description(sig, scope)),
            Desc::And(a, b) => Description::and(a.to_description(sig, scope), b.to_description(sig, scope)),
            Desc::Or(a, b) => Description::or(a.to_description(sig, scope), b.to_description(sig, scope)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ResolveError {
    #[error("unknown type `{0}`")]
    UnknownType(String),
    #[error("unknown feature `{0}`")]
    UnknownFeature(String),
}

/// Variable names of one clause, principle or query.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Scope {
    names: Vec<Option<String>>,
    #[serde(skip)]
    index: HashMap<String, Slot>,
}

impl Scope {
    pub fn new() -> Self {
        Scope::default()
    }

    /// The slot for a named variable, allocating on first use.
    pub fn slot(&mut self, name: &str) -> Slot {
        if self.index.is_empty() && !self.names.is_empty() {
            self.reindex();
        }
        if let Some(&s) = self.index.get(name) {
            return s;
        }
        let s = Slot(self.names.len() as u32);
        self.names.push(Some(name.to_string()));
        self.index.insert(name.to_string(), s);
        s
    }

    pub fn lookup(&self, name: &str) -> Option<Slot> {
        self.names
            .iter()
            .position(|n| n.as_deref() == Some(name))
            .map(|i| Slot(i as u32))
    }

    /// An anonymous slot.
    pub fn fresh(&mut self) -> Slot {
        let s = Slot(self.names.len() as u32);
        self.names.push(None);
        s
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, s: Slot) -> String {
        match self.names.get(s.0 as usize) {
            Some(Some(n)) => n.clone(),
            _ => s.to_string(),
        }
    }

    pub fn named(&self) -> impl Iterator<Item = (Slot, &str)> {
        self.names
            .iter()
            .enumerate()
            .filter_map(|(i, n)| n.as_deref().map(|n| (Slot(i as u32), n)))
    }

    fn reindex(&mut self) {
        self.index = self
            .names
            .iter()
            .enumerate()
            .filter_map(|(i, n)| n.clone().map(|n| (n, Slot(i as u32))))
            .collect();
    }
}

pub fn resolve(sig: &Signature, d: &Description, scope: &mut Scope) -> Result<Desc, ResolveError> {
    Ok(match d {
        Description::Var(v) => Desc::Var(scope.slot(v)),
        Description::Type(t) => Desc::Type(sig.type_id(t).ok_or_else(|| ResolveError::UnknownType(t.clone()))?),
        Description::Feat(f, v) => Desc::Feat(
            sig.feat_id(f).ok_or_else(|| ResolveError::UnknownFeature(f.clone()))?,
            Box::new(resolve(sig, v, scope)?),
        ),
        Description::And(a, b) => {
            let a = resolve(sig, a, scope)?;
            Desc::And(Box::new(a), Box::new(resolve(sig, b, scope)?))
        }
        Description::Or(a, b) => {
            let a = resolve(sig, a, scope)?;
            Desc::Or(Box::new(a), Box::new(resolve(sig, b, scope)?))
        }
    })
}

/// Display wrapper printing a resolved description in surface syntax.
pub struct DescDisplay<'a> {
    pub desc: &'a Desc,
    pub sig: &'a Signature,
    pub scope: &'a Scope,
}

impl fmt::Display for DescDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.desc.to_description(self.sig, self.scope))
    }
}
