//! Frozen feature structures.

use std::collections::{HashMap, VecDeque};

use super::heap::Heap;
use super::TfsError;
use crate::signature::{FeatId, Signature, TypeId};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FsNode {
    pub ty: TypeId,
    /// Feature arcs sorted by feature, pointing at node indices.
    pub feats: Vec<(FeatId, usize)>,
}

/// An immutable rooted feature structure. Node 0 is the root.
///
/// Structures built by [`Heap::export`] are canonical: nodes are numbered in
/// depth-first preorder along features in canonical order, so two canonical
/// structures are equal exactly when they are isomorphic.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FeatureStructure {
    nodes: Vec<FsNode>,
    ineqs: Vec<(usize, usize)>,
}

impl FeatureStructure {
    pub(crate) fn from_parts(nodes: Vec<FsNode>, mut ineqs: Vec<(usize, usize)>) -> Self {
        for p in ineqs.iter_mut() {
            if p.0 > p.1 {
                *p = (p.1, p.0);
            }
        }
        ineqs.sort_unstable();
        ineqs.dedup();
        FeatureStructure { nodes, ineqs }
    }

    /// Builds a structure from raw parts and canonicalizes it.
    pub fn new(nodes: Vec<FsNode>, ineqs: Vec<(usize, usize)>) -> Self {
        FeatureStructure::from_parts(nodes, ineqs).canonical()
    }

    /// The most general satisfier of a type.
    pub fn mgsat(sig: &Signature, t: TypeId) -> Result<Self, TfsError> {
        let mut h = Heap::new(sig);
        let n = h.fresh(t)?;
        Ok(h.export(n))
    }

    pub fn nodes(&self) -> &[FsNode] {
        &self.nodes
    }

    pub fn inequations(&self) -> &[(usize, usize)] {
        &self.ineqs
    }

    pub fn root_type(&self) -> TypeId {
        self.nodes[0].ty
    }

    pub fn ty(&self, n: usize) -> TypeId {
        self.nodes[n].ty
    }

    pub fn arc(&self, n: usize, f: FeatId) -> Option<usize> {
        let feats = &self.nodes[n].feats;
        feats.binary_search_by_key(&f, |&(g, _)| g).ok().map(|i| feats[i].1)
    }

    /// Follows a path of features from the root.
    pub fn path(&self, feats: &[FeatId]) -> Option<usize> {
        feats.iter().try_fold(0, |n, &f| self.arc(n, f))
    }

    /// Renumbers nodes in canonical order, dropping unreachable ones.
    pub fn canonical(&self) -> Self {
        let mut order = Vec::new();
        let mut index: HashMap<usize, usize> = HashMap::new();
        let mut stack = vec![0usize];
        while let Some(n) = stack.pop() {
            if index.contains_key(&n) {
                continue;
            }
            index.insert(n, order.len());
            order.push(n);
            for &(_, v) in self.nodes[n].feats.iter().rev() {
                if !index.contains_key(&v) {
                    stack.push(v);
                }
            }
        }
        let nodes = order
            .iter()
            .map(|&n| {
                let mut feats: Vec<(FeatId, usize)> = self.nodes[n].feats.iter().map(|&(f, v)| (f, index[&v])).collect();
                feats.sort_unstable();
                FsNode { ty: self.nodes[n].ty, feats }
            })
            .collect();
        let ineqs = self
            .ineqs
            .iter()
            .filter_map(|&(a, b)| Some((*index.get(&a)?, *index.get(&b)?)))
            .collect();
        FeatureStructure::from_parts(nodes, ineqs)
    }

    /// Whether some node is reached by more than one arc (or is the root
    /// and reached by any arc).
    pub fn shared_nodes(&self) -> Vec<bool> {
        let mut indeg = vec![0usize; self.nodes.len()];
        indeg[0] = 1;
        for n in &self.nodes {
            for &(_, v) in &n.feats {
                indeg[v] += 1;
            }
        }
        let mut shared: Vec<bool> = indeg.iter().map(|&d| d > 1).collect();
        for &(a, b) in &self.ineqs {
            shared[a] = true;
            shared[b] = true;
        }
        shared
    }

    pub fn is_type_maximal(&self, sig: &Signature) -> bool {
        self.nodes.iter().all(|n| sig.is_maximal(n.ty))
    }

    /// Total well-typedness: every node carries exactly its appropriate
    /// features and every value is at least as specific as its restriction.
    pub fn check_well_typed(&self, sig: &Signature) -> Result<(), String> {
        for (i, n) in self.nodes.iter().enumerate() {
            let approp = sig.approp_features(n.ty);
            if approp.len() != n.feats.len() {
                return Err(format!("node {i} of type {} has the wrong feature set", sig.type_name(n.ty)));
            }
            for (&(f, r), &(g, v)) in approp.iter().zip(&n.feats) {
                if f != g {
                    return Err(format!("node {i}: feature {} missing", sig.feat_name(f)));
                }
                if !sig.subsumes(r, self.nodes[v].ty) {
                    return Err(format!(
                        "node {i}: value of {} has type {}, not below {}",
                        sig.feat_name(f),
                        sig.type_name(self.nodes[v].ty),
                        sig.type_name(r)
                    ));
                }
            }
        }
        for &(a, b) in &self.ineqs {
            if a == b {
                return Err(format!("node {a} is inequated with itself"));
            }
        }
        Ok(())
    }

    /// `self ⊑ other`: there is a mapping from this structure's nodes into
    /// `other`'s that preserves the root, features, re-entrancies and
    /// inequations, and never makes a type more general.
    pub fn subsumes(&self, sig: &Signature, other: &FeatureStructure) -> bool {
        let mut map: Vec<Option<usize>> = vec![None; self.nodes.len()];
        let mut queue = VecDeque::from([(0usize, 0usize)]);
        while let Some((g, s)) = queue.pop_front() {
            match map[g] {
                Some(prev) if prev == s => continue,
                Some(_) => return false,
                None => map[g] = Some(s),
            }
            if !sig.subsumes(self.nodes[g].ty, other.nodes[s].ty) {
                return false;
            }
            for &(f, gv) in &self.nodes[g].feats {
                let Some(sv) = other.arc(s, f) else {
                    return false;
                };
                queue.push_back((gv, sv));
            }
        }
        self.ineqs.iter().all(|&(a, b)| match (map[a], map[b]) {
            (Some(x), Some(y)) => {
                let key = if x <= y { (x, y) } else { (y, x) };
                x != y && other.ineqs.binary_search(&key).is_ok()
            }
            _ => false,
        })
    }

    /// Mutual subsumption.
    pub fn equivalent(&self, sig: &Signature, other: &FeatureStructure) -> bool {
        self.subsumes(sig, other) && other.subsumes(sig, self)
    }

    /// Unification of two frozen structures; `None` when inconsistent.
    pub fn unify(&self, sig: &Signature, other: &FeatureStructure) -> Option<FeatureStructure> {
        let mut h = Heap::new(sig);
        let a = h.import(self);
        let b = h.import(other);
        h.unify(a, b).then(|| h.export(a))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signature::fixtures::{SIG_A, SIG_B};
    use crate::tfs::parse_avm;

    #[test]
    fn mgsat_examples() {
        let sig = Signature::parse(SIG_A).unwrap();
        let plus = FeatureStructure::mgsat(&sig, sig.type_id("plus").unwrap()).unwrap();
        assert_eq!(plus.nodes().len(), 1);
        let a = FeatureStructure::mgsat(&sig, sig.type_id("a").unwrap()).unwrap();
        assert_eq!(a, parse_avm(&sig, "a[f:polarity, g:polarity]").unwrap());

        let sig = Signature::parse(SIG_B).unwrap();
        let sign = FeatureStructure::mgsat(&sig, sig.type_id("sign").unwrap()).unwrap();
        let path: Vec<_> = ["synsem", "loc"].iter().map(|f| sig.feat_id(f).unwrap()).collect();
        assert_eq!(sig.type_name(sign.ty(sign.path(&path).unwrap())), "local");
    }

    #[test]
    fn infinite_satisfier_rejected() {
        let sig = Signature::parse("bot sub [t].\nt intro [next:t].").unwrap();
        let err = FeatureStructure::mgsat(&sig, sig.type_id("t").unwrap()).unwrap_err();
        assert!(matches!(err, TfsError::InfiniteSatisfier(_)));
    }

    #[test]
    fn subsumption_examples() {
        let sig = Signature::parse(SIG_A).unwrap();
        let p = |s: &str| parse_avm(&sig, s).unwrap();
        assert!(p("a[f:polarity, g:polarity]").subsumes(&sig, &p("a[f:plus, g:minus]")));
        assert!(!p("a[f:#1=polarity, g:#1]").subsumes(&sig, &p("a[f:plus, g:plus]")));
        assert!(p("a[f:plus, g:plus]").subsumes(&sig, &p("a[f:#1=plus, g:#1]")));
        assert!(!p("a[f:#1=plus, g:#1]").subsumes(&sig, &p("a[f:plus, g:plus]")));
        assert!(p("a[f:polarity, g:polarity]").subsumes(&sig, &p("a[f:#1, g:#2] /\\ #1 =\\= #2")));
        assert!(!p("a[f:#1, g:#2] /\\ #1 =\\= #2").subsumes(&sig, &p("a[f:polarity, g:polarity]")));
    }

    #[test]
    fn unification_of_frozen_structures() {
        let sig = Signature::parse(SIG_A).unwrap();
        let p = |s: &str| parse_avm(&sig, s).unwrap();
        let u = p("a[f:plus, g:polarity]").unify(&sig, &p("a[f:polarity, g:minus]")).unwrap();
        assert_eq!(u, p("a[f:plus, g:minus]"));
        assert!(p("plus").unify(&sig, &p("minus")).is_none());
    }
}
