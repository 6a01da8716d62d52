//! Subtype-covering rules generated from the derangement report.

use serde::{Deserialize, Serialize};

use crate::signature::{DerangementReport, FeatId, Signature, TypeId};
use crate::tfs::{encode, FeatureStructure, Heap};

/// The rules guarding one deranged type.
///
/// A suspension for `ty` is dismissed when its node's type changes, or when
/// one of `products` subsumes the node's feature values. Otherwise it counts
/// the maximal subtypes still consistent with the node: none fails, one
/// extends the node deterministically, several keep it suspended.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverRule {
    pub ty: TypeId,
    pub features: Vec<FeatId>,
    pub products: Vec<Vec<TypeId>>,
    /// Maximal subtypes with the index of their product.
    pub carriers: Vec<(TypeId, usize)>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubtypeCoverRules {
    pub rules: Vec<CoverRule>,
}

impl SubtypeCoverRules {
    pub fn rule_for(&self, t: TypeId) -> Option<&CoverRule> {
        self.rules.iter().find(|r| r.ty == t)
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn dump(&self, sig: &Signature) -> String {
        let mut out = String::new();
        for r in &self.rules {
            let name = sig.type_name(r.ty);
            out.push_str(&format!("subtype_cover({name})\n"));
            out.push_str(&format!("  dismiss: type != {name}\n"));
            for i in 0..r.products.len() {
                out.push_str(&format!("  dismiss: {}\n", r.pattern_term(sig, i)));
            }
            let subs: Vec<&str> = r.carriers.iter().map(|&(m, _)| sig.type_name(m)).collect();
            out.push_str(&format!("  count: {}\n", subs.join(", ")));
        }
        out
    }
}

impl CoverRule {
    /// The structure of type `ty` whose values are the most general
    /// satisfiers of product `i`.
    pub fn pattern(&self, sig: &Signature, i: usize) -> FeatureStructure {
        let mut heap = Heap::new(sig);
        let root = heap.fresh(self.ty).expect("deranged types have finite satisfiers");
        for (&f, &t) in self.features.iter().zip(&self.products[i]) {
            let v = heap.arc(root, f).expect("feature appropriate at deranged type");
            assert!(heap.promote(v, t), "product values are consistent with restrictions");
        }
        heap.export(root)
    }

    pub fn pattern_term(&self, sig: &Signature, i: usize) -> String {
        encode(sig, &self.pattern(sig, i)).to_string()
    }
}

pub fn compile_subtype_cover(report: &DerangementReport) -> SubtypeCoverRules {
    SubtypeCoverRules {
        rules: report
            .deranged
            .iter()
            .map(|d| CoverRule {
                ty: d.ty,
                features: d.features.clone(),
                products: d.products.clone(),
                carriers: d.carriers.clone(),
            })
            .collect(),
    }
}
