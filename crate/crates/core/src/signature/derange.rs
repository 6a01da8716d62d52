use std::collections::HashMap;

use super::{FeatId, Signature, TypeId};

/// A non-maximal type some of whose well-typed structures have no
/// maximally specific extension.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DerangedType {
    pub ty: TypeId,
    /// Features appropriate at `ty`, in canonical order.
    pub features: Vec<FeatId>,
    /// Distinct value-type products of the maximal subtypes of `ty`,
    /// restricted to `features`.
    pub products: Vec<Vec<TypeId>>,
    /// Each maximal subtype with the index of its product.
    pub carriers: Vec<(TypeId, usize)>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DerangementReport {
    pub deranged: Vec<DerangedType>,
    index: HashMap<TypeId, usize>,
}

impl DerangementReport {
    pub fn get(&self, t: TypeId) -> Option<&DerangedType> {
        self.index.get(&t).map(|&i| &self.deranged[i])
    }

    pub fn is_deranged(&self, t: TypeId) -> bool {
        self.index.contains_key(&t)
    }

    pub fn is_empty(&self) -> bool {
        self.deranged.is_empty()
    }
}

/// Finds deranged types by checking, for every non-maximal type, whether
/// the products of its maximal subtypes' value restrictions cover every
/// combination of maximal values its own restrictions admit.
pub fn derangement_analysis(sig: &Signature) -> DerangementReport {
    let mut report = DerangementReport::default();
    for t in sig.types() {
        if sig.is_maximal(t) || sig.approp_features(t).is_empty() {
            continue;
        }
        let features: Vec<FeatId> = sig.approp_features(t).iter().map(|&(f, _)| f).collect();
        let mut products: Vec<Vec<TypeId>> = Vec::new();
        let mut carriers = Vec::new();
        for &m in sig.maximal_subtypes(t) {
            let product: Vec<TypeId> = features
                .iter()
                .map(|&f| sig.approp(m, f).expect("appropriateness is upward closed"))
                .collect();
            let idx = match products.iter().position(|p| *p == product) {
                Some(i) => i,
                None => {
                    products.push(product);
                    products.len() - 1
                }
            };
            carriers.push((m, idx));
        }
        let choices: Vec<&[TypeId]> = sig
            .approp_features(t)
            .iter()
            .map(|&(_, r)| sig.maximal_subtypes(r))
            .collect();
        let covered = |tuple: &[TypeId]| {
            products
                .iter()
                .any(|p| p.iter().zip(tuple).all(|(&pf, &vf)| sig.subsumes(pf, vf)))
        };
        if !all_tuples(&choices, &mut Vec::new(), &covered) {
            report.index.insert(t, report.deranged.len());
            report.deranged.push(DerangedType {
                ty: t,
                features,
                products,
                carriers,
            });
        }
    }
    report
}

fn all_tuples(choices: &[&[TypeId]], prefix: &mut Vec<TypeId>, pred: &dyn Fn(&[TypeId]) -> bool) -> bool {
    if prefix.len() == choices.len() {
        return pred(prefix);
    }
    for &c in choices[prefix.len()] {
        prefix.push(c);
        let ok = all_tuples(choices, prefix, pred);
        prefix.pop();
        if !ok {
            return false;
        }
    }
    true
}
