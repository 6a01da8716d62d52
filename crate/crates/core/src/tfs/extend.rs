//! Brute-force enumeration of type-maximal extensions.

use std::collections::HashSet;

use super::fs::FeatureStructure;
use super::heap::{Heap, NodeId};
use crate::signature::Signature;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Extensions {
    pub structures: Vec<FeatureStructure>,
    /// Set when the answer limit or the node budget cut the search short.
    pub truncated: bool,
}

/// All pairwise distinct extensions of `fs` in which every node carries a
/// maximally specific type. Only types are refined: no nodes are merged and
/// no inequations are added.
///
/// The search promotes the first non-maximal node (in canonical order) to
/// each of its maximal subtypes in turn. `max_nodes` bounds structure growth
/// for signatures whose value restrictions keep adding nodes.
pub fn maximal_extensions(sig: &Signature, fs: &FeatureStructure, limit: usize, max_nodes: usize) -> Extensions {
    let mut heap = Heap::new(sig);
    let root = heap.import(fs);
    let mut search = Search {
        limit,
        max_nodes,
        seen: HashSet::new(),
        out: Vec::new(),
        truncated: false,
    };
    search.run(&mut heap, root);
    Extensions {
        structures: search.out,
        truncated: search.truncated,
    }
}

struct Search {
    limit: usize,
    max_nodes: usize,
    seen: HashSet<FeatureStructure>,
    out: Vec<FeatureStructure>,
    truncated: bool,
}

impl Search {
    fn run(&mut self, heap: &mut Heap<'_>, root: NodeId) {
        if self.truncated {
            return;
        }
        let sig = heap.signature();
        let (fs, reps) = heap.export_with_map(root);
        if fs.nodes().len() > self.max_nodes {
            self.truncated = true;
            return;
        }
        let Some(i) = fs.nodes().iter().position(|n| !sig.is_maximal(n.ty)) else {
            if self.seen.insert(fs.clone()) {
                if self.out.len() == self.limit {
                    self.truncated = true;
                } else {
                    self.out.push(fs);
                }
            }
            return;
        };
        let node = reps[i];
        for &m in sig.maximal_subtypes(fs.ty(i)) {
            let mark = heap.mark();
            if heap.promote(node, m) {
                self.run(heap, root);
            }
            heap.undo_to(mark);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signature::fixtures::SIG_A;
    use crate::tfs::{parse_avm, print_avm};

    fn exts(sig: &Signature, text: &str) -> Vec<String> {
        let fs = parse_avm(sig, text).unwrap();
        let e = maximal_extensions(sig, &fs, 100, 1000);
        assert!(!e.truncated);
        e.structures.iter().map(|s| print_avm(sig, s)).collect()
    }

    #[test]
    fn signature_a_examples() {
        let sig = Signature::parse(SIG_A).unwrap();
        assert!(exts(&sig, "a[f:#1=polarity, g:#1]").is_empty());
        assert_eq!(exts(&sig, "a[f:plus, g:polarity]"), vec!["b[f:plus, g:minus]"]);
        assert_eq!(
            exts(&sig, "a[f:polarity, g:polarity]"),
            vec!["b[f:plus, g:minus]", "c[f:minus, g:plus]"]
        );
        assert_eq!(exts(&sig, "plus"), vec!["plus"]);
    }

    #[test]
    fn limit_truncates() {
        let sig = Signature::parse(SIG_A).unwrap();
        let fs = parse_avm(&sig, "a").unwrap();
        let e = maximal_extensions(&sig, &fs, 1, 1000);
        assert_eq!(e.structures.len(), 1);
        assert!(e.truncated);
    }
}
