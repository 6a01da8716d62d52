//! Test-side oracles: bounded enumeration of well-typed structures, random
//! descriptions, and a satisfaction checker that works on names directly.
#![allow(dead_code)]

use std::collections::{HashMap, HashSet};

use featlog::desclang::Description;
use featlog::signature::{FeatId, Signature, TypeId};
use featlog::tfs::{FeatureStructure, FsNode, Heap, NodeId};
use rand::rngs::StdRng;
use rand::Rng;

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

pub const FINITENESS: &str = "synsem:loc:cat:(head:verb, marking:fin) ==> synsem:loc:cat:head:vform:bse.";

#[derive(Clone)]
struct Tree {
    ty: TypeId,
    kids: Vec<(FeatId, Tree)>,
}

fn trees(sig: &Signature, restriction: TypeId, depth: usize, max_depth: usize) -> Vec<Tree> {
    let mut out = Vec::new();
    for t in sig.types() {
        if !sig.subsumes(restriction, t) {
            continue;
        }
        let feats = sig.approp_features(t);
        if feats.is_empty() {
            out.push(Tree { ty: t, kids: Vec::new() });
            continue;
        }
        if depth == max_depth {
            continue;
        }
        let mut partial: Vec<Vec<(FeatId, Tree)>> = vec![Vec::new()];
        for &(f, r) in feats {
            let values = trees(sig, r, depth + 1, max_depth);
            let mut next = Vec::new();
            for p in &partial {
                for v in &values {
                    let mut q = p.clone();
                    q.push((f, v.clone()));
                    next.push(q);
                }
            }
            partial = next;
        }
        out.extend(partial.into_iter().map(|kids| Tree { ty: t, kids }));
    }
    out
}

fn flatten(t: &Tree, nodes: &mut Vec<FsNode>) -> usize {
    let me = nodes.len();
    nodes.push(FsNode { ty: t.ty, feats: Vec::new() });
    let mut feats = Vec::new();
    for (f, k) in &t.kids {
        feats.push((*f, flatten(k, nodes)));
    }
    nodes[me].feats = feats;
    me
}

/// Set partitions of `items`, each as a list of blocks.
fn partitions(items: &[usize]) -> Vec<Vec<Vec<usize>>> {
    let Some((&first, rest)) = items.split_first() else {
        return vec![Vec::new()];
    };
    let mut out = Vec::new();
    for p in partitions(rest) {
        for i in 0..p.len() {
            let mut q = p.clone();
            q[i].insert(0, first);
            out.push(q);
        }
        let mut q = p;
        q.insert(0, vec![first]);
        out.push(q);
    }
    out
}

/// Every totally well-typed structure of depth at most `max_depth`, plus
/// the variants obtained by merging sibling values at the root and, when
/// `ineqs` is set, by adding an inequation between two distinct root
/// values. Deduplicated up to isomorphism.
pub fn structures(sig: &Signature, max_depth: usize, reentrant: bool, ineqs: bool) -> Vec<FeatureStructure> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    let mut push = |fs: FeatureStructure, out: &mut Vec<FeatureStructure>| {
        if seen.insert(fs.clone()) {
            out.push(fs);
        }
    };
    for t in trees(sig, TypeId::BOT, 0, max_depth) {
        let mut nodes = Vec::new();
        flatten(&t, &mut nodes);
        let base = FeatureStructure::new(nodes, Vec::new());
        let mut variants = vec![base.clone()];
        if reentrant && base.nodes()[0].feats.len() > 1 {
            let kids: Vec<usize> = (0..base.nodes()[0].feats.len()).collect();
            for p in partitions(&kids) {
                if p.iter().all(|b| b.len() == 1) {
                    continue;
                }
                let mut heap = Heap::new(sig);
                let root = heap.import(&base);
                let values: Vec<NodeId> = heap.arcs(root).iter().map(|&(_, v)| v).collect();
                let ok = p
                    .iter()
                    .all(|block| block.windows(2).all(|w| heap.unify(values[w[0]], values[w[1]])));
                if ok {
                    variants.push(heap.export(root));
                }
            }
        }
        for v in variants {
            if ineqs {
                let vals: Vec<usize> = v.nodes()[0].feats.iter().map(|&(_, n)| n).collect();
                if let Some((i, j)) = first_distinct_pair(&vals) {
                    push(FeatureStructure::new(v.nodes().to_vec(), vec![(i, j)]), &mut out);
                }
            }
            push(v, &mut out);
        }
    }
    out
}

fn first_distinct_pair(vals: &[usize]) -> Option<(usize, usize)> {
    for (k, &a) in vals.iter().enumerate() {
        for &b in &vals[k + 1..] {
            if a != b {
                return Some((a, b));
            }
        }
    }
    None
}

/// Satisfaction of a name-level description at node `n`, returning every
/// consistent variable assignment.
fn sat(sig: &Signature, fs: &FeatureStructure, n: usize, d: &Description, env: HashMap<String, usize>) -> Vec<HashMap<String, usize>> {
    match d {
        Description::Type(t) => {
            let t = sig.type_id(t).expect("known type");
            if sig.subsumes(t, fs.ty(n)) {
                vec![env]
            } else {
                Vec::new()
            }
        }
        Description::Var(x) => match env.get(x) {
            Some(&m) if m != n => Vec::new(),
            Some(_) => vec![env],
            None => {
                let mut env = env;
                env.insert(x.clone(), n);
                vec![env]
            }
        },
        Description::Feat(f, v) => {
            let f = sig.feat_id(f).expect("known feature");
            match fs.arc(n, f) {
                Some(m) => sat(sig, fs, m, v, env),
                None => Vec::new(),
            }
        }
        Description::And(a, b) => sat(sig, fs, n, a, env)
            .into_iter()
            .flat_map(|e| sat(sig, fs, n, b, e))
            .collect(),
        Description::Or(a, b) => {
            let mut out = sat(sig, fs, n, a, env.clone());
            out.extend(sat(sig, fs, n, b, env));
            out
        }
    }
}

pub fn direct_satisfies(sig: &Signature, fs: &FeatureStructure, d: &Description) -> bool {
    !sat(sig, fs, 0, d, HashMap::new()).is_empty()
}

/// A random description of AST depth at most `depth`.
pub fn random_description(sig: &Signature, rng: &mut StdRng, depth: usize, vars: bool) -> Description {
    let types: Vec<TypeId> = sig.types().collect();
    let feats: Vec<FeatId> = sig.features().collect();
    let atom = |rng: &mut StdRng| {
        if vars && rng.gen_bool(0.15) {
            Description::var(["X", "Y"][rng.gen_range(0..2)])
        } else {
            Description::ty(sig.type_name(types[rng.gen_range(0..types.len())]))
        }
    };
    if depth <= 1 || rng.gen_bool(0.25) {
        return atom(rng);
    }
    match rng.gen_range(0..4) {
        0 | 1 if !feats.is_empty() => {
            let f = feats[rng.gen_range(0..feats.len())];
            Description::feat(sig.feat_name(f), random_description(sig, rng, depth - 1, vars))
        }
        0..=2 => Description::and(
            random_description(sig, rng, depth - 1, vars),
            random_description(sig, rng, depth - 1, vars),
        ),
        _ => Description::or(
            random_description(sig, rng, depth - 1, vars),
            random_description(sig, rng, depth - 1, vars),
        ),
    }
}

/// All descriptions of depth at most two, followed by distinct random
/// descriptions of depth three and four, up to `cap` in total.
pub fn descriptions(sig: &Signature, rng: &mut StdRng, cap: usize) -> Vec<Description> {
    let mut atoms: Vec<Description> = sig.types().map(|t| Description::ty(sig.type_name(t))).collect();
    atoms.push(Description::var("X"));
    atoms.push(Description::var("Y"));
    let mut all: Vec<Description> = atoms.clone();
    for f in sig.features() {
        for a in &atoms {
            all.push(Description::feat(sig.feat_name(f), a.clone()));
        }
    }
    for a in &atoms {
        for b in &atoms {
            all.push(Description::and(a.clone(), b.clone()));
            all.push(Description::or(a.clone(), b.clone()));
        }
    }
    all.truncate(cap);
    let mut seen: HashSet<Description> = all.iter().cloned().collect();
    let mut attempts = 0;
    while all.len() < cap && attempts < cap * 20 {
        attempts += 1;
        let depth = rng.gen_range(3..=4);
        let d = random_description(sig, rng, depth, true);
        if d.depth() >= 3 && seen.insert(d.clone()) {
            all.push(d);
        }
    }
    all
}

/// Type-maximal extensions by brute force: every assignment of a maximal
/// subtype to every node that passes the well-typedness check. Only valid
/// for signatures whose maximal types add no features.
pub fn brute_force_extensions(sig: &Signature, fs: &FeatureStructure) -> Vec<FeatureStructure> {
    let choices: Vec<Vec<TypeId>> = fs.nodes().iter().map(|n| sig.maximal_subtypes(n.ty).to_vec()).collect();
    let mut out: Vec<FeatureStructure> = Vec::new();
    let mut pick = vec![0usize; choices.len()];
    loop {
        let nodes: Vec<FsNode> = fs
            .nodes()
            .iter()
            .zip(&pick)
            .enumerate()
            .map(|(i, (n, &k))| FsNode {
                ty: choices[i][k],
                feats: n.feats.clone(),
            })
            .collect();
        let cand = FeatureStructure::new(nodes, fs.inequations().to_vec());
        if cand.check_well_typed(sig).is_ok() && !out.contains(&cand) {
            out.push(cand);
        }
        let mut i = 0;
        loop {
            if i == pick.len() {
                return out;
            }
            pick[i] += 1;
            if pick[i] < choices[i].len() {
                break;
            }
            pick[i] = 0;
            i += 1;
        }
    }
}
