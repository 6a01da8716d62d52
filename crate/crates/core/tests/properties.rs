mod common;

use common::*;
use featlog::desclang::{parse_description, resolve, Scope};
use featlog::satisfier::{mgsats, satisfies};
use featlog::signature::{Signature, TypeId};
use featlog::tfs::{
    decode, encode, parse_avm, print_avm, structure_from_json, structure_to_json, EncodedTerm, FeatureStructure,
};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;

fn pick(which: bool) -> (Signature, Vec<FeatureStructure>) {
    let sig = Signature::parse(if which { SIG_A } else { SIG_B }).unwrap();
    let set = structures(&sig, 2, true, true);
    (sig, set)
}

/// A tree-shaped signature: type `t{i}` has parent `t{parents[i]}` (or bot),
/// and each feature is introduced at a random type with an unrestricted value.
fn tree_signature(parents: &[usize], intros: &[usize]) -> String {
    let mut text = String::new();
    for (i, &p) in parents.iter().enumerate() {
        let parent = if p >= i { "bot".to_string() } else { format!("t{p}") };
        text.push_str(&format!("{parent} sub [t{i}].\n"));
    }
    for (k, &t) in intros.iter().enumerate() {
        text.push_str(&format!("t{} intro [h{k}:bot].\n", t % parents.len()));
    }
    text
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn avm_text_round_trips(which: bool, i in 0usize..1000) {
        let (sig, set) = pick(which);
        let fs = &set[i % set.len()];
        let text = print_avm(&sig, fs);
        prop_assert_eq!(&parse_avm(&sig, &text).unwrap(), fs, "{}", text);
    }

    #[test]
    fn json_round_trips(which: bool, i in 0usize..1000) {
        let (sig, set) = pick(which);
        let fs = &set[i % set.len()];
        let v = structure_to_json(&sig, fs);
        prop_assert_eq!(&structure_from_json(&sig, &v).unwrap(), fs);
    }

    #[test]
    fn term_encoding_round_trips(which: bool, i in 0usize..1000) {
        let (sig, set) = pick(which);
        let plain: Vec<_> = set.into_iter().filter(|s| s.inequations().is_empty()).collect();
        let fs = &plain[i % plain.len()];
        let term = encode(&sig, fs);
        prop_assert_eq!(&decode(&sig, &term).unwrap(), fs, "{}", term);
        let back = EncodedTerm::from_json(&term.to_json()).unwrap();
        prop_assert_eq!(back, term);
    }

    #[test]
    fn description_text_round_trips(which: bool, seed: u64) {
        let sig = Signature::parse(if which { SIG_A } else { SIG_B }).unwrap();
        let d = random_description(&sig, &mut StdRng::seed_from_u64(seed), 5, true);
        prop_assert_eq!(parse_description(&d.to_string()).unwrap(), d);
    }

    #[test]
    fn satisfaction_agrees_with_direct_check(which: bool, seed: u64) {
        let (sig, set) = pick(which);
        let d = random_description(&sig, &mut StdRng::seed_from_u64(seed), 4, true);
        let resolved = resolve(&sig, &d, &mut Scope::new()).unwrap();
        for m in mgsats(&sig, &resolved).unwrap() {
            prop_assert!(direct_satisfies(&sig, &m, &d), "{} by {:?}", d, m);
        }
        for fs in &set {
            prop_assert_eq!(satisfies(&sig, fs, &resolved).unwrap(), direct_satisfies(&sig, fs, &d), "{} on {:?}", d, fs);
        }
    }

    #[test]
    fn unification_is_idempotent_and_commutative(which: bool, i in 0usize..1000, j in 0usize..1000) {
        let (sig, set) = pick(which);
        let f = &set[i % set.len()];
        let g = &set[j % set.len()];
        prop_assert_eq!(f.unify(&sig, f), Some(f.clone()));
        prop_assert_eq!(f.unify(&sig, g), g.unify(&sig, f));
    }

    #[test]
    fn subsumption_is_unification_absorption(which: bool, i in 0usize..1000, j in 0usize..1000) {
        let (sig, set) = pick(which);
        let f = &set[i % set.len()];
        let g = &set[j % set.len()];
        prop_assert_eq!(f.subsumes(&sig, g), f.unify(&sig, g).as_ref() == Some(g));
    }

    #[test]
    fn tree_signatures_form_lattices(
        parents in prop::collection::vec(0usize..12, 1..12),
        intros in prop::collection::vec(0usize..12, 0..4),
    ) {
        let sig = Signature::parse(&tree_signature(&parents, &intros)).unwrap();
        let types: Vec<TypeId> = sig.types().collect();
        for &x in &types {
            prop_assert!(sig.subsumes(TypeId::BOT, x));
            for &y in &types {
                let m = sig.meet(x, y);
                prop_assert!(sig.subsumes(m, x) && sig.subsumes(m, y));
                prop_assert_eq!(sig.join(x, y), sig.join(y, x));
                let comparable = sig.subsumes(x, y) || sig.subsumes(y, x);
                prop_assert_eq!(sig.join(x, y).is_some(), comparable);
                if sig.subsumes(x, y) && sig.subsumes(y, x) {
                    prop_assert_eq!(x, y);
                }
            }
        }
        for f in sig.features() {
            let t = sig.intro(f);
            for &s in &types {
                prop_assert_eq!(sig.approp(s, f).is_some(), sig.subsumes(t, s));
            }
        }
    }
}
