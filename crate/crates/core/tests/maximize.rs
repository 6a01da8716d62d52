mod common;

use common::*;
use featlog::compiler::{compile_subtype_cover, CompiledGrammar};
use featlog::engine::{Engine, QueryConfig};
use featlog::signature::{derangement_analysis, Signature};
use featlog::tfs::maximal_extensions;

#[test]
fn maximize_equals_oracle_when_only_covering_is_pending() {
    let sig = Signature::parse(SIG_A).unwrap();
    let g = CompiledGrammar {
        cover: compile_subtype_cover(&derangement_analysis(&sig)),
        ..CompiledGrammar::default()
    };
    let plain = Engine::new(&sig, &g, QueryConfig::default());
    let maxed = Engine::new(
        &sig,
        &g,
        QueryConfig {
            maximize: true,
            ..QueryConfig::default()
        },
    );
    let mut compared = 0;
    for fs in structures(&sig, 2, true, true) {
        let r = plain.solve_structure(&fs);
        let pending = r.answers.iter().any(|a| !a.residue.is_empty());
        if !pending || !r.answers.iter().all(|a| a.residue.iter().all(|s| s.starts_with("subtype_cover"))) {
            continue;
        }
        compared += 1;
        let mut got: Vec<_> = maxed.solve_structure(&fs).answers.into_iter().map(|a| a.structure).collect();
        let mut want = brute_force_extensions(&sig, &fs);
        got.sort();
        want.sort();
        assert_eq!(got, want, "{fs:?}");
    }
    assert_eq!(compared, 2);
}

#[test]
fn oracles_agree_on_every_small_structure() {
    for text in [SIG_A, SIG_B] {
        let sig = Signature::parse(text).unwrap();
        for fs in structures(&sig, 2, true, true) {
            let grows = fs.nodes().iter().any(|n| {
                sig.maximal_subtypes(n.ty)
                    .iter()
                    .any(|&m| sig.approp_features(m).len() > n.feats.len())
            });
            if grows {
                continue;
            }
            let mut lib = maximal_extensions(&sig, &fs, 1000, 1000).structures;
            let mut brute = brute_force_extensions(&sig, &fs);
            lib.sort();
            brute.sort();
            assert_eq!(lib, brute, "{fs:?}");
        }
    }
}
