use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use featlog::signature::Signature;
use featlog::tfs::{parse_avm, structure_from_json};
use tempfile::TempDir;

const SIG_A: &str = "\
bot sub [a, polarity].
polarity sub [plus, minus].
a sub [b, c] intro [f:polarity, g:polarity].
b intro [f:plus, g:minus].
c intro [f:minus, g:plus].
";

const SIG_B: &str = "\
sign intro [synsem:syntax_semantics].
syntax_semantics intro [loc:local].
local intro [cat:category].
category intro [head:head, marking:marking].
head sub [verb].
verb intro [vform:vform].
vform sub [bse].
marking sub [fin, unmarked].
";

const FINITENESS: &str = "synsem:loc:cat:(head:verb, marking:fin) ==> synsem:loc:cat:head:vform:bse.\n";

struct Fixture {
    dir: TempDir,
}

impl Fixture {
    fn new() -> Self {
        let f = Fixture {
            dir: tempfile::tempdir().unwrap(),
        };
        f.write("a.sig", SIG_A);
        f.write("b.sig", SIG_B);
        f.write("fin.gr", FINITENESS);
        f.write("empty.gr", "");
        f
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn write(&self, name: &str, text: &str) -> PathBuf {
        let p = self.path(name);
        std::fs::write(&p, text).unwrap();
        p
    }

    fn run(&self, args: &[&str]) -> Output {
        Command::new(env!("CARGO_BIN_EXE_featlog"))
            .current_dir(self.dir.path())
            .args(args)
            .output()
            .unwrap()
    }
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn validate_reports_derangement() {
    let f = Fixture::new();
    let o = f.run(&["validate", "--signature", "a.sig"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("deranged: a (2 safe products)"), "{}", stdout(&o));
    assert!(stdout(&o).contains("types: 7"));

    let o = f.run(&["validate", "--signature", "b.sig"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("deranged: none"));
}

#[test]
fn validate_rejects_duplicate_introducers() {
    let f = Fixture::new();
    f.write("dup.sig", "t1 intro [h:bot].\nt2 intro [h:bot].\n");
    let o = f.run(&["validate", "--signature", "dup.sig"]);
    assert_eq!(code(&o), 2);
    assert!(stdout(&o).is_empty());
    assert!(!stderr(&o).is_empty());
}

#[test]
fn compile_dump_lists_the_finiteness_program() {
    let f = Fixture::new();
    let o = f.run(&["compile", "--signature", "b.sig", "--grammar", "fin.gr", "--dump"]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    let body: Vec<&str> = out.lines().skip(1).collect();
    assert_eq!(
        body,
        vec![
            "trigger: sign",
            "farg(synsem, $0, $1)",
            "farg(loc, $1, $2)",
            "farg(cat, $2, $3)",
            "farg(head, $3, $4)",
            "typewhen(verb, $4)",
            "  farg(marking, $3, $5)",
            "  typewhen(fin, $5)",
            "    unify($0, synsem:loc:cat:head:vform:bse)",
        ]
    );
}

#[test]
fn compile_empty_grammar_is_empty() {
    let f = Fixture::new();
    let o = f.run(&["compile", "--signature", "b.sig", "--grammar", "empty.gr", "--dump"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o), "");
}

#[test]
fn compile_rejects_antecedent_variables() {
    let f = Fixture::new();
    f.write("vars.gr", "(sign, X) ==> X.\n");
    let o = f.run(&["compile", "--signature", "b.sig", "--grammar", "vars.gr", "--dump"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("shared/antecedent variables unsupported"), "{}", stderr(&o));
}

#[test]
fn compile_warns_about_dropped_principles() {
    let f = Fixture::new();
    f.write("vacuous.gr", "(plus, minus) ==> a.\n");
    let o = f.run(&["compile", "--signature", "a.sig", "--grammar", "vacuous.gr", "--dump"]);
    assert_eq!(code(&o), 0);
    assert!(stderr(&o).contains("principle dropped"), "{}", stderr(&o));
}

fn cache_json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn compile_writes_a_versioned_cache() {
    let f = Fixture::new();
    let o = f.run(&["compile", "--signature", "b.sig", "--grammar", "fin.gr", "--out", "fin.cache"]);
    assert_eq!(code(&o), 0);
    let v = cache_json(&f.path("fin.cache"));
    assert_eq!(v["version"], 1);
    assert_eq!(v["grammar_sha256"].as_str().unwrap().len(), 64);
    assert_eq!(v["grammar"]["constraints"].as_array().unwrap().len(), 1);

    let o = f.run(&["compile", "--signature", "b.sig", "--grammar", "fin.gr"]);
    assert_eq!(code(&o), 0);
    assert!(f.path("fin.gr.compiled.json").exists());
}

#[test]
fn query_cache_follows_grammar_edits() {
    let f = Fixture::new();
    let q = "synsem:loc:cat:(head:verb, marking:fin)";
    let args = ["query", "--signature", "b.sig", "--grammar", "g.gr", "--cache", "g.cache", q];
    f.write("g.gr", FINITENESS);
    let o = f.run(&args);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("vform:bse"));
    let first = cache_json(&f.path("g.cache"));

    let o = f.run(&args);
    assert!(!stderr(&o).contains("recompiling"), "{}", stderr(&o));

    f.write("g.gr", "");
    let o = f.run(&args);
    assert!(stderr(&o).contains("recompiling"));
    assert!(!stdout(&o).contains("vform:bse"), "{}", stdout(&o));
    assert_ne!(first["grammar_sha256"], cache_json(&f.path("g.cache"))["grammar_sha256"]);
}

#[test]
fn query_finiteness() {
    let f = Fixture::new();
    let o = f.run(&[
        "query",
        "--signature",
        "b.sig",
        "--grammar",
        "fin.gr",
        "synsem:loc:cat:(head:verb, marking:fin)",
    ]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    assert_eq!(out.matches("answer ").count(), 1);
    assert!(out.contains("vform:bse"));
    assert!(out.contains("residue: 0"));
}

#[test]
fn query_without_answers_exits_one() {
    let f = Fixture::new();
    let o = f.run(&["query", "--signature", "a.sig", "f:X, g:X"]);
    assert_eq!(code(&o), 1);
    assert_eq!(stdout(&o), "");
}

#[test]
fn query_maximize_splits_marking() {
    let f = Fixture::new();
    let o = f.run(&[
        "query",
        "--signature",
        "b.sig",
        "--grammar",
        "fin.gr",
        "--maximize",
        "synsem:loc:cat:head:verb",
    ]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    assert_eq!(out.matches("answer ").count(), 2);
    assert!(out.contains("head:verb[vform:bse], marking:fin"));
    assert!(out.contains("marking:unmarked"));
}

#[test]
fn query_json_round_trips() {
    let f = Fixture::new();
    let o = f.run(&[
        "query",
        "--signature",
        "b.sig",
        "--grammar",
        "fin.gr",
        "--json",
        "synsem:loc:cat:head:verb",
    ]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let answers = v.as_array().unwrap();
    assert_eq!(answers.len(), 1);
    assert_eq!(answers[0]["residue"], 1);
    assert_eq!(answers[0]["type"], "sign");
    let sig = Signature::parse(SIG_B).unwrap();
    let back = structure_from_json(&sig, &answers[0]).unwrap();
    let want = parse_avm(&sig, "sign[synsem:syntax_semantics[loc:local[cat:category[head:verb]]]]").unwrap();
    assert_eq!(back, want);
}

#[test]
fn query_json_reports_tags() {
    let f = Fixture::new();
    f.write("l.sig", "bot sub [pair, atom].\npair intro [left:atom, right:atom].\natom sub [p, q].\n");
    let o = f.run(&["query", "--signature", "l.sig", "--json", "left:X, right:X"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v[0]["tags"]["#1"], "left");
    assert_eq!(v[0]["features"]["right"], "#1");
}

#[test]
fn query_trace_goes_to_stderr() {
    let f = Fixture::new();
    let o = f.run(&[
        "query",
        "--signature",
        "b.sig",
        "--grammar",
        "fin.gr",
        "--trace",
        "synsem:loc:cat:(head:verb, marking:fin)",
    ]);
    assert_eq!(code(&o), 0);
    let err = stderr(&o);
    assert!(err.contains("post #0 typewhen(verb)"), "{err}");
    assert!(err.contains("fire #1"));
    assert!(!stdout(&o).contains("post #"));
}

#[test]
fn query_bound_exceeded_exits_three() {
    let f = Fixture::new();
    f.write("l.sig", "bot sub [list].\nlist sub [e_list, ne_list].\nne_list intro [tl:list].\n");
    f.write("loop.gr", "loop(X) if loop(X).\n");
    let o = f.run(&["query", "--signature", "l.sig", "--grammar", "loop.gr", "bot goal loop(X)"]);
    assert_eq!(code(&o), 3);
    assert!(stderr(&o).contains("depth exceeded"));
}

#[test]
fn query_parse_error_exits_two() {
    let f = Fixture::new();
    let o = f.run(&["query", "--signature", "a.sig", "f:(plus"]);
    assert_eq!(code(&o), 2);
    let o = f.run(&["query", "--signature", "a.sig", "nosuchtype"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn oracle_lists_extensions() {
    let f = Fixture::new();
    let o = f.run(&["oracle", "--signature", "a.sig", "a"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o), "extensions: 2\nb[f:plus, g:minus]\nc[f:minus, g:plus]\n");

    let o = f.run(&["oracle", "--signature", "a.sig", "(f:X, g:X)"]);
    assert_eq!(stdout(&o), "extensions: 0\n");

    let o = f.run(&["oracle", "--signature", "a.sig", "plus"]);
    assert_eq!(stdout(&o), "extensions: 1\nplus\n");

    let o = f.run(&["oracle", "--signature", "a.sig", "f:("]);
    assert_eq!(code(&o), 2);
}

#[test]
fn maximize_agrees_with_oracle_under_covering() {
    let f = Fixture::new();
    for d in ["a", "f:plus", "(f:X, g:X)", "g:polarity", "b"] {
        let q = f.run(&["query", "--signature", "a.sig", "--maximize", d]);
        let o = f.run(&["oracle", "--signature", "a.sig", d]);
        let mut answers: Vec<String> = stdout(&q)
            .lines()
            .filter(|l| !l.starts_with("answer") && !l.starts_with("residue") && !l.is_empty())
            .map(str::to_string)
            .collect();
        let mut oracle: Vec<String> = stdout(&o).lines().skip(1).map(str::to_string).collect();
        answers.sort();
        oracle.sort();
        assert_eq!(answers, oracle, "{d}");
    }
}
