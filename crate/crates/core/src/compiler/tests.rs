use super::*;
use crate::desclang::{parse_description, parse_grammar};
use crate::signature::fixtures::{SIG_A, SIG_B};

const FINITENESS: &str = "synsem:loc:cat:(head:verb, marking:fin) ==> synsem:loc:cat:head:vform:bse.";

fn desc(sig: &Signature, text: &str) -> Desc {
    resolve(sig, &parse_description(text).unwrap(), &mut Scope::new()).unwrap()
}

fn compile(sig: &Signature, text: &str) -> CompiledGrammar {
    compile_grammar(sig, &parse_grammar(text).unwrap()).unwrap()
}

#[test]
fn trigger_examples() {
    let b = Signature::parse(SIG_B).unwrap();
    assert_eq!(trigger(&b, &desc(&b, "X")), Some(TypeId::BOT));
    assert_eq!(
        trigger(&b, &desc(&b, "synsem:loc:cat:(head:verb, marking:fin)")),
        b.type_id("sign")
    );
    let a = Signature::parse(SIG_A).unwrap();
    assert_eq!(trigger(&a, &desc(&a, "(f:plus ; g:minus)")), a.type_id("a"));
    assert_eq!(trigger(&a, &desc(&a, "plus, minus")), None);
    assert_eq!(trigger(&a, &desc(&a, "(plus, minus) ; b")), a.type_id("b"));
}

#[test]
fn finiteness_golden_dump() {
    let sig = Signature::parse(SIG_B).unwrap();
    let g = compile(&sig, FINITENESS);
    let c = &g.constraints[0];
    let names = g.relation_names();
    let dump = format!("trigger: {}\n{}", sig.type_name(c.trigger), c.program.dump(&sig, &c.scope, &names));
    assert_eq!(
        dump,
        "\
trigger: sign
farg(synsem, $0, $1)
farg(loc, $1, $2)
farg(cat, $2, $3)
farg(head, $3, $4)
typewhen(verb, $4)
  farg(marking, $3, $5)
  typewhen(fin, $5)
    unify($0, synsem:loc:cat:head:vform:bse)
"
    );
}

#[test]
fn finiteness_before_simplification_has_seven_delays() {
    let sig = Signature::parse(SIG_B).unwrap();
    let p = &parse_grammar(FINITENESS).unwrap().principles[0];
    let raw = compile_principle_unsimplified(&sig, p, &HashMap::new()).unwrap().unwrap();
    assert_eq!(raw.program.type_when_count(), 7);
    let dump = raw.program.dump(&sig, &raw.scope, &[]);
    let first: Vec<&str> = dump.lines().take(3).collect();
    assert_eq!(first, vec!["typewhen(sign, $0)", "  farg(synsem, $0, $1)", "  typewhen(syntax_semantics, $1)"]);
}

#[test]
fn trivial_and_inconsistent_principles() {
    let a = Signature::parse(SIG_A).unwrap();
    let g = compile(&a, "bot ==> bot.");
    assert_eq!(g.constraints[0].trigger, TypeId::BOT);
    assert_eq!(g.constraints[0].program, Ir::Done);

    let g = compile(&a, "plus ==> minus.");
    assert_eq!(g.constraints[0].trigger, a.type_id("plus").unwrap());
    assert!(matches!(g.constraints[0].program, Ir::UnifySlotDesc { .. }));

    let g = compile(&a, "plus, minus ==> a.");
    assert!(g.constraints.is_empty());
    assert!(g.warnings[0].contains("antecedent unsatisfiable"));
}

#[test]
fn never_firing_delay_is_removed_with_warning() {
    let a = Signature::parse(SIG_A).unwrap();
    let g = compile(&a, "f:(plus, minus) ==> b.");
    assert_eq!(g.constraints[0].program, Ir::Done);
    assert!(g.warnings.iter().any(|w| w.contains("never fires")), "{:?}", g.warnings);
}

#[test]
fn reduce_shapes() {
    let b = Signature::parse(SIG_B).unwrap();
    let rels = HashMap::new();
    let mut scope = Scope::new();
    let v = scope.slot("V");
    let mut r = Reducer {
        sig: &b,
        scope: &mut scope,
        once_cells: 0,
        relations: &rels,
        line: 1,
    };
    let verb = b.type_id("verb").unwrap();
    let fin = b.type_id("fin").unwrap();
    let atomic = |t| Cond::Atomic(v, Desc::Type(t));
    assert_eq!(r.reduce(&atomic(verb), Ir::Done, &HashSet::new()), Ir::type_when(verb, v, Ir::Done));
    let and = Cond::And(Box::new(atomic(verb)), Box::new(atomic(fin)));
    assert_eq!(
        r.reduce(&and, Ir::Done, &HashSet::new()),
        Ir::type_when(verb, v, Ir::type_when(fin, v, Ir::Done))
    );
    let or = Cond::Or(Box::new(atomic(verb)), Box::new(atomic(fin)));
    let guarded = Ir::OnceGuard {
        cell: 0,
        body: Box::new(Ir::Fail),
    };
    assert_eq!(
        r.reduce(&or, Ir::Fail, &HashSet::new()),
        Ir::both(Ir::type_when(verb, v, guarded.clone()), Ir::type_when(fin, v, guarded))
    );
}

#[test]
fn variables_bind_then_check_identity() {
    let a = Signature::parse(SIG_A).unwrap();
    let g = compile(&a, "w(Z) if fswhen(Z = (f:X, g:X), Z = b).");
    let c = &g.relations[0].clauses[0];
    assert_eq!(
        c.body.dump(&a, &c.scope, &[]),
        "\
typewhen(a, Z)
  farg(f, Z, $2)
  unify($2, X)
  farg(g, Z, $3)
  identwhen($3, X)
    unify(Z, b)
"
    );
}

#[test]
fn cover_rules_for_signature_a() {
    let a = Signature::parse(SIG_A).unwrap();
    let g = compile(&a, "");
    assert_eq!(
        g.cover.dump(&a),
        "\
subtype_cover(a)
  dismiss: type != a
  dismiss: a(plus(_), minus(_), _)
  dismiss: a(minus(_), plus(_), _)
  count: b, c
"
    );
    let b = Signature::parse(SIG_B).unwrap();
    assert!(compile(&b, "").cover.is_empty());
}

#[test]
fn three_safe_products() {
    let text = format!("{SIG_A}a sub [d].\nd intro [f:plus, g:plus].\n");
    let sig = Signature::parse(&text).unwrap();
    let g = compile(&sig, "");
    assert_eq!(g.cover.rules.len(), 1);
    assert_eq!(g.cover.rules[0].products.len(), 3);
}

#[test]
fn relations_and_unknown_calls() {
    let a = Signature::parse(SIG_A).unwrap();
    let g = compile(&a, "p(plus).\np(minus).\nq(X) if p(X).");
    assert_eq!(g.relations.len(), 2);
    assert_eq!(g.relations[0].clauses.len(), 2);
    let err = compile_grammar(&a, &parse_grammar("a ==> b goal r(X).").unwrap()).unwrap_err();
    assert!(matches!(err, CompileError::UnknownRelation { .. }));
}

#[test]
fn fswhen_in_clause_body() {
    let a = Signature::parse(SIG_A).unwrap();
    let g = compile(&a, "w(X, Y) if fswhen(X = plus, Y = minus).");
    let c = &g.relations[0].clauses[0];
    assert_eq!(c.body.dump(&a, &c.scope, &[]), "typewhen(plus, X)\n  unify(Y, minus)\n");
}
