//! Attribute-value matrix text and the JSON answer form.
//!
//! Text form: `a[f:#1=polarity, g:#1] /\ #2 =\= #3`. A node without features
//! prints as its bare type; a node reached more than once carries a tag.

use std::collections::HashMap;

use serde_json::{json, Map, Value};

use super::fs::FeatureStructure;
use super::heap::{Heap, NodeId};
use super::TfsError;
use crate::desclang::{Parser, Tok};
use crate::signature::{Signature, TypeId};

/// Source-level structure shared by the AVM, JSON and term readers.
#[derive(Debug, Clone, Default)]
pub(crate) struct AvmTree {
    pub tag: Option<u32>,
    pub ty: Option<String>,
    pub feats: Vec<(String, AvmTree)>,
}

pub(crate) struct Builder<'h, 's> {
    heap: &'h mut Heap<'s>,
    tags: HashMap<u32, NodeId>,
}

impl<'h, 's> Builder<'h, 's> {
    pub(crate) fn new(heap: &'h mut Heap<'s>) -> Self {
        Builder {
            heap,
            tags: HashMap::new(),
        }
    }

    pub(crate) fn build(&mut self, node: NodeId, t: &AvmTree) -> Result<(), TfsError> {
        let sig = self.heap.signature();
        if let Some(k) = t.tag {
            match self.tags.get(&k) {
                Some(&other) => {
                    if !self.heap.unify(node, other) {
                        return Err(TfsError::Inconsistent(format!("tag #{k}")));
                    }
                }
                None => {
                    self.tags.insert(k, node);
                }
            }
        }
        if let Some(name) = &t.ty {
            let ty = sig.type_id(name).ok_or_else(|| TfsError::UnknownType(name.clone()))?;
            if !self.heap.promote(node, ty) {
                return Err(TfsError::Inconsistent(format!("type `{name}`")));
            }
        }
        for (fname, sub) in &t.feats {
            let f = sig.feat_id(fname).ok_or_else(|| TfsError::UnknownFeature(fname.clone()))?;
            if !self.heap.promote(node, sig.intro(f)) {
                return Err(TfsError::Inconsistent(format!("feature `{fname}`")));
            }
            let v = self.heap.arc(node, f).expect("feature appropriate after promotion");
            self.build(v, sub)?;
        }
        Ok(())
    }

    pub(crate) fn inequate(&mut self, a: u32, b: u32) -> Result<(), TfsError> {
        let (Some(&x), Some(&y)) = (self.tags.get(&a), self.tags.get(&b)) else {
            return Err(TfsError::Inconsistent(format!("inequation on undefined tag #{a} or #{b}")));
        };
        if !self.heap.add_inequation(x, y) {
            return Err(TfsError::Inconsistent(format!("#{a} and #{b} are identical")));
        }
        Ok(())
    }
}

pub(crate) fn build_structure(
    sig: &Signature,
    tree: &AvmTree,
    ineqs: &[(u32, u32)],
) -> Result<FeatureStructure, TfsError> {
    let mut heap = Heap::new(sig);
    let root = heap.fresh(TypeId::BOT)?;
    let mut b = Builder::new(&mut heap);
    b.build(root, tree)?;
    for &(x, y) in ineqs {
        b.inequate(x, y)?;
    }
    Ok(heap.export(root))
}

/// Parses AVM text into a totally well-typed structure. Features left out
/// get their most general values.
pub fn parse_avm(sig: &Signature, text: &str) -> Result<FeatureStructure, TfsError> {
    let mut p = Parser::new(text)?;
    let tree = avm_tree(&mut p)?;
    let mut ineqs = Vec::new();
    while *p.peek() == Tok::Wedge {
        p.bump();
        let a = hash(&mut p)?;
        p.expect(Tok::NotEq)?;
        let b = hash(&mut p)?;
        ineqs.push((a, b));
    }
    if !p.at_eof() {
        return Err(p.error(format!("unexpected {}", p.peek())).into());
    }
    build_structure(sig, &tree, &ineqs)
}

fn hash(p: &mut Parser) -> Result<u32, TfsError> {
    match p.peek().clone() {
        Tok::Hash(n) => {
            p.bump();
            Ok(n)
        }
        other => Err(p.error(format!("expected a tag, found {other}")).into()),
    }
}

fn avm_tree(p: &mut Parser) -> Result<AvmTree, TfsError> {
    let mut tree = AvmTree::default();
    if let Tok::Hash(n) = *p.peek() {
        p.bump();
        tree.tag = Some(n);
        if *p.peek() != Tok::Eq {
            return Ok(tree);
        }
        p.bump();
    }
    tree.ty = Some(p.name("a type")?);
    if *p.peek() == Tok::LBracket {
        p.bump();
        if *p.peek() != Tok::RBracket {
            loop {
                let f = p.name("a feature")?;
                p.expect(Tok::Colon)?;
                tree.feats.push((f, avm_tree(p)?));
                if *p.peek() == Tok::Comma {
                    p.bump();
                } else {
                    break;
                }
            }
        }
        p.expect(Tok::RBracket)?;
    }
    Ok(tree)
}

/// Tag numbers for shared nodes, in order of first encounter.
fn tag_numbers(fs: &FeatureStructure) -> Vec<Option<u32>> {
    let shared = fs.shared_nodes();
    let mut next = 0;
    shared
        .iter()
        .map(|&s| {
            s.then(|| {
                next += 1;
                next
            })
        })
        .collect()
}

pub fn print_avm(sig: &Signature, fs: &FeatureStructure) -> String {
    let tags = tag_numbers(fs);
    let mut seen = vec![false; fs.nodes().len()];
    let mut out = String::new();
    write_node(sig, fs, 0, &tags, &mut seen, &mut out);
    for &(a, b) in fs.inequations() {
        out.push_str(&format!(
            " /\\ #{} =\\= #{}",
            tags[a].expect("inequated nodes are tagged"),
            tags[b].expect("inequated nodes are tagged")
        ));
    }
    out
}

fn write_node(sig: &Signature, fs: &FeatureStructure, n: usize, tags: &[Option<u32>], seen: &mut [bool], out: &mut String) {
    if let Some(k) = tags[n] {
        if seen[n] {
            out.push_str(&format!("#{k}"));
            return;
        }
        out.push_str(&format!("#{k}="));
    }
    seen[n] = true;
    let node = &fs.nodes()[n];
    out.push_str(sig.type_name(node.ty));
    if !node.feats.is_empty() {
        out.push('[');
        for (i, &(f, v)) in node.feats.iter().enumerate() {
            if i > 0 {
                out.push_str(", ");
            }
            out.push_str(sig.feat_name(f));
            out.push(':');
            write_node(sig, fs, v, tags, seen, out);
        }
        out.push(']');
    }
}

/// JSON object for a structure:
/// `{"type", "features": {...}, "tags": {"#1": "path"}, "inequations"?}`.
/// Shared nodes carry a `"tag"` at their first occurrence and appear as the
/// string `"#n"` afterwards.
pub fn structure_to_json(sig: &Signature, fs: &FeatureStructure) -> Value {
    let tags = tag_numbers(fs);
    let mut seen = vec![false; fs.nodes().len()];
    let mut defined = Map::new();
    let mut root = node_json(sig, fs, 0, &tags, &mut seen, &mut Vec::new(), &mut defined);
    let obj = root.as_object_mut().expect("root is an object");
    obj.insert("tags".into(), Value::Object(defined));
    if !fs.inequations().is_empty() {
        let pairs: Vec<Value> = fs
            .inequations()
            .iter()
            .map(|&(a, b)| json!([format!("#{}", tags[a].unwrap()), format!("#{}", tags[b].unwrap())]))
            .collect();
        obj.insert("inequations".into(), Value::Array(pairs));
    }
    root
}

fn node_json(
    sig: &Signature,
    fs: &FeatureStructure,
    n: usize,
    tags: &[Option<u32>],
    seen: &mut [bool],
    path: &mut Vec<String>,
    defined: &mut Map<String, Value>,
) -> Value {
    if seen[n] {
        return Value::String(format!("#{}", tags[n].expect("revisited nodes are tagged")));
    }
    seen[n] = true;
    let mut obj = Map::new();
    if let Some(k) = tags[n] {
        obj.insert("tag".into(), Value::String(format!("#{k}")));
        defined.insert(format!("#{k}"), Value::String(path.join(":")));
    }
    obj.insert("type".into(), Value::String(sig.type_name(fs.ty(n)).to_string()));
    let mut feats = Map::new();
    for &(f, v) in &fs.nodes()[n].feats {
        path.push(sig.feat_name(f).to_string());
        feats.insert(sig.feat_name(f).to_string(), node_json(sig, fs, v, tags, seen, path, defined));
        path.pop();
    }
    obj.insert("features".into(), Value::Object(feats));
    Value::Object(obj)
}

fn parse_tag(s: &str) -> Result<u32, TfsError> {
    s.strip_prefix('#')
        .and_then(|d| d.parse().ok())
        .ok_or_else(|| TfsError::Json(format!("bad tag `{s}`")))
}

fn json_tree(v: &Value) -> Result<AvmTree, TfsError> {
    match v {
        Value::String(s) => Ok(AvmTree {
            tag: Some(parse_tag(s)?),
            ..AvmTree::default()
        }),
        Value::Object(o) => {
            let mut tree = AvmTree::default();
            if let Some(t) = o.get("tag") {
                tree.tag = Some(parse_tag(t.as_str().ok_or_else(|| TfsError::Json("tag must be a string".into()))?)?);
            }
            let ty = o
                .get("type")
                .and_then(Value::as_str)
                .ok_or_else(|| TfsError::Json("node without a type".into()))?;
            tree.ty = Some(ty.to_string());
            if let Some(feats) = o.get("features") {
                let feats = feats
                    .as_object()
                    .ok_or_else(|| TfsError::Json("features must be an object".into()))?;
                for (f, sub) in feats {
                    tree.feats.push((f.clone(), json_tree(sub)?));
                }
            }
            Ok(tree)
        }
        _ => Err(TfsError::Json("expected an object or a tag string".into())),
    }
}

pub fn structure_from_json(sig: &Signature, v: &Value) -> Result<FeatureStructure, TfsError> {
    let tree = json_tree(v)?;
    let mut ineqs = Vec::new();
    if let Some(pairs) = v.get("inequations").and_then(Value::as_array) {
        for p in pairs {
            let pair = p.as_array().filter(|a| a.len() == 2).ok_or_else(|| TfsError::Json("bad inequation".into()))?;
            let tag = |x: &Value| x.as_str().ok_or_else(|| TfsError::Json("bad inequation".into())).and_then(parse_tag);
            ineqs.push((tag(&pair[0])?, tag(&pair[1])?));
        }
    }
    build_structure(sig, &tree, &ineqs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signature::fixtures::SIG_A;

    #[test]
    fn print_parse_round_trip() {
        let sig = Signature::parse(SIG_A).unwrap();
        for text in [
            "plus",
            "a[f:polarity, g:polarity]",
            "a[f:#1=polarity, g:#1]",
            "b[f:plus, g:minus]",
            "a[f:#1=polarity, g:#2=polarity] /\\ #1 =\\= #2",
        ] {
            let fs = parse_avm(&sig, text).unwrap();
            assert_eq!(print_avm(&sig, &fs), text);
        }
    }

    #[test]
    fn omitted_features_are_filled() {
        let sig = Signature::parse(SIG_A).unwrap();
        let fs = parse_avm(&sig, "a[f:plus]").unwrap();
        assert_eq!(print_avm(&sig, &fs), "a[f:plus, g:polarity]");
        let fs = parse_avm(&sig, "bot[f:plus]").unwrap();
        assert_eq!(print_avm(&sig, &fs), "a[f:plus, g:polarity]");
    }

    #[test]
    fn inconsistent_avm_rejected() {
        let sig = Signature::parse(SIG_A).unwrap();
        assert!(matches!(parse_avm(&sig, "b[f:minus]"), Err(TfsError::Inconsistent(_))));
        assert!(matches!(parse_avm(&sig, "a[f:#1=plus, g:#1] /\\ #1 =\\= #1"), Err(TfsError::Inconsistent(_))));
        assert!(matches!(parse_avm(&sig, "a[h:plus]"), Err(TfsError::UnknownFeature(_))));
        assert!(matches!(parse_avm(&sig, "a[f:plus"), Err(TfsError::Parse(_))));
    }

    #[test]
    fn json_round_trip() {
        let sig = Signature::parse(SIG_A).unwrap();
        let fs = parse_avm(&sig, "a[f:#1=polarity, g:#1]").unwrap();
        let v = structure_to_json(&sig, &fs);
        assert_eq!(v["features"]["g"], json!("#1"));
        assert_eq!(v["tags"]["#1"], json!("f"));
        assert_eq!(structure_from_json(&sig, &v).unwrap(), fs);
    }
}
