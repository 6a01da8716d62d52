//! Prolog-style term encoding of feature structures, used for display and
//! golden output: `a(#1=polarity(_), #1, _)`.
//!
//! Each node becomes a term whose functor is its type and whose arguments
//! are its feature values in canonical order, followed by one anonymous
//! slot. Shared nodes are tagged at their first occurrence.

use std::fmt;

use serde_json::{Map, Value};

use super::avm::{build_structure, AvmTree};
use super::fs::FeatureStructure;
use super::TfsError;
use crate::signature::Signature;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EncodedTerm {
    Anon,
    Ref(u32),
    Node {
        tag: Option<u32>,
        functor: String,
        args: Vec<EncodedTerm>,
    },
}

pub fn encode(sig: &Signature, fs: &FeatureStructure) -> EncodedTerm {
    let shared = fs.shared_nodes();
    let mut tags = vec![None; fs.nodes().len()];
    let mut next = 0;
    enc(sig, fs, 0, &shared, &mut tags, &mut next)
}

fn enc(
    sig: &Signature,
    fs: &FeatureStructure,
    n: usize,
    shared: &[bool],
    tags: &mut [Option<u32>],
    next: &mut u32,
) -> EncodedTerm {
    if let Some(k) = tags[n] {
        return EncodedTerm::Ref(k);
    }
    let tag = if shared[n] {
        *next += 1;
        tags[n] = Some(*next);
        Some(*next)
    } else {
        None
    };
    let mut args: Vec<EncodedTerm> = fs.nodes()[n]
        .feats
        .iter()
        .map(|&(_, v)| enc(sig, fs, v, shared, tags, next))
        .collect();
    args.push(EncodedTerm::Anon);
    EncodedTerm::Node {
        tag,
        functor: sig.type_name(fs.ty(n)).to_string(),
        args,
    }
}

/// Rebuilds a structure from its encoding. Argument positions are matched
/// to the functor type's appropriate features in canonical order.
pub fn decode(sig: &Signature, term: &EncodedTerm) -> Result<FeatureStructure, TfsError> {
    build_structure(sig, &term_tree(sig, term)?, &[])
}

fn term_tree(sig: &Signature, term: &EncodedTerm) -> Result<AvmTree, TfsError> {
    match term {
        EncodedTerm::Anon => Ok(AvmTree::default()),
        EncodedTerm::Ref(k) => Ok(AvmTree {
            tag: Some(*k),
            ..AvmTree::default()
        }),
        EncodedTerm::Node { tag, functor, args } => {
            let ty = sig.type_id(functor).ok_or_else(|| TfsError::UnknownType(functor.clone()))?;
            let feats = sig.approp_features(ty);
            if args.len() != feats.len() + 1 || args.last() != Some(&EncodedTerm::Anon) {
                return Err(TfsError::Json(format!(
                    "`{functor}` takes {} arguments plus a final anonymous slot",
                    feats.len()
                )));
            }
            let mut tree = AvmTree {
                tag: *tag,
                ty: Some(functor.clone()),
                feats: Vec::new(),
            };
            for (&(f, _), a) in feats.iter().zip(args) {
                tree.feats.push((sig.feat_name(f).to_string(), term_tree(sig, a)?));
            }
            Ok(tree)
        }
    }
}

impl fmt::Display for EncodedTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EncodedTerm::Anon => f.write_str("_"),
            EncodedTerm::Ref(k) => write!(f, "#{k}"),
            EncodedTerm::Node { tag, functor, args } => {
                if let Some(k) = tag {
                    write!(f, "#{k}=")?;
                }
                write!(f, "{functor}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

impl EncodedTerm {
    /// `{"functor", "tag"?, "children": [...]}` with `"#n"` for references
    /// and `"_"` for anonymous slots.
    pub fn to_json(&self) -> Value {
        match self {
            EncodedTerm::Anon => Value::String("_".into()),
            EncodedTerm::Ref(k) => Value::String(format!("#{k}")),
            EncodedTerm::Node { tag, functor, args } => {
                let mut o = Map::new();
                o.insert("functor".into(), Value::String(functor.clone()));
                if let Some(k) = tag {
                    o.insert("tag".into(), Value::String(format!("#{k}")));
                }
                o.insert("children".into(), Value::Array(args.iter().map(EncodedTerm::to_json).collect()));
                Value::Object(o)
            }
        }
    }

    pub fn from_json(v: &Value) -> Result<EncodedTerm, TfsError> {
        let bad = |m: &str| TfsError::Json(m.to_string());
        match v {
            Value::String(s) if s == "_" => Ok(EncodedTerm::Anon),
            Value::String(s) => s
                .strip_prefix('#')
                .and_then(|d| d.parse().ok())
                .map(EncodedTerm::Ref)
                .ok_or_else(|| bad("expected `_` or a tag")),
            Value::Object(o) => {
                let functor = o.get("functor").and_then(Value::as_str).ok_or_else(|| bad("missing functor"))?;
                let tag = match o.get("tag") {
                    None => None,
                    Some(t) => Some(
                        t.as_str()
                            .and_then(|s| s.strip_prefix('#'))
                            .and_then(|d| d.parse().ok())
                            .ok_or_else(|| bad("bad tag"))?,
                    ),
                };
                let children = o.get("children").and_then(Value::as_array).ok_or_else(|| bad("missing children"))?;
                Ok(EncodedTerm::Node {
                    tag,
                    functor: functor.to_string(),
                    args: children.iter().map(EncodedTerm::from_json).collect::<Result<_, _>>()?,
                })
            }
            _ => Err(bad("expected a term")),
        }
    }
}
