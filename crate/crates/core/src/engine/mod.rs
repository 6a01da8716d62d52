//! Running compiled grammars: a depth-first machine over a continuation of
//! tasks, with choice points, a store of suspended delays woken by graph
//! events, universal posting of principles, subtype covering, and SLD
//! resolution of relational goals.

mod machine;

use crate::compiler::{CompiledGrammar, CompiledQuery};
use crate::signature::Signature;
use crate::tfs::FeatureStructure;

use machine::Machine;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryConfig {
    /// Enumerate type promotions of nodes watched by residual suspensions
    /// and report only answers without residue.
    pub maximize: bool,
    /// Maximum number of promotions along one maximize branch.
    pub extension_depth: usize,
    /// Maximum nesting of relation calls.
    pub sld_depth: usize,
    pub answer_limit: usize,
    /// Overall budget of machine steps for one query.
    pub max_steps: usize,
    pub subtype_covering: bool,
    /// Post principles on every node whose type reaches their trigger.
    pub universal: bool,
    pub trace: bool,
}

impl Default for QueryConfig {
    fn default() -> Self {
        QueryConfig {
            maximize: false,
            extension_depth: 64,
            sld_depth: 100,
            answer_limit: 100,
            max_steps: 1_000_000,
            subtype_covering: true,
            universal: true,
            trace: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bound {
    SldDepth,
    ExtensionDepth,
    Steps,
}

impl std::fmt::Display for Bound {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Bound::SldDepth => "relation call depth exceeded",
            Bound::ExtensionDepth => "extension depth exceeded",
            Bound::Steps => "step budget exceeded",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Answer {
    pub structure: FeatureStructure,
    /// Named query variables and the structures they are bound to.
    pub bindings: Vec<(String, FeatureStructure)>,
    /// Suspensions still waiting, one line each.
    pub residue: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct QueryResult {
    pub answers: Vec<Answer>,
    /// Bounds that cut some branch short.
    pub exceeded: Vec<Bound>,
    /// The answer limit stopped the search.
    pub truncated: bool,
    pub trace: Vec<String>,
}

pub struct Engine<'a> {
    pub sig: &'a Signature,
    pub grammar: &'a CompiledGrammar,
    pub config: QueryConfig,
}

impl<'a> Engine<'a> {
    pub fn new(sig: &'a Signature, grammar: &'a CompiledGrammar, config: QueryConfig) -> Self {
        Engine { sig, grammar, config }
    }

    /// Builds the satisfiers of the query description branch by branch and
    /// runs its goal, applying every principle along the way.
    pub fn solve_query(&self, q: &CompiledQuery) -> QueryResult {
        let mut m = Machine::new(self.sig, self.grammar, &self.config);
        m.start_query(q);
        m.run()
    }

    /// Applies the grammar to an existing structure.
    pub fn solve_structure(&self, fs: &FeatureStructure) -> QueryResult {
        let mut m = Machine::new(self.sig, self.grammar, &self.config);
        m.start_structure(fs);
        m.run()
    }

    /// Posts one compiled principle on the root of `fs` only (when the root
    /// reaches its trigger) and runs it, with no other principles and no
    /// subtype covering.
    pub fn run_constraint(&self, fs: &FeatureStructure, index: usize) -> QueryResult {
        let config = QueryConfig {
            universal: false,
            subtype_covering: false,
            ..self.config.clone()
        };
        let mut m = Machine::new(self.sig, self.grammar, &config);
        m.start_single(fs, index);
        m.run()
    }
}
