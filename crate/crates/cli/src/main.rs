//! `featlog`: validate signatures, compile grammars and run queries.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use featlog::compiler::{compile_grammar, CompiledGrammar};
use featlog::desclang::{parse_description, parse_grammar, parse_query, resolve, Scope};
use featlog::engine::{Engine, QueryConfig};
use featlog::satisfier::mgsats;
use featlog::signature::{derangement_analysis, Signature};
use featlog::tfs::{maximal_extensions, print_avm, structure_to_json, FeatureStructure};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

const CACHE_VERSION: u32 = 1;
const ORACLE_MAX_NODES: usize = 10_000;

#[derive(Parser)]
#[command(name = "featlog", version, about = "Typed feature structure grammars with delayed principles")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a signature and report its introducers and deranged types.
    Validate {
        #[arg(long)]
        signature: PathBuf,
    },
    /// Compile a grammar, writing a cache file or listing the programs.
    Compile {
        #[arg(long)]
        signature: PathBuf,
        #[arg(long)]
        grammar: PathBuf,
        /// Print each principle's trigger and program instead of writing a cache.
        #[arg(long)]
        dump: bool,
        /// Cache file to write (default: the grammar path with `.compiled.json` appended).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve a query description (optionally `DESC goal GOAL`) under a grammar.
    Query {
        #[arg(long)]
        signature: PathBuf,
        #[arg(long)]
        grammar: Option<PathBuf>,
        /// Compiled grammar cache, reused when both inputs are unchanged and rewritten otherwise.
        #[arg(long, requires = "grammar")]
        cache: Option<PathBuf>,
        query: String,
        /// Enumerate promotions until no suspension remains.
        #[arg(long)]
        maximize: bool,
        #[arg(long, default_value_t = 100)]
        limit: usize,
        #[arg(long)]
        json: bool,
        /// Print suspension events to standard error.
        #[arg(long)]
        trace: bool,
        #[arg(long, default_value_t = 100)]
        sld_depth: usize,
        #[arg(long, default_value_t = 64)]
        extension_depth: usize,
        #[arg(long)]
        no_covering: bool,
    },
    /// List the maximal extensions of a description's most general satisfiers.
    Oracle {
        #[arg(long)]
        signature: PathBuf,
        description: String,
        #[arg(long, default_value_t = 1000)]
        limit: usize,
    },
}

struct Failure {
    code: u8,
    message: String,
}

fn invalid(message: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        message: message.into(),
    }
}

type Outcome = Result<u8, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Validate { signature } => validate(&signature),
        Command::Compile {
            signature,
            grammar,
            dump,
            out,
        } => compile(&signature, &grammar, dump, out),
        Command::Query {
            signature,
            grammar,
            cache,
            query,
            maximize,
            limit,
            json,
            trace,
            sld_depth,
            extension_depth,
            no_covering,
        } => {
            let config = QueryConfig {
                maximize,
                answer_limit: limit,
                trace,
                sld_depth,
                extension_depth,
                subtype_covering: !no_covering,
                ..QueryConfig::default()
            };
            run_query(&signature, grammar.as_deref(), cache.as_deref(), &query, config, json)
        }
        Command::Oracle {
            signature,
            description,
            limit,
        } => oracle(&signature, &description, limit),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("featlog: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| invalid(format!("{}: {e}", path.display())))
}

fn load_signature(path: &Path) -> Result<(Signature, String), Failure> {
    let text = read(path)?;
    let sig = Signature::parse(&text).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
    Ok((sig, text))
}

fn compile_text(sig: &Signature, path: &Path, text: &str) -> Result<CompiledGrammar, Failure> {
    let grammar = parse_grammar(text).map_err(|e| invalid(format!("{}:{e}", path.display())))?;
    let compiled = compile_grammar(sig, &grammar).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
    for w in &compiled.warnings {
        eprintln!("warning: {}: {w}", path.display());
    }
    Ok(compiled)
}

fn validate(path: &Path) -> Outcome {
    let (sig, _) = load_signature(path)?;
    let report = derangement_analysis(&sig);
    let mut out = String::new();
    writeln!(out, "types: {}", sig.type_count()).unwrap();
    writeln!(out, "features: {}", sig.feature_count()).unwrap();
    if sig.feature_count() > 0 {
        writeln!(out, "intro:").unwrap();
        let width = sig.features().map(|f| sig.feat_name(f).len()).max().unwrap_or(0);
        for f in sig.features() {
            writeln!(out, "  {:width$}  {}", sig.feat_name(f), sig.type_name(sig.intro(f))).unwrap();
        }
    }
    if report.is_empty() {
        writeln!(out, "deranged: none").unwrap();
    } else {
        let list: Vec<String> = report
            .deranged
            .iter()
            .map(|d| format!("{} ({} safe products)", sig.type_name(d.ty), d.products.len()))
            .collect();
        writeln!(out, "deranged: {}", list.join(", ")).unwrap();
    }
    print!("{out}");
    Ok(0)
}

#[derive(Serialize, Deserialize)]
struct Cache {
    version: u32,
    signature_sha256: String,
    grammar_sha256: String,
    grammar: CompiledGrammar,
}

fn digest(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

fn default_cache_path(grammar: &Path) -> PathBuf {
    let mut name = grammar.as_os_str().to_owned();
    name.push(".compiled.json");
    PathBuf::from(name)
}

fn write_cache(path: &Path, sig_text: &str, grammar_text: &str, grammar: &CompiledGrammar) -> Result<(), Failure> {
    let cache = Cache {
        version: CACHE_VERSION,
        signature_sha256: digest(sig_text),
        grammar_sha256: digest(grammar_text),
        grammar: grammar.clone(),
    };
    let text = serde_json::to_string(&cache).expect("compiled grammars serialize");
    fs::write(path, text).map_err(|e| invalid(format!("{}: {e}", path.display())))
}

/// The cached grammar when it was built from exactly these inputs.
fn read_cache(path: &Path, sig_text: &str, grammar_text: &str) -> Option<CompiledGrammar> {
    let text = fs::read_to_string(path).ok()?;
    let cache: Cache = serde_json::from_str(&text).ok()?;
    (cache.version == CACHE_VERSION
        && cache.signature_sha256 == digest(sig_text)
        && cache.grammar_sha256 == digest(grammar_text))
    .then_some(cache.grammar)
}

fn compile(sig_path: &Path, grammar_path: &Path, dump: bool, out: Option<PathBuf>) -> Outcome {
    let (sig, sig_text) = load_signature(sig_path)?;
    let grammar_text = read(grammar_path)?;
    let compiled = compile_text(&sig, grammar_path, &grammar_text)?;
    if dump {
        print!("{}", compiled.dump(&sig));
    } else {
        let out = out.unwrap_or_else(|| default_cache_path(grammar_path));
        write_cache(&out, &sig_text, &grammar_text, &compiled)?;
        eprintln!(
            "wrote {} ({} principles, {} relations)",
            out.display(),
            compiled.constraints.len(),
            compiled.relations.len()
        );
    }
    Ok(0)
}

fn load_grammar(sig: &Signature, sig_text: &str, grammar: Option<&Path>, cache: Option<&Path>) -> Result<CompiledGrammar, Failure> {
    let Some(path) = grammar else {
        return compile_text(sig, Path::new("<empty grammar>"), "");
    };
    let text = read(path)?;
    if let Some(cache) = cache {
        if let Some(g) = read_cache(cache, sig_text, &text) {
            return Ok(g);
        }
        eprintln!("{}: stale or missing, recompiling", cache.display());
        let g = compile_text(sig, path, &text)?;
        write_cache(cache, sig_text, &text, &g)?;
        return Ok(g);
    }
    compile_text(sig, path, &text)
}

fn answer_json(sig: &Signature, structure: &FeatureStructure, bindings: &[(String, FeatureStructure)], residue: usize) -> Value {
    let mut v = structure_to_json(sig, structure);
    let obj = v.as_object_mut().expect("structures serialize to objects");
    obj.insert("residue".into(), json!(residue));
    if !bindings.is_empty() {
        let b: serde_json::Map<String, Value> = bindings
            .iter()
            .map(|(name, fs)| (name.clone(), structure_to_json(sig, fs)))
            .collect();
        obj.insert("bindings".into(), Value::Object(b));
    }
    v
}

fn run_query(
    sig_path: &Path,
    grammar: Option<&Path>,
    cache: Option<&Path>,
    text: &str,
    config: QueryConfig,
    as_json: bool,
) -> Outcome {
    let (sig, sig_text) = load_signature(sig_path)?;
    let compiled = load_grammar(&sig, &sig_text, grammar, cache)?;
    let query = parse_query(text).map_err(|e| invalid(format!("query:{e}")))?;
    let query = compiled.compile_query(&sig, &query).map_err(|e| invalid(format!("query: {e}")))?;
    let result = Engine::new(&sig, &compiled, config).solve_query(&query);
    for line in &result.trace {
        eprintln!("{line}");
    }

    if as_json {
        let answers: Vec<Value> = result
            .answers
            .iter()
            .map(|a| answer_json(&sig, &a.structure, &a.bindings, a.residue.len()))
            .collect();
        println!("{}", serde_json::to_string_pretty(&Value::Array(answers)).expect("json values serialize"));
    } else {
        let mut out = String::new();
        for (i, a) in result.answers.iter().enumerate() {
            if i > 0 {
                out.push('\n');
            }
            writeln!(out, "answer {}:", i + 1).unwrap();
            writeln!(out, "{}", print_avm(&sig, &a.structure)).unwrap();
            for (name, fs) in &a.bindings {
                writeln!(out, "{name} = {}", print_avm(&sig, fs)).unwrap();
            }
            writeln!(out, "residue: {}", a.residue.len()).unwrap();
            for r in &a.residue {
                writeln!(out, "  {r}").unwrap();
            }
        }
        print!("{out}");
    }

    if result.truncated {
        eprintln!("stopped after {} answers", result.answers.len());
    }
    if !result.exceeded.is_empty() {
        let bounds: Vec<String> = result.exceeded.iter().map(|b| b.to_string()).collect();
        eprintln!("featlog: {}", bounds.join("; "));
        return Ok(3);
    }
    if result.answers.is_empty() {
        eprintln!("no answers");
        return Ok(1);
    }
    Ok(0)
}

fn oracle(sig_path: &Path, text: &str, limit: usize) -> Outcome {
    let (sig, _) = load_signature(sig_path)?;
    let desc = parse_description(text).map_err(|e| invalid(format!("description:{e}")))?;
    let desc = resolve(&sig, &desc, &mut Scope::new()).map_err(|e| invalid(format!("description: {e}")))?;
    let sats = mgsats(&sig, &desc).map_err(|e| invalid(e.to_string()))?;
    let mut found: Vec<FeatureStructure> = Vec::new();
    let mut truncated = false;
    for s in &sats {
        let ext = maximal_extensions(&sig, s, limit, ORACLE_MAX_NODES);
        truncated |= ext.truncated;
        for e in ext.structures {
            if !found.iter().any(|f| f.equivalent(&sig, &e)) {
                found.push(e);
            }
        }
    }
    found.truncate(limit);
    println!("extensions: {}", found.len());
    for e in &found {
        println!("{}", print_avm(&sig, e));
    }
    if truncated {
        eprintln!("stopped after {limit} extensions");
    }
    Ok(0)
}
