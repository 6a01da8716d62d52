use std::fmt;

/// A description in the feature logic.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Description {
    Var(String),
    Type(String),
    Feat(String, Box<Description>),
    And(Box<Description>, Box<Description>),
    Or(Box<Description>, Box<Description>),
}

impl Description {
    pub fn var(name: &str) -> Self {
        Description::Var(name.to_string())
    }

    pub fn ty(name: &str) -> Self {
        Description::Type(name.to_string())
    }

    pub fn feat(feat: &str, value: Description) -> Self {
        Description::Feat(feat.to_string(), Box::new(value))
    }

    pub fn and(a: Description, b: Description) -> Self {
        Description::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Description, b: Description) -> Self {
        Description::Or(Box::new(a), Box::new(b))
    }

    /// Variables in left-to-right order of first occurrence.
    pub fn vars_of(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    pub(crate) fn collect_vars(&self, out: &mut Vec<String>) {
        match self {
            Description::Var(v) => {
                if !out.contains(v) {
                    out.push(v.clone());
                }
            }
            Description::Type(_) => {}
            Description::Feat(_, d) => d.collect_vars(out),
            Description::And(a, b) | Description::Or(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Description::Var(_) | Description::Type(_) => 1,
            Description::Feat(_, d) => 1 + d.depth(),
            Description::And(a, b) | Description::Or(a, b) => 1 + a.depth().max(b.depth()),
        }
    }
}

// Precedence levels: `;` < `,` < `:` < atoms.
const PREC_OR: u8 = 0;
const PREC_AND: u8 = 1;
const PREC_PATH: u8 = 2;

fn write_desc(d: &Description, prec: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    let own = match d {
        Description::Or(..) => PREC_OR,
        Description::And(..) => PREC_AND,
        _ => PREC_PATH,
    };
    if own < prec {
        f.write_str("(")?;
        write_desc(d, PREC_OR, f)?;
        return f.write_str(")");
    }
    match d {
        Description::Var(v) => f.write_str(v),
        Description::Type(t) => f.write_str(t),
        Description::Feat(name, v) => {
            write!(f, "{name}:")?;
            write_desc(v, PREC_PATH, f)
        }
        Description::And(a, b) => {
            write_desc(a, PREC_PATH, f)?;
            f.write_str(", ")?;
            write_desc(b, PREC_AND, f)
        }
        Description::Or(a, b) => {
            write_desc(a, PREC_AND, f)?;
            f.write_str(" ; ")?;
            write_desc(b, PREC_OR, f)
        }
    }
}

impl fmt::Display for Description {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_desc(self, PREC_OR, f)
    }
}

/// Guard language for delayed goals: `V = Desc` closed under `,` and `;`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Conditional {
    Atomic { var: String, desc: Description },
    And(Box<Conditional>, Box<Conditional>),
    Or(Box<Conditional>, Box<Conditional>),
}

impl fmt::Display for Conditional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Conditional::Atomic { var, desc } => {
                write!(f, "{var} = ")?;
                write_desc(desc, PREC_PATH, f)
            }
            Conditional::And(a, b) => write!(f, "({a}, {b})"),
            Conditional::Or(a, b) => write!(f, "({a} ; {b})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Goal {
    True,
    Fail,
    Conj(Box<Goal>, Box<Goal>),
    Disj(Box<Goal>, Box<Goal>),
    Call { rel: String, args: Vec<Description> },
    Unify { var: String, desc: Description },
    FsWhen { cond: Conditional, body: Box<Goal> },
    Ineq(String, String),
}

impl Goal {
    pub fn is_trivial(&self) -> bool {
        matches!(self, Goal::True)
    }

    pub fn vars_of(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut Vec<String>) {
        let push = |v: &String, out: &mut Vec<String>| {
            if !out.contains(v) {
                out.push(v.clone());
            }
        };
        match self {
            Goal::True | Goal::Fail => {}
            Goal::Conj(a, b) | Goal::Disj(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Goal::Call { args, .. } => args.iter().for_each(|a| a.collect_vars(out)),
            Goal::Unify { var, desc } => {
                push(var, out);
                desc.collect_vars(out);
            }
            Goal::FsWhen { cond, body } => {
                cond_vars(cond, out);
                body.collect_vars(out);
            }
            Goal::Ineq(a, b) => {
                push(a, out);
                push(b, out);
            }
        }
    }
}

fn cond_vars(c: &Conditional, out: &mut Vec<String>) {
    match c {
        Conditional::Atomic { var, desc } => {
            if !out.contains(var) {
                out.push(var.clone());
            }
            desc.collect_vars(out);
        }
        Conditional::And(a, b) | Conditional::Or(a, b) => {
            cond_vars(a, out);
            cond_vars(b, out);
        }
    }
}

fn write_goal(g: &Goal, prec: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    let own = match g {
        Goal::Disj(..) => PREC_OR,
        Goal::Conj(..) => PREC_AND,
        _ => PREC_PATH,
    };
    if own < prec {
        f.write_str("(")?;
        write_goal(g, PREC_OR, f)?;
        return f.write_str(")");
    }
    match g {
        Goal::True => f.write_str("true"),
        Goal::Fail => f.write_str("fail"),
        Goal::Conj(a, b) => {
            write_goal(a, PREC_PATH, f)?;
            f.write_str(", ")?;
            write_goal(b, PREC_AND, f)
        }
        Goal::Disj(a, b) => {
            write_goal(a, PREC_AND, f)?;
            f.write_str(" ; ")?;
            write_goal(b, PREC_OR, f)
        }
        Goal::Call { rel, args } => {
            f.write_str(rel)?;
            if !args.is_empty() {
                f.write_str("(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write_desc(a, PREC_PATH, f)?;
                }
                f.write_str(")")?;
            }
            Ok(())
        }
        Goal::Unify { var, desc } => {
            write!(f, "{var} = ")?;
            write_desc(desc, PREC_PATH, f)
        }
        Goal::FsWhen { cond, body } => {
            write!(f, "fswhen({cond}, ")?;
            write_goal(body, PREC_PATH, f)?;
            f.write_str(")")
        }
        Goal::Ineq(a, b) => write!(f, "{a} =\\= {b}"),
    }
}

impl fmt::Display for Goal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_goal(self, PREC_OR, f)
    }
}

/// `antecedent ==> consequent goal attachment.`
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Principle {
    pub antecedent: Description,
    pub consequent: Description,
    pub attachment: Goal,
    pub line: usize,
}

impl fmt::Display for Principle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ==> {}", self.antecedent, self.consequent)?;
        if !self.attachment.is_trivial() {
            write!(f, " goal {}", self.attachment)?;
        }
        Ok(())
    }
}

/// `name(D1, ..., Dn) if Body.`
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationClause {
    pub name: String,
    pub args: Vec<Description>,
    pub body: Goal,
    pub line: usize,
}

impl RelationClause {
    pub fn arity(&self) -> usize {
        self.args.len()
    }
}

impl fmt::Display for RelationClause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let head = Goal::Call {
            rel: self.name.clone(),
            args: self.args.clone(),
        };
        write!(f, "{head}")?;
        if !self.body.is_trivial() {
            write!(f, " if {}", self.body)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Grammar {
    pub principles: Vec<Principle>,
    pub clauses: Vec<RelationClause>,
}

/// A query: a description of the root, optionally with a relational goal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Query {
    pub desc: Description,
    pub goal: Goal,
}

/// One signature clause: `t sub [t1, ...] intro [f:r, ...].`
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeDecl {
    pub name: String,
    pub subs: Vec<String>,
    pub intro: Vec<(String, String)>,
    pub line: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RawSignature {
    pub decls: Vec<TypeDecl>,
}
