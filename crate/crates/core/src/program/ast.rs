use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;

/// Comparison builtins evaluated against continuous values.
pub const BUILTINS: [&str; 3] = ["below", "above", "ininterval"];

pub fn is_builtin(predicate: &str, arity: usize) -> bool {
    matches!((predicate, arity), ("below", 2) | ("above", 2) | ("ininterval", 3))
}

#[derive(Debug, Clone)]
pub enum Term {
    /// Symbolic constant.
    Symbol(String),
    /// Finite numeric constant; `-0.0` is stored as `0.0`.
    Number(f64),
    Var(String),
    Compound(String, Vec<Term>),
}

impl Term {
    pub fn symbol(name: impl Into<String>) -> Term {
        Term::Symbol(name.into())
    }

    pub fn number(x: f64) -> Term {
        Term::Number(if x == 0.0 { 0.0 } else { x })
    }

    pub fn var(name: impl Into<String>) -> Term {
        Term::Var(name.into())
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::Compound(_, args) => args.iter().all(Term::is_ground),
            _ => true,
        }
    }

    pub fn as_number(&self) -> Option<f64> {
        match self {
            Term::Number(x) => Some(*x),
            _ => None,
        }
    }

    /// Nesting depth of compound terms; constants and variables have depth 0.
    pub fn depth(&self) -> usize {
        match self {
            Term::Compound(_, args) => 1 + args.iter().map(Term::depth).max().unwrap_or(0),
            _ => 0,
        }
    }

    pub fn collect_vars<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            Term::Var(v) => {
                if !out.contains(&v.as_str()) {
                    out.push(v);
                }
            }
            Term::Compound(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
            _ => {}
        }
    }

    fn rank(&self) -> u8 {
        match self {
            Term::Number(_) => 0,
            Term::Symbol(_) => 1,
            Term::Var(_) => 2,
            Term::Compound(..) => 3,
        }
    }
}

impl PartialEq for Term {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Term {}

impl PartialOrd for Term {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Term {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Term::Number(a), Term::Number(b)) => a.total_cmp(b),
            (Term::Symbol(a), Term::Symbol(b)) | (Term::Var(a), Term::Var(b)) => a.cmp(b),
            (Term::Compound(f, a), Term::Compound(g, b)) => (a.len(), f, a).cmp(&(b.len(), g, b)),
            _ => self.rank().cmp(&other.rank()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Atom {
    pub predicate: String,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn new(predicate: impl Into<String>, args: Vec<Term>) -> Atom {
        Atom {
            predicate: predicate.into(),
            args,
        }
    }

    pub fn prop(predicate: impl Into<String>) -> Atom {
        Atom::new(predicate, Vec::new())
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }

    pub fn key(&self) -> PredKey {
        PredKey::new(self.predicate.clone(), self.args.len())
    }

    pub fn is_ground(&self) -> bool {
        self.args.iter().all(Term::is_ground)
    }

    pub fn is_builtin(&self) -> bool {
        is_builtin(&self.predicate, self.args.len())
    }

    pub fn vars(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.args.iter().for_each(|a| a.collect_vars(&mut out));
        out
    }
}

/// Predicate name and arity.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PredKey {
    pub name: String,
    pub arity: usize,
}

impl PredKey {
    pub fn new(name: impl Into<String>, arity: usize) -> PredKey {
        PredKey {
            name: name.into(),
            arity,
        }
    }
}

impl core::fmt::Display for PredKey {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "{}/{}", self.name, self.arity)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Literal {
    Pos(Atom),
    Neg(Atom),
}

impl Literal {
    pub fn atom(&self) -> &Atom {
        match self {
            Literal::Pos(a) | Literal::Neg(a) => a,
        }
    }

    pub fn is_negative(&self) -> bool {
        matches!(self, Literal::Neg(_))
    }
}

/// `head :- body`; facts have an empty body.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Clause {
    pub head: Atom,
    pub body: Vec<Literal>,
}

impl Clause {
    pub fn new(head: Atom, body: Vec<Literal>) -> Clause {
        Clause { head, body }
    }

    pub fn fact(head: Atom) -> Clause {
        Clause::new(head, Vec::new())
    }

    pub fn is_fact(&self) -> bool {
        self.body.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbFact {
    pub probability: f64,
    pub atom: Atom,
}

/// Arithmetic weight expression of a continuous fact, as written.
#[derive(Debug, Clone, PartialEq)]
pub enum PolyExpr {
    Num(f64),
    Var(String),
    Neg(Box<PolyExpr>),
    Add(Box<PolyExpr>, Box<PolyExpr>),
    Sub(Box<PolyExpr>, Box<PolyExpr>),
    Mul(Box<PolyExpr>, Box<PolyExpr>),
    Pow(Box<PolyExpr>, u32),
}

impl PolyExpr {
    pub fn vars(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            PolyExpr::Num(_) => {}
            PolyExpr::Var(v) => {
                if !out.contains(&v.as_str()) {
                    out.push(v);
                }
            }
            PolyExpr::Neg(a) | PolyExpr::Pow(a, _) => a.collect_vars(out),
            PolyExpr::Add(a, b) | PolyExpr::Sub(a, b) | PolyExpr::Mul(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }
}

/// `weight :: atom` where the weight is a polynomial in continuous variables.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuousFact {
    pub weight: PolyExpr,
    pub atom: Atom,
}

/// `(X, Gaussian(90, 10)) :: attr(X)`: a continuous fact with a named
/// parametric distribution. Parsed and printed, but not loadable.
#[derive(Debug, Clone, PartialEq)]
pub struct DistributionFact {
    pub var: String,
    pub distribution: String,
    pub parameters: Vec<f64>,
    pub atom: Atom,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Statement {
    Clause(Clause),
    Prob(ProbFact),
    Continuous(ContinuousFact),
    Distribution(DistributionFact),
    Query(Atom),
    Evidence(Literal),
}

/// Line and column of a statement in its source text, 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Position {
    pub line: usize,
    pub column: usize,
}

/// A parsed program: statements in source order.
///
/// Equality compares statements only, not their source positions.
#[derive(Debug, Clone, Default)]
pub struct Program {
    pub statements: Vec<Statement>,
    /// Source position per statement; empty for programs built in code.
    pub positions: Vec<Position>,
}

impl PartialEq for Program {
    fn eq(&self, other: &Self) -> bool {
        self.statements == other.statements
    }
}

impl Program {
    pub fn new(statements: Vec<Statement>) -> Program {
        Program {
            statements,
            positions: Vec::new(),
        }
    }

    pub fn push(&mut self, statement: Statement) {
        self.statements.push(statement);
        if !self.positions.is_empty() {
            self.positions.push(Position::default());
        }
    }

    pub fn extend(&mut self, other: Program) {
        for s in other.statements {
            self.push(s);
        }
    }

    pub fn position(&self, index: usize) -> Option<Position> {
        self.positions.get(index).copied()
    }

    pub fn clauses(&self) -> impl Iterator<Item = &Clause> {
        self.statements.iter().filter_map(|s| match s {
            Statement::Clause(c) => Some(c),
            _ => None,
        })
    }

    pub fn prob_facts(&self) -> impl Iterator<Item = &ProbFact> {
        self.statements.iter().filter_map(|s| match s {
            Statement::Prob(f) => Some(f),
            _ => None,
        })
    }

    pub fn continuous_facts(&self) -> impl Iterator<Item = &ContinuousFact> {
        self.statements.iter().filter_map(|s| match s {
            Statement::Continuous(f) => Some(f),
            _ => None,
        })
    }

    pub fn queries(&self) -> impl Iterator<Item = &Atom> {
        self.statements.iter().filter_map(|s| match s {
            Statement::Query(q) => Some(q),
            _ => None,
        })
    }

    pub fn evidence(&self) -> impl Iterator<Item = &Literal> {
        self.statements.iter().filter_map(|s| match s {
            Statement::Evidence(e) => Some(e),
            _ => None,
        })
    }
}

/// Variable-to-term map.
pub type Substitution = BTreeMap<String, Term>;

/// Applies `theta` to every variable of `term` simultaneously.
pub fn substitute_term(term: &Term, theta: &Substitution) -> Term {
    match term {
        Term::Var(v) => theta.get(v).cloned().unwrap_or_else(|| term.clone()),
        Term::Compound(f, args) => Term::Compound(f.clone(), args.iter().map(|a| substitute_term(a, theta)).collect()),
        _ => term.clone(),
    }
}

/// Applies `theta` to every argument of `atom` simultaneously.
pub fn substitute(atom: &Atom, theta: &Substitution) -> Atom {
    Atom {
        predicate: atom.predicate.clone(),
        args: atom.args.iter().map(|a| substitute_term(a, theta)).collect(),
    }
}
