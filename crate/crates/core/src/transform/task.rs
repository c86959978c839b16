use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::program::{
    parse, print, substitute_term, ArgumentTypes, Atom, Attribute, Clause, HybridProgram, Literal, Piece, PredKey,
    ProbFact, Program, Statement, Substitution, Term,
};

/// A ground target fact labelled true or false.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Example {
    pub atom: Atom,
    pub positive: bool,
}

/// Whether a body literal argument must reuse a bound variable or may
/// introduce a new one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Direction {
    In,
    Out,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mode {
    pub predicate: PredKey,
    pub args: Vec<Direction>,
}

impl Mode {
    /// Only literals whose arguments are all bound may be negated.
    pub fn negatable(&self) -> bool {
        self.args.iter().all(|d| *d == Direction::In)
    }
}

/// Candidate body literals: argument types per predicate and the allowed
/// modes, in preference order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bias {
    pub target: PredKey,
    pub types: BTreeMap<PredKey, Vec<String>>,
    pub modes: Vec<Mode>,
}

/// Everything a rule learner needs: background program, labelled examples
/// and the declarative bias.
#[derive(Debug, Clone)]
pub struct LearningTask {
    pub target: PredKey,
    pub background: Program,
    pub examples: Vec<Example>,
    pub bias: Bias,
}

impl LearningTask {
    pub fn positives(&self) -> impl Iterator<Item = &Atom> {
        self.examples.iter().filter(|e| e.positive).map(|e| &e.atom)
    }

    pub fn negatives(&self) -> impl Iterator<Item = &Atom> {
        self.examples.iter().filter(|e| !e.positive).map(|e| &e.atom)
    }

    pub fn background_text(&self) -> String {
        print(&self.background)
    }

    /// `1 :: t(a).` for positives and `0 :: t(b).` for negatives.
    pub fn examples_text(&self) -> String {
        let program = Program::new(
            self.examples
                .iter()
                .map(|e| {
                    Statement::Prob(ProbFact {
                        probability: if e.positive { 1.0 } else { 0.0 },
                        atom: e.atom.clone(),
                    })
                })
                .collect(),
        );
        print(&program)
    }

    /// `learn(t(t1)).`, then `base(p(t1, t2)).` and `mode(p(in, out)).` facts.
    pub fn bias_text(&self) -> String {
        let typed = |key: &PredKey| {
            let args = self.bias.types[key].iter().map(|t| Term::symbol(t.as_str())).collect();
            Term::Compound(key.name.clone(), args)
        };
        let fact = |name: &str, t: Term| Statement::Clause(Clause::fact(Atom::new(name, vec![t])));
        let mut program = Program::default();
        program.push(fact("learn", typed(&self.target)));
        let mut seen = BTreeSet::new();
        for m in &self.bias.modes {
            if seen.insert(m.predicate.clone()) {
                program.push(fact("base", typed(&m.predicate)));
            }
        }
        for m in &self.bias.modes {
            let args = m
                .args
                .iter()
                .map(|d| Term::symbol(if *d == Direction::In { "in" } else { "out" }))
                .collect();
            program.push(fact("mode", Term::Compound(m.predicate.name.clone(), args)));
        }
        print(&program)
    }

    /// Reads the three files written by the `*_text` methods.
    pub fn from_texts(background: &str, examples: &str, bias: &str) -> Result<LearningTask> {
        let background = parse(background)?;
        let mut list = Vec::new();
        for s in parse(examples)?.statements {
            match s {
                Statement::Prob(f) if f.atom.is_ground() && (f.probability == 0.0 || f.probability == 1.0) => list
                    .push(Example {
                        atom: f.atom,
                        positive: f.probability == 1.0,
                    }),
                other => {
                    return Err(Error::Semantic(format!(
                        "examples must be ground `1 :: t(..).` or `0 :: t(..).` facts, found `{other}`"
                    )))
                }
            }
        }
        let mut target = None;
        let mut types = BTreeMap::new();
        let mut modes = Vec::new();
        for s in parse(bias)?.statements {
            let Statement::Clause(c) = &s else {
                return Err(Error::Semantic(format!("unexpected bias statement `{s}`")));
            };
            let inner = match (c.is_fact(), c.head.args.as_slice()) {
                (true, [Term::Compound(name, args)]) => Some((name.as_str(), args.as_slice())),
                (true, [Term::Symbol(name)]) => Some((name.as_str(), &[][..])),
                _ => None,
            };
            let Some((name, args)) = inner else {
                return Err(Error::Semantic(format!("unexpected bias statement `{s}`")));
            };
            let key = PredKey::new(name, args.len());
            let symbols: Option<Vec<String>> = args
                .iter()
                .map(|a| match a {
                    Term::Symbol(s) => Some(s.clone()),
                    _ => None,
                })
                .collect();
            let symbols = symbols.ok_or_else(|| Error::Semantic(format!("bias arguments must be names in `{s}`")))?;
            match c.head.predicate.as_str() {
                "learn" => {
                    types.insert(key.clone(), symbols);
                    target = Some(key);
                }
                "base" => {
                    types.insert(key, symbols);
                }
                "mode" => {
                    let args = symbols
                        .iter()
                        .map(|d| match d.as_str() {
                            "in" => Ok(Direction::In),
                            "out" => Ok(Direction::Out),
                            _ => Err(Error::Semantic(format!("mode argument `{d}` is neither in nor out"))),
                        })
                        .collect::<Result<Vec<_>>>()?;
                    modes.push(Mode { predicate: key, args });
                }
                other => return Err(Error::Semantic(format!("unknown bias declaration `{other}`"))),
            }
        }
        let target = target.ok_or_else(|| Error::Semantic("the bias has no `learn(..)` declaration".into()))?;
        if let Some(m) = modes.iter().find(|m| !types.contains_key(&m.predicate)) {
            return Err(Error::Semantic(format!(
                "mode for {} without a base declaration",
                m.predicate
            )));
        }
        if let Some(e) = list.iter().find(|e| e.atom.key() != target) {
            return Err(Error::Semantic(format!("example `{}` is not about {target}", e.atom)));
        }
        Ok(LearningTask {
            target: target.clone(),
            background,
            examples: list,
            bias: Bias { target, types, modes },
        })
    }
}

/// Builds a rule-learning task for `target` from a hybrid program.
///
/// Attribute observations become deterministic piece facts; unobserved
/// instances get one probabilistic fact per piece carrying its mass. Other
/// facts and rules that do not touch attributes are copied. Target tuples
/// over the target's argument types that are not labelled become negatives.
pub fn emit_learning_task(hp: &HybridProgram, target: &PredKey, examples: &[Example]) -> Result<LearningTask> {
    if examples.is_empty() {
        return Err(Error::Contract(format!("no examples for {target}")));
    }
    if let Some(e) = examples.iter().find(|e| e.atom.key() != *target || !e.atom.is_ground()) {
        return Err(Error::Contract(format!(
            "`{}` is not a ground {target} example",
            e.atom
        )));
    }
    let in_background = hp.program.statements.iter().any(|s| match s {
        Statement::Clause(c) => c.head.key() == *target,
        Statement::Prob(f) => f.atom.key() == *target,
        Statement::Continuous(f) => f.atom.key() == *target,
        Statement::Distribution(f) => f.atom.key() == *target,
        _ => false,
    }) || hp.attributes.contains_key(target);
    if in_background {
        return Err(Error::Contract(format!("target {target} is defined by the background")));
    }

    let mut background = Program::default();
    let guards: BTreeSet<usize> = hp
        .attributes
        .values()
        .flat_map(|a| a.pieces.iter().map(|p| p.guard))
        .collect();
    let touches_attribute = |c: &Clause| {
        c.body
            .iter()
            .any(|l| l.atom().is_builtin() || hp.attributes.contains_key(&l.atom().key()))
    };
    for (i, s) in hp.program.statements.iter().enumerate() {
        match s {
            Statement::Clause(c) if guards.contains(&i) || hp.attributes.contains_key(&c.head.key()) => {}
            Statement::Clause(c) if !touches_attribute(c) => background.push(s.clone()),
            Statement::Prob(_) => background.push(s.clone()),
            _ => {}
        }
    }
    let var_types = ArgumentTypes::infer_merging_constants(&hp.program);
    let observed: BTreeMap<(PredKey, Vec<Term>), Vec<f64>> = hp
        .observations()
        .map(|o| {
            let attr = &hp.attributes[&o.key()];
            let key = attr.key_positions().iter().map(|&p| o.args[p].clone()).collect();
            let values = attr
                .continuous
                .iter()
                .map(|&p| o.args[p].as_number().unwrap_or(f64::NAN))
                .collect();
            ((o.key(), key), values)
        })
        .collect();
    let mut piece_order: Vec<PredKey> = Vec::new();
    for (key, attr) in &hp.attributes {
        let mut keys: BTreeSet<Vec<Term>> = observed
            .keys()
            .filter(|(k, _)| k == key)
            .map(|(_, t)| t.clone())
            .collect();
        keys.extend(product(
            &attr
                .key_positions()
                .iter()
                .map(|&p| var_types.domain(key, p))
                .collect::<Vec<_>>(),
        ));
        for k in keys {
            match observed.get(&(key.clone(), k.clone())) {
                Some(values) => {
                    let piece = containing_piece(attr, values).ok_or_else(|| {
                        Error::Contract(format!(
                            "observation {values:?} of {key} for {k:?} lies outside the density's support"
                        ))
                    })?;
                    let atom = piece_atom(hp, attr, piece, &k)?;
                    background.push(Statement::Clause(Clause::fact(atom)));
                }
                None => {
                    for piece in &attr.pieces {
                        background.push(Statement::Prob(ProbFact {
                            probability: piece.mass.clamp(0.0, 1.0),
                            atom: piece_atom(hp, attr, piece, &k)?,
                        }));
                    }
                }
            }
        }
        for piece in &attr.pieces {
            let atom = piece_atom(hp, attr, piece, &vec![Term::symbol("_"); attr.key_positions().len()])?;
            if !piece_order.contains(&atom.key()) {
                piece_order.push(atom.key());
            }
        }
    }

    let mut typing = background.clone();
    for e in examples {
        typing.push(Statement::Clause(Clause::fact(e.atom.clone())));
    }
    let types = ArgumentTypes::infer_merging_constants(&typing);

    let mut list: Vec<Example> = examples.to_vec();
    let labelled: BTreeSet<&Atom> = examples.iter().map(|e| &e.atom).collect();
    let domains: Vec<Vec<Term>> = (0..target.arity).map(|p| types.domain(target, p)).collect();
    let mut negatives = Vec::new();
    for args in product(&domains) {
        let atom = Atom::new(target.name.as_str(), args);
        if !labelled.contains(&atom) {
            negatives.push(Example { atom, positive: false });
        }
    }
    list.extend(negatives);

    let mut order: Vec<PredKey> = piece_order;
    for s in &background.statements {
        let key = match s {
            Statement::Clause(c) => c.head.key(),
            Statement::Prob(f) => f.atom.key(),
            _ => continue,
        };
        if !order.contains(&key) {
            order.push(key);
        }
    }
    let mut names: BTreeMap<usize, String> = BTreeMap::new();
    let mut name_of = |id: Option<usize>| -> String {
        let Some(id) = id else { return String::from("any") };
        let next = names.len() + 1;
        names.entry(id).or_insert_with(|| format!("t{next}")).clone()
    };
    let mut type_table = BTreeMap::new();
    for key in core::iter::once(target).chain(&order) {
        let t: Vec<String> = (0..key.arity).map(|p| name_of(types.type_of(key, p))).collect();
        type_table.insert(key.clone(), t);
    }
    let mut modes = Vec::new();
    for key in &order {
        for args in directions(key.arity) {
            modes.push(Mode {
                predicate: key.clone(),
                args,
            });
        }
    }
    Ok(LearningTask {
        target: target.clone(),
        background,
        examples: list,
        bias: Bias {
            target: target.clone(),
            types: type_table,
            modes,
        },
    })
}

/// Direction vectors with at least one input, all inputs first, then by the
/// number of outputs.
fn directions(arity: usize) -> Vec<Vec<Direction>> {
    let mut all: Vec<Vec<Direction>> = (0..1usize << arity)
        .map(|mask| {
            (0..arity)
                .map(|i| {
                    if mask >> i & 1 == 1 {
                        Direction::Out
                    } else {
                        Direction::In
                    }
                })
                .collect()
        })
        .filter(|d: &Vec<Direction>| arity == 0 || d.contains(&Direction::In))
        .collect();
    all.sort_by_key(|d| (d.iter().filter(|x| **x == Direction::Out).count(), d.clone()));
    all
}

fn product(domains: &[Vec<Term>]) -> Vec<Vec<Term>> {
    let mut out = vec![Vec::new()];
    for d in domains {
        let mut next = Vec::with_capacity(out.len() * d.len());
        for prefix in &out {
            for t in d {
                let mut p = prefix.clone();
                p.push(t.clone());
                next.push(p);
            }
        }
        out = next;
    }
    out
}

/// The piece whose box holds `values`; boxes are half-open except at the
/// upper end of the support.
fn containing_piece<'a>(attr: &'a Attribute, values: &[f64]) -> Option<&'a Piece> {
    let inside = |p: &&Piece, closed: bool| {
        p.bounds
            .iter()
            .zip(values)
            .all(|(&(lo, hi), &v)| lo <= v && (v < hi || (closed && v == hi)))
    };
    attr.pieces
        .iter()
        .find(|p| inside(p, false))
        .or_else(|| attr.pieces.iter().find(|p| inside(p, true)))
}

/// The guard head of `piece` for the instance `key`, without its continuous
/// arguments.
fn piece_atom(hp: &HybridProgram, attr: &Attribute, piece: &Piece, key: &[Term]) -> Result<Atom> {
    let Statement::Clause(guard) = &hp.program.statements[piece.guard] else {
        return Err(Error::Contract(format!(
            "piece {} has no guard clause",
            piece.predicate
        )));
    };
    let attr_atom = guard
        .body
        .iter()
        .map(Literal::atom)
        .find(|a| a.key() == attr.key)
        .ok_or_else(|| Error::Contract(format!("guard of {} does not mention {}", piece.predicate, attr.key)))?;
    let mut theta = Substitution::new();
    for (k, &pos) in attr.key_positions().iter().enumerate() {
        if let Term::Var(v) = &attr_atom.args[pos] {
            theta.insert(v.clone(), key[k].clone());
        }
    }
    let continuous: Vec<&Term> = attr.continuous.iter().map(|&p| &attr_atom.args[p]).collect();
    let args: Vec<Term> = guard
        .head
        .args
        .iter()
        .filter(|t| !continuous.contains(t))
        .map(|t| substitute_term(t, &theta))
        .collect();
    Ok(Atom::new(piece.predicate.name.as_str(), args))
}
