use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use super::EngineOptions;
use crate::error::{Error, Result};
use crate::program::{
    substitute, substitute_term, ArgumentTypes, Atom, Clause, HybridProgram, Literal, PredKey, Substitution, Term,
};

/// One random value of a continuous attribute, identified by its key arguments.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Instance {
    pub attribute: PredKey,
    pub key: Vec<Term>,
}

/// A comparison builtin on one axis of an instance, as the closed interval
/// `[lo, hi]` it accepts.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundBuiltin {
    pub atom: Atom,
    pub instance: usize,
    pub axis: usize,
    pub lo: f64,
    pub hi: f64,
}

impl GroundBuiltin {
    /// Truth on the cell `[lo, hi]`, or `None` when the interval cuts the cell.
    pub fn holds(&self, cell: (f64, f64)) -> Option<bool> {
        if self.lo <= cell.0 && cell.1 <= self.hi {
            Some(true)
        } else if cell.1 <= self.lo || cell.0 >= self.hi {
            Some(false)
        } else {
            None
        }
    }
}

/// A ground rule over interned atoms and builtins.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct GroundClause {
    pub head: usize,
    pub positive: Vec<usize>,
    pub negative: Vec<usize>,
    /// Builtin index and whether the literal is positive.
    pub builtins: Vec<(usize, bool)>,
}

/// A query or evidence atom with the ground atoms it may stand for.
///
/// A non-ground goal holds when any of its alternatives holds.
#[derive(Debug, Clone, PartialEq)]
pub struct Goal {
    pub atom: Atom,
    pub alternatives: Vec<usize>,
}

/// The part of a program's grounding that is relevant to its goals.
#[derive(Debug, Clone)]
pub struct GroundProgram {
    pub atoms: Vec<Atom>,
    /// Negation stratum of each atom's predicate.
    pub strata: Vec<usize>,
    pub clauses: Vec<GroundClause>,
    /// Atoms that hold in every world.
    pub facts: Vec<usize>,
    /// Independent probabilistic choices: atom and probability.
    pub choices: Vec<(usize, f64)>,
    pub builtins: Vec<GroundBuiltin>,
    pub instances: Vec<Instance>,
    pub goals: Vec<Goal>,
    index: BTreeMap<Atom, usize>,
    by_head: Vec<Vec<usize>>,
}

impl GroundProgram {
    pub fn atom_id(&self, atom: &Atom) -> Option<usize> {
        self.index.get(atom).copied()
    }

    pub fn goal(&self, atom: &Atom) -> Option<&Goal> {
        self.goals.iter().find(|g| g.atom == *atom)
    }

    /// Indices of the clauses with head `atom`.
    pub fn clauses_for(&self, atom: usize) -> &[usize] {
        &self.by_head[atom]
    }
}

/// Grounds `hp` relevant to its queries and evidence.
pub fn ground(hp: &HybridProgram, options: &EngineOptions) -> Result<GroundProgram> {
    let goals: Vec<Atom> = hp
        .queries()
        .cloned()
        .chain(hp.evidence().map(|l| l.atom().clone()))
        .collect();
    ground_goals(hp, &goals, options)
}

/// Grounds `hp` relevant to `goals`.
///
/// Continuous arguments of unobserved attribute instances are bound to value
/// terms, which builtins compare against the cells of the instance. An
/// attribute literal whose key is not bound ranges over the key's type domain.
pub fn ground_goals(hp: &HybridProgram, goals: &[Atom], options: &EngineOptions) -> Result<GroundProgram> {
    let mut g = Grounder::new(hp, options)?;
    let rules = hp
        .clauses()
        .filter(|c| !c.is_fact())
        .map(|c| Rule::new(hp, c))
        .collect::<Result<Vec<_>>>()?;
    for c in hp.clauses().filter(|c| c.is_fact()) {
        for atom in g.expand(&c.head)? {
            let id = g.intern(atom)?;
            g.mark_possible(id);
            g.facts.insert(id);
        }
    }
    for f in hp.prob_facts() {
        for atom in g.expand(&f.atom)? {
            let id = g.intern(atom)?;
            g.mark_possible(id);
            g.choices.push((id, f.probability));
        }
    }
    loop {
        let before = g.possible_count;
        for rule in &rules {
            let mut acc = Partial::default();
            g.solve(rule, 0, &mut Substitution::new(), &mut acc)?;
        }
        if g.possible_count == before {
            break;
        }
    }
    g.finish(goals)
}

enum Lit {
    Ordinary(Atom),
    Attribute {
        atom: Atom,
        key: Vec<usize>,
        continuous: Vec<usize>,
    },
    Builtin(Atom, bool),
    Negated(Atom),
}

struct Rule {
    clause: Clause,
    body: Vec<Lit>,
}

impl Rule {
    /// Orders the body so that ordinary atoms bind keys before attributes,
    /// and builtins and negations run last.
    fn new(hp: &HybridProgram, clause: &Clause) -> Result<Rule> {
        let mut ordinary = Vec::new();
        let mut attributes = Vec::new();
        let mut checks = Vec::new();
        for lit in &clause.body {
            let a = lit.atom();
            let attribute = hp.attributes.get(&a.key());
            match (lit, attribute) {
                (Literal::Pos(a), _) if a.is_builtin() => checks.push(Lit::Builtin(a.clone(), true)),
                (Literal::Neg(a), _) if a.is_builtin() => checks.push(Lit::Builtin(a.clone(), false)),
                (Literal::Pos(a), Some(attr)) => attributes.push(Lit::Attribute {
                    atom: a.clone(),
                    key: attr.key_positions(),
                    continuous: attr.continuous.clone(),
                }),
                (Literal::Neg(a), Some(_)) => {
                    return Err(Error::Semantic(format!(
                        "negated attribute literal `\\+ {a}` in `{clause}`"
                    )))
                }
                (Literal::Pos(a), None) => ordinary.push(Lit::Ordinary(a.clone())),
                (Literal::Neg(a), None) => checks.push(Lit::Negated(a.clone())),
            }
        }
        ordinary.extend(attributes);
        ordinary.extend(checks);
        Ok(Rule {
            clause: clause.clone(),
            body: ordinary,
        })
    }
}

#[derive(Default)]
struct Partial {
    positive: Vec<usize>,
    negative: Vec<usize>,
    builtins: Vec<(usize, bool)>,
}

enum Check {
    Static(bool),
    Dynamic(usize),
}

struct Grounder<'a> {
    hp: &'a HybridProgram,
    options: &'a EngineOptions,
    types: ArgumentTypes,
    atoms: Vec<Atom>,
    index: BTreeMap<Atom, usize>,
    possible: Vec<bool>,
    possible_count: usize,
    by_predicate: BTreeMap<PredKey, Vec<usize>>,
    facts: BTreeSet<usize>,
    choices: Vec<(usize, f64)>,
    instances: Vec<Instance>,
    instance_index: BTreeMap<Instance, usize>,
    values: BTreeMap<Term, (usize, usize)>,
    observed: BTreeMap<Instance, Vec<f64>>,
    builtins: Vec<GroundBuiltin>,
    builtin_index: BTreeMap<Atom, usize>,
    clauses: BTreeSet<GroundClause>,
}

impl<'a> Grounder<'a> {
    fn new(hp: &'a HybridProgram, options: &'a EngineOptions) -> Result<Grounder<'a>> {
        let mut observed: BTreeMap<Instance, Vec<f64>> = BTreeMap::new();
        for obs in hp.observations() {
            let attr = &hp.attributes[&obs.key()];
            let inst = Instance {
                attribute: attr.key.clone(),
                key: attr.key_positions().iter().map(|&p| obs.args[p].clone()).collect(),
            };
            let values: Vec<f64> = attr
                .continuous
                .iter()
                .map(|&p| obs.args[p].as_number().unwrap_or(f64::NAN))
                .collect();
            if let Some(prev) = observed.insert(inst, values.clone()) {
                if prev != values {
                    return Err(Error::Semantic(format!("conflicting observations for `{obs}`")));
                }
            }
        }
        Ok(Grounder {
            hp,
            options,
            types: ArgumentTypes::infer(&hp.program),
            atoms: Vec::new(),
            index: BTreeMap::new(),
            possible: Vec::new(),
            possible_count: 0,
            by_predicate: BTreeMap::new(),
            facts: BTreeSet::new(),
            choices: Vec::new(),
            instances: Vec::new(),
            instance_index: BTreeMap::new(),
            values: BTreeMap::new(),
            observed,
            builtins: Vec::new(),
            builtin_index: BTreeMap::new(),
            clauses: BTreeSet::new(),
        })
    }

    fn intern(&mut self, atom: Atom) -> Result<usize> {
        if let Some(&id) = self.index.get(&atom) {
            return Ok(id);
        }
        let depth = atom.args.iter().map(Term::depth).max().unwrap_or(0);
        if depth > self.options.max_term_depth {
            return Err(Error::InfiniteGrounding(format!(
                "`{atom}` nests terms deeper than {}",
                self.options.max_term_depth
            )));
        }
        if self.atoms.len() >= self.options.max_atoms {
            return Err(Error::InfiniteGrounding(format!(
                "more than {} ground atoms",
                self.options.max_atoms
            )));
        }
        let id = self.atoms.len();
        self.index.insert(atom.clone(), id);
        self.atoms.push(atom);
        self.possible.push(false);
        Ok(id)
    }

    fn mark_possible(&mut self, id: usize) {
        if !self.possible[id] {
            self.possible[id] = true;
            self.possible_count += 1;
            self.by_predicate.entry(self.atoms[id].key()).or_default().push(id);
        }
    }

    /// Ground instances of a fact over the type domains of its variables.
    fn expand(&self, atom: &Atom) -> Result<Vec<Atom>> {
        let mut out = Vec::new();
        let mut args = atom.args.clone();
        self.expand_at(atom, 0, &mut args, &mut Substitution::new(), &mut out)?;
        Ok(out)
    }

    fn expand_at(
        &self,
        atom: &Atom,
        i: usize,
        args: &mut Vec<Term>,
        theta: &mut Substitution,
        out: &mut Vec<Atom>,
    ) -> Result<()> {
        if i == atom.args.len() {
            out.push(Atom::new(atom.predicate.clone(), args.clone()));
            return Ok(());
        }
        match &atom.args[i] {
            Term::Var(v) if v != "_" && theta.contains_key(v) => {
                args[i] = theta[v].clone();
                self.expand_at(atom, i + 1, args, theta, out)
            }
            Term::Var(v) => {
                for d in self.types.domain(&atom.key(), i) {
                    args[i] = d.clone();
                    if v != "_" {
                        theta.insert(v.clone(), d);
                    }
                    self.expand_at(atom, i + 1, args, theta, out)?;
                }
                theta.remove(v);
                Ok(())
            }
            t if t.is_ground() => self.expand_at(atom, i + 1, args, theta, out),
            t => Err(Error::Semantic(format!(
                "fact `{atom}` has variables inside the compound term `{t}`"
            ))),
        }
    }

    fn instance(&mut self, inst: Instance, dimension: usize) -> Vec<Term> {
        let next = self.instances.len();
        let id = *self.instance_index.entry(inst.clone()).or_insert(next);
        let mut args = inst.key.clone();
        args.push(Term::number(0.0));
        let values: Vec<Term> = (0..dimension)
            .map(|axis| {
                let last = args.len() - 1;
                args[last] = Term::number(axis as f64);
                Term::Compound(format!("${}", inst.attribute.name), args.clone())
            })
            .collect();
        if id == next {
            for (axis, v) in values.iter().enumerate() {
                self.values.insert(v.clone(), (id, axis));
            }
            self.instances.push(inst);
        }
        values
    }

    fn builtin(&mut self, atom: Atom) -> Result<Check> {
        let bounds: Option<Vec<f64>> = atom.args[1..].iter().map(Term::as_number).collect();
        let bounds = bounds.ok_or_else(|| Error::Semantic(format!("`{atom}` needs numeric bounds")))?;
        if bounds.iter().any(|b| b.is_nan()) {
            return Err(Error::Contract(format!("`{atom}` compares against NaN")));
        }
        let (lo, hi) = match atom.predicate.as_str() {
            "below" => (f64::NEG_INFINITY, bounds[0]),
            "above" => (bounds[0], f64::INFINITY),
            _ => (bounds[0], bounds[1]),
        };
        if let Term::Number(x) = atom.args[0] {
            return Ok(Check::Static(lo <= x && x <= hi));
        }
        let Some(&(instance, axis)) = self.values.get(&atom.args[0]) else {
            return Ok(Check::Static(false));
        };
        if let Some(&id) = self.builtin_index.get(&atom) {
            return Ok(Check::Dynamic(id));
        }
        let id = self.builtins.len();
        self.builtin_index.insert(atom.clone(), id);
        self.builtins.push(GroundBuiltin {
            atom,
            instance,
            axis,
            lo,
            hi,
        });
        Ok(Check::Dynamic(id))
    }

    fn solve(&mut self, rule: &Rule, i: usize, theta: &mut Substitution, acc: &mut Partial) -> Result<()> {
        let Some(lit) = rule.body.get(i) else {
            let head = substitute(&rule.clause.head, theta);
            if !head.is_ground() {
                return Err(Error::Semantic(format!("unsafe clause `{}`", rule.clause)));
            }
            let head = self.intern(head)?;
            self.mark_possible(head);
            let mut clause = GroundClause {
                head,
                positive: acc.positive.clone(),
                negative: acc.negative.clone(),
                builtins: acc.builtins.clone(),
            };
            clause.positive.sort_unstable();
            clause.positive.dedup();
            clause.negative.sort_unstable();
            clause.negative.dedup();
            clause.builtins.sort_unstable();
            clause.builtins.dedup();
            self.clauses.insert(clause);
            return Ok(());
        };
        match lit {
            Lit::Ordinary(a) => {
                let pattern = substitute(a, theta);
                if pattern.is_ground() {
                    if let Some(&id) = self.index.get(&pattern) {
                        if self.possible[id] {
                            acc.positive.push(id);
                            self.solve(rule, i + 1, theta, acc)?;
                            acc.positive.pop();
                        }
                    }
                    return Ok(());
                }
                let candidates = self.by_predicate.get(&pattern.key()).cloned().unwrap_or_default();
                for id in candidates {
                    let mut next = theta.clone();
                    if match_atom(&pattern, &self.atoms[id], &mut next) {
                        acc.positive.push(id);
                        self.solve(rule, i + 1, &mut next, acc)?;
                        acc.positive.pop();
                    }
                }
            }
            Lit::Attribute { atom, key, continuous } => {
                let mut keys: Vec<(Vec<Term>, Substitution)> = vec![(Vec::new(), theta.clone())];
                for &p in key {
                    let mut next = Vec::new();
                    for (k, th) in keys {
                        let t = substitute_term(&atom.args[p], &th);
                        if t.is_ground() {
                            let mut k = k;
                            k.push(t);
                            next.push((k, th));
                            continue;
                        }
                        for d in self.types.domain(&atom.key(), p) {
                            let mut th2 = th.clone();
                            if match_term(&t, &d, &mut th2) {
                                let mut k2 = k.clone();
                                k2.push(d);
                                next.push((k2, th2));
                            }
                        }
                    }
                    keys = next;
                }
                for (k, mut th) in keys {
                    let inst = Instance {
                        attribute: atom.key(),
                        key: k,
                    };
                    let values: Vec<Term> = match self.observed.get(&inst) {
                        Some(obs) => obs.iter().map(|&x| Term::number(x)).collect(),
                        None => self.instance(inst, continuous.len()),
                    };
                    let matched = continuous
                        .iter()
                        .zip(&values)
                        .all(|(&p, v)| match_term(&atom.args[p], v, &mut th));
                    if matched {
                        self.solve(rule, i + 1, &mut th, acc)?;
                    }
                }
            }
            Lit::Builtin(a, positive) => {
                let atom = substitute(a, theta);
                if !atom.is_ground() {
                    return Err(Error::Semantic(format!("unsafe clause `{}`", rule.clause)));
                }
                match self.builtin(atom)? {
                    Check::Static(b) => {
                        if b == *positive {
                            self.solve(rule, i + 1, theta, acc)?;
                        }
                    }
                    Check::Dynamic(id) => {
                        acc.builtins.push((id, *positive));
                        self.solve(rule, i + 1, theta, acc)?;
                        acc.builtins.pop();
                    }
                }
            }
            Lit::Negated(a) => {
                let atom = substitute(a, theta);
                if !atom.is_ground() {
                    return Err(Error::Semantic(format!("unsafe clause `{}`", rule.clause)));
                }
                let id = self.intern(atom)?;
                acc.negative.push(id);
                self.solve(rule, i + 1, theta, acc)?;
                acc.negative.pop();
            }
        }
        Ok(())
    }

    /// Resolves goals and keeps only clauses and choices they depend on.
    fn finish(mut self, goal_atoms: &[Atom]) -> Result<GroundProgram> {
        let mut goals = Vec::new();
        for atom in goal_atoms {
            if self.hp.attributes.contains_key(&atom.key()) {
                return Err(Error::Semantic(format!(
                    "cannot query the attribute `{atom}` directly; query a rule that constrains it"
                )));
            }
            let alternatives: Vec<usize> = self
                .by_predicate
                .get(&atom.key())
                .map(|ids| {
                    ids.iter()
                        .copied()
                        .filter(|&id| match_atom(atom, &self.atoms[id], &mut Substitution::new()))
                        .collect()
                })
                .unwrap_or_default();
            goals.push(Goal {
                atom: atom.clone(),
                alternatives,
            });
        }

        let mut by_head_all: BTreeMap<usize, Vec<&GroundClause>> = BTreeMap::new();
        for c in &self.clauses {
            by_head_all.entry(c.head).or_default().push(c);
        }
        let mut relevant = vec![false; self.atoms.len()];
        let mut stack: Vec<usize> = goals.iter().flat_map(|g| g.alternatives.iter().copied()).collect();
        let mut kept: Vec<GroundClause> = Vec::new();
        while let Some(a) = stack.pop() {
            if core::mem::replace(&mut relevant[a], true) {
                continue;
            }
            for c in by_head_all.get(&a).into_iter().flatten() {
                stack.extend(c.positive.iter().chain(&c.negative).copied());
                kept.push((*c).clone());
            }
        }
        let mut builtin_map = vec![usize::MAX; self.builtins.len()];
        let mut instance_map = vec![usize::MAX; self.instances.len()];
        let mut builtins = Vec::new();
        let mut instances = Vec::new();
        for c in &mut kept {
            for (b, _) in &mut c.builtins {
                if builtin_map[*b] == usize::MAX {
                    let mut gb = self.builtins[*b].clone();
                    if instance_map[gb.instance] == usize::MAX {
                        instance_map[gb.instance] = instances.len();
                        instances.push(self.instances[gb.instance].clone());
                    }
                    gb.instance = instance_map[gb.instance];
                    builtin_map[*b] = builtins.len();
                    builtins.push(gb);
                }
                *b = builtin_map[*b];
            }
        }
        kept.sort();
        let mut by_head = vec![Vec::new(); self.atoms.len()];
        for (i, c) in kept.iter().enumerate() {
            by_head[c.head].push(i);
        }
        self.choices.retain(|(a, _)| relevant[*a]);
        let facts = self.facts.iter().copied().filter(|&a| relevant[a]).collect();
        let strata = self.atoms.iter().map(|a| self.hp.stratum(&a.key())).collect();
        Ok(GroundProgram {
            atoms: self.atoms,
            strata,
            clauses: kept,
            facts,
            choices: self.choices,
            builtins,
            instances,
            goals,
            index: self.index,
            by_head,
        })
    }
}

fn match_term(pattern: &Term, ground: &Term, theta: &mut Substitution) -> bool {
    match (pattern, ground) {
        (Term::Var(v), _) if v == "_" => true,
        (Term::Var(v), _) => match theta.get(v) {
            Some(t) => t == ground,
            None => {
                theta.insert(String::from(v.as_str()), ground.clone());
                true
            }
        },
        (Term::Compound(f, args), Term::Compound(g, gargs)) => {
            f == g && args.len() == gargs.len() && args.iter().zip(gargs).all(|(a, b)| match_term(a, b, theta))
        }
        _ => pattern == ground,
    }
}

/// One-way matching of `pattern` onto the ground atom `ground`, extending `theta`.
pub(crate) fn match_atom(pattern: &Atom, ground: &Atom, theta: &mut Substitution) -> bool {
    pattern.predicate == ground.predicate
        && pattern.args.len() == ground.args.len()
        && pattern
            .args
            .iter()
            .zip(&ground.args)
            .all(|(p, g)| match_term(p, g, theta))
}
