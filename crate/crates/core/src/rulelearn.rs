//! FOIL-style rule induction on expected counts.
//!
//! Clauses for the target are learned one at a time. Each clause starts with
//! an empty body and greedily takes the bias literal with the highest FOIL
//! gain until its precision reaches the threshold. Background facts are
//! probabilistic: a body holds for a substitution with the product of its
//! literal probabilities, and an example is covered by the noisy-or over
//! substitutions. Positives covered by accepted clauses lose weight.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::engine::{marginals, match_atom, EngineOptions};
use crate::error::{Error, Result};
use crate::math;
use crate::program::{load, substitute, Atom, Clause, Literal, PredKey, Program, Statement, Substitution, Term};
use crate::transform::{Direction, Example, LearningTask, Mode};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InduceOptions {
    /// A clause is accepted once its expected precision reaches this.
    pub precision: f64,
    /// Longest clause body.
    pub max_body: usize,
    /// Used to compute the marginals of derived background atoms.
    pub engine: EngineOptions,
}

impl Default for InduceOptions {
    fn default() -> Self {
        InduceOptions {
            precision: 0.99,
            max_body: 4,
            engine: EngineOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClauseStats {
    /// Expected precision on the example weights the clause was learned on.
    pub precision: f64,
    pub body_length: usize,
    pub negations: usize,
    /// Expected positives covered, all positives weighted one.
    pub true_positives: f64,
    /// Expected negatives covered.
    pub false_positives: f64,
    /// Accepted below the precision threshold because it still improved
    /// the hypothesis; no clause follows it.
    pub best_effort: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Hypothesis {
    pub target: PredKey,
    pub clauses: Vec<Clause>,
    pub stats: Vec<ClauseStats>,
    /// Positives whose coverage under the hypothesis stays below one half.
    pub residual: Vec<Atom>,
}

impl Hypothesis {
    pub fn program(&self) -> Program {
        Program::new(self.clauses.iter().cloned().map(Statement::Clause).collect())
    }
}

/// Expected coverage of every example under a hypothesis.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverageTable {
    pub examples: Vec<Example>,
    pub weights: Vec<f64>,
}

/// Averages over the rules of a hypothesis; absent when it has no rules.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Score {
    pub precision: Option<f64>,
    pub negations: Option<f64>,
    pub predicates: Option<f64>,
    pub rules: usize,
}

/// Runs the candidate evaluations of one refinement step.
pub trait Executor {
    /// Returns `f(0), .., f(n - 1)` in order.
    fn map(&self, n: usize, f: &(dyn Fn(usize) -> Vec<f64> + Sync)) -> Vec<Vec<f64>>;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl Executor for Sequential {
    fn map(&self, n: usize, f: &(dyn Fn(usize) -> Vec<f64> + Sync)) -> Vec<Vec<f64>> {
        (0..n).map(f).collect()
    }
}

/// Probabilities of the ground background atoms that can be true.
#[derive(Debug, Clone)]
pub struct Background {
    by_predicate: BTreeMap<PredKey, Vec<(Atom, f64)>>,
    probability: BTreeMap<Atom, f64>,
}

impl Background {
    /// Marginals of every atom of the predicates in `predicates`.
    pub fn new(program: &Program, predicates: &[PredKey], options: &EngineOptions) -> Result<Background> {
        let hp = load(program.clone())?;
        let patterns: Vec<Atom> = predicates
            .iter()
            .map(|k| {
                Atom::new(
                    k.name.as_str(),
                    (0..k.arity).map(|i| Term::var(format!("V{i}"))).collect(),
                )
            })
            .collect();
        let mut by_predicate: BTreeMap<PredKey, Vec<(Atom, f64)>> = BTreeMap::new();
        let mut probability = BTreeMap::new();
        for (atom, p) in marginals(&hp, &patterns, options)? {
            if p > 0.0 {
                by_predicate.entry(atom.key()).or_default().push((atom.clone(), p));
                probability.insert(atom, p);
            }
        }
        Ok(Background {
            by_predicate,
            probability,
        })
    }

    pub fn probability(&self, atom: &Atom) -> f64 {
        self.probability.get(atom).copied().unwrap_or(0.0)
    }

    /// Extends each weighted substitution by one body literal.
    fn extend(&self, bindings: &[(Substitution, f64)], literal: &Literal) -> Vec<(Substitution, f64)> {
        let mut out = Vec::new();
        for (theta, w) in bindings {
            let atom = substitute(literal.atom(), theta);
            match literal {
                Literal::Neg(_) => {
                    let q = 1.0 - self.probability(&atom);
                    if q > 0.0 {
                        out.push((theta.clone(), w * q));
                    }
                }
                Literal::Pos(_) if atom.is_ground() => {
                    let q = self.probability(&atom);
                    if q > 0.0 {
                        out.push((theta.clone(), w * q));
                    }
                }
                Literal::Pos(_) => {
                    for (fact, q) in self.by_predicate.get(&atom.key()).map(Vec::as_slice).unwrap_or(&[]) {
                        let mut next = theta.clone();
                        if match_atom(&atom, fact, &mut next) {
                            out.push((next, w * q));
                        }
                    }
                }
            }
        }
        out
    }

    /// Probability that some substitution satisfies the body.
    pub fn clause_coverage(&self, clause: &Clause, example: &Atom) -> f64 {
        let Some(theta) = head_binding(&clause.head, example) else {
            return 0.0;
        };
        let mut bindings = vec![(theta, 1.0)];
        for lit in &clause.body {
            bindings = self.extend(&bindings, lit);
        }
        noisy_or(&bindings)
    }
}

fn head_binding(head: &Atom, example: &Atom) -> Option<Substitution> {
    let mut theta = Substitution::new();
    match_atom(head, example, &mut theta).then_some(theta)
}

fn noisy_or(bindings: &[(Substitution, f64)]) -> f64 {
    1.0 - bindings.iter().map(|(_, w)| 1.0 - w).product::<f64>()
}

/// Learns clauses for the task's target with sequential candidate evaluation.
pub fn induce(task: &LearningTask, options: &InduceOptions) -> Result<Hypothesis> {
    induce_with(task, options, &Sequential)
}

/// Learns clauses for the task's target.
///
/// Ties between candidate literals go to the one declared first in the bias.
pub fn induce_with(task: &LearningTask, options: &InduceOptions, executor: &dyn Executor) -> Result<Hypothesis> {
    let modes: Vec<&Mode> = task.bias.modes.iter().filter(|m| m.predicate != task.target).collect();
    if modes.is_empty() {
        return Err(Error::Contract(format!("the bias for {} has no modes", task.target)));
    }
    if task.positives().next().is_none() {
        return Err(Error::Contract(format!("no positive examples for {}", task.target)));
    }
    let head_types = task
        .bias
        .types
        .get(&task.target)
        .ok_or_else(|| Error::Contract(format!("the bias does not type {}", task.target)))?;
    let mut predicates: Vec<PredKey> = Vec::new();
    for m in &modes {
        if !task.bias.types.contains_key(&m.predicate) {
            return Err(Error::Contract(format!("mode for untyped predicate {}", m.predicate)));
        }
        if !predicates.contains(&m.predicate) {
            predicates.push(m.predicate.clone());
        }
    }
    let background = Background::new(&task.background, &predicates, &options.engine)?;
    let learner = Learner {
        task,
        options,
        executor,
        background: &background,
        modes,
        head_types,
    };
    learner.run()
}

struct Learner<'a> {
    task: &'a LearningTask,
    options: &'a InduceOptions,
    executor: &'a dyn Executor,
    background: &'a Background,
    modes: Vec<&'a Mode>,
    head_types: &'a [String],
}

/// A clause under refinement with the substitutions of every example.
#[derive(Clone)]
struct Draft {
    /// Type of each variable, indexed by its number.
    vars: Vec<String>,
    body: Vec<Literal>,
    /// Literal shape already used: mode, input variables and sign.
    used: Vec<(usize, Vec<usize>, bool)>,
    /// Variables occurring in a positive body literal.
    bound: Vec<bool>,
    bindings: Vec<Vec<(Substitution, f64)>>,
}

struct Candidate {
    mode: usize,
    inputs: Vec<usize>,
    literal: Literal,
    new_vars: Vec<String>,
}

fn var_name(i: usize) -> String {
    if i < 26 {
        String::from(char::from(b'A' + i as u8))
    } else {
        format!("V{i}")
    }
}

fn compatible(a: &str, b: &str) -> bool {
    a == b || a == "any" || b == "any"
}

impl Learner<'_> {
    fn run(&self) -> Result<Hypothesis> {
        let examples = &self.task.examples;
        let mut residual: Vec<f64> = examples.iter().map(|e| if e.positive { 1.0 } else { 0.0 }).collect();
        let mut covered = vec![0.0; examples.len()];
        let mut clauses = Vec::new();
        let mut stats = Vec::new();
        let limit = examples.iter().filter(|e| e.positive).count();
        while clauses.len() < limit && residual.iter().sum::<f64>() > 1e-9 {
            let Some((clause, coverage, precision)) = self.learn_clause(&residual) else {
                break;
            };
            let next: Vec<f64> = covered
                .iter()
                .zip(&coverage)
                .map(|(h, c)| 1.0 - (1.0 - h) * (1.0 - c))
                .collect();
            if !(self.global(&next) > self.global(&covered) + 1e-12) {
                break;
            }
            let precise = precision >= self.options.precision;
            let (tp, fp) = self.counts(&coverage, &vec![1.0; examples.len()]);
            stats.push(ClauseStats {
                precision,
                body_length: clause.body.len(),
                negations: clause.body.iter().filter(|l| l.is_negative()).count(),
                true_positives: tp,
                false_positives: fp,
                best_effort: !precise,
            });
            clauses.push(clause);
            for (r, c) in residual.iter_mut().zip(&coverage) {
                *r *= 1.0 - c;
            }
            covered = next;
            if !precise {
                break;
            }
        }
        Ok(Hypothesis {
            target: self.task.target.clone(),
            clauses,
            stats,
            residual: examples
                .iter()
                .zip(&covered)
                .filter(|(e, &c)| e.positive && c < 0.5)
                .map(|(e, _)| e.atom.clone())
                .collect(),
        })
    }

    /// Expected true positives minus expected false positives.
    fn global(&self, coverage: &[f64]) -> f64 {
        let (tp, fp) = self.counts(coverage, &vec![1.0; coverage.len()]);
        tp - fp
    }

    /// Weighted positive and negative coverage.
    fn counts(&self, coverage: &[f64], weights: &[f64]) -> (f64, f64) {
        let mut p = 0.0;
        let mut n = 0.0;
        for ((e, c), w) in self.task.examples.iter().zip(coverage).zip(weights) {
            if e.positive {
                p += w * c;
            } else {
                n += c;
            }
        }
        (p, n)
    }

    /// Greedy refinement from the empty body. Returns the clause, its
    /// coverage of every example and its weighted precision.
    ///
    /// When no single literal has positive gain, a literal introducing new
    /// variables may be taken together with the best literal that follows it.
    fn learn_clause(&self, residual: &[f64]) -> Option<(Clause, Vec<f64>, f64)> {
        let head = Atom::new(
            self.task.target.name.as_str(),
            (0..self.head_types.len()).map(|i| Term::var(var_name(i))).collect(),
        );
        let mut draft = Draft {
            vars: self.head_types.to_vec(),
            body: Vec::new(),
            used: Vec::new(),
            bound: vec![false; self.head_types.len()],
            bindings: self
                .task
                .examples
                .iter()
                .map(|e| head_binding(&head, &e.atom).map(|t| vec![(t, 1.0)]).unwrap_or_default())
                .collect(),
        };
        let mut coverage: Vec<f64> = draft.bindings.iter().map(|b| noisy_or(b)).collect();
        let (mut p0, mut n0) = self.counts(&coverage, residual);
        loop {
            let safe = draft.bound.iter().all(|&b| b);
            if draft.body.len() >= self.options.max_body || (safe && p0 / (p0 + n0) >= self.options.precision) {
                break;
            }
            let candidates = self.candidates(&draft);
            let results = self.evaluate(&draft, &candidates);
            let best = self.best(&results, residual, p0, n0);
            if let Some((i, gain, p1, n1)) = best {
                if !safe || gain > 0.0 {
                    draft = self.apply(&draft, &candidates[i]);
                    coverage = results.into_iter().nth(i).unwrap_or_default();
                    (p0, n0) = (p1, n1);
                    continue;
                }
            }
            if draft.body.len() + 2 > self.options.max_body {
                break;
            }
            let Some((next, cov, p2, n2)) = self.lookahead(&draft, &candidates, &results, residual, p0, n0) else {
                break;
            };
            draft = next;
            coverage = cov;
            (p0, n0) = (p2, n2);
        }
        if draft.body.is_empty() || !draft.bound.iter().all(|&b| b) {
            return None;
        }
        let precision = p0 / (p0 + n0);
        Some((Clause::new(head, draft.body), coverage, precision))
    }

    /// Coverage of every example by the draft extended with each candidate.
    fn evaluate(&self, draft: &Draft, candidates: &[Candidate]) -> Vec<Vec<f64>> {
        let evaluate = |i: usize| -> Vec<f64> {
            draft
                .bindings
                .iter()
                .map(|b| noisy_or(&self.background.extend(b, &candidates[i].literal)))
                .collect()
        };
        self.executor.map(candidates.len(), &evaluate)
    }

    /// The first candidate with the highest gain among those covering some
    /// positive weight, with its gain and counts.
    fn best(&self, results: &[Vec<f64>], residual: &[f64], p0: f64, n0: f64) -> Option<(usize, f64, f64, f64)> {
        let mut best: Option<(usize, f64, f64, f64)> = None;
        for (i, cov) in results.iter().enumerate() {
            let (p1, n1) = self.counts(cov, residual);
            if !(p1 > 0.0) {
                continue;
            }
            let gain = foil_gain(p0, n0, p1, n1);
            if best.is_none_or(|(_, g, _, _)| gain > g) {
                best = Some((i, gain, p1, n1));
            }
        }
        best
    }

    /// The best pair of a variable-introducing literal and a follow-up
    /// literal, if their combined gain is positive.
    fn lookahead(
        &self,
        draft: &Draft,
        candidates: &[Candidate],
        results: &[Vec<f64>],
        residual: &[f64],
        p0: f64,
        n0: f64,
    ) -> Option<(Draft, Vec<f64>, f64, f64)> {
        let mut best: Option<(f64, Draft, Vec<f64>, f64, f64)> = None;
        for (c, cov) in candidates.iter().zip(results) {
            if c.new_vars.is_empty() || !(self.counts(cov, residual).0 > 0.0) {
                continue;
            }
            let first = self.apply(draft, c);
            let follow = self.candidates(&first);
            let follow_results = self.evaluate(&first, &follow);
            let Some((j, _, p2, n2)) = self.best(&follow_results, residual, p0, n0) else {
                continue;
            };
            let gain = foil_gain(p0, n0, p2, n2);
            if gain > 0.0 && best.as_ref().is_none_or(|(g, ..)| gain > *g) {
                let second = self.apply(&first, &follow[j]);
                let cov = follow_results.into_iter().nth(j).unwrap_or_default();
                best = Some((gain, second, cov, p2, n2));
            }
        }
        best.map(|(_, d, cov, p, n)| (d, cov, p, n))
    }

    fn apply(&self, draft: &Draft, c: &Candidate) -> Draft {
        let mut next = draft.clone();
        next.bindings = draft
            .bindings
            .iter()
            .map(|b| self.background.extend(b, &c.literal))
            .collect();
        next.vars.extend(c.new_vars.iter().cloned());
        next.bound.resize(next.vars.len(), false);
        if let Literal::Pos(a) = &c.literal {
            for v in a.vars() {
                if let Some(i) = (0..next.vars.len()).find(|&i| var_name(i) == v) {
                    next.bound[i] = true;
                }
            }
        }
        next.used.push((c.mode, c.inputs.clone(), c.literal.is_negative()));
        next.body.push(c.literal.clone());
        next
    }

    /// Bias literals that can extend the draft, in bias order; each positive
    /// literal is followed by its negation when the mode allows it and its
    /// variables already occur positively.
    fn candidates(&self, draft: &Draft) -> Vec<Candidate> {
        let mut out = Vec::new();
        for (mi, mode) in self.modes.iter().enumerate() {
            let types = &self.task.bias.types[&mode.predicate];
            let slots: Vec<Vec<usize>> = mode
                .args
                .iter()
                .zip(types)
                .filter(|(d, _)| **d == Direction::In)
                .map(|(_, t)| {
                    (0..draft.vars.len())
                        .filter(|&v| compatible(&draft.vars[v], t))
                        .collect()
                })
                .collect();
            for inputs in assignments(&slots) {
                let mut next = draft.vars.len();
                let mut new_vars = Vec::new();
                let mut ins = inputs.iter();
                let args = mode
                    .args
                    .iter()
                    .zip(types)
                    .map(|(d, t)| {
                        let v = match d {
                            Direction::In => *ins.next().unwrap_or(&0),
                            Direction::Out => {
                                new_vars.push(t.clone());
                                next += 1;
                                next - 1
                            }
                        };
                        Term::var(var_name(v))
                    })
                    .collect();
                let atom = Atom::new(mode.predicate.name.as_str(), args);
                let mut signs = vec![false];
                if mode.negatable() && inputs.iter().all(|&v| draft.bound[v]) {
                    signs.push(true);
                }
                for negated in signs {
                    if draft.used.contains(&(mi, inputs.clone(), negated)) {
                        continue;
                    }
                    out.push(Candidate {
                        mode: mi,
                        inputs: inputs.clone(),
                        literal: if negated {
                            Literal::Neg(atom.clone())
                        } else {
                            Literal::Pos(atom.clone())
                        },
                        new_vars: if negated { Vec::new() } else { new_vars.clone() },
                    });
                }
            }
        }
        out
    }
}

fn foil_gain(p0: f64, n0: f64, p1: f64, n1: f64) -> f64 {
    p1 * (math::log2(p1 / (p1 + n1)) - math::log2(p0 / (p0 + n0)))
}

/// Every choice of one element per slot, first slot varying slowest.
fn assignments(slots: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for s in slots {
        let mut next = Vec::with_capacity(out.len() * s.len());
        for prefix in &out {
            for &v in s {
                let mut p = prefix.clone();
                p.push(v);
                next.push(p);
            }
        }
        out = next;
    }
    out
}

/// Expected coverage of each example under the noisy-or of `h`'s clauses.
pub fn coverage(h: &Hypothesis, task: &LearningTask, options: &EngineOptions) -> Result<CoverageTable> {
    let mut predicates: Vec<PredKey> = Vec::new();
    for c in &h.clauses {
        for l in &c.body {
            let k = l.atom().key();
            if k == task.target {
                return Err(Error::Contract(format!("clause `{c}` is recursive on {k}")));
            }
            if !predicates.contains(&k) {
                predicates.push(k);
            }
        }
    }
    let background = Background::new(&task.background, &predicates, options)?;
    let weights = task
        .examples
        .iter()
        .map(|e| {
            1.0 - h
                .clauses
                .iter()
                .map(|c| 1.0 - background.clause_coverage(c, &e.atom))
                .product::<f64>()
        })
        .collect();
    Ok(CoverageTable {
        examples: task.examples.clone(),
        weights,
    })
}

/// Mean rule precision, negations and body literals, and the rule count.
pub fn score_hypothesis(h: &Hypothesis) -> Score {
    let n = h.stats.len();
    let mean = |f: &dyn Fn(&ClauseStats) -> f64| (n > 0).then(|| h.stats.iter().map(f).sum::<f64>() / n as f64);
    Score {
        precision: mean(&|s| s.precision),
        negations: mean(&|s| s.negations as f64),
        predicates: mean(&|s| s.body_length as f64),
        rules: n,
    }
}
