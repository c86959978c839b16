//! Hybrid to discrete program conversion.
//!
//! Every continuous fact `w :: c_j` becomes `p_j :: c_j`, where `p_j` is the
//! integral of `w` over the interval of its guard. The guards are kept, so
//! the result reads like the hybrid program with scalar weights.

mod task;

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::vec::Vec;

pub use task::{emit_learning_task, Bias, Direction, Example, LearningTask, Mode};

use crate::error::{Error, Result};
use crate::program::{
    Atom, AttributeDensity, Clause, HybridProgram, Literal, PredKey, ProbFact, Program, Statement, Term,
};

/// One row of the piece table: where a discrete fact came from.
#[derive(Debug, Clone, PartialEq)]
pub struct MappingRow {
    pub piece: PredKey,
    pub attribute: PredKey,
    pub bounds: Vec<(f64, f64)>,
    pub probability: f64,
    /// The piece this row subdivides, for rows added to resolve evidence.
    pub refines: Option<PredKey>,
}

#[derive(Debug, Clone)]
pub struct DiscretizedProgram {
    pub program: Program,
    pub mapping: Vec<MappingRow>,
}

impl DiscretizedProgram {
    /// Sum of the probabilities of an attribute's own pieces.
    pub fn attribute_mass(&self, attribute: &PredKey) -> f64 {
        self.mapping
            .iter()
            .filter(|r| r.attribute == *attribute && r.refines.is_none())
            .map(|r| r.probability)
            .sum()
    }
}

/// Replaces each continuous fact by a probabilistic fact carrying its mass.
///
/// Pieces that evidence constrains to a sub-interval are split at the
/// evidence constants; every part gets its own predicate `<piece>_<k>` with
/// its own fact and guard, listed in the mapping with `refines` set.
pub fn discretize_program(hp: &HybridProgram) -> Result<DiscretizedProgram> {
    let mut by_fact: BTreeMap<usize, (&PredKey, usize)> = BTreeMap::new();
    for (key, attr) in &hp.attributes {
        for (j, p) in attr.pieces.iter().enumerate() {
            if p.bounds.iter().any(|b| !b.0.is_finite() || !b.1.is_finite()) {
                return Err(Error::Contract(format!(
                    "piece {} of {key} has unbounded support",
                    p.predicate
                )));
            }
            by_fact.insert(p.fact, (key, j));
        }
    }

    let mut program = Program::default();
    let mut mapping = Vec::new();
    for (i, s) in hp.program.statements.iter().enumerate() {
        match (s, by_fact.get(&i)) {
            (Statement::Continuous(cf), Some(&(key, j))) => {
                let piece = &hp.attributes[key].pieces[j];
                program.push(Statement::Prob(ProbFact {
                    probability: piece.mass.clamp(0.0, 1.0),
                    atom: cf.atom.clone(),
                }));
                mapping.push(MappingRow {
                    piece: piece.predicate.clone(),
                    attribute: key.clone(),
                    bounds: piece.bounds.clone(),
                    probability: piece.mass,
                    refines: None,
                });
            }
            _ => program.push(s.clone()),
        }
    }

    for (key, constants) in evidence_constants(hp) {
        let attr = &hp.attributes[&key];
        let AttributeDensity::Univariate(pp) = &attr.density else {
            continue;
        };
        for piece in &attr.pieces {
            let (lo, hi) = piece.bounds[0];
            let inner: Vec<f64> = constants.iter().copied().filter(|&c| lo < c && c < hi).collect();
            if inner.is_empty() {
                continue;
            }
            let Statement::Continuous(cf) = &hp.program.statements[piece.fact] else {
                continue;
            };
            let Statement::Clause(guard) = &hp.program.statements[piece.guard] else {
                continue;
            };
            let mut ends = Vec::with_capacity(inner.len() + 2);
            ends.push(lo);
            ends.extend(inner);
            ends.push(hi);
            for (k, w) in ends.windows(2).enumerate() {
                let name = format!("{}_{}", piece.predicate.name, k + 1);
                let probability = pp.integrate(w[0], w[1])?;
                program.push(Statement::Prob(ProbFact {
                    probability: probability.clamp(0.0, 1.0),
                    atom: Atom::new(name.as_str(), cf.atom.args.clone()),
                }));
                program.push(Statement::Clause(narrowed_guard(guard, &name, w[0], w[1])));
                mapping.push(MappingRow {
                    piece: PredKey::new(name.as_str(), cf.atom.arity()),
                    attribute: key.clone(),
                    bounds: alloc::vec![(w[0], w[1])],
                    probability,
                    refines: Some(piece.predicate.clone()),
                });
            }
        }
    }
    Ok(DiscretizedProgram { program, mapping })
}

/// The guard with a new head name and its builtins replaced by one interval.
fn narrowed_guard(guard: &Clause, name: &str, lo: f64, hi: f64) -> Clause {
    let mut body: Vec<Literal> = Vec::new();
    let mut value = None;
    for lit in &guard.body {
        let a = lit.atom();
        if a.is_builtin() {
            value.get_or_insert_with(|| a.args[0].clone());
        } else {
            body.push(lit.clone());
        }
    }
    if let Some(v) = value {
        body.push(Literal::Pos(Atom::new(
            "ininterval",
            alloc::vec![v, Term::number(lo), Term::number(hi)],
        )));
    }
    Clause::new(Atom::new(name, guard.head.args.clone()), body)
}

/// Builtin constants per attribute in the clauses evidence depends on.
fn evidence_constants(hp: &HybridProgram) -> BTreeMap<PredKey, Vec<f64>> {
    let mut reach: BTreeSet<PredKey> = hp.evidence().map(|l| l.atom().key()).collect();
    loop {
        let before = reach.len();
        for c in hp.clauses() {
            if reach.contains(&c.head.key()) {
                for lit in &c.body {
                    reach.insert(lit.atom().key());
                }
            }
        }
        if reach.len() == before {
            break;
        }
    }
    let guards: BTreeSet<usize> = hp
        .attributes
        .values()
        .flat_map(|a| a.pieces.iter().map(|p| p.guard))
        .collect();
    let mut out: BTreeMap<PredKey, Vec<f64>> = BTreeMap::new();
    for (i, s) in hp.program.statements.iter().enumerate() {
        let Statement::Clause(c) = s else { continue };
        if guards.contains(&i) || !reach.contains(&c.head.key()) {
            continue;
        }
        let mut owner: BTreeMap<&str, &PredKey> = BTreeMap::new();
        for lit in &c.body {
            if let Some((key, attr)) = hp.attributes.get_key_value(&lit.atom().key()) {
                if attr.dimension() == 1 {
                    if let Term::Var(v) = &lit.atom().args[attr.continuous[0]] {
                        owner.insert(v, key);
                    }
                }
            }
        }
        for lit in &c.body {
            let a = lit.atom();
            if !a.is_builtin() {
                continue;
            }
            let Term::Var(v) = &a.args[0] else { continue };
            if let Some(key) = owner.get(v.as_str()) {
                out.entry((*key).clone())
                    .or_default()
                    .extend(a.args[1..].iter().filter_map(Term::as_number));
            }
        }
    }
    for v in out.values_mut() {
        v.sort_by(f64::total_cmp);
        v.dedup();
    }
    out
}
