//! Exact inference by grounding, domain partitioning and enumeration.
//!
//! Every world picks a subset of the probabilistic facts and one cell per
//! continuous attribute instance. Cells are refined by all comparison
//! constants, so a builtin is either true or false on a whole cell. The
//! probability of a query is the mass of the worlds whose least model
//! contains it.

mod enumerate;
mod ground;
mod partition;

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

pub use enumerate::{conditioned_probability, success_probability};
pub(crate) use ground::match_atom;
pub use ground::{ground, ground_goals, Goal, GroundBuiltin, GroundClause, GroundProgram, Instance};
pub use partition::{partition_domains, Cell, DomainPartition};

use crate::error::Result;
use crate::program::{Atom, HybridProgram, Literal};
use enumerate::atom_probability;

/// Default bound on the number of enumerated worlds.
pub const DEFAULT_CHOICE_CAP: u64 = 1 << 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EngineOptions {
    /// Refuse queries whose cone has more worlds than this.
    pub choice_cap: u64,
    /// Deepest term nesting allowed in a ground atom.
    pub max_term_depth: usize,
    /// Most ground atoms a grounding may create.
    pub max_atoms: usize,
}

impl Default for EngineOptions {
    fn default() -> Self {
        EngineOptions {
            choice_cap: DEFAULT_CHOICE_CAP,
            max_term_depth: 32,
            max_atoms: 1 << 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QueryResult {
    pub query: Atom,
    pub probability: f64,
    /// Whether evidence was applied.
    pub conditioned: bool,
    /// Cells with positive mass over the instances the query depends on.
    pub cells: usize,
    /// Worlds enumerated.
    pub choices: u64,
}

/// Answers every query of `hp`, conditioned on its evidence when there is any.
pub fn evaluate(hp: &HybridProgram, options: &EngineOptions) -> Result<Vec<QueryResult>> {
    let gp = ground(hp, options)?;
    let partition = partition_domains(hp, &gp)?;
    let evidence: Vec<Literal> = hp.evidence().cloned().collect();
    hp.queries()
        .map(|q| {
            if evidence.is_empty() {
                success_probability(&gp, &partition, q, options)
            } else {
                conditioned_probability(&gp, &partition, q, &evidence, options)
            }
        })
        .collect()
}

/// Probability of each atom in `queries` for a program, with `evidence`.
pub fn probabilities(
    hp: &HybridProgram,
    queries: &[Atom],
    evidence: &[Literal],
    options: &EngineOptions,
) -> Result<Vec<QueryResult>> {
    let goals: Vec<Atom> = queries
        .iter()
        .chain(evidence.iter().map(Literal::atom))
        .cloned()
        .collect();
    let gp = ground_goals(hp, &goals, options)?;
    let partition = partition_domains(hp, &gp)?;
    queries
        .iter()
        .map(|q| conditioned_probability(&gp, &partition, q, evidence, options))
        .collect()
}

/// Every ground atom matching one of `patterns` that is true in some world,
/// with its probability, in order of first match.
pub fn marginals(hp: &HybridProgram, patterns: &[Atom], options: &EngineOptions) -> Result<Vec<(Atom, f64)>> {
    let gp = ground_goals(hp, patterns, options)?;
    let partition = partition_domains(hp, &gp)?;
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for pattern in patterns {
        let Some(goal) = gp.goal(pattern) else { continue };
        for &id in &goal.alternatives {
            if seen.insert(id) {
                out.push((gp.atoms[id].clone(), atom_probability(&gp, &partition, id, options)?));
            }
        }
    }
    Ok(out)
}
