use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::ground::GroundProgram;
use super::partition::DomainPartition;
use super::{EngineOptions, QueryResult};
use crate::error::{Error, Result};
use crate::math;
use crate::program::{Atom, Literal};

/// Probability of `query` summed over all worlds of its relevance cone.
pub fn success_probability(
    gp: &GroundProgram,
    partition: &DomainPartition,
    query: &Atom,
    options: &EngineOptions,
) -> Result<QueryResult> {
    let q = alternatives(gp, query)?;
    let cone = Cone::new(gp, partition, &q, &[])?;
    let (mass, _) = cone.run(options)?;
    Ok(QueryResult {
        query: query.clone(),
        probability: mass.query_and_evidence.clamp(0.0, 1.0),
        conditioned: false,
        cells: cone.cell_count(),
        choices: mass.worlds,
    })
}

/// `P(query and evidence) / P(evidence)` over the same enumeration.
pub fn conditioned_probability(
    gp: &GroundProgram,
    partition: &DomainPartition,
    query: &Atom,
    evidence: &[Literal],
    options: &EngineOptions,
) -> Result<QueryResult> {
    let q = alternatives(gp, query)?;
    let e = evidence
        .iter()
        .map(|l| Ok((alternatives(gp, l.atom())?, !l.is_negative())))
        .collect::<Result<Vec<_>>>()?;
    let cone = Cone::new(gp, partition, &q, &e)?;
    let (mass, evidence_mass) = cone.run(options)?;
    if !(evidence_mass > 0.0) {
        return Err(Error::InconsistentEvidence);
    }
    Ok(QueryResult {
        query: query.clone(),
        probability: (mass.query_and_evidence / evidence_mass).clamp(0.0, 1.0),
        conditioned: !evidence.is_empty(),
        cells: cone.cell_count(),
        choices: mass.worlds,
    })
}

/// Probability of the ground atom with index `atom`.
pub(crate) fn atom_probability(
    gp: &GroundProgram,
    partition: &DomainPartition,
    atom: usize,
    options: &EngineOptions,
) -> Result<f64> {
    let cone = Cone::new(gp, partition, &[atom], &[])?;
    let (mass, _) = cone.run(options)?;
    Ok(mass.query_and_evidence.clamp(0.0, 1.0))
}

fn alternatives(gp: &GroundProgram, atom: &Atom) -> Result<Vec<usize>> {
    gp.goal(atom)
        .map(|g| g.alternatives.clone())
        .ok_or_else(|| Error::Contract(format!("`{atom}` was not a goal of the grounding")))
}

struct Mass {
    query_and_evidence: f64,
    worlds: u64,
}

struct LocalClause {
    head: usize,
    positive: Vec<usize>,
    negative: Vec<usize>,
    builtins: Vec<(usize, bool)>,
}

/// The atoms, clauses and random choices a set of goals depends on,
/// renumbered densely.
struct Cone {
    atoms: usize,
    clauses: Vec<LocalClause>,
    /// Ranges of `clauses` sharing a stratum, lowest first.
    strata: Vec<(usize, usize)>,
    facts: Vec<usize>,
    choices: Vec<(usize, f64)>,
    /// Per cone instance: probabilities of its cells with positive mass.
    cells: Vec<Vec<f64>>,
    /// Per local builtin: its instance and truth on each kept cell.
    builtins: Vec<(usize, Vec<bool>)>,
    query: Vec<usize>,
    evidence: Vec<(Vec<usize>, bool)>,
}

impl Cone {
    fn new(
        gp: &GroundProgram,
        partition: &DomainPartition,
        query: &[usize],
        evidence: &[(Vec<usize>, bool)],
    ) -> Result<Cone> {
        const NONE: usize = usize::MAX;
        let mut local = vec![NONE; gp.atoms.len()];
        let mut order: Vec<usize> = Vec::new();
        let mut clause_ids: Vec<usize> = Vec::new();
        let mut stack: Vec<usize> = query
            .iter()
            .chain(evidence.iter().flat_map(|(a, _)| a))
            .copied()
            .collect();
        while let Some(a) = stack.pop() {
            if local[a] != NONE {
                continue;
            }
            local[a] = order.len();
            order.push(a);
            for &c in gp.clauses_for(a) {
                clause_ids.push(c);
                let c = &gp.clauses[c];
                stack.extend(c.positive.iter().chain(&c.negative).copied());
            }
        }

        let mut builtin_local = vec![NONE; gp.builtins.len()];
        let mut instance_local = vec![NONE; gp.instances.len()];
        let mut cells: Vec<Vec<f64>> = Vec::new();
        let mut cell_bounds: Vec<Vec<Vec<(f64, f64)>>> = Vec::new();
        let mut builtins: Vec<(usize, Vec<bool>)> = Vec::new();
        clause_ids.sort_by_key(|&c| (gp.strata[gp.clauses[c].head], c));
        let mut clauses = Vec::with_capacity(clause_ids.len());
        let mut strata: Vec<(usize, usize)> = Vec::new();
        for &c in &clause_ids {
            let gc = &gp.clauses[c];
            let mut lb = Vec::with_capacity(gc.builtins.len());
            for &(b, positive) in &gc.builtins {
                if builtin_local[b] == NONE {
                    let gb = &gp.builtins[b];
                    if instance_local[gb.instance] == NONE {
                        instance_local[gb.instance] = cells.len();
                        let kept: Vec<_> = partition.cells[gb.instance]
                            .iter()
                            .filter(|cell| cell.probability > 0.0)
                            .collect();
                        cells.push(kept.iter().map(|cell| cell.probability).collect());
                        cell_bounds.push(kept.iter().map(|cell| cell.bounds.clone()).collect());
                    }
                    let li = instance_local[gb.instance];
                    let truth = cell_bounds[li]
                        .iter()
                        .map(|bounds| {
                            gb.holds(bounds[gb.axis]).ok_or_else(|| {
                                Error::Contract(format!(
                                    "`{}` cuts the cell [{}, {}]; the partition is too coarse",
                                    gb.atom, bounds[gb.axis].0, bounds[gb.axis].1
                                ))
                            })
                        })
                        .collect::<Result<Vec<bool>>>()?;
                    builtin_local[b] = builtins.len();
                    builtins.push((li, truth));
                }
                lb.push((builtin_local[b], positive));
            }
            let stratum = gp.strata[gc.head];
            match strata.last_mut() {
                Some((s, end)) if *s == stratum => *end += 1,
                _ => strata.push((stratum, clauses.len() + 1)),
            }
            clauses.push(LocalClause {
                head: local[gc.head],
                positive: gc.positive.iter().map(|&a| local[a]).collect(),
                negative: gc.negative.iter().map(|&a| local[a]).collect(),
                builtins: lb,
            });
        }
        let mut start = 0;
        let strata = strata
            .into_iter()
            .map(|(_, end)| {
                let r = (start, end);
                start = end;
                r
            })
            .collect();

        let facts = gp
            .facts
            .iter()
            .filter(|&&a| local[a] != NONE)
            .map(|&a| local[a])
            .collect::<Vec<_>>();
        let mut fixed = facts;
        let mut choices = Vec::new();
        for &(a, p) in &gp.choices {
            if local[a] == NONE || p <= 0.0 {
                continue;
            }
            if p >= 1.0 {
                fixed.push(local[a]);
            } else {
                choices.push((local[a], p));
            }
        }
        Ok(Cone {
            atoms: order.len(),
            clauses,
            strata,
            facts: fixed,
            choices,
            cells,
            builtins,
            query: query.iter().map(|&a| local[a]).collect(),
            evidence: evidence
                .iter()
                .map(|(alts, pos)| (alts.iter().map(|&a| local[a]).collect(), *pos))
                .collect(),
        })
    }

    fn cell_count(&self) -> usize {
        self.cells.iter().map(Vec::len).sum()
    }

    /// Returns the query-and-evidence mass and the evidence mass.
    fn run(&self, options: &EngineOptions) -> Result<(Mass, f64)> {
        let mut estimate = math::powi(2.0, self.choices.len() as u32);
        for c in &self.cells {
            estimate *= c.len() as f64;
        }
        if estimate > options.choice_cap as f64 {
            return Err(Error::ChoiceSpaceTooLarge {
                estimate,
                cap: options.choice_cap,
            });
        }
        let mut state = World {
            truth: vec![false; self.atoms],
            selected: vec![false; self.choices.len()],
            cell: vec![0; self.cells.len()],
            builtin: vec![false; self.builtins.len()],
        };
        let mut mass = Mass {
            query_and_evidence: 0.0,
            worlds: 0,
        };
        let mut evidence_mass = 0.0;
        self.visit(0, 1.0, &mut state, &mut mass, &mut evidence_mass);
        Ok((mass, evidence_mass))
    }

    fn visit(&self, depth: usize, weight: f64, state: &mut World, mass: &mut Mass, evidence_mass: &mut f64) {
        if depth < self.choices.len() {
            let p = self.choices[depth].1;
            state.selected[depth] = true;
            self.visit(depth + 1, weight * p, state, mass, evidence_mass);
            state.selected[depth] = false;
            self.visit(depth + 1, weight * (1.0 - p), state, mass, evidence_mass);
            return;
        }
        let i = depth - self.choices.len();
        if i < self.cells.len() {
            for (j, &p) in self.cells[i].iter().enumerate() {
                state.cell[i] = j;
                self.visit(depth + 1, weight * p, state, mass, evidence_mass);
            }
            return;
        }
        mass.worlds += 1;
        self.model(state);
        let holds = |alts: &[usize]| alts.iter().any(|&a| state.truth[a]);
        if self.evidence.iter().all(|(alts, pos)| holds(alts) == *pos) {
            *evidence_mass += weight;
            if holds(&self.query) {
                mass.query_and_evidence += weight;
            }
        }
    }

    /// Least model of the world's choices, stratum by stratum.
    fn model(&self, state: &mut World) {
        state.truth.iter_mut().for_each(|t| *t = false);
        for &a in &self.facts {
            state.truth[a] = true;
        }
        for (k, &(a, _)) in self.choices.iter().enumerate() {
            if state.selected[k] {
                state.truth[a] = true;
            }
        }
        for (k, (inst, truth)) in self.builtins.iter().enumerate() {
            state.builtin[k] = truth[state.cell[*inst]];
        }
        for &(start, end) in &self.strata {
            loop {
                let mut changed = false;
                for c in &self.clauses[start..end] {
                    if !state.truth[c.head]
                        && c.positive.iter().all(|&a| state.truth[a])
                        && c.negative.iter().all(|&a| !state.truth[a])
                        && c.builtins.iter().all(|&(b, pos)| state.builtin[b] == pos)
                    {
                        state.truth[c.head] = true;
                        changed = true;
                    }
                }
                if !changed {
                    break;
                }
            }
        }
    }
}

struct World {
    truth: Vec<bool>,
    selected: Vec<bool>,
    cell: Vec<usize>,
    builtin: Vec<bool>,
}
