use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec;
use alloc::vec::Vec;

use super::ast::*;

/// Argument types inferred by unifying predicate positions that share a
/// variable within one statement.
///
/// Each type's domain is the set of ground terms that occur at any of its
/// positions.
#[derive(Debug, Clone, Default)]
pub struct ArgumentTypes {
    positions: BTreeMap<(PredKey, usize), usize>,
    parent: Vec<usize>,
    domains: BTreeMap<usize, BTreeSet<Term>>,
}

impl ArgumentTypes {
    pub fn infer(program: &Program) -> ArgumentTypes {
        ArgumentTypes::build(program, false)
    }

    /// Like [`ArgumentTypes::infer`], but positions that share a ground term
    /// are also merged. Suited to programs made of ground facts.
    pub fn infer_merging_constants(program: &Program) -> ArgumentTypes {
        ArgumentTypes::build(program, true)
    }

    fn build(program: &Program, merge_constants: bool) -> ArgumentTypes {
        let mut types = ArgumentTypes::default();
        for s in &program.statements {
            let atoms: Vec<&Atom> = match s {
                Statement::Clause(c) => core::iter::once(&c.head)
                    .chain(c.body.iter().map(Literal::atom))
                    .collect(),
                Statement::Prob(f) => vec![&f.atom],
                Statement::Continuous(f) => vec![&f.atom],
                Statement::Distribution(f) => vec![&f.atom],
                Statement::Query(a) => vec![a],
                Statement::Evidence(l) => vec![l.atom()],
            };
            let mut first: BTreeMap<&str, usize> = BTreeMap::new();
            for atom in atoms.into_iter().filter(|a| !a.is_builtin()) {
                for (pos, arg) in atom.args.iter().enumerate() {
                    let id = types.node(atom.key(), pos);
                    match arg {
                        Term::Var(v) if v == "_" => {}
                        Term::Var(v) => match first.get(v.as_str()) {
                            Some(&other) => types.union(id, other),
                            None => {
                                first.insert(v, id);
                            }
                        },
                        t if t.is_ground() => {
                            types.domains.entry(id).or_default().insert(t.clone());
                        }
                        _ => {}
                    }
                }
            }
        }
        if merge_constants {
            let mut owner: BTreeMap<Term, usize> = BTreeMap::new();
            let pairs: Vec<(usize, Term)> = types
                .domains
                .iter()
                .flat_map(|(&id, d)| d.iter().map(move |t| (id, t.clone())))
                .collect();
            for (id, t) in pairs {
                match owner.get(&t) {
                    Some(&other) => types.union(id, other),
                    None => {
                        owner.insert(t, id);
                    }
                }
            }
        }
        let ids: Vec<usize> = types.domains.keys().copied().collect();
        for id in ids {
            let root = types.find(id);
            if root != id {
                let moved = types.domains.remove(&id).unwrap_or_default();
                types.domains.entry(root).or_default().extend(moved);
            }
        }
        types
    }

    /// Type identifier of an argument position, if the position occurs.
    pub fn type_of(&self, predicate: &PredKey, position: usize) -> Option<usize> {
        self.positions
            .get(&(predicate.clone(), position))
            .map(|&id| self.root(id))
    }

    /// Ground terms of the position's type, in term order.
    pub fn domain(&self, predicate: &PredKey, position: usize) -> Vec<Term> {
        self.type_of(predicate, position)
            .and_then(|t| self.domains.get(&t))
            .map(|d| d.iter().cloned().collect())
            .unwrap_or_default()
    }

    /// Every known position with its type identifier.
    pub fn members(&self) -> Vec<(PredKey, usize, usize)> {
        self.positions
            .iter()
            .map(|((k, p), &id)| (k.clone(), *p, self.root(id)))
            .collect()
    }

    fn node(&mut self, key: PredKey, position: usize) -> usize {
        let next = self.parent.len();
        let id = *self.positions.entry((key, position)).or_insert(next);
        if id == next {
            self.parent.push(next);
        }
        id
    }

    fn root(&self, mut id: usize) -> usize {
        while self.parent[id] != id {
            id = self.parent[id];
        }
        id
    }

    fn find(&mut self, id: usize) -> usize {
        let root = self.root(id);
        let mut at = id;
        while self.parent[at] != root {
            let next = self.parent[at];
            self.parent[at] = root;
            at = next;
        }
        root
    }

    fn union(&mut self, a: usize, b: usize) {
        let (a, b) = (self.find(a), self.find(b));
        if a != b {
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            self.parent[hi] = lo;
        }
    }
}
