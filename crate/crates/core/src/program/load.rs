use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use super::ast::*;
use super::weight;
use crate::error::{Error, Result};
use crate::poly::{HyperCube, MultiPolynomial, MultivariatePP, PiecewisePolynomial, Polynomial};

/// Mass tolerance for densities stated in program text.
pub const DENSITY_TOLERANCE: f64 = 1e-6;

/// Normalized weight of one continuous fact.
#[derive(Debug, Clone, PartialEq)]
pub enum Weight {
    Univariate(Polynomial),
    Multivariate(MultiPolynomial),
}

/// One continuous fact together with its guard clause.
#[derive(Debug, Clone)]
pub struct Piece {
    /// Predicate of the continuous fact and of the guard head.
    pub predicate: PredKey,
    /// Statement index of the continuous fact.
    pub fact: usize,
    /// Statement index of the guard clause.
    pub guard: usize,
    /// Closed interval per continuous argument, clamped to the support.
    pub bounds: Vec<(f64, f64)>,
    pub weight: Weight,
    /// Integral of the weight over `bounds`.
    pub mass: f64,
}

#[derive(Debug, Clone)]
pub enum AttributeDensity {
    Univariate(PiecewisePolynomial),
    Multivariate(MultivariatePP),
}

impl AttributeDensity {
    pub fn dimension(&self) -> usize {
        match self {
            AttributeDensity::Univariate(_) => 1,
            AttributeDensity::Multivariate(m) => m.dimension(),
        }
    }

    /// Probability of a closed box (an interval in one dimension).
    pub fn probability(&self, bounds: &[(f64, f64)]) -> Result<f64> {
        match self {
            AttributeDensity::Univariate(pp) => pp.integrate(bounds[0].0, bounds[0].1),
            AttributeDensity::Multivariate(m) => m.integrate_box(&HyperCube::new(bounds.to_vec())?),
        }
    }

    pub fn evaluate(&self, point: &[f64]) -> f64 {
        match self {
            AttributeDensity::Univariate(pp) => pp.evaluate(point[0]),
            AttributeDensity::Multivariate(m) => m.evaluate(point),
        }
    }

    /// Sorted piece boundaries along `axis`.
    pub fn breakpoints(&self, axis: usize) -> Vec<f64> {
        match self {
            AttributeDensity::Univariate(pp) => pp.cutpoints().to_vec(),
            AttributeDensity::Multivariate(m) => m.breakpoints(axis),
        }
    }
}

/// A predicate whose instances carry a continuous value with a density.
#[derive(Debug, Clone)]
pub struct Attribute {
    pub key: PredKey,
    /// Argument positions holding continuous values, ascending.
    pub continuous: Vec<usize>,
    pub pieces: Vec<Piece>,
    pub density: AttributeDensity,
    /// Support per continuous argument.
    pub support: Vec<(f64, f64)>,
}

impl Attribute {
    pub fn dimension(&self) -> usize {
        self.continuous.len()
    }

    /// Argument positions that identify an instance.
    pub fn key_positions(&self) -> Vec<usize> {
        (0..self.key.arity).filter(|i| !self.continuous.contains(i)).collect()
    }
}

/// A program whose continuous facts have been checked and compiled into
/// per-attribute densities.
#[derive(Debug, Clone)]
pub struct HybridProgram {
    pub program: Program,
    pub attributes: BTreeMap<PredKey, Attribute>,
    /// Piece predicate to the attribute it belongs to.
    pub piece_owner: BTreeMap<PredKey, PredKey>,
    /// Negation stratum per predicate with rules or facts.
    pub strata: BTreeMap<PredKey, usize>,
}

impl HybridProgram {
    /// Rules and deterministic facts, guard clauses included; observations
    /// of attributes are excluded.
    pub fn clauses(&self) -> impl Iterator<Item = &Clause> {
        self.program
            .clauses()
            .filter(|c| !(c.is_fact() && self.attributes.contains_key(&c.head.key())))
    }

    /// Deterministic facts on attribute predicates, such as `height(ann, 1.72)`.
    pub fn observations(&self) -> impl Iterator<Item = &Atom> {
        self.program
            .clauses()
            .filter(|c| c.is_fact() && self.attributes.contains_key(&c.head.key()))
            .map(|c| &c.head)
    }

    pub fn prob_facts(&self) -> impl Iterator<Item = &ProbFact> {
        self.program.prob_facts()
    }

    pub fn queries(&self) -> impl Iterator<Item = &Atom> {
        self.program.queries()
    }

    pub fn evidence(&self) -> impl Iterator<Item = &Literal> {
        self.program.evidence()
    }

    pub fn attribute_of_piece(&self, piece: &PredKey) -> Option<&Attribute> {
        self.piece_owner.get(piece).and_then(|a| self.attributes.get(a))
    }

    pub fn stratum(&self, key: &PredKey) -> usize {
        self.strata.get(key).copied().unwrap_or(0)
    }
}

fn located(program: &Program, index: usize, msg: String) -> Error {
    match program.position(index) {
        Some(p) if p.line > 0 => Error::Semantic(format!("line {}:{}: {msg}", p.line, p.column)),
        _ => Error::Semantic(msg),
    }
}

struct Guard<'a> {
    attribute: &'a Atom,
    /// Continuous variable names in argument order of the attribute atom.
    vars: Vec<&'a str>,
    positions: Vec<usize>,
    bounds: Vec<(f64, f64)>,
}

fn read_guard<'a>(clause: &'a Clause) -> core::result::Result<Guard<'a>, String> {
    let mut attribute = None;
    let mut constraints: Vec<(&str, f64, f64)> = Vec::new();
    for lit in &clause.body {
        let Literal::Pos(a) = lit else {
            return Err("a guard clause cannot contain negation".into());
        };
        if a.is_builtin() {
            let Term::Var(v) = &a.args[0] else {
                return Err(format!("`{a}` must constrain a variable"));
            };
            let nums: Option<Vec<f64>> = a.args[1..].iter().map(Term::as_number).collect();
            let nums = nums.ok_or_else(|| format!("`{a}` needs numeric bounds"))?;
            let (lo, hi) = match a.predicate.as_str() {
                "below" => (f64::NEG_INFINITY, nums[0]),
                "above" => (nums[0], f64::INFINITY),
                _ => (nums[0], nums[1]),
            };
            constraints.push((v, lo, hi));
        } else if attribute.replace(a).is_some() {
            return Err("a guard clause links to exactly one attribute".into());
        }
    }
    let attribute = attribute.ok_or("a guard clause needs an attribute literal")?;
    let mut vars = Vec::new();
    let mut positions = Vec::new();
    for (pos, arg) in attribute.args.iter().enumerate() {
        if let Term::Var(v) = arg {
            if constraints.iter().any(|c| c.0 == v) {
                if vars.contains(&v.as_str()) {
                    return Err(format!("continuous variable `{v}` repeated in `{attribute}`"));
                }
                vars.push(v.as_str());
                positions.push(pos);
            }
        }
    }
    if let Some(c) = constraints.iter().find(|c| !vars.contains(&c.0)) {
        return Err(format!("`{}` is not an argument of `{attribute}`", c.0));
    }
    let bounds = vars
        .iter()
        .map(|v| {
            constraints
                .iter()
                .filter(|c| c.0 == *v)
                .fold((f64::NEG_INFINITY, f64::INFINITY), |(lo, hi), c| {
                    (lo.max(c.1), hi.min(c.2))
                })
        })
        .collect::<Vec<_>>();
    if let Some((i, _)) = bounds.iter().enumerate().find(|(_, b)| !(b.0 < b.1)) {
        return Err(format!("empty interval for `{}`", vars[i]));
    }
    Ok(Guard {
        attribute,
        vars,
        positions,
        bounds,
    })
}

fn check_safety(program: &Program, index: usize, clause: &Clause) -> Result<()> {
    if clause.is_fact() {
        return Ok(());
    }
    let mut bound = Vec::new();
    for lit in &clause.body {
        if let Literal::Pos(a) = lit {
            if !a.is_builtin() {
                a.args.iter().for_each(|t| t.collect_vars(&mut bound));
            }
        }
    }
    let mut needed: Vec<&str> = clause.head.vars();
    for lit in &clause.body {
        if lit.is_negative() || lit.atom().is_builtin() {
            lit.atom().args.iter().for_each(|t| t.collect_vars(&mut needed));
        }
    }
    if let Some(v) = needed.iter().find(|v| **v == "_" || !bound.contains(v)) {
        return Err(located(program, index, format!("unsafe variable `{v}` in `{clause}`")));
    }
    Ok(())
}

/// Negation strata by relaxation; a negative cycle makes the strata grow
/// without bound.
fn stratify(program: &Program) -> Result<BTreeMap<PredKey, usize>> {
    let mut edges: Vec<(PredKey, PredKey, usize)> = Vec::new();
    let mut strata: BTreeMap<PredKey, usize> = BTreeMap::new();
    for c in program.clauses() {
        strata.entry(c.head.key()).or_insert(0);
        for lit in &c.body {
            let a = lit.atom();
            if !a.is_builtin() {
                strata.entry(a.key()).or_insert(0);
                edges.push((c.head.key(), a.key(), usize::from(lit.is_negative())));
            }
        }
    }
    for f in program.prob_facts() {
        strata.entry(f.atom.key()).or_insert(0);
    }
    let limit = strata.len();
    loop {
        let mut changed = false;
        for (head, body, w) in &edges {
            let need = strata[body] + w;
            if strata[head] < need {
                if need > limit {
                    return Err(Error::Semantic(format!(
                        "negation through recursion involving {head}; the program is not stratified"
                    )));
                }
                strata.insert(head.clone(), need);
                changed = true;
            }
        }
        if !changed {
            return Ok(strata);
        }
    }
}

fn nonneg_check(pieces: &[(HyperCube, MultiPolynomial)]) -> f64 {
    let mut min = f64::INFINITY;
    for (cube, poly) in pieces {
        let d = cube.dimension();
        let steps = if d <= 3 { 8 } else { 3 };
        let total = (steps + 1usize).pow(d as u32);
        let mut point = vec![0.0; d];
        for idx in 0..total {
            let mut r = idx;
            for (axis, (lo, hi)) in cube.bounds().iter().enumerate() {
                let k = r % (steps + 1);
                r /= steps + 1;
                point[axis] = lo + (hi - lo) * k as f64 / steps as f64;
            }
            min = min.min(poly.evaluate(&point));
        }
    }
    min
}

/// Checks the semantics of a parsed program and compiles its continuous facts.
///
/// Every continuous fact `w :: p(...)` needs exactly one guard clause
/// `p(...) :- attr(...), <builtins>` whose builtins constrain the continuous
/// arguments of `attr`; the weight's variables are those arguments, matched by
/// name. The pieces of one attribute must have disjoint intervals and together
/// integrate to one.
pub fn load(program: Program) -> Result<HybridProgram> {
    let statements = &program.statements;
    for (i, s) in statements.iter().enumerate() {
        if let Statement::Clause(c) = s {
            check_safety(&program, i, c)?;
        }
        if let Statement::Distribution(d) = s {
            return Err(located(
                &program,
                i,
                format!(
                    "`{}` for {} is not a polynomial weight; only piecewise-polynomial densities are supported",
                    d.distribution,
                    d.atom.key()
                ),
            ));
        }
        if let Statement::Prob(f) = s {
            if !(0.0..=1.0).contains(&f.probability) {
                return Err(located(
                    &program,
                    i,
                    format!("probability {} outside [0, 1]", f.probability),
                ));
            }
        }
    }

    struct Raw {
        piece: Piece,
        attribute: PredKey,
        positions: Vec<usize>,
    }
    let mut raws: Vec<Raw> = Vec::new();
    let mut seen_pieces: BTreeSet<PredKey> = BTreeSet::new();
    for (i, s) in statements.iter().enumerate() {
        let Statement::Continuous(cf) = s else { continue };
        let key = cf.atom.key();
        if !seen_pieces.insert(key.clone()) {
            return Err(located(&program, i, format!("duplicate density for {key}")));
        }
        let guards: Vec<(usize, &Clause)> = statements
            .iter()
            .enumerate()
            .filter_map(|(j, s)| match s {
                Statement::Clause(c) if c.head.key() == key && !c.is_fact() => Some((j, c)),
                _ => None,
            })
            .collect();
        if guards.len() != 1 {
            return Err(located(
                &program,
                i,
                format!(
                    "continuous fact {key} needs exactly one guard clause, found {}",
                    guards.len()
                ),
            ));
        }
        let (gi, clause) = guards[0];
        let guard = read_guard(clause).map_err(|m| located(&program, gi, m))?;
        let wvars = cf.weight.vars();
        if let Some(v) = wvars.iter().find(|v| !guard.vars.contains(v)) {
            return Err(located(
                &program,
                i,
                format!("weight variable `{v}` is not constrained by the guard of {key}"),
            ));
        }
        let weight = if guard.vars.len() == 1 {
            Weight::Univariate(
                weight::univariate(&cf.weight, guard.vars[0]).map_err(|e| located(&program, i, format!("{e}")))?,
            )
        } else {
            Weight::Multivariate(
                weight::multivariate(&cf.weight, &guard.vars).map_err(|e| located(&program, i, format!("{e}")))?,
            )
        };
        raws.push(Raw {
            piece: Piece {
                predicate: key,
                fact: i,
                guard: gi,
                bounds: guard.bounds,
                weight,
                mass: 0.0,
            },
            attribute: guard.attribute.key(),
            positions: guard.positions,
        });
    }

    let mut grouped: BTreeMap<PredKey, Vec<Raw>> = BTreeMap::new();
    for r in raws {
        grouped.entry(r.attribute.clone()).or_default().push(r);
    }

    let mut attributes = BTreeMap::new();
    let mut piece_owner = BTreeMap::new();
    for (key, raws) in grouped {
        let positions = raws[0].positions.clone();
        if raws.iter().any(|r| r.positions != positions) {
            return Err(Error::Semantic(format!(
                "pieces of {key} constrain different arguments"
            )));
        }
        if program.clauses().any(|c| c.head.key() == key && !c.is_fact())
            || program.prob_facts().any(|f| f.atom.key() == key)
        {
            return Err(Error::Semantic(format!(
                "attribute {key} has a density and is also defined by rules or probabilistic facts"
            )));
        }
        let dim = positions.len();
        let mut raws = raws;
        if dim == 1 {
            for r in &mut raws {
                close_half_line(&mut r.piece)?;
            }
        }
        let mut support = Vec::with_capacity(dim);
        for axis in 0..dim {
            let ends: Vec<f64> = raws
                .iter()
                .flat_map(|r| [r.piece.bounds[axis].0, r.piece.bounds[axis].1])
                .filter(|x| x.is_finite())
                .collect();
            let lo = ends.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = ends.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if !(lo < hi) {
                return Err(Error::Semantic(format!("density of {key} has unbounded support")));
            }
            support.push((lo, hi));
        }
        let mut pieces: Vec<Piece> = raws.into_iter().map(|r| r.piece).collect();
        for p in &mut pieces {
            for (b, s) in p.bounds.iter_mut().zip(&support) {
                b.0 = b.0.max(s.0);
                b.1 = b.1.min(s.1);
                if !(b.0 < b.1) {
                    return Err(Error::Semantic(format!(
                        "piece {} of {key} has an empty interval",
                        p.predicate
                    )));
                }
            }
        }
        let what = format!("density of {key}");
        let density = if dim == 1 {
            pieces.sort_by(|a, b| a.bounds[0].0.total_cmp(&b.bounds[0].0));
            let mut cutpoints = vec![pieces[0].bounds[0].0];
            let mut polys = Vec::new();
            for p in &pieces {
                let (lo, hi) = p.bounds[0];
                let last = cutpoints[cutpoints.len() - 1];
                if lo < last {
                    return Err(Error::Semantic(format!("pieces of {key} overlap at [{lo}, {last}]")));
                }
                if lo > last {
                    cutpoints.push(lo);
                    polys.push(Polynomial::zero());
                }
                cutpoints.push(hi);
                let Weight::Univariate(w) = &p.weight else {
                    unreachable!()
                };
                polys.push(w.clone());
            }
            let pp = PiecewisePolynomial::new(cutpoints, polys)?;
            for p in &mut pieces {
                p.mass = pp.integrate(p.bounds[0].0, p.bounds[0].1)?;
            }
            let check = pp.density_check();
            if (check.mass - 1.0).abs() > DENSITY_TOLERANCE || check.min_value < -DENSITY_TOLERANCE {
                return Err(Error::NotADensity {
                    what,
                    mass: check.mass,
                    min_value: check.min_value,
                });
            }
            AttributeDensity::Univariate(pp)
        } else {
            let boxes: Vec<(HyperCube, MultiPolynomial)> = pieces
                .iter()
                .map(|p| {
                    let Weight::Multivariate(w) = &p.weight else {
                        unreachable!()
                    };
                    Ok((HyperCube::new(p.bounds.clone())?, w.clone()))
                })
                .collect::<Result<_>>()?;
            for (p, (cube, w)) in pieces.iter_mut().zip(&boxes) {
                p.mass = w.integrate_box(cube)?;
            }
            let min_value = nonneg_check(&boxes);
            let mpp = MultivariatePP::new(dim, boxes).map_err(|e| Error::Semantic(format!("pieces of {key}: {e}")))?;
            let mass = mpp.total_mass();
            if (mass - 1.0).abs() > DENSITY_TOLERANCE || min_value < -DENSITY_TOLERANCE {
                return Err(Error::NotADensity { what, mass, min_value });
            }
            AttributeDensity::Multivariate(mpp)
        };
        for p in &pieces {
            piece_owner.insert(p.predicate.clone(), key.clone());
        }
        attributes.insert(
            key.clone(),
            Attribute {
                key,
                continuous: positions,
                pieces,
                density,
                support,
            },
        );
    }

    for c in program.clauses() {
        if c.is_fact() {
            if let Some(attr) = attributes.get(&c.head.key()) {
                let ok = c.head.is_ground() && attr.continuous.iter().all(|&p| c.head.args[p].as_number().is_some());
                if !ok {
                    return Err(Error::Semantic(format!(
                        "observation `{}` must be ground with numeric values",
                        c.head
                    )));
                }
            }
        }
    }

    let strata = stratify(&program)?;
    let defined = |k: &PredKey| {
        attributes.contains_key(k)
            || program.clauses().any(|c| c.head.key() == *k)
            || program.prob_facts().any(|f| f.atom.key() == *k)
    };
    for (i, s) in statements.iter().enumerate() {
        let atom = match s {
            Statement::Query(q) => q,
            Statement::Evidence(e) => e.atom(),
            _ => continue,
        };
        if atom.is_builtin() || !defined(&atom.key()) {
            return Err(located(&program, i, format!("{} is not defined", atom.key())));
        }
    }

    Ok(HybridProgram {
        program,
        attributes,
        piece_owner,
        strata,
    })
}

/// Closes a univariate `below` or `above` piece where its weight first
/// reaches zero beyond the finite bound.
fn close_half_line(piece: &mut Piece) -> Result<()> {
    let (lo, hi) = piece.bounds[0];
    if lo.is_finite() && hi.is_finite() {
        return Ok(());
    }
    let Weight::Univariate(w) = &piece.weight else {
        return Ok(());
    };
    let unbounded = || {
        Error::Semantic(format!(
            "piece {} has a half-line guard but its weight never reaches zero",
            piece.predicate
        ))
    };
    if !lo.is_finite() && !hi.is_finite() {
        return Err(unbounded());
    }
    let roots = w.real_roots();
    let edge = if hi.is_finite() {
        roots.into_iter().rev().find(|&r| r < hi)
    } else {
        roots.into_iter().find(|&r| r > lo)
    }
    .ok_or_else(unbounded)?;
    let (a, b) = if hi.is_finite() { (edge, hi) } else { (lo, edge) };
    if !(w.evaluate(0.5 * (a + b)) > 0.0) {
        return Err(Error::Semantic(format!(
            "piece {} has a half-line guard but its weight is negative next to the bound",
            piece.predicate
        )));
    }
    piece.bounds[0] = (a, b);
    Ok(())
}
