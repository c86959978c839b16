//! Program, example, task and JSON files.

use std::path::Path;

use serde::Serialize;

use hybridpp_core::engine::QueryResult;
use hybridpp_core::program::{load, parse, HybridProgram, PredKey, Program, Statement};
use hybridpp_core::rulelearn::{score_hypothesis, Hypothesis};
use hybridpp_core::transform::{Example, LearningTask, MappingRow};

use crate::CliError;

pub const BACKGROUND_FILE: &str = "background.pl";
pub const EXAMPLES_FILE: &str = "examples.pl";
pub const BIAS_FILE: &str = "bias.pl";

pub fn read_text(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

/// Concatenated text of several program files.
pub fn read_program_text(paths: &[impl AsRef<Path>]) -> Result<String, CliError> {
    let mut text = String::new();
    for p in paths {
        text.push_str(&read_text(p.as_ref())?);
        text.push('\n');
    }
    Ok(text)
}

pub fn load_program(paths: &[impl AsRef<Path>]) -> Result<HybridProgram, CliError> {
    Ok(load(parse(&read_program_text(paths)?)?)?)
}

/// Labelled examples: `t(a).` and `1 :: t(a).` are positive, `0 :: t(b).`
/// is negative.
pub fn parse_examples(text: &str) -> Result<Vec<Example>, CliError> {
    let mut out = Vec::new();
    for s in parse(text)?.statements {
        let (atom, positive) = match s {
            Statement::Clause(c) if c.is_fact() => (c.head, true),
            Statement::Prob(f) if f.probability == 1.0 || f.probability == 0.0 => (f.atom, f.probability == 1.0),
            other => return Err(CliError::Input(format!("`{other}` is not an example"))),
        };
        if !atom.is_ground() {
            return Err(CliError::Input(format!("example `{atom}` is not ground")));
        }
        out.push(Example { atom, positive });
    }
    Ok(out)
}

/// `name/arity`, or a bare name whose arity is taken from the examples.
pub fn parse_target(text: &str, examples: &[Example]) -> Result<PredKey, CliError> {
    if text.is_empty() {
        return Err(CliError::Usage("empty target".into()));
    }
    if let Some((name, arity)) = text.rsplit_once('/') {
        let arity = arity
            .parse()
            .map_err(|_| CliError::Usage(format!("target `{text}` has no valid arity")))?;
        return Ok(PredKey::new(name, arity));
    }
    let arities: std::collections::BTreeSet<usize> = examples
        .iter()
        .filter(|e| e.atom.predicate == text)
        .map(|e| e.atom.arity())
        .collect();
    match arities.len() {
        1 => Ok(PredKey::new(text, *arities.iter().next().unwrap_or(&0))),
        0 => Err(CliError::Input(format!("no examples for target `{text}`"))),
        _ => Err(CliError::Usage(format!(
            "target `{text}` is used with several arities; write name/arity"
        ))),
    }
}

pub fn write_task(dir: &Path, task: &LearningTask) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(BACKGROUND_FILE), task.background_text())?;
    std::fs::write(dir.join(EXAMPLES_FILE), task.examples_text())?;
    std::fs::write(dir.join(BIAS_FILE), task.bias_text())?;
    Ok(())
}

pub fn read_task(dir: &Path) -> Result<LearningTask, CliError> {
    Ok(LearningTask::from_texts(
        &read_text(&dir.join(BACKGROUND_FILE))?,
        &read_text(&dir.join(EXAMPLES_FILE))?,
        &read_text(&dir.join(BIAS_FILE))?,
    )?)
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).unwrap_or_default();
    s.push('\n');
    s
}

#[derive(Debug, Clone, Serialize)]
pub struct MappingRecord {
    pub piece: String,
    pub arity: usize,
    pub attribute: String,
    pub bounds: Vec<(f64, f64)>,
    pub probability: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub refines: Option<String>,
}

impl From<&MappingRow> for MappingRecord {
    fn from(r: &MappingRow) -> Self {
        MappingRecord {
            piece: r.piece.name.clone(),
            arity: r.piece.arity,
            attribute: r.attribute.to_string(),
            bounds: r.bounds.clone(),
            probability: r.probability,
            refines: r.refines.as_ref().map(|k| k.to_string()),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct QueryRecord {
    pub query: String,
    pub probability: f64,
    pub conditioned: bool,
    pub cells: usize,
    pub worlds: u64,
}

impl From<&QueryResult> for QueryRecord {
    fn from(r: &QueryResult) -> Self {
        QueryRecord {
            query: r.query.to_string(),
            probability: r.probability,
            conditioned: r.conditioned,
            cells: r.cells,
            worlds: r.choices,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RuleRecord {
    pub clause: String,
    pub precision: f64,
    pub body_length: usize,
    pub negations: usize,
    pub true_positives: f64,
    pub false_positives: f64,
    pub best_effort: bool,
}

/// Hypothesis summary with the columns rule precision, negations,
/// predicates and rule count.
#[derive(Debug, Clone, Serialize)]
pub struct HypothesisRecord {
    pub target: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub prec: Option<f64>,
    #[serde(rename = "Neg", skip_serializing_if = "Option::is_none")]
    pub neg: Option<f64>,
    #[serde(rename = "Pred", skip_serializing_if = "Option::is_none")]
    pub pred: Option<f64>,
    #[serde(rename = "Rules")]
    pub rules: usize,
    pub clauses: Vec<RuleRecord>,
    pub residual: Vec<String>,
}

impl From<&Hypothesis> for HypothesisRecord {
    fn from(h: &Hypothesis) -> Self {
        let s = score_hypothesis(h);
        HypothesisRecord {
            target: h.target.to_string(),
            prec: s.precision,
            neg: s.negations,
            pred: s.predicates,
            rules: s.rules,
            clauses: h
                .clauses
                .iter()
                .zip(&h.stats)
                .map(|(c, st)| RuleRecord {
                    clause: c.to_string(),
                    precision: st.precision,
                    body_length: st.body_length,
                    negations: st.negations,
                    true_positives: st.true_positives,
                    false_positives: st.false_positives,
                    best_effort: st.best_effort,
                })
                .collect(),
            residual: h.residual.iter().map(|a| a.to_string()).collect(),
        }
    }
}

/// Program text of a list of statements.
pub fn program_text(statements: Vec<Statement>) -> String {
    hybridpp_core::program::print(&Program::new(statements))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples_accept_facts_and_labels() {
        let ex = parse_examples("t(a). 1 :: t(b). 0 :: t(c).").unwrap();
        let labels: Vec<(String, bool)> = ex.iter().map(|e| (e.atom.to_string(), e.positive)).collect();
        assert_eq!(
            labels,
            [("t(a)".into(), true), ("t(b)".into(), true), ("t(c)".into(), false)]
        );
        assert!(parse_examples("t(X).").is_err());
        assert!(parse_examples("0.5 :: t(a).").is_err());
    }

    #[test]
    fn targets() {
        let ex = parse_examples("t(a). t(b).").unwrap();
        assert_eq!(parse_target("t", &ex).unwrap(), PredKey::new("t", 1));
        assert_eq!(parse_target("u/0", &ex).unwrap(), PredKey::new("u", 0));
        assert!(matches!(parse_target("", &ex), Err(CliError::Usage(_))));
        assert!(matches!(parse_target("u", &ex), Err(CliError::Input(_))));
    }
}
