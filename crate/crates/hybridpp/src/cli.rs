//! Command-line interface.
//!
//! Exit codes: 0 success, 1 usage error, 2 bad input, 3 inference refused.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;

use hybridpp_core::engine::{evaluate, EngineOptions, DEFAULT_CHOICE_CAP};
use hybridpp_core::program::{piece_names, AttributeDensity, FragmentOptions};
use hybridpp_core::rulelearn::{induce_with, InduceOptions};
use hybridpp_core::transform::{discretize_program, emit_learning_task};

use crate::data::Table;
use crate::files::{self, HypothesisRecord, MappingRecord, QueryRecord};
use crate::learn::{self, LearnConfig, LearnStats, LearnedAttribute, MethodChoice, Parallel};
use crate::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "hybridpp",
    version,
    about = "Piecewise-polynomial densities in probabilistic logic programs"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a density per CSV column and write it as a hybrid program.
    Learn(LearnArgs),
    /// Answer the queries of a program, with its evidence.
    Query(QueryArgs),
    /// Replace continuous facts by their piece probabilities.
    Transform(TransformArgs),
    /// Learn rules for a target predicate.
    Induce(InduceArgs),
    /// Sample an attribute's density on an even grid.
    Plotdata(PlotArgs),
    /// Summarize the attributes and pieces of a program.
    Stats(StatsArgs),
}

#[derive(Debug, Args)]
pub struct LearnArgs {
    /// CSV file with a header row; empty cells are missing values.
    pub csv: PathBuf,
    /// Columns to learn; all except the key and target by default.
    #[arg(long, value_delimiter = ',')]
    pub columns: Vec<String>,
    /// Entity column; makes densities keyed and adds observation facts.
    #[arg(long)]
    pub key: Option<String>,
    /// Class column for the distance method.
    #[arg(long)]
    pub target: Option<String>,
    /// Largest bin count the search tries.
    #[arg(long, default_value_t = 40)]
    pub max_size: usize,
    /// Largest polynomial degree the search tries.
    #[arg(long, default_value_t = 8)]
    pub max_order: usize,
    /// Fixed number of bins.
    #[arg(long)]
    pub bins: Option<usize>,
    /// Cutpoint method.
    #[arg(long, value_enum, default_value_t = MethodChoice::Auto)]
    pub method: MethodChoice,
    /// JSON object mapping a column to its piece names.
    #[arg(long)]
    pub aliases: Option<PathBuf>,
    /// Directory for program.pl and stats.json.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Recorded in the stats; the fit itself is deterministic.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct QueryArgs {
    /// Program files, read as one program.
    #[arg(required = true)]
    pub programs: Vec<PathBuf>,
    /// Extra file with evidence statements.
    #[arg(long)]
    pub evidence: Option<PathBuf>,
    /// Refuse queries with more worlds than this.
    #[arg(long, default_value_t = DEFAULT_CHOICE_CAP)]
    pub choice_cap: u64,
    /// Directory for results.json.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TransformArgs {
    /// Program files, read as one program.
    #[arg(required = true)]
    pub programs: Vec<PathBuf>,
    /// Target predicate, `name` or `name/arity`; writes the learning task.
    #[arg(long, requires = "examples")]
    pub target: Option<String>,
    /// Labelled examples: facts are positive, `0 :: t(a).` is negative.
    #[arg(long, requires = "target")]
    pub examples: Option<PathBuf>,
    /// Directory for discretized.pl, mapping.json and task files.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct InduceArgs {
    /// Program files, or one directory holding a learning task.
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    /// Target predicate, `name` or `name/arity`; needed with program files.
    #[arg(long)]
    pub target: Option<String>,
    /// Labelled examples; needed with program files.
    #[arg(long)]
    pub examples: Option<PathBuf>,
    /// Precision a clause must reach before it is accepted.
    #[arg(long, default_value_t = 0.99)]
    pub precision: f64,
    /// Longest clause body.
    #[arg(long, default_value_t = 4)]
    pub max_body: usize,
    /// Refuse background programs with more worlds than this.
    #[arg(long, default_value_t = DEFAULT_CHOICE_CAP)]
    pub choice_cap: u64,
    /// Directory for hypothesis.pl and rules.json.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    /// Program files, read as one program.
    #[arg(required = true)]
    pub programs: Vec<PathBuf>,
    /// Attribute name, or `name/arity`.
    #[arg(long)]
    pub attribute: String,
    /// Grid points from the first to the last cutpoint.
    #[arg(long, default_value_t = 201)]
    pub points: usize,
    /// Directory for <attribute>.csv.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    /// Program files, read as one program.
    #[arg(required = true)]
    pub programs: Vec<PathBuf>,
    /// Directory for program_stats.json.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write) -> Result<(), CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            write!(stdout, "{e}")?;
            return Ok(());
        }
        Err(e) => return Err(CliError::Usage(e.to_string().trim_end().to_string())),
    };
    match cli.command {
        Command::Learn(a) => cmd_learn(&a, stdout),
        Command::Query(a) => cmd_query(&a, stdout),
        Command::Transform(a) => cmd_transform(&a, stdout),
        Command::Induce(a) => cmd_induce(&a, stdout),
        Command::Plotdata(a) => cmd_plotdata(&a, stdout),
        Command::Stats(a) => cmd_stats(&a, stdout),
    }
}

/// Writes `name` into `out`, or `text` to stdout without an output directory.
fn emit(out: Option<&Path>, name: &str, text: &str, stdout: &mut dyn Write) -> Result<(), CliError> {
    match out {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            std::fs::write(dir.join(name), text)?;
        }
        None => stdout.write_all(text.as_bytes())?,
    }
    Ok(())
}

pub fn cmd_learn(a: &LearnArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    if a.method == MethodChoice::Distance && a.target.is_none() {
        return Err(CliError::Usage("--method distance needs --target".into()));
    }
    let table = Table::read(&a.csv)?;
    let columns: Vec<String> = if a.columns.is_empty() {
        table
            .headers
            .iter()
            .filter(|h| Some(*h) != a.key.as_ref() && Some(*h) != a.target.as_ref())
            .cloned()
            .collect()
    } else {
        a.columns.clone()
    };
    if columns.is_empty() {
        return Err(CliError::Usage("no columns to learn".into()));
    }
    let aliases: BTreeMap<String, Vec<String>> = match &a.aliases {
        Some(p) => {
            serde_json::from_str(&files::read_text(p)?).map_err(|e| CliError::Input(format!("{}: {e}", p.display())))?
        }
        None => BTreeMap::new(),
    };
    let key_col = a.key.as_deref().map(|k| table.column_index(k)).transpose()?;
    let target_col = a.target.as_deref().map(|t| table.column_index(t)).transpose()?;
    let config = LearnConfig {
        max_size: a.max_size,
        max_order: a.max_order,
        bins: a.bins,
        method: a.method,
        ..LearnConfig::default()
    };

    let mut inputs = Vec::new();
    for name in &columns {
        let col = table.numeric(name)?;
        let mut values = Vec::new();
        let mut labels = Vec::new();
        let mut missing = col.missing;
        for &(row, x) in &col.values {
            match target_col.map(|t| table.cell(row, t)) {
                Some(None) => missing += 1,
                Some(Some(label)) => {
                    values.push((row, x));
                    labels.push(label.to_string());
                }
                None => values.push((row, x)),
            }
        }
        inputs.push((col.name, values, labels, missing));
    }
    let learned: Vec<LearnedAttribute> = inputs
        .par_iter()
        .map(|(name, values, labels, missing)| {
            let data: Vec<f64> = values.iter().map(|v| v.1).collect();
            let labels = target_col.map(|_| labels.as_slice());
            learn::learn_attribute(name, &data, labels, *missing, &config)
                .map_err(|e| CliError::Input(format!("column `{name}`: {e}")))
        })
        .collect::<Result<_, _>>()?;

    let mut program = String::new();
    let mut names = Vec::new();
    for (attr, (_, values, _, _)) in learned.iter().zip(&inputs) {
        let options = FragmentOptions {
            aliases: aliases.get(&attr.name).cloned(),
            keyed: key_col.is_some(),
        };
        names.push(piece_names(
            &attr.name,
            attr.density().len(),
            options.aliases.as_deref(),
        )?);
        program.push_str(&learn::fragment(attr, &options)?);
        if let Some(k) = key_col {
            for &(row, x) in values {
                if let Some(id) = table.cell(row, k) {
                    program.push_str(&format!("{}({}, {x}).\n", attr.name, entity(id)));
                }
            }
        }
    }
    if let (Some(k), Some(key)) = (key_col, &a.key) {
        for row in 0..table.rows.len() {
            if let Some(id) = table.cell(row, k) {
                program.push_str(&format!("{key}({}).\n", entity(id)));
            }
        }
    }
    // the emitted text must load as a program
    hybridpp_core::program::load(hybridpp_core::program::parse(&program)?)?;
    let stats = LearnStats::new(&learned, &names, a.seed);
    match &a.out {
        Some(dir) => {
            emit(Some(dir), "program.pl", &program, stdout)?;
            emit(Some(dir), "stats.json", &files::to_json(&stats), stdout)?;
        }
        None => emit(None, "", &program, stdout)?,
    }
    Ok(())
}

/// An entity identifier as a program constant.
fn entity(id: &str) -> String {
    let plain = id.chars().next().is_some_and(|c| c.is_ascii_lowercase())
        && id.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
    if plain {
        id.to_string()
    } else if id.parse::<f64>().is_ok() {
        format!("e{}", id.replace(['.', '-', '+'], "_"))
    } else {
        let cleaned: String = id
            .chars()
            .map(|c| {
                if c.is_ascii_alphanumeric() {
                    c.to_ascii_lowercase()
                } else {
                    '_'
                }
            })
            .collect();
        format!("e_{cleaned}")
    }
}

fn engine_options(cap: u64) -> EngineOptions {
    EngineOptions {
        choice_cap: cap,
        ..EngineOptions::default()
    }
}

pub fn cmd_query(a: &QueryArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let mut paths = a.programs.clone();
    paths.extend(a.evidence.iter().cloned());
    let hp = files::load_program(&paths)?;
    if hp.queries().next().is_none() {
        return Err(CliError::Input("the program declares no queries".into()));
    }
    let results = evaluate(&hp, &engine_options(a.choice_cap))?;
    let records: Vec<QueryRecord> = results.iter().map(QueryRecord::from).collect();
    emit(a.out.as_deref(), "results.json", &files::to_json(&records), stdout)
}

pub fn cmd_transform(a: &TransformArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let hp = files::load_program(&a.programs)?;
    let dp = discretize_program(&hp)?;
    let text = hybridpp_core::program::print(&dp.program);
    let mapping: Vec<MappingRecord> = dp.mapping.iter().map(MappingRecord::from).collect();
    let task = match (&a.target, &a.examples) {
        (Some(t), Some(e)) => {
            let examples = files::parse_examples(&files::read_text(e)?)?;
            let target = files::parse_target(t, &examples)?;
            Some(emit_learning_task(&hp, &target, &examples)?)
        }
        _ => None,
    };
    match &a.out {
        Some(dir) => {
            emit(Some(dir), "discretized.pl", &text, stdout)?;
            emit(Some(dir), "mapping.json", &files::to_json(&mapping), stdout)?;
            if let Some(task) = &task {
                files::write_task(dir, task)?;
            }
        }
        None => emit(None, "", &text, stdout)?,
    }
    Ok(())
}

pub fn cmd_induce(a: &InduceArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let task = if a.inputs.len() == 1 && a.inputs[0].is_dir() {
        files::read_task(&a.inputs[0])?
    } else {
        let (Some(t), Some(e)) = (&a.target, &a.examples) else {
            return Err(CliError::Usage(
                "induce on program files needs --target and --examples".into(),
            ));
        };
        let hp = files::load_program(&a.inputs)?;
        let examples = files::parse_examples(&files::read_text(e)?)?;
        let target = files::parse_target(t, &examples)?;
        emit_learning_task(&hp, &target, &examples)?
    };
    let options = InduceOptions {
        precision: a.precision,
        max_body: a.max_body,
        engine: engine_options(a.choice_cap),
    };
    let h = induce_with(&task, &options, &Parallel)?;
    let text = hybridpp_core::program::print(&h.program());
    let record = HypothesisRecord::from(&h);
    match &a.out {
        Some(dir) => {
            emit(Some(dir), "hypothesis.pl", &text, stdout)?;
            emit(Some(dir), "rules.json", &files::to_json(&record), stdout)?;
        }
        None => emit(None, "", &text, stdout)?,
    }
    Ok(())
}

/// `npoints` evenly spaced `(x, density)` rows over the support.
pub fn plot_rows(pp: &hybridpp_core::poly::PiecewisePolynomial, npoints: usize) -> Vec<(f64, f64)> {
    let (lo, hi) = pp.support();
    (0..npoints)
        .map(|i| {
            let x = if npoints == 1 {
                lo
            } else if i + 1 == npoints {
                hi
            } else {
                lo + (hi - lo) * i as f64 / (npoints - 1) as f64
            };
            (x, pp.evaluate(x))
        })
        .collect()
}

pub fn cmd_plotdata(a: &PlotArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    if a.points == 0 {
        return Err(CliError::Usage("--points must be at least 1".into()));
    }
    let hp = files::load_program(&a.programs)?;
    let attr = hp
        .attributes
        .iter()
        .find(|(k, _)| k.to_string() == a.attribute || k.name == a.attribute)
        .map(|(_, v)| v)
        .ok_or_else(|| CliError::Input(format!("no attribute `{}`", a.attribute)))?;
    let AttributeDensity::Univariate(pp) = &attr.density else {
        return Err(CliError::Input(format!(
            "attribute `{}` is not univariate",
            a.attribute
        )));
    };
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["x", "density"])
        .map_err(|e| CliError::Input(e.to_string()))?;
    for (x, y) in plot_rows(pp, a.points) {
        w.write_record([x.to_string(), y.to_string()])
            .map_err(|e| CliError::Input(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Input(e.to_string()))?;
    let text = String::from_utf8_lossy(&bytes).into_owned();
    emit(a.out.as_deref(), &format!("{}.csv", attr.key.name), &text, stdout)
}

#[derive(Debug, Serialize)]
struct ProgramStats {
    attributes: Vec<AttributeSummary>,
    prob_facts: usize,
    clauses: usize,
    queries: usize,
    evidence: usize,
}

#[derive(Debug, Serialize)]
struct AttributeSummary {
    attribute: String,
    dimension: usize,
    support: Vec<(f64, f64)>,
    mass: f64,
    pieces: Vec<PieceSummary>,
}

#[derive(Debug, Serialize)]
struct PieceSummary {
    predicate: String,
    bounds: Vec<(f64, f64)>,
    mass: f64,
}

pub fn cmd_stats(a: &StatsArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let hp = files::load_program(&a.programs)?;
    let stats = ProgramStats {
        attributes: hp
            .attributes
            .values()
            .map(|attr| AttributeSummary {
                attribute: attr.key.to_string(),
                dimension: attr.dimension(),
                support: attr.support.clone(),
                mass: attr.pieces.iter().map(|p| p.mass).sum(),
                pieces: attr
                    .pieces
                    .iter()
                    .map(|p| PieceSummary {
                        predicate: p.predicate.to_string(),
                        bounds: p.bounds.clone(),
                        mass: p.mass,
                    })
                    .collect(),
            })
            .collect(),
        prob_facts: hp.prob_facts().count(),
        clauses: hp.clauses().count(),
        queries: hp.queries().count(),
        evidence: hp.evidence().count(),
    };
    emit(a.out.as_deref(), "program_stats.json", &files::to_json(&stats), stdout)
}
