use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use super::ast::*;
use super::weight;
use crate::error::{Error, Result};
use crate::poly::PiecewisePolynomial;

/// Naming and shape of an emitted density block.
#[derive(Debug, Clone, Default)]
pub struct FragmentOptions {
    /// Names for the pieces in order; `<attr>_<i>` when absent.
    pub aliases: Option<Vec<String>>,
    /// Emit `attr(E, X)` with an entity argument instead of `attr(X)`.
    pub keyed: bool,
}

/// Variable names used for an attribute's value and entity arguments.
pub fn variable_names(attribute: &str) -> (String, String) {
    let value = attribute
        .chars()
        .next()
        .filter(|c| c.is_ascii_alphabetic())
        .map(|c| c.to_ascii_uppercase())
        .unwrap_or('X');
    let key = if value == 'E' { "K" } else { "E" };
    (String::from(value), String::from(key))
}

/// Piece predicate names of an attribute with `n` pieces.
pub fn piece_names(attribute: &str, n: usize, aliases: Option<&[String]>) -> Result<Vec<String>> {
    match aliases {
        Some(a) if a.len() != n => Err(Error::Contract(format!(
            "{} aliases for {n} pieces of {attribute}",
            a.len()
        ))),
        Some(a) => Ok(a.to_vec()),
        None => Ok((1..=n).map(|i| format!("{attribute}_{i}")).collect()),
    }
}

/// Continuous facts and guard clauses stating `pp` as the density of `attribute`.
///
/// Piece `i` reads `w_i(X) :: attr_i(X).` with guard
/// `attr_i(X) :- attr(X), ininterval(X, cp_i, cp_i+1).`
pub fn density_fragment(attribute: &str, pp: &PiecewisePolynomial, options: &FragmentOptions) -> Result<Program> {
    let names = piece_names(attribute, pp.len(), options.aliases.as_deref())?;
    let (value, key) = variable_names(attribute);
    let x = Term::var(value.as_str());
    let (attr_args, head_args) = if options.keyed {
        (vec![Term::var(key.as_str()), x.clone()], vec![Term::var(key.as_str())])
    } else {
        (vec![x.clone()], vec![x.clone()])
    };
    let mut program = Program::default();
    for (i, (piece, name)) in pp.pieces().iter().zip(&names).enumerate() {
        let (lo, hi) = pp.interval(i);
        let head = Atom::new(name.as_str(), head_args.clone());
        program.push(Statement::Continuous(ContinuousFact {
            weight: weight::expression(piece, &value),
            atom: head.clone(),
        }));
        program.push(Statement::Clause(Clause::new(
            head,
            vec![
                Literal::Pos(Atom::new(attribute, attr_args.clone())),
                Literal::Pos(Atom::new(
                    "ininterval",
                    vec![x.clone(), Term::number(lo), Term::number(hi)],
                )),
            ],
        )));
    }
    Ok(program)
}
