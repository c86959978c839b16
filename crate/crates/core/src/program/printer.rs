use alloc::string::String;
use core::fmt::{self, Display, Formatter, Write};

use super::ast::*;

fn plain_symbol(s: &str) -> bool {
    let mut chars = s.chars();
    chars.next().is_some_and(|c| c.is_ascii_lowercase()) && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn write_name(f: &mut Formatter<'_>, s: &str) -> fmt::Result {
    if plain_symbol(s) {
        f.write_str(s)
    } else {
        f.write_char('\'')?;
        for c in s.chars() {
            if c == '\'' {
                f.write_str("''")?;
            } else {
                f.write_char(c)?;
            }
        }
        f.write_char('\'')
    }
}

fn write_args(f: &mut Formatter<'_>, args: &[Term]) -> fmt::Result {
    if args.is_empty() {
        return Ok(());
    }
    f.write_char('(')?;
    for (i, a) in args.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{a}")?;
    }
    f.write_char(')')
}

impl Display for Term {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            Term::Symbol(s) => write_name(f, s),
            Term::Number(x) => write!(f, "{x}"),
            Term::Var(v) => f.write_str(v),
            Term::Compound(name, args) => {
                write_name(f, name)?;
                write_args(f, args)
            }
        }
    }
}

impl Display for Atom {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        write_name(f, &self.predicate)?;
        write_args(f, &self.args)
    }
}

impl Display for Literal {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            Literal::Pos(a) => write!(f, "{a}"),
            Literal::Neg(a) => write!(f, "\\+ {a}"),
        }
    }
}

impl Display for Clause {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.head)?;
        for (i, l) in self.body.iter().enumerate() {
            f.write_str(if i == 0 { " :- " } else { ", " })?;
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

impl PolyExpr {
    fn precedence(&self) -> u8 {
        match self {
            PolyExpr::Add(..) | PolyExpr::Sub(..) => 1,
            PolyExpr::Mul(..) => 2,
            PolyExpr::Neg(_) => 3,
            PolyExpr::Num(x) if x.is_sign_negative() => 3,
            PolyExpr::Pow(..) => 4,
            PolyExpr::Num(_) | PolyExpr::Var(_) => 5,
        }
    }

    fn write_at(&self, f: &mut Formatter<'_>, min: u8) -> fmt::Result {
        if self.precedence() < min {
            f.write_char('(')?;
            self.write_at(f, 0)?;
            return f.write_char(')');
        }
        match self {
            PolyExpr::Num(x) => write!(f, "{x}"),
            PolyExpr::Var(v) => f.write_str(v),
            PolyExpr::Neg(a) => {
                f.write_char('-')?;
                // `-2` would read back as a negative literal
                let min = match **a {
                    PolyExpr::Num(_) => 6,
                    _ => 3,
                };
                a.write_at(f, min)
            }
            PolyExpr::Add(a, b) => {
                a.write_at(f, 1)?;
                f.write_str(" + ")?;
                b.write_at(f, 2)
            }
            PolyExpr::Sub(a, b) => {
                a.write_at(f, 1)?;
                f.write_str(" - ")?;
                b.write_at(f, 2)
            }
            PolyExpr::Mul(a, b) => {
                a.write_at(f, 2)?;
                f.write_char('*')?;
                b.write_at(f, 3)
            }
            PolyExpr::Pow(a, n) => {
                a.write_at(f, 5)?;
                write!(f, "^{n}")
            }
        }
    }
}

impl Display for PolyExpr {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        self.write_at(f, 0)
    }
}

impl Display for Statement {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            Statement::Clause(c) => write!(f, "{c}."),
            Statement::Prob(p) => write!(f, "{} :: {}.", p.probability, p.atom),
            Statement::Continuous(c) => write!(f, "{} :: {}.", c.weight, c.atom),
            Statement::Distribution(d) => {
                write!(f, "({}, {}(", d.var, d.distribution)?;
                for (i, x) in d.parameters.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{x}")?;
                }
                write!(f, ")) :: {}.", d.atom)
            }
            Statement::Query(q) => write!(f, "query({q})."),
            Statement::Evidence(e) => write!(f, "evidence({e})."),
        }
    }
}

impl Display for Program {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        for s in &self.statements {
            writeln!(f, "{s}")?;
        }
        Ok(())
    }
}

/// Program text, one statement per line. Numbers use the shortest decimal
/// form that reads back to the same `f64`.
pub fn print(program: &Program) -> String {
    alloc::format!("{program}")
}
