use alloc::format;
use alloc::vec::Vec;

use super::ast::PolyExpr;
use crate::error::{Error, Result};
use crate::poly::{MultiPolynomial, Polynomial};

const MAX_EXPONENT: u32 = 64;

/// Anchor implied by `(var - c)` or `(var + c)` subterms, when they all agree.
fn anchor(expr: &PolyExpr, var: &str) -> Option<f64> {
    fn walk(e: &PolyExpr, var: &str, found: &mut Vec<f64>) {
        match e {
            PolyExpr::Sub(a, b) => {
                if let (PolyExpr::Var(v), PolyExpr::Num(c)) = (&**a, &**b) {
                    if v == var {
                        found.push(*c);
                    }
                }
                walk(a, var, found);
                walk(b, var, found);
            }
            PolyExpr::Add(a, b) => {
                match (&**a, &**b) {
                    (PolyExpr::Var(v), PolyExpr::Num(c)) | (PolyExpr::Num(c), PolyExpr::Var(v)) if v == var => {
                        found.push(-c)
                    }
                    _ => {}
                }
                walk(a, var, found);
                walk(b, var, found);
            }
            PolyExpr::Mul(a, b) => {
                walk(a, var, found);
                walk(b, var, found);
            }
            PolyExpr::Neg(a) | PolyExpr::Pow(a, _) => walk(a, var, found),
            PolyExpr::Num(_) | PolyExpr::Var(_) => {}
        }
    }
    let mut found = Vec::new();
    walk(expr, var, &mut found);
    let first = *found.first()?;
    found.iter().all(|&c| c == first).then_some(first)
}

fn check_exponent(n: u32) -> Result<()> {
    if n > MAX_EXPONENT {
        return Err(Error::Semantic(format!(
            "exponent {n} above the supported maximum {MAX_EXPONENT}"
        )));
    }
    Ok(())
}

/// Normalizes a weight in one variable to coefficient form.
///
/// Weights written around a shift, such as `0.1 + 0.02*(X - 70)`, are kept
/// anchored at that shift so the coefficients read back exactly.
pub fn univariate(expr: &PolyExpr, var: &str) -> Result<Polynomial> {
    let origin = anchor(expr, var).unwrap_or(0.0);
    fn eval(e: &PolyExpr, var: &str, o: f64) -> Result<Polynomial> {
        Ok(match e {
            PolyExpr::Num(x) => Polynomial::anchored([*x], o),
            PolyExpr::Var(v) if v == var => Polynomial::anchored([o, 1.0], o),
            PolyExpr::Var(v) => return Err(Error::Semantic(format!("weight uses `{v}`, expected only `{var}`"))),
            PolyExpr::Neg(a) => -eval(a, var, o)?,
            PolyExpr::Add(a, b) => eval(a, var, o)? + eval(b, var, o)?,
            PolyExpr::Sub(a, b) => eval(a, var, o)? - eval(b, var, o)?,
            PolyExpr::Mul(a, b) => eval(a, var, o)? * eval(b, var, o)?,
            PolyExpr::Pow(a, n) => {
                check_exponent(*n)?;
                let base = eval(a, var, o)?;
                let mut acc = Polynomial::anchored([1.0], o);
                for _ in 0..*n {
                    acc = &acc * &base;
                }
                acc
            }
        })
    }
    eval(expr, var, origin)
}

/// Normalizes a weight over `vars` (axis `i` is `vars[i]`), expanded around zero.
pub fn multivariate(expr: &PolyExpr, vars: &[&str]) -> Result<MultiPolynomial> {
    let dim = vars.len();
    Ok(match expr {
        PolyExpr::Num(x) => MultiPolynomial::constant(dim, *x),
        PolyExpr::Var(v) => match vars.iter().position(|w| w == v) {
            Some(axis) => MultiPolynomial::variable(dim, axis),
            None => {
                return Err(Error::Semantic(format!(
                    "weight uses `{v}`, which is not a continuous variable of the guard"
                )))
            }
        },
        PolyExpr::Neg(a) => multivariate(a, vars)?.scaled(-1.0),
        PolyExpr::Add(a, b) => &multivariate(a, vars)? + &multivariate(b, vars)?,
        PolyExpr::Sub(a, b) => &multivariate(a, vars)? - &multivariate(b, vars)?,
        PolyExpr::Mul(a, b) => &multivariate(a, vars)? * &multivariate(b, vars)?,
        PolyExpr::Pow(a, n) => {
            check_exponent(*n)?;
            multivariate(a, vars)?.powi(*n)
        }
    })
}

/// Weight expression `b_0 + b_1*(X - o) + ...` for an anchored polynomial.
///
/// Terms with zero coefficients are left out; a constant is written `c*X^0`
/// so that it is not mistaken for a probability.
pub fn expression(p: &Polynomial, var: &str) -> PolyExpr {
    use alloc::boxed::Box;
    let o = p.origin();
    let base = if o == 0.0 {
        PolyExpr::Var(var.into())
    } else if o > 0.0 {
        PolyExpr::Sub(Box::new(PolyExpr::Var(var.into())), Box::new(PolyExpr::Num(o)))
    } else {
        PolyExpr::Add(Box::new(PolyExpr::Var(var.into())), Box::new(PolyExpr::Num(-o)))
    };
    let mut out: Option<PolyExpr> = None;
    for (j, &c) in p.coefficients().iter().enumerate() {
        if c == 0.0 && !(j == 0 && p.degree() == 0) {
            continue;
        }
        let magnitude = PolyExpr::Num(if out.is_some() { c.abs() } else { c });
        let term = match j {
            0 if p.degree() == 0 => PolyExpr::Mul(
                Box::new(magnitude),
                Box::new(PolyExpr::Pow(Box::new(PolyExpr::Var(var.into())), 0)),
            ),
            0 => magnitude,
            1 => PolyExpr::Mul(Box::new(magnitude), Box::new(base.clone())),
            _ => PolyExpr::Mul(
                Box::new(magnitude),
                Box::new(PolyExpr::Pow(Box::new(base.clone()), j as u32)),
            ),
        };
        out = Some(match out {
            None => term,
            Some(acc) if c < 0.0 => PolyExpr::Sub(Box::new(acc), Box::new(term)),
            Some(acc) => PolyExpr::Add(Box::new(acc), Box::new(term)),
        });
    }
    out.unwrap_or(PolyExpr::Num(0.0))
}
