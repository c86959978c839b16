use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::ast::*;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Quoted(String),
    Var(String),
    Number(f64),
    LParen,
    RParen,
    Comma,
    Dot,
    Neck,
    Weight,
    Not,
    Plus,
    Minus,
    Star,
    Caret,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) | Tok::Var(s) => format!("`{s}`"),
            Tok::Quoted(s) => format!("'{s}'"),
            Tok::Number(x) => format!("number {x}"),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Dot => "`.`".into(),
            Tok::Neck => "`:-`".into(),
            Tok::Weight => "`::`".into(),
            Tok::Not => "`\\+`".into(),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Caret => "`^`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    pos: Position,
}

fn syntax(pos: Position, message: impl Into<String>) -> Error {
    Error::Syntax {
        line: pos.line,
        column: pos.column,
        message: message.into(),
    }
}

struct Cursor {
    chars: Vec<char>,
    i: usize,
    line: usize,
    column: usize,
}

impl Cursor {
    fn peek(&self, offset: usize) -> Option<char> {
        self.chars.get(self.i + offset).copied()
    }

    fn pos(&self) -> Position {
        Position {
            line: self.line,
            column: self.column,
        }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek(0)?;
        self.i += 1;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn eat_digits(&mut self) {
        while self.peek(0).is_some_and(|d| d.is_ascii_digit()) {
            self.bump();
        }
    }

    fn text_from(&self, start: usize) -> String {
        self.chars[start..self.i].iter().collect()
    }
}

fn lex(text: &str) -> Result<Vec<Spanned>> {
    let mut cur = Cursor {
        chars: text.chars().collect(),
        i: 0,
        line: 1,
        column: 1,
    };
    let mut out = Vec::new();
    while let Some(c) = cur.peek(0) {
        let pos = cur.pos();
        if c.is_whitespace() {
            cur.bump();
            continue;
        }
        if c == '%' {
            while cur.peek(0).is_some_and(|c| c != '\n') {
                cur.bump();
            }
            continue;
        }
        if c == '/' && cur.peek(1) == Some('*') {
            cur.bump();
            cur.bump();
            loop {
                match (cur.peek(0), cur.peek(1)) {
                    (None, _) => return Err(syntax(pos, "unterminated comment")),
                    (Some('*'), Some('/')) => {
                        cur.bump();
                        cur.bump();
                        break;
                    }
                    _ => {
                        cur.bump();
                    }
                }
            }
            continue;
        }
        let start = cur.i;
        let tok = if c.is_ascii_alphabetic() || c == '_' {
            while cur.peek(0).is_some_and(|c| c.is_ascii_alphanumeric() || c == '_') {
                cur.bump();
            }
            let word = cur.text_from(start);
            if c.is_ascii_uppercase() || c == '_' {
                Tok::Var(word)
            } else {
                Tok::Ident(word)
            }
        } else if c.is_ascii_digit() {
            cur.eat_digits();
            if cur.peek(0) == Some('.') && cur.peek(1).is_some_and(|d| d.is_ascii_digit()) {
                cur.bump();
                cur.eat_digits();
            }
            if matches!(cur.peek(0), Some('e') | Some('E')) {
                let sign = usize::from(matches!(cur.peek(1), Some('+') | Some('-')));
                if cur.peek(1 + sign).is_some_and(|d| d.is_ascii_digit()) {
                    for _ in 0..=sign {
                        cur.bump();
                    }
                    cur.eat_digits();
                }
            }
            let text = cur.text_from(start);
            let value: f64 = text
                .parse()
                .map_err(|_| syntax(pos, format!("malformed number `{text}`")))?;
            if !value.is_finite() {
                return Err(syntax(pos, format!("number `{text}` out of range")));
            }
            Tok::Number(value)
        } else if c == '\'' {
            cur.bump();
            let mut s = String::new();
            loop {
                match (cur.peek(0), cur.peek(1)) {
                    (None, _) => return Err(syntax(pos, "unterminated quoted atom")),
                    (Some('\''), Some('\'')) => {
                        s.push('\'');
                        cur.bump();
                        cur.bump();
                    }
                    (Some('\''), _) => {
                        cur.bump();
                        break;
                    }
                    (Some(ch), _) => {
                        s.push(ch);
                        cur.bump();
                    }
                }
            }
            Tok::Quoted(s)
        } else {
            let (tok, len) = match (c, cur.peek(1)) {
                (':', Some('-')) => (Tok::Neck, 2),
                (':', Some(':')) => (Tok::Weight, 2),
                ('\\', Some('+')) => (Tok::Not, 2),
                ('(', _) => (Tok::LParen, 1),
                (')', _) => (Tok::RParen, 1),
                (',', _) => (Tok::Comma, 1),
                ('.', _) => (Tok::Dot, 1),
                ('+', _) => (Tok::Plus, 1),
                ('-', _) => (Tok::Minus, 1),
                ('*', _) => (Tok::Star, 1),
                ('^', _) => (Tok::Caret, 1),
                _ => return Err(syntax(pos, format!("unexpected character `{c}`"))),
            };
            for _ in 0..len {
                cur.bump();
            }
            tok
        };
        out.push(Spanned { tok, pos });
    }
    out.push(Spanned {
        tok: Tok::Eof,
        pos: cur.pos(),
    });
    Ok(out)
}

struct Parser {
    toks: Vec<Spanned>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].tok
    }

    fn peek_at(&self, offset: usize) -> &Tok {
        let i = (self.at + offset).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn pos(&self) -> Position {
        self.toks[self.at].pos
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].tok.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok) -> Result<()> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected(&format!("expected {}", want.describe())))
        }
    }

    fn unexpected(&self, what: &str) -> Error {
        syntax(self.pos(), format!("{what}, found {}", self.peek().describe()))
    }

    fn program(&mut self) -> Result<Program> {
        let mut program = Program::default();
        while *self.peek() != Tok::Eof {
            let pos = self.pos();
            let statement = self.statement()?;
            self.expect(Tok::Dot)?;
            program.statements.push(statement);
            program.positions.push(pos);
        }
        Ok(program)
    }

    fn statement(&mut self) -> Result<Statement> {
        match self.peek().clone() {
            Tok::LParen if matches!(self.peek_at(1), Tok::Var(_)) && *self.peek_at(2) == Tok::Comma => {
                self.bump();
                let Tok::Var(var) = self.bump() else { unreachable!() };
                self.bump();
                let distribution = match self.bump() {
                    Tok::Ident(n) | Tok::Var(n) => n,
                    _ => {
                        self.at -= 1;
                        return Err(self.unexpected("expected a distribution name"));
                    }
                };
                let mut parameters = Vec::new();
                for t in self.arguments()? {
                    match t.as_number() {
                        Some(x) => parameters.push(x),
                        None => {
                            return Err(syntax(
                                self.toks[self.at - 1].pos,
                                "distribution parameters must be numbers",
                            ))
                        }
                    }
                }
                self.expect(Tok::RParen)?;
                self.expect(Tok::Weight)?;
                let atom = self.atom()?;
                Ok(Statement::Distribution(DistributionFact {
                    var,
                    distribution,
                    parameters,
                    atom,
                }))
            }
            Tok::Number(_) | Tok::Var(_) | Tok::LParen | Tok::Minus => self.fact(),
            Tok::Ident(name) if name == "query" && *self.peek_at(1) == Tok::LParen => {
                self.bump();
                self.bump();
                let atom = self.atom()?;
                self.expect(Tok::RParen)?;
                Ok(Statement::Query(atom))
            }
            Tok::Ident(name) if name == "evidence" && *self.peek_at(1) == Tok::LParen => {
                self.bump();
                self.bump();
                let mut literal = self.literal()?;
                if *self.peek() == Tok::Comma {
                    self.bump();
                    let value = match self.bump() {
                        Tok::Ident(v) if v == "true" => true,
                        Tok::Ident(v) if v == "false" => false,
                        _ => return Err(syntax(self.toks[self.at - 1].pos, "expected `true` or `false`")),
                    };
                    if !value {
                        literal = match literal {
                            Literal::Pos(a) => Literal::Neg(a),
                            Literal::Neg(a) => Literal::Pos(a),
                        };
                    }
                }
                self.expect(Tok::RParen)?;
                Ok(Statement::Evidence(literal))
            }
            Tok::Ident(_) | Tok::Quoted(_) => {
                let head = self.atom()?;
                let mut body = Vec::new();
                if *self.peek() == Tok::Neck {
                    self.bump();
                    body.push(self.literal()?);
                    while *self.peek() == Tok::Comma {
                        self.bump();
                        body.push(self.literal()?);
                    }
                }
                Ok(Statement::Clause(Clause::new(head, body)))
            }
            _ => Err(self.unexpected("expected a statement")),
        }
    }

    fn fact(&mut self) -> Result<Statement> {
        let pos = self.pos();
        let weight = self.expr()?;
        self.expect(Tok::Weight)?;
        let atom = self.atom()?;
        match weight {
            PolyExpr::Num(p) => {
                if !(0.0..=1.0).contains(&p) {
                    return Err(Error::Semantic(format!(
                        "line {}:{}: probability {p} outside [0, 1]",
                        pos.line, pos.column
                    )));
                }
                Ok(Statement::Prob(ProbFact { probability: p, atom }))
            }
            weight => Ok(Statement::Continuous(ContinuousFact { weight, atom })),
        }
    }

    fn literal(&mut self) -> Result<Literal> {
        if *self.peek() == Tok::Not {
            self.bump();
            Ok(Literal::Neg(self.atom()?))
        } else {
            Ok(Literal::Pos(self.atom()?))
        }
    }

    fn atom(&mut self) -> Result<Atom> {
        let name = match self.bump() {
            Tok::Ident(n) | Tok::Quoted(n) => n,
            _ => {
                self.at -= 1;
                return Err(self.unexpected("expected a predicate name"));
            }
        };
        let args = self.arguments()?;
        Ok(Atom::new(name, args))
    }

    fn arguments(&mut self) -> Result<Vec<Term>> {
        let mut args = Vec::new();
        if *self.peek() == Tok::LParen {
            self.bump();
            args.push(self.term()?);
            while *self.peek() == Tok::Comma {
                self.bump();
                args.push(self.term()?);
            }
            self.expect(Tok::RParen)?;
        }
        Ok(args)
    }

    fn term(&mut self) -> Result<Term> {
        match self.bump() {
            Tok::Var(v) => Ok(Term::Var(v)),
            Tok::Number(x) => Ok(Term::number(x)),
            Tok::Minus => match self.bump() {
                Tok::Number(x) => Ok(Term::number(-x)),
                _ => {
                    self.at -= 1;
                    Err(self.unexpected("expected a number after `-`"))
                }
            },
            Tok::Ident(f) | Tok::Quoted(f) => {
                let args = self.arguments()?;
                if args.is_empty() {
                    Ok(Term::Symbol(f))
                } else {
                    Ok(Term::Compound(f, args))
                }
            }
            _ => {
                self.at -= 1;
                Err(self.unexpected("expected a term"))
            }
        }
    }

    fn expr(&mut self) -> Result<PolyExpr> {
        let mut lhs = self.product()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    lhs = PolyExpr::Add(Box::new(lhs), Box::new(self.product()?));
                }
                Tok::Minus => {
                    self.bump();
                    lhs = PolyExpr::Sub(Box::new(lhs), Box::new(self.product()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn product(&mut self) -> Result<PolyExpr> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    lhs = PolyExpr::Mul(Box::new(lhs), Box::new(self.unary()?));
                }
                // juxtaposition, as in `0.0005 I`
                Tok::Number(_) | Tok::Var(_) | Tok::LParen => {
                    lhs = PolyExpr::Mul(Box::new(lhs), Box::new(self.unary()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<PolyExpr> {
        if *self.peek() == Tok::Minus {
            self.bump();
            if let Tok::Number(x) = *self.peek() {
                if *self.peek_at(1) != Tok::Caret {
                    self.bump();
                    return Ok(PolyExpr::Num(if x == 0.0 { 0.0 } else { -x }));
                }
            }
            return Ok(PolyExpr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<PolyExpr> {
        let base = self.primary()?;
        if *self.peek() != Tok::Caret {
            return Ok(base);
        }
        self.bump();
        let pos = self.pos();
        match self.bump() {
            Tok::Number(e) if e >= 0.0 && e == crate::math::floor(e) && e <= u32::MAX as f64 => {
                Ok(PolyExpr::Pow(Box::new(base), e as u32))
            }
            _ => Err(syntax(pos, "exponent must be a non-negative integer")),
        }
    }

    fn primary(&mut self) -> Result<PolyExpr> {
        match self.bump() {
            Tok::Number(x) => Ok(PolyExpr::Num(x)),
            Tok::Var(v) => Ok(PolyExpr::Var(v)),
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            _ => {
                self.at -= 1;
                Err(self.unexpected("expected a number, variable or `(`"))
            }
        }
    }
}

/// Parses program text. Checks syntax and probability ranges only; see
/// [`super::load`] for the semantic checks.
pub fn parse(text: &str) -> Result<Program> {
    let toks = lex(text)?;
    Parser { toks, at: 0 }.program()
}

/// Parses a single atom such as `t(a, 3)`.
pub fn parse_atom(text: &str) -> Result<Atom> {
    let toks = lex(text)?;
    let mut p = Parser { toks, at: 0 };
    let atom = p.atom()?;
    if *p.peek() == Tok::Dot {
        p.bump();
    }
    if *p.peek() != Tok::Eof {
        return Err(p.unexpected("expected end of atom"));
    }
    Ok(atom)
}

/// Parses a weight expression such as `0.5 + 2*(X - 1)`.
pub fn parse_poly_expr(text: &str) -> Result<PolyExpr> {
    let toks = lex(text)?;
    let mut p = Parser { toks, at: 0 };
    let e = p.expr()?;
    if *p.peek() != Tok::Eof {
        return Err(p.unexpected("expected end of expression"));
    }
    Ok(e)
}

impl core::str::FromStr for Program {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse(s)
    }
}
