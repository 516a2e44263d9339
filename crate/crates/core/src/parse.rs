//! Recursive-descent parser for differential polynomials and matrix
//! operators.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary ('*' unary)*
//! unary   := '-' unary | power
//! power   := primary ('^' INT)?
//! primary := INT | INT '/' INT | gen | 'D' | 'Db'
//!          | ('d' | 'db') '(' expr (',' INT)? ')'
//!          | '(' expr ')'
//!          | '[' '[' expr ',' expr ']' ',' '[' expr ',' expr ']' ']'
//! gen     := 'p' | 'w' | 'zt' | 'wb' | 'ztb'
//! ```
//!
//! `*` between operators is composition; a polynomial next to an operator
//! acts by multiplication. Matrix entries may be polynomials or scalar
//! operators (`D`, `Db`, `p*D + 1`, ...).

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};

use crate::operator::{Mat2, MatrixOperator};
use crate::poly::{Coeff, DiffPoly};
use crate::symbol::Generator;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax,
    Type,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    pub kind: ParseErrorKind,
    /// Byte offset into the input.
    pub offset: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            ParseErrorKind::Syntax => "syntax error",
            ParseErrorKind::Type => "type error",
        };
        write!(f, "{kind} at offset {}: {}", self.offset, self.message)
    }
}

/// A parsed expression.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    Poly(DiffPoly),
    Operator(MatrixOperator),
}

impl Expr {
    /// Polynomials become multiplication operators.
    pub fn into_operator(self) -> MatrixOperator {
        match self {
            Expr::Poly(p) => MatrixOperator::multiplication(Mat2::scalar(p)),
            Expr::Operator(op) => op,
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Poly(p) => write!(f, "{p}"),
            Expr::Operator(op) => write!(f, "{op}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Int(BigInt),
    Ident(String),
    Sym(char),
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn tokens(src: &'a str) -> Result<Vec<(usize, Tok)>, ParseError> {
        let mut lx = Lexer { src, pos: 0 };
        let mut out = Vec::new();
        while let Some(t) = lx.next_token()? {
            out.push(t);
        }
        Ok(out)
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn next_token(&mut self) -> Result<Option<(usize, Tok)>, ParseError> {
        while self.peek().is_some_and(char::is_whitespace) {
            self.pos += 1;
        }
        let start = self.pos;
        let Some(c) = self.peek() else {
            return Ok(None);
        };
        if c.is_ascii_digit() {
            while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                self.pos += 1;
            }
            let n: BigInt = self.src[start..self.pos].parse().expect("digits");
            return Ok(Some((start, Tok::Int(n))));
        }
        if c.is_ascii_alphabetic() {
            while self.peek().is_some_and(|c| c.is_ascii_alphanumeric()) {
                self.pos += 1;
            }
            return Ok(Some((start, Tok::Ident(self.src[start..self.pos].to_string()))));
        }
        if "+-*/^()[],".contains(c) {
            self.pos += 1;
            return Ok(Some((start, Tok::Sym(c))));
        }
        Err(ParseError {
            kind: ParseErrorKind::Syntax,
            offset: start,
            message: alloc::format!("unexpected character '{c}'"),
        })
    }
}

/// Intermediate value: a polynomial, or an operator flagged when it is a
/// multiple of the identity matrix (a scalar operator).
#[derive(Clone)]
enum Value {
    Poly(DiffPoly),
    Op { op: MatrixOperator, scalar: bool },
}

impl Value {
    fn into_op(self) -> (MatrixOperator, bool) {
        match self {
            Value::Poly(p) => (MatrixOperator::multiplication(Mat2::scalar(p)), true),
            Value::Op { op, scalar } => (op, scalar),
        }
    }

    fn add(self, rhs: Value, negate: bool) -> Value {
        match (self, rhs) {
            (Value::Poly(a), Value::Poly(b)) => {
                Value::Poly(if negate { a - b } else { a + b })
            }
            (a, b) => {
                let (a, sa) = a.into_op();
                let (b, sb) = b.into_op();
                let op = if negate { &a - &b } else { &a + &b };
                Value::Op {
                    op,
                    scalar: sa && sb,
                }
            }
        }
    }

    fn mul(self, rhs: Value) -> Value {
        match (self, rhs) {
            (Value::Poly(a), Value::Poly(b)) => Value::Poly(&a * &b),
            (a, b) => {
                let (a, sa) = a.into_op();
                let (b, sb) = b.into_op();
                Value::Op {
                    op: a.compose(&b),
                    scalar: sa && sb,
                }
            }
        }
    }
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    idx: usize,
    end: usize,
}

const MAX_POWER: u32 = 64;

impl Parser {
    fn offset(&self) -> usize {
        self.toks.get(self.idx).map_or(self.end, |t| t.0)
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.idx).map(|t| &t.1)
    }

    fn syntax(&self, message: impl Into<String>) -> ParseError {
        ParseError {
            kind: ParseErrorKind::Syntax,
            offset: self.offset(),
            message: message.into(),
        }
    }

    fn type_err(offset: usize, message: impl Into<String>) -> ParseError {
        ParseError {
            kind: ParseErrorKind::Type,
            offset,
            message: message.into(),
        }
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.idx += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.syntax(alloc::format!("expected '{c}'")))
        }
    }

    fn small_int(&mut self, what: &str) -> Result<u32, ParseError> {
        match self.peek() {
            Some(Tok::Int(n)) => {
                let v = n.to_u32().filter(|v| *v <= MAX_POWER);
                match v {
                    Some(v) => {
                        self.idx += 1;
                        Ok(v)
                    }
                    None => Err(self.syntax(alloc::format!("{what} out of range"))),
                }
            }
            _ => Err(self.syntax(alloc::format!("expected integer {what}"))),
        }
    }

    fn expr(&mut self) -> Result<Value, ParseError> {
        let mut acc = self.term()?;
        loop {
            if self.eat('+') {
                acc = acc.add(self.term()?, false);
            } else if self.eat('-') {
                acc = acc.add(self.term()?, true);
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<Value, ParseError> {
        let mut acc = self.unary()?;
        while self.eat('*') {
            acc = acc.mul(self.unary()?);
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Value, ParseError> {
        if self.eat('-') {
            let v = self.unary()?;
            return Ok(Value::Poly(DiffPoly::integer(-1)).mul(v));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Value, ParseError> {
        let base = self.primary()?;
        if !self.eat('^') {
            return Ok(base);
        }
        let k = self.small_int("exponent")?;
        Ok(match base {
            Value::Poly(p) => Value::Poly(p.pow(k)),
            Value::Op { op, scalar } => Value::Op {
                op: op.pow(k),
                scalar,
            },
        })
    }

    fn primary(&mut self) -> Result<Value, ParseError> {
        let start = self.offset();
        let Some(tok) = self.peek().cloned() else {
            return Err(self.syntax("unexpected end of input"));
        };
        match tok {
            Tok::Int(n) => {
                self.idx += 1;
                if self.eat('/') {
                    let Some(Tok::Int(den)) = self.peek().cloned() else {
                        return Err(self.syntax("expected denominator"));
                    };
                    if den.is_zero() {
                        return Err(self.syntax("zero denominator"));
                    }
                    self.idx += 1;
                    return Ok(Value::Poly(DiffPoly::constant(Coeff::new(n, den))));
                }
                Ok(Value::Poly(DiffPoly::constant(Coeff::from_integer(n))))
            }
            Tok::Ident(name) => {
                self.idx += 1;
                match name.as_str() {
                    "D" => Ok(Value::Op {
                        op: MatrixOperator::derivative(1, 0),
                        scalar: true,
                    }),
                    "Db" => Ok(Value::Op {
                        op: MatrixOperator::derivative(0, 1),
                        scalar: true,
                    }),
                    "d" | "db" => self.scalar_derivative(name == "d"),
                    other => match Generator::from_name(other) {
                        Some(g) => Ok(Value::Poly(DiffPoly::generator(g))),
                        None => Err(ParseError {
                            kind: ParseErrorKind::Syntax,
                            offset: start,
                            message: alloc::format!("unknown identifier '{other}'"),
                        }),
                    },
                }
            }
            Tok::Sym('(') => {
                self.idx += 1;
                let v = self.expr()?;
                self.expect(')')?;
                Ok(v)
            }
            Tok::Sym('[') => self.matrix(),
            Tok::Sym(c) => Err(self.syntax(alloc::format!("unexpected '{c}'"))),
        }
    }

    fn scalar_derivative(&mut self, holomorphic: bool) -> Result<Value, ParseError> {
        self.expect('(')?;
        let arg_at = self.offset();
        let arg = self.expr()?;
        let k = if self.eat(',') {
            self.small_int("derivative order")?
        } else {
            1
        };
        if !self.eat(')') {
            return Err(self.syntax("expected ',' or ')'"));
        }
        let Value::Poly(p) = arg else {
            return Err(Self::type_err(
                arg_at,
                "derivative argument must be a polynomial, found an operator",
            ));
        };
        Ok(Value::Poly(if holomorphic {
            p.d_db(k, 0)
        } else {
            p.d_db(0, k)
        }))
    }

    fn matrix(&mut self) -> Result<Value, ParseError> {
        self.expect('[')?;
        let mut entries: Vec<(usize, Value)> = Vec::with_capacity(4);
        for row in 0..2 {
            if row == 1 {
                self.expect(',')?;
            }
            self.expect('[')?;
            for col in 0..2 {
                if col == 1 {
                    self.expect(',')?;
                }
                let at = self.offset();
                entries.push((at, self.expr()?));
            }
            self.expect(']')?;
        }
        self.expect(']')?;

        let mut op = MatrixOperator::zero();
        for (i, (at, v)) in entries.into_iter().enumerate() {
            let (r, c) = (i / 2, i % 2);
            let (entry, scalar) = v.into_op();
            if !scalar {
                return Err(Self::type_err(
                    at,
                    "matrix entry must be a polynomial or scalar operator, found a matrix",
                ));
            }
            for (order, m) in entry.terms() {
                let mut placed = Mat2::zero();
                placed.m[r][c] = m.m[0][0].clone();
                op.add_term(*order, placed);
            }
        }
        Ok(Value::Op { op, scalar: false })
    }
}

/// Parses and normalizes an expression.
pub fn parse(text: &str) -> Result<Expr, ParseError> {
    let toks = Lexer::tokens(text)?;
    let mut p = Parser {
        toks,
        idx: 0,
        end: text.len(),
    };
    let v = p.expr()?;
    if p.idx != p.toks.len() {
        return Err(p.syntax("unexpected trailing input"));
    }
    Ok(match v {
        Value::Poly(q) => Expr::Poly(q.normalize()),
        Value::Op { op, .. } => Expr::Operator(op.normalize()),
    })
}

/// Parses an expression that must be a polynomial.
pub fn parse_poly(text: &str) -> Result<DiffPoly, ParseError> {
    match parse(text)? {
        Expr::Poly(p) => Ok(p),
        Expr::Operator(_) => Err(Parser::type_err(0, "expected a polynomial, found an operator")),
    }
}

/// Parses an operator; polynomials are read as multiplication operators.
pub fn parse_operator(text: &str) -> Result<MatrixOperator, ParseError> {
    parse(text).map(Expr::into_operator)
}

/// Error in a definitions file: 1-based line number plus the parse error.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DefinitionError {
    pub line: usize,
    pub error: ParseError,
}

impl fmt::Display for DefinitionError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.error)
    }
}

/// Parses `name = expr` lines. Blank lines and `#` comments are skipped.
pub fn parse_definitions(text: &str) -> Result<Vec<(String, Expr)>, DefinitionError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("");
        if line.trim().is_empty() {
            continue;
        }
        let Some((name, body)) = line.split_once('=') else {
            return Err(DefinitionError {
                line: i + 1,
                error: ParseError {
                    kind: ParseErrorKind::Syntax,
                    offset: 0,
                    message: "expected 'name = expression'".to_string(),
                },
            });
        };
        let expr = parse(body).map_err(|error| DefinitionError { line: i + 1, error })?;
        out.push((name.trim().to_string(), expr));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    #[test]
    fn first_flow_round_trips() {
        let q = parse_poly("d(p,3) + 3*w*d(p) + 3/2*p*d(w)").unwrap();
        assert_eq!(q.to_string(), "3/2*p*d(w) + 3*d(p)*w + d(p,3)");
        assert_eq!(parse_poly(&q.to_string()).unwrap(), q);
    }

    #[test]
    fn dbar_omega_normalizes() {
        assert_eq!(parse_poly("db(w)").unwrap().to_string(), "2*p*d(p)");
    }

    #[test]
    fn unterminated_call_reports_offset() {
        let e = parse("d(p").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::Syntax);
        assert_eq!(e.offset, 3);
        assert_eq!(e.to_string(), "syntax error at offset 3: expected ',' or ')'");
    }

    #[test]
    fn derivative_of_operator_is_a_type_error() {
        let e = parse("d(D)").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::Type);
        assert_eq!(e.offset, 2);
    }

    #[test]
    fn nested_matrix_is_a_type_error() {
        let e = parse("[[[[1,0],[0,1]], 0], [0, 1]]").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::Type);
    }

    #[test]
    fn dirac_operator_from_text() {
        let l = parse_operator("[[D, -p], [p, Db]]").unwrap();
        assert_eq!(l, MatrixOperator::dirac());
    }

    #[test]
    fn operator_printing_round_trips() {
        let a = parse_operator("D^5 + [[0, -5*d(p)], [0, 5*w]]*D^3 + p*Db").unwrap();
        let again = parse_operator(&a.to_string()).unwrap();
        assert_eq!(a, again);
    }

    #[test]
    fn composition_with_multiplication() {
        let a = parse_operator("D*p").unwrap();
        let b = parse_operator("p*D + d(p)").unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn unknown_identifier() {
        let e = parse("p + q").unwrap_err();
        assert_eq!(e.offset, 4);
    }

    #[test]
    fn definitions_file() {
        let defs = parse_definitions("# comment\nflow = d(p,3)\n\nA = D^3 # tail\n").unwrap();
        assert_eq!(defs.len(), 2);
        assert_eq!(defs[0].0, "flow");
        let err = parse_definitions("x = p\ny = d(p\n").unwrap_err();
        assert_eq!(err.line, 2);
    }
}
