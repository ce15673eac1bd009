//! Expression trees over a single variable `x`.
//!
//! The grammar covers real literals, `x`, the four arithmetic operators,
//! powers with integer exponents, unary minus and a fixed set of analytic
//! functions. Trees are immutable, and structural differentiation maps the
//! set into itself, so derivatives of any order stay exact.
//!
//! Precedence, low to high: `+ -`, `* /`, unary `-`, `^` (right-associative).
//! Division, `log` and `sqrt` arguments are checked at evaluation time.

use std::fmt;

use crate::error::{Error, ParseErrorKind, Result};

/// Built-in single-argument functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryFn {
    Exp,
    Log,
    Sin,
    Cos,
    Sinh,
    Cosh,
    Sqrt,
    Tanh,
}

impl UnaryFn {
    pub fn name(self) -> &'static str {
        match self {
            UnaryFn::Exp => "exp",
            UnaryFn::Log => "log",
            UnaryFn::Sin => "sin",
            UnaryFn::Cos => "cos",
            UnaryFn::Sinh => "sinh",
            UnaryFn::Cosh => "cosh",
            UnaryFn::Sqrt => "sqrt",
            UnaryFn::Tanh => "tanh",
        }
    }

    fn from_name(name: &str) -> Option<UnaryFn> {
        match name {
            "exp" => Some(UnaryFn::Exp),
            "log" => Some(UnaryFn::Log),
            "sin" => Some(UnaryFn::Sin),
            "cos" => Some(UnaryFn::Cos),
            "sinh" => Some(UnaryFn::Sinh),
            "cosh" => Some(UnaryFn::Cosh),
            "sqrt" => Some(UnaryFn::Sqrt),
            "tanh" => Some(UnaryFn::Tanh),
            _ => None,
        }
    }
}

/// Expression tree node.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var,
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i32),
    Call(UnaryFn, Box<Expr>),
}

impl Expr {
    /// Evaluate at `x`. Domain violations (division by zero, `log`/`sqrt`
    /// out of range) and non-finite intermediate values are errors.
    pub fn eval(&self, x: f64) -> Result<f64> {
        let v = match self {
            Expr::Num(c) => *c,
            Expr::Var => x,
            Expr::Neg(u) => -u.eval(x)?,
            Expr::Add(u, v) => u.eval(x)? + v.eval(x)?,
            Expr::Sub(u, v) => u.eval(x)? - v.eval(x)?,
            Expr::Mul(u, v) => u.eval(x)? * v.eval(x)?,
            Expr::Div(u, v) => {
                let den = v.eval(x)?;
                if den == 0.0 {
                    return Err(Error::DivisionByZero { x });
                }
                u.eval(x)? / den
            }
            Expr::Pow(u, n) => {
                let base = u.eval(x)?;
                if base == 0.0 && *n < 0 {
                    return Err(Error::DivisionByZero { x });
                }
                base.powi(*n)
            }
            Expr::Call(f, u) => {
                let arg = u.eval(x)?;
                match f {
                    UnaryFn::Exp => arg.exp(),
                    UnaryFn::Log => {
                        if arg <= 0.0 {
                            return Err(Error::LogDomain { x, arg });
                        }
                        arg.ln()
                    }
                    UnaryFn::Sin => arg.sin(),
                    UnaryFn::Cos => arg.cos(),
                    UnaryFn::Sinh => arg.sinh(),
                    UnaryFn::Cosh => arg.cosh(),
                    UnaryFn::Sqrt => {
                        if arg < 0.0 {
                            return Err(Error::SqrtDomain { x, arg });
                        }
                        arg.sqrt()
                    }
                    UnaryFn::Tanh => arg.tanh(),
                }
            }
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFinite { x })
        }
    }

    /// Structural derivative with respect to `x`.
    ///
    /// Uses light zero/one folding so that stacked derivatives stay compact;
    /// no further simplification is attempted.
    pub fn derivative(&self) -> Expr {
        match self {
            Expr::Num(_) => Expr::Num(0.0),
            Expr::Var => Expr::Num(1.0),
            Expr::Neg(u) => neg(u.derivative()),
            Expr::Add(u, v) => add(u.derivative(), v.derivative()),
            Expr::Sub(u, v) => sub(u.derivative(), v.derivative()),
            Expr::Mul(u, v) => add(
                mul(u.derivative(), (**v).clone()),
                mul((**u).clone(), v.derivative()),
            ),
            Expr::Div(u, v) => div(
                sub(
                    mul(u.derivative(), (**v).clone()),
                    mul((**u).clone(), v.derivative()),
                ),
                pow((**v).clone(), 2),
            ),
            Expr::Pow(u, n) => {
                if *n == 0 {
                    Expr::Num(0.0)
                } else {
                    mul(
                        Expr::Num(f64::from(*n)),
                        mul(pow((**u).clone(), n - 1), u.derivative()),
                    )
                }
            }
            Expr::Call(f, u) => {
                let du = u.derivative();
                let inner = (**u).clone();
                match f {
                    UnaryFn::Exp => mul(call(UnaryFn::Exp, inner), du),
                    UnaryFn::Log => div(du, inner),
                    UnaryFn::Sin => mul(call(UnaryFn::Cos, inner), du),
                    UnaryFn::Cos => neg(mul(call(UnaryFn::Sin, inner), du)),
                    UnaryFn::Sinh => mul(call(UnaryFn::Cosh, inner), du),
                    UnaryFn::Cosh => mul(call(UnaryFn::Sinh, inner), du),
                    UnaryFn::Sqrt => div(du, mul(Expr::Num(2.0), call(UnaryFn::Sqrt, inner))),
                    UnaryFn::Tanh => mul(
                        sub(Expr::Num(1.0), pow(call(UnaryFn::Tanh, inner), 2)),
                        du,
                    ),
                }
            }
        }
    }

    /// Replace every occurrence of the variable by `replacement`.
    /// Used for composing expressions under coordinate maps.
    pub fn substitute(&self, replacement: &Expr) -> Expr {
        match self {
            Expr::Num(c) => Expr::Num(*c),
            Expr::Var => replacement.clone(),
            Expr::Neg(u) => Expr::Neg(Box::new(u.substitute(replacement))),
            Expr::Add(u, v) => Expr::Add(
                Box::new(u.substitute(replacement)),
                Box::new(v.substitute(replacement)),
            ),
            Expr::Sub(u, v) => Expr::Sub(
                Box::new(u.substitute(replacement)),
                Box::new(v.substitute(replacement)),
            ),
            Expr::Mul(u, v) => Expr::Mul(
                Box::new(u.substitute(replacement)),
                Box::new(v.substitute(replacement)),
            ),
            Expr::Div(u, v) => Expr::Div(
                Box::new(u.substitute(replacement)),
                Box::new(v.substitute(replacement)),
            ),
            Expr::Pow(u, n) => Expr::Pow(Box::new(u.substitute(replacement)), *n),
            Expr::Call(f, u) => Expr::Call(*f, Box::new(u.substitute(replacement))),
        }
    }

    fn is_num(&self, c: f64) -> bool {
        matches!(self, Expr::Num(v) if *v == c)
    }
}

// Folding constructors for derivative assembly. The parser never uses these,
// so print/parse round trips stay structural.

pub(crate) fn add(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        (Expr::Num(x), Expr::Num(y)) => Expr::Num(x + y),
        _ if a.is_num(0.0) => b,
        _ if b.is_num(0.0) => a,
        _ => Expr::Add(Box::new(a), Box::new(b)),
    }
}

pub(crate) fn sub(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        (Expr::Num(x), Expr::Num(y)) => Expr::Num(x - y),
        _ if b.is_num(0.0) => a,
        _ if a.is_num(0.0) => neg(b),
        _ => Expr::Sub(Box::new(a), Box::new(b)),
    }
}

pub(crate) fn mul(a: Expr, b: Expr) -> Expr {
    if a.is_num(0.0) || b.is_num(0.0) {
        return Expr::Num(0.0);
    }
    match (&a, &b) {
        (Expr::Num(x), Expr::Num(y)) => Expr::Num(x * y),
        _ if a.is_num(1.0) => b,
        _ if b.is_num(1.0) => a,
        _ => Expr::Mul(Box::new(a), Box::new(b)),
    }
}

pub(crate) fn div(a: Expr, b: Expr) -> Expr {
    // 0/u folds to 0; the symbolic convention matches the derivative rules,
    // which never generate 0/0 from a well-formed tree.
    if a.is_num(0.0) {
        return Expr::Num(0.0);
    }
    if b.is_num(1.0) {
        return a;
    }
    Expr::Div(Box::new(a), Box::new(b))
}

pub(crate) fn neg(a: Expr) -> Expr {
    match a {
        Expr::Num(v) if v == 0.0 => Expr::Num(0.0),
        Expr::Neg(inner) => *inner,
        _ => Expr::Neg(Box::new(a)),
    }
}

pub(crate) fn pow(a: Expr, n: i32) -> Expr {
    match n {
        0 => Expr::Num(1.0),
        1 => a,
        _ => Expr::Pow(Box::new(a), n),
    }
}

pub(crate) fn call(f: UnaryFn, a: Expr) -> Expr {
    Expr::Call(f, Box::new(a))
}

/// Parse an expression in the crate grammar.
pub fn parse_expression(source: &str) -> Result<Expr> {
    let tokens = lex(source)?;
    let mut parser = Parser { tokens, pos: 0 };
    let expr = parser.parse_expr()?;
    match parser.peek() {
        TokenKind::Eof => Ok(expr),
        _ => Err(parser.syntax_err("unexpected trailing input")),
    }
}

/// Structural derivative of order `order` (0 returns a clone).
pub fn differentiate(expr: &Expr, order: u32) -> Result<Expr> {
    if order > 4 {
        return Err(Error::DerivativeOrder { order });
    }
    let mut out = expr.clone();
    for _ in 0..order {
        out = out.derivative();
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Lexer
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
enum TokenKind {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
    Eof,
}

#[derive(Debug, Clone)]
struct Token {
    kind: TokenKind,
    /// 1-based column of the first byte of the token.
    column: usize,
}

fn lex(source: &str) -> Result<Vec<Token>> {
    let bytes = source.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let column = i + 1;
        match c {
            b' ' | b'\t' | b'\r' | b'\n' => {
                i += 1;
            }
            b'+' => {
                tokens.push(Token { kind: TokenKind::Plus, column });
                i += 1;
            }
            b'-' => {
                tokens.push(Token { kind: TokenKind::Minus, column });
                i += 1;
            }
            b'*' => {
                tokens.push(Token { kind: TokenKind::Star, column });
                i += 1;
            }
            b'/' => {
                tokens.push(Token { kind: TokenKind::Slash, column });
                i += 1;
            }
            b'^' => {
                tokens.push(Token { kind: TokenKind::Caret, column });
                i += 1;
            }
            b'(' => {
                tokens.push(Token { kind: TokenKind::LParen, column });
                i += 1;
            }
            b')' => {
                tokens.push(Token { kind: TokenKind::RParen, column });
                i += 1;
            }
            b',' => {
                tokens.push(Token { kind: TokenKind::Comma, column });
                i += 1;
            }
            b'0'..=b'9' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                if i < bytes.len() && bytes[i] == b'.' {
                    i += 1;
                    if i >= bytes.len() || !bytes[i].is_ascii_digit() {
                        return Err(Error::Parse {
                            kind: ParseErrorKind::Syntax("digit expected after decimal point".into()),
                            column: i + 1,
                        });
                    }
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    // Exponent only when digits follow; otherwise `e` starts
                    // an identifier token (e.g. "2exp(x)" is still an error,
                    // but "2e3" and "2e-3" are numbers).
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        i = j;
                        while i < bytes.len() && bytes[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let text = &source[start..i];
                let value: f64 = text.parse().map_err(|_| Error::Parse {
                    kind: ParseErrorKind::Syntax(format!("invalid number `{text}`")),
                    column: start + 1,
                })?;
                tokens.push(Token { kind: TokenKind::Num(value), column: start + 1 });
            }
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                let start = i;
                while i < bytes.len()
                    && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                tokens.push(Token {
                    kind: TokenKind::Ident(source[start..i].to_string()),
                    column: start + 1,
                });
            }
            _ => {
                return Err(Error::Parse {
                    kind: ParseErrorKind::Syntax(format!(
                        "unexpected character `{}`",
                        &source[i..].chars().next().unwrap()
                    )),
                    column,
                });
            }
        }
    }
    tokens.push(Token { kind: TokenKind::Eof, column: bytes.len() + 1 });
    Ok(tokens)
}

// ---------------------------------------------------------------------------
// Parser (recursive descent, one token of lookahead)
// ---------------------------------------------------------------------------

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &TokenKind {
        &self.tokens[self.pos].kind
    }

    fn column(&self) -> usize {
        self.tokens[self.pos].column
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn syntax_err(&self, msg: &str) -> Error {
        Error::Parse {
            kind: ParseErrorKind::Syntax(msg.to_string()),
            column: self.column(),
        }
    }

    fn parse_expr(&mut self) -> Result<Expr> {
        let mut lhs = self.parse_term()?;
        loop {
            match self.peek() {
                TokenKind::Plus => {
                    self.bump();
                    let rhs = self.parse_term()?;
                    lhs = Expr::Add(Box::new(lhs), Box::new(rhs));
                }
                TokenKind::Minus => {
                    self.bump();
                    let rhs = self.parse_term()?;
                    lhs = Expr::Sub(Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn parse_term(&mut self) -> Result<Expr> {
        let mut lhs = self.parse_unary()?;
        loop {
            match self.peek() {
                TokenKind::Star => {
                    self.bump();
                    let rhs = self.parse_unary()?;
                    lhs = Expr::Mul(Box::new(lhs), Box::new(rhs));
                }
                TokenKind::Slash => {
                    self.bump();
                    let rhs = self.parse_unary()?;
                    lhs = Expr::Div(Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn parse_unary(&mut self) -> Result<Expr> {
        if matches!(self.peek(), TokenKind::Minus) {
            self.bump();
            let inner = self.parse_unary()?;
            return Ok(Expr::Neg(Box::new(inner)));
        }
        self.parse_power()
    }

    fn parse_power(&mut self) -> Result<Expr> {
        let base = self.parse_atom()?;
        if matches!(self.peek(), TokenKind::Caret) {
            self.bump();
            let exponent = self.parse_exponent()?;
            return Ok(Expr::Pow(Box::new(base), exponent));
        }
        Ok(base)
    }

    /// Exponents are integer literals, optionally signed; `^` in exponent
    /// position is right-associative and folded at parse time, so `x^2^3`
    /// reads as `x^(2^3)`.
    fn parse_exponent(&mut self) -> Result<i32> {
        let negative = if matches!(self.peek(), TokenKind::Minus) {
            self.bump();
            true
        } else {
            false
        };
        let column = self.column();
        let value = match self.bump().kind {
            TokenKind::Num(v) => v,
            _ => {
                return Err(Error::Parse {
                    kind: ParseErrorKind::Syntax("power exponent must be an integer literal".into()),
                    column,
                })
            }
        };
        if value.fract() != 0.0 || value.abs() > i32::MAX as f64 {
            return Err(Error::Parse {
                kind: ParseErrorKind::Syntax(format!("power exponent `{value}` is not an integer")),
                column,
            });
        }
        let mut n = value as i64;
        if matches!(self.peek(), TokenKind::Caret) {
            self.bump();
            let rhs = self.parse_exponent()?;
            if rhs < 0 {
                return Err(Error::Parse {
                    kind: ParseErrorKind::Syntax("negative exponent inside an exponent chain".into()),
                    column,
                });
            }
            n = n
                .checked_pow(rhs.try_into().map_err(|_| Error::Parse {
                    kind: ParseErrorKind::Syntax("exponent chain overflows".into()),
                    column,
                })?)
                .ok_or(Error::Parse {
                    kind: ParseErrorKind::Syntax("exponent chain overflows".into()),
                    column,
                })?;
        }
        if negative {
            n = -n;
        }
        i32::try_from(n).map_err(|_| Error::Parse {
            kind: ParseErrorKind::Syntax(format!("exponent `{n}` out of range")),
            column,
        })
    }

    fn parse_atom(&mut self) -> Result<Expr> {
        let column = self.column();
        match self.bump().kind {
            TokenKind::Num(v) => Ok(Expr::Num(v)),
            TokenKind::LParen => {
                let inner = self.parse_expr()?;
                match self.bump().kind {
                    TokenKind::RParen => Ok(inner),
                    _ => Err(Error::Parse {
                        kind: ParseErrorKind::Syntax("expected `)`".into()),
                        column: self.tokens[self.pos - 1].column,
                    }),
                }
            }
            TokenKind::Ident(name) => {
                if name == "x" {
                    return Ok(Expr::Var);
                }
                let Some(func) = UnaryFn::from_name(&name) else {
                    return Err(Error::Parse {
                        kind: ParseErrorKind::UnknownIdentifier(name),
                        column,
                    });
                };
                if !matches!(self.peek(), TokenKind::LParen) {
                    return Err(Error::Parse {
                        kind: ParseErrorKind::Syntax(format!("expected `(` after `{name}`")),
                        column: self.column(),
                    });
                }
                self.bump();
                let mut args = vec![self.parse_expr()?];
                while matches!(self.peek(), TokenKind::Comma) {
                    self.bump();
                    args.push(self.parse_expr()?);
                }
                match self.bump().kind {
                    TokenKind::RParen => {}
                    _ => {
                        return Err(Error::Parse {
                            kind: ParseErrorKind::Syntax("expected `)`".into()),
                            column: self.tokens[self.pos - 1].column,
                        })
                    }
                }
                if args.len() != 1 {
                    return Err(Error::Parse {
                        kind: ParseErrorKind::ArityMismatch {
                            function: name,
                            expected: 1,
                            got: args.len(),
                        },
                        column,
                    });
                }
                Ok(Expr::Call(func, Box::new(args.pop().unwrap())))
            }
            TokenKind::Eof => Err(Error::Parse {
                kind: ParseErrorKind::Syntax("unexpected end of input".into()),
                column,
            }),
            other => Err(Error::Parse {
                kind: ParseErrorKind::Syntax(format!("unexpected token `{other:?}`")),
                column,
            }),
        }
    }
}

// ---------------------------------------------------------------------------
// Printer
// ---------------------------------------------------------------------------

fn precedence(expr: &Expr) -> u8 {
    match expr {
        Expr::Add(..) | Expr::Sub(..) => 1,
        Expr::Mul(..) | Expr::Div(..) => 2,
        Expr::Neg(_) => 3,
        Expr::Pow(..) => 4,
        Expr::Num(_) | Expr::Var | Expr::Call(..) => 5,
    }
}

impl fmt::Display for Expr {
    /// Prints a form that parses back to a structurally identical tree
    /// (for trees the parser itself produced).
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn write_child(
            f: &mut fmt::Formatter<'_>,
            child: &Expr,
            parent_prec: u8,
            needs_parens_on_tie: bool,
        ) -> fmt::Result {
            let child_prec = precedence(child);
            if child_prec < parent_prec || (child_prec == parent_prec && needs_parens_on_tie) {
                write!(f, "({child})")
            } else {
                write!(f, "{child}")
            }
        }

        match self {
            Expr::Num(v) => write!(f, "{v}"),
            Expr::Var => write!(f, "x"),
            Expr::Neg(u) => {
                write!(f, "-")?;
                write_child(f, u, 3, false)
            }
            Expr::Add(u, v) => {
                write_child(f, u, 1, false)?;
                write!(f, " + ")?;
                write_child(f, v, 1, true)
            }
            Expr::Sub(u, v) => {
                write_child(f, u, 1, false)?;
                write!(f, " - ")?;
                write_child(f, v, 1, true)
            }
            Expr::Mul(u, v) => {
                write_child(f, u, 2, false)?;
                write!(f, " * ")?;
                write_child(f, v, 2, true)
            }
            Expr::Div(u, v) => {
                write_child(f, u, 2, false)?;
                write!(f, " / ")?;
                write_child(f, v, 2, true)
            }
            Expr::Pow(u, n) => {
                // A `^` base binds tighter than unary minus, so any non-atom
                // base needs parentheses to survive a round trip.
                write_child(f, u, 5, false)?;
                write!(f, "^{n}")
            }
            Expr::Call(func, u) => write!(f, "{}({u})", func.name()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eval_str(src: &str, x: f64) -> f64 {
        parse_expression(src).unwrap().eval(x).unwrap()
    }

    /// Central finite difference, the independent oracle for derivatives.
    fn central_diff(expr: &Expr, x: f64, h: f64) -> f64 {
        (expr.eval(x + h).unwrap() - expr.eval(x - h).unwrap()) / (2.0 * h)
    }

    #[test]
    fn parses_basic_forms() {
        assert_eq!(eval_str("0.5*x^2", 2.0), 2.0);
        assert_eq!(eval_str("1 + x^2", 1.0), 2.0);
        assert_eq!(eval_str("exp(2*x)", 0.0), 1.0);
        assert_eq!(eval_str("2^3^2", 0.0), 512.0);
        assert_eq!(eval_str("x^-2", 2.0), 0.25);
        assert_eq!(eval_str("-x^2", 3.0), -9.0);
        assert_eq!(eval_str("2*-x", 3.0), -6.0);
        assert_eq!(eval_str("1e-3 + 2E+1", 0.0), 20.001);
    }

    #[test]
    fn precedence_matches_grammar() {
        // 1 + 2*3 = 7, (1+2)*3 = 9
        assert_eq!(eval_str("1 + 2*3", 0.0), 7.0);
        assert_eq!(eval_str("(1 + 2)*3", 0.0), 9.0);
        // left associativity of - and /
        assert_eq!(eval_str("8 - 3 - 2", 0.0), 3.0);
        assert_eq!(eval_str("8 / 2 / 2", 0.0), 2.0);
    }

    #[test]
    fn reports_error_columns() {
        match parse_expression("1 + y") {
            Err(Error::Parse { kind: ParseErrorKind::UnknownIdentifier(name), column }) => {
                assert_eq!(name, "y");
                assert_eq!(column, 5);
            }
            other => panic!("expected unknown identifier, got {other:?}"),
        }
        match parse_expression("sin(x, 1)") {
            Err(Error::Parse { kind: ParseErrorKind::ArityMismatch { got, .. }, column }) => {
                assert_eq!(got, 2);
                assert_eq!(column, 1);
            }
            other => panic!("expected arity mismatch, got {other:?}"),
        }
        match parse_expression("1 + * 2") {
            Err(Error::Parse { column, .. }) => assert_eq!(column, 5),
            other => panic!("expected syntax error, got {other:?}"),
        }
    }

    #[test]
    fn eval_checks_domains_at_evaluation_time() {
        let e = parse_expression("1/x").unwrap();
        assert!(matches!(e.eval(0.0), Err(Error::DivisionByZero { .. })));
        assert_eq!(e.eval(2.0).unwrap(), 0.5);

        let e = parse_expression("log(x)").unwrap();
        assert!(matches!(e.eval(-1.0), Err(Error::LogDomain { .. })));

        let e = parse_expression("sqrt(x)").unwrap();
        assert!(matches!(e.eval(-1.0), Err(Error::SqrtDomain { .. })));

        let e = parse_expression("exp(x)").unwrap();
        assert!(matches!(e.eval(1.0e9), Err(Error::NonFinite { .. })));
    }

    #[test]
    fn derivative_of_polynomial_is_exact() {
        // d/dx 0.5 x^2 = x, at x = 3 -> 3
        let e = parse_expression("0.5*x^2").unwrap();
        assert_eq!(e.derivative().eval(3.0).unwrap(), 3.0);
        // d/dx (1 + x^2) at 1 -> 2
        let e = parse_expression("1+x^2").unwrap();
        assert_eq!(e.derivative().eval(1.0).unwrap(), 2.0);
    }

    #[test]
    fn second_derivative_matches_finite_differences() {
        // oracle: central differences of exp(2x); d2/dx2 exp(2x) at 0 -> 4
        let e = parse_expression("exp(2*x)").unwrap();
        let d1 = e.derivative();
        let d2 = d1.derivative();
        let exact = d2.eval(0.0).unwrap();
        assert_eq!(exact, 4.0);
        let numeric = central_diff(&d1, 0.0, 1.0e-5);
        assert!((numeric - exact).abs() / exact.abs() <= 1.0e-6, "fd gave {numeric}");
    }

    #[test]
    fn derivatives_match_finite_differences_on_samples() {
        let sources = [
            "sin(x)*cosh(x) - x^3/(1 + x^2)",
            "tanh(x) + sqrt(1 + x^2)",
            "log(2 + cos(x)) * exp(x/2)",
            "(1 + x^2)^-2",
        ];
        for src in sources {
            let e = parse_expression(src).unwrap();
            let d = e.derivative();
            for k in 0..7 {
                let x = -1.4 + 0.45 * f64::from(k);
                let exact = d.eval(x).unwrap();
                let approx = central_diff(&e, x, 1.0e-5);
                let scale = exact.abs().max(1.0);
                assert!(
                    (exact - approx).abs() / scale <= 1.0e-6,
                    "{src} at {x}: exact {exact} vs fd {approx}"
                );
            }
        }
    }

    #[test]
    fn derivative_order_is_bounded() {
        let e = parse_expression("x^2").unwrap();
        assert!(differentiate(&e, 4).is_ok());
        assert!(matches!(
            differentiate(&e, 5),
            Err(Error::DerivativeOrder { order: 5 })
        ));
    }

    #[test]
    fn print_parse_round_trip_is_structural() {
        let sources = [
            "0.5*x^2",
            "1 + x^2",
            "exp(2*x)",
            "-x^2 + (x - 1)*(x + 1)",
            "x - (x - 1) - 1",
            "sin(x)/ (1 + cos(x)^2)",
            "x^-3 * sqrt(1 + x^2)",
            "2^3^2 - tanh(x)",
            "-(x + 1)/(x - 2)",
        ];
        for src in sources {
            let once = parse_expression(src).unwrap();
            let twice = parse_expression(&once.to_string()).unwrap();
            assert_eq!(once, twice, "round trip failed for `{src}` -> `{once}`");
        }
    }

    #[test]
    fn substitute_composes_trees() {
        let outer = parse_expression("x^2 + 1").unwrap();
        let inner = parse_expression("sinh(x)").unwrap();
        let composed = outer.substitute(&inner);
        let x = 0.7_f64;
        let expected = x.sinh().powi(2) + 1.0;
        assert!((composed.eval(x).unwrap() - expected).abs() < 1.0e-15);
    }
}
