//! Infix expression syntax shared by charts, model files and the CLI.
//!
//! Grammar (juxtaposition is multiplication, `^` and `**` are powers with
//! integer exponents, unary minus binds looser than powers):
//!
//! ```text
//! sum     := term (('+' | '-') term)*
//! term    := unary (('*' | '/' | '⊗' | <juxtaposed factor>) unary)*
//! unary   := '-' unary | '+' unary | power
//! power   := primary (('^' | '**') exponent)?
//! primary := number | ident | ident '(' sum (',' sum)* ')' | '(' sum ')'
//! ```

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{message} at {line}:{column}")]
pub struct ParseError {
    pub message: String,
    /// Byte offset into the parsed text.
    pub offset: usize,
    pub line: usize,
    pub column: usize,
}

impl ParseError {
    pub fn at(text: &str, offset: usize, message: impl Into<String>) -> Self {
        let offset = offset.min(text.len());
        let before = &text[..offset];
        let line = before.matches('\n').count() + 1;
        let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
        ParseError { message: message.into(), offset, line, column }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    /// Ordered tensor product, only meaningful for line elements.
    Tensor,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Ast {
    Num(BigRational),
    Ident { name: String, offset: usize },
    Neg(Box<Ast>),
    Bin(BinOp, Box<Ast>, Box<Ast>),
    Pow(Box<Ast>, i64),
    Call { name: String, args: Vec<Ast>, offset: usize },
}

impl fmt::Display for Ast {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ast::Num(q) => write!(f, "{}", q),
            Ast::Ident { name, .. } => write!(f, "{}", name),
            Ast::Neg(a) => write!(f, "-({})", a),
            Ast::Bin(op, a, b) => {
                let s = match op {
                    BinOp::Add => "+",
                    BinOp::Sub => "-",
                    BinOp::Mul => "*",
                    BinOp::Div => "/",
                    BinOp::Tensor => "⊗",
                };
                write!(f, "({} {} {})", a, s, b)
            }
            Ast::Pow(a, e) => write!(f, "({})^{}", a, e),
            Ast::Call { name, args, .. } => {
                write!(f, "{}(", name)?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{}", a)?;
                }
                write!(f, ")")
            }
        }
    }
}

impl Ast {
    /// Whether an explicit `⊗` occurs anywhere in the tree.
    pub fn has_tensor(&self) -> bool {
        match self {
            Ast::Bin(BinOp::Tensor, _, _) => true,
            Ast::Bin(_, a, b) => a.has_tensor() || b.has_tensor(),
            Ast::Neg(a) | Ast::Pow(a, _) => a.has_tensor(),
            Ast::Call { args, .. } => args.iter().any(Ast::has_tensor),
            _ => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(BigRational),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    Tensor,
    LParen,
    RParen,
    Comma,
    Eq,
    End,
}

struct Lexer {
    toks: Vec<(Tok, usize)>,
}

/// Input length guard; model files are small and the parser is recursive.
const MAX_INPUT: usize = 1 << 20;
const MAX_DEPTH: usize = 256;

impl Lexer {
    fn run(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
        let mut lx = Lexer { toks: Vec::new() };
        let bytes = text.as_bytes();
        let mut i = 0;
        while i < bytes.len() {
            let c = bytes[i];
            if c.is_ascii_whitespace() {
                i += 1;
                continue;
            }
            let start = i;
            let tok = match c {
                b'+' => {
                    i += 1;
                    Tok::Plus
                }
                b'-' => {
                    i += 1;
                    Tok::Minus
                }
                b'*' => {
                    if bytes.get(i + 1) == Some(&b'*') {
                        i += 2;
                        Tok::Caret
                    } else {
                        i += 1;
                        Tok::Star
                    }
                }
                b'/' => {
                    i += 1;
                    Tok::Slash
                }
                b'^' => {
                    i += 1;
                    Tok::Caret
                }
                b'(' => {
                    i += 1;
                    Tok::LParen
                }
                b')' => {
                    i += 1;
                    Tok::RParen
                }
                b',' => {
                    i += 1;
                    Tok::Comma
                }
                b'=' => {
                    i += 1;
                    Tok::Eq
                }
                b'0'..=b'9' | b'.' => {
                    while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                        i += 1;
                    }
                    Tok::Num(parse_decimal(&text[start..i]).ok_or_else(|| {
                        ParseError::at(text, start, format!("malformed number `{}`", &text[start..i]))
                    })?)
                }
                c if c.is_ascii_alphabetic() || c == b'_' => {
                    while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                        i += 1;
                    }
                    Tok::Ident(text[start..i].to_string())
                }
                _ => {
                    let ch = text[i..].chars().next().unwrap();
                    if ch == '⊗' {
                        i += ch.len_utf8();
                        Tok::Tensor
                    } else {
                        return Err(ParseError::at(text, i, format!("unexpected character `{}`", ch)));
                    }
                }
            };
            lx.toks.push((tok, start));
        }
        lx.toks.push((Tok::End, text.len()));
        Ok(lx.toks)
    }
}

fn parse_decimal(s: &str) -> Option<BigRational> {
    let mut parts = s.split('.');
    let int = parts.next()?;
    let frac = parts.next().unwrap_or("");
    if parts.next().is_some() || (int.is_empty() && frac.is_empty()) {
        return None;
    }
    let digits = format!("{}{}", int, frac);
    let n: BigInt = digits.parse().ok()?;
    let d = num_traits::pow(BigInt::from(10), frac.len());
    Some(BigRational::new(n, d))
}

struct Parser<'a> {
    text: &'a str,
    toks: Vec<(Tok, usize)>,
    pos: usize,
    depth: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err(&self, msg: impl Into<String>) -> ParseError {
        ParseError::at(self.text, self.offset(), msg)
    }

    fn enter(&mut self) -> Result<(), ParseError> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(self.err("expression nested too deeply"));
        }
        Ok(())
    }

    fn sum(&mut self) -> Result<Ast, ParseError> {
        self.enter()?;
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => break,
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Ast::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        self.depth -= 1;
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Ast, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Star => {
                    self.bump();
                    BinOp::Mul
                }
                Tok::Slash => {
                    self.bump();
                    BinOp::Div
                }
                Tok::Tensor => {
                    self.bump();
                    BinOp::Tensor
                }
                Tok::Num(_) | Tok::Ident(_) | Tok::LParen => BinOp::Mul,
                _ => break,
            };
            let rhs = self.unary()?;
            lhs = Ast::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Ast, ParseError> {
        match self.peek() {
            Tok::Minus => {
                self.bump();
                self.enter()?;
                let inner = self.unary()?;
                self.depth -= 1;
                Ok(Ast::Neg(Box::new(inner)))
            }
            Tok::Plus => {
                self.bump();
                self.enter()?;
                let inner = self.unary()?;
                self.depth -= 1;
                Ok(inner)
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Ast, ParseError> {
        let base = self.primary()?;
        if *self.peek() == Tok::Caret {
            self.bump();
            let e = self.exponent()?;
            return Ok(Ast::Pow(Box::new(base), e));
        }
        Ok(base)
    }

    fn exponent(&mut self) -> Result<i64, ParseError> {
        let paren = *self.peek() == Tok::LParen;
        if paren {
            self.bump();
        }
        let mut sign = 1i64;
        while matches!(self.peek(), Tok::Minus | Tok::Plus) {
            if *self.peek() == Tok::Minus {
                sign = -sign;
            }
            self.bump();
        }
        let e = match self.bump() {
            (Tok::Num(q), off) => {
                if !q.is_integer() {
                    return Err(ParseError::at(self.text, off, "exponent must be an integer"));
                }
                let v: i64 =
                    q.to_integer().try_into().map_err(|_| ParseError::at(self.text, off, "exponent out of range"))?;
                if v > 4096 {
                    return Err(ParseError::at(self.text, off, "exponent out of range"));
                }
                v
            }
            (_, off) => return Err(ParseError::at(self.text, off, "expected integer exponent")),
        };
        if paren {
            if *self.peek() != Tok::RParen {
                return Err(self.err("expected `)` after exponent"));
            }
            self.bump();
        }
        Ok(sign * e)
    }

    fn primary(&mut self) -> Result<Ast, ParseError> {
        match self.bump() {
            (Tok::Num(q), _) => Ok(Ast::Num(q)),
            (Tok::Ident(name), offset) => {
                if *self.peek() == Tok::LParen {
                    self.bump();
                    let mut args = vec![self.sum()?];
                    while *self.peek() == Tok::Comma {
                        self.bump();
                        args.push(self.sum()?);
                    }
                    if *self.peek() != Tok::RParen {
                        return Err(self.err("expected `)` to close call"));
                    }
                    self.bump();
                    Ok(Ast::Call { name, args, offset })
                } else {
                    Ok(Ast::Ident { name, offset })
                }
            }
            (Tok::LParen, _) => {
                let inner = self.sum()?;
                if *self.peek() != Tok::RParen {
                    return Err(self.err("expected `)`"));
                }
                self.bump();
                Ok(inner)
            }
            (Tok::End, off) => Err(ParseError::at(self.text, off, "unexpected end of expression")),
            (t, off) => Err(ParseError::at(self.text, off, format!("unexpected token {:?}", t))),
        }
    }
}

fn parser(text: &str) -> Result<Parser<'_>, ParseError> {
    if text.len() > MAX_INPUT {
        return Err(ParseError::at(text, 0, "expression too long"));
    }
    Ok(Parser { text, toks: Lexer::run(text)?, pos: 0, depth: 0 })
}

/// Parses a complete expression.
pub fn parse_expr(text: &str) -> Result<Ast, ParseError> {
    let mut p = parser(text)?;
    let ast = p.sum()?;
    if *p.peek() != Tok::End {
        return Err(p.err("trailing input"));
    }
    Ok(ast)
}

/// Parses `lhs = rhs` (returned as `lhs - rhs`) or a bare expression
/// understood as `expr = 0`.
pub fn parse_relation(text: &str) -> Result<Ast, ParseError> {
    let mut p = parser(text)?;
    let lhs = p.sum()?;
    match p.peek() {
        Tok::End => Ok(lhs),
        Tok::Eq => {
            p.bump();
            let rhs = p.sum()?;
            if *p.peek() != Tok::End {
                return Err(p.err("trailing input"));
            }
            Ok(Ast::Bin(BinOp::Sub, Box::new(lhs), Box::new(rhs)))
        }
        _ => Err(p.err("trailing input")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence_and_juxtaposition() {
        let a = parse_expr("-x^2 + 2 y z / 3").unwrap();
        assert_eq!(a.to_string(), "(-((x)^2) + (((2 * y) * z) / 3))");
        let b = parse_expr("cos(psi) cos(phi) dphi dpsi").unwrap();
        assert!(matches!(b, Ast::Bin(BinOp::Mul, _, _)));
        assert_eq!(parse_expr("x**3").unwrap().to_string(), "(x)^3");
        assert_eq!(parse_expr("x^(-2)").unwrap().to_string(), "(x)^-2");
    }

    #[test]
    fn decimals_are_exact() {
        assert_eq!(parse_expr("0.25").unwrap(), Ast::Num(BigRational::new(1.into(), 4.into())));
    }

    #[test]
    fn errors_carry_positions() {
        let e = parse_expr("x +\n  * y").unwrap_err();
        assert_eq!((e.line, e.column), (2, 3));
        assert!(parse_expr("x^y").is_err());
        assert!(parse_expr("(x").is_err());
        assert!(parse_expr("x $").is_err());
        assert!(parse_expr("").is_err());
    }

    #[test]
    fn relations() {
        let r = parse_relation("s^2 = 1 - c^2").unwrap();
        assert_eq!(r.to_string(), "((s)^2 - (1 - (c)^2))");
    }

    #[test]
    fn deep_nesting_is_rejected() {
        let text = format!("{}x{}", "(".repeat(5000), ")".repeat(5000));
        assert!(parse_expr(&text).is_err());
        let neg = format!("{}x", "-".repeat(5000));
        assert!(parse_expr(&neg).is_err());
    }
}
