//! Recursive-descent parser.
//!
//! ```text
//! expr    := term (("+" | "-") term)*
//! term    := unary (("*" | "/") unary)*
//! unary   := "-" unary | power
//! power   := primary ("^" unary)?
//! primary := NUMBER | IDENT | IDENT "(" expr ")" | "(" expr ")"
//! ```
//!
//! `^` is right-associative and binds tighter than a leading minus, so
//! `-t^2` is `-(t^2)`. Exponents must be free of variables.

use std::fmt;

use thiserror::Error;

use super::{BinOp, Expr, Function, Var};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("syntax error at byte {offset}: expected {}", .expected.join(" | "))]
    Syntax {
        offset: usize,
        expected: Vec<String>,
    },
    #[error("exponent at byte {offset} depends on variables; only constant exponents are supported")]
    NonConstantExponent { offset: usize },
}

impl ParseError {
    pub fn offset(&self) -> usize {
        match self {
            ParseError::Syntax { offset, .. } | ParseError::NonConstantExponent { offset } => {
                *offset
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Number(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::Number(n) => write!(f, "{n}"),
            Token::Ident(s) => f.write_str(s),
            Token::Plus => f.write_str("+"),
            Token::Minus => f.write_str("-"),
            Token::Star => f.write_str("*"),
            Token::Slash => f.write_str("/"),
            Token::Caret => f.write_str("^"),
            Token::LParen => f.write_str("("),
            Token::RParen => f.write_str(")"),
        }
    }
}

fn syntax(offset: usize, expected: &[&str]) -> ParseError {
    ParseError::Syntax {
        offset,
        expected: expected.iter().map(|s| s.to_string()).collect(),
    }
}

fn tokenize(src: &str) -> Result<Vec<(usize, Token)>, ParseError> {
    let mut out = Vec::new();
    let mut chars = src.char_indices().peekable();
    while let Some(&(start, c)) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
            continue;
        }
        let single = match c {
            '+' => Some(Token::Plus),
            '-' => Some(Token::Minus),
            '*' => Some(Token::Star),
            '/' => Some(Token::Slash),
            '^' => Some(Token::Caret),
            '(' => Some(Token::LParen),
            ')' => Some(Token::RParen),
            _ => None,
        };
        if let Some(tok) = single {
            chars.next();
            out.push((start, tok));
            continue;
        }
        if c.is_ascii_digit() || c == '.' {
            let mut end = start;
            let mut seen_exp = false;
            let mut prev = ' ';
            while let Some(&(i, d)) = chars.peek() {
                let accept = d.is_ascii_digit()
                    || d == '.'
                    || (!seen_exp && (d == 'e' || d == 'E'))
                    || ((d == '+' || d == '-') && (prev == 'e' || prev == 'E'));
                if !accept {
                    break;
                }
                if d == 'e' || d == 'E' {
                    seen_exp = true;
                }
                prev = d;
                end = i + d.len_utf8();
                chars.next();
            }
            let text = &src[start..end];
            let value: f64 = text
                .parse()
                .map_err(|_| syntax(start, &["number"]))?;
            out.push((start, Token::Number(value)));
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let mut end = start;
            while let Some(&(i, d)) = chars.peek() {
                if !(d.is_alphanumeric() || d == '_') {
                    break;
                }
                end = i + d.len_utf8();
                chars.next();
            }
            out.push((start, Token::Ident(src[start..end].to_string())));
            continue;
        }
        return Err(syntax(start, &["number", "identifier", "operator", "parenthesis"]));
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<(usize, Token)>,
    pos: usize,
    end: usize,
}

const OPERAND: &[&str] = &["number", "identifier", "(", "-"];

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.tokens.get(self.pos).map_or(self.end, |(o, _)| *o)
    }

    fn eat(&mut self, tok: &Token) -> bool {
        if self.peek() == Some(tok) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Some(Token::Plus) => BinOp::Add,
                Some(Token::Minus) => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.term()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Some(Token::Star) => BinOp::Mul,
                Some(Token::Slash) => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.eat(&Token::Minus) {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.primary()?;
        if self.eat(&Token::Caret) {
            let at = self.offset();
            let exponent = self.unary()?;
            if !exponent.free_variables().is_empty() {
                return Err(ParseError::NonConstantExponent { offset: at });
            }
            return Ok(Expr::binary(BinOp::Pow, base, exponent));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let at = self.offset();
        let Some(tok) = self.peek().cloned() else {
            return Err(syntax(at, OPERAND));
        };
        match tok {
            Token::Number(n) => {
                self.pos += 1;
                Ok(Expr::Constant(n))
            }
            Token::LParen => {
                self.pos += 1;
                let inner = self.expr()?;
                if !self.eat(&Token::RParen) {
                    return Err(syntax(self.offset(), &[")"]));
                }
                Ok(inner)
            }
            Token::Ident(name) => {
                self.pos += 1;
                if let Some(f) = Function::from_name(&name) {
                    if !self.eat(&Token::LParen) {
                        return Err(syntax(self.offset(), &["("]));
                    }
                    let arg = self.expr()?;
                    if !self.eat(&Token::RParen) {
                        return Err(syntax(self.offset(), &[")"]));
                    }
                    return Ok(Expr::call(f, arg));
                }
                match name.as_str() {
                    "pi" => return Ok(Expr::Constant(std::f64::consts::PI)),
                    "e" => return Ok(Expr::Constant(std::f64::consts::E)),
                    _ => {}
                }
                Var::from_name(&name).map(Expr::Variable).ok_or_else(|| {
                    let mut expected: Vec<&str> = Var::ALL.iter().map(|v| v.name()).collect();
                    expected.extend(["pi", "e"]);
                    expected.extend(Function::ALL.iter().map(|f| f.name()));
                    syntax(at, &expected)
                })
            }
            _ => Err(syntax(at, OPERAND)),
        }
    }
}

/// Parses a formula.
pub fn parse(source: &str) -> Result<Expr, ParseError> {
    let tokens = tokenize(source)?;
    let mut p = Parser {
        tokens,
        pos: 0,
        end: source.len(),
    };
    let e = p.expr()?;
    if p.pos != p.tokens.len() {
        return Err(syntax(p.offset(), &["operator", "end of input"]));
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(v: f64) -> Expr {
        Expr::Constant(v)
    }
    fn t() -> Expr {
        Expr::Variable(Var::T)
    }
    fn x() -> Expr {
        Expr::Variable(Var::X)
    }

    #[test]
    fn sec_squared() {
        let e = parse("sec(t)^2").unwrap();
        assert_eq!(e, Expr::binary(BinOp::Pow, Expr::call(Function::Sec, t()), c(2.0)));
    }

    #[test]
    fn example_omega1() {
        let e = parse("exp(2*x) * (exp(x+t) - (1/4)*exp(x-t))^(-2)").unwrap();
        let lhs = Expr::call(Function::Exp, Expr::binary(BinOp::Mul, c(2.0), x()));
        let d = Expr::binary(
            BinOp::Sub,
            Expr::call(Function::Exp, Expr::binary(BinOp::Add, x(), t())),
            Expr::binary(
                BinOp::Mul,
                Expr::binary(BinOp::Div, c(1.0), c(4.0)),
                Expr::call(Function::Exp, Expr::binary(BinOp::Sub, x(), t())),
            ),
        );
        let rhs = Expr::binary(BinOp::Pow, d, Expr::Neg(Box::new(c(2.0))));
        assert_eq!(e, Expr::binary(BinOp::Mul, lhs, rhs));
    }

    #[test]
    fn incomplete_input_reports_end_offset() {
        let err = parse("2*x +").unwrap_err();
        assert_eq!(err.offset(), 5);
        assert!(matches!(err, ParseError::Syntax { .. }));
    }

    #[test]
    fn unclosed_call() {
        assert!(matches!(parse("sec(t^"), Err(ParseError::Syntax { offset: 6, .. })));
    }

    #[test]
    fn non_constant_exponent() {
        assert!(matches!(
            parse("t^x"),
            Err(ParseError::NonConstantExponent { offset: 2 })
        ));
        assert!(parse("t^(1/2)").is_ok());
        assert!(parse("t^pi").is_ok());
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(parse("-t^2").unwrap(), Expr::Neg(Box::new(parse("t^2").unwrap())));
        assert_eq!(parse("2^3^2").unwrap(), parse("2^(3^2)").unwrap());
        assert_eq!(parse("1-2-3").unwrap(), parse("(1-2)-3").unwrap());
        assert_eq!(parse("1/2*3").unwrap(), parse("(1/2)*3").unwrap());
        assert_eq!(parse("t^-2").unwrap(), parse("t^(-2)").unwrap());
    }

    #[test]
    fn numbers_and_keywords() {
        assert_eq!(parse("1.5e-3").unwrap(), c(1.5e-3));
        assert_eq!(parse(".25").unwrap(), c(0.25));
        assert_eq!(parse("pi").unwrap(), c(std::f64::consts::PI));
        assert_eq!(parse(" e ").unwrap(), c(std::f64::consts::E));
        // `2e` is not a number, and `e` alone after a number is a separate token
        assert!(parse("2e").is_err());
    }

    #[test]
    fn rejects_unknown_names_and_trailing_tokens() {
        assert!(matches!(parse("y + 1"), Err(ParseError::Syntax { offset: 0, .. })));
        assert!(matches!(parse("sin t"), Err(ParseError::Syntax { offset: 4, .. })));
        assert!(matches!(parse("t t"), Err(ParseError::Syntax { offset: 2, .. })));
        assert!(matches!(parse("t(2)"), Err(ParseError::Syntax { offset: 1, .. })));
        assert!(matches!(parse("t # 2"), Err(ParseError::Syntax { offset: 2, .. })));
        assert!(parse("").is_err());
    }
}
