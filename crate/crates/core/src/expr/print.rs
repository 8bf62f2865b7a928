use std::fmt;

use super::{BinOp, Expr};

const PREC_ADD: u8 = 1;
const PREC_MUL: u8 = 2;
const PREC_NEG: u8 = 3;
const PREC_POW: u8 = 4;
const PREC_ATOM: u8 = 5;

fn precedence(e: &Expr) -> u8 {
    match e {
        Expr::Constant(c) if *c < 0.0 || c.is_sign_negative() => PREC_NEG,
        Expr::Constant(_) | Expr::Variable(_) | Expr::Call(..) => PREC_ATOM,
        Expr::Neg(_) => PREC_NEG,
        Expr::Binary(BinOp::Add | BinOp::Sub, ..) => PREC_ADD,
        Expr::Binary(BinOp::Mul | BinOp::Div, ..) => PREC_MUL,
        Expr::Binary(BinOp::Pow, ..) => PREC_POW,
    }
}

fn write_child(f: &mut fmt::Formatter<'_>, e: &Expr, parens: bool) -> fmt::Result {
    if parens {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            // Negative literals never come out of the parser; they are
            // written so that they at least read back to the same value.
            Expr::Constant(c) if c.is_sign_negative() => write!(f, "(-{})", -c),
            Expr::Constant(c) => write!(f, "{c}"),
            Expr::Variable(v) => write!(f, "{v}"),
            Expr::Call(func, arg) => write!(f, "{func}({arg})"),
            Expr::Neg(a) => {
                f.write_str("-")?;
                write_child(f, a, precedence(a) < PREC_NEG)
            }
            Expr::Binary(op, a, b) => {
                let (left_parens, right_parens) = match op {
                    BinOp::Add | BinOp::Sub => {
                        (precedence(a) < PREC_ADD, precedence(b) <= PREC_ADD)
                    }
                    BinOp::Mul | BinOp::Div => {
                        (precedence(a) < PREC_MUL, precedence(b) <= PREC_MUL)
                    }
                    BinOp::Pow => (precedence(a) < PREC_ATOM, precedence(b) < PREC_NEG),
                };
                write_child(f, a, left_parens)?;
                match op {
                    BinOp::Pow => f.write_str("^")?,
                    _ => write!(f, " {} ", op.symbol())?,
                }
                write_child(f, b, right_parens)
            }
        }
    }
}
