//! Formula language for conformal factors and their ingredients.
//!
//! Expressions are small real-valued ASTs over a fixed alphabet of variables
//! (`t`, `x`, `u`, `v` and the integration variable `l`, also accepted as
//! `λ`). They evaluate over any [`Scalar`](crate::jet::Scalar), so the same
//! tree yields plain values or full second-order jets.

mod eval;
mod parse;
mod print;

use std::collections::BTreeSet;
use std::fmt;

pub use eval::{Bindings, EvalError, LogJet};
pub use parse::{parse, ParseError};

pub use crate::jet::Function;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    T,
    X,
    U,
    V,
    Lambda,
}

impl Var {
    pub const ALL: [Var; 5] = [Var::T, Var::X, Var::U, Var::V, Var::Lambda];

    pub fn name(self) -> &'static str {
        match self {
            Var::T => "t",
            Var::X => "x",
            Var::U => "u",
            Var::V => "v",
            Var::Lambda => "l",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "t" => Some(Var::T),
            "x" => Some(Var::X),
            "u" => Some(Var::U),
            "v" => Some(Var::V),
            "l" | "λ" => Some(Var::Lambda),
            _ => None,
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Pow => "^",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Constant(f64),
    Variable(Var),
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Call(Function, Box<Expr>),
}

impl Expr {
    /// A literal; negative values become `Neg` of the magnitude so the tree
    /// stays in the shape the parser produces.
    pub fn constant(c: f64) -> Expr {
        if c < 0.0 {
            Expr::Neg(Box::new(Expr::Constant(-c)))
        } else {
            Expr::Constant(c)
        }
    }

    pub fn var(v: Var) -> Expr {
        Expr::Variable(v)
    }

    pub fn binary(op: BinOp, a: Expr, b: Expr) -> Expr {
        Expr::Binary(op, Box::new(a), Box::new(b))
    }

    pub fn call(f: Function, arg: Expr) -> Expr {
        Expr::Call(f, Box::new(arg))
    }

    pub fn add(self, rhs: Expr) -> Expr {
        if rhs.is_constant(0.0) {
            return self;
        }
        if self.is_constant(0.0) {
            return rhs;
        }
        Expr::binary(BinOp::Add, self, rhs)
    }

    pub fn sub(self, rhs: Expr) -> Expr {
        if rhs.is_constant(0.0) {
            return self;
        }
        Expr::binary(BinOp::Sub, self, rhs)
    }

    pub fn mul(self, rhs: Expr) -> Expr {
        if self.is_constant(1.0) {
            return rhs;
        }
        if rhs.is_constant(1.0) {
            return self;
        }
        Expr::binary(BinOp::Mul, self, rhs)
    }

    pub fn div(self, rhs: Expr) -> Expr {
        Expr::binary(BinOp::Div, self, rhs)
    }

    pub fn pow(self, exponent: f64) -> Expr {
        Expr::binary(BinOp::Pow, self, Expr::constant(exponent))
    }

    pub fn apply(self, f: Function) -> Expr {
        Expr::call(f, self)
    }

    fn is_constant(&self, c: f64) -> bool {
        matches!(self, Expr::Constant(v) if *v == c)
    }

    pub fn free_variables(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_variables(&mut out);
        out
    }

    fn collect_variables(&self, out: &mut BTreeSet<Var>) {
        match self {
            Expr::Constant(_) => {}
            Expr::Variable(v) => {
                out.insert(*v);
            }
            Expr::Neg(a) | Expr::Call(_, a) => a.collect_variables(out),
            Expr::Binary(_, a, b) => {
                a.collect_variables(out);
                b.collect_variables(out);
            }
        }
    }

    /// Replaces every occurrence of `var` with `with`.
    pub fn substitute(&self, var: Var, with: &Expr) -> Expr {
        match self {
            Expr::Constant(c) => Expr::Constant(*c),
            Expr::Variable(v) if *v == var => with.clone(),
            Expr::Variable(v) => Expr::Variable(*v),
            Expr::Neg(a) => Expr::Neg(Box::new(a.substitute(var, with))),
            Expr::Call(f, a) => Expr::Call(*f, Box::new(a.substitute(var, with))),
            Expr::Binary(op, a, b) => Expr::Binary(
                *op,
                Box::new(a.substitute(var, with)),
                Box::new(b.substitute(var, with)),
            ),
        }
    }

    /// The single free variable of a one-variable expression, if any.
    pub fn sole_variable(&self) -> Result<Option<Var>, BTreeSet<Var>> {
        let vars = self.free_variables();
        match vars.len() {
            0 => Ok(None),
            1 => Ok(vars.into_iter().next()),
            _ => Err(vars),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_variables_examples() {
        assert_eq!(parse("sec(t)^2").unwrap().free_variables(), BTreeSet::from([Var::T]));
        assert!(parse("1").unwrap().free_variables().is_empty());
        let omega1 = parse("exp(2*x) * (exp(x+t) - (1/4)*exp(x-t))^(-2)").unwrap();
        assert_eq!(omega1.free_variables(), BTreeSet::from([Var::T, Var::X]));
    }

    #[test]
    fn substitute_replaces_all_occurrences() {
        let e = parse("l * exp(l)").unwrap();
        let s = e.substitute(Var::Lambda, &parse("x + t").unwrap());
        assert_eq!(s, parse("(x + t) * exp(x + t)").unwrap());
    }

    #[test]
    fn builders_skip_identities() {
        let t = Expr::var(Var::T);
        assert_eq!(t.clone().add(Expr::constant(0.0)), t);
        assert_eq!(Expr::constant(1.0).mul(t.clone()), t);
        assert_eq!(Expr::constant(-2.0), Expr::Neg(Box::new(Expr::Constant(2.0))));
    }

    #[test]
    fn lambda_spellings() {
        assert_eq!(Var::from_name("λ"), Some(Var::Lambda));
        assert_eq!(parse("λ").unwrap(), parse("l").unwrap());
    }
}
