use thiserror::Error;

use super::{BinOp, Expr, Var};
use crate::jet::{DomainError, Function, Jet2, Scalar};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("variable `{0}` is not bound")]
    Unbound(Var),
    #[error("domain error in `{node}` at {point}: {source}")]
    Domain {
        node: String,
        point: String,
        #[source]
        source: DomainError,
    },
    #[error("`{node}` is not finite at {point}")]
    NonFinite { node: String, point: String },
}

/// Values for the variables of an expression.
#[derive(Debug, Clone, Copy)]
pub struct Bindings<S> {
    slots: [Option<S>; 5],
}

impl<S: Scalar> Default for Bindings<S> {
    fn default() -> Self {
        Self { slots: [None; 5] }
    }
}

impl<S: Scalar> Bindings<S> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, var: Var, value: S) -> Self {
        self.set(var, value);
        self
    }

    pub fn set(&mut self, var: Var, value: S) {
        self.slots[var.index()] = Some(value);
    }

    pub fn get(&self, var: Var) -> Option<S> {
        self.slots[var.index()]
    }

    fn describe(&self) -> String {
        let parts: Vec<String> = Var::ALL
            .iter()
            .filter_map(|v| self.get(*v).map(|s| format!("{v}={}", s.value())))
            .collect();
        format!("({})", parts.join(", "))
    }
}

/// A nonzero value held as its sign and the jet of `ln |value|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogJet {
    pub negative: bool,
    pub log: Jet2,
}

impl LogJet {
    const ONE: LogJet = LogJet {
        negative: false,
        log: Jet2::constant(0.0),
    };

    fn of(node: &Expr, j: Jet2, bindings: &Bindings<Jet2>) -> Result<LogJet, EvalError> {
        let a = j.value;
        if a == 0.0 {
            return Err(EvalError::NonFinite {
                node: format!("ln |{node}|"),
                point: bindings.describe(),
            });
        }
        Ok(LogJet {
            negative: a < 0.0,
            log: j.chain(a.abs().ln(), 1.0 / a, -1.0 / (a * a)),
        })
    }
}

impl Expr {
    /// Evaluates by structural recursion. Any non-finite intermediate result
    /// is reported as an error.
    pub fn evaluate<S: Scalar>(&self, bindings: &Bindings<S>) -> Result<S, EvalError> {
        let out = match self {
            Expr::Constant(c) => S::from_f64(*c),
            Expr::Variable(v) => bindings.get(*v).ok_or(EvalError::Unbound(*v))?,
            Expr::Neg(a) => -a.evaluate(bindings)?,
            Expr::Call(f, a) => {
                let arg = a.evaluate(bindings)?;
                arg.try_apply(*f).map_err(|e| self.domain(bindings, e))?
            }
            Expr::Binary(op, a, b) => {
                let lhs = a.evaluate(bindings)?;
                match op {
                    BinOp::Add => lhs + b.evaluate(bindings)?,
                    BinOp::Sub => lhs - b.evaluate(bindings)?,
                    BinOp::Mul => lhs * b.evaluate(bindings)?,
                    BinOp::Div => {
                        let rhs = b.evaluate(bindings)?;
                        lhs.try_div(rhs).map_err(|e| self.domain(bindings, e))?
                    }
                    BinOp::Pow => {
                        let p: f64 = b.evaluate(&Bindings::<f64>::new())?;
                        lhs.try_pow(p).map_err(|e| self.domain(bindings, e))?
                    }
                }
            }
        };
        if !out.all_finite() {
            return Err(EvalError::NonFinite {
                node: self.to_string(),
                point: bindings.describe(),
            });
        }
        Ok(out)
    }

    fn domain<S: Scalar>(&self, bindings: &Bindings<S>, source: DomainError) -> EvalError {
        EvalError::Domain {
            node: self.to_string(),
            point: bindings.describe(),
            source,
        }
    }

    /// Evaluates `ln |self|` as a jet, together with the sign of the value.
    ///
    /// Products, quotients, constant powers, `exp` and `sqrt` are taken apart
    /// into sums of logarithms, so factors depending on one coordinate each
    /// contribute exactly zero to the mixed derivative. Other nodes are
    /// evaluated as ordinary jets and then logged.
    pub fn evaluate_log(&self, bindings: &Bindings<Jet2>) -> Result<LogJet, EvalError> {
        let out = match self {
            Expr::Neg(a) => {
                let l = a.evaluate_log(bindings)?;
                LogJet {
                    negative: !l.negative,
                    ..l
                }
            }
            Expr::Binary(BinOp::Mul, a, b) => {
                let (x, y) = (a.evaluate_log(bindings)?, b.evaluate_log(bindings)?);
                LogJet {
                    negative: x.negative != y.negative,
                    log: x.log + y.log,
                }
            }
            Expr::Binary(BinOp::Div, a, b) => {
                let (x, y) = (a.evaluate_log(bindings)?, b.evaluate_log(bindings)?);
                LogJet {
                    negative: x.negative != y.negative,
                    log: x.log - y.log,
                }
            }
            Expr::Binary(BinOp::Pow, a, b) => {
                let p = b.evaluate_constant()?;
                if p == 0.0 {
                    return Ok(LogJet::ONE);
                }
                let base = a.evaluate_log(bindings)?;
                if base.negative && p.fract() != 0.0 {
                    // reported exactly as plain evaluation reports it
                    return self.evaluate(bindings).and_then(|j| LogJet::of(self, j, bindings));
                }
                LogJet {
                    negative: base.negative && p.rem_euclid(2.0) == 1.0,
                    log: base.log.scale(p),
                }
            }
            Expr::Call(Function::Exp, a) => LogJet {
                negative: false,
                log: a.evaluate(bindings)?,
            },
            Expr::Call(Function::Sqrt, a) => {
                let l = a.evaluate_log(bindings)?;
                if l.negative {
                    return self.evaluate(bindings).and_then(|j| LogJet::of(self, j, bindings));
                }
                LogJet {
                    negative: false,
                    log: l.log.scale(0.5),
                }
            }
            Expr::Call(Function::Abs, a) => LogJet {
                negative: false,
                ..a.evaluate_log(bindings)?
            },
            _ => return LogJet::of(self, self.evaluate(bindings)?, bindings),
        };
        if !out.log.is_finite() {
            return Err(EvalError::NonFinite {
                node: self.to_string(),
                point: bindings.describe(),
            });
        }
        Ok(out)
    }

    /// Plain evaluation of a variable-free expression.
    pub fn evaluate_constant(&self) -> Result<f64, EvalError> {
        self.evaluate(&Bindings::<f64>::new())
    }
}
