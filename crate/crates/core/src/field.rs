//! Scalar fields over a two-coordinate chart.

use thiserror::Error;

use crate::expr::{Bindings, EvalError, Expr, Var};
use crate::jet::{Jet2, Scalar};

/// A point in some two-coordinate chart, `(t, x)` unless stated otherwise.
pub type Point = (f64, f64);

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FieldError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("conformal factor is not positive ({value}) at ({}, {})", .point.0, .point.1)]
    NonPositiveFactor { value: f64, point: Point },
    #[error("singular denominator |D| = {denominator:e} at ({}, {})", .point.0, .point.1)]
    SingularDenominator { denominator: f64, point: Point },
    #[error("quadrature did not converge on [{a}, {b}] (error estimate {estimate:e})")]
    QuadratureNonConvergence { a: f64, b: f64, estimate: f64 },
    #[error("point ({}, {}) lies outside the domain of the factor", .point.0, .point.1)]
    OutsideDomain { point: Point },
}

/// Anything that can be evaluated, with exact second derivatives, at a point
/// of a two-coordinate chart.
pub trait ScalarField: Send + Sync {
    fn value_at(&self, p: Point) -> Result<f64, FieldError>;
    fn jet_at(&self, p: Point) -> Result<Jet2, FieldError>;

    /// `ln` of the field with its two chart coordinates given as jets over
    /// arbitrary seed coordinates, for fields that can keep products apart
    /// as sums of logarithms. `None` when unsupported.
    fn log_jet_with(&self, _a: Jet2, _b: Jet2) -> Option<Result<Jet2, FieldError>> {
        None
    }
}

impl<F: ScalarField + ?Sized> ScalarField for &F {
    fn value_at(&self, p: Point) -> Result<f64, FieldError> {
        (**self).value_at(p)
    }
    fn jet_at(&self, p: Point) -> Result<Jet2, FieldError> {
        (**self).jet_at(p)
    }
    fn log_jet_with(&self, a: Jet2, b: Jet2) -> Option<Result<Jet2, FieldError>> {
        (**self).log_jet_with(a, b)
    }
}

impl<F: ScalarField + ?Sized> ScalarField for std::sync::Arc<F> {
    fn value_at(&self, p: Point) -> Result<f64, FieldError> {
        (**self).value_at(p)
    }
    fn jet_at(&self, p: Point) -> Result<Jet2, FieldError> {
        (**self).jet_at(p)
    }
    fn log_jet_with(&self, a: Jet2, b: Jet2) -> Option<Result<Jet2, FieldError>> {
        (**self).log_jet_with(a, b)
    }
}

/// An expression whose two chart coordinates are bound to a pair of
/// variables, `(t, x)` or `(u, v)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExprField {
    pub expr: Expr,
    pub vars: (Var, Var),
}

impl ExprField {
    pub fn standard(expr: Expr) -> Self {
        Self {
            expr,
            vars: (Var::T, Var::X),
        }
    }

    pub fn null(expr: Expr) -> Self {
        Self {
            expr,
            vars: (Var::U, Var::V),
        }
    }

    pub fn evaluate<S: Scalar>(&self, a: S, b: S) -> Result<S, EvalError> {
        let bindings = Bindings::new().with(self.vars.0, a).with(self.vars.1, b);
        self.expr.evaluate(&bindings)
    }
}

impl ScalarField for ExprField {
    fn value_at(&self, p: Point) -> Result<f64, FieldError> {
        Ok(self.evaluate(p.0, p.1)?)
    }

    fn jet_at(&self, p: Point) -> Result<Jet2, FieldError> {
        let (a, b) = Jet2::seeds(p);
        Ok(self.evaluate(a, b)?)
    }

    fn log_jet_with(&self, a: Jet2, b: Jet2) -> Option<Result<Jet2, FieldError>> {
        let bindings = Bindings::new().with(self.vars.0, a).with(self.vars.1, b);
        Some(match self.expr.evaluate_log(&bindings) {
            Ok(l) if l.negative => Err(FieldError::NonPositiveFactor {
                value: -l.log.value.exp(),
                point: (a.value, b.value),
            }),
            Ok(l) => Ok(l.log),
            Err(e) => Err(e.into()),
        })
    }
}

/// A field given in null coordinates, read in the standard chart through
/// `u = x + t`, `v = x - t`.
#[derive(Debug, Clone)]
pub struct NullToStandard<F>(pub F);

impl<F: ScalarField> ScalarField for NullToStandard<F> {
    fn value_at(&self, (t, x): Point) -> Result<f64, FieldError> {
        self.0.value_at((x + t, x - t))
    }

    fn jet_at(&self, p: Point) -> Result<Jet2, FieldError> {
        let (t, x) = Jet2::seeds(p);
        let (u, v) = (x + t, x - t);
        Ok(self.0.jet_at((u.value, v.value))?.compose(u, v))
    }

    fn log_jet_with(&self, t: Jet2, x: Jet2) -> Option<Result<Jet2, FieldError>> {
        self.0.log_jet_with(x + t, x - t)
    }
}

/// `log` of a positive field, used to pass from `Ω` to `ω`.
#[derive(Debug, Clone)]
pub struct LogField<F>(pub F);

impl<F: ScalarField> ScalarField for LogField<F> {
    fn value_at(&self, p: Point) -> Result<f64, FieldError> {
        let v = self.0.value_at(p)?;
        if v <= 0.0 {
            return Err(FieldError::NonPositiveFactor { value: v, point: p });
        }
        Ok(v.ln())
    }

    fn jet_at(&self, p: Point) -> Result<Jet2, FieldError> {
        let j = self.0.jet_at(p)?;
        if j.value <= 0.0 {
            return Err(FieldError::NonPositiveFactor {
                value: j.value,
                point: p,
            });
        }
        let a = j.value;
        Ok(j.chain(a.ln(), 1.0 / a, -1.0 / (a * a)))
    }
}
