//! Second-order forward derivative algebra over two active coordinates.
//!
//! A [`Jet2`] carries the value of a scalar field together with its gradient
//! and Hessian with respect to the chart's two coordinates. The fields are
//! named after the standard `(t, x)` chart; in the null chart the same slots
//! hold the `(u, v)` partials. Every operation propagates the components
//! exactly through second order, so curvature formulas built on top of it
//! carry no truncation error.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use thiserror::Error;

/// Failure of an elementary operation outside its real domain.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{op} is undefined at {at}")]
pub struct DomainError {
    pub op: &'static str,
    pub at: f64,
}

impl DomainError {
    fn new(op: &'static str, at: f64) -> Self {
        Self { op, at }
    }
}

/// `|cos a|` below this is treated as a pole of `sec` and `tan`.
pub const POLE_EPS: f64 = 1e-15;

/// Integer exponents up to this magnitude are expanded into repeated products.
pub const MAX_PRODUCT_EXPONENT: i32 = 8;

/// Which of the two active coordinates a seed differentiates against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    First,
    Second,
}

/// Elementary functions understood by both the expression language and the
/// jet algebra.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Function {
    Exp,
    Log,
    Sin,
    Cos,
    Tan,
    Sec,
    Sinh,
    Cosh,
    Tanh,
    Sech,
    Sqrt,
    Atan,
    Abs,
}

impl Function {
    pub const ALL: [Function; 13] = [
        Function::Exp,
        Function::Log,
        Function::Sin,
        Function::Cos,
        Function::Tan,
        Function::Sec,
        Function::Sinh,
        Function::Cosh,
        Function::Tanh,
        Function::Sech,
        Function::Sqrt,
        Function::Atan,
        Function::Abs,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Function::Exp => "exp",
            Function::Log => "log",
            Function::Sin => "sin",
            Function::Cos => "cos",
            Function::Tan => "tan",
            Function::Sec => "sec",
            Function::Sinh => "sinh",
            Function::Cosh => "cosh",
            Function::Tanh => "tanh",
            Function::Sech => "sech",
            Function::Sqrt => "sqrt",
            Function::Atan => "atan",
            Function::Abs => "abs",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|f| f.name() == name)
    }

    /// Value, first and second derivative of the function at `a`.
    pub fn derivatives(self, a: f64) -> Result<(f64, f64, f64), DomainError> {
        let name = self.name();
        let out = match self {
            Function::Exp => {
                let e = a.exp();
                (e, e, e)
            }
            Function::Log => {
                if a <= 0.0 {
                    return Err(DomainError::new(name, a));
                }
                (a.ln(), 1.0 / a, -1.0 / (a * a))
            }
            Function::Sin => {
                let (s, c) = a.sin_cos();
                (s, c, -s)
            }
            Function::Cos => {
                let (s, c) = a.sin_cos();
                (c, -s, -c)
            }
            Function::Tan => {
                let c = a.cos();
                if c.abs() < POLE_EPS {
                    return Err(DomainError::new(name, a));
                }
                let t = a.tan();
                let d = 1.0 + t * t;
                (t, d, 2.0 * t * d)
            }
            Function::Sec => {
                let c = a.cos();
                if c.abs() < POLE_EPS {
                    return Err(DomainError::new(name, a));
                }
                let s = 1.0 / c;
                let t = a.tan();
                (s, s * t, s * (t * t + s * s))
            }
            Function::Sinh => (a.sinh(), a.cosh(), a.sinh()),
            Function::Cosh => (a.cosh(), a.sinh(), a.cosh()),
            Function::Tanh => {
                let t = a.tanh();
                let d = 1.0 - t * t;
                (t, d, -2.0 * t * d)
            }
            Function::Sech => {
                let s = 1.0 / a.cosh();
                let t = a.tanh();
                (s, -s * t, s * (t * t - s * s))
            }
            Function::Sqrt => {
                if a <= 0.0 {
                    return Err(DomainError::new(name, a));
                }
                let r = a.sqrt();
                (r, 0.5 / r, -0.25 / (r * a))
            }
            Function::Atan => {
                let d = 1.0 / (1.0 + a * a);
                (a.atan(), d, -2.0 * a * d * d)
            }
            Function::Abs => {
                if a == 0.0 {
                    return Err(DomainError::new(name, a));
                }
                (a.abs(), a.signum(), 0.0)
            }
        };
        Ok(out)
    }

    /// Plain real evaluation. Unlike [`Function::derivatives`], `abs` is
    /// accepted at zero here since no derivative is requested.
    pub fn apply_real(self, a: f64) -> Result<f64, DomainError> {
        match self {
            Function::Abs => Ok(a.abs()),
            _ => self.derivatives(a).map(|d| d.0),
        }
    }
}

impl fmt::Display for Function {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Value, gradient and Hessian of a scalar field of two coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Jet2 {
    pub value: f64,
    pub dt: f64,
    pub dx: f64,
    pub dtt: f64,
    pub dtx: f64,
    pub dxx: f64,
}

impl Jet2 {
    pub const fn constant(value: f64) -> Self {
        Self {
            value,
            dt: 0.0,
            dx: 0.0,
            dtt: 0.0,
            dtx: 0.0,
            dxx: 0.0,
        }
    }

    /// The coordinate function for `axis`, evaluated at `point`.
    pub fn seed(axis: Axis, point: (f64, f64)) -> Self {
        match axis {
            Axis::First => Self {
                value: point.0,
                dt: 1.0,
                ..Self::constant(0.0)
            },
            Axis::Second => Self {
                value: point.1,
                dx: 1.0,
                ..Self::constant(0.0)
            },
        }
    }

    /// Both coordinate functions at `point`.
    pub fn seeds(point: (f64, f64)) -> (Self, Self) {
        (Self::seed(Axis::First, point), Self::seed(Axis::Second, point))
    }

    pub fn is_finite(&self) -> bool {
        self.components().iter().all(|c| c.is_finite())
    }

    pub fn components(&self) -> [f64; 6] {
        [self.value, self.dt, self.dx, self.dtt, self.dtx, self.dxx]
    }

    pub fn scale(self, k: f64) -> Self {
        Self {
            value: k * self.value,
            dt: k * self.dt,
            dx: k * self.dx,
            dtt: k * self.dtt,
            dtx: k * self.dtx,
            dxx: k * self.dxx,
        }
    }

    /// Composes a univariate function with this jet given the function's
    /// value `f0`, first derivative `f1` and second derivative `f2` at
    /// `self.value`.
    pub fn chain(self, f0: f64, f1: f64, f2: f64) -> Self {
        Self {
            value: f0,
            dt: f1 * self.dt,
            dx: f1 * self.dx,
            dtt: f1 * self.dtt + f2 * self.dt * self.dt,
            dtx: f1 * self.dtx + f2 * self.dt * self.dx,
            dxx: f1 * self.dxx + f2 * self.dx * self.dx,
        }
    }

    /// Treats `self` as the jet of a field with respect to coordinates
    /// `(a, b)` and re-expresses it with respect to the coordinates in which
    /// `a` and `b` are themselves jets.
    pub fn compose(self, a: Jet2, b: Jet2) -> Self {
        let (fa, fb) = (self.dt, self.dx);
        let (faa, fab, fbb) = (self.dtt, self.dtx, self.dxx);
        Self {
            value: self.value,
            dt: fa * a.dt + fb * b.dt,
            dx: fa * a.dx + fb * b.dx,
            dtt: fa * a.dtt
                + fb * b.dtt
                + faa * a.dt * a.dt
                + 2.0 * fab * a.dt * b.dt
                + fbb * b.dt * b.dt,
            dtx: fa * a.dtx
                + fb * b.dtx
                + faa * a.dt * a.dx
                + fab * (a.dt * b.dx + a.dx * b.dt)
                + fbb * b.dt * b.dx,
            dxx: fa * a.dxx
                + fb * b.dxx
                + faa * a.dx * a.dx
                + 2.0 * fab * a.dx * b.dx
                + fbb * b.dx * b.dx,
        }
    }

    pub fn checked_div(self, rhs: Jet2) -> Result<Self, DomainError> {
        let b = rhs.value;
        if b == 0.0 {
            return Err(DomainError::new("division", b));
        }
        // q = a / b, differentiated through a = q * b.
        let q = self.value / b;
        let qt = (self.dt - q * rhs.dt) / b;
        let qx = (self.dx - q * rhs.dx) / b;
        Ok(Self {
            value: q,
            dt: qt,
            dx: qx,
            dtt: (self.dtt - 2.0 * qt * rhs.dt - q * rhs.dtt) / b,
            dtx: (self.dtx - qt * rhs.dx - qx * rhs.dt - q * rhs.dtx) / b,
            dxx: (self.dxx - 2.0 * qx * rhs.dx - q * rhs.dxx) / b,
        })
    }

    pub fn apply(self, f: Function) -> Result<Self, DomainError> {
        let (f0, f1, f2) = f.derivatives(self.value)?;
        Ok(self.chain(f0, f1, f2))
    }

    /// Real power for non-integer (or large integer) exponents; the base must
    /// be positive.
    pub fn powf(self, p: f64) -> Result<Self, DomainError> {
        let a = self.value;
        if a <= 0.0 {
            return Err(DomainError::new("pow", a));
        }
        let f0 = a.powf(p);
        let f1 = p * f0 / a;
        let f2 = (p - 1.0) * f1 / a;
        Ok(self.chain(f0, f1, f2))
    }
}

impl Add for Jet2 {
    type Output = Jet2;
    fn add(self, r: Jet2) -> Jet2 {
        Jet2 {
            value: self.value + r.value,
            dt: self.dt + r.dt,
            dx: self.dx + r.dx,
            dtt: self.dtt + r.dtt,
            dtx: self.dtx + r.dtx,
            dxx: self.dxx + r.dxx,
        }
    }
}

impl Sub for Jet2 {
    type Output = Jet2;
    fn sub(self, r: Jet2) -> Jet2 {
        Jet2 {
            value: self.value - r.value,
            dt: self.dt - r.dt,
            dx: self.dx - r.dx,
            dtt: self.dtt - r.dtt,
            dtx: self.dtx - r.dtx,
            dxx: self.dxx - r.dxx,
        }
    }
}

impl Mul for Jet2 {
    type Output = Jet2;
    fn mul(self, r: Jet2) -> Jet2 {
        let (a, b) = (self, r);
        Jet2 {
            value: a.value * b.value,
            dt: a.dt * b.value + a.value * b.dt,
            dx: a.dx * b.value + a.value * b.dx,
            dtt: a.dtt * b.value + 2.0 * a.dt * b.dt + a.value * b.dtt,
            dtx: a.dtx * b.value + a.dt * b.dx + a.dx * b.dt + a.value * b.dtx,
            dxx: a.dxx * b.value + 2.0 * a.dx * b.dx + a.value * b.dxx,
        }
    }
}

impl Neg for Jet2 {
    type Output = Jet2;
    fn neg(self) -> Jet2 {
        self.scale(-1.0)
    }
}

/// Number system an expression can be evaluated in: plain reals or jets.
pub trait Scalar:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Neg<Output = Self>
{
    fn from_f64(c: f64) -> Self;
    fn value(&self) -> f64;
    fn all_finite(&self) -> bool;
    fn try_div(self, rhs: Self) -> Result<Self, DomainError>;
    fn try_apply(self, f: Function) -> Result<Self, DomainError>;
    fn try_powf(self, p: f64) -> Result<Self, DomainError>;

    /// Integer power by repeated products, which keeps negative bases legal.
    fn try_powi(self, n: i32) -> Result<Self, DomainError> {
        let mut acc = Self::from_f64(1.0);
        for _ in 0..n.unsigned_abs() {
            acc = acc * self;
        }
        if n < 0 {
            Self::from_f64(1.0).try_div(acc)
        } else {
            Ok(acc)
        }
    }

    /// Power by a constant exponent.
    fn try_pow(self, p: f64) -> Result<Self, DomainError> {
        if p.fract() == 0.0 && p.abs() <= MAX_PRODUCT_EXPONENT as f64 {
            self.try_powi(p as i32)
        } else {
            self.try_powf(p)
        }
    }
}

impl Scalar for f64 {
    fn from_f64(c: f64) -> Self {
        c
    }
    fn value(&self) -> f64 {
        *self
    }
    fn all_finite(&self) -> bool {
        self.is_finite()
    }
    fn try_div(self, rhs: Self) -> Result<Self, DomainError> {
        if rhs == 0.0 {
            return Err(DomainError::new("division", rhs));
        }
        Ok(self / rhs)
    }
    fn try_apply(self, f: Function) -> Result<Self, DomainError> {
        f.apply_real(self)
    }
    fn try_powf(self, p: f64) -> Result<Self, DomainError> {
        if self <= 0.0 {
            return Err(DomainError::new("pow", self));
        }
        Ok(self.powf(p))
    }
}

impl Scalar for Jet2 {
    fn from_f64(c: f64) -> Self {
        Jet2::constant(c)
    }
    fn value(&self) -> f64 {
        self.value
    }
    fn all_finite(&self) -> bool {
        self.is_finite()
    }
    fn try_div(self, rhs: Self) -> Result<Self, DomainError> {
        self.checked_div(rhs)
    }
    fn try_apply(self, f: Function) -> Result<Self, DomainError> {
        self.apply(f)
    }
    fn try_powf(self, p: f64) -> Result<Self, DomainError> {
        self.powf(p)
    }
}
