//! Adaptive Simpson quadrature and cached antiderivatives.

use std::sync::RwLock;

use crate::expr::{Bindings, Expr, Var};
use crate::field::FieldError;
use crate::jet::{Axis, Function, Jet2};

pub const DEFAULT_TOLERANCE: f64 = 1e-10;
pub const MAX_DEPTH: u32 = 40;
const MAX_EVALUATIONS: usize = 2_000_000;

/// Spacing of the cached antiderivative table.
pub const NODE_SPACING: f64 = 0.25;
const MAX_NODES: usize = 4096;

struct Simpson<'a, F> {
    f: &'a mut F,
    evaluations: usize,
    max_depth: u32,
}

impl<F: FnMut(f64) -> Result<f64, FieldError>> Simpson<'_, F> {
    fn eval(&mut self, x: f64) -> Result<f64, FieldError> {
        self.evaluations += 1;
        (self.f)(x)
    }

    #[allow(clippy::too_many_arguments)]
    fn refine(
        &mut self,
        (a, fa): (f64, f64),
        (m, fm): (f64, f64),
        (b, fb): (f64, f64),
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> Result<f64, FieldError> {
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = self.eval(lm)?;
        let frm = self.eval(rm)?;
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        // never ask for more than rounding allows
        let floor = 8.0 * f64::EPSILON * (left.abs() + right.abs());
        if delta.abs() <= 15.0 * tol.max(floor) {
            return Ok(left + right + delta / 15.0);
        }
        if depth >= self.max_depth || self.evaluations > MAX_EVALUATIONS || lm == a || rm == b {
            return Err(FieldError::QuadratureNonConvergence {
                a,
                b,
                estimate: delta.abs() / 15.0,
            });
        }
        let l = self.refine((a, fa), (lm, flm), (m, fm), left, 0.5 * tol, depth + 1)?;
        let r = self.refine((m, fm), (rm, frm), (b, fb), right, 0.5 * tol, depth + 1)?;
        Ok(l + r)
    }
}

/// `∫_a^b f` to absolute tolerance `tol` by recursive interval bisection
/// with the usual Richardson correction.
pub fn adaptive_simpson<F>(mut f: F, a: f64, b: f64, tol: f64) -> Result<f64, FieldError>
where
    F: FnMut(f64) -> Result<f64, FieldError>,
{
    adaptive_simpson_with_depth(&mut f, a, b, tol, MAX_DEPTH)
}

pub fn adaptive_simpson_with_depth<F>(
    f: &mut F,
    a: f64,
    b: f64,
    tol: f64,
    max_depth: u32,
) -> Result<f64, FieldError>
where
    F: FnMut(f64) -> Result<f64, FieldError>,
{
    if a == b {
        return Ok(0.0);
    }
    let mut s = Simpson {
        f,
        evaluations: 0,
        max_depth,
    };
    let fa = s.eval(a)?;
    let fb = s.eval(b)?;
    let m = 0.5 * (a + b);
    let fm = s.eval(m)?;
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    s.refine((a, fa), (m, fm), (b, fb), whole, tol, 0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Quadrature,
    /// `∫^s e^λ dλ = e^s`, with no shift to the reference point.
    RawExponential,
}

/// Cumulative values at `reference ± k·NODE_SPACING`, grown outward one
/// node at a time so the table is identical whatever order queries arrive in.
#[derive(Debug, Default)]
struct NodeTable {
    forward: Vec<f64>,
    backward: Vec<f64>,
}

/// `s ↦ ∫_reference^s integrand(λ) dλ` with exact first and second
/// derivatives.
#[derive(Debug)]
pub struct Antiderivative {
    integrand: Expr,
    reference: f64,
    tolerance: f64,
    kind: Kind,
    cache: RwLock<NodeTable>,
}

impl Clone for Antiderivative {
    fn clone(&self) -> Self {
        let table = self.cache.read().expect("antiderivative cache poisoned");
        Self {
            integrand: self.integrand.clone(),
            reference: self.reference,
            tolerance: self.tolerance,
            kind: self.kind,
            cache: RwLock::new(NodeTable {
                forward: table.forward.clone(),
                backward: table.backward.clone(),
            }),
        }
    }
}

impl Antiderivative {
    /// Antiderivative of an expression in `l`, vanishing at `reference`.
    pub fn new(integrand: Expr, reference: f64, tolerance: f64) -> Self {
        Self {
            integrand,
            reference,
            tolerance,
            kind: Kind::Quadrature,
            cache: RwLock::new(NodeTable {
                forward: vec![0.0],
                backward: vec![0.0],
            }),
        }
    }

    /// `e^s` as the antiderivative of `e^λ`, without the constant that
    /// anchoring at a reference point would subtract.
    pub fn raw_exponential() -> Self {
        Self {
            integrand: Expr::call(Function::Exp, Expr::var(Var::Lambda)),
            reference: f64::NEG_INFINITY,
            tolerance: 0.0,
            kind: Kind::RawExponential,
            cache: RwLock::new(NodeTable::default()),
        }
    }

    pub fn integrand(&self) -> &Expr {
        &self.integrand
    }

    pub fn reference(&self) -> f64 {
        self.reference
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn is_raw(&self) -> bool {
        self.kind == Kind::RawExponential
    }

    pub fn integrand_at(&self, s: f64) -> Result<f64, FieldError> {
        Ok(self
            .integrand
            .evaluate(&Bindings::new().with(Var::Lambda, s))?)
    }

    fn integrate(&self, a: f64, b: f64, tol: f64) -> Result<f64, FieldError> {
        adaptive_simpson(|s| self.integrand_at(s), a, b, tol)
    }

    fn node(&self, k: i64) -> Result<f64, FieldError> {
        let idx = k.unsigned_abs() as usize;
        {
            let table = self.cache.read().expect("antiderivative cache poisoned");
            let side = if k >= 0 { &table.forward } else { &table.backward };
            if let Some(v) = side.get(idx) {
                return Ok(*v);
            }
        }
        let mut table = self.cache.write().expect("antiderivative cache poisoned");
        let sign = if k >= 0 { 1.0 } else { -1.0 };
        let side = if k >= 0 {
            &mut table.forward
        } else {
            &mut table.backward
        };
        while side.len() <= idx {
            let j = side.len() as f64;
            let a = self.reference + sign * (j - 1.0) * NODE_SPACING;
            let b = self.reference + sign * j * NODE_SPACING;
            let panel = self.integrate(a, b, self.tolerance * NODE_SPACING)?;
            let last = *side.last().expect("table starts with the reference node");
            side.push(last + panel);
        }
        Ok(side[idx])
    }

    pub fn value(&self, s: f64) -> Result<f64, FieldError> {
        match self.kind {
            Kind::RawExponential => Ok(s.exp()),
            Kind::Quadrature => {
                let offset = (s - self.reference) / NODE_SPACING;
                let k = offset.round().clamp(-(MAX_NODES as f64), MAX_NODES as f64) as i64;
                let base = self.node(k)?;
                let start = self.reference + k as f64 * NODE_SPACING;
                Ok(base + self.integrate(start, s, self.tolerance)?)
            }
        }
    }

    /// Jet of the antiderivative composed with `s`.
    pub fn jet(&self, s: Jet2) -> Result<Jet2, FieldError> {
        let value = self.value(s.value)?;
        let local = Jet2::seed(Axis::First, (s.value, 0.0));
        let f = self
            .integrand
            .evaluate(&Bindings::new().with(Var::Lambda, local))?;
        Ok(s.chain(value, f.value, f.dt))
    }
}
