//! Conformal factors built from the constant-curvature solution families.
//!
//! * flat: `Ω = φ(x+t)·ψ(x−t)`, curvature 0;
//! * one-variable: `Ω(t)` and `Ω(x)` from the `tanh²` closed forms, taken on
//!   their real branches;
//! * general: `Ω = e^{φ(u)} e^{ψ(v)} (k F(u) − R/(8k) G(v) + C)^{-2}` with
//!   `F' = e^φ`, `G' = e^ψ`, `u = x+t`, `v = x−t`.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::charts::Domain;
use crate::expr::{Bindings, Expr, Function, Var};
use crate::field::{ExprField, FieldError, NullToStandard, Point, ScalarField};
use crate::jet::{Jet2, Scalar};
use crate::quadrature::{Antiderivative, DEFAULT_TOLERANCE};

/// `|D|` below this marks a point of the general family as singular.
pub const SINGULAR_EPS: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FactorError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("{family} branch with {param} = {value} and R = {r} gives a non-positive factor everywhere")]
    BranchYieldsNonPositive {
        family: &'static str,
        param: &'static str,
        value: f64,
        r: f64,
    },
    #[error("expression mixes standard (t, x) and null (u, v) variables")]
    MixedChartVariables,
    #[error("variable `{0}` cannot appear in a conformal factor")]
    UnexpectedVariable(Var),
    #[error("{which} must be a function of one variable, found {found}")]
    NotUnivariate { which: &'static str, found: String },
}

/// Which family built a factor, with its parameters.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum Provenance {
    Flat {
        phi: String,
        psi: String,
    },
    Timelike {
        c1: f64,
        c2: f64,
        #[serde(rename = "R")]
        r: f64,
    },
    Spacelike {
        d1: f64,
        d2: f64,
        #[serde(rename = "R")]
        r: f64,
    },
    Liouville {
        phi: String,
        psi: String,
        k: f64,
        #[serde(rename = "C")]
        c: f64,
        #[serde(rename = "R")]
        r: f64,
        raw_antiderivative: bool,
    },
    Explicit {
        omega_source: String,
    },
    Compactified(Box<Provenance>),
}

/// A positive scalar field `Ω` such that `g = Ω·η`.
#[derive(Clone)]
pub struct ConformalFactor {
    field: Arc<dyn ScalarField>,
    domain: Domain,
    provenance: Provenance,
    target_curvature: Option<f64>,
    closed_form: Option<Expr>,
    description: String,
}

impl fmt::Debug for ConformalFactor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ConformalFactor")
            .field("description", &self.description)
            .field("domain", &self.domain)
            .field("provenance", &self.provenance)
            .field("target_curvature", &self.target_curvature)
            .finish()
    }
}

impl ConformalFactor {
    pub fn new(
        field: Arc<dyn ScalarField>,
        domain: Domain,
        provenance: Provenance,
        target_curvature: Option<f64>,
        closed_form: Option<Expr>,
        description: String,
    ) -> Self {
        Self {
            field,
            domain,
            provenance,
            target_curvature,
            closed_form,
            description,
        }
    }

    fn from_expression(
        expr: Expr,
        domain: Domain,
        provenance: Provenance,
        target_curvature: Option<f64>,
    ) -> Self {
        let description = expr.to_string();
        Self::new(
            Arc::new(ExprField::standard(expr.clone())),
            domain,
            provenance,
            target_curvature,
            Some(expr),
            description,
        )
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn target_curvature(&self) -> Option<f64> {
        self.target_curvature
    }

    /// The factor as a formula in `(t, x)`, when one exists.
    pub fn closed_form(&self) -> Option<&Expr> {
        self.closed_form.as_ref()
    }

    /// Printable formula, or a descriptor for factors involving quadrature.
    pub fn description(&self) -> &str {
        &self.description
    }

    pub fn with_domain(mut self, domain: Domain) -> Self {
        self.domain = domain;
        self
    }

    fn check(&self, p: Point, value: f64) -> Result<(), FieldError> {
        if value <= 0.0 {
            return Err(FieldError::NonPositiveFactor { value, point: p });
        }
        Ok(())
    }
}

impl ScalarField for ConformalFactor {
    fn value_at(&self, p: Point) -> Result<f64, FieldError> {
        if !self.domain.contains(p) {
            return Err(FieldError::OutsideDomain { point: p });
        }
        let v = self.field.value_at(p)?;
        self.check(p, v)?;
        Ok(v)
    }

    fn jet_at(&self, p: Point) -> Result<Jet2, FieldError> {
        if !self.domain.contains(p) {
            return Err(FieldError::OutsideDomain { point: p });
        }
        let j = self.field.jet_at(p)?;
        self.check(p, j.value)?;
        Ok(j)
    }

    fn log_jet_with(&self, t: Jet2, x: Jet2) -> Option<Result<Jet2, FieldError>> {
        let p = (t.value, x.value);
        if !self.domain.contains(p) {
            return Some(Err(FieldError::OutsideDomain { point: p }));
        }
        self.field.log_jet_with(t, x)
    }
}

fn univariate(which: &'static str, e: &Expr) -> Result<Expr, FactorError> {
    match e.sole_variable() {
        Ok(None) => Ok(e.clone()),
        Ok(Some(v)) => Ok(e.substitute(v, &Expr::var(Var::Lambda))),
        Err(vars) => Err(FactorError::NotUnivariate {
            which,
            found: vars.iter().map(|v| v.name()).collect::<Vec<_>>().join(", "),
        }),
    }
}

fn null_u() -> Expr {
    Expr::var(Var::X).add(Expr::var(Var::T))
}

fn null_v() -> Expr {
    Expr::var(Var::X).sub(Expr::var(Var::T))
}

/// Flat factor `Ω(t, x) = φ(x+t)·ψ(x−t)`.
pub fn flat_factor(phi: &Expr, psi: &Expr) -> Result<ConformalFactor, FactorError> {
    let phi_l = univariate("phi", phi)?;
    let psi_l = univariate("psi", psi)?;
    let expr = phi_l
        .substitute(Var::Lambda, &null_u())
        .mul(psi_l.substitute(Var::Lambda, &null_v()));
    Ok(ConformalFactor::from_expression(
        expr,
        Domain::plane(),
        Provenance::Flat {
            phi: phi.to_string(),
            psi: psi.to_string(),
        },
        Some(0.0),
    ))
}

fn check_nonzero(name: &str, v: f64) -> Result<(), FactorError> {
    if v == 0.0 || !v.is_finite() {
        return Err(FactorError::InvalidParameter(format!(
            "{name} must be finite and non-zero, got {v}"
        )));
    }
    Ok(())
}

fn check_finite(name: &str, v: f64) -> Result<(), FactorError> {
    if !v.is_finite() {
        return Err(FactorError::InvalidParameter(format!("{name} must be finite, got {v}")));
    }
    Ok(())
}

/// Shared construction for `A·f(B·(s + shift))²`, `f ∈ {sec, sech}`.
/// Returns the expression and the interval of `s` on which it is defined.
fn one_variable(var: Var, amplitude: f64, rate: f64, shift: f64, f: Function) -> (Expr, (f64, f64)) {
    let arg = Expr::constant(rate).mul(Expr::var(var).add(Expr::constant(shift)));
    let expr = Expr::constant(amplitude).mul(arg.apply(f).pow(2.0));
    let range = match f {
        Function::Sec => (-shift - FRAC_PI_2 / rate, -shift + FRAC_PI_2 / rate),
        _ => (f64::NEG_INFINITY, f64::INFINITY),
    };
    (expr, range)
}

/// Space-independent factor
/// `Ω(t) = c₁(−1 + tanh²(½√(c₁(t+c₂)²)))/(2R)` on its real branch:
/// `−(c₁/2R)·sech²(½√c₁ (t+c₂))` for `c₁ > 0`, and, via
/// `tanh(iθ) = i·tan θ`, `−(c₁/2R)·sec²(½√|c₁| (t+c₂))` for `c₁ < 0`.
///
/// The `sec` branch is restricted to the strip around `t = −c₂` between
/// consecutive poles.
pub fn timelike_factor(c1: f64, c2: f64, r: f64) -> Result<ConformalFactor, FactorError> {
    check_nonzero("c1", c1)?;
    check_nonzero("R", r)?;
    check_finite("c2", c2)?;
    let amplitude = -c1 / (2.0 * r);
    if amplitude <= 0.0 {
        return Err(FactorError::BranchYieldsNonPositive {
            family: "timelike",
            param: "c1",
            value: c1,
            r,
        });
    }
    let f = if c1 > 0.0 { Function::Sech } else { Function::Sec };
    let (expr, range) = one_variable(Var::T, amplitude, 0.5 * c1.abs().sqrt(), c2, f);
    let domain = Domain::rectangle(range, (f64::NEG_INFINITY, f64::INFINITY));
    Ok(ConformalFactor::from_expression(
        expr,
        domain,
        Provenance::Timelike { c1, c2, r },
        Some(r),
    ))
}

/// Time-independent factor `Ω(x) = d₁(1 − tanh²(½√(d₁(x+d₂)²)))/(2R)`:
/// `(d₁/2R)·sech²` for `d₁ > 0` and `(d₁/2R)·sec²` for `d₁ < 0`.
pub fn spacelike_factor(d1: f64, d2: f64, r: f64) -> Result<ConformalFactor, FactorError> {
    check_nonzero("d1", d1)?;
    check_nonzero("R", r)?;
    check_finite("d2", d2)?;
    let amplitude = d1 / (2.0 * r);
    if amplitude <= 0.0 {
        return Err(FactorError::BranchYieldsNonPositive {
            family: "spacelike",
            param: "d1",
            value: d1,
            r,
        });
    }
    let f = if d1 > 0.0 { Function::Sech } else { Function::Sec };
    let (expr, range) = one_variable(Var::X, amplitude, 0.5 * d1.abs().sqrt(), d2, f);
    let domain = Domain::rectangle((f64::NEG_INFINITY, f64::INFINITY), range);
    Ok(ConformalFactor::from_expression(
        expr,
        domain,
        Provenance::Spacelike { d1, d2, r },
        Some(r),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LiouvilleOptions {
    /// Use `F(s) = e^s` for an `e^λ` integrand instead of `e^s − 1`.
    pub raw_antiderivative: bool,
    pub tolerance: f64,
    pub singular_eps: f64,
}

impl Default for LiouvilleOptions {
    fn default() -> Self {
        Self {
            raw_antiderivative: false,
            tolerance: DEFAULT_TOLERANCE,
            singular_eps: SINGULAR_EPS,
        }
    }
}

/// Field of the general solution. `phi` and `psi` are expressions in `l`.
#[derive(Debug)]
pub struct LiouvilleField {
    phi: Expr,
    psi: Expr,
    k: f64,
    c: f64,
    r: f64,
    f: Antiderivative,
    g: Antiderivative,
    singular_eps: f64,
}

impl LiouvilleField {
    fn assemble<S: Scalar>(&self, u: S, v: S, fu: S, gv: S, p: Point) -> Result<S, FieldError> {
        let phi = self.phi.evaluate(&Bindings::new().with(Var::Lambda, u))?;
        let psi = self.psi.evaluate(&Bindings::new().with(Var::Lambda, v))?;
        let d = fu.scale_by(self.k) - gv.scale_by(self.r / (8.0 * self.k)) + S::from_f64(self.c);
        if d.value().abs() < self.singular_eps {
            return Err(FieldError::SingularDenominator {
                denominator: d.value(),
                point: p,
            });
        }
        let to_field = |e| {
            FieldError::Eval(crate::expr::EvalError::Domain {
                node: "liouville factor".into(),
                point: format!("({}, {})", p.0, p.1),
                source: e,
            })
        };
        let e_phi = phi.try_apply(Function::Exp).map_err(to_field)?;
        let e_psi = psi.try_apply(Function::Exp).map_err(to_field)?;
        let out = e_phi * e_psi * d.try_powi(-2).map_err(to_field)?;
        if !out.all_finite() {
            return Err(FieldError::Eval(crate::expr::EvalError::NonFinite {
                node: "liouville factor".into(),
                point: format!("({}, {})", p.0, p.1),
            }));
        }
        Ok(out)
    }

    /// `ω = φ(u) + ψ(v) − 2 ln |D|`.
    fn log_assemble(&self, t: Jet2, x: Jet2) -> Result<Jet2, FieldError> {
        let p = (t.value, x.value);
        let (u, v) = (x + t, x - t);
        let phi = self.phi.evaluate(&Bindings::new().with(Var::Lambda, u))?;
        let psi = self.psi.evaluate(&Bindings::new().with(Var::Lambda, v))?;
        let d = self.f.jet(u)?.scale(self.k) - self.g.jet(v)?.scale(self.r / (8.0 * self.k))
            + Jet2::constant(self.c);
        let dv = d.value;
        if dv.abs() < self.singular_eps {
            return Err(FieldError::SingularDenominator {
                denominator: dv,
                point: p,
            });
        }
        let out = phi + psi - d.chain(dv.abs().ln(), 1.0 / dv, -1.0 / (dv * dv)).scale(2.0);
        if !out.is_finite() {
            return Err(FieldError::Eval(crate::expr::EvalError::NonFinite {
                node: "liouville factor".into(),
                point: format!("({}, {})", p.0, p.1),
            }));
        }
        Ok(out)
    }

    /// The denominator `D = k F(u) − R/(8k) G(v) + C` at a standard point.
    pub fn denominator(&self, (t, x): Point) -> Result<f64, FieldError> {
        let (u, v) = (x + t, x - t);
        Ok(self.k * self.f.value(u)? - self.r / (8.0 * self.k) * self.g.value(v)? + self.c)
    }
}

trait ScaleBy {
    fn scale_by(self, k: f64) -> Self;
}

impl<S: Scalar> ScaleBy for S {
    fn scale_by(self, k: f64) -> Self {
        S::from_f64(k) * self
    }
}

impl ScalarField for LiouvilleField {
    fn value_at(&self, p: Point) -> Result<f64, FieldError> {
        let (t, x) = p;
        let (u, v) = (x + t, x - t);
        let fu = self.f.value(u)?;
        let gv = self.g.value(v)?;
        self.assemble(u, v, fu, gv, p)
    }

    fn jet_at(&self, p: Point) -> Result<Jet2, FieldError> {
        let (t, x) = Jet2::seeds(p);
        let (u, v) = (x + t, x - t);
        let fu = self.f.jet(u)?;
        let gv = self.g.jet(v)?;
        self.assemble(u, v, fu, gv, p)
    }

    fn log_jet_with(&self, t: Jet2, x: Jet2) -> Option<Result<Jet2, FieldError>> {
        Some(self.log_assemble(t, x))
    }
}

/// General constant-curvature factor
/// `Ω = e^{φ(x+t)} e^{ψ(x−t)} (k F(x+t) − R/(8k) G(x−t) + C)^{-2}`.
///
/// `F` and `G` are antiderivatives of `e^φ` and `e^ψ` anchored at 0, so
/// their constants are absorbed into `C`. With `raw_antiderivative` an
/// integrand that is exactly `e^λ` integrates to `e^s` instead.
pub fn liouville_factor(
    phi: &Expr,
    psi: &Expr,
    k: f64,
    c: f64,
    r: f64,
    options: LiouvilleOptions,
) -> Result<ConformalFactor, FactorError> {
    check_nonzero("k", k)?;
    check_finite("C", c)?;
    check_finite("R", r)?;
    if !(options.tolerance > 0.0) {
        return Err(FactorError::InvalidParameter(format!(
            "quadrature tolerance must be positive, got {}",
            options.tolerance
        )));
    }
    let phi_l = univariate("phi", phi)?;
    let psi_l = univariate("psi", psi)?;
    let lambda = Expr::var(Var::Lambda);
    let antiderivative = |e: &Expr| {
        if options.raw_antiderivative && *e == lambda {
            Antiderivative::raw_exponential()
        } else {
            Antiderivative::new(e.clone().apply(Function::Exp), 0.0, options.tolerance)
        }
    };
    let f = antiderivative(&phi_l);
    let g = antiderivative(&psi_l);

    let closed_form = (f.is_raw() && g.is_raw()).then(|| {
        let u = null_u();
        let v = null_v();
        let mut d = Expr::constant(k).mul(u.clone().apply(Function::Exp));
        if r != 0.0 {
            d = d.sub(Expr::constant(r / (8.0 * k)).mul(v.clone().apply(Function::Exp)));
        }
        let d = d.add(Expr::constant(c));
        phi_l
            .substitute(Var::Lambda, &u)
            .apply(Function::Exp)
            .mul(psi_l.substitute(Var::Lambda, &v).apply(Function::Exp))
            .mul(d.pow(-2.0))
    });
    let description = match &closed_form {
        Some(e) => e.to_string(),
        None => format!(
            "exp(phi(x + t)) * exp(psi(x - t)) * (k*F(x + t) - R/(8*k)*G(x - t) + C)^-2 \
             with phi(l) = {phi_l}, psi(l) = {psi_l}, k = {k}, C = {c}, R = {r}, \
             F(s) = {}, G(s) = {}",
            describe_antiderivative(&f, "phi"),
            describe_antiderivative(&g, "psi"),
        ),
    };
    let field = LiouvilleField {
        phi: phi_l,
        psi: psi_l,
        k,
        c,
        r,
        f,
        g,
        singular_eps: options.singular_eps,
    };
    Ok(ConformalFactor::new(
        Arc::new(field),
        Domain::plane(),
        Provenance::Liouville {
            phi: phi.to_string(),
            psi: psi.to_string(),
            k,
            c,
            r,
            raw_antiderivative: options.raw_antiderivative,
        },
        Some(r),
        closed_form,
        description,
    ))
}

fn describe_antiderivative(a: &Antiderivative, name: &str) -> String {
    if a.is_raw() {
        "exp(s)".to_string()
    } else {
        format!("int_0^s exp({name}(l)) dl")
    }
}

/// Wraps a user-supplied `Ω` over `(t, x)` or `(u, v)`.
pub fn factor_from_expression(
    source: &Expr,
    claimed_r: Option<f64>,
) -> Result<ConformalFactor, FactorError> {
    let vars = source.free_variables();
    if vars.contains(&Var::Lambda) {
        return Err(FactorError::UnexpectedVariable(Var::Lambda));
    }
    let standard = vars.contains(&Var::T) || vars.contains(&Var::X);
    let null = vars.contains(&Var::U) || vars.contains(&Var::V);
    let provenance = Provenance::Explicit {
        omega_source: source.to_string(),
    };
    match (standard, null) {
        (true, true) => Err(FactorError::MixedChartVariables),
        (_, false) => Ok(ConformalFactor::from_expression(
            source.clone(),
            Domain::plane(),
            provenance,
            claimed_r,
        )),
        (false, true) => {
            let closed = source
                .substitute(Var::U, &null_u())
                .substitute(Var::V, &null_v());
            Ok(ConformalFactor::new(
                Arc::new(NullToStandard(ExprField::null(source.clone()))),
                Domain::plane(),
                provenance,
                claimed_r,
                Some(closed),
                source.to_string(),
            ))
        }
    }
}
