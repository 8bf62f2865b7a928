//! Domains, coordinate charts and the Penrose-Carter compactification.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use thiserror::Error;

use crate::expr::{Expr, Function, Var};
use crate::families::{ConformalFactor, Provenance};
use crate::field::{FieldError, Point, ScalarField};
use crate::jet::Jet2;

/// Relative margin inside which a point counts as on the diamond's edge.
pub const DIAMOND_EDGE_MARGIN: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChartError {
    #[error("invalid domain `{0}`: expected `rect:t0,t1,x0,x1` or `diamond[:half_width]`")]
    BadDomainSpec(String),
    #[error("factor is only defined on {0}; compactification needs it on the whole plane")]
    NotGloballyDefined(String),
}

pub type Interval = (f64, f64);

/// An open region of the coordinate plane.
#[derive(Clone)]
pub enum Domain {
    Rectangle { t: Interval, x: Interval },
    /// `|x| < w`, `|t| < w - |x|`.
    Diamond { half_width: f64 },
    Predicate {
        bounds: (Interval, Interval),
        label: String,
        test: Arc<dyn Fn(Point) -> bool + Send + Sync>,
    },
}

impl Domain {
    pub fn plane() -> Self {
        Domain::Rectangle {
            t: (f64::NEG_INFINITY, f64::INFINITY),
            x: (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    pub fn rectangle(t: Interval, x: Interval) -> Self {
        Domain::Rectangle { t, x }
    }

    /// The Penrose diamond `|x| + |t| < π`.
    pub fn diamond() -> Self {
        Domain::Diamond { half_width: PI }
    }

    pub fn contains(&self, (t, x): Point) -> bool {
        match self {
            Domain::Rectangle { t: tr, x: xr } => tr.0 < t && t < tr.1 && xr.0 < x && x < xr.1,
            // points within rounding of the edge count as on it: grids with an
            // even cell count place centers exactly on the null boundary
            Domain::Diamond { half_width } => {
                t.abs() + x.abs() < half_width * (1.0 - DIAMOND_EDGE_MARGIN)
            }
            Domain::Predicate { bounds, test, .. } => {
                let (tr, xr) = bounds;
                tr.0 < t && t < tr.1 && xr.0 < x && x < xr.1 && test((t, x))
            }
        }
    }

    /// `(t-range, x-range)` enclosing the domain.
    pub fn bounds(&self) -> (Interval, Interval) {
        match self {
            Domain::Rectangle { t, x } => (*t, *x),
            Domain::Diamond { half_width: w } => ((-w, *w), (-w, *w)),
            Domain::Predicate { bounds, .. } => *bounds,
        }
    }

    pub fn is_bounded(&self) -> bool {
        let (t, x) = self.bounds();
        [t.0, t.1, x.0, x.1].iter().all(|v| v.is_finite())
    }

    pub fn is_plane(&self) -> bool {
        matches!(self, Domain::Rectangle { t, x }
            if t.0 == f64::NEG_INFINITY && t.1 == f64::INFINITY
                && x.0 == f64::NEG_INFINITY && x.1 == f64::INFINITY)
    }
}

impl fmt::Debug for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            d if d.is_plane() => f.write_str("plane"),
            Domain::Rectangle { t, x } => write!(f, "rect:{},{},{},{}", t.0, t.1, x.0, x.1),
            Domain::Diamond { half_width } if *half_width == PI => f.write_str("diamond"),
            Domain::Diamond { half_width } => write!(f, "diamond:{half_width}"),
            Domain::Predicate { label, .. } => write!(f, "predicate:{label}"),
        }
    }
}

impl FromStr for Domain {
    type Err = ChartError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ChartError::BadDomainSpec(s.to_string());
        let s = s.trim();
        if s == "diamond" {
            return Ok(Domain::diamond());
        }
        if s == "plane" {
            return Ok(Domain::plane());
        }
        if let Some(rest) = s.strip_prefix("diamond:") {
            let w: f64 = rest.trim().parse().map_err(|_| bad())?;
            if !(w > 0.0 && w.is_finite()) {
                return Err(bad());
            }
            return Ok(Domain::Diamond { half_width: w });
        }
        if let Some(rest) = s.strip_prefix("rect:") {
            let v: Vec<f64> = rest
                .split(',')
                .map(|p| p.trim().parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|_| bad())?;
            if v.len() != 4 || !(v[0] < v[1] && v[2] < v[3]) {
                return Err(bad());
            }
            return Ok(Domain::rectangle((v[0], v[1]), (v[2], v[3])));
        }
        Err(bad())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Chart {
    /// `(t, x)`
    Standard,
    /// `(u, v) = (x + t, x - t)`
    Null,
    /// `(t̃, x̃)` with `tan((x̃ ± t̃)/2)` the null coordinates.
    Compact,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChartPoint {
    pub chart: Chart,
    pub coords: Point,
}

pub fn to_null((t, x): Point) -> Point {
    (x + t, x - t)
}

pub fn from_null((u, v): Point) -> Point {
    (0.5 * (u - v), 0.5 * (u + v))
}

impl ChartPoint {
    pub fn standard(p: Point) -> Self {
        Self {
            chart: Chart::Standard,
            coords: p,
        }
    }

    pub fn to(self, chart: Chart) -> Self {
        let standard = match self.chart {
            Chart::Standard => self.coords,
            Chart::Null => from_null(self.coords),
            Chart::Compact => {
                let (cu, cv) = to_null(self.coords);
                from_null(((0.5 * cu).tan(), (0.5 * cv).tan()))
            }
        };
        let coords = match chart {
            Chart::Standard => standard,
            Chart::Null => to_null(standard),
            Chart::Compact => {
                let (u, v) = to_null(standard);
                from_null((2.0 * u.atan(), 2.0 * v.atan()))
            }
        };
        Self { chart, coords }
    }
}

/// Maps a point of the compact chart to the standard chart it covers.
pub fn decompactify(p: Point) -> Point {
    ChartPoint {
        chart: Chart::Compact,
        coords: p,
    }
    .to(Chart::Standard)
    .coords
}

/// Pullback of a plane factor to the diamond:
/// `Ω_c = Ω(map(p)) · ¼ sec²(ũ/2) sec²(ṽ/2)`.
struct Compactified {
    inner: ConformalFactor,
}

impl ScalarField for Compactified {
    fn value_at(&self, (t, x): Point) -> Result<f64, FieldError> {
        let hu = 0.5 * (x + t);
        let hv = 0.5 * (x - t);
        let (u, v) = (hu.tan(), hv.tan());
        let inner = self.inner.value_at(from_null((u, v)))?;
        let (su, sv) = (1.0 / hu.cos(), 1.0 / hv.cos());
        Ok(inner * (0.25 * (su * su * sv * sv)))
    }

    fn jet_at(&self, p: Point) -> Result<Jet2, FieldError> {
        let (t, x) = Jet2::seeds(p);
        let hu = (x + t).scale(0.5);
        let hv = (x - t).scale(0.5);
        let domain = |e| FieldError::Eval(crate::expr::EvalError::Domain {
            node: "compactification".into(),
            point: format!("({}, {})", p.0, p.1),
            source: e,
        });
        let u = hu.apply(Function::Tan).map_err(domain)?;
        let v = hv.apply(Function::Tan).map_err(domain)?;
        let big_t = (u - v).scale(0.5);
        let big_x = (u + v).scale(0.5);
        let inner = self.inner.jet_at((big_t.value, big_x.value))?;
        let pulled = inner.compose(big_t, big_x);
        let su = hu.apply(Function::Sec).map_err(domain)?;
        let sv = hv.apply(Function::Sec).map_err(domain)?;
        Ok(pulled * (su * su * sv * sv).scale(0.25))
    }

    fn log_jet_with(&self, t: Jet2, x: Jet2) -> Option<Result<Jet2, FieldError>> {
        let hu = (x + t).scale(0.5);
        let hv = (x - t).scale(0.5);
        let point = format!("({}, {})", t.value, x.value);
        let domain = |e| {
            FieldError::Eval(crate::expr::EvalError::Domain {
                node: "compactification".into(),
                point: point.clone(),
                source: e,
            })
        };
        let (u, v) = match (hu.apply(Function::Tan), hv.apply(Function::Tan)) {
            (Ok(u), Ok(v)) => (u, v),
            (Err(e), _) | (_, Err(e)) => return Some(Err(domain(e))),
        };
        let inner = self
            .inner
            .log_jet_with((u - v).scale(0.5), (u + v).scale(0.5))?;
        // ln(¼ sec² hu sec² hv) = ln ¼ − 2 ln|cos hu| − 2 ln|cos hv|
        let log_cos = |h: Jet2| {
            let (c, s) = (h.value.cos(), h.value.sin());
            h.chain(c.abs().ln(), -s / c, -1.0 / (c * c))
        };
        Some(inner.map(|w| {
            w + Jet2::constant(0.25f64.ln()) - (log_cos(hu) + log_cos(hv)).scale(2.0)
        }))
    }
}

fn compactify_expression(e: &Expr) -> Expr {
    let u = Expr::var(Var::U);
    let v = Expr::var(Var::V);
    let in_null = e
        .substitute(Var::T, &u.clone().sub(v.clone()).div(Expr::constant(2.0)))
        .substitute(Var::X, &u.add(v).div(Expr::constant(2.0)));
    let t = Expr::var(Var::T);
    let x = Expr::var(Var::X);
    let half_u = x.clone().add(t.clone()).div(Expr::constant(2.0));
    let half_v = x.sub(t).div(Expr::constant(2.0));
    let pulled = in_null
        .substitute(Var::U, &half_u.clone().apply(Function::Tan))
        .substitute(Var::V, &half_v.clone().apply(Function::Tan));
    let jacobian = Expr::constant(0.25)
        .mul(half_u.apply(Function::Sec).pow(2.0))
        .mul(half_v.apply(Function::Sec).pow(2.0));
    pulled.mul(jacobian)
}

/// Penrose-Carter compactification of a factor defined on the whole plane.
pub fn compactify(factor: &ConformalFactor) -> Result<ConformalFactor, ChartError> {
    if !factor.domain().is_plane() {
        return Err(ChartError::NotGloballyDefined(factor.domain().to_string()));
    }
    let closed_form = factor.closed_form().map(compactify_expression);
    let description = match &closed_form {
        Some(e) => e.to_string(),
        None => format!("compactification of [{}]", factor.description()),
    };
    Ok(ConformalFactor::new(
        Arc::new(Compactified {
            inner: factor.clone(),
        }),
        Domain::diamond(),
        Provenance::Compactified(Box::new(factor.provenance().clone())),
        factor.target_curvature(),
        closed_form,
        description,
    ))
}

/// Spacetime interval `s² = Ω(t, x)·(x² - t²)` in the factor's own chart.
pub fn interval_field<F: ScalarField + ?Sized>(factor: &F, (t, x): Point) -> Result<f64, FieldError> {
    Ok(factor.value_at((t, x))? * (x * x - t * t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use crate::families::factor_from_expression;

    #[test]
    fn null_conversions() {
        assert_eq!(to_null((0.0, 0.0)), (0.0, 0.0));
        assert_eq!(to_null((1.0, 2.0)), (3.0, 1.0));
        assert_eq!(from_null((3.0, 1.0)), (1.0, 2.0));
    }

    #[test]
    fn chart_points_round_trip() {
        let p = ChartPoint::standard((0.3, -1.7));
        for chart in [Chart::Null, Chart::Compact] {
            let back = p.to(chart).to(Chart::Standard);
            assert!((back.coords.0 - 0.3).abs() < 1e-12 && (back.coords.1 + 1.7).abs() < 1e-12);
        }
        let c = p.to(Chart::Compact).coords;
        assert!(Domain::diamond().contains(c));
    }

    #[test]
    fn domain_membership() {
        let d = Domain::diamond();
        assert!(d.contains((0.0, 0.0)));
        assert!(d.contains((1.0, 2.0)));
        assert!(!d.contains((1.2, 2.0)));
        assert!(!d.contains((0.0, PI)));
        let r: Domain = "rect:-1.4,1.4,0,6".parse().unwrap();
        assert!(r.contains((0.0, 3.0)));
        assert!(!r.contains((0.0, 0.0)));
        assert!(Domain::plane().is_plane());
        assert!(!Domain::plane().is_bounded());
        assert!("rect:1,0,0,1".parse::<Domain>().is_err());
        assert!("circle".parse::<Domain>().is_err());
        assert_eq!("diamond:2".parse::<Domain>().unwrap().to_string(), "diamond:2");
    }

    #[test]
    fn minkowski_compactifies_to_penrose_factor() {
        let one = factor_from_expression(&parse("1").unwrap(), None).unwrap();
        let c = compactify(&one).unwrap();
        for p in [(0.0f64, 0.0f64), (0.5, 1.1), (-2.0, 0.9), (0.1, -2.5)] {
            let expect = (p.0.cos() + p.1.cos()).powi(-2);
            let got = c.value_at(p).unwrap();
            assert!((got - expect).abs() < 1e-12 * expect.max(1.0), "{p:?}");
            let jet = c.jet_at(p).unwrap();
            assert_eq!(jet.value, got);
        }
        let closed = ConformalFactor::closed_form(&c).unwrap().clone();
        let e = crate::field::ExprField::standard(closed);
        assert!((e.value_at((0.5, 1.1)).unwrap() - c.value_at((0.5, 1.1)).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn compactification_needs_global_factor() {
        let ds = crate::families::timelike_factor(-4.0, 0.0, 2.0).unwrap();
        assert!(matches!(compactify(&ds), Err(ChartError::NotGloballyDefined(_))));
    }

    #[test]
    fn interval_examples() {
        let one = factor_from_expression(&parse("1").unwrap(), None).unwrap();
        assert_eq!(interval_field(&one, (0.0, 2.0)).unwrap(), 4.0);
        assert_eq!(interval_field(&one, (1.0, 1.0)).unwrap(), 0.0);
        let penrose = compactify(&one).unwrap();
        let x: f64 = 2.0;
        let expect = x * x / (1.0 + x.cos()).powi(2);
        assert!((interval_field(&penrose, (0.0, x)).unwrap() - expect).abs() < 1e-12 * expect);
    }
}
