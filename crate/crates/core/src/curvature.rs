//! Scalar and Ricci curvature of `g = Ω·η`, `η = diag(-1, 1)`.
//!
//! With `Ω = e^ω` the scalar curvature is
//!
//! ```text
//! R = [-(Ω_t)² + (Ω_x)² + Ω (Ω_tt - Ω_xx)] / Ω³ = (ω_tt - ω_xx) e^{-ω}
//! ```
//!
//! and in null coordinates `u = x + t`, `v = x - t` the wave operator becomes
//! `-4 ∂_u ∂_v`. Under this convention de Sitter space (`Ω = sec² t`) has
//! `R = +2`. The finite-difference oracle at the bottom shares no code with
//! the jet path and exists to cross-check it.

use thiserror::Error;

use crate::field::{FieldError, LogField, Point, ScalarField};
use crate::jet::Jet2;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CurvatureError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("finite-difference stencil point ({}, {}) failed: {source}", .point.0, .point.1)]
    StencilOutsideDomain {
        point: Point,
        #[source]
        source: FieldError,
    },
}

/// Components of the Ricci tensor in the chart of the evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RicciTensor2 {
    pub component_tt: f64,
    pub component_tx: f64,
    pub component_xx: f64,
}

/// Result of checking `Ric = κ g` at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EinsteinCheck {
    pub kappa: f64,
    pub residual: f64,
}

/// Scalar curvature from the jet of `Ω` at a point.
pub fn ricci_from_jet(omega: &Jet2, point: Point) -> Result<f64, FieldError> {
    let w = omega.value;
    if w <= 0.0 {
        return Err(FieldError::NonPositiveFactor { value: w, point });
    }
    let numerator = -omega.dt * omega.dt + omega.dx * omega.dx + w * (omega.dtt - omega.dxx);
    Ok(numerator / (w * w * w))
}

/// Scalar curvature of `Ω·η` at `point`, from one jet evaluation of `Ω`.
pub fn ricci_from_omega<F: ScalarField + ?Sized>(
    factor: &F,
    point: Point,
) -> Result<f64, CurvatureError> {
    let jet = factor.jet_at(point)?;
    Ok(ricci_from_jet(&jet, point)?)
}

/// Jets of `t = (u − v)/2` and `x = (u + v)/2` over the null coordinates,
/// with values exactly `point`.
pub fn null_seeds((t, x): Point) -> (Jet2, Jet2) {
    (
        Jet2 {
            value: t,
            dt: 0.5,
            dx: -0.5,
            ..Jet2::constant(0.0)
        },
        Jet2 {
            value: x,
            dt: 0.5,
            dx: 0.5,
            ..Jet2::constant(0.0)
        },
    )
}

/// `R = −4 e^{−ω} ω_uv` from the field's logarithmic jet over null
/// coordinates, if the field provides one. Separable factors then drop out
/// of `ω_uv` exactly instead of cancelling in `Ω_tt − Ω_xx`.
pub fn ricci_from_log_null<F: ScalarField + ?Sized>(
    factor: &F,
    point: Point,
) -> Option<Result<f64, FieldError>> {
    let (t, x) = null_seeds(point);
    let w = factor.log_jet_with(t, x)?;
    // `+ 0.0` turns the −0 of flat factors into 0
    Some(w.map(|w| -4.0 * (-w.value).exp() * w.dtx + 0.0))
}

/// Scalar curvature at `point`, given the already computed jet of `Ω` there:
/// the log-null formula when available and finite, the `Ω`-jet formula
/// otherwise.
pub fn ricci_scalar_with_jet<F: ScalarField + ?Sized>(
    factor: &F,
    omega: &Jet2,
    point: Point,
) -> Result<f64, FieldError> {
    match ricci_from_log_null(factor, point) {
        Some(Ok(r)) if r.is_finite() => Ok(r),
        _ => ricci_from_jet(omega, point),
    }
}

/// Best available scalar curvature at `point`.
pub fn ricci_scalar<F: ScalarField + ?Sized>(factor: &F, point: Point) -> Result<f64, FieldError> {
    let jet = factor.jet_at(point)?;
    ricci_scalar_with_jet(factor, &jet, point)
}

/// Scalar curvature of `e^ω·η`, with `log_factor` supplying `ω`.
pub fn ricci_from_log<F: ScalarField + ?Sized>(
    log_factor: &F,
    point: Point,
) -> Result<f64, CurvatureError> {
    let w = log_factor.jet_at(point)?;
    Ok(ricci_from_log_jet(&w))
}

pub fn ricci_from_log_jet(w: &Jet2) -> f64 {
    (w.dtt - w.dxx) * (-w.value).exp()
}

/// Scalar curvature of `e^ω du dv` with `ω` given over `(u, v)`.
pub fn ricci_null<F: ScalarField + ?Sized>(
    log_factor: &F,
    point: Point,
) -> Result<f64, CurvatureError> {
    let w = log_factor.jet_at(point)?;
    Ok(-4.0 * (-w.value).exp() * w.dtx)
}

const ETA: [[f64; 2]; 2] = [[-1.0, 0.0], [0.0, 1.0]];
/// `du dv` over `(u, v)`, and its inverse.
const NULL_METRIC: [[f64; 2]; 2] = [[0.0, 0.5], [0.5, 0.0]];
const NULL_INVERSE: [[f64; 2]; 2] = [[0.0, 2.0], [2.0, 0.0]];

fn delta(i: usize, j: usize) -> f64 {
    if i == j {
        1.0
    } else {
        0.0
    }
}

/// Ricci tensor of `e^ω·h` for a constant metric `h` (inverse `hi`), with
/// `w` the jet of `ω` over the chart of `h`.
///
/// The Christoffel symbols of a conformally flat metric are
/// `Γᵏᵢⱼ = ½(δᵏᵢ ω_j + δᵏⱼ ω_i - h_ij hᵏˡ ω_l)`, and
/// `Ric_ij = ∂_k Γᵏᵢⱼ - ∂_j Γᵏₖᵢ + Γᵏₖₗ Γˡᵢⱼ - Γᵏⱼₗ Γˡₖᵢ`.
fn ricci_components(w: &Jet2, h: &[[f64; 2]; 2], hi: &[[f64; 2]; 2]) -> [[f64; 2]; 2] {
    let grad = [w.dt, w.dx];
    let hess = [[w.dtt, w.dtx], [w.dtx, w.dxx]];
    let raised = |k: usize, v: &[f64; 2]| hi[k][0] * v[0] + hi[k][1] * v[1];
    let gamma = |k: usize, i: usize, j: usize| {
        0.5 * (delta(k, i) * grad[j] + delta(k, j) * grad[i] - h[i][j] * raised(k, &grad))
    };
    // ∂_m Γᵏᵢⱼ
    let dgamma = |m: usize, k: usize, i: usize, j: usize| {
        let col = [hess[0][m], hess[1][m]];
        0.5 * (delta(k, i) * hess[j][m] + delta(k, j) * hess[i][m] - h[i][j] * raised(k, &col))
    };
    let ric = |i: usize, j: usize| {
        let mut r = 0.0;
        for k in 0..2 {
            r += dgamma(k, k, i, j) - dgamma(j, k, k, i);
            for l in 0..2 {
                r += gamma(k, k, l) * gamma(l, i, j) - gamma(k, j, l) * gamma(l, k, i);
            }
        }
        r
    };
    [[ric(0, 0), ric(0, 1)], [ric(1, 0), ric(1, 1)]]
}

/// Ricci tensor of `e^ω·η` computed from the Levi-Civita connection.
pub fn ricci_tensor_from_log_jet(w: &Jet2) -> RicciTensor2 {
    let r = ricci_components(w, &ETA, &ETA);
    RicciTensor2 {
        component_tt: r[0][0],
        component_tx: r[0][1],
        component_xx: r[1][1],
    }
}

/// Einstein check from the jet of `ω` over null coordinates `(u, v)`, with
/// `Ric − κ g` computed there and reported in `(t, x)` components.
pub fn einstein_from_log_null_jet(w: &Jet2) -> EinsteinCheck {
    let g = w.value.exp();
    let kappa = -2.0 * (-w.value).exp() * w.dtx + 0.0;
    let ric = ricci_components(w, &NULL_METRIC, &NULL_INVERSE);
    let d = |i: usize, j: usize| ric[i][j] - kappa * g * NULL_METRIC[i][j];
    // ∂u/∂t = −∂v/∂t = 1, ∂u/∂x = ∂v/∂x = 1
    let tt = d(0, 0) - d(0, 1) - d(1, 0) + d(1, 1);
    let tx = d(0, 0) + d(0, 1) - d(1, 0) - d(1, 1);
    let xx = d(0, 0) + d(0, 1) + d(1, 0) + d(1, 1);
    EinsteinCheck {
        kappa,
        residual: tt.abs().max(tx.abs()).max(xx.abs()),
    }
}

/// Ricci tensor of `e^ω·η` at `point`.
pub fn ricci_tensor<F: ScalarField + ?Sized>(
    log_factor: &F,
    point: Point,
) -> Result<RicciTensor2, CurvatureError> {
    let w = log_factor.jet_at(point)?;
    Ok(ricci_tensor_from_log_jet(&w))
}

pub fn einstein_from_log_jet(w: &Jet2) -> EinsteinCheck {
    let kappa = 0.5 * ricci_from_log_jet(w);
    let ric = ricci_tensor_from_log_jet(w);
    let g = w.value.exp();
    let residual = (ric.component_tt + kappa * g)
        .abs()
        .max(ric.component_tx.abs())
        .max((ric.component_xx - kappa * g).abs());
    EinsteinCheck { kappa, residual }
}

/// `κ = R/2` and the largest component of `|Ric - κ g|`.
pub fn einstein_residual<F: ScalarField + ?Sized>(
    log_factor: &F,
    point: Point,
) -> Result<EinsteinCheck, CurvatureError> {
    let w = log_factor.jet_at(point)?;
    Ok(einstein_from_log_jet(&w))
}

/// Einstein check for a factor given as `Ω` rather than `ω`. Uses the
/// field's own logarithmic jet over null coordinates when it has one.
pub fn einstein_residual_of_factor<F: ScalarField + ?Sized>(
    factor: &F,
    point: Point,
) -> Result<EinsteinCheck, CurvatureError> {
    let (u, v) = null_seeds(point);
    if let Some(Ok(w)) = factor.log_jet_with(u, v) {
        if w.is_finite() {
            return Ok(einstein_from_log_null_jet(&w));
        }
    }
    einstein_residual(&LogField(factor), point)
}

/// Default finite-difference step.
pub const FD_STEP: f64 = 1e-3;

/// Scalar curvature from central differences of plain `Ω` values, with one
/// Richardson step between `h` and `h/2`.
pub fn fd_ricci_oracle<F: ScalarField + ?Sized>(
    factor: &F,
    point: Point,
    h: f64,
) -> Result<f64, CurvatureError> {
    let (t, x) = point;
    let eval = |p: Point| {
        factor
            .value_at(p)
            .map_err(|source| CurvatureError::StencilOutsideDomain { point: p, source })
    };
    let center = factor.value_at(point)?;
    if center <= 0.0 {
        return Err(FieldError::NonPositiveFactor {
            value: center,
            point,
        }
        .into());
    }
    let h2 = 0.5 * h;
    let tp = eval((t + h, x))?;
    let tm = eval((t - h, x))?;
    let tp2 = eval((t + h2, x))?;
    let tm2 = eval((t - h2, x))?;
    let xp = eval((t, x + h))?;
    let xm = eval((t, x - h))?;
    let xp2 = eval((t, x + h2))?;
    let xm2 = eval((t, x - h2))?;

    let first = |p: f64, m: f64, step: f64| (p - m) / (2.0 * step);
    let second = |p: f64, m: f64, step: f64| (p - 2.0 * center + m) / (step * step);
    let richardson = |coarse: f64, fine: f64| (4.0 * fine - coarse) / 3.0;

    let w_t = richardson(first(tp, tm, h), first(tp2, tm2, h2));
    let w_x = richardson(first(xp, xm, h), first(xp2, xm2, h2));
    let w_tt = richardson(second(tp, tm, h), second(tp2, tm2, h2));
    let w_xx = richardson(second(xp, xm, h), second(xp2, xm2, h2));

    let numerator = -w_t * w_t + w_x * w_x + center * (w_tt - w_xx);
    Ok(numerator / (center * center * center))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use crate::field::ExprField;

    fn std_field(src: &str) -> ExprField {
        ExprField::standard(parse(src).unwrap())
    }

    fn null_field(src: &str) -> ExprField {
        ExprField::null(parse(src).unwrap())
    }

    #[test]
    fn minkowski_is_flat() {
        let one = std_field("1");
        assert_eq!(ricci_from_omega(&one, (0.4, -3.0)).unwrap(), 0.0);
        assert_eq!(fd_ricci_oracle(&one, (0.4, -3.0), FD_STEP).unwrap(), 0.0);
        assert_eq!(ricci_from_log(&std_field("0"), (1.0, 1.0)).unwrap(), 0.0);
        assert_eq!(ricci_null(&null_field("0"), (1.0, 1.0)).unwrap(), 0.0);
    }

    #[test]
    fn de_sitter_has_curvature_two() {
        let r = ricci_from_omega(&std_field("sec(t)^2"), (0.3, 1.0)).unwrap();
        assert!((r - 2.0).abs() < 1e-12, "{r}");
        let r = ricci_from_log(&std_field("-2*log(cos(t))"), (0.3, 1.0)).unwrap();
        assert!((r - 2.0).abs() < 1e-12, "{r}");
        let fd = fd_ricci_oracle(&std_field("sec(t)^2"), (0.3, 1.0), FD_STEP).unwrap();
        assert!((fd - 2.0).abs() < 1e-6, "{fd}");
    }

    #[test]
    fn sech_squared_has_curvature_minus_two() {
        let f = std_field("sech(t)^2");
        let r = ricci_from_omega(&f, (0.5, 0.0)).unwrap();
        assert!((r + 2.0).abs() < 1e-12, "{r}");
        let fd = fd_ricci_oracle(&f, (0.5, 0.0), FD_STEP).unwrap();
        assert!((fd + 2.0).abs() < 1e-6, "{fd}");
    }

    #[test]
    fn example_omega1_fd_oracle() {
        let f = std_field("exp(2*x) * (exp(x+t) - (1/4)*exp(x-t))^(-2)");
        let fd = fd_ricci_oracle(&f, (0.1, 0.2), FD_STEP).unwrap();
        assert!((fd - 2.0).abs() < 1e-6, "{fd}");
    }

    #[test]
    fn traveling_waves_are_flat() {
        let w = std_field("sin(x + t) + (x - t)^3 / 5");
        let r = ricci_from_log(&w, (0.2, -0.4)).unwrap();
        assert!(r.abs() < 1e-14, "{r}");
        let ric = ricci_tensor(&w, (0.2, -0.4)).unwrap();
        assert!(ric.component_tt.abs() < 1e-14 && ric.component_xx.abs() < 1e-14);
    }

    #[test]
    fn null_liouville_example() {
        // ω = -2 log(u - v/4 + 1): ∂u∂v ω = -1/(2 D²), e^{-ω} = D².
        let w = null_field("-2*log(u - (2/8)*v + 1)");
        let r = ricci_null(&w, (0.2, 0.1)).unwrap();
        assert!((r - 2.0).abs() < 1e-12, "{r}");
        let r = ricci_null(&null_field("sin(u) + u^2"), (0.2, 0.1)).unwrap();
        assert_eq!(r, 0.0);
    }

    #[test]
    fn ricci_tensor_matches_closed_form() {
        let w = std_field("-2*log(cos(t))");
        let ric = ricci_tensor(&w, (0.3, 0.0)).unwrap();
        let sec2 = 1.0 / 0.3f64.cos().powi(2);
        assert!((ric.component_tt + sec2).abs() < 1e-12, "{ric:?}");
        assert!((ric.component_xx - sec2).abs() < 1e-12, "{ric:?}");
        assert_eq!(ric.component_tx, 0.0);

        // a generic ω: diag(½(ω_xx - ω_tt), ½(ω_tt - ω_xx))
        let w = std_field("sin(t*x) + t^2*exp(x)/3");
        let j = w.jet_at((0.7, -0.2)).unwrap();
        let ric = ricci_tensor_from_log_jet(&j);
        assert!((ric.component_tt - 0.5 * (j.dxx - j.dtt)).abs() < 1e-14);
        assert!((ric.component_xx - 0.5 * (j.dtt - j.dxx)).abs() < 1e-14);
        assert!(ric.component_tx.abs() < 1e-14);
    }

    #[test]
    fn einstein_identity() {
        let e = einstein_residual(&std_field("0"), (0.0, 0.0)).unwrap();
        assert_eq!(e, EinsteinCheck { kappa: 0.0, residual: 0.0 });
        let e = einstein_residual(&std_field("-2*log(cos(t))"), (1.1, 3.0)).unwrap();
        assert!((e.kappa - 1.0).abs() < 1e-12);
        assert!(e.residual < 1e-10);
        let f = std_field("exp(sin(t*x))*(2 + x^2)");
        let e = einstein_residual_of_factor(&f, (0.4, 0.9)).unwrap();
        assert!(e.residual < 1e-10);
        let plain = einstein_residual(&LogField(&f), (0.4, 0.9)).unwrap();
        assert!((e.kappa - plain.kappa).abs() < 1e-12);
    }

    #[test]
    fn null_ricci_components() {
        // ω = u v²: Γᵘᵤᵤ = ω_u, Γᵛᵥᵥ = ω_v, so Ric_uu = Ric_vv = 0, Ric_uv = −ω_uv
        let w = Jet2 {
            value: 0.3,
            dt: 0.25,
            dx: 1.2,
            dtt: 0.0,
            dtx: 1.0,
            dxx: 0.6,
        };
        let r = ricci_components(&w, &NULL_METRIC, &NULL_INVERSE);
        assert_eq!(r, [[0.0, -1.0], [-1.0, 0.0]]);
        let e = einstein_from_log_null_jet(&w);
        assert!((e.kappa + 2.0 * (-0.3f64).exp()).abs() < 1e-15);
        assert!(e.residual < 1e-15);
    }

    #[test]
    fn non_positive_factor_is_rejected() {
        let f = std_field("-1");
        assert!(matches!(
            ricci_from_omega(&f, (0.0, 0.0)),
            Err(CurvatureError::Field(FieldError::NonPositiveFactor { .. }))
        ));
        assert!(fd_ricci_oracle(&f, (0.0, 0.0), FD_STEP).is_err());
    }

    #[test]
    fn stencil_failure_is_reported() {
        let f = std_field("sqrt(t)");
        assert!(matches!(
            fd_ricci_oracle(&f, (5e-4, 0.0), FD_STEP),
            Err(CurvatureError::StencilOutsideDomain { .. })
        ));
    }
}
