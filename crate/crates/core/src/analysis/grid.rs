use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::charts::{Domain, Interval};
use crate::curvature::ricci_scalar_with_jet;
use crate::field::{FieldError, Point, ScalarField};

/// Default tolerance on `max |R − target|` for a PASS.
pub const DEFAULT_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("grid resolution must be at least 2x2, got {0}x{1}")]
    InvalidResolution(usize, usize),
    #[error("domain {0} is unbounded and cannot be sampled")]
    UnboundedDomain(String),
    #[error("no cell center lies inside domain {0}")]
    EmptyDomain(String),
    #[error("no valid samples in the grid")]
    NoValidSamples,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InvalidReason {
    Singular,
    NonPositive,
    OutsideFactorDomain,
    Quadrature,
    Domain,
}

impl InvalidReason {
    pub fn token(self) -> &'static str {
        match self {
            InvalidReason::Singular => "singular",
            InvalidReason::NonPositive => "nonpositive",
            InvalidReason::OutsideFactorDomain => "outside",
            InvalidReason::Quadrature => "quadrature",
            InvalidReason::Domain => "domain",
        }
    }

    fn from_error(e: &FieldError) -> Self {
        match e {
            FieldError::SingularDenominator { .. } => InvalidReason::Singular,
            FieldError::NonPositiveFactor { .. } => InvalidReason::NonPositive,
            FieldError::OutsideDomain { .. } => InvalidReason::OutsideFactorDomain,
            FieldError::QuadratureNonConvergence { .. } => InvalidReason::Quadrature,
            FieldError::Eval(_) => InvalidReason::Domain,
        }
    }
}

/// Curvature and interval at one cell center.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvatureSample {
    pub point: Point,
    pub omega: Option<f64>,
    pub ricci_scalar: Option<f64>,
    pub interval: Option<f64>,
    pub invalid: Option<InvalidReason>,
}

impl CurvatureSample {
    pub fn is_valid(&self) -> bool {
        self.invalid.is_none()
    }

    fn evaluate<F: ScalarField + ?Sized>(factor: &F, point: Point) -> Self {
        let invalid = |reason, omega| Self {
            point,
            omega,
            ricci_scalar: None,
            interval: None,
            invalid: Some(reason),
        };
        let jet = match factor.jet_at(point) {
            Ok(j) => j,
            Err(e) => {
                let omega = match e {
                    FieldError::NonPositiveFactor { value, .. } => Some(value),
                    _ => None,
                };
                return invalid(InvalidReason::from_error(&e), omega);
            }
        };
        match ricci_scalar_with_jet(factor, &jet, point) {
            Ok(r) if r.is_finite() => {
                let (t, x) = point;
                Self {
                    point,
                    omega: Some(jet.value),
                    ricci_scalar: Some(r),
                    interval: Some(jet.value * (x * x - t * t)),
                    invalid: None,
                }
            }
            Ok(_) => invalid(InvalidReason::Domain, Some(jet.value)),
            Err(e) => invalid(InvalidReason::from_error(&e), Some(jet.value)),
        }
    }
}

/// Cell-centered samples over the bounding box of a domain. Cells whose
/// center lies outside the domain hold `None`.
#[derive(Debug, Clone)]
pub struct SampleGrid {
    pub domain: Domain,
    /// `(n_t, n_x)`
    pub resolution: (usize, usize),
    pub t_range: Interval,
    pub x_range: Interval,
    /// Row-major, one row per `t` index.
    pub cells: Vec<Option<CurvatureSample>>,
}

impl SampleGrid {
    pub fn center(&self, i: usize, j: usize) -> Point {
        cell_center(self.t_range, self.x_range, self.resolution, i, j)
    }

    pub fn cell(&self, i: usize, j: usize) -> Option<&CurvatureSample> {
        self.cells[i * self.resolution.1 + j].as_ref()
    }

    pub fn samples(&self) -> impl Iterator<Item = &CurvatureSample> {
        self.cells.iter().flatten()
    }

    /// Diagonal of one cell.
    pub fn cell_diagonal(&self) -> f64 {
        let dt = (self.t_range.1 - self.t_range.0) / self.resolution.0 as f64;
        let dx = (self.x_range.1 - self.x_range.0) / self.resolution.1 as f64;
        dt.hypot(dx)
    }
}

fn cell_center(t: Interval, x: Interval, (nt, nx): (usize, usize), i: usize, j: usize) -> Point {
    (
        t.0 + (i as f64 + 0.5) * (t.1 - t.0) / nt as f64,
        x.0 + (j as f64 + 0.5) * (x.1 - x.0) / nx as f64,
    )
}

/// Evaluates `Ω`, `R` and `s²` at every cell center inside `domain`.
/// Rows are evaluated in parallel and merged in row order.
pub fn sample_grid<F: ScalarField + ?Sized>(
    factor: &F,
    domain: &Domain,
    resolution: (usize, usize),
) -> Result<SampleGrid, AnalysisError> {
    let (nt, nx) = resolution;
    if nt < 2 || nx < 2 {
        return Err(AnalysisError::InvalidResolution(nt, nx));
    }
    if !domain.is_bounded() {
        return Err(AnalysisError::UnboundedDomain(domain.to_string()));
    }
    let (t_range, x_range) = domain.bounds();
    let rows: Vec<Vec<Option<CurvatureSample>>> = (0..nt)
        .into_par_iter()
        .map(|i| {
            (0..nx)
                .map(|j| {
                    let p = cell_center(t_range, x_range, resolution, i, j);
                    domain
                        .contains(p)
                        .then(|| CurvatureSample::evaluate(factor, p))
                })
                .collect()
        })
        .collect();
    let cells: Vec<_> = rows.into_iter().flatten().collect();
    if cells.iter().all(Option::is_none) {
        return Err(AnalysisError::EmptyDomain(domain.to_string()));
    }
    Ok(SampleGrid {
        domain: domain.clone(),
        resolution,
        t_range,
        x_range,
        cells,
    })
}

/// Statistics of `R − target` over the valid samples of a grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvatureReport {
    #[serde(rename = "target_R")]
    pub target_r: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub n_valid: usize,
    pub n_singular: usize,
    pub n_domain_error: usize,
    pub max_abs_deviation: f64,
    pub mean_deviation: f64,
    pub worst_point: [f64; 2],
}

pub fn constancy_report(
    grid: &SampleGrid,
    target_r: f64,
    tolerance: f64,
) -> Result<CurvatureReport, AnalysisError> {
    let mut n_valid = 0;
    let mut n_singular = 0;
    let mut n_domain_error = 0;
    let mut sum = 0.0;
    let mut max_abs = 0.0;
    let mut worst = None;
    for s in grid.samples() {
        match (s.invalid, s.ricci_scalar) {
            (None, Some(r)) => {
                n_valid += 1;
                let dev = r - target_r;
                sum += dev;
                if worst.is_none() || dev.abs() > max_abs {
                    max_abs = dev.abs();
                    worst = Some(s.point);
                }
            }
            (Some(InvalidReason::Singular), _) => n_singular += 1,
            _ => n_domain_error += 1,
        }
    }
    let Some(worst) = worst else {
        return Err(AnalysisError::NoValidSamples);
    };
    Ok(CurvatureReport {
        target_r,
        tolerance,
        pass: max_abs <= tolerance,
        n_valid,
        n_singular,
        n_domain_error,
        max_abs_deviation: max_abs,
        mean_deviation: sum / n_valid as f64,
        worst_point: [worst.0, worst.1],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use crate::families::{factor_from_expression, liouville_factor, timelike_factor};

    fn minkowski() -> crate::families::ConformalFactor {
        factor_from_expression(&parse("1").unwrap(), None).unwrap()
    }

    #[test]
    fn minkowski_grid() {
        let g = sample_grid(&minkowski(), &"rect:-1,1,-1,1".parse().unwrap(), (10, 10)).unwrap();
        assert_eq!(g.samples().count(), 100);
        assert!(g.samples().all(|s| s.ricci_scalar == Some(0.0)));
        let c = g.center(0, 0);
        assert!((c.0 + 0.9).abs() < 1e-15 && (c.1 + 0.9).abs() < 1e-15);
    }

    #[test]
    fn de_sitter_grid_passes() {
        let ds = timelike_factor(-4.0, 0.0, 2.0).unwrap();
        let g = sample_grid(&ds, &"rect:-1.5,1.5,0,6".parse().unwrap(), (50, 50)).unwrap();
        assert!(g.samples().all(|s| s.is_valid()));
        let r = constancy_report(&g, 2.0, DEFAULT_TOLERANCE).unwrap();
        assert!(r.pass);
        assert!(r.max_abs_deviation <= 1e-9);
        assert_eq!(r.n_valid, 2500);
        assert!(r.max_abs_deviation >= r.mean_deviation.abs());
    }

    #[test]
    fn wrong_target_fails() {
        let omega1 = factor_from_expression(
            &parse("exp(2*x) * (exp(x+t) - (1/4)*exp(x-t))^(-2)").unwrap(),
            Some(2.0),
        )
        .unwrap();
        let g = sample_grid(&omega1, &"rect:-1,1,-1,1".parse().unwrap(), (20, 20)).unwrap();
        assert!(constancy_report(&g, 2.0, DEFAULT_TOLERANCE).unwrap().pass);
        let bad = constancy_report(&g, 0.0, DEFAULT_TOLERANCE).unwrap();
        assert!(!bad.pass);
        assert!((bad.max_abs_deviation - 2.0).abs() < 1e-6);
    }

    #[test]
    fn singular_cells_are_counted() {
        // D = u vanishes on the anti-diagonal x = -t.
        let f = liouville_factor(
            &parse("0").unwrap(),
            &parse("0").unwrap(),
            1.0,
            0.0,
            0.0,
            Default::default(),
        )
        .unwrap();
        let g = sample_grid(&f, &"rect:-1,1,-1,1".parse().unwrap(), (9, 9)).unwrap();
        let r = constancy_report(&g, 0.0, DEFAULT_TOLERANCE).unwrap();
        assert_eq!(r.n_singular, 9);
        assert_eq!(r.n_valid + r.n_singular + r.n_domain_error, 81);
    }

    #[test]
    fn errors() {
        let m = minkowski();
        assert!(matches!(
            sample_grid(&m, &Domain::diamond(), (1, 5)),
            Err(AnalysisError::InvalidResolution(1, 5))
        ));
        assert!(matches!(
            sample_grid(&m, &Domain::plane(), (5, 5)),
            Err(AnalysisError::UnboundedDomain(_))
        ));
        let neg = factor_from_expression(&parse("-1").unwrap(), None).unwrap();
        let g = sample_grid(&neg, &Domain::diamond(), (4, 4)).unwrap();
        assert!(matches!(
            constancy_report(&g, 0.0, 1e-6),
            Err(AnalysisError::NoValidSamples)
        ));
    }

    #[test]
    fn diamond_grid_skips_outer_cells() {
        let g = sample_grid(&minkowski(), &Domain::diamond(), (10, 10)).unwrap();
        let inside = g.samples().count();
        assert!(inside < 100 && inside > 0);
        for s in g.samples() {
            assert!(Domain::diamond().contains(s.point));
        }
    }
}
