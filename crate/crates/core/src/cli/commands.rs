use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::config::{parse_grid, FamilyKind, Settings};
use super::{EXIT_FAIL, EXIT_NUMERIC, EXIT_PASS, EXIT_USAGE};
use crate::analysis::{
    constancy_report, export, extract_level_sets_refined, render, sample_grid, AnalysisError,
    Artifact, ExportError, Format, LevelSet, SampleGrid, DEFAULT_LEVELS, DEFAULT_TOLERANCE,
};
use crate::charts::{compactify as compactify_factor, interval_field, ChartError, Domain};
use crate::curvature::{fd_ricci_oracle, ricci_scalar, FD_STEP};
use crate::expr::{parse, Expr};
use crate::families::{
    factor_from_expression, flat_factor, liouville_factor, spacelike_factor, timelike_factor,
    ConformalFactor, LiouvilleOptions,
};
use crate::field::Point;

const DEFAULT_GRID: (usize, usize) = (100, 100);

/// Report and diagnostic sinks of one run.
pub struct Io<'a> {
    pub out: &'a mut dyn Write,
    pub err: &'a mut dyn Write,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Numeric(_) => EXIT_NUMERIC,
        }
    }
}

impl From<AnalysisError> for CliError {
    fn from(e: AnalysisError) -> Self {
        match e {
            AnalysisError::InvalidResolution(..) | AnalysisError::UnboundedDomain(_) => {
                CliError::Usage(e.to_string())
            }
            AnalysisError::EmptyDomain(_) | AnalysisError::NoValidSamples => {
                CliError::Numeric(e.to_string())
            }
        }
    }
}

impl From<ExportError> for CliError {
    fn from(e: ExportError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Usage(format!("cannot write output: {e}"))
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn expression(name: &str, source: &Option<String>) -> Result<Expr, CliError> {
    let src = source
        .as_deref()
        .ok_or_else(|| usage(format!("--{name} is required")))?;
    parse(src).map_err(|e| usage(format!("cannot parse --{name} `{src}`: {e}")))
}

fn required(name: &str, v: Option<f64>) -> Result<f64, CliError> {
    v.ok_or_else(|| usage(format!("--{name} is required")))
}

/// Builds the factor described by the family parameters or `--omega`.
pub fn build_factor(s: &Settings) -> Result<ConformalFactor, CliError> {
    let kind = match (s.family, &s.omega) {
        (Some(k), _) => k,
        (None, Some(_)) => FamilyKind::Explicit,
        (None, None) => return Err(usage("no factor given: use --family or --omega")),
    };
    let built = match kind {
        FamilyKind::Flat => flat_factor(&expression("phi", &s.phi)?, &expression("psi", &s.psi)?),
        FamilyKind::Timelike => timelike_factor(
            required("c1", s.c1)?,
            s.c2.unwrap_or(0.0),
            required("R", s.r)?,
        ),
        FamilyKind::Spacelike => spacelike_factor(
            required("d1", s.d1)?,
            s.d2.unwrap_or(0.0),
            required("R", s.r)?,
        ),
        FamilyKind::Liouville => liouville_factor(
            &expression("phi", &s.phi)?,
            &expression("psi", &s.psi)?,
            required("k", s.k)?,
            s.c.unwrap_or(0.0),
            required("R", s.r)?,
            LiouvilleOptions {
                raw_antiderivative: s.raw_antiderivative,
                ..Default::default()
            },
        ),
        FamilyKind::Explicit => factor_from_expression(&expression("omega", &s.omega)?, s.r),
    };
    built.map_err(|e| usage(e.to_string()))
}

fn domain(s: &Settings, fallback: impl FnOnce() -> Domain) -> Result<Domain, CliError> {
    match &s.domain {
        Some(d) => d.parse().map_err(|e: ChartError| usage(e.to_string())),
        None => Ok(fallback()),
    }
}

/// The factor's own domain when bounded, else `[−1, 1]²`.
fn default_domain(factor: &ConformalFactor) -> Domain {
    let own = factor.domain();
    if own.is_bounded() {
        own.clone()
    } else {
        Domain::rectangle((-1.0, 1.0), (-1.0, 1.0))
    }
}

fn grid_size(s: &Settings) -> Result<(usize, usize), CliError> {
    s.grid.as_deref().map_or(Ok(DEFAULT_GRID), |g| parse_grid(g).map_err(usage))
}

fn tolerance(s: &Settings) -> Result<f64, CliError> {
    let tol = s.tol.unwrap_or(DEFAULT_TOLERANCE);
    if tol.is_finite() && tol >= 0.0 {
        Ok(tol)
    } else {
        Err(usage(format!("--tol must be a non-negative number, got {tol}")))
    }
}

fn levels(s: &Settings) -> Result<Vec<f64>, CliError> {
    let levels = s
        .levels
        .as_ref()
        .map_or_else(|| DEFAULT_LEVELS.to_vec(), |l| l.0.clone());
    if levels.is_empty() {
        return Err(usage("level list is empty"));
    }
    Ok(levels)
}

fn target(s: &Settings, factor: &ConformalFactor) -> f64 {
    s.r.or(factor.target_curvature()).unwrap_or(0.0)
}

/// Relative agreement expected between the jet and finite-difference curvature.
const FD_AGREEMENT: f64 = 1e-4;

/// Random AD-vs-finite-difference comparison, reported on stderr. Finite
/// differences lose all accuracy where `Ω` is huge or nearly singular, so
/// the count of agreeing points is reported next to the worst one.
fn fd_cross_check(s: &Settings, factor: &ConformalFactor, domain: &Domain, err: &mut dyn Write) {
    let Some(n) = s.fd_samples.filter(|n| *n > 0) else {
        return;
    };
    let mut rng = ChaCha8Rng::seed_from_u64(s.seed.unwrap_or(0));
    let ((t0, t1), (x0, x1)) = domain.bounds();
    let (mut checked, mut agreeing) = (0usize, 0usize);
    let mut worst: Option<(f64, Point)> = None;
    for _ in 0..n.saturating_mul(100) {
        if checked == n {
            break;
        }
        let p: Point = (rng.gen_range(t0..t1), rng.gen_range(x0..x1));
        if !domain.contains(p) {
            continue;
        }
        if let (Ok(ad), Ok(fd)) = (ricci_scalar(factor, p), fd_ricci_oracle(factor, p, FD_STEP)) {
            let diff = (ad - fd).abs();
            checked += 1;
            if diff <= FD_AGREEMENT * ad.abs().max(1.0) {
                agreeing += 1;
            }
            if worst.map_or(true, |(w, _)| diff > w) {
                worst = Some((diff, p));
            }
        }
    }
    let _ = write!(
        err,
        "fd cross-check: {agreeing}/{checked} points agree within {FD_AGREEMENT:e} (relative)"
    );
    let _ = match worst {
        Some((w, (t, x))) => writeln!(err, "; max |R_ad - R_fd| = {w:e} at ({t}, {x})"),
        None => writeln!(err),
    };
}

fn sample(
    s: &Settings,
    factor: &ConformalFactor,
    domain: &Domain,
    err: &mut dyn Write,
) -> Result<SampleGrid, CliError> {
    let grid = sample_grid(factor, domain, grid_size(s)?)?;
    fd_cross_check(s, factor, domain, err);
    Ok(grid)
}

fn level_sets(grid: &SampleGrid, factor: &ConformalFactor, levels: &[f64]) -> Vec<LevelSet> {
    let field = |p: Point| interval_field(factor, p).ok();
    extract_level_sets_refined(grid, levels, &field)
}

/// Samples, prints the report JSON and writes `--out`. Shared by `check`
/// and `compactify`.
fn check_factor(
    s: &Settings,
    factor: &ConformalFactor,
    domain: Domain,
    io: &mut Io<'_>,
) -> Result<i32, CliError> {
    let tol = tolerance(s)?;
    let target = target(s, factor);
    let grid = sample(s, factor, &domain, io.err)?;
    let report = constancy_report(&grid, target, tol)?;
    io.out.write_all(render(Artifact::Report(&report), Format::Json)?.as_bytes())?;
    if let Some(path) = &s.out {
        let format = s.format.unwrap_or(Format::Json);
        match format {
            Format::Json => export(Artifact::Report(&report), format, path)?,
            Format::Csv => export(Artifact::Grid(&grid), format, path)?,
            Format::Svg => {
                let sets = level_sets(&grid, factor, &levels(s)?);
                let bounds = (grid.t_range, grid.x_range);
                export(Artifact::LevelSets { sets: &sets, bounds }, format, path)?
            }
        }
    }
    writeln!(
        io.err,
        "{}: max |R - {target}| = {:e} over {} valid samples ({} singular, {} domain errors)",
        if report.pass { "PASS" } else { "FAIL" },
        report.max_abs_deviation,
        report.n_valid,
        report.n_singular,
        report.n_domain_error,
    )?;
    Ok(if report.pass { EXIT_PASS } else { EXIT_FAIL })
}

pub fn check(s: &Settings, io: &mut Io<'_>) -> Result<i32, CliError> {
    let factor = build_factor(s)?;
    let domain = domain(s, || default_domain(&factor))?;
    check_factor(s, &factor, domain, io)
}

pub fn family(s: &Settings, io: &mut Io<'_>) -> Result<i32, CliError> {
    let factor = build_factor(s)?;
    writeln!(io.out, "{}", factor.description())?;
    if let Some(path) = &s.out {
        if let Some(f) = s.format.filter(|f| *f != Format::Csv) {
            return Err(usage(format!("family writes a grid as csv, not {f}")));
        }
        let domain = domain(s, || default_domain(&factor))?;
        let grid = sample(s, &factor, &domain, io.err)?;
        export(Artifact::Grid(&grid), Format::Csv, path)?;
    }
    Ok(EXIT_PASS)
}

pub fn compactify(s: &Settings, io: &mut Io<'_>) -> Result<i32, CliError> {
    let factor = build_factor(s)?;
    let compact = compactify_factor(&factor).map_err(|e| CliError::Numeric(e.to_string()))?;
    let domain = domain(s, Domain::diamond)?;
    check_factor(s, &compact, domain, io)
}

pub fn contour(s: &Settings, io: &mut Io<'_>) -> Result<i32, CliError> {
    let factor = build_factor(s)?;
    let levels = levels(s)?;
    let format = s.format.unwrap_or(Format::Svg);
    if format == Format::Json {
        return Err(usage("contour writes svg or csv, not json"));
    }
    let domain = domain(s, || default_domain(&factor))?;
    let grid = sample(s, &factor, &domain, io.err)?;
    if grid.samples().all(|c| !c.is_valid()) {
        return Err(AnalysisError::NoValidSamples.into());
    }
    let sets = level_sets(&grid, &factor, &levels);
    let artifact = Artifact::LevelSets {
        sets: &sets,
        bounds: (grid.t_range, grid.x_range),
    };
    match &s.out {
        Some(path) => export(artifact, format, path)?,
        None => io.out.write_all(render(artifact, format)?.as_bytes())?,
    }
    let n: usize = sets.iter().map(|l| l.polylines.len()).sum();
    writeln!(io.err, "{n} polylines over {} levels", levels.len())?;
    Ok(EXIT_PASS)
}
