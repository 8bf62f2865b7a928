//! Grid sampling, constancy reports, level sets of the interval field, and
//! exporters.

mod contour;
mod export;
mod grid;

pub use contour::{extract_level_sets, extract_level_sets_refined, LevelSet};
pub use export::{export, render, Artifact, ExportError, Format};
pub use grid::{
    constancy_report, sample_grid, AnalysisError, CurvatureReport, CurvatureSample, InvalidReason,
    SampleGrid, DEFAULT_TOLERANCE,
};

/// Level list used when none is given.
pub const DEFAULT_LEVELS: [f64; 8] = [-2.0, -1.0, -0.5, -0.25, 0.25, 0.5, 1.0, 2.0];
