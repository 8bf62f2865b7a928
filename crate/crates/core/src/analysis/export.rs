use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use thiserror::Error;

use super::contour::LevelSet;
use super::grid::{CurvatureReport, SampleGrid};
use crate::charts::Interval;

const VIEWPORT: f64 = 800.0;

#[derive(Debug, Error)]
pub enum ExportError {
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{artifact} cannot be exported as {format}")]
    Unsupported {
        artifact: &'static str,
        format: Format,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Svg,
}

impl std::fmt::Display for Format {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Format::Csv => "csv",
            Format::Json => "json",
            Format::Svg => "svg",
        })
    }
}

impl FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            "svg" => Ok(Format::Svg),
            _ => Err(format!("unknown format '{s}' (expected csv, json or svg)")),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub enum Artifact<'a> {
    Grid(&'a SampleGrid),
    Report(&'a CurvatureReport),
    /// Level sets drawn over the `(t, x)` bounding box.
    LevelSets {
        sets: &'a [LevelSet],
        bounds: (Interval, Interval),
    },
}

impl Artifact<'_> {
    fn name(&self) -> &'static str {
        match self {
            Artifact::Grid(_) => "grid",
            Artifact::Report(_) => "report",
            Artifact::LevelSets { .. } => "level sets",
        }
    }
}

/// Renders an artifact to its textual form. Output is byte-identical for
/// identical input.
pub fn render(artifact: Artifact<'_>, format: Format) -> Result<String, ExportError> {
    match (artifact, format) {
        (Artifact::Grid(g), Format::Csv) => Ok(grid_csv(g)),
        (Artifact::Report(r), Format::Json) => {
            Ok(serde_json::to_string_pretty(r).expect("report serializes") + "\n")
        }
        (Artifact::LevelSets { sets, .. }, Format::Csv) => Ok(level_sets_csv(sets)),
        (Artifact::LevelSets { sets, bounds }, Format::Svg) => Ok(level_sets_svg(sets, bounds)),
        (a, format) => Err(ExportError::Unsupported {
            artifact: a.name(),
            format,
        }),
    }
}

pub fn export(artifact: Artifact<'_>, format: Format, destination: &Path) -> Result<(), ExportError> {
    let text = render(artifact, format)?;
    std::fs::write(destination, text).map_err(|source| ExportError::Io {
        path: destination.to_path_buf(),
        source,
    })
}

fn grid_csv(g: &SampleGrid) -> String {
    let mut out = String::from("t,x,omega,R,s2,valid\n");
    for s in g.samples() {
        let (t, x) = s.point;
        let omega = s.omega.map(|v| v.to_string()).unwrap_or_default();
        match s.invalid {
            None => {
                let r = s.ricci_scalar.expect("valid sample has R");
                let s2 = s.interval.expect("valid sample has s2");
                writeln!(out, "{t},{x},{omega},{r},{s2},true").unwrap();
            }
            Some(reason) => writeln!(out, "{t},{x},{omega},,,{}", reason.token()).unwrap(),
        }
    }
    out
}

fn level_sets_csv(sets: &[LevelSet]) -> String {
    let mut out = String::from("level,polyline,vertex,t,x\n");
    for set in sets {
        for (n, line) in set.polylines.iter().enumerate() {
            for (k, (t, x)) in line.iter().enumerate() {
                writeln!(out, "{},{n},{k},{t},{x}", set.level).unwrap();
            }
        }
    }
    out
}

fn level_sets_svg(sets: &[LevelSet], (t_range, x_range): (Interval, Interval)) -> String {
    let sx = VIEWPORT / (x_range.1 - x_range.0);
    let st = VIEWPORT / (t_range.1 - t_range.0);
    let map = |(t, x): (f64, f64)| ((x - x_range.0) * sx, (t_range.1 - t) * st);
    let mut out = String::new();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{v}" height="{v}" viewBox="0 0 {v} {v}">"#,
        v = VIEWPORT
    )
    .unwrap();
    writeln!(
        out,
        r#"<rect x="0" y="0" width="{v}" height="{v}" fill="white" stroke="black"/>"#,
        v = VIEWPORT
    )
    .unwrap();
    for set in sets {
        for line in &set.polylines {
            let mut d = String::new();
            for (k, p) in line.iter().enumerate() {
                let (px, py) = map(*p);
                let cmd = if k == 0 { 'M' } else { 'L' };
                write!(d, "{}{cmd}{px},{py}", if k == 0 { "" } else { " " }).unwrap();
            }
            writeln!(
                out,
                r#"<path data-level="{}" d="{d}" fill="none" stroke="black" stroke-width="1"/>"#,
                set.level
            )
            .unwrap();
        }
        // label at the first vertex of the longest polyline (path coordinates
        // above keep full precision so vertices can be checked against the field)
        if let Some(line) = set.polylines.iter().max_by_key(|l| l.len()) {
            let (px, py) = map(line[0]);
            writeln!(
                out,
                r#"<text x="{px:.3}" y="{py:.3}" font-size="12">{}</text>"#,
                set.level
            )
            .unwrap();
        }
    }
    out.push_str("</svg>\n");
    out
}
