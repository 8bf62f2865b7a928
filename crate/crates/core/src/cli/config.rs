//! Run settings shared by every subcommand. The same struct is filled from
//! command-line flags and from a JSON config file; flags win.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, ValueEnum};
use serde::Deserialize;

use crate::analysis::Format;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyKind {
    Flat,
    Timelike,
    Spacelike,
    Liouville,
    Explicit,
}

/// Comma-separated `s²` levels on the command line, a number array in JSON.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(transparent)]
pub struct Levels(pub Vec<f64>);

impl FromStr for Levels {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        if s.trim().is_empty() {
            return Ok(Levels(Vec::new()));
        }
        s.split(',')
            .map(|p| {
                p.trim()
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| format!("invalid level `{}`", p.trim()))
            })
            .collect::<Result<_, _>>()
            .map(Levels)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    /// Solution family building the factor
    #[arg(long, value_enum)]
    pub family: Option<FamilyKind>,
    /// φ(l) for the flat and general families
    #[arg(long, allow_hyphen_values = true)]
    pub phi: Option<String>,
    /// ψ(l) for the flat and general families
    #[arg(long, allow_hyphen_values = true)]
    pub psi: Option<String>,
    /// Timelike family: c₁ (sign picks the branch)
    #[arg(long)]
    pub c1: Option<f64>,
    /// Timelike family: shift c₂ (default 0)
    #[arg(long)]
    pub c2: Option<f64>,
    /// Spacelike family: d₁ (sign picks the branch)
    #[arg(long)]
    pub d1: Option<f64>,
    /// Spacelike family: shift d₂ (default 0)
    #[arg(long)]
    pub d2: Option<f64>,
    /// General family: nonzero scale k
    #[arg(long)]
    pub k: Option<f64>,
    /// General family: additive constant C (default 0)
    #[arg(long = "C")]
    #[serde(rename = "C")]
    pub c: Option<f64>,
    /// Family parameter R, and the curvature target of checks
    #[arg(long = "R")]
    #[serde(rename = "R")]
    pub r: Option<f64>,
    /// Explicit Ω over (t, x) or (u, v)
    #[arg(long = "omega", allow_hyphen_values = true)]
    #[serde(rename = "omega_source")]
    pub omega: Option<String>,
    /// Take F(s) = e^s for an e^l integrand instead of e^s − 1
    #[arg(long)]
    #[serde(default)]
    pub raw_antiderivative: bool,
    /// rect:t0,t1,x0,x1 | diamond[:w]
    #[arg(long)]
    pub domain: Option<String>,
    /// Cells as NTxNX (t rows by x columns)
    #[arg(long)]
    pub grid: Option<String>,
    /// Tolerance on max |R − target|
    #[arg(long)]
    pub tol: Option<f64>,
    /// Interval levels a,b,c
    #[arg(long, allow_hyphen_values = true)]
    pub levels: Option<Levels>,
    /// Output file (report json, grid csv or level-set svg/csv)
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// csv | json | svg
    #[arg(long)]
    pub format: Option<Format>,
    /// Seed for randomized cross-checks
    #[arg(long)]
    pub seed: Option<u64>,
    /// Random points for an AD-vs-finite-difference cross-check
    #[arg(long)]
    pub fd_samples: Option<usize>,
    /// JSON file with any of the settings above
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

impl Settings {
    /// Fills every unset field from `fallback`.
    pub fn or(self, fallback: Settings) -> Settings {
        Settings {
            family: self.family.or(fallback.family),
            phi: self.phi.or(fallback.phi),
            psi: self.psi.or(fallback.psi),
            c1: self.c1.or(fallback.c1),
            c2: self.c2.or(fallback.c2),
            d1: self.d1.or(fallback.d1),
            d2: self.d2.or(fallback.d2),
            k: self.k.or(fallback.k),
            c: self.c.or(fallback.c),
            r: self.r.or(fallback.r),
            omega: self.omega.or(fallback.omega),
            raw_antiderivative: self.raw_antiderivative || fallback.raw_antiderivative,
            domain: self.domain.or(fallback.domain),
            grid: self.grid.or(fallback.grid),
            tol: self.tol.or(fallback.tol),
            levels: self.levels.or(fallback.levels),
            out: self.out.or(fallback.out),
            format: self.format.or(fallback.format),
            seed: self.seed.or(fallback.seed),
            fd_samples: self.fd_samples.or(fallback.fd_samples),
            config: self.config.or(fallback.config),
        }
    }

    pub fn from_json(text: &str) -> Result<Settings, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// Merges the config file named by `--config`, if any.
    pub fn resolve(self) -> Result<Settings, String> {
        let Some(path) = self.config.clone() else {
            return Ok(self);
        };
        let file = read_config(&path)?;
        Ok(self.or(file))
    }
}

fn read_config(path: &Path) -> Result<Settings, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
    Settings::from_json(&text).map_err(|e| format!("invalid config {}: {e}", path.display()))
}

/// Parses `NTxNX`.
pub fn parse_grid(s: &str) -> Result<(usize, usize), String> {
    let err = || format!("invalid grid `{s}`: expected NTxNX, e.g. 100x100");
    let (a, b) = s.split_once(['x', 'X']).ok_or_else(err)?;
    let nt = a.trim().parse().map_err(|_| err())?;
    let nx = b.trim().parse().map_err(|_| err())?;
    Ok((nt, nx))
}
