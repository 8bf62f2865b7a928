//! Command-line front end.
//!
//! Exit codes: 0 PASS (or success), 1 curvature check FAIL, 2 usage, parse or
//! parameter error, 3 numeric or domain failure.

mod commands;
pub mod config;

use std::ffi::OsString;
use std::io::Write;

use clap::{Parser, Subcommand};

pub use commands::{build_factor, CliError};
pub use config::{FamilyKind, Levels, Settings};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "conformal",
    version,
    about = "Constant-curvature conformal factors for 2D Lorentzian metrics"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample a factor and check that its scalar curvature is constant
    #[command(allow_negative_numbers = true)]
    Check(Settings),
    /// Build a factor from a solution family and print it
    #[command(allow_negative_numbers = true)]
    Family {
        /// Family (same as --family)
        #[arg(value_enum)]
        kind: Option<FamilyKind>,
        #[command(flatten)]
        settings: Settings,
    },
    /// Check a factor in compact coordinates on the diamond
    #[command(allow_negative_numbers = true)]
    Compactify(Settings),
    /// Export level sets of the interval field
    #[command(allow_negative_numbers = true)]
    Contour(Settings),
}

/// Runs the CLI on `args` (including the program name) and returns the exit
/// code. Reports go to stdout, diagnostics to stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with(args, &mut std::io::stdout().lock(), &mut std::io::stderr().lock())
}

/// As [`run`], writing reports to `out` and diagnostics to `err`.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(text.as_bytes())
            } else {
                out.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let mut io = commands::Io { out, err };
    let result = match cli.command {
        Command::Check(s) => s.resolve().map_err(CliError::Usage).and_then(|s| commands::check(&s, &mut io)),
        Command::Family { kind, settings } => {
            settings.resolve().map_err(CliError::Usage).and_then(|mut s| {
                s.family = kind.or(s.family);
                commands::family(&s, &mut io)
            })
        }
        Command::Compactify(s) => s
            .resolve()
            .map_err(CliError::Usage)
            .and_then(|s| commands::compactify(&s, &mut io)),
        Command::Contour(s) => s.resolve().map_err(CliError::Usage).and_then(|s| commands::contour(&s, &mut io)),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(io.err, "error: {e}");
            e.exit_code()
        }
    }
}
