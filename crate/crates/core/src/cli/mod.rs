//! The `sijc` command-line front end.
//!
//! Exit codes are part of the interface:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success |
//! | 1 | output file could not be written |
//! | 2 | usage error (unknown subcommand, bad or missing flags) |
//! | 3 | domain or contract violation (level out of range, unsupported family, ...) |
//! | 4 | verification failure (tolerance breach, failed self-check) |
//! | 5 | numerical failure (eigensolver) |

mod render;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::algebra::{spectrum_table, PotentialFamily, SpectrumTable};
use crate::dressed::{
    diagonalize_dressed, h_matrix, pair_blocks, BasisLabel, DressedSpectrum, LevelComparison, PairBlock,
};
use crate::error::Error;
use crate::format::{fmt_sig, to_json};
use crate::grid::{
    build_two_channel, convergence_study, default_grid, eigenvector_csv, shape_invariance_residual, verify_spectrum,
    ConvergenceStep, ConvergenceStudy, GridSpec, LevelOrder, VerificationReport,
};
use render::{label_columns, Csv, Table};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DOMAIN: i32 = 3;
pub const EXIT_VERIFICATION: i32 = 4;
pub const EXIT_NUMERICAL: i32 = 5;

/// Largest accepted deviation of the dressed-matrix eigenvalues from the
/// closed form.
pub const DRESSED_THRESHOLD: f64 = 1e-9;

/// Accepted range of the residual ratio under `h -> h/2`.
pub const RESIDUAL_RATIO_RANGE: (f64, f64) = (3.0, 5.0);

#[derive(Debug, Parser)]
#[command(
    name = "sijc",
    version,
    about = "Generalized Jaynes-Cummings spectra from shape-invariant superpotentials"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// List potential families, their parameters and supported operations
    Families(OutputArgs),
    /// Closed-form dressed spectrum
    Spectrum(SpectrumArgs),
    /// Truncated dressed-basis Hamiltonian, diagonalized and checked against the closed form
    Dressed(DressedArgs),
    /// Finite-difference two-channel spectrum compared with the closed form
    Verify(VerifyArgs),
    /// Grid residual of the shape-invariance identity at two resolutions
    Residual(ResidualArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Table,
    Json,
    Csv,
}

#[derive(Debug, Args)]
struct OutputArgs {
    /// Output format
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
    /// Write to this file instead of standard output
    #[arg(long, short = 'o')]
    output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FamilyChoice {
    #[value(alias = "ho")]
    Harmonic,
    Morse,
    Scaling,
}

#[derive(Debug, Args)]
struct FamilyArgs {
    /// Potential family
    #[arg(long, value_enum)]
    family: FamilyChoice,
    /// Particle mass M (harmonic, morse)
    #[arg(long, allow_negative_numbers = true)]
    mass: Option<f64>,
    /// Oscillator frequency omega (harmonic)
    #[arg(long, allow_negative_numbers = true)]
    omega: Option<f64>,
    /// Well depth V0 (morse)
    #[arg(long, allow_negative_numbers = true)]
    v0: Option<f64>,
    /// Inverse range lambda (morse)
    #[arg(long, allow_negative_numbers = true)]
    lambda: Option<f64>,
    /// First remainder R(a_1) (scaling)
    #[arg(long, allow_negative_numbers = true)]
    r1: Option<f64>,
    /// Remainder ratio q in (0, 1) (scaling)
    #[arg(long, allow_negative_numbers = true)]
    q: Option<f64>,
    /// Reduced Planck constant
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    hbar: f64,
}

#[derive(Debug, Args)]
struct DriveArgs {
    /// Drive strength Omega (>= 0)
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    omega_drive: f64,
}

#[derive(Debug, Args)]
struct GridArgs {
    /// Left end of the domain (default depends on the family)
    #[arg(long, allow_negative_numbers = true)]
    x_min: Option<f64>,
    /// Right end of the domain
    #[arg(long, allow_negative_numbers = true)]
    x_max: Option<f64>,
    /// Number of interior grid points (at least 50)
    #[arg(long)]
    n_points: Option<usize>,
}

#[derive(Debug, Args)]
struct SpectrumArgs {
    #[command(flatten)]
    family: FamilyArgs,
    #[command(flatten)]
    drive: DriveArgs,
    /// Number of dressed pairs m = 0 .. levels-1
    #[arg(long, default_value_t = 1)]
    levels: usize,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct DressedArgs {
    #[command(flatten)]
    family: FamilyArgs,
    #[command(flatten)]
    drive: DriveArgs,
    /// Highest pair index kept in the truncated basis
    #[arg(long, default_value_t = 2)]
    n_max: usize,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[command(flatten)]
    family: FamilyArgs,
    #[command(flatten)]
    drive: DriveArgs,
    /// Number of analytic levels compared (ground, then minus/plus per pair)
    #[arg(long, default_value_t = 5)]
    levels: usize,
    #[command(flatten)]
    grid: GridArgs,
    /// Largest accepted relative error
    #[arg(long, default_value_t = 1e-3)]
    tolerance: f64,
    /// Also run the h, h/2, h/4 refinement study
    #[arg(long)]
    converge: bool,
    /// Write the lowest eigenvectors of the two-channel matrix to this CSV file
    #[arg(long)]
    eigvec_csv: Option<PathBuf>,
    /// Number of eigenvectors in --eigvec-csv
    #[arg(long, default_value_t = 4)]
    eigvec_count: usize,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct ResidualArgs {
    #[command(flatten)]
    family: FamilyArgs,
    #[command(flatten)]
    grid: GridArgs,
    /// Debug: replace R(a_1) by R(a_1) + 1 to check that a broken identity is detected
    #[arg(long)]
    break_remainder: bool,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Compute(Error),
    Io(PathBuf, std::io::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Compute(e)
    }
}

/// Rendered output plus, when a self-check failed, the reason.
struct Emission {
    body: String,
    failed: Option<String>,
}

impl Emission {
    fn ok(body: String) -> Self {
        Self { body, failed: None }
    }
}

/// Parses `args` (including the program name) and runs the subcommand.
/// Returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                stderr.write_all(text.as_bytes())
            } else {
                stdout.write_all(text.as_bytes())
            };
            return e.exit_code();
        }
    };
    let output = cli.command.output().output.clone();
    match execute(&cli.command) {
        Ok(emission) => {
            let written = match &output {
                Some(path) => std::fs::write(path, &emission.body).map_err(|e| (path.clone(), e)),
                None => stdout
                    .write_all(emission.body.as_bytes())
                    .map_err(|e| (PathBuf::from("<stdout>"), e)),
            };
            if let Err((path, e)) = written {
                let _ = writeln!(stderr, "sijc: error: cannot write {}: {e}", path.display());
                return EXIT_IO;
            }
            match emission.failed {
                Some(reason) => {
                    let _ = writeln!(stderr, "sijc: verification failed: {reason}");
                    EXIT_VERIFICATION
                }
                None => EXIT_OK,
            }
        }
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(
                stderr,
                "sijc: usage error: {msg}\n\nFor more information, try '--help'."
            );
            EXIT_USAGE
        }
        Err(Failure::Io(path, e)) => {
            let _ = writeln!(stderr, "sijc: error: cannot write {}: {e}", path.display());
            EXIT_IO
        }
        Err(Failure::Compute(e)) => {
            let _ = writeln!(stderr, "sijc: error: {e}");
            if let Error::LevelOutOfRange { available, .. } = e {
                let _ = writeln!(
                    stderr,
                    "sijc: note: this Morse well binds {available} excited levels, so only {available} dressed pairs exist"
                );
            }
            if e.is_numerical() {
                EXIT_NUMERICAL
            } else {
                EXIT_DOMAIN
            }
        }
    }
}

impl Command {
    fn output(&self) -> &OutputArgs {
        match self {
            Command::Families(o) => o,
            Command::Spectrum(a) => &a.output,
            Command::Dressed(a) => &a.output,
            Command::Verify(a) => &a.output,
            Command::Residual(a) => &a.output,
        }
    }
}

fn execute(command: &Command) -> Result<Emission, Failure> {
    match command {
        Command::Families(out) => Ok(Emission::ok(cmd_families(out.format))),
        Command::Spectrum(args) => cmd_spectrum(args),
        Command::Dressed(args) => cmd_dressed(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Residual(args) => cmd_residual(args),
    }
}

impl FamilyArgs {
    fn resolve(&self) -> Result<PotentialFamily, Failure> {
        let given = [
            ("mass", self.mass),
            ("omega", self.omega),
            ("v0", self.v0),
            ("lambda", self.lambda),
            ("r1", self.r1),
            ("q", self.q),
        ];
        let (flag, wanted): (&str, &[&str]) = match self.family {
            FamilyChoice::Harmonic => ("harmonic", &["mass", "omega"]),
            FamilyChoice::Morse => ("morse", &["v0", "lambda", "mass"]),
            FamilyChoice::Scaling => ("scaling", &["r1", "q"]),
        };
        let missing: Vec<String> = wanted
            .iter()
            .filter(|w| given.iter().any(|(n, v)| n == *w && v.is_none()))
            .map(|w| format!("--{w}"))
            .collect();
        if !missing.is_empty() {
            return Err(Failure::Usage(format!(
                "--family {flag} requires {}",
                missing.join(", ")
            )));
        }
        let extra: Vec<String> = given
            .iter()
            .filter(|(n, v)| v.is_some() && !wanted.contains(n))
            .map(|(n, _)| format!("--{n}"))
            .collect();
        if !extra.is_empty() {
            return Err(Failure::Usage(format!(
                "{} not used by --family {flag}",
                extra.join(", ")
            )));
        }
        let value = |name: &str| {
            given
                .iter()
                .find(|(n, _)| *n == name)
                .and_then(|(_, v)| *v)
                .expect("checked")
        };
        let family = match self.family {
            FamilyChoice::Harmonic => PotentialFamily::harmonic(value("mass"), value("omega")),
            FamilyChoice::Morse => PotentialFamily::morse(value("v0"), value("lambda"), value("mass")),
            FamilyChoice::Scaling => PotentialFamily::scaling(value("r1"), value("q")),
        }?;
        Ok(family.with_hbar(self.hbar)?)
    }
}

impl GridArgs {
    fn resolve(&self, family: &PotentialFamily, n_levels: usize) -> Result<GridSpec, Failure> {
        let base = default_grid(family, n_levels)?;
        Ok(GridSpec::new(
            self.x_min.unwrap_or(base.x_min()),
            self.x_max.unwrap_or(base.x_max()),
            self.n_points.unwrap_or(base.n_points()),
        )?)
    }
}

struct FamilyInfo {
    name: &'static str,
    flag: &'static str,
    aliases: &'static [&'static str],
    parameters: &'static [&'static str],
    grid_supported: bool,
}

const FAMILIES: [FamilyInfo; 3] = [
    FamilyInfo {
        name: "harmonic_oscillator",
        flag: "harmonic",
        aliases: &["ho"],
        parameters: &["mass", "omega"],
        grid_supported: true,
    },
    FamilyInfo {
        name: "morse",
        flag: "morse",
        aliases: &[],
        parameters: &["v0", "lambda", "mass"],
        grid_supported: true,
    },
    FamilyInfo {
        name: "scaling_chain",
        flag: "scaling",
        aliases: &[],
        parameters: &["r1", "q"],
        grid_supported: false,
    },
];

impl FamilyInfo {
    fn operations(&self) -> Vec<&'static str> {
        let mut ops = vec!["spectrum", "dressed"];
        if self.grid_supported {
            ops.extend(["verify", "residual"]);
        }
        ops
    }
}

#[derive(Serialize)]
struct FamilyEntry {
    name: &'static str,
    flag: &'static str,
    aliases: &'static [&'static str],
    parameters: &'static [&'static str],
    grid_supported: bool,
    operations: Vec<&'static str>,
}

fn cmd_families(format: Format) -> String {
    match format {
        Format::Json => {
            let families: Vec<FamilyEntry> = FAMILIES
                .iter()
                .map(|f| FamilyEntry {
                    name: f.name,
                    flag: f.flag,
                    aliases: f.aliases,
                    parameters: f.parameters,
                    grid_supported: f.grid_supported,
                    operations: f.operations(),
                })
                .collect();
            #[derive(Serialize)]
            struct Listing {
                families: Vec<FamilyEntry>,
            }
            to_json(&Listing { families })
        }
        Format::Csv => {
            let mut csv = Csv::new(&["family", "flag", "parameters", "grid_supported"]);
            for f in &FAMILIES {
                csv.row([
                    f.name,
                    f.flag,
                    &f.parameters.join(" "),
                    if f.grid_supported { "1" } else { "0" },
                ]);
            }
            csv.finish()
        }
        Format::Table => {
            let mut table = Table::new(["family", "flag", "parameters", "grid_supported", "operations"]);
            for f in &FAMILIES {
                table.row([
                    f.name.to_string(),
                    f.flag.to_string(),
                    f.parameters.join(", "),
                    if f.grid_supported { "yes" } else { "no (analytic-only)" }.to_string(),
                    f.operations().join(", "),
                ]);
            }
            let mut out = String::new();
            table.render(&mut out);
            out
        }
    }
}

fn header(out: &mut String, family: &PotentialFamily, omega_drive: Option<f64>) {
    match omega_drive {
        Some(w) => writeln!(out, "# {family}, omega_drive={}", fmt_sig(w)),
        None => writeln!(out, "# {family}"),
    }
    .expect("write to string");
}

fn cmd_spectrum(args: &SpectrumArgs) -> Result<Emission, Failure> {
    let family = args.family.resolve()?;
    let table = spectrum_table(&family, args.drive.omega_drive, args.levels)?;
    Ok(Emission::ok(render_spectrum(&table, args.output.format)))
}

fn render_spectrum(table: &SpectrumTable, format: Format) -> String {
    match format {
        Format::Json => to_json(table),
        Format::Csv => {
            let mut csv = Csv::new(&["m", "e_minus", "e_plus", "epsilon"]);
            let g = fmt_sig(table.ground);
            csv.row(["-1", &g, &g, &g]);
            for lvl in &table.levels {
                csv.row([
                    lvl.m.to_string(),
                    fmt_sig(lvl.e_minus),
                    fmt_sig(lvl.e_plus),
                    fmt_sig(lvl.epsilon),
                ]);
            }
            csv.finish()
        }
        Format::Table => {
            let mut out = String::new();
            header(&mut out, &table.family, Some(table.omega_drive));
            let mut t = Table::new(["m", "e_minus", "e_plus", "epsilon"]);
            t.row([
                "ground".to_string(),
                fmt_sig(table.ground),
                String::new(),
                String::new(),
            ]);
            for lvl in &table.levels {
                t.row([
                    lvl.m.to_string(),
                    fmt_sig(lvl.e_minus),
                    fmt_sig(lvl.e_plus),
                    fmt_sig(lvl.epsilon),
                ]);
            }
            t.render(&mut out);
            out
        }
    }
}

#[derive(Serialize)]
struct DressedOutput<'a> {
    family: PotentialFamily,
    hbar: f64,
    omega_drive: f64,
    n_max: usize,
    basis: Vec<BasisLabel>,
    matrix: Vec<Vec<f64>>,
    blocks: Vec<PairBlock>,
    levels: &'a [LevelComparison],
    max_deviation: f64,
    threshold: f64,
}

fn cmd_dressed(args: &DressedArgs) -> Result<Emission, Failure> {
    let family = args.family.resolve()?;
    let omega = args.drive.omega_drive;
    let h = h_matrix(&family, omega, args.n_max)?;
    let spectrum: DressedSpectrum = diagonalize_dressed(&family, omega, args.n_max)?;
    let dim = h.basis.dim();
    let matrix: Vec<Vec<f64>> = (0..dim)
        .map(|i| (0..dim).map(|j| h.matrix.get(i, j)).collect())
        .collect();
    let blocks = pair_blocks(&h);

    let body = match args.output.format {
        Format::Json => to_json(&DressedOutput {
            family,
            hbar: family.hbar(),
            omega_drive: omega,
            n_max: args.n_max,
            basis: h.basis.labels(),
            matrix,
            blocks,
            levels: &spectrum.levels,
            max_deviation: spectrum.max_deviation,
            threshold: DRESSED_THRESHOLD,
        }),
        Format::Csv => {
            let mut csv = Csv::new(&["m", "branch", "analytic", "numeric", "deviation"]);
            for lvl in &spectrum.levels {
                let (m, b) = label_columns(lvl.label);
                csv.row([
                    m,
                    b,
                    fmt_sig(lvl.analytic),
                    fmt_sig(lvl.numeric),
                    fmt_sig(lvl.deviation),
                ]);
            }
            csv.finish()
        }
        Format::Table => {
            let mut out = String::new();
            header(&mut out, &family, Some(omega));
            writeln!(out, "n_max={}, dim={dim}\n\nh_matrix:", args.n_max).expect("write to string");
            let labels = h.basis.labels();
            let mut t = Table::new(std::iter::once(String::new()).chain(labels.iter().map(|l| l.to_string())));
            for (label, row) in labels.iter().zip(&matrix) {
                t.row(std::iter::once(label.to_string()).chain(row.iter().map(|&v| fmt_sig(v))));
            }
            t.render(&mut out);

            out.push_str("\npair blocks (u_m, v_m+1):\n");
            let mut t = Table::new(["m", "h_uu", "h_vv", "h_uv"]);
            for b in &blocks {
                t.row([
                    b.m.to_string(),
                    fmt_sig(b.upper_diagonal),
                    fmt_sig(b.lower_diagonal),
                    fmt_sig(b.coupling),
                ]);
            }
            t.render(&mut out);

            out.push_str("\neigenvalues:\n");
            let mut t = Table::new(["level", "analytic", "numeric", "deviation"]);
            for lvl in &spectrum.levels {
                t.row([
                    lvl.label.to_string(),
                    fmt_sig(lvl.analytic),
                    fmt_sig(lvl.numeric),
                    fmt_sig(lvl.deviation),
                ]);
            }
            t.render(&mut out);
            writeln!(
                out,
                "\nmax_deviation {} (threshold {})",
                fmt_sig(spectrum.max_deviation),
                fmt_sig(DRESSED_THRESHOLD)
            )
            .expect("write to string");
            out
        }
    };
    let failed = (spectrum.max_deviation.is_nan() || spectrum.max_deviation > DRESSED_THRESHOLD).then(|| {
        format!(
            "dressed-matrix eigenvalues deviate from the closed form by {} (threshold {})",
            fmt_sig(spectrum.max_deviation),
            fmt_sig(DRESSED_THRESHOLD)
        )
    });
    Ok(Emission { body, failed })
}

#[derive(Serialize)]
struct ConvergenceView<'a> {
    steps: &'a [ConvergenceStep],
    orders: &'a [LevelOrder],
    max_error_order: Option<f64>,
}

#[derive(Serialize)]
struct VerifyOutput<'a> {
    tolerance: f64,
    passed: bool,
    report: &'a VerificationReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    convergence: Option<ConvergenceView<'a>>,
}

fn cmd_verify(args: &VerifyArgs) -> Result<Emission, Failure> {
    let family = args.family.resolve()?;
    if !family.grid_supported() {
        return Err(Error::UnsupportedFamily {
            family: family.name(),
            operation: "verify",
        }
        .into());
    }
    if args.tolerance.is_nan() || args.tolerance < 0.0 {
        return Err(Failure::Usage(format!(
            "--tolerance must be >= 0, got {}",
            args.tolerance
        )));
    }
    let omega = args.drive.omega_drive;
    let grid = args.grid.resolve(&family, args.levels)?;

    let study: Option<ConvergenceStudy> = args
        .converge
        .then(|| convergence_study(&family, omega, &grid, args.levels))
        .transpose()?;
    let report = match &study {
        Some(s) => s.report.clone(),
        None => verify_spectrum(&family, omega, &grid, args.levels)?,
    };

    if let Some(path) = &args.eigvec_csv {
        let ham = build_two_channel(&family, omega, &grid)?;
        let csv = eigenvector_csv(&ham, args.eigvec_count)?;
        std::fs::write(path, csv).map_err(|e| Failure::Io(path.clone(), e))?;
    }

    let passed = report.within(args.tolerance);
    let body = match args.output.format {
        Format::Json => to_json(&VerifyOutput {
            tolerance: args.tolerance,
            passed,
            report: &report,
            convergence: study.as_ref().map(|s| ConvergenceView {
                steps: &s.steps,
                orders: &s.orders,
                max_error_order: s.max_error_order,
            }),
        }),
        Format::Csv => {
            let mut csv = Csv::new(&["m", "branch", "analytic", "numeric", "abs_error", "rel_error"]);
            for lvl in &report.levels {
                let (m, b) = label_columns(lvl.label);
                csv.row([
                    m,
                    b,
                    fmt_sig(lvl.analytic),
                    fmt_sig(lvl.numeric),
                    fmt_sig(lvl.abs_error),
                    fmt_sig(lvl.rel_error),
                ]);
            }
            let mut out = csv.finish();
            if let Some(s) = &study {
                out.push('\n');
                let mut csv = Csv::new(&["h", "n_points", "max_rel_error", "order"]);
                for (i, step) in s.steps.iter().enumerate() {
                    let p = order_between(&s.steps, i);
                    csv.row([
                        fmt_sig(step.h),
                        step.n_points.to_string(),
                        fmt_sig(step.max_rel_error),
                        p,
                    ]);
                }
                out.push_str(&csv.finish());
            }
            out
        }
        Format::Table => render_verify_table(&family, &report, study.as_ref(), args.tolerance, passed),
    };
    let failed = (!passed).then(|| {
        format!(
            "largest rel_error {} exceeds the tolerance {}",
            fmt_sig(report.max_rel_error()),
            fmt_sig(args.tolerance)
        )
    });
    Ok(Emission { body, failed })
}

/// Order of the largest error between step `i - 1` and step `i`; empty for
/// the first step or below the precision floor.
fn order_between(steps: &[ConvergenceStep], i: usize) -> String {
    if i == 0 {
        return String::new();
    }
    let (a, b) = (steps[i - 1].max_rel_error, steps[i].max_rel_error);
    if a >= crate::grid::PRECISION_FLOOR && b >= crate::grid::PRECISION_FLOOR {
        fmt_sig((a / b).log2())
    } else {
        String::new()
    }
}

fn render_verify_table(
    family: &PotentialFamily,
    report: &VerificationReport,
    study: Option<&ConvergenceStudy>,
    tolerance: f64,
    passed: bool,
) -> String {
    let mut out = String::new();
    header(&mut out, family, Some(report.omega_drive));
    let g = &report.grid;
    writeln!(
        out,
        "grid: x in [{}, {}], n_points={}, h={}\n",
        fmt_sig(g.x_min()),
        fmt_sig(g.x_max()),
        g.n_points(),
        fmt_sig(g.h())
    )
    .expect("write to string");
    let mut t = Table::new(["level", "analytic", "numeric", "abs_error", "rel_error"]);
    for lvl in &report.levels {
        t.row([
            lvl.label.to_string(),
            fmt_sig(lvl.analytic),
            fmt_sig(lvl.numeric),
            fmt_sig(lvl.abs_error),
            fmt_sig(lvl.rel_error),
        ]);
    }
    t.render(&mut out);
    writeln!(out, "\nground_leakage {}", fmt_sig(report.ground_leakage)).expect("write to string");

    if let Some(s) = study {
        out.push_str("\nconvergence:\n");
        let mut t = Table::new(["h", "n_points", "max_rel_error", "order"]);
        for (i, step) in s.steps.iter().enumerate() {
            t.row([
                fmt_sig(step.h),
                step.n_points.to_string(),
                fmt_sig(step.max_rel_error),
                order_between(&s.steps, i),
            ]);
        }
        t.render(&mut out);
        out.push('\n');
        let mut t = Table::new(["level", "p(h,h/2)", "p(h/2,h/4)"]);
        for lvl in &s.orders {
            let cells = lvl
                .orders
                .iter()
                .map(|p| p.map(fmt_sig).unwrap_or_else(|| "floor".into()));
            t.row(std::iter::once(lvl.label.to_string()).chain(cells));
        }
        t.render(&mut out);
        if let Some(r) = report.convergence_ratio {
            writeln!(out, "\nconvergence_ratio {}", fmt_sig(r)).expect("write to string");
        }
    }
    writeln!(
        out,
        "\nmax_rel_error {} tolerance {}: {}",
        fmt_sig(report.max_rel_error()),
        fmt_sig(tolerance),
        if passed { "pass" } else { "FAIL" }
    )
    .expect("write to string");
    out
}

#[derive(Serialize)]
struct ResidualRow {
    n_points: usize,
    h: f64,
    residual: f64,
}

#[derive(Serialize)]
struct ResidualOutput {
    family: PotentialFamily,
    hbar: f64,
    remainder_shift: f64,
    x_min: f64,
    x_max: f64,
    runs: [ResidualRow; 2],
    ratio: f64,
    ratio_range: [f64; 2],
    passed: bool,
}

fn cmd_residual(args: &ResidualArgs) -> Result<Emission, Failure> {
    let family = args.family.resolve()?;
    if !family.grid_supported() {
        return Err(Error::UnsupportedFamily {
            family: family.name(),
            operation: "residual",
        }
        .into());
    }
    let coarse = args.grid.resolve(&family, 1)?;
    let fine = coarse.refined();
    let shift = if args.break_remainder { 1.0 } else { 0.0 };
    let runs = [coarse, fine].map(|g| -> Result<ResidualRow, Error> {
        Ok(ResidualRow {
            n_points: g.n_points(),
            h: g.h(),
            residual: shape_invariance_residual(&family, &g, shift)?,
        })
    });
    let [a, b] = runs;
    let runs = [a?, b?];
    let ratio = runs[0].residual / runs[1].residual;
    let (lo, hi) = RESIDUAL_RATIO_RANGE;
    let passed = (lo..=hi).contains(&ratio);

    let body = match args.output.format {
        Format::Json => to_json(&ResidualOutput {
            family,
            hbar: family.hbar(),
            remainder_shift: shift,
            x_min: coarse.x_min(),
            x_max: coarse.x_max(),
            runs,
            ratio,
            ratio_range: [lo, hi],
            passed,
        }),
        Format::Csv => {
            let mut csv = Csv::new(&["n_points", "h", "residual"]);
            for r in &runs {
                csv.row([r.n_points.to_string(), fmt_sig(r.h), fmt_sig(r.residual)]);
            }
            csv.finish()
        }
        Format::Table => {
            let mut out = String::new();
            header(&mut out, &family, None);
            if args.break_remainder {
                out.push_str("# remainder deliberately shifted by +1\n");
            }
            writeln!(
                out,
                "domain: [{}, {}]\n",
                fmt_sig(coarse.x_min()),
                fmt_sig(coarse.x_max())
            )
            .expect("write to string");
            let mut t = Table::new(["n_points", "h", "residual"]);
            for r in &runs {
                t.row([r.n_points.to_string(), fmt_sig(r.h), fmt_sig(r.residual)]);
            }
            t.render(&mut out);
            writeln!(
                out,
                "\nratio {} (accepted [{}, {}]): {}",
                fmt_sig(ratio),
                fmt_sig(lo),
                fmt_sig(hi),
                if passed { "pass" } else { "FAIL" }
            )
            .expect("write to string");
            out
        }
    };
    let failed = (!passed).then(|| {
        format!(
            "residual ratio {} under h -> h/2 is outside [{}, {}]",
            fmt_sig(ratio),
            fmt_sig(lo),
            fmt_sig(hi)
        )
    });
    Ok(Emission { body, failed })
}
