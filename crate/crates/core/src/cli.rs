//! Command-line front end.
//!
//! Exit status: 0 on success, 1 for I/O failures, 2 for invalid input or
//! parameters (including usage errors), 3 when reconstruction or the
//! correction search does not converge.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::choi::{choi_of_unitary, ProcessMatrix};
use crate::correction::{optimize_correction, CorrectionReport, EulerAngles};
use crate::error::Error;
use crate::formats::{self, CountsFormat, DiagnosticsSummary, MetricsRecord};
use crate::gate::{sign_gate_unitary, NamedProgram, ProgramLabel, ProgramSpec};
use crate::metrics::ProcessMetrics;
use crate::sim::{generate_counts, ground_truth, MeanSpread, NoiseModel, Sampling};
use crate::tomography::{correct_counts, mle_reconstruct, MleOptions};

pub const EXIT_IO: u8 = 1;
pub const EXIT_VALIDATION: u8 = 2;
pub const EXIT_NON_CONVERGENCE: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "qproc", version, about = "Programmable SIGN gate simulator and process tomography")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate the 24 coincidence counts of one program.
    Simulate(SimulateArgs),
    /// Reconstruct a process matrix from a counts file.
    Reconstruct(ReconstructArgs),
    /// Fidelity, purity and entanglement of formation of one process matrix.
    Metrics(MetricsArgs),
    /// Find the fixed unitary correction shared by several process matrices.
    Correct(CorrectArgs),
    /// Table of F, P and Ef over several programs with averages.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Json,
    Csv,
}

impl From<FormatArg> for CountsFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Json => CountsFormat::Json,
            FormatArg::Csv => CountsFormat::Csv,
        }
    }
}

#[derive(Debug, Args)]
pub struct ProgramArgs {
    /// Named program phi1..phi5.
    #[arg(long, conflicts_with_all = ["theta", "phi"])]
    pub program: Option<ProgramLabel>,
    /// Polar angle of the program state in radians.
    #[arg(long, requires = "phi", allow_hyphen_values = true)]
    pub theta: Option<f64>,
    /// Azimuthal angle of the program state in radians.
    #[arg(long, requires = "theta", allow_hyphen_values = true)]
    pub phi: Option<f64>,
}

impl ProgramArgs {
    fn resolve(&self) -> Result<NamedProgram, Error> {
        match (self.program, self.theta, self.phi) {
            (Some(label), _, _) => Ok(NamedProgram::named(label)),
            (None, Some(theta), Some(phi)) => Ok(NamedProgram::custom(ProgramSpec::new(theta, phi)?)),
            _ => Err(Error::Parameter("select a program with --program or --theta/--phi".into())),
        }
    }
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub program: ProgramArgs,
    /// Mean counts per setting.
    #[arg(long, default_value_t = 10_000.0)]
    pub shots: f64,
    /// White-noise weight ε in (1−ε)χ + ε I/4.
    #[arg(long, default_value_t = 0.0)]
    pub epsilon: f64,
    /// Planted Euler offset "alpha,beta,gamma" in radians.
    #[arg(long, value_parser = parse_offset, allow_hyphen_values = true)]
    pub offset: Option<EulerAngles>,
    /// Flat accidental rate added to every setting.
    #[arg(long, default_value_t = 0.0)]
    pub accidental: f64,
    /// JSON map of projector label to detection efficiency.
    #[arg(long)]
    pub efficiencies: Option<PathBuf>,
    /// Use expected counts instead of Poisson draws.
    #[arg(long)]
    pub exact: bool,
    #[arg(long, env = "QPROC_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Counts file; the ground-truth χ goes to `<out>.truth.json`.
    #[arg(long)]
    pub out: PathBuf,
    /// Defaults to the extension of --out (csv or json).
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
}

#[derive(Debug, Args)]
pub struct ReconstructArgs {
    /// Counts file (JSON or CSV).
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Process-matrix JSON; diagnostics go to `<out>.diag.json`. Printed to
    /// stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Defaults to the extension of --in.
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
    #[arg(long, default_value_t = MleOptions::default().tol)]
    pub tol: f64,
    #[arg(long, default_value_t = MleOptions::default().max_iter)]
    pub max_iter: usize,
}

#[derive(Debug, Args)]
pub struct MetricsArgs {
    /// Process-matrix JSON.
    #[arg(long = "in")]
    pub input: PathBuf,
    #[command(flatten)]
    pub program: ProgramArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CorrectArgs {
    /// Process-matrix JSON files, one per --program.
    #[arg(long = "in", required = true)]
    pub inputs: Vec<PathBuf>,
    /// Target programs in the order of the inputs; defaults to phi1..phi5.
    #[arg(long = "program")]
    pub programs: Vec<ProgramLabel>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Process-matrix JSON files, one per --program.
    #[arg(long = "in", required = true)]
    pub inputs: Vec<PathBuf>,
    /// Target programs in the order of the inputs; defaults to phi1..phi5.
    #[arg(long = "program")]
    pub programs: Vec<ProgramLabel>,
    /// Also search the fixed unitary correction and report corrected values.
    #[arg(long)]
    pub correct: bool,
    /// JSON report file; the text table always goes to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn parse_offset(s: &str) -> Result<EulerAngles, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(format!("expected three comma-separated angles, got {s:?}"));
    }
    let mut v = [0.0; 3];
    for (slot, part) in v.iter_mut().zip(&parts) {
        *slot = part
            .parse::<f64>()
            .map_err(|e| format!("angle {part:?}: {e}"))?;
        if !slot.is_finite() {
            return Err(format!("angle {part:?} is not finite"));
        }
    }
    Ok(EulerAngles::new(v[0], v[1], v[2]))
}

#[derive(Debug)]
pub enum CliError {
    Io { path: PathBuf, source: std::io::Error },
    Run(Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io { .. } => EXIT_IO,
            CliError::Run(e) if e.is_validation() => EXIT_VALIDATION,
            CliError::Run(_) => EXIT_NON_CONVERGENCE,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Io { path, source } => write!(f, "{}: {source}", path.display()),
            CliError::Run(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Run(e)
    }
}

fn in_file(path: &Path, e: Error) -> CliError {
    CliError::Run(match e {
        e @ Error::NonConvergence { .. } => e,
        e @ (Error::InvalidRecord { .. } | Error::MissingRecord(..) | Error::DuplicateRecord(..)) => {
            Error::Format(format!("{}: {e}", path.display()))
        }
        other => Error::Format(format!("{}: {other}", path.display())),
    })
}

fn read(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes via a temporary file in the target directory and renames it into place.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    let io_err = |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err)?;
    tmp.write_all(contents).map_err(io_err)?;
    tmp.as_file().sync_all().map_err(io_err)?;
    tmp.persist(path).map_err(|e| io_err(e.error))?;
    Ok(())
}

fn emit(out: Option<&Path>, contents: &str) -> Result<(), CliError> {
    match out {
        Some(path) => write_atomic(path, contents.as_bytes()),
        None => {
            print!("{contents}");
            Ok(())
        }
    }
}

/// `<path><suffix>`, e.g. `counts.json` → `counts.json.truth.json`.
pub fn sidecar(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn format_for(path: &Path, explicit: Option<FormatArg>) -> CountsFormat {
    match explicit {
        Some(f) => f.into(),
        None => match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => CountsFormat::Csv,
            _ => CountsFormat::Json,
        },
    }
}

fn target_of(program: &NamedProgram) -> ProcessMatrix {
    choi_of_unitary(&sign_gate_unitary(&program.spec))
}

fn simulate(args: &SimulateArgs) -> Result<(), CliError> {
    let program = args.program.resolve()?;
    let efficiencies = match &args.efficiencies {
        Some(path) => formats::parse_efficiencies(&read(path)?).map_err(|e| in_file(path, e))?,
        None => Default::default(),
    };
    let noise = NoiseModel {
        white_noise: args.epsilon,
        offset: args.offset,
        mean_counts: args.shots,
        accidental_rate: args.accidental,
        efficiencies,
        sampling: if args.exact {
            Sampling::Expected
        } else {
            Sampling::Poisson
        },
    };
    let truth = ground_truth(&program.spec, &noise)?;
    let records = generate_counts(&truth, &noise, args.seed)?;
    let format = format_for(&args.out, args.format);
    write_atomic(&args.out, formats::counts_to_string(&records, format).as_bytes())?;
    write_atomic(
        &sidecar(&args.out, ".truth.json"),
        formats::process_matrix_to_json(&truth).as_bytes(),
    )?;
    Ok(())
}

fn reconstruct(args: &ReconstructArgs) -> Result<(), CliError> {
    let bytes = read(&args.input)?;
    let format = format_for(&args.input, args.format);
    let records = formats::parse_counts(&bytes, format).map_err(|e| in_file(&args.input, e))?;
    let data = correct_counts(&records).map_err(|e| in_file(&args.input, e))?;
    let options = MleOptions {
        tol: args.tol,
        max_iter: args.max_iter,
    };
    let (chi, diag) = mle_reconstruct(&data, options)?;
    let summary = formats::to_json(&DiagnosticsSummary::new(&diag, &data.clamped));
    let matrix = formats::process_matrix_to_json(&chi);
    match &args.out {
        Some(path) => {
            write_atomic(path, matrix.as_bytes())?;
            write_atomic(&sidecar(path, ".diag.json"), summary.as_bytes())?;
        }
        None => {
            print!("{matrix}");
            eprint!("{summary}");
        }
    }
    Ok(())
}

fn load_chi(path: &Path) -> Result<ProcessMatrix, CliError> {
    formats::parse_process_matrix(&read(path)?).map_err(|e| in_file(path, e))
}

fn metrics(args: &MetricsArgs) -> Result<(), CliError> {
    let program = args.program.resolve()?;
    let chi = load_chi(&args.input)?;
    let record = MetricsRecord {
        program: program.name(),
        metrics: ProcessMetrics::evaluate(&chi, &target_of(&program))?,
    };
    emit(args.out.as_deref(), &formats::to_json(&record))
}

fn programs_for(inputs: &[PathBuf], programs: &[ProgramLabel]) -> Result<Vec<NamedProgram>, Error> {
    let labels: Vec<ProgramLabel> = if programs.is_empty() {
        ProgramLabel::ALL.to_vec()
    } else {
        programs.to_vec()
    };
    if labels.len() != inputs.len() {
        return Err(Error::LengthMismatch(inputs.len(), labels.len()));
    }
    Ok(labels.into_iter().map(NamedProgram::named).collect())
}

fn load_all(inputs: &[PathBuf]) -> Result<Vec<ProcessMatrix>, CliError> {
    inputs.iter().map(|p| load_chi(p)).collect()
}

fn correct(args: &CorrectArgs) -> Result<(), CliError> {
    let programs = programs_for(&args.inputs, &args.programs)?;
    let chis = load_all(&args.inputs)?;
    let targets: Vec<ProcessMatrix> = programs.iter().map(target_of).collect();
    let result = optimize_correction(&chis, &targets)?;
    emit(args.out.as_deref(), &formats::to_json(&CorrectionReport::from(&result)))
}

#[derive(Debug, Clone, Serialize)]
pub struct MetricSummary {
    #[serde(rename = "F")]
    pub fidelity: MeanSpread,
    #[serde(rename = "P")]
    pub purity: MeanSpread,
    #[serde(rename = "Ef")]
    pub entanglement_of_formation: MeanSpread,
}

impl MetricSummary {
    fn of(rows: &[MetricsRecord]) -> Self {
        let column = |f: fn(&ProcessMetrics) -> f64| {
            MeanSpread::of(&rows.iter().map(|r| f(&r.metrics)).collect::<Vec<_>>())
        };
        Self {
            fidelity: column(|m| m.fidelity),
            purity: column(|m| m.purity),
            entanglement_of_formation: column(|m| m.entanglement_of_formation),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CorrectedSection {
    pub correction: CorrectionReport,
    pub programs: Vec<MetricsRecord>,
    pub averages: MetricSummary,
}

/// Machine-readable form of the `report` table.
#[derive(Debug, Clone, Serialize)]
pub struct ReportDocument {
    pub programs: Vec<MetricsRecord>,
    pub averages: MetricSummary,
    pub corrected: Option<CorrectedSection>,
}

/// `mean±std` with two decimals, as in `0.90±0.03`.
pub fn format_mean_spread(m: &MeanSpread) -> String {
    format!("{:.2}±{:.2}", m.mean, m.std)
}

/// Three metric rows (F, P, Ef) by one column per program plus the average.
pub fn render_table(rows: &[MetricsRecord], averages: &MetricSummary) -> String {
    let mut header = vec![String::new()];
    header.extend(rows.iter().map(|r| r.program.clone()));
    header.push("average".into());

    let mut lines: Vec<Vec<String>> = vec![header];
    let metric_rows: [(&str, fn(&ProcessMetrics) -> f64, &MeanSpread); 3] = [
        ("F", |m| m.fidelity, &averages.fidelity),
        ("P", |m| m.purity, &averages.purity),
        ("Ef", |m| m.entanglement_of_formation, &averages.entanglement_of_formation),
    ];
    for (name, get, avg) in metric_rows {
        let mut line = vec![name.to_string()];
        line.extend(rows.iter().map(|r| format!("{:.3}", get(&r.metrics))));
        line.push(format_mean_spread(avg));
        lines.push(line);
    }

    let columns = lines[0].len();
    let widths: Vec<usize> = (0..columns)
        .map(|col| lines.iter().map(|l| l[col].chars().count()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for line in &lines {
        let cells: Vec<String> = line
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(col, (cell, &w))| {
                if col == 0 {
                    format!("{cell:<w$}")
                } else {
                    format!("{cell:>w$}")
                }
            })
            .collect();
        let _ = writeln!(out, "{}", cells.join("  ").trim_end());
    }
    out
}

fn evaluate_rows(chis: &[ProcessMatrix], programs: &[NamedProgram]) -> Result<Vec<MetricsRecord>, Error> {
    chis.iter()
        .zip(programs)
        .map(|(chi, p)| {
            Ok(MetricsRecord {
                program: p.name(),
                metrics: ProcessMetrics::evaluate(chi, &target_of(p))?,
            })
        })
        .collect()
}

/// Builds the report for process matrices paired with their target programs.
pub fn build_report(
    chis: &[ProcessMatrix],
    programs: &[NamedProgram],
    with_correction: bool,
) -> Result<ReportDocument, Error> {
    if chis.len() != programs.len() {
        return Err(Error::LengthMismatch(chis.len(), programs.len()));
    }
    if chis.is_empty() {
        return Err(Error::EmptyInput);
    }
    let rows = evaluate_rows(chis, programs)?;
    let corrected = if with_correction {
        let targets: Vec<ProcessMatrix> = programs.iter().map(target_of).collect();
        let result = optimize_correction(chis, &targets)?;
        let corrected_rows = evaluate_rows(&result.corrected, programs)?;
        Some(CorrectedSection {
            correction: CorrectionReport::from(&result),
            averages: MetricSummary::of(&corrected_rows),
            programs: corrected_rows,
        })
    } else {
        None
    };
    Ok(ReportDocument {
        averages: MetricSummary::of(&rows),
        programs: rows,
        corrected,
    })
}

/// Text form of a report: the uncorrected table and, when present, the
/// corrected table with the correction angles.
pub fn render_report(doc: &ReportDocument) -> String {
    let mut out = render_table(&doc.programs, &doc.averages);
    if let Some(c) = &doc.corrected {
        let r = &c.correction;
        let _ = writeln!(
            out,
            "\ncorrection alpha={:.4} beta={:.4} gamma={:.4}  average F {:.4} -> {:.4}\n",
            r.alpha, r.beta, r.gamma, r.fbar_before, r.fbar_after
        );
        out.push_str(&render_table(&c.programs, &c.averages));
    }
    out
}

fn report(args: &ReportArgs) -> Result<(), CliError> {
    let programs = programs_for(&args.inputs, &args.programs)?;
    let chis = load_all(&args.inputs)?;
    let doc = build_report(&chis, &programs, args.correct)?;
    print!("{}", render_report(&doc));
    if let Some(path) = &args.out {
        write_atomic(path, formats::to_json(&doc).as_bytes())?;
    }
    Ok(())
}

pub fn execute(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Reconstruct(a) => reconstruct(a),
        Command::Metrics(a) => metrics(a),
        Command::Correct(a) => correct(a),
        Command::Report(a) => report(a),
    }
}

/// Parses the process arguments and runs the selected subcommand.
pub fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_VALIDATION)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
