//! Command-line front end for the measure-inversion toolkit.
//!
//! Four subcommands cover the pipeline: `transform` tabulates the
//! Fourier–Stieltjes transform and certifies the spectral floor, `invert`
//! computes a convolution inverse with evidence, `bounds` evaluates every
//! norm bound whose hypotheses hold, and `sweep` searches for extremal
//! inverse norms across a grid of floors.
//!
//! Every run that produces artifacts writes them into `--out` together
//! with exactly one `manifest.json` recording the command, the full
//! configuration, the seed, the tool version, SHA-256 digests of all input
//! files, and start/end timestamps. Timestamps live only in the manifest,
//! so data artifacts are byte-identical across reruns of the same command.
//!
//! Exit codes: 0 success, 2 a requested method's hypothesis fails,
//! 3 infeasible or singular input, 64 usage error, 65 input parse error.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use chrono::{SecondsFormat, Utc};
use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;
use sha2::{Digest, Sha256};

use minv_core::bounds::{self, BoundsError};
use minv_core::format::{self, FormatError};
use minv_core::group::GroupSpec;
use minv_core::inversion::{self, InversionError, InversionResult};
use minv_core::measure::DiscreteMeasure;
use minv_core::search::{gap_sweep, sweep_to_csv, SearchConfig, SearchError};
use minv_core::spectra::{self, SpectraError, SpectrumProfile};

const EXIT_NOT_APPLICABLE: u8 = 2;
const EXIT_INFEASIBLE: u8 = 3;
const EXIT_USAGE: u8 = 64;
const EXIT_PARSE: u8 = 65;

/// Certified-gap target used whenever a lattice floor has to be bracketed
/// by grid sampling (`transform` on lattices, `--delta-from grid`).
const GRID_TARGET_GAP: f64 = 1e-3;
/// Default per-axis mesh budget for that bracketing.
const DEFAULT_MESH_BUDGET: usize = 1024;

#[derive(Parser)]
#[command(
    name = "minv",
    version,
    about = "Inversion toolkit for atomic measures on abelian groups"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate the transform of a measure and certify its spectral floor.
    Transform {
        /// Measure file (JSON: {"group": "...", "atoms": [...]}).
        measure_file: PathBuf,
        /// Per-axis mesh budget for lattice measures (grid refinement stops
        /// here). Finite duals are enumerated exactly and take no mesh.
        #[arg(long)]
        mesh: Option<usize>,
        /// Output directory for spectrum.csv and manifest.json.
        #[arg(long)]
        out: PathBuf,
    },
    /// Compute a convolution inverse and store it with its evidence.
    Invert {
        /// Measure file (JSON).
        measure_file: PathBuf,
        /// Inversion route; `auto` tries neumann, then nikolski, then dense.
        #[arg(long, value_enum, default_value_t = MethodArg::Auto)]
        method: MethodArg,
        /// Series truncation tolerance (residual target).
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        /// Output directory for inverse.json and manifest.json.
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate every norm bound whose hypotheses the measure satisfies.
    Bounds {
        /// Measure file (JSON).
        measure_file: PathBuf,
        /// Where the spectral floor comes from: the exact finite dual, or a
        /// certified grid bracket. Defaults by group type.
        #[arg(long, value_enum)]
        delta_from: Option<DeltaFromArg>,
        /// Output directory for report.json and manifest.json.
        #[arg(long)]
        out: PathBuf,
    },
    /// Search for extremal inverse norms across a grid of spectral floors.
    Sweep {
        /// Ambient group, e.g. "Z32", "Z2^4", "Z6xZ4".
        #[arg(long)]
        group: String,
        /// Comma-separated floor grid, each value in (1/2, 1].
        #[arg(long, value_delimiter = ',')]
        deltas: Vec<f64>,
        /// Seed for all randomness in the run.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Annealing restarts per grid point.
        #[arg(long, default_value_t = 8)]
        restarts: u32,
        /// Annealing steps per restart.
        #[arg(long, default_value_t = 2000)]
        steps: u32,
        /// Worker threads (1 keeps the run single-threaded).
        #[arg(long, default_value_t = 1)]
        workers: usize,
        /// Restrict the search to real measures.
        #[arg(long)]
        real_only: bool,
        /// Output directory for sweep.csv and manifest.json.
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Dense,
    Neumann,
    Nikolski,
    Auto,
}

impl MethodArg {
    fn as_str(self) -> &'static str {
        match self {
            MethodArg::Dense => "dense",
            MethodArg::Neumann => "neumann",
            MethodArg::Nikolski => "nikolski",
            MethodArg::Auto => "auto",
        }
    }
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum DeltaFromArg {
    Exact,
    Grid,
}

impl DeltaFromArg {
    fn as_str(self) -> &'static str {
        match self {
            DeltaFromArg::Exact => "exact",
            DeltaFromArg::Grid => "grid",
        }
    }
}

/// A command failure carrying the exit code contract.
enum Failure {
    NotApplicable(String),
    Infeasible(String),
    Usage(String),
    Parse(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::NotApplicable(_) => EXIT_NOT_APPLICABLE,
            Failure::Infeasible(_) => EXIT_INFEASIBLE,
            Failure::Usage(_) => EXIT_USAGE,
            Failure::Parse(_) => EXIT_PARSE,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::NotApplicable(m)
            | Failure::Infeasible(m)
            | Failure::Usage(m)
            | Failure::Parse(m) => m,
        }
    }
}

fn from_format(e: FormatError) -> Failure {
    Failure::Parse(e.to_string())
}

fn from_spectra(e: SpectraError) -> Failure {
    match e {
        SpectraError::InfiniteGroup(_) | SpectraError::NotLattice(_) => {
            Failure::NotApplicable(e.to_string())
        }
        SpectraError::GroupTooLarge { .. }
        | SpectraError::GridTooLarge { .. }
        | SpectraError::MeshTooSmall(_) => Failure::Usage(e.to_string()),
        SpectraError::BudgetExceeded { .. } => Failure::Infeasible(e.to_string()),
        SpectraError::Measure(_) | SpectraError::Group(_) => Failure::Parse(e.to_string()),
    }
}

fn from_inversion(e: InversionError) -> Failure {
    match e {
        InversionError::NotApplicable(_) => Failure::NotApplicable(e.to_string()),
        InversionError::Singular { .. } | InversionError::PathDisagreement { .. } => {
            Failure::Infeasible(e.to_string())
        }
        InversionError::BadTolerance(_) => Failure::Usage(e.to_string()),
        InversionError::Spectra(s) => from_spectra(s),
        InversionError::Measure(_) | InversionError::Group(_) => Failure::Parse(e.to_string()),
    }
}

fn from_bounds(e: BoundsError) -> Failure {
    match e {
        BoundsError::PreconditionViolated(_) | BoundsError::DomainError(_) => {
            Failure::NotApplicable(e.to_string())
        }
        BoundsError::Measure(_) | BoundsError::Group(_) => Failure::Parse(e.to_string()),
    }
}

fn from_search(e: SearchError) -> Failure {
    match e {
        SearchError::BadConfig(_) => Failure::Usage(e.to_string()),
        SearchError::Infeasible { .. } => Failure::Infeasible(e.to_string()),
        SearchError::Spectra(s) => from_spectra(s),
        SearchError::Inversion(i) => from_inversion(i),
        SearchError::Measure(_) => Failure::Parse(e.to_string()),
        SearchError::Bounds(b) => from_bounds(b),
    }
}

#[derive(Serialize)]
struct InputDigest {
    path: String,
    sha256: String,
}

/// The reproducibility record written next to every artifact set.
#[derive(Serialize)]
struct ExperimentManifest {
    command: &'static str,
    config: serde_json::Value,
    /// Seed for commands that consume randomness; absent otherwise.
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    tool_version: &'static str,
    inputs: Vec<InputDigest>,
    started_at: String,
    finished_at: String,
}

fn now_rfc3339() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Micros, true)
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .fold(String::with_capacity(64), |mut acc, b| {
            let _ = write!(acc, "{b:02x}");
            acc
        })
}

fn io_failure(context: &Path, e: io::Error) -> Failure {
    Failure::Parse(format!("{}: {e}", context.display()))
}

/// Reads an input file and fingerprints it for the manifest.
fn read_input(path: &Path) -> Result<(String, InputDigest), Failure> {
    let bytes = fs::read(path).map_err(|e| io_failure(path, e))?;
    let digest = InputDigest {
        path: path.display().to_string(),
        sha256: sha256_hex(&bytes),
    };
    let text = String::from_utf8(bytes)
        .map_err(|e| Failure::Parse(format!("{}: {e}", path.display())))?;
    Ok((text, digest))
}

fn read_measure(path: &Path) -> Result<(DiscreteMeasure, InputDigest), Failure> {
    let (text, digest) = read_input(path)?;
    let mu = format::measure_from_json(&text).map_err(from_format)?;
    Ok((mu, digest))
}

fn prepare_out(dir: &Path) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(|e| io_failure(dir, e))
}

fn write_artifact(path: &Path, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents).map_err(|e| io_failure(path, e))
}

fn write_manifest(dir: &Path, manifest: &ExperimentManifest) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(manifest)
        .expect("manifest serialization cannot fail");
    write_artifact(&dir.join("manifest.json"), &format!("{text}\n"))
}

/// Renders a profile as CSV: one metadata line, a column header, then one
/// row per dual point with coordinates, real part, imaginary part, and
/// modulus. All floats use the shortest representation that round-trips.
fn spectrum_csv(profile: &SpectrumProfile, dims: usize) -> String {
    let mut out = format!(
        "# exact={},certified_min={},certified_max_gap={}\n",
        profile.exact(),
        profile.certified_min(),
        profile.certified_max_gap()
    );
    let mut cols: Vec<String> = (0..dims).map(|i| format!("gamma{i}")).collect();
    cols.extend(["re", "im", "modulus"].map(String::from));
    out.push_str(&cols.join(","));
    out.push('\n');
    for (gamma, v) in profile.values() {
        let mut fields: Vec<String> = gamma
            .coords_f64()
            .iter()
            .map(|c| c.to_string())
            .collect();
        fields.push(v.re.to_string());
        fields.push(v.im.to_string());
        fields.push(v.norm().to_string());
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

/// Resolves the spectral floor: exactly over a finite dual, or as a
/// certified grid bracket on a lattice. Returns the floor and whether it
/// is exact.
fn resolve_delta(
    mu: &DiscreteMeasure,
    from: Option<DeltaFromArg>,
) -> Result<(f64, bool), Failure> {
    let is_finite = matches!(mu.group(), GroupSpec::Finite { .. });
    match (from, is_finite) {
        (Some(DeltaFromArg::Exact) | None, true) => {
            Ok((spectra::spectral_min(mu).map_err(from_spectra)?, true))
        }
        (Some(DeltaFromArg::Grid), false) | (None, false) => {
            let profile = spectra::refine_until(mu, GRID_TARGET_GAP, DEFAULT_MESH_BUDGET)
                .map_err(from_spectra)?;
            Ok((profile.certified_min(), false))
        }
        (Some(DeltaFromArg::Exact), false) => Err(Failure::NotApplicable(
            "the exact floor needs a finite dual; use --delta-from grid".into(),
        )),
        (Some(DeltaFromArg::Grid), true) => Err(Failure::NotApplicable(
            "grid bracketing applies to lattice measures; use --delta-from exact".into(),
        )),
    }
}

fn cmd_transform(measure_file: &Path, mesh: Option<usize>, out: &Path) -> Result<u8, Failure> {
    let started_at = now_rfc3339();
    let (mu, digest) = read_measure(measure_file)?;
    let dims = mu.group().dims();

    let (profile, budget_hit) = match mu.group() {
        GroupSpec::Finite { .. } => {
            if mesh.is_some() {
                return Err(Failure::Usage(
                    "--mesh applies to lattice measures; finite duals are enumerated exactly"
                        .into(),
                ));
            }
            (spectra::transform(&mu).map_err(from_spectra)?, false)
        }
        GroupSpec::Lattice { .. } => {
            let budget = mesh.unwrap_or(DEFAULT_MESH_BUDGET);
            match spectra::refine_until(&mu, GRID_TARGET_GAP, budget) {
                Ok(profile) => (profile, false),
                // The budget ran out: persist the best certificate obtained
                // and signal the shortfall through the exit code.
                Err(SpectraError::BudgetExceeded { best, .. }) => (*best, true),
                Err(e) => return Err(from_spectra(e)),
            }
        }
    };

    prepare_out(out)?;
    write_artifact(&out.join("spectrum.csv"), &spectrum_csv(&profile, dims))?;
    write_manifest(
        out,
        &ExperimentManifest {
            command: "transform",
            config: json!({
                "measure_file": measure_file.display().to_string(),
                "mesh": mesh,
                "out": out.display().to_string(),
                "target_gap": GRID_TARGET_GAP,
            }),
            seed: None,
            tool_version: env!("CARGO_PKG_VERSION"),
            inputs: vec![digest],
            started_at,
            finished_at: now_rfc3339(),
        },
    )?;

    println!(
        "transform: points={} exact={} delta_observed={} delta_lower={}{}",
        profile.values().len(),
        profile.exact(),
        profile.observed_min(),
        profile.certified_min(),
        if budget_hit {
            " (mesh budget exhausted before reaching the target gap)"
        } else {
            ""
        }
    );
    Ok(if budget_hit { EXIT_INFEASIBLE } else { 0 })
}

/// The `auto` ladder: dominant-atom series first, hermitian factorization
/// second, dense solve last. Returns the first success, or an error
/// explaining every failed rung.
fn invert_auto(mu: &DiscreteMeasure, tol: f64) -> Result<InversionResult, Failure> {
    let mut reasons: Vec<String> = Vec::new();

    match inversion::neumann_invert(mu, tol) {
        Ok(r) => return Ok(r),
        Err(InversionError::NotApplicable(why)) => reasons.push(format!("neumann: {why}")),
        Err(e) => return Err(from_inversion(e)),
    }

    match resolve_delta(mu, None)
        .and_then(|(delta, _)| inversion::nikolski_invert(mu, delta, tol).map_err(from_inversion))
    {
        Ok(r) => return Ok(r),
        Err(f) => match f {
            Failure::NotApplicable(why) => reasons.push(format!("nikolski: {why}")),
            other => return Err(other),
        },
    }

    match inversion::dense_invert(mu) {
        Ok(r) => Ok(r),
        Err(e @ InversionError::Singular { .. }) => Err(from_inversion(e)),
        Err(e) => {
            reasons.push(format!("dense: {e}"));
            Err(Failure::NotApplicable(format!(
                "no inversion route applies: {}",
                reasons.join("; ")
            )))
        }
    }
}

fn cmd_invert(
    measure_file: &Path,
    method: MethodArg,
    tol: f64,
    out: &Path,
) -> Result<u8, Failure> {
    let started_at = now_rfc3339();
    let (mu, digest) = read_measure(measure_file)?;

    let result = match method {
        MethodArg::Dense => inversion::dense_invert(&mu).map_err(from_inversion)?,
        MethodArg::Neumann => inversion::neumann_invert(&mu, tol).map_err(from_inversion)?,
        MethodArg::Nikolski => {
            let (delta, _) = resolve_delta(&mu, None)?;
            inversion::nikolski_invert(&mu, delta, tol).map_err(from_inversion)?
        }
        MethodArg::Auto => invert_auto(&mu, tol)?,
    };

    prepare_out(out)?;
    write_artifact(
        &out.join("inverse.json"),
        &format!("{}\n", format::inversion_to_json(&result)),
    )?;
    write_manifest(
        out,
        &ExperimentManifest {
            command: "invert",
            config: json!({
                "measure_file": measure_file.display().to_string(),
                "method": method.as_str(),
                "tol": tol,
                "out": out.display().to_string(),
            }),
            seed: None,
            tool_version: env!("CARGO_PKG_VERSION"),
            inputs: vec![digest],
            started_at,
            finished_at: now_rfc3339(),
        },
    )?;

    println!(
        "invert: method={} norm={} residual={:e} guarantee={}",
        result.method.as_str(),
        result.inverse_norm,
        result.residual,
        result
            .guarantee
            .map_or_else(|| "none".to_string(), |g| g.to_string()),
    );
    Ok(0)
}

fn cmd_bounds(
    measure_file: &Path,
    delta_from: Option<DeltaFromArg>,
    out: &Path,
) -> Result<u8, Failure> {
    let started_at = now_rfc3339();
    let (mu, digest) = read_measure(measure_file)?;
    let (delta, exact) = resolve_delta(&mu, delta_from)?;

    // Observed norm: the oracle on finite groups, the truncated series on
    // lattices; a measure outside every hypothesis still gets a report.
    let observed = match mu.group() {
        GroupSpec::Finite { .. } => inversion::dense_invert(&mu).ok().map(|r| r.inverse_norm),
        GroupSpec::Lattice { .. } => {
            inversion::neumann_invert(&mu, 1e-9).ok().map(|r| r.inverse_norm)
        }
    };

    let report = bounds::build_report(&mu, delta, exact, observed).map_err(from_bounds)?;

    prepare_out(out)?;
    write_artifact(&out.join("report.json"), &format!("{}\n", report.to_json()))?;
    write_manifest(
        out,
        &ExperimentManifest {
            command: "bounds",
            config: json!({
                "measure_file": measure_file.display().to_string(),
                "delta_from": delta_from.map(DeltaFromArg::as_str),
                "out": out.display().to_string(),
            }),
            seed: None,
            tool_version: env!("CARGO_PKG_VERSION"),
            inputs: vec![digest],
            started_at,
            finished_at: now_rfc3339(),
        },
    )?;

    print!("{}", report.render_text());
    Ok(0)
}

#[allow(clippy::too_many_arguments)]
fn cmd_sweep(
    group_str: &str,
    deltas: &[f64],
    seed: u64,
    restarts: u32,
    steps: u32,
    workers: usize,
    real_only: bool,
    out: &Path,
) -> Result<u8, Failure> {
    let started_at = now_rfc3339();
    if deltas.is_empty() {
        return Err(Failure::Usage(
            "at least one --deltas value is required".into(),
        ));
    }
    let group = format::parse_group_spec(group_str)
        .map_err(|e| Failure::Usage(format!("--group: {e}")))?;

    let base = SearchConfig {
        group: group.clone(),
        delta_target: deltas[0],
        real_only,
        restarts,
        steps,
        init_scale: 0.3,
        decay: 0.998,
        seed,
        workers,
    };
    let rows = gap_sweep(&group, deltas, &base).map_err(from_search)?;

    prepare_out(out)?;
    write_artifact(&out.join("sweep.csv"), &sweep_to_csv(&rows, seed, restarts))?;
    write_manifest(
        out,
        &ExperimentManifest {
            command: "sweep",
            config: json!({
                "group": group_str,
                "deltas": deltas,
                "seed": seed,
                "restarts": restarts,
                "steps": steps,
                "workers": workers,
                "real_only": real_only,
                "init_scale": base.init_scale,
                "decay": base.decay,
                "out": out.display().to_string(),
            }),
            seed: Some(seed),
            tool_version: env!("CARGO_PKG_VERSION"),
            inputs: Vec::new(),
            started_at,
            finished_at: now_rfc3339(),
        },
    )?;

    let feasible = rows.iter().filter(|r| r.best_norm.is_some()).count();
    println!(
        "sweep: group={group} rows={} feasible={feasible} out={}",
        rows.len(),
        out.display()
    );
    Ok(0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };

    let result = match &cli.command {
        Command::Transform {
            measure_file,
            mesh,
            out,
        } => cmd_transform(measure_file, *mesh, out),
        Command::Invert {
            measure_file,
            method,
            tol,
            out,
        } => cmd_invert(measure_file, *method, *tol, out),
        Command::Bounds {
            measure_file,
            delta_from,
            out,
        } => cmd_bounds(measure_file, *delta_from, out),
        Command::Sweep {
            group,
            deltas,
            seed,
            restarts,
            steps,
            workers,
            real_only,
            out,
        } => cmd_sweep(
            group, deltas, *seed, *restarts, *steps, *workers, *real_only, out,
        ),
    };

    match result {
        Ok(code) => ExitCode::from(code),
        Err(failure) => {
            eprintln!("error: {}", failure.message());
            ExitCode::from(failure.code())
        }
    }
}
