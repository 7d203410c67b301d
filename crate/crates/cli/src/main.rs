//! Batch command-line front end for the linearised Calderón toolbox.
//!
//! One binary, one `--command` switch. Every command reads/writes the JSON
//! formats defined in `calderon-core::io` and additionally emits a
//! plot-ready CSV next to the main output. Exit codes: 0 success, 1
//! precondition violation, 2 I/O failure; errors are single-line and
//! machine-parseable on stderr.

use calderon_core::conformal::{
    boundary_constants, domain_l2_norm, invariance_check, transform_neumann,
};
use calderon_core::forward::{assemble, entry_closed_form, FourierMode, QuadratureOracle};
use calderon_core::io::{self, ConformalReportJson, OracleRow};
use calderon_core::reconstruction::{injectivity_witness, reconstruct, ReconstructionRequest};
use calderon_core::stability::{sample_a_k, verify};
use calderon_core::{QuadratureGrid, ZernikeCoeffs};
use clap::{Parser, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Command {
    /// Coefficients -> truncated data matrix.
    Forward,
    /// Data matrix -> coefficients, with the amplification table.
    Reconstruct,
    /// Coefficients -> stability report (random sign-coherent draw when no
    /// input file is given).
    Stability,
    /// Coefficients -> worst discrepancy between the closed form and the
    /// quadrature oracle over all mode pairs inside the truncation.
    OracleCheck,
    /// Coefficients + map spec -> transfer constants and invariance check.
    Conformal,
    /// Coefficients -> injectivity witness entry.
    Witness,
}

#[derive(Debug, Parser)]
#[command(name = "calderon", version, about = "Linearised Calderón problem on the unit disk")]
struct Cli {
    #[arg(long, value_enum)]
    command: Command,

    /// Input file (coefficients or matrix JSON, depending on the command).
    #[arg(long)]
    input: Option<PathBuf>,

    /// Main output file; plot CSVs are written next to it.
    #[arg(long)]
    output: PathBuf,

    /// Maximum radial layer.
    #[arg(long = "K", default_value_t = 4)]
    k_max: u32,

    /// Maximum angular frequency magnitude.
    #[arg(long = "J", default_value_t = 12)]
    j_max: u32,

    /// Matrix truncation bound on |m|, |n|.
    #[arg(long = "M", default_value_t = 64)]
    m_bound: i32,

    /// Radial quadrature nodes.
    #[arg(long = "nr", default_value_t = 128)]
    n_r: usize,

    /// Angular quadrature nodes.
    #[arg(long = "ntheta", default_value_t = 256)]
    n_theta: usize,

    /// Seed for the random draw used by `stability` without `--input`.
    #[arg(long, default_value_t = 42)]
    seed: u64,

    /// Tolerance used by `oracle-check`.
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,

    /// Conformal map description (JSON), required by `conformal`.
    #[arg(long = "map-spec")]
    map_spec: Option<PathBuf>,
}

enum CliError {
    /// Exit code 1: bad arguments, violated preconditions, malformed
    /// semantic content.
    Precondition { kind: &'static str, msg: String },
    /// Exit code 2: file system or JSON-syntax failures.
    Io { kind: &'static str, msg: String },
}

impl CliError {
    fn precondition(kind: &'static str, msg: impl Into<String>) -> Self {
        Self::Precondition {
            kind,
            msg: msg.into(),
        }
    }
}

impl From<calderon_core::Error> for CliError {
    fn from(err: calderon_core::Error) -> Self {
        use calderon_core::Error::*;
        let kind = match err {
            RadiusOutOfRange(_) => "radius_out_of_range",
            UnsupportedOrder { .. } => "unsupported_order",
            ZeroFourierMode => "zero_fourier_mode",
            InvalidModePair { .. } => "invalid_mode_pair",
            IndexOutOfBounds { .. } => "index_out_of_bounds",
            InvalidTruncation(_) => "invalid_truncation",
            TruncationTooSmall { .. } => "truncation_too_small",
            ZeroPerturbation => "zero_perturbation",
            WitnessSearchExhausted { .. } => "witness_search_exhausted",
            InvalidGrid(_) => "invalid_grid",
            InvalidMapParameters(_) => "invalid_map_parameters",
        };
        CliError::Precondition {
            kind,
            msg: err.to_string(),
        }
    }
}

impl From<io::FileError> for CliError {
    fn from(err: io::FileError) -> Self {
        match err {
            io::FileError::Io(e) => CliError::Io {
                kind: "io",
                msg: e.to_string(),
            },
            io::FileError::Json(e) => CliError::Io {
                kind: "json",
                msg: e.to_string(),
            },
            io::FileError::Format(msg) => CliError::Precondition {
                kind: "file_format",
                msg,
            },
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    configure_threads();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Precondition { kind, msg }) => {
            eprintln!("error code=1 kind={kind} msg={msg:?}");
            ExitCode::from(1)
        }
        Err(CliError::Io { kind, msg }) => {
            eprintln!("error code=2 kind={kind} msg={msg:?}");
            ExitCode::from(2)
        }
    }
}

/// `CALDERON_THREADS` caps the rayon pool; unset or invalid means default.
fn configure_threads() {
    if let Ok(value) = std::env::var("CALDERON_THREADS") {
        if let Ok(n) = value.parse::<usize>() {
            if n >= 1 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
        }
    }
}

fn plot_path(output: &Path) -> PathBuf {
    output.with_extension("plot.csv")
}

fn require_input(cli: &Cli) -> Result<&Path, CliError> {
    cli.input
        .as_deref()
        .ok_or_else(|| CliError::precondition("missing_input", "--input is required"))
}

fn load_coeffs(cli: &Cli) -> Result<ZernikeCoeffs, CliError> {
    Ok(io::read_coeffs(require_input(cli)?)?)
}

fn grid(cli: &Cli) -> Result<QuadratureGrid, CliError> {
    Ok(QuadratureGrid::new(cli.n_r, cli.n_theta)?)
}

fn run(cli: &Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Forward => {
            let coeffs = load_coeffs(cli)?;
            let op = assemble(&coeffs, cli.m_bound)?;
            io::write_matrix(&cli.output, &op)?;
            io::write_matrix_csv(&plot_path(&cli.output), &op)?;
            Ok(())
        }
        Command::Reconstruct => {
            let data = io::read_matrix(require_input(cli)?)?;
            let req = ReconstructionRequest {
                data: &data,
                k_max: cli.k_max,
                j_max: cli.j_max,
            };
            let coeffs = reconstruct(&req)?;
            io::write_coeffs(&cli.output, &coeffs)?;
            io::write_raster_csv(&plot_path(&cli.output), &coeffs, 64, 128)?;
            io::write_amplification_csv(
                &cli.output.with_extension("amplification.csv"),
                cli.k_max,
                cli.j_max,
            )?;
            Ok(())
        }
        Command::Stability => {
            let coeffs = match &cli.input {
                Some(path) => io::read_coeffs(path)?,
                None => {
                    let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
                    sample_a_k(&mut rng, cli.k_max, cli.j_max)
                }
            };
            let report = verify(&coeffs, cli.m_bound)?;
            io::write_stability_report(&cli.output, &report)?;
            io::write_stability_csv(&cli.output.with_extension("csv"), &[report])?;
            io::write_raster_csv(&plot_path(&cli.output), &coeffs, 64, 128)?;
            Ok(())
        }
        Command::OracleCheck => {
            let coeffs = load_coeffs(cli)?;
            let grid = grid(cli)?;
            let oracle = QuadratureOracle::new(&coeffs, &grid);
            let mut rows = Vec::new();
            let mut worst = 0.0_f64;
            for m in -cli.m_bound..=cli.m_bound {
                if m == 0 {
                    continue;
                }
                for n in -cli.m_bound..=cli.m_bound {
                    if n == 0 || (i64::from(m) * i64::from(n)) < 0 {
                        continue;
                    }
                    let fm = FourierMode::new(m).expect("m != 0");
                    let fn_ = FourierMode::new(n).expect("n != 0");
                    let closed = entry_closed_form(&coeffs, fm, fn_);
                    let quadrature = oracle.entry(fm, fn_);
                    worst = worst.max((closed - quadrature).norm());
                    rows.push(OracleRow {
                        m,
                        n,
                        closed,
                        quadrature,
                    });
                }
            }
            io::write_oracle_csv(&plot_path(&cli.output), &rows)?;
            let summary = format!(
                "{{\n  \"M\": {},\n  \"n_r\": {},\n  \"n_theta\": {},\n  \"pairs_checked\": {},\n  \"max_abs_discrepancy\": {:e},\n  \"tol\": {:e},\n  \"within_tol\": {}\n}}\n",
                cli.m_bound,
                cli.n_r,
                cli.n_theta,
                rows.len(),
                worst,
                cli.tol,
                worst <= cli.tol
            );
            std::fs::write(&cli.output, summary).map_err(io::FileError::Io)?;
            if worst > cli.tol {
                return Err(CliError::precondition(
                    "oracle_mismatch",
                    format!("max discrepancy {worst:e} exceeds tol {:e}", cli.tol),
                ));
            }
            Ok(())
        }
        Command::Conformal => {
            let coeffs = load_coeffs(cli)?;
            let spec_path = cli.map_spec.as_deref().ok_or_else(|| {
                CliError::precondition("missing_map_spec", "--map-spec is required")
            })?;
            let spec = io::read_map_spec(spec_path)?;
            let grid = grid(cli)?;
            let n_samples = cli.n_theta.max(64);
            let constants = boundary_constants(&spec, n_samples)?;
            let (m, n) = (FourierMode::new(1).expect("1 != 0"), FourierMode::new(1).expect("1 != 0"));
            let (disk, domain) = invariance_check(&coeffs, &spec, m, n, &grid)?;
            let report = ConformalReportJson::new(
                match spec {
                    calderon_core::conformal::ConformalMapSpec::Identity => "identity",
                    calderon_core::conformal::ConformalMapSpec::Moebius { .. } => "moebius",
                    calderon_core::conformal::ConformalMapSpec::Quadratic { .. } => "quadratic",
                },
                &constants,
                coeffs.l2_norm(),
                domain_l2_norm(&coeffs, &spec, &grid),
                1,
                1,
                disk,
                domain,
            );
            io::write_conformal_report(&cli.output, &report)?;
            let samples = transform_neumann(m, &spec, n_samples);
            io::write_boundary_csv(&plot_path(&cli.output), &samples)?;
            Ok(())
        }
        Command::Witness => {
            let coeffs = load_coeffs(cli)?;
            let witness = injectivity_witness(&coeffs)?;
            io::write_witness(&cli.output, &witness)?;
            io::write_raster_csv(&plot_path(&cli.output), &coeffs, 64, 128)?;
            Ok(())
        }
    }
}
