use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use viransatz::reference_solver::DEFAULT_POINTS;
use viransatz::{EvenPolynomialPotential, QuadratureConfig, SolverOptions, Term};

mod commands;

/// Ground-state energies of even polynomial potentials from the virial ansatz.
#[derive(Debug, Parser)]
#[command(name = "viransatz", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Ansatz energy by both procedures, plus the finite-difference reference.
    Energy(EnergyArgs),
    /// Sweep λ for ½ω²x² + ½λx⁴ and tabulate E_num, E and I⟨x²⟩.
    Table(TableArgs),
    /// Fisher information by both routes, even moments and the Cramér–Rao product.
    Fisher(FisherArgs),
    /// Sample ψ and ψ² on a uniform grid.
    Wavefunction(WavefunctionArgs),
    /// Run the invariant checks and report pass/fail per property.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
struct PotentialArgs {
    /// Quartic shorthand: U = ½ω²x² + ½λx⁴.
    #[arg(long)]
    omega: Option<f64>,
    #[arg(long, requires = "omega")]
    lambda: Option<f64>,
    /// Term a·x^d given as d=a; repeatable.
    #[arg(long = "coeff", value_name = "DEGREE=VALUE", value_parser = parse_term)]
    coeffs: Vec<Term>,
    /// Potential as JSON: {"terms": [{"degree": 2, "coeff": 0.5}, ...]}.
    #[arg(long, value_name = "FILE")]
    potential: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ToleranceArgs {
    #[arg(long, env = "VIRANSATZ_TOL", default_value_t = 1e-12)]
    abs_tol: f64,
    #[arg(long, default_value_t = 1e-10)]
    rel_tol: f64,
}

#[derive(Debug, Args)]
struct GridArgs {
    /// Points of the coarse reference grid (odd).
    #[arg(long, default_value_t = DEFAULT_POINTS)]
    grid_points: usize,
    /// Fixed half-width of the reference domain instead of the automatic choice.
    #[arg(long)]
    half_width: Option<f64>,
}

#[derive(Debug, Args)]
struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
    #[arg(long, value_name = "PATH")]
    output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Table,
    Json,
    Csv,
}

#[derive(Debug, Args)]
struct EnergyArgs {
    #[command(flatten)]
    potential: PotentialArgs,
    #[command(flatten)]
    tol: ToleranceArgs,
    #[command(flatten)]
    grid: GridArgs,
    #[command(flatten)]
    out: OutputArgs,
    /// Skip the finite-difference reference solve.
    #[arg(long)]
    no_reference: bool,
}

#[derive(Debug, Args)]
struct TableArgs {
    #[arg(long, default_value_t = 1.0)]
    omega: f64,
    /// Comma-separated λ values.
    #[arg(long, value_delimiter = ',', default_values_t = commands::DEFAULT_LAMBDAS)]
    lambdas: Vec<f64>,
    #[command(flatten)]
    tol: ToleranceArgs,
    #[command(flatten)]
    grid: GridArgs,
    #[command(flatten)]
    out: OutputArgs,
    #[arg(long)]
    no_reference: bool,
}

#[derive(Debug, Args)]
struct FisherArgs {
    #[command(flatten)]
    potential: PotentialArgs,
    #[command(flatten)]
    tol: ToleranceArgs,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Debug, Args)]
struct WavefunctionArgs {
    #[command(flatten)]
    potential: PotentialArgs,
    #[command(flatten)]
    tol: ToleranceArgs,
    #[command(flatten)]
    grid: GridArgs,
    #[command(flatten)]
    out: OutputArgs,
    #[arg(long, default_value_t = 201)]
    samples: usize,
    /// Sample on [−extent, extent]; defaults to where the exponent reaches 20.
    #[arg(long)]
    extent: Option<f64>,
    /// Export the finite-difference eigenvector instead of the ansatz.
    #[arg(long)]
    exact: bool,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[command(flatten)]
    potential: PotentialArgs,
    #[command(flatten)]
    tol: ToleranceArgs,
    #[command(flatten)]
    grid: GridArgs,
    #[command(flatten)]
    out: OutputArgs,
    /// Skip the variational-bound check against the reference solver.
    #[arg(long)]
    no_reference: bool,
}

fn parse_term(s: &str) -> Result<Term, String> {
    let (d, c) = s
        .split_once('=')
        .ok_or_else(|| format!("expected DEGREE=VALUE, got '{s}'"))?;
    let degree = d
        .trim()
        .parse::<u32>()
        .map_err(|e| format!("bad degree '{d}': {e}"))?;
    let coeff = c
        .trim()
        .parse::<f64>()
        .map_err(|e| format!("bad coefficient '{c}': {e}"))?;
    Ok(Term::new(degree, coeff))
}

#[derive(Debug)]
pub(crate) enum CliError {
    Input(String),
    Numerical(String),
    /// One or more verify properties failed.
    Failed(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Failed(_) => 1,
            CliError::Input(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) | CliError::Numerical(m) | CliError::Failed(m) => f.write_str(m),
        }
    }
}

impl From<viransatz::Error> for CliError {
    fn from(e: viransatz::Error) -> Self {
        if e.is_input_error() {
            CliError::Input(e.to_string())
        } else {
            CliError::Numerical(e.to_string())
        }
    }
}

impl PotentialArgs {
    fn resolve(&self) -> Result<EvenPolynomialPotential, CliError> {
        let styles = [
            self.omega.is_some(),
            !self.coeffs.is_empty(),
            self.potential.is_some(),
        ];
        match styles.iter().filter(|&&s| s).count() {
            0 => {
                return Err(CliError::Input(
                    "no potential given: use --omega/--lambda, --coeff or --potential".into(),
                ))
            }
            1 => {}
            _ => {
                return Err(CliError::Input(
                    "use only one of --omega/--lambda, --coeff and --potential".into(),
                ))
            }
        }
        let p = if let Some(omega) = self.omega {
            EvenPolynomialPotential::make_quartic(omega, self.lambda.unwrap_or(0.0))
        } else if let Some(path) = &self.potential {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
            return serde_json::from_str(&text)
                .map_err(|e| CliError::Input(format!("{}: {e}", path.display())));
        } else {
            EvenPolynomialPotential::validate(&self.coeffs)
        };
        p.map_err(|e| CliError::Input(e.to_string()))
    }
}

impl ToleranceArgs {
    fn config(&self) -> Result<QuadratureConfig, CliError> {
        let d = QuadratureConfig::default();
        QuadratureConfig::new(self.abs_tol, self.rel_tol, d.max_depth)
            .map_err(|e| CliError::Input(e.to_string()))
    }
}

impl GridArgs {
    fn options(&self) -> SolverOptions {
        SolverOptions {
            points: self.grid_points,
            half_width: self.half_width,
        }
    }
}

impl OutputArgs {
    fn emit(&self, text: &str) -> Result<(), CliError> {
        match &self.output {
            Some(path) => std::fs::write(path, text)
                .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display()))),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Energy(a) => commands::energy(&a),
        Command::Table(a) => commands::table(&a),
        Command::Fisher(a) => commands::fisher(&a),
        Command::Wavefunction(a) => commands::wavefunction(&a),
        Command::Verify(a) => commands::verify(&a),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
