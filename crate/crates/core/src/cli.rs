//! Command-line front end: sweeps written as CSV, summaries on stdout.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use crate::error::{Error, Result};
use crate::estimator::{fidelity_montecarlo, BlockPovm};
use crate::halfint::HalfInt;
use crate::limits::{
    classical_limit_rows, classical_optimal_amplitude, default_j2_grid, sweep_optimal_vs_j2,
};
use crate::optimizer::{
    certificate, max_fidelity, maximize, optimize_state, CERTIFICATE_TOLERANCE,
};
use crate::states::{GenericState, SignalModel};

/// Overrides the directory that sweep CSVs are written to by default.
pub const OUTPUT_DIR_ENV: &str = "RELANGLE_OUTPUT_DIR";

const CSV_SCHEMAS: &str = "\
CSV output (header row always present, 10 significant digits):
  fidelity-sweep   a,F,nu,certificate_min_eig
  j2-sweep         j2,a_star,F_opt,F_parallel,F_antiparallel
  classical-limit  j2,deviation_max,F_quantum,F_classical
Sweeps write to --output, or to a default file name in $RELANGLE_OUTPUT_DIR
(current directory if unset).";

#[derive(Debug, Parser)]
#[command(name = "relangle", version, about, after_help = CSV_SCHEMAS)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Bob's reference spin, e.g. 1/2, 1, 3/2.
    #[arg(long, global = true, default_value = "1/2")]
    j2: HalfInt,

    /// Step of the amplitude grid for fidelity-sweep, in (0, 0.5].
    #[arg(long, global = true, default_value_t = 0.01)]
    a_grid_step: f64,

    /// μ grid points for the Helstrom certificate, at least 101.
    #[arg(long, global = true, default_value_t = 1001)]
    mu_grid: usize,

    /// Monte-Carlo samples, at least 1.
    #[arg(long, global = true, default_value_t = 1_000_000)]
    samples: usize,

    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,

    /// Output file (CSV).
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    /// `parallel`, `antiparallel`, `optimal`, or a path to a state file.
    #[arg(long, global = true, default_value = "optimal")]
    state: String,

    /// Comma-separated j2 values for j2-sweep and classical-limit.
    #[arg(long, global = true, value_delimiter = ',')]
    j2_values: Option<Vec<HalfInt>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Optimal fidelity of a|0 0⟩ + √(1-a²)|1 0⟩ over an amplitude grid.
    FidelitySweep,
    /// Best preparation for one j2.
    Optimize,
    /// Optimal, parallel and antiparallel fidelities over j2.
    J2Sweep,
    /// Convergence towards a classical reference direction.
    ClassicalLimit,
    /// Helstrom certificate of the optimal measurement for --state.
    Certify,
    /// Monte-Carlo check of the optimal fidelity for --state.
    Montecarlo,
}

/// How a preparation is chosen on the command line.
#[derive(Clone, Debug, PartialEq)]
pub enum StateChoice {
    Parallel,
    Antiparallel,
    /// The best preparation for the task at hand.
    Optimal,
    File(PathBuf),
}

impl StateChoice {
    fn parse(text: &str) -> Self {
        match text {
            "parallel" => StateChoice::Parallel,
            "antiparallel" => StateChoice::Antiparallel,
            "optimal" => StateChoice::Optimal,
            path => StateChoice::File(PathBuf::from(path)),
        }
    }

    /// Resolves to a state; `Optimal` means the best two-term preparation
    /// at `j2`, or against a classical axis when `j2` is `None`.
    pub fn resolve(&self, j2: Option<HalfInt>) -> Result<GenericState> {
        match self {
            StateChoice::Parallel => Ok(GenericState::parallel()),
            StateChoice::Antiparallel => Ok(GenericState::antiparallel()),
            StateChoice::Optimal => match j2 {
                Some(j2) => Ok(optimize_state(j2)?.state),
                None => GenericState::two_term(classical_optimal_amplitude()?.0),
            },
            StateChoice::File(path) => std::fs::read_to_string(path)?.parse(),
        }
    }
}

/// A validated invocation.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub j2: HalfInt,
    pub a_grid_step: f64,
    pub mu_grid: usize,
    pub samples: usize,
    pub seed: u64,
    pub output_path: Option<PathBuf>,
    pub state: StateChoice,
    pub j2_values: Option<Vec<HalfInt>>,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Domain(msg));
        if !(self.a_grid_step > 0.0 && self.a_grid_step <= 0.5) {
            return bad(format!(
                "--a-grid-step {} outside (0, 0.5]",
                self.a_grid_step
            ));
        }
        if self.mu_grid < 101 {
            return bad(format!("--mu-grid {} is below 101", self.mu_grid));
        }
        if self.samples < 1 {
            return bad("--samples must be at least 1".into());
        }
        let too_small = |j: &HalfInt| j.twice() < 1;
        if too_small(&self.j2) || self.j2_values.iter().flatten().any(too_small) {
            return bad("j2 must be at least 1/2".into());
        }
        Ok(())
    }
}

impl From<Cli> for RunConfig {
    fn from(cli: Cli) -> Self {
        RunConfig {
            command: cli.command,
            j2: cli.j2,
            a_grid_step: cli.a_grid_step,
            mu_grid: cli.mu_grid,
            samples: cli.samples,
            seed: cli.seed,
            output_path: cli.output,
            state: StateChoice::parse(&cli.state),
            j2_values: cli.j2_values,
        }
    }
}

/// Formats `x` with 10 significant digits.
pub fn sig10(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..15).contains(&exp) {
        let decimals = (9 - exp).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        format!("{x:.9e}")
    }
}

/// Writes a CSV atomically: temp file in the target directory, then rename.
fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let tmp = tempfile::NamedTempFile::new_in(&dir)?;
    {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(tmp.as_file());
        let csv_err = |e: csv::Error| Error::Io(std::io::Error::other(e));
        w.write_record(header).map_err(csv_err)?;
        for row in rows {
            w.write_record(row).map_err(csv_err)?;
        }
        w.flush()?;
    }
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

fn output_path(config: &RunConfig, default_name: &str) -> PathBuf {
    config.output_path.clone().unwrap_or_else(|| {
        std::env::var_os(OUTPUT_DIR_ENV)
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from("."))
            .join(default_name)
    })
}

fn j2_column(j2: HalfInt) -> String {
    format!("{}", j2.value())
}

/// Runs one command, writing summaries to `out`.
pub fn run(config: &RunConfig, out: &mut impl Write) -> Result<()> {
    config.validate()?;
    let j2 = config.j2;
    match config.command {
        Command::FidelitySweep => {
            let n = (1.0 / config.a_grid_step).round() as usize;
            let grid: Vec<f64> = (0..=n)
                .map(|k| (k as f64 * config.a_grid_step).min(1.0))
                .collect();
            let model = SignalModel::new(&GenericState::antiparallel(), j2)?;
            let rows = grid
                .iter()
                .map(|&a| {
                    let state = GenericState::two_term(a)?;
                    let score = model.with_state(&state)?.score_operator()?;
                    let r = maximize(&score)?;
                    let cert = certificate(&score, &r.povm, config.mu_grid)?;
                    // The two-dimensional sector J = j2 carries the pair estimate.
                    let nu = match r.povm.block(j2) {
                        Some(BlockPovm::Pair(p)) => p.nu(),
                        Some(BlockPovm::Single { mu }) => *mu,
                        _ => f64::NAN,
                    };
                    Ok(vec![sig10(a), sig10(r.fidelity), sig10(nu), sig10(cert)])
                })
                .collect::<Result<Vec<_>>>()?;
            let path = output_path(config, "fidelity_sweep.csv");
            write_csv(&path, &["a", "F", "nu", "certificate_min_eig"], &rows)?;
            writeln!(out, "wrote {} rows to {}", rows.len(), path.display())?;
        }
        Command::Optimize => {
            let opt = optimize_state(j2)?;
            writeln!(out, "j2={j2}")?;
            writeln!(out, "a*={}", sig10(opt.a_star))?;
            writeln!(out, "F={}", sig10(opt.result.fidelity))?;
            writeln!(out, "sector m1={}", opt.sector)?;
            writeln!(out, "F_family={}", sig10(opt.family_fidelity))?;
            writeln!(out, "F_parallel={}", sig10(opt.parallel_fidelity))?;
            writeln!(
                out,
                "certificate_min_eig={}",
                sig10(opt.result.certificate_min_eigenvalue)
            )?;
            if !opt.result.certified {
                writeln!(out, "status: locally optimal, uncertified")?;
            }
        }
        Command::J2Sweep => {
            let grid = config.j2_values.clone().unwrap_or_else(default_j2_grid);
            let rows: Vec<Vec<String>> = sweep_optimal_vs_j2(&grid)?
                .into_iter()
                .map(|r| {
                    vec![
                        j2_column(r.j2),
                        sig10(r.a_star),
                        sig10(r.f_opt),
                        sig10(r.f_parallel),
                        sig10(r.f_antiparallel),
                    ]
                })
                .collect();
            let path = output_path(config, "j2_sweep.csv");
            let header = ["j2", "a_star", "F_opt", "F_parallel", "F_antiparallel"];
            write_csv(&path, &header, &rows)?;
            writeln!(out, "wrote {} rows to {}", rows.len(), path.display())?;
        }
        Command::ClassicalLimit => {
            let state = config.state.resolve(None)?;
            // The pairing J ↔ m needs j2 at least the largest j1.
            let grid: Vec<HalfInt> = config.j2_values.clone().unwrap_or_else(|| {
                default_j2_grid()
                    .into_iter()
                    .filter(|&j| j >= state.j_max())
                    .collect()
            });
            let rows: Vec<Vec<String>> = classical_limit_rows(&state, &grid)?
                .into_iter()
                .map(|r| {
                    vec![
                        j2_column(r.j2),
                        sig10(r.deviation_max),
                        sig10(r.f_quantum),
                        sig10(r.f_classical),
                    ]
                })
                .collect();
            let path = output_path(config, "classical_limit.csv");
            let header = ["j2", "deviation_max", "F_quantum", "F_classical"];
            write_csv(&path, &header, &rows)?;
            writeln!(out, "wrote {} rows to {}", rows.len(), path.display())?;
        }
        Command::Certify => {
            let state = config.state.resolve(Some(j2))?;
            let score = SignalModel::new(&state, j2)?.score_operator()?;
            let r = maximize(&score)?;
            let cert = certificate(&score, &r.povm, config.mu_grid)?;
            writeln!(out, "F={}", sig10(r.fidelity))?;
            writeln!(out, "certificate_min_eig={}", sig10(cert))?;
            let status = if cert >= -CERTIFICATE_TOLERANCE {
                "optimal (certificate passed)"
            } else {
                "locally optimal, uncertified"
            };
            writeln!(out, "status: {status}")?;
        }
        Command::Montecarlo => {
            let state = config.state.resolve(Some(j2))?;
            let r = max_fidelity(&state, j2)?;
            let (mc, se) = fidelity_montecarlo(&state, j2, &r.povm, config.samples, config.seed)?;
            writeln!(out, "F_analytic={}", sig10(r.fidelity))?;
            writeln!(out, "F_montecarlo={}", sig10(mc))?;
            writeln!(out, "stderr={}", sig10(se))?;
            let z = if se > 0.0 {
                (mc - r.fidelity) / se
            } else {
                0.0
            };
            writeln!(out, "z={}", sig10(z))?;
        }
    }
    Ok(())
}

/// Exit status for an error: 2 for unsupported block dimensions, 1 otherwise.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::UnsupportedDimension { .. } => 2,
        _ => 1,
    }
}

/// Parses `args`, runs, and returns the process exit status. Diagnostics go
/// to stderr as a single line.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return 0;
        }
        Err(e) if e.kind() == ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => {
            eprintln!("error: missing subcommand (see --help)");
            return 1;
        }
        Err(e) => {
            let text = e.to_string();
            eprintln!("{}", text.lines().next().unwrap_or("invalid arguments"));
            return 1;
        }
    };
    let config = RunConfig::from(cli);
    match run(&config, &mut std::io::stdout().lock()) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
