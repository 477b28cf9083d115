use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use diophantine_core::dynamics::{FlowSystem, PERIOD};
use diophantine_core::matrices::MatrixKind;
use diophantine_core::report::{
    self, OrderingSelection, OutputFormat, RunConfig, SimulationConfig, Tolerances,
};
use diophantine_core::Error;

/// Hermite-seeded polynomial orderings: Diophantine spectra, finite-difference
/// oracles and isochronous flows.
#[derive(Parser)]
#[command(name = "diophantine", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Zeros of H_N and their equilibrium residuals.
    HermiteZeros(Common),
    /// Check the spectra of M1/M2 over coefficient orderings.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Comma-separated subset of m1, m2.
        #[arg(long, value_delimiter = ',', default_value = "m1,m2")]
        kinds: Vec<String>,
        /// `all`, `sample:K[:SEED]`, or comma-separated 1-based ranks.
        #[arg(long, default_value = "all")]
        orderings: String,
        /// Allow `all` beyond N = 8.
        #[arg(long)]
        force: bool,
        /// Print the N = 3 label table instead of verifying.
        #[arg(long)]
        paper_mu_table: bool,
    },
    /// Integrate a flow from a seeded perturbation of equilibrium.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        system: System,
        /// 1-based lexicographic rank of the ordering (zero flows only).
        #[arg(long, default_value_t = 1)]
        rank: u128,
        /// Final time; defaults to one period, 2π.
        #[arg(long)]
        t_end: Option<f64>,
        /// Perturbation radius around the equilibrium.
        #[arg(long, default_value_t = 1e-2)]
        radius: f64,
        /// On a missed return, look for one within this many periods.
        #[arg(long)]
        detect_period: Option<usize>,
    },
    /// Compare a closed-form matrix with the finite-difference Jacobian.
    Oracle {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1)]
        rank: u128,
        #[arg(long, default_value = "m1")]
        kind: String,
        /// Finite-difference step in [1e-8, 1e-4].
        #[arg(long)]
        h: Option<f64>,
        /// Run the linear-field self test instead.
        #[arg(long)]
        self_test: bool,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Also write the output to this file.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Worker threads.
    #[arg(long, env = "DIOPHANTINE_JOBS", default_value_t = 1)]
    jobs: usize,
    #[arg(long, default_value_t = 1e-12)]
    tol_root: f64,
    #[arg(long, default_value_t = f64::EPSILON)]
    tol_eig: f64,
    #[arg(long, default_value_t = 1e-6)]
    tol_pass: f64,
    #[arg(long, default_value_t = 1e-10)]
    tol_ode_rel: f64,
    #[arg(long, default_value_t = 1e-12)]
    tol_ode_abs: f64,
}

impl Common {
    fn n(&self) -> Result<usize, Failure> {
        self.n.ok_or_else(|| Failure::usage("--n is required"))
    }

    fn tolerances(&self) -> Tolerances {
        Tolerances {
            root_tol: self.tol_root,
            eig_tol: self.tol_eig,
            pass_tol: self.tol_pass,
            ode_rel_tol: self.tol_ode_rel,
            ode_abs_tol: self.tol_ode_abs,
        }
    }

    fn format(&self) -> OutputFormat {
        match self.format {
            Format::Json => OutputFormat::Json,
            Format::Csv => OutputFormat::Csv,
        }
    }

    fn emit(&self, text: &str) -> Result<(), Failure> {
        std::io::stdout().write_all(text.as_bytes()).map_err(Failure::io)?;
        if let Some(path) = &self.out {
            std::fs::write(path, text).map_err(Failure::io)?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum System {
    Gamma1,
    Zeta1,
    Gamma2,
    Zeta2,
}

impl From<System> for FlowSystem {
    fn from(s: System) -> Self {
        match s {
            System::Gamma1 => FlowSystem::Gamma1,
            System::Zeta1 => FlowSystem::Zeta1,
            System::Gamma2 => FlowSystem::Gamma2,
            System::Zeta2 => FlowSystem::Zeta2,
        }
    }
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(msg: &str) -> Self {
        Self { code: 2, message: msg.to_string() }
    }

    fn io(e: std::io::Error) -> Self {
        Self { code: 2, message: format!("i/o: {e}") }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Self { code: report::exit_code(&e) as u8, message: e.to_string() }
    }
}

fn render<T: serde::Serialize>(
    format: OutputFormat,
    value: &T,
    csv: impl FnOnce(&T) -> diophantine_core::Result<String>,
) -> Result<String, Failure> {
    Ok(match format {
        OutputFormat::Json => report::to_json(value)?,
        OutputFormat::Csv => csv(value)?,
    })
}

fn is_whole_period(t: f64) -> bool {
    let k = (t / PERIOD).round();
    k >= 1.0 && (t / PERIOD - k).abs() < 1e-9
}

fn run(cli: Cli) -> Result<u8, Failure> {
    match cli.command {
        Command::HermiteZeros(common) => {
            let rep = report::hermite_report(common.n()?)?;
            common.emit(&render(common.format(), &rep, report::hermite_csv)?)?;
            Ok(0)
        }
        Command::Verify { common, kinds, orderings, force, paper_mu_table } => {
            if paper_mu_table {
                let rows = report::mu_table(&common.tolerances())?;
                common.emit(&render(common.format(), &rows, |r| report::mu_table_csv(r))?)?;
                return Ok(0);
            }
            let kinds = kinds.iter().map(|k| k.parse::<MatrixKind>()).collect::<Result<Vec<_>, _>>()?;
            let config = RunConfig {
                n: common.n()?,
                kinds,
                orderings: OrderingSelection::parse(&orderings, common.seed)?,
                tolerances: common.tolerances(),
                format: common.format(),
                seed: common.seed,
                force,
            };
            let rep = report::run_verification(&config, common.jobs)?;
            common.emit(&render(config.format, &rep, report::verification_csv)?)?;
            let a = &rep.aggregate;
            eprintln!(
                "verify: {} pass, {} fail, {} inconclusive, {} errors; max deviation {:.3e}; digest {}",
                a.pass,
                a.fail,
                a.inconclusive,
                a.errors,
                a.max_deviation,
                rep.digest()
            );
            Ok(rep.exit_code() as u8)
        }
        Command::Simulate { common, system, rank, t_end, radius, detect_period } => {
            let config = SimulationConfig {
                system: system.into(),
                n: common.n()?,
                rank,
                t_end: t_end.unwrap_or(PERIOD),
                radius,
                seed: common.seed,
                tolerances: common.tolerances(),
                detect_period,
            };
            let rep = report::run_simulation(&config)?;
            common.emit(&render(common.format(), &rep, report::simulation_csv)?)?;
            eprintln!("simulate: return distance {:.3e} at t = {}", rep.return_distance, config.t_end);
            Ok(if is_whole_period(config.t_end) && !rep.returned { 1 } else { 0 })
        }
        Command::Oracle { common, rank, kind, h, self_test } => {
            if self_test {
                let deviation = report::oracle_self_test()?;
                let value = serde_json::json!({ "self_test": true, "deviation": deviation, "pass": deviation < 1e-10 });
                let text = match common.format() {
                    OutputFormat::Json => report::to_json(&value)?,
                    OutputFormat::Csv => format!("self_test,deviation,pass\ntrue,{deviation},{}\n", deviation < 1e-10),
                };
                common.emit(&text)?;
                return Ok(if deviation < 1e-10 { 0 } else { 1 });
            }
            let kind: MatrixKind = kind.parse()?;
            let rep = report::run_oracle(common.n()?, rank, kind, h, &common.tolerances())?;
            common.emit(&render(common.format(), &rep, report::oracle_csv)?)?;
            Ok(if rep.pass { 0 } else { 1 })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
