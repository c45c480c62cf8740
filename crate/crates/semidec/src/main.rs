use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use semidec::commands::{audit_locality, fit, realize_cmd, solve_are, study};
use semidec::{exit, CliError, CliResult, Layer, Report, RunConfig};

#[derive(Parser)]
#[command(
    name = "semidec",
    version,
    about = "Semi-decentralized LQR gains: solve, fit, realize and study"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the parametric Riccati equation and write gain coefficients and traces.
    SolveAre(Common),
    /// Fit rational gains and report errors and poles.
    Fit(Common),
    /// Apply a gain to a random grid vector by contour quadrature.
    Realize(Common),
    /// Run an error study and check its thresholds.
    Study(StudyArgs),
    /// Check that the iterative realization only reads band neighbors.
    AuditLocality(AuditArgs),
}

#[derive(Args)]
struct Common {
    /// Flat `key = value` file; flags override its keys.
    #[arg(long)]
    config: Option<PathBuf>,
    /// heat1d, heat1d-unbounded, beam, heat2d or heat2d:J.
    #[arg(long)]
    example: Option<String>,
    #[arg(long)]
    degree: Option<String>,
    /// Comma-separated `N` or `NN/ND`.
    #[arg(long)]
    degrees: Option<String>,
    /// Node count, list `a,b,c` or range `a:b[:step]`.
    #[arg(long = "M")]
    m: Option<String>,
    /// Circle radius or comma-separated radii.
    #[arg(long = "R")]
    r: Option<String>,
    #[arg(long = "R1")]
    r1: Option<String>,
    #[arg(long = "R2")]
    r2: Option<String>,
    /// Cell count or list of cell counts.
    #[arg(long)]
    mesh: Option<String>,
    #[arg(long = "T")]
    t: Option<String>,
    #[arg(long)]
    steps: Option<String>,
    #[arg(long)]
    out: Option<String>,
    #[arg(long)]
    jobs: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// Timestamp used in output file names.
    #[arg(long)]
    stamp: Option<String>,
}

#[derive(Args)]
struct StudyArgs {
    #[command(flatten)]
    common: Common,
    /// E-vs-M, e-vs-N, rate or fit.
    #[arg(long)]
    curve: Option<String>,
    /// Time-integrated spatial error against the modal reference.
    #[arg(long)]
    spatial: bool,
}

#[derive(Args)]
struct AuditArgs {
    #[command(flatten)]
    common: Common,
    /// Audit a dense operator instead; the audit must then fail.
    #[arg(long)]
    dense: bool,
}

impl Common {
    fn layer(&self, extra: &[(&str, Option<String>)]) -> CliResult<Layer> {
        let base = match &self.config {
            Some(p) => Layer::load(p)?,
            None => Layer::default(),
        };
        let mut flags = Layer::default();
        let pairs = [
            ("example", &self.example),
            ("degree", &self.degree),
            ("degrees", &self.degrees),
            ("M", &self.m),
            ("R", &self.r),
            ("R1", &self.r1),
            ("R2", &self.r2),
            ("mesh", &self.mesh),
            ("T", &self.t),
            ("steps", &self.steps),
            ("out", &self.out),
            ("jobs", &self.jobs),
            ("seed", &self.seed),
            ("stamp", &self.stamp),
        ];
        for (k, v) in pairs.into_iter().chain(extra.iter().map(|(k, v)| (*k, v))) {
            if let Some(v) = v {
                flags.set(k, v.clone(), format!("--{k}"))?;
            }
        }
        Ok(base.overlay(flags))
    }

    fn config(&self, extra: &[(&str, Option<String>)]) -> CliResult<RunConfig> {
        RunConfig::from_layer(&self.layer(extra)?)
    }
}

fn run(cli: Cli) -> CliResult<Report> {
    match cli.command {
        Command::SolveAre(c) => solve_are(&c.config(&[])?),
        Command::Fit(c) => fit(&c.config(&[])?),
        Command::Realize(c) => realize_cmd(&c.config(&[])?),
        Command::Study(s) => {
            let spatial = s.spatial.then(|| "true".to_string());
            study(
                &s.common
                    .config(&[("curve", s.curve), ("spatial", spatial)])?,
            )
        }
        Command::AuditLocality(a) => audit_locality(&a.common.config(&[])?, a.dense),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            let code = if e.use_stderr() {
                exit::USAGE
            } else {
                exit::SUCCESS
            };
            return ExitCode::from(code as u8);
        }
    };
    let code = match run(cli) {
        Ok(rep) => {
            for line in &rep.lines {
                println!("{line}");
            }
            for c in &rep.checks {
                println!(
                    "[{}] {}: {}",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.name,
                    c.detail
                );
            }
            for f in &rep.files {
                println!("wrote {}", f.display());
            }
            rep.exit_code()
        }
        Err(e) => {
            eprintln!("error: {e}");
            if let CliError::Core(semidec_core::Error::ConvergenceFailure { trace, .. }) = &e {
                eprintln!(
                    "last differences: {:?}",
                    &trace[trace.len().saturating_sub(5)..]
                );
            }
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}
