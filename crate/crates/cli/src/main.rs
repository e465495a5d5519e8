use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use kmshadow_cli::config::{GridInput, Settings};
use kmshadow_cli::{
    cmd_selftest, output_target, run, with_threads, write_table, CliError, Command, RunConfig, EXIT_OK, EXIT_VALIDATION,
    OUT_DIR_ENV,
};
use kmshadow_core::TruncationPolicy;

#[derive(Parser)]
#[command(name = "kmshadow", version, about = "Correlated kappa-mu shadowed MRC statistics as CSV")]
struct Cli {
    /// Worker threads for series sweeps and Monte Carlo (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Default directory for CSV output when --out is not given.
    #[arg(long, env = OUT_DIR_ENV, global = true)]
    out_dir: Option<PathBuf>,

    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Analytic density against a Monte Carlo histogram.
    Pdf(RunArgs),
    /// M-PSK symbol error rate: analytic, asymptotic and simulated.
    Ser(RunArgs),
    /// Bit error rate: analytic, asymptotic and simulated.
    Ber(RunArgs),
    /// Ergodic capacity by series and by quadrature.
    Capacity(RunArgs),
    /// Quick numerical consistency checks.
    Selftest {
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    /// TOML config file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// fig1 ... fig6
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    kappa: Option<f64>,
    #[arg(long)]
    mu: Option<f64>,
    /// Shadowing severity.
    #[arg(long)]
    m: Option<f64>,
    /// Exponential correlation coefficient, rho^|i-j|.
    #[arg(long)]
    rho: Option<f64>,
    /// Number of branches.
    #[arg(long = "L")]
    branches: Option<usize>,
    /// Average SNR grid in dB: `start:stop:step`, a comma list, or one value.
    #[arg(long = "snr-db", allow_hyphen_values = true)]
    snr_db: Option<String>,
    /// bpsk, qpsk, <M>psk or <M>qam.
    #[arg(long)]
    constellation: Option<String>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Relative truncation tolerance of the series.
    #[arg(long)]
    tol: Option<f64>,
    /// Term cap for each series index.
    #[arg(long)]
    max_terms: Option<usize>,
    /// Histogram bins (pdf).
    #[arg(long)]
    bins: Option<usize>,
    /// Independent branches; adds the closed-form column (pdf).
    #[arg(long)]
    iid: bool,
    /// 10^7 Monte Carlo trials unless --trials is given.
    #[arg(long)]
    paper_fidelity: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl RunArgs {
    fn settings(self, threads: Option<usize>) -> Result<Settings, CliError> {
        let file = match &self.config {
            Some(path) => Settings::from_file(path)?,
            None => Settings::default(),
        };
        let flags = Settings {
            preset: self.preset,
            kappa: self.kappa,
            mu: self.mu,
            m: self.m,
            rho: self.rho,
            branches: self.branches,
            snr_db: self.snr_db.map(GridInput::Text),
            constellation: self.constellation,
            trials: self.trials,
            seed: self.seed,
            tol: self.tol,
            max_terms: self.max_terms,
            bins: self.bins,
            iid: self.iid.then_some(true),
            paper_fidelity: self.paper_fidelity.then_some(true),
            threads,
            out: self.out,
        };
        Ok(file.overlay(flags))
    }
}

fn execute(cli: Cli) -> Result<(), CliError> {
    let (command, args) = match cli.command {
        Sub::Pdf(a) => (Command::Pdf, a),
        Sub::Ser(a) => (Command::Ser, a),
        Sub::Ber(a) => (Command::Ber, a),
        Sub::Capacity(a) => (Command::Capacity, a),
        Sub::Selftest { out } => {
            let (table, ok) = with_threads(cli.threads, || cmd_selftest(TruncationPolicy::default()))??;
            let target = output_target(out.as_deref(), cli.out_dir.as_deref(), "selftest");
            write_table(&table, target.as_deref())?;
            return if ok { Ok(()) } else { Err(CliError::SelfTest) };
        }
    };
    let config = RunConfig::resolve(command, args.settings(cli.threads)?)?;
    let table = with_threads(config.threads, || run(&config))??;
    let stem = match config.preset {
        Some(p) => format!("{}_{}", command.name(), p.name),
        None => command.name().to_string(),
    };
    let target = output_target(config.output_path.as_deref(), cli.out_dir.as_deref(), &stem);
    write_table(&table, target.as_deref())?;
    if let Some(path) = target {
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_VALIDATION as u8)
            } else {
                ExitCode::from(EXIT_OK as u8)
            };
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::from(EXIT_OK as u8),
        Err(e) => {
            eprintln!("kmshadow: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
