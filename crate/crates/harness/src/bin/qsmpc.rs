use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use qsmpc_core::channel::AdversaryModel;
use qsmpc_core::mpsi::UDegree;
use qsmpc_harness::experiments::{
    attack_curve, comm_audit, resolve_outputs, run_scenario, write_file,
};
use qsmpc_harness::fixture::{replay_fixture, replay_toy, ToyFixture};
use qsmpc_harness::scenario::{Overrides, Protocol, Scenario, DEFAULT_TRIALS};
use qsmpc_harness::{HarnessError, Report};

#[derive(Parser)]
#[command(
    name = "qsmpc",
    version,
    about = "Quantum OLE and multiparty PSI simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum UDegreeArg {
    Paper,
    Secure,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    InterceptResend,
    EntangleMeasure,
}

#[derive(clap::Args)]
struct RunArgs {
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    delta: Option<usize>,
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long, value_enum)]
    u_degree: Option<UDegreeArg>,
    /// Report path; the transcript goes next to it.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Replay the pinned worked example and compare every step.
    ReplayToy {
        /// Alternative fixture file.
        #[arg(long)]
        fixture: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the OLE trials of a scenario file.
    OleRun(RunArgs),
    /// Run the MPSI trials of a scenario file.
    MpsiRun(RunArgs),
    /// Detection frequency against the number of decoys.
    AttackCurve {
        #[arg(long, value_enum, default_value = "intercept-resend")]
        model: ModelArg,
        #[arg(long, value_delimiter = ',', default_value = "1,2,4,8,16")]
        delta: Vec<usize>,
        #[arg(long, default_value_t = DEFAULT_TRIALS)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Qubit and bit counts per OLE session and per MPSI run.
    CommAudit {
        #[arg(
            long,
            value_delimiter = ',',
            default_value = "101,257,65537,2147483647"
        )]
        moduli: Vec<u64>,
        #[arg(long, default_value_t = 4)]
        parties: usize,
        #[arg(long, default_value_t = 3)]
        set_size: usize,
        #[arg(long, default_value_t = qsmpc_core::ole::DEFAULT_DELTA)]
        delta: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn emit(report: &Report, out: Option<&Path>) -> Result<(), HarnessError> {
    match out {
        Some(path) => write_file(path, &report.to_json()),
        None => {
            print!("{}", report.to_json());
            Ok(())
        }
    }
}

fn run(args: RunArgs, protocol: Protocol) -> Result<Report, HarnessError> {
    let mut scenario = Scenario::load(&args.scenario)?;
    if scenario.protocol != protocol {
        return Err(HarnessError::Config(format!(
            "{} describes protocol {:?}",
            args.scenario.display(),
            scenario.protocol
        )));
    }
    scenario.apply(&Overrides {
        seed: args.seed,
        trials: args.trials,
        delta: args.delta,
        threshold: args.threshold,
        u_degree: args.u_degree.map(|u| match u {
            UDegreeArg::Paper => UDegree::Paper,
            UDegreeArg::Secure => UDegree::Secure,
        }),
    })?;
    let target = resolve_outputs(&scenario, args.out.as_deref());
    let report = run_scenario(&scenario, &target)?;
    eprintln!(
        "report: {}\ntranscript: {}",
        target.report.display(),
        target.transcript.display()
    );
    Ok(report)
}

fn dispatch(cli: Cli) -> Result<Report, HarnessError> {
    match cli.command {
        Command::ReplayToy { fixture, out } => {
            let report = match fixture {
                Some(path) => {
                    let text = std::fs::read_to_string(&path)
                        .map_err(|source| HarnessError::Read { path, source })?;
                    replay_fixture(&ToyFixture::from_json(&text)?)?
                }
                None => replay_toy(),
            };
            emit(&report, out.as_deref())?;
            Ok(report)
        }
        Command::OleRun(args) => run(args, Protocol::Ole),
        Command::MpsiRun(args) => run(args, Protocol::Mpsi),
        Command::AttackCurve {
            model,
            delta,
            trials,
            seed,
            out,
        } => {
            let model = match model {
                ModelArg::InterceptResend => AdversaryModel::InterceptResend,
                ModelArg::EntangleMeasure => AdversaryModel::EntangleMeasure,
            };
            let report = attack_curve(model, &delta, trials, seed)?;
            emit(&report, out.as_deref())?;
            Ok(report)
        }
        Command::CommAudit {
            moduli,
            parties,
            set_size,
            delta,
            seed,
            out,
        } => {
            let report = comm_audit(&moduli, parties, set_size, delta, seed)?;
            emit(&report, out.as_deref())?;
            Ok(report)
        }
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(report) => {
            for v in &report.verdicts {
                eprintln!(
                    "{} {}: {}",
                    if v.passed { "PASS" } else { "FAIL" },
                    v.name,
                    v.detail
                );
            }
            if report.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
