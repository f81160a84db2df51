use clap::{Args, Parser, Subcommand, ValueEnum};
use ecqv_kd::protocol::ProtocolKind;
use ecqv_kd_cli::{LeakKind, Run, TamperSpec, TimingFile};
use serde::Serialize;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "ecqv-kd", version, about = "ECQV key-derivation handshakes over a simulated CAN-FD bus")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one handshake between two freshly provisioned devices.
    Handshake {
        #[arg(long, default_value = "sts")]
        protocol: ProtocolKind,
        /// Flip the low bit of one field byte in transit: FIELD:BYTE or STEP.FIELD:BYTE.
        #[arg(long)]
        tamper: Option<TamperSpec>,
        #[command(flatten)]
        common: Common,
    },
    /// Time the protocols and project the STS optimization variants.
    Bench {
        /// Restrict to one protocol; default is all of them.
        #[arg(long)]
        protocol: Option<ProtocolKind>,
        #[arg(long, default_value_t = 10)]
        runs: usize,
        /// JSON file {"a": [op1..op4], "b": [...]} in microseconds, used instead of measured STS operation times.
        #[arg(long)]
        timing_file: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Message overhead of every protocol and the threat matrix.
    Report {
        /// Compromise scenarios per protocol behind the data-exposure row.
        #[arg(long, default_value_t = 10)]
        scenarios: usize,
        /// Sessions per protocol behind the key-reuse row.
        #[arg(long, default_value_t = 20)]
        runs: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Passive compromise: try to recover a recorded session's key from leaked long-term material.
    Attack {
        #[arg(long, default_value = "sts")]
        protocol: ProtocolKind,
        #[arg(long, value_enum, default_value = "longterm")]
        leak: Leak,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    /// Directory for artifacts; nothing is written without it.
    #[arg(long, env = "ECQV_KD_OUT")]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Structured,
}

#[derive(Clone, Copy, ValueEnum)]
enum Leak {
    Longterm,
    Psk,
}

fn emit<T: Serialize>(run: Run<T>, common: &Common, name: &str) -> Result<bool, String> {
    let json = serde_json::to_string_pretty(&run.record).map_err(|e| e.to_string())?;
    match common.format {
        Format::Text => print!("{}", run.text),
        Format::Structured => println!("{json}"),
    }
    if let Some(dir) = &common.out {
        std::fs::create_dir_all(dir).map_err(|e| format!("{}: {e}", dir.display()))?;
        let mut files = run.artifacts;
        files.push((format!("{name}.json"), format!("{json}\n").into_bytes()));
        files.push((format!("{name}.txt"), run.text.into_bytes()));
        for (file, bytes) in files {
            let path = dir.join(file);
            std::fs::write(&path, bytes).map_err(|e| format!("{}: {e}", path.display()))?;
        }
    }
    Ok(run.ok)
}

fn run(cli: Cli) -> Result<bool, String> {
    match cli.command {
        Command::Handshake { protocol, tamper, common } => {
            let run = ecqv_kd_cli::handshake(protocol, common.seed, tamper)?;
            let failure = run
                .record
                .parties
                .iter()
                .find_map(|p| p.failure.clone());
            let ok = emit(run, &common, "handshake")?;
            if let Some(reason) = failure {
                eprintln!("handshake failed: {reason}");
            }
            Ok(ok)
        }
        Command::Bench {
            protocol,
            runs,
            timing_file,
            common,
        } => {
            let kinds = match protocol {
                Some(k) => vec![k],
                None => ProtocolKind::ALL.to_vec(),
            };
            let timing = timing_file.as_deref().map(TimingFile::load).transpose()?;
            emit(ecqv_kd_cli::bench(&kinds, runs, common.seed, timing)?, &common, "bench")
        }
        Command::Report { scenarios, runs, common } => {
            emit(ecqv_kd_cli::report(common.seed, scenarios, runs)?, &common, "report")
        }
        Command::Attack { protocol, leak, common } => {
            let leak = match leak {
                Leak::Longterm => LeakKind::Longterm,
                Leak::Psk => LeakKind::Psk,
            };
            emit(ecqv_kd_cli::attack(protocol, common.seed, leak)?, &common, "attack")
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
