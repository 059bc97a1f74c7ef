//! `qbp`: construct, encode, transmit, decode, embed, sample, calibrate and
//! evaluate from the command line.

mod commands;
mod params;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "qbp", version, about = "LDPC decoding as quadratic binary optimization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a regular LDPC code and write it as alist.
    Construct(commands::ConstructArgs),
    /// Encode a message (given or random) with a code.
    Encode(commands::EncodeArgs),
    /// Send an encoded word over BPSK/AWGN or a trace channel.
    Transmit(commands::TransmitArgs),
    /// Min-sum belief propagation.
    DecodeBp(commands::DecodeBpArgs),
    /// Decode by minimising the QUBO objective.
    DecodeQbp(commands::DecodeQbpArgs),
    /// Embed a code's decoding problem on a Chimera graph.
    Embed(commands::EmbedArgs),
    /// Anneal a problem file, or validate an external sample set.
    Sample(commands::SampleArgs),
    /// Calibrate W2 per SNR, or |J_F|, from an experiment config.
    Calibrate(commands::CalibrateArgs),
    /// Run an experiment config end to end.
    Evaluate(commands::EvaluateArgs),
}

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Runtime(anyhow::Error),
}

impl From<qbp_core::Error> for CliError {
    fn from(e: qbp_core::Error) -> Self {
        use qbp_core::Error as E;
        match e {
            E::Config(m) => CliError::Config(m),
            E::InvalidArgument(_) | E::InfeasibleDegrees { .. } => CliError::Config(e.to_string()),
            other => CliError::Runtime(other.into()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.into())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Runtime(e.into())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Construct(a) => commands::construct(a),
        Command::Encode(a) => commands::encode(a),
        Command::Transmit(a) => commands::transmit(a),
        Command::DecodeBp(a) => commands::decode_bp(a),
        Command::DecodeQbp(a) => commands::decode_qbp(a),
        Command::Embed(a) => commands::embed(a),
        Command::Sample(a) => commands::sample(a),
        Command::Calibrate(a) => commands::calibrate(a),
        Command::Evaluate(a) => commands::evaluate(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let (kind, code, message) = match e {
                CliError::Config(m) => ("config", 2, m),
                CliError::Runtime(err) => ("runtime", 3, format!("{err:#}")),
            };
            eprintln!("{}", serde_json::json!({ "error": kind, "message": message }));
            ExitCode::from(code)
        }
    }
}
