use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use selfaffine::cli::{run, CantorOp, Command, RunConfig, ScheduleSpec};
use selfaffine::DEFAULT_CAP;

/// Lebesgue and Hausdorff measures of self-affine sets from digit expansions.
#[derive(Debug, Parser)]
#[command(name = "selfaffine", version, about)]
struct Cli {
    /// Pair file (`dim`, `matrix`, `digits` sections, or `cantor N d`).
    #[arg(long, global = true)]
    pair: Option<PathBuf>,
    /// Expansion budget: largest total mass m^k that may be enumerated.
    #[arg(long, global = true, default_value_t = DEFAULT_CAP)]
    cap: u64,
    /// Write to this file instead of standard output.
    #[arg(short, long, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Op {
    Count,
    Hmeasure,
    Sequence,
    Dominance,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// List the points of μ_k with multiplicities.
    Expand {
        #[arg(long)]
        level: u32,
    },
    /// Open-set-condition verdict from levels 1..=k.
    Check {
        #[arg(long)]
        level: u32,
    },
    /// Upper and lower Beurling density profiles and the Lebesgue estimate.
    Density {
        #[arg(long)]
        level: u32,
        /// `geo:start,stop,count` or `lin:start,stop,count`.
        #[arg(long)]
        windows: Option<ScheduleSpec>,
        /// Extra levels used to decide which lower-density windows are trusted.
        #[arg(long, default_value_t = 2)]
        lookahead: u32,
    },
    /// Upper s-density profile and the Hausdorff measure estimate (1-D).
    Sdensity {
        #[arg(long)]
        level: u32,
        /// Exponent; defaults to the similarity dimension.
        #[arg(long)]
        s: Option<f64>,
        #[arg(long)]
        thresholds: Option<ScheduleSpec>,
    },
    /// Closed forms for the pair (N, {0, d}).
    Cantor {
        #[arg(long = "N")]
        n: Option<f64>,
        #[arg(long)]
        d: Option<f64>,
        #[arg(long, value_enum)]
        op: Op,
        /// Coefficients r_0,r_1,... for `count`.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        coeffs: Vec<f64>,
        #[arg(long, default_value_t = 20)]
        m_max: u32,
        #[arg(long, default_value_t = 6)]
        level: u32,
    },
    /// Raster outer approximation of the attractor (PBM in 2-D, CSV in 1-D).
    Raster {
        #[arg(long, default_value_t = 1024)]
        resolution: usize,
        #[arg(long, default_value_t = 200)]
        max_iters: usize,
    },
    /// Interior/boundary position of the origin in a tile.
    ClassifyOrigin {
        #[arg(long)]
        level: u32,
        #[arg(long, default_value_t = 4)]
        lookahead: u32,
        #[arg(long)]
        windows: Option<ScheduleSpec>,
    },
    /// Sampled check of the renormalization identity for the invariant measure.
    RenormCheck {
        /// Window lower corner, comma separated.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        lo: Vec<f64>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        hi: Vec<f64>,
        #[arg(long)]
        steps: u32,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, default_value_t = 64)]
        burn_in: usize,
        #[arg(long, default_value_t = 1)]
        reps: u32,
        #[arg(long)]
        seed: u64,
    },
}

fn usage_exit(msg: &str) -> ExitCode {
    eprintln!("selfaffine: usage: {msg}");
    ExitCode::from(2)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut pair = cli.pair;
    let command = match cli.command {
        Cmd::Expand { level } => Command::Expand { level },
        Cmd::Check { level } => Command::Check { level },
        Cmd::Density { level, windows, lookahead } => Command::Density { level, windows, lookahead },
        Cmd::Sdensity { level, s, thresholds } => Command::SDensity { level, s, thresholds },
        Cmd::Cantor { n, d, op, coeffs, m_max, level } => {
            let (dilation, digit) = match (n, d, &pair) {
                (Some(n), Some(d), _) => (n, d),
                (None, None, Some(path)) => {
                    let spec = std::fs::read_to_string(path)
                        .map_err(|e| e.to_string())
                        .and_then(|t| selfaffine::spec_file::parse_spec_file(&t).map_err(|e| e.to_string()));
                    match spec {
                        Ok(s) => match s.cantor {
                            Some(cp) => (cp.dilation(), cp.digit()),
                            None => return usage_exit("pair file is not a `cantor N d` file"),
                        },
                        Err(e) => {
                            eprintln!("selfaffine: {e}");
                            return ExitCode::from(1);
                        }
                    }
                }
                _ => return usage_exit("cantor needs --N and --d, or a --pair file with a cantor line"),
            };
            pair = None;
            let op = match op {
                Op::Count => CantorOp::Count { coeffs },
                Op::Hmeasure => CantorOp::HMeasure,
                Op::Sequence => CantorOp::Sequence { m_max },
                Op::Dominance => CantorOp::Dominance { level },
            };
            Command::Cantor { dilation, digit, op }
        }
        Cmd::Raster { resolution, max_iters } => Command::Raster { resolution, max_iters },
        Cmd::ClassifyOrigin { level, lookahead, windows } => Command::ClassifyOrigin { level, lookahead, windows },
        Cmd::RenormCheck { lo, hi, steps, samples, burn_in, reps, seed } => {
            Command::RenormCheck { lo, hi, steps, samples, burn_in, reps, seed }
        }
    };
    let config = RunConfig { command, pair, cap: cli.cap, output: cli.output };
    ExitCode::from(run(&config) as u8)
}
