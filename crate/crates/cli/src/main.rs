use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use polar_construct::folded::simulate_traced;
use polar_construct::harness::awgn_sigma2;
use polar_construct::{
    build_schedule, design_code, leading_frozen_count, make_pattern, run_fer, simulate, BitChannelQuality,
    BmsChannel, ChannelFamily, CodeSpec, ExperimentConfig, Ordering, RateMode,
};

#[derive(Parser, Debug)]
#[command(name = "polar", version, about = "Polar code construction, FER simulation and folded encoder model")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Bit-channel qualities and information set for a rate-matched code.
    Construct(ConstructArgs),
    /// Monte-Carlo frame error rate sweep, written as CSV.
    Simulate(SimulateArgs),
    /// Cycle report of the folded encoder.
    FoldedSim(FoldedArgs),
    /// Punctured or shortened coded positions.
    Pattern(PatternArgs),
}

/// `family:value`, e.g. `bec:0.5`, `bsc:0.1`, `awgn:2.0` (Eb/N0 in dB).
#[derive(Clone, Debug)]
struct ChannelArg {
    family: ChannelFamily,
    value: f64,
}

fn parse_channel(s: &str) -> Result<ChannelArg, String> {
    let (fam, val) = s
        .split_once(':')
        .ok_or_else(|| format!("expected family:value, got {s:?}"))?;
    let family = fam.parse::<ChannelFamily>().map_err(|e| e.to_string())?;
    let value = val.parse::<f64>().map_err(|e| format!("bad channel parameter {val:?}: {e}"))?;
    Ok(ChannelArg { family, value })
}

#[derive(Clone, Debug)]
struct Sweep(Vec<f64>);

/// Comma list (`0.1,0.2`) or inclusive range `start:stop:step`.
fn parse_sweep(s: &str) -> Result<Sweep, String> {
    parse_values(s).map(Sweep)
}

fn parse_values(s: &str) -> Result<Vec<f64>, String> {
    let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("bad sweep value {t:?}: {e}"));
    if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        let [a, b, step] = parts.as_slice() else {
            return Err(format!("range sweep must be start:stop:step, got {s:?}"));
        };
        let (a, b, step) = (num(a)?, num(b)?, num(step)?);
        if !(step > 0.0) || b < a {
            return Err(format!("empty or unbounded sweep range {s:?}"));
        }
        let count = ((b - a) / step + 1e-9).floor() as usize + 1;
        return Ok((0..count).map(|i| a + i as f64 * step).collect());
    }
    let v = s.split(',').map(num).collect::<Result<Vec<_>, _>>()?;
    if v.is_empty() {
        return Err("sweep list is empty".into());
    }
    Ok(v)
}

#[derive(Args, Debug)]
struct CodeArgs {
    #[arg(long = "N")]
    n: usize,
    /// Transmitted length; defaults to N.
    #[arg(long = "M")]
    m: Option<usize>,
    #[arg(long = "K")]
    k: Option<usize>,
    /// Used when K is absent: K = round(rate * M).
    #[arg(long, default_value_t = 0.5)]
    rate: f64,
    #[arg(long, default_value = "none", value_parser = parse_mode)]
    mode: RateMode,
    #[arg(long, default_value_t = 256)]
    mu: usize,
}

fn parse_mode(s: &str) -> Result<RateMode, String> {
    s.parse().map_err(|e: polar_construct::Error| e.to_string())
}

fn parse_ordering(s: &str) -> Result<Ordering, String> {
    s.parse().map_err(|e: polar_construct::Error| e.to_string())
}

impl CodeArgs {
    fn m(&self) -> usize {
        self.m.unwrap_or(self.n)
    }

    fn k(&self) -> usize {
        self.k.unwrap_or_else(|| (self.rate * self.m() as f64).round() as usize)
    }
}

#[derive(Args, Debug)]
struct ConstructArgs {
    #[command(flatten)]
    code: CodeArgs,
    #[arg(long, value_parser = parse_channel)]
    channel: ChannelArg,
    /// Quantized output alphabet for AWGN design channels.
    #[arg(long, default_value_t = 2048)]
    alphabet: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    /// JSON experiment configuration; replaces the code and sweep flags.
    #[arg(long, conflicts_with_all = ["n", "channel", "sweep"])]
    config: Option<PathBuf>,
    #[arg(long = "N")]
    n: Option<usize>,
    #[arg(long = "M")]
    m: Option<usize>,
    #[arg(long = "K")]
    k: Option<usize>,
    #[arg(long, default_value_t = 0.5)]
    rate: f64,
    #[arg(long, default_value = "none", value_parser = parse_mode)]
    mode: RateMode,
    #[arg(long, default_value = "reordered", value_parser = parse_ordering)]
    ordering: Ordering,
    #[arg(long, default_value_t = 256)]
    mu: usize,
    /// bec, bsc or awgn.
    #[arg(long, value_parser = |s: &str| s.parse::<ChannelFamily>().map_err(|e| e.to_string()))]
    channel: Option<ChannelFamily>,
    #[arg(long, value_parser = parse_sweep)]
    sweep: Option<Sweep>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 100_000)]
    max_frames: usize,
    #[arg(long, default_value_t = 100)]
    max_errors: usize,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Full JSON result with configuration echo and notes.
    #[arg(long)]
    meta: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct FoldedArgs {
    #[arg(long = "N")]
    n: usize,
    #[arg(long = "L")]
    l: usize,
    /// Leading frozen count; selects the pruned encoder when given.
    #[arg(long = "C")]
    c: Option<usize>,
    #[arg(long, default_value_t = 100)]
    frames: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Per-cycle register trace as CSV.
    #[arg(long)]
    trace: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct PatternArgs {
    #[arg(long, value_parser = parse_mode)]
    mode: RateMode,
    #[arg(long = "N")]
    n: usize,
    #[arg(long = "P")]
    p: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn emit(out: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn emit_json<T: Serialize>(out: Option<&Path>, value: &T) -> anyhow::Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    emit(out, &text)
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct ConstructOutput {
    code: CodeSpec,
    quality: BitChannelQuality<f64>,
    #[serde(rename = "C")]
    leading_frozen: usize,
}

fn construct_cmd(a: ConstructArgs) -> anyhow::Result<()> {
    let spec = CodeSpec::new(a.code.n, a.code.m(), a.code.k(), a.code.mode)?;
    let w = match a.channel.family {
        ChannelFamily::Bec => BmsChannel::bec(a.channel.value)?,
        ChannelFamily::Bsc => BmsChannel::bsc(a.channel.value)?,
        ChannelFamily::Awgn => {
            if spec.k == 0 {
                bail!("AWGN design needs K > 0 to fix the code rate");
            }
            BmsChannel::awgn_quantized_sigma2(awgn_sigma2(a.channel.value, spec.rate()), a.alphabet)?
        }
    };
    let (code, quality) = design_code(&w, spec, a.code.mu)?;
    let leading_frozen = leading_frozen_count(&code.info_set, code.n)?;
    emit_json(
        a.out.as_deref(),
        &ConstructOutput {
            code,
            quality,
            leading_frozen,
        },
    )
}

fn simulate_cmd(a: SimulateArgs) -> anyhow::Result<()> {
    let cfg = match &a.config {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            serde_json::from_str::<ExperimentConfig>(&text).with_context(|| format!("parsing {}", path.display()))?
        }
        None => {
            let (Some(n), Some(channel), Some(Sweep(sweep))) = (a.n, a.channel, a.sweep.clone()) else {
                bail!("--N, --channel and --sweep are required without --config");
            };
            ExperimentConfig {
                schema: 1,
                channel,
                sweep,
                n,
                m: a.m.unwrap_or(n),
                k: a.k,
                rate: Some(a.rate),
                mode: a.mode,
                ordering: a.ordering,
                mu: a.mu,
                awgn_alphabet: 2048,
                max_frames: a.max_frames,
                max_errors: a.max_errors,
                seed: a.seed,
            }
        }
    };
    let result = run_fer(&cfg)?;
    if let Some(meta) = &a.meta {
        emit_json(Some(meta), &result)?;
    }
    emit(a.out.as_deref(), &result.to_csv())
}

fn folded_cmd(a: FoldedArgs) -> anyhow::Result<()> {
    use rand::{Rng, SeedableRng};

    let c = a.c.unwrap_or(0);
    let sched = build_schedule(a.n, a.l, a.c.is_some(), c)?;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(a.seed);
    let frames: Vec<Vec<u8>> = (0..a.frames)
        .map(|_| {
            (0..a.n)
                .map(|i| if i < sched.c { 0 } else { rng.random_range(0..2) })
                .collect()
        })
        .collect();
    let report = match &a.trace {
        Some(path) => {
            let (_, report, rows) = simulate_traced(&sched, &frames)?;
            let mut csv = String::from("cycle,stage,values\n");
            for r in rows {
                csv.push_str(&format!("{},{},{}\n", r.cycle, r.stage, r.values));
            }
            emit(Some(path), &csv)?;
            report
        }
        None => simulate(&sched, &frames)?.1,
    };
    emit_json(a.out.as_deref(), &report)
}

fn pattern_cmd(a: PatternArgs) -> anyhow::Result<()> {
    let p = make_pattern(a.mode, a.n, a.p)?;
    emit(a.out.as_deref(), &format!("{}\n", serde_json::to_string(&p)?))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Construct(a) => construct_cmd(a),
        Command::Simulate(a) => simulate_cmd(a),
        Command::FoldedSim(a) => folded_cmd(a),
        Command::Pattern(a) => pattern_cmd(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
