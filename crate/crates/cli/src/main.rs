//! Command-line front end tying the decoder library into reproducible
//! experiments.
//!
//! Exit codes: 0 on success, 1 on usage or I/O errors (and verification
//! mismatches), 2 when a requested decode does not converge.

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use qldpc_relay::bench::{self, BenchReport, TimingModel, CSV_HEADER};
use qldpc_relay::bp::{relay_decode, RelayConfig};
use qldpc_relay::fixed_ref::SumOrder;
use qldpc_relay::gateware::gateware_decode_masked;
use qldpc_relay::model::{self, DecodingModel, Syndrome};
use qldpc_relay::qarith::{Precision, PrecisionSpec};
use qldpc_relay::verify;
use qldpc_relay::window::{self, StreamEvent, WindowState};

#[derive(Parser)]
#[command(
    name = "qldpc-relay",
    version,
    about = "Relay-BP decoding for quantum LDPC codes: float reference, bit-accurate fixed-point emulation, sliding-window streaming, Monte Carlo benchmarks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decode one syndrome and print the outcome.
    Decode(DecodeArgs),
    /// Monte Carlo logical-error-rate sweep (CSV on stdout).
    Bench(BenchArgs),
    /// Monte Carlo sweep through the sliding-window pipeline, or replay of a
    /// recorded detector stream.
    WindowBench(WindowBenchArgs),
    /// Cross-validate the gateware emulation against the per-edge
    /// fixed-point reference and the zero-memory reductions.
    Verify(VerifyArgs),
    /// Generate a model file.
    Gen(GenArgs),
}

#[derive(Args, Clone)]
struct ModelArgs {
    /// Model file to load.
    #[arg(long, value_name = "PATH", conflicts_with = "gen")]
    model: Option<PathBuf>,
    /// Built-in generator: rep:<n>:<p> or mem:<n>:<cycles>:<pdata>:<pmeas>.
    #[arg(long, value_name = "SPEC")]
    gen: Option<String>,
}

impl ModelArgs {
    fn load(&self) -> Result<DecodingModel> {
        match (&self.model, &self.gen) {
            (Some(path), None) => {
                model::load_model(path).with_context(|| format!("loading {}", path.display()))
            }
            (None, Some(spec)) => build_generated(spec, None),
            _ => bail!("exactly one of --model or --gen is required"),
        }
    }

    /// Loads with the generator's probabilities replaced by `p` (sweeps).
    fn load_with_p(&self, p: f64) -> Result<DecodingModel> {
        match &self.gen {
            Some(spec) => build_generated(spec, Some(p)),
            None => bail!("--sweep-p requires --gen"),
        }
    }

    fn p_label(&self) -> String {
        match &self.gen {
            Some(spec) => {
                let parts: Vec<&str> = spec.split(':').collect();
                match parts.as_slice() {
                    ["rep", _, p] => p.to_string(),
                    ["mem", _, _, pdata, _] => pdata.to_string(),
                    _ => "gen".to_string(),
                }
            }
            None => "file".to_string(),
        }
    }
}

fn build_generated(spec: &str, p_override: Option<f64>) -> Result<DecodingModel> {
    let parts: Vec<&str> = spec.split(':').collect();
    match parts.as_slice() {
        ["rep", n, p] => {
            let n: usize = n.parse().context("rep size")?;
            let p: f64 = p_override.map_or_else(|| p.parse().context("rep probability"), Ok)?;
            Ok(model::gen_single_shot_code(n, p)?)
        }
        ["mem", n, cycles, pdata, pmeas] => {
            let n: usize = n.parse().context("mem size")?;
            let cycles: usize = cycles.parse().context("mem cycles")?;
            let (pd, pm) = match p_override {
                Some(p) => (p, p),
                None => (
                    pdata.parse().context("data probability")?,
                    pmeas.parse().context("measurement probability")?,
                ),
            };
            Ok(model::gen_memory_code(n, cycles, pd, pm)?)
        }
        _ => bail!("bad --gen spec `{spec}`: expected rep:<n>:<p> or mem:<n>:<T>:<pdata>:<pmeas>"),
    }
}

#[derive(Args, Clone)]
struct RelayArgs {
    /// Arithmetic: f64 or intN.S.M (e.g. int4.2.8).
    #[arg(long, default_value = "f64")]
    precision: String,
    /// Uniform memory strength of the first leg.
    #[arg(long, default_value_t = 0.125)]
    gamma0: f64,
    /// Lower end of the per-node memory-strength range (legs >= 1).
    #[arg(long, default_value_t = -0.24)]
    gamma_min: f64,
    /// Upper end of the per-node memory-strength range (legs >= 1).
    #[arg(long, default_value_t = 0.66)]
    gamma_max: f64,
    /// Iteration cap of the first leg.
    #[arg(long = "t0", default_value_t = 80)]
    t0: usize,
    /// Iteration cap of every later leg.
    #[arg(long = "tr", default_value_t = 60)]
    tr: usize,
    /// Maximum number of legs.
    #[arg(long, default_value_t = 600)]
    legs: usize,
    /// Stop after this many solutions; the lowest weight wins.
    #[arg(long, default_value_t = 1)]
    solutions: usize,
    /// Min-sum scaling factor on the check-node value path.
    #[arg(long, default_value = "on", value_parser = ["on", "off"])]
    alpha: String,
    /// Master seed; all randomness derives from it.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl RelayArgs {
    fn config(&self) -> Result<RelayConfig> {
        let config = RelayConfig {
            solutions_sought: self.solutions,
            max_legs: self.legs,
            iters_leg0: self.t0,
            iters_leg: self.tr,
            gamma0: self.gamma0,
            gamma_min: self.gamma_min,
            gamma_max: self.gamma_max,
            alpha_enabled: self.alpha == "on",
            seed: self.seed,
        };
        config.validate().map_err(|e| anyhow!("{e}"))?;
        Ok(config)
    }

    fn precision(&self) -> Result<Precision> {
        Precision::from_str(&self.precision).map_err(|e| anyhow!("{e}"))
    }
}

#[derive(Args)]
struct DecodeArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    relay: RelayArgs,
    /// Syndrome as a 0/1 string, e.g. 10110.
    #[arg(long, value_name = "BITS", conflicts_with = "syndrome_file")]
    syndrome: Option<String>,
    /// File holding the syndrome bits on one line.
    #[arg(long, value_name = "PATH")]
    syndrome_file: Option<PathBuf>,
    /// Write a per-iteration trace CSV (fixed-point precision only).
    #[arg(long, value_name = "PATH")]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    relay: RelayArgs,
    /// Number of shots per sweep point.
    #[arg(long, default_value_t = 1000)]
    shots: u64,
    /// Decoder variant: plain BP, one memory-BP leg, or the full relay.
    #[arg(long, default_value = "relay", value_parser = ["bp", "dmem", "relay"])]
    variant: String,
    /// Comma-separated error probabilities to sweep (requires --gen).
    #[arg(long, value_name = "LIST")]
    sweep_p: Option<String>,
    /// Comma-separated precisions to sweep (overrides --precision).
    #[arg(long, value_name = "LIST")]
    sweep_precision: Option<String>,
    /// Worker threads (0 = all cores). Output does not depend on it.
    #[arg(long, default_value_t = 0)]
    threads: usize,
    /// Also write the CSV to this file.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct WindowBenchArgs {
    #[command(flatten)]
    bench: BenchArgs,
    /// Window width in cycles.
    #[arg(long, value_name = "W")]
    window: usize,
    /// Commit width in cycles (1 <= C < W).
    #[arg(long, value_name = "C")]
    commit: usize,
    /// Residual carry: full span or a single block past the commit region.
    #[arg(long, default_value = "full", value_parser = ["full", "single"])]
    carry: String,
    /// Decoder iteration time in nanoseconds (budget accounting).
    #[arg(long, default_value_t = 24.0)]
    iter_ns: f64,
    /// Syndrome cadence in nanoseconds.
    #[arg(long, default_value_t = 1000.0)]
    cycle_ns: f64,
    /// Fixed per-window overhead in nanoseconds.
    #[arg(long, default_value_t = 0.0)]
    overhead_ns: f64,
    /// Replay a recorded detector stream instead of sampling shots.
    #[arg(long, value_name = "PATH")]
    replay: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    relay: RelayArgs,
    /// Number of random (model, syndrome, seed) triples.
    #[arg(long, default_value_t = 1000)]
    trials: u64,
    /// Negative control: perturb the reference summation order; mismatches
    /// are then expected.
    #[arg(long, default_value_t = false)]
    perturb_order: bool,
}

#[derive(Args)]
struct GenArgs {
    /// Generator spec, as for --gen.
    #[arg(long, value_name = "SPEC")]
    gen: String,
    /// Output file (stdout if omitted).
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}

fn run() -> Result<ExitCode> {
    let cli = Cli::parse();
    match cli.command {
        Command::Decode(args) => cmd_decode(args),
        Command::Bench(args) => cmd_bench(args),
        Command::WindowBench(args) => cmd_window_bench(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Gen(args) => cmd_gen(args),
    }
}

fn parse_bits(s: &str) -> Result<Vec<u8>> {
    s.trim()
        .chars()
        .map(|c| match c {
            '0' => Ok(0),
            '1' => Ok(1),
            other => bail!("bad bit character `{other}`"),
        })
        .collect()
}

fn cmd_decode(args: DecodeArgs) -> Result<ExitCode> {
    let model = args.model.load()?;
    let config = args.relay.config()?;
    let precision = args.relay.precision()?;
    let bits = match (&args.syndrome, &args.syndrome_file) {
        (Some(s), None) => parse_bits(s)?,
        (None, Some(path)) => parse_bits(
            &fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?,
        )?,
        _ => bail!("exactly one of --syndrome or --syndrome-file is required"),
    };
    if bits.len() != model.num_checks() {
        bail!(
            "syndrome has {} bits, model has {} checks",
            bits.len(),
            model.num_checks()
        );
    }
    let sigma = Syndrome(bits);

    let outcome = match (&precision, &args.trace) {
        (Precision::F64, None) => relay_decode(&model, &sigma, &config),
        (Precision::F64, Some(_)) => {
            bail!("--trace needs a fixed-point precision (the trace holds integer marginals)")
        }
        (Precision::Fixed(spec), trace) => {
            let mut rows = String::new();
            let mut sink = |iter: u32, marginals: &[i32], estimate: &[u8]| {
                for (node, (m, e)) in marginals.iter().zip(estimate).enumerate() {
                    writeln!(rows, "{iter},{node},{m},{e}").unwrap();
                }
            };
            let out = gateware_decode_masked(
                &model,
                &sigma,
                &config,
                spec,
                None,
                trace.as_ref().map(|_| &mut sink as qldpc_relay::gateware::TraceFn),
            )
            .map_err(|e| anyhow!("{e}"))?;
            if let Some(path) = trace {
                fs::write(path, format!("iter,node,marginal,ehat\n{rows}"))?;
            }
            out
        }
    };

    println!("converged: {}", outcome.converged);
    println!("iterations: {}", outcome.iterations_total);
    println!("legs: {}", outcome.legs_used);
    println!("weight: {}", outcome.weight);
    let support = outcome.error_estimate.support();
    println!(
        "support: {}",
        support
            .iter()
            .map(|j| j.to_string())
            .collect::<Vec<_>>()
            .join(" ")
    );
    Ok(if outcome.converged {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    })
}

fn install_thread_pool(threads: usize) -> Result<()> {
    if threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .context("building thread pool")?;
    }
    Ok(())
}

fn parse_sweep<T: FromStr>(list: &Option<String>) -> Result<Option<Vec<T>>>
where
    T::Err: std::fmt::Display,
{
    match list {
        None => Ok(None),
        Some(s) => s
            .split(',')
            .map(|t| t.trim().parse::<T>().map_err(|e| anyhow!("bad sweep item `{t}`: {e}")))
            .collect::<Result<Vec<T>>>()
            .map(Some),
    }
}

/// Maps the variant flag onto a relay configuration.
fn apply_variant(mut config: RelayConfig, variant: &str) -> RelayConfig {
    match variant {
        "bp" => {
            config.gamma0 = 0.0;
            config.max_legs = 1;
            config.solutions_sought = 1;
        }
        "dmem" => {
            config.max_legs = 1;
            config.solutions_sought = 1;
        }
        _ => {}
    }
    config
}

struct SweepOutput {
    csv: String,
}

impl SweepOutput {
    fn new() -> Self {
        Self {
            csv: format!("{CSV_HEADER}\n"),
        }
    }

    fn push(&mut self, report: &BenchReport, p_label: &str, precision: &Precision, variant: &str) {
        self.csv
            .push_str(&report.csv_row(p_label, &precision.to_string(), variant));
        self.csv.push('\n');
    }

    fn emit(self, out: &Option<PathBuf>) -> Result<()> {
        print!("{}", self.csv);
        if let Some(path) = out {
            fs::write(path, &self.csv).with_context(|| format!("writing {}", path.display()))?;
        }
        Ok(())
    }
}

fn sweep_points(args: &BenchArgs) -> Result<Vec<(Option<f64>, Precision)>> {
    let precisions: Vec<Precision> = match parse_sweep::<Precision>(&args.sweep_precision)? {
        Some(list) => list,
        None => vec![args.relay.precision()?],
    };
    let ps: Vec<Option<f64>> = match parse_sweep::<f64>(&args.sweep_p)? {
        Some(list) => list.into_iter().map(Some).collect(),
        None => vec![None],
    };
    let mut points = Vec::new();
    for p in &ps {
        for precision in &precisions {
            points.push((*p, *precision));
        }
    }
    Ok(points)
}

fn cmd_bench(args: BenchArgs) -> Result<ExitCode> {
    install_thread_pool(args.threads)?;
    let base_config = args.relay.config()?;
    let config = apply_variant(base_config, &args.variant);
    let mut output = SweepOutput::new();
    for (p, precision) in sweep_points(&args)? {
        let (model, label) = match p {
            Some(p) => (args.model.load_with_p(p)?, format!("{p}")),
            None => (args.model.load()?, args.model.p_label()),
        };
        let report = bench::run_shots(&model, &config, &precision, args.shots, args.relay.seed);
        output.push(&report, &label, &precision, &args.variant);
    }
    output.emit(&args.out)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_window_bench(args: WindowBenchArgs) -> Result<ExitCode> {
    install_thread_pool(args.bench.threads)?;
    if let Some(stream) = &args.replay {
        return replay_stream(&args, stream);
    }
    let base_config = args.bench.relay.config()?;
    let config = apply_variant(base_config, &args.bench.variant);
    let timing = TimingModel::new(args.iter_ns, args.cycle_ns, args.overhead_ns);
    let mut output = SweepOutput::new();
    for (p, precision) in sweep_points(&args.bench)? {
        let (model, label) = match p {
            Some(p) => (args.bench.model.load_with_p(p)?, format!("{p}")),
            None => (args.bench.model.load()?, args.bench.model.p_label()),
        };
        let mut wcfg = window::build_window_model(&model, args.window, args.commit)
            .map_err(|e| anyhow!("{e}"))?;
        wcfg.carry_mode = carry_mode(&args.carry);
        let report = bench::run_windowed_shots(
            &model,
            &wcfg,
            &config,
            &precision,
            args.bench.shots,
            args.bench.relay.seed,
            Some(&timing),
        )
        .map_err(|e| anyhow!("{e}"))?;
        output.push(&report, &label, &precision, &args.bench.variant);
    }
    output.emit(&args.bench.out)?;
    Ok(ExitCode::SUCCESS)
}

fn carry_mode(flag: &str) -> window::CarryMode {
    match flag {
        "single" => window::CarryMode::SingleBlock,
        _ => window::CarryMode::FullResidual,
    }
}

/// Replays a recorded stream: `d <bits>` per cycle, optional final
/// `c <bits>`, `END`.
fn replay_stream(args: &WindowBenchArgs, path: &PathBuf) -> Result<ExitCode> {
    let model = args.bench.model.load()?;
    let config = apply_variant(args.bench.relay.config()?, &args.bench.variant);
    let precision = args.bench.relay.precision()?;
    let mut wcfg = window::build_window_model(&model, args.window, args.commit)
        .map_err(|e| anyhow!("{e}"))?;
    wcfg.carry_mode = carry_mode(&args.carry);

    let mut decoder = |m: &DecodingModel, mask: &[bool], s: &Syndrome| match &precision {
        Precision::F64 => qldpc_relay::bp::relay_decode_masked(m, s, &config, Some(mask)),
        Precision::Fixed(spec) => {
            gateware_decode_masked(m, s, &config, spec, Some(mask), None)
                .expect("model within degree cap")
        }
    };

    let text =
        fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut state = WindowState::new(&wcfg, model.num_logicals());
    let mut reported = 0usize;
    let report_new = |state: &WindowState, reported: &mut usize| {
        for r in &state.records()[*reported..] {
            println!(
                "win {} converged={} iters={}",
                r.start_cycle,
                if r.converged { 1 } else { 0 },
                r.iterations
            );
        }
        *reported = state.records().len();
    };
    for (no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let event = if let Some(bits) = line.strip_prefix("d ") {
            StreamEvent::Detectors(parse_bits(bits)?)
        } else if let Some(bits) = line.strip_prefix("c ") {
            StreamEvent::Codeword(parse_bits(bits)?)
        } else if line == "END" {
            StreamEvent::End
        } else {
            bail!("line {}: unrecognized stream line `{line}`", no + 1);
        };
        window::ingest(&mut state, &wcfg, event).map_err(|e| anyhow!("line {}: {e}", no + 1))?;
        while window::try_decode_window(&mut state, &wcfg, &mut decoder).is_some() {}
        report_new(&state, &mut reported);
    }
    if !state.is_terminal() {
        bail!("stream ended without a codeword or END line");
    }
    let (frame, ocorr) = window::finalize(&mut state, &wcfg, &mut decoder)
        .map_err(|e| anyhow!("{e}"))?;
    report_new(&state, &mut reported);
    let to_bits = |v: &[u8]| v.iter().map(|b| b.to_string()).collect::<String>();
    println!("frame {}", to_bits(&frame));
    println!("ocorr {}", to_bits(&ocorr));
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(args: VerifyArgs) -> Result<ExitCode> {
    let spec: PrecisionSpec = match args.relay.precision()? {
        Precision::Fixed(spec) => spec,
        Precision::F64 => PrecisionSpec::int4_2_8(),
    };
    let order = if args.perturb_order {
        SumOrder::Reversed
    } else {
        SumOrder::LeftToRight
    };

    // Dual-path trials at the requested precision plus a narrow accumulator,
    // so the saturation regime is covered.
    let mut mismatches = 0usize;
    for (label, spec) in [
        (format!("{spec}"), spec),
        ("narrow".to_string(), verify::narrow_accumulator_spec()),
    ] {
        let report =
            verify::dual_path_trials(args.trials as usize, args.relay.seed, &spec, order);
        println!(
            "dual-path {label}: {} trials, {} mismatches",
            report.trials,
            report.mismatches.len()
        );
        for case in report.mismatches.iter().take(3) {
            println!("--- mismatch ({}) ---", case.detail);
            println!("seed: {}", case.seed);
            println!("sigma: {}", case.sigma.iter().map(|b| b.to_string()).collect::<String>());
            print!("{}", case.model_text);
            let replays = verify::replay(case, &spec, order);
            println!("replay reproduces: {replays}");
        }
        mismatches += report.mismatches.len();
    }

    // Zero-memory reduction checks on random instances, float and fixed.
    let mut rng = qldpc_relay::rng::XorShift64Star::seeded(args.relay.seed ^ 0x5eed);
    let mut reduction_failures = 0usize;
    let reduction_trials = (args.trials / 4).max(8);
    for _ in 0..reduction_trials {
        let model = verify::random_model(&mut rng, 10, 20);
        let sigma = verify::random_syndrome(&mut rng, model.num_checks());
        if !verify::reduction_check_f64(&model, &sigma, 10, true) {
            reduction_failures += 1;
        }
        if !verify::reduction_check_int(&model, &sigma, &spec, 10, true) {
            reduction_failures += 1;
        }
    }
    println!("zero-memory reduction: {reduction_trials} trials, {reduction_failures} failures");

    if mismatches + reduction_failures > 0 {
        eprintln!("verification FAILED");
        return Ok(ExitCode::from(1));
    }
    println!("verification OK");
    Ok(ExitCode::SUCCESS)
}

fn cmd_gen(args: GenArgs) -> Result<ExitCode> {
    let model = build_generated(&args.gen, None)?;
    let text = model::render_model(&model);
    match &args.out {
        Some(path) => {
            fs::write(path, text).with_context(|| format!("writing {}", path.display()))?
        }
        None => print!("{text}"),
    }
    Ok(ExitCode::SUCCESS)
}
