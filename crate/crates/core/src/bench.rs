//! Monte Carlo benchmarking: error sampling, logical-error-rate estimation
//! with Wilson intervals, the exhaustive maximum-a-posteriori oracle used as
//! desk-scale ground truth, and real-time budget accounting.
//!
//! Shots are independent tasks over a worker pool. Every shot derives its own
//! seed from `(run seed, shot index)`, so reports are bitwise identical for
//! any thread count.

use std::collections::HashMap;

use rayon::prelude::*;
use thiserror::Error;

use crate::bp::{relay_decode, relay_decode_masked, RelayConfig};
use crate::gateware::{gateware_decode, gateware_decode_masked};
use crate::model::{DecodingModel, ErrorVector, Syndrome};
use crate::qarith::Precision;
use crate::rng::{splitmix64, XorShift64Star};
use crate::window::{self, StreamEvent, WindowConfig, WindowState};

#[derive(Debug, Error, PartialEq)]
pub enum BenchError {
    #[error("exhaustive oracle needs N <= 24, model has {0} columns")]
    OracleTooLarge(usize),
    #[error("windowed run needs readout matrices on the model layout")]
    MissingReadout,
    #[error("window error: {0}")]
    Window(#[from] crate::window::WindowError),
}

/// Hardware timing figures for budget accounting, in nanoseconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimingModel {
    /// Duration of one decoder iteration.
    pub iteration_ns: f64,
    /// Syndrome cadence (one cycle of detectors arrives per this interval).
    pub cycle_ns: f64,
    /// Fixed per-window overhead.
    pub overhead_ns: f64,
}

impl TimingModel {
    pub fn new(iteration_ns: f64, cycle_ns: f64, overhead_ns: f64) -> Self {
        assert!(iteration_ns > 0.0 && cycle_ns >= 0.0 && overhead_ns >= 0.0);
        Self {
            iteration_ns,
            cycle_ns,
            overhead_ns,
        }
    }
}

/// Iterations a window may spend while staying real-time: decoding a window
/// frees `C` cycles of cadence, minus fixed overhead, divided by the
/// iteration time. The window width does not enter; the commit stride sets
/// the sustained rate.
pub fn realtime_budget(timing: &TimingModel, _window_width: usize, commit_width: usize) -> usize {
    let avail = commit_width as f64 * timing.cycle_ns - timing.overhead_ns;
    if avail <= 0.0 {
        return 0;
    }
    (avail / timing.iteration_ns).floor() as usize
}

/// Draws an error pattern with independent per-column priors.
pub fn sample_error(model: &DecodingModel, rng: &mut XorShift64Star) -> ErrorVector {
    ErrorVector(
        model
            .priors()
            .iter()
            .map(|&p| (rng.next_f64() < p) as u8)
            .collect(),
    )
}

/// Scoring of one decoded shot.
#[derive(Debug, Clone, PartialEq)]
pub struct ShotResult {
    /// Syndrome reproduced and logical action matched.
    pub success: bool,
    pub converged: bool,
    pub iterations: usize,
    pub legs: usize,
    pub weight: f64,
}

/// 95% Wilson score interval for `failures` out of `shots`.
pub fn wilson_interval(failures: u64, shots: u64) -> (f64, f64) {
    if shots == 0 {
        return (0.0, 1.0);
    }
    let z = 1.959963984540054_f64;
    let n = shots as f64;
    let p = failures as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = p + z2 / (2.0 * n);
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    // At the boundaries the exact bound is the boundary itself; rounding in
    // the sqrt would otherwise leave a sliver excluding the point estimate.
    let lo = if failures == 0 {
        0.0
    } else {
        ((center - half) / denom).max(0.0)
    };
    let hi = if failures == shots {
        1.0
    } else {
        ((center + half) / denom).min(1.0)
    };
    (lo, hi)
}

/// Aggregated Monte Carlo statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub shots: u64,
    pub failures: u64,
    pub logical_error_rate: f64,
    pub ler_lo: f64,
    pub ler_hi: f64,
    pub mean_iterations: f64,
    pub p95_iterations: usize,
    pub convergence_fraction: f64,
    /// Windowed mode: fraction of windows whose iteration count exceeded the
    /// real-time budget. Zero when no timing model applies.
    pub budget_fraction: f64,
    /// Windowed mode: total window invocations and how many converged.
    pub windows_total: u64,
    pub windows_converged: u64,
}

pub const CSV_HEADER: &str =
    "p,precision,variant,shots,failures,ler,ler_lo,ler_hi,mean_iters,p95_iters,conv_frac,budget_frac";

impl BenchReport {
    /// One CSV row under [`CSV_HEADER`]. Fixed formatting keeps re-runs
    /// byte-identical.
    pub fn csv_row(&self, p_label: &str, precision: &str, variant: &str) -> String {
        format!(
            "{},{},{},{},{},{:.6e},{:.6e},{:.6e},{:.4},{},{:.6},{:.6}",
            p_label,
            precision,
            variant,
            self.shots,
            self.failures,
            self.logical_error_rate,
            self.ler_lo,
            self.ler_hi,
            self.mean_iterations,
            self.p95_iterations,
            self.convergence_fraction,
            self.budget_fraction,
        )
    }

    fn from_shots(results: &[ShotResult], window_stats: Option<(u64, u64, u64)>) -> Self {
        let shots = results.len() as u64;
        let failures = results.iter().filter(|r| !r.success).count() as u64;
        let (lo, hi) = wilson_interval(failures, shots);
        let total_iters: u64 = results.iter().map(|r| r.iterations as u64).sum();
        let mut iters: Vec<usize> = results.iter().map(|r| r.iterations).collect();
        iters.sort_unstable();
        let p95 = if iters.is_empty() {
            0
        } else {
            let rank = ((0.95 * iters.len() as f64).ceil() as usize).clamp(1, iters.len());
            iters[rank - 1]
        };
        let converged = results.iter().filter(|r| r.converged).count() as u64;
        let (windows_total, windows_converged, over_budget) =
            window_stats.unwrap_or((0, 0, 0));
        BenchReport {
            shots,
            failures,
            logical_error_rate: if shots == 0 {
                0.0
            } else {
                failures as f64 / shots as f64
            },
            ler_lo: lo,
            ler_hi: hi,
            mean_iterations: if shots == 0 {
                0.0
            } else {
                total_iters as f64 / shots as f64
            },
            p95_iterations: p95,
            convergence_fraction: if shots == 0 {
                0.0
            } else {
                converged as f64 / shots as f64
            },
            budget_fraction: if windows_total == 0 {
                0.0
            } else {
                over_budget as f64 / windows_total as f64
            },
            windows_total,
            windows_converged,
        }
    }
}

/// Seed for one shot: mixes the run seed with the shot index.
pub fn shot_seed(run_seed: u64, shot_index: u64) -> u64 {
    splitmix64(run_seed ^ shot_index)
}

fn decode_with(
    model: &DecodingModel,
    sigma: &Syndrome,
    config: &RelayConfig,
    precision: &Precision,
) -> crate::bp::DecodeOutcome {
    match precision {
        Precision::F64 => relay_decode(model, sigma, config),
        Precision::Fixed(spec) => {
            gateware_decode(model, sigma, config, spec).expect("model within degree cap")
        }
    }
}

/// Samples, decodes, and scores one shot.
pub fn run_one_shot(
    model: &DecodingModel,
    config: &RelayConfig,
    precision: &Precision,
    seed: u64,
) -> ShotResult {
    let mut rng = XorShift64Star::seeded(seed);
    let error = sample_error(model, &mut rng);
    let sigma = model.apply_check_matrix(&error);
    let shot_config = RelayConfig { seed, ..*config };
    let outcome = decode_with(model, &sigma, &shot_config, precision);
    let parity_ok = model.apply_check_matrix(&outcome.error_estimate) == sigma;
    let action_ok =
        model.apply_action_matrix(&outcome.error_estimate) == model.apply_action_matrix(&error);
    // A non-converged decode failed the parity check at every iteration, so
    // scoring can never call it a success.
    debug_assert!(outcome.converged || !parity_ok);
    ShotResult {
        success: parity_ok && action_ok,
        converged: outcome.converged,
        iterations: outcome.iterations_total,
        legs: outcome.legs_used,
        weight: outcome.weight,
    }
}

/// Monte Carlo run over the global (unwindowed) model.
pub fn run_shots(
    model: &DecodingModel,
    config: &RelayConfig,
    precision: &Precision,
    shots: u64,
    seed: u64,
) -> BenchReport {
    let results: Vec<ShotResult> = (0..shots)
        .into_par_iter()
        .map(|i| run_one_shot(model, config, precision, shot_seed(seed, i)))
        .collect();
    BenchReport::from_shots(&results, None)
}

/// Exhaustive maximum-a-posteriori decoding of one syndrome.
#[derive(Debug, Clone, PartialEq)]
pub struct MapDecision {
    /// Most probable logical class (one bit per logical observable).
    pub best_class: Vec<u8>,
    /// Lowest-weight representative of the winning class.
    pub representative: ErrorVector,
    /// Total probability mass of the winning class, normalized over all
    /// syndrome-consistent patterns.
    pub class_probability: f64,
}

/// Enumerates every error pattern consistent with the syndrome, accumulates
/// probability per logical class, and returns the winner. Requires
/// `N <= 24`.
pub fn map_oracle(model: &DecodingModel, sigma: &Syndrome) -> Result<MapDecision, BenchError> {
    let n = model.num_errors();
    if n > 24 {
        return Err(BenchError::OracleTooLarge(n));
    }
    assert_eq!(sigma.len(), model.num_checks(), "syndrome length mismatch");
    let mut class_mass: HashMap<u64, f64> = HashMap::new();
    let mut class_best: HashMap<u64, (f64, u64)> = HashMap::new();
    let weights = model.weights();
    for bits in 0..(1u64 << n) {
        let e = ErrorVector((0..n).map(|j| ((bits >> j) & 1) as u8).collect());
        if model.apply_check_matrix(&e) != *sigma {
            continue;
        }
        // Pr(e) is proportional to exp(-weight(e)); the shared prefactor
        // cancels in the argmax.
        let weight: f64 = e
            .0
            .iter()
            .zip(weights)
            .filter(|(&b, _)| b != 0)
            .map(|(_, &w)| w)
            .sum();
        let class = model
            .apply_action_matrix(&e)
            .iter()
            .enumerate()
            .fold(0u64, |acc, (k, &b)| acc | ((b as u64) << k));
        *class_mass.entry(class).or_insert(0.0) += (-weight).exp();
        let entry = class_best.entry(class).or_insert((f64::INFINITY, 0));
        if weight < entry.0 {
            *entry = (weight, bits);
        }
    }
    let total: f64 = class_mass.values().sum();
    // Deterministic tie-breaking by class code.
    let (&winner, &mass) = class_mass
        .iter()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap().then(b.0.cmp(a.0)))
        .expect("syndrome has no consistent error pattern");
    let rep_bits = class_best[&winner].1;
    Ok(MapDecision {
        best_class: (0..model.num_logicals())
            .map(|k| ((winner >> k) & 1) as u8)
            .collect(),
        representative: ErrorVector((0..n).map(|j| ((rep_bits >> j) & 1) as u8).collect()),
        class_probability: mass / total,
    })
}

// ---------------------------------------------------------------------------
// Windowed runs
// ---------------------------------------------------------------------------

/// Builds the final readout consistent with a sampled error: the cumulative
/// detector parity fixes the chain differences, and the first bit is chosen
/// so the readout carries the error's true logical action.
fn synthesize_codeword(
    readout: &crate::model::ReadoutMatrices,
    total_syndrome: &[u8],
    logical: &[u8],
) -> Vec<u8> {
    // The generated memory codes use chain readout checks {q, q+1}.
    debug_assert!(readout
        .noiseless_checks
        .iter()
        .enumerate()
        .all(|(i, row)| row == &vec![i, i + 1]));
    debug_assert_eq!(readout.logical_readout, vec![vec![0]]);
    let mut c = vec![0u8; readout.num_qubits];
    c[0] = logical.first().copied().unwrap_or(0);
    for q in 0..total_syndrome.len() {
        c[q + 1] = c[q] ^ total_syndrome[q];
    }
    c
}

/// Per-shot windowed outcome.
#[derive(Debug, Clone)]
struct WindowedShot {
    result: ShotResult,
    windows: u64,
    windows_converged: u64,
    windows_over_budget: u64,
}

/// Runs one sampled error through the full streaming pipeline and scores the
/// corrected observables against the noiseless ones.
pub fn run_one_windowed_shot(
    model: &DecodingModel,
    wcfg: &WindowConfig,
    config: &RelayConfig,
    precision: &Precision,
    seed: u64,
) -> Result<(ShotResult, Vec<window::WindowRecord>), BenchError> {
    let layout = model.layout().expect("windowed run needs a layout");
    let readout = wcfg.readout.as_ref().ok_or(BenchError::MissingReadout)?;
    let m_prime = layout.detectors_per_cycle;
    let cycles = layout.cycles;

    let mut rng = XorShift64Star::seeded(seed);
    let error = sample_error(model, &mut rng);
    let full_history = model.apply_check_matrix(&error);
    let logical = model.apply_action_matrix(&error);
    let total_syndrome: Vec<u8> = (0..m_prime)
        .map(|i| {
            (0..cycles).fold(0u8, |acc, c| acc ^ full_history.0[c * m_prime + i])
        })
        .collect();
    let codeword = synthesize_codeword(readout, &total_syndrome, &logical);

    let shot_config = RelayConfig { seed, ..*config };
    let mut decoder = |m: &DecodingModel, mask: &[bool], s: &Syndrome| match precision {
        Precision::F64 => relay_decode_masked(m, s, &shot_config, Some(mask)),
        Precision::Fixed(spec) => {
            gateware_decode_masked(m, s, &shot_config, spec, Some(mask), None)
                .expect("model within degree cap")
        }
    };

    let mut state = WindowState::new(wcfg, model.num_logicals());
    for c in 0..cycles - 1 {
        let block = full_history.0[c * m_prime..(c + 1) * m_prime].to_vec();
        window::ingest(&mut state, wcfg, StreamEvent::Detectors(block))?;
        // Decode eagerly so the pipeline drains as data arrives.
        while window::try_decode_window(&mut state, wcfg, &mut decoder).is_some() {}
    }
    window::ingest(&mut state, wcfg, StreamEvent::Codeword(codeword))?;
    let (_frame, corrected) = window::finalize(&mut state, wcfg, &mut decoder)?;

    let success = corrected.iter().all(|&b| b == 0);
    let records = state.records().to_vec();
    let iterations: usize = records.iter().map(|r| r.iterations).sum();
    let legs: usize = records.iter().map(|r| r.legs).sum();
    let converged = records.iter().all(|r| r.converged);
    Ok((
        ShotResult {
            success,
            converged,
            iterations,
            legs,
            weight: 0.0,
        },
        records,
    ))
}

/// Monte Carlo run through the sliding-window pipeline. `timing` enables
/// per-window budget accounting.
pub fn run_windowed_shots(
    model: &DecodingModel,
    wcfg: &WindowConfig,
    config: &RelayConfig,
    precision: &Precision,
    shots: u64,
    seed: u64,
    timing: Option<&TimingModel>,
) -> Result<BenchReport, BenchError> {
    let budget = timing.map(|t| realtime_budget(t, wcfg.window_width, wcfg.commit_width));
    let per_shot: Result<Vec<WindowedShot>, BenchError> = (0..shots)
        .into_par_iter()
        .map(|i| {
            let (result, records) =
                run_one_windowed_shot(model, wcfg, config, precision, shot_seed(seed, i))?;
            let windows = records.len() as u64;
            let windows_converged = records.iter().filter(|r| r.converged).count() as u64;
            let windows_over_budget = match budget {
                Some(b) => records.iter().filter(|r| r.iterations > b).count() as u64,
                None => 0,
            };
            Ok(WindowedShot {
                result,
                windows,
                windows_converged,
                windows_over_budget,
            })
        })
        .collect();
    let per_shot = per_shot?;
    let results: Vec<ShotResult> = per_shot.iter().map(|s| s.result.clone()).collect();
    let windows_total: u64 = per_shot.iter().map(|s| s.windows).sum();
    let windows_converged: u64 = per_shot.iter().map(|s| s.windows_converged).sum();
    let over_budget: u64 = per_shot.iter().map(|s| s.windows_over_budget).sum();
    Ok(BenchReport::from_shots(
        &results,
        Some((windows_total, windows_converged, over_budget)),
    ))
}
