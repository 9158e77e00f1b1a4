//! Cross-validation harness.
//!
//! Three independent routes through the same algorithm are compared here:
//! the float reference ([`crate::bp`]), the gateware emulation
//! ([`crate::gateware`]), and the per-edge fixed-point reference
//! ([`crate::fixed_ref`]). This module also hosts plain min-sum decoders
//! written in a deliberately naive dense style; with zero memory strength
//! the memory-BP paths must reproduce their message traces value for value.

use crate::bp::{self, RelayConfig};
use crate::fixed_ref::{self, SumOrder};
use crate::gateware::{self, GatewareState, Interconnect};
use crate::model::{render_model, ColumnSpec, DecodingModel, Syndrome};
use crate::qarith::{BetaInt, PrecisionSpec};
use crate::rng::XorShift64Star;

/// Per-iteration message snapshots in a canonical edge order: for every
/// error column `j` in order, for every neighboring check (adjacency order),
/// the outgoing and resolved incoming message on that edge.
#[derive(Debug, Clone, PartialEq)]
pub struct MessageTrace<T> {
    pub nu: Vec<Vec<T>>,
    pub mu: Vec<Vec<T>>,
    pub marginals: Vec<Vec<T>>,
    pub estimates: Vec<Vec<u8>>,
}

impl<T> MessageTrace<T> {
    fn empty() -> Self {
        Self {
            nu: Vec::new(),
            mu: Vec::new(),
            marginals: Vec::new(),
            estimates: Vec::new(),
        }
    }
}

// ---------------------------------------------------------------------------
// Memory-BP trace capture (float path)
// ---------------------------------------------------------------------------

/// Steps one memory-BP leg in binary64 for exactly `iterations` iterations
/// (no convergence exit) and records the full message trace.
pub fn dmem_trace_f64(
    model: &DecodingModel,
    sigma: &Syndrome,
    gammas: &[f64],
    iterations: usize,
    alpha_enabled: bool,
) -> MessageTrace<f64> {
    let mut state = bp::MessageState::new(model);
    state.reset_messages_to_priors(model);
    let mut trace = MessageTrace::empty();
    for t in 1..=iterations {
        bp::update_bias(&mut state, gammas);
        bp::check_to_error_messages(&mut state, model, sigma, t, alpha_enabled);
        bp::error_to_check_messages(&mut state, model);
        let estimate = bp::update_marginals_and_decision(&mut state, model);
        let mut nu = Vec::new();
        let mut mu = Vec::new();
        for j in 0..model.num_errors() {
            for k in 0..model.error_neighbors(j).len() {
                nu.push(state.outgoing_message(model, j, k));
                mu.push(state.incoming_message(j, k));
            }
        }
        trace.nu.push(nu);
        trace.mu.push(mu);
        trace.marginals.push(state.marginal.clone());
        trace.estimates.push(estimate.0.clone());
    }
    trace
}

// ---------------------------------------------------------------------------
// Plain min-sum (float, dense textbook form)
// ---------------------------------------------------------------------------

/// Textbook min-sum decoder on dense message matrices, with no memory term:
/// the bias is the prior weight at every iteration. Runs exactly
/// `iterations` iterations (no early exit) and records the trace.
pub fn plain_min_sum_trace_f64(
    model: &DecodingModel,
    sigma: &Syndrome,
    iterations: usize,
    alpha_enabled: bool,
) -> MessageTrace<f64> {
    let m = model.num_checks();
    let n = model.num_errors();
    let weights = model.weights();
    let mut nu = vec![vec![0.0f64; n]; m]; // nu[i][j]: error j toward check i
    let mut mu = vec![vec![0.0f64; n]; m]; // mu[i][j]: check i toward error j
    for j in 0..n {
        for &i in model.error_neighbors(j) {
            nu[i][j] = weights[j];
        }
    }
    let mut trace = MessageTrace::empty();
    for t in 1..=iterations {
        let scale = if alpha_enabled {
            1.0 - 2f64.powi(-(t as i32))
        } else {
            1.0
        };
        for i in 0..m {
            let syndrome_sign = if sigma.0[i] == 0 { 1.0 } else { -1.0 };
            for &j in model.check_neighbors(i) {
                let mut sign = 1.0;
                let mut min_mag = bp::MAX_MESSAGE_MAGNITUDE;
                for &j2 in model.check_neighbors(i) {
                    if j2 == j {
                        continue;
                    }
                    sign *= if nu[i][j2] < 0.0 { -1.0 } else { 1.0 };
                    let mag = nu[i][j2].abs();
                    if mag < min_mag {
                        min_mag = mag;
                    }
                }
                mu[i][j] = sign * syndrome_sign * (scale * min_mag);
            }
        }
        let mut marginals = vec![0.0f64; n];
        let mut estimate = vec![0u8; n];
        for j in 0..n {
            for &i in model.error_neighbors(j) {
                let mut acc = weights[j];
                for &i2 in model.error_neighbors(j) {
                    if i2 != i {
                        acc += mu[i2][j];
                    }
                }
                nu[i][j] = acc;
            }
            let mut acc = weights[j];
            for &i in model.error_neighbors(j) {
                acc += mu[i][j];
            }
            marginals[j] = acc;
            estimate[j] = (acc < 0.0) as u8;
        }
        let mut nu_row = Vec::new();
        let mut mu_row = Vec::new();
        for j in 0..n {
            for &i in model.error_neighbors(j) {
                nu_row.push(nu[i][j]);
                mu_row.push(mu[i][j]);
            }
        }
        trace.nu.push(nu_row);
        trace.mu.push(mu_row);
        trace.marginals.push(marginals);
        trace.estimates.push(estimate);
    }
    trace
}

// ---------------------------------------------------------------------------
// Gateware trace capture (fixed point)
// ---------------------------------------------------------------------------

/// Steps the gateware CNU/VNU pair for a fixed number of iterations with the
/// given per-node memory strengths and records the trace. `BetaInt(M)` on
/// every node is standard BP.
pub fn gateware_trace_int(
    model: &DecodingModel,
    sigma: &Syndrome,
    spec: &PrecisionSpec,
    betas: &[BetaInt],
    iterations: usize,
    alpha_enabled: bool,
) -> MessageTrace<i64> {
    let ic = Interconnect::build(model);
    let mut state = GatewareState::new(model, &ic, spec);
    let mut estimate = vec![0u8; model.num_errors()];
    gateware::vnu_step(&mut state, &ic, spec, &[], true, &mut estimate);
    let mut trace = MessageTrace::empty();
    for t in 1..=iterations {
        gateware::cnu_step(&mut state, &ic, sigma, spec, t as u32, alpha_enabled);
        // Resolved incoming messages, captured before the VNU overwrites nu.
        let mut mu_row = Vec::new();
        for j in 0..model.num_errors() {
            for ee in ic.error_edge_range(j) {
                let i = ic.edge_check(ee);
                let ce = ic.to_check_edge(ee);
                let mag = if state.cnu.selector[ce] {
                    state.cnu.min2[i]
                } else {
                    state.cnu.min1[i]
                };
                mu_row.push(state.cnu.sign[ce] as i64 * mag as i64);
            }
        }
        gateware::vnu_step(&mut state, &ic, spec, betas, false, &mut estimate);
        let mut nu_row = Vec::new();
        for j in 0..model.num_errors() {
            for ee in ic.error_edge_range(j) {
                let ce = ic.to_check_edge(ee);
                nu_row.push(state.nu_sign[ce] as i64 * state.nu_mag[ce] as i64);
            }
        }
        trace.nu.push(nu_row);
        trace.mu.push(mu_row);
        trace
            .marginals
            .push(state.marginal.iter().map(|&v| v as i64).collect());
        trace.estimates.push(estimate.clone());
    }
    trace
}

// ---------------------------------------------------------------------------
// Plain min-sum (fixed point, dense textbook form)
// ---------------------------------------------------------------------------

/// Textbook fixed-point min-sum on dense matrices: bias is the quantized
/// prior at every iteration, saturating sums left to right in adjacency
/// order.
pub fn plain_min_sum_trace_int(
    model: &DecodingModel,
    sigma: &Syndrome,
    spec: &PrecisionSpec,
    iterations: usize,
    alpha_enabled: bool,
) -> MessageTrace<i64> {
    use crate::qarith::{alpha_scale_int, quantize_prior, saturating_add, SignMag};
    let m = model.num_checks();
    let n = model.num_errors();
    let priors: Vec<i32> = model
        .weights()
        .iter()
        .map(|&w| quantize_prior(w, spec) as i32)
        .collect();
    let mut nu = vec![vec![0i32; n]; m];
    let mut mu = vec![vec![0i32; n]; m];
    for j in 0..n {
        for &i in model.error_neighbors(j) {
            nu[i][j] = priors[j];
        }
    }
    let mut trace = MessageTrace::empty();
    for t in 1..=iterations {
        for i in 0..m {
            let syndrome_sign: i32 = if sigma.0[i] == 0 { 1 } else { -1 };
            for &j in model.check_neighbors(i) {
                let mut sign = 1i32;
                let mut min_mag = u32::MAX;
                for &j2 in model.check_neighbors(i) {
                    if j2 == j {
                        continue;
                    }
                    sign *= if nu[i][j2] < 0 { -1 } else { 1 };
                    min_mag = min_mag.min(nu[i][j2].unsigned_abs());
                }
                if min_mag == u32::MAX {
                    min_mag = spec.max_magnitude();
                }
                let mag = if alpha_enabled {
                    alpha_scale_int(min_mag, t as u32, spec)
                } else {
                    min_mag
                };
                mu[i][j] = sign * syndrome_sign * mag as i32;
            }
        }
        let mut marginals = vec![0i64; n];
        let mut estimate = vec![0u8; n];
        for j in 0..n {
            for &i in model.error_neighbors(j) {
                let mut acc = priors[j];
                for &i2 in model.error_neighbors(j) {
                    if i2 != i {
                        acc = saturating_add(acc, mu[i2][j], spec);
                    }
                }
                nu[i][j] = SignMag::from_value(acc as i64, spec).value() as i32;
            }
            let mut acc = priors[j];
            for &i in model.error_neighbors(j) {
                acc = saturating_add(acc, mu[i][j], spec);
            }
            marginals[j] = acc as i64;
            estimate[j] = (acc < 0) as u8;
        }
        let mut nu_row = Vec::new();
        let mut mu_row = Vec::new();
        for j in 0..n {
            for &i in model.error_neighbors(j) {
                nu_row.push(nu[i][j] as i64);
                mu_row.push(mu[i][j] as i64);
            }
        }
        trace.nu.push(nu_row);
        trace.mu.push(mu_row);
        trace.marginals.push(marginals);
        trace.estimates.push(estimate);
    }
    trace
}

// ---------------------------------------------------------------------------
// Random instances and the dual-path trial driver
// ---------------------------------------------------------------------------

/// Random sparse decoding problem: up to `max_errors` columns of degree 1-4
/// over up to `max_checks` checks, priors in (0.01, 0.25). The low priors
/// give large quantized weights, so fixed-point runs regularly reach the
/// saturation regime where summation order matters.
pub fn random_model(rng: &mut XorShift64Star, max_checks: usize, max_errors: usize) -> DecodingModel {
    let m = 2 + (rng.next_u64() as usize) % (max_checks - 1);
    let n = 3 + (rng.next_u64() as usize) % (max_errors - 2);
    let columns = (0..n)
        .map(|_| {
            let degree = 1 + (rng.next_u64() as usize) % 4.min(m);
            let mut checks: Vec<usize> = Vec::new();
            while checks.len() < degree {
                let i = (rng.next_u64() as usize) % m;
                if !checks.contains(&i) {
                    checks.push(i);
                }
            }
            checks.sort_unstable();
            let logicals = if rng.next_u64() % 2 == 0 { vec![0] } else { vec![] };
            ColumnSpec {
                checks,
                logicals,
                prior: 0.01 + 0.24 * rng.next_f64(),
            }
        })
        .collect();
    DecodingModel::from_columns(m, 1, columns, None).expect("random model is valid")
}

/// The default scheme with a deliberately narrow marginal accumulator
/// (`2^5 - 1` ceiling); saturating adds clip constantly, which is the
/// regime that distinguishes summation orders.
pub fn narrow_accumulator_spec() -> PrecisionSpec {
    PrecisionSpec::with_marginal_bits(4, 2.0, 3, 6).unwrap()
}

pub fn random_syndrome(rng: &mut XorShift64Star, m: usize) -> Syndrome {
    Syndrome((0..m).map(|_| (rng.next_u64() & 1) as u8).collect())
}

/// A reproducible dual-path disagreement.
#[derive(Debug, Clone)]
pub struct MismatchCase {
    pub model_text: String,
    pub sigma: Vec<u8>,
    pub seed: u64,
    pub detail: String,
}

/// Outcome of a batch of dual-path trials.
#[derive(Debug, Clone)]
pub struct DualPathReport {
    pub trials: usize,
    pub mismatches: Vec<MismatchCase>,
}

/// Runs `trials` random (model, syndrome, seed) triples through both
/// fixed-point paths and compares outcomes and full marginal traces.
/// `order` perturbs the per-edge reference's summation order; anything but
/// left-to-right is expected to produce mismatches.
pub fn dual_path_trials(
    trials: usize,
    master_seed: u64,
    spec: &PrecisionSpec,
    order: SumOrder,
) -> DualPathReport {
    let mut rng = XorShift64Star::seeded(master_seed);
    let mut mismatches = Vec::new();
    for trial in 0..trials {
        let model = random_model(&mut rng, 12, 24);
        let sigma = random_syndrome(&mut rng, model.num_checks());
        let seed = rng.next_u64();
        let config = RelayConfig {
            solutions_sought: 1,
            max_legs: 3,
            iters_leg0: 8,
            iters_leg: 5,
            ..RelayConfig::reference(seed)
        };
        if let Some(detail) = compare_paths(&model, &sigma, &config, spec, order) {
            mismatches.push(MismatchCase {
                model_text: render_model(&model),
                sigma: sigma.0.clone(),
                seed,
                detail: format!("trial {trial}: {detail}"),
            });
        }
    }
    DualPathReport {
        trials,
        mismatches,
    }
}

/// Compares the two fixed-point paths on one instance. Returns a description
/// of the first disagreement, if any.
pub fn compare_paths(
    model: &DecodingModel,
    sigma: &Syndrome,
    config: &RelayConfig,
    spec: &PrecisionSpec,
    order: SumOrder,
) -> Option<String> {
    let mut gw_marginals: Vec<Vec<i32>> = Vec::new();
    let gw = gateware::gateware_decode_masked(
        model,
        sigma,
        config,
        spec,
        None,
        Some(&mut |_iter, marginals: &[i32], _est: &[u8]| {
            gw_marginals.push(marginals.to_vec());
        }),
    )
    .expect("degree cap");
    let mut fr_marginals: Vec<Vec<i32>> = Vec::new();
    let fr = fixed_ref::decode_traced(model, sigma, config, spec, None, order, &mut |_,
        marginals,
        _| {
        fr_marginals.push(marginals.to_vec());
    });
    if gw.error_estimate != fr.error_estimate {
        return Some("hard decisions differ".into());
    }
    if gw.converged != fr.converged {
        return Some("convergence flags differ".into());
    }
    if gw.iterations_total != fr.iterations_total || gw.per_leg_iterations != fr.per_leg_iterations
    {
        return Some(format!(
            "iteration counts differ: {:?} vs {:?}",
            gw.per_leg_iterations, fr.per_leg_iterations
        ));
    }
    if gw.legs_used != fr.legs_used || gw.solutions_found != fr.solutions_found {
        return Some("leg accounting differs".into());
    }
    if gw_marginals != fr_marginals {
        return Some("marginal traces differ".into());
    }
    None
}

/// Replays a recorded mismatch case; true means the disagreement reproduces.
pub fn replay(case: &MismatchCase, spec: &PrecisionSpec, order: SumOrder) -> bool {
    let model = crate::model::parse_model(&case.model_text).expect("dump parses");
    let sigma = Syndrome(case.sigma.clone());
    let config = RelayConfig {
        solutions_sought: 1,
        max_legs: 3,
        iters_leg0: 8,
        iters_leg: 5,
        ..RelayConfig::reference(case.seed)
    };
    compare_paths(&model, &sigma, &config, spec, order).is_some()
}

/// Zero-memory reduction check (float): the memory-BP trace with all-zero
/// strengths must equal the plain min-sum trace value for value.
pub fn reduction_check_f64(
    model: &DecodingModel,
    sigma: &Syndrome,
    iterations: usize,
    alpha_enabled: bool,
) -> bool {
    let gammas = vec![0.0; model.num_errors()];
    let dmem = dmem_trace_f64(model, sigma, &gammas, iterations, alpha_enabled);
    let plain = plain_min_sum_trace_f64(model, sigma, iterations, alpha_enabled);
    traces_equal(&dmem, &plain)
}

/// Zero-memory reduction check (fixed point): the gateware with
/// `beta_int = M` must equal plain fixed-point min-sum value for value.
pub fn reduction_check_int(
    model: &DecodingModel,
    sigma: &Syndrome,
    spec: &PrecisionSpec,
    iterations: usize,
    alpha_enabled: bool,
) -> bool {
    let betas = vec![BetaInt(spec.mem_scale()); model.num_errors()];
    let gw = gateware_trace_int(model, sigma, spec, &betas, iterations, alpha_enabled);
    let plain = plain_min_sum_trace_int(model, sigma, spec, iterations, alpha_enabled);
    gw == plain
}

fn traces_equal(a: &MessageTrace<f64>, b: &MessageTrace<f64>) -> bool {
    a == b
}
