//! Straightforward fixed-point decoder: every exclusive minimum and
//! exclusive sign product is computed per edge, directly from the message
//! definitions, with the same [`crate::qarith`] primitives and the same
//! left-to-right summation order as the gateware emulation.
//!
//! This path exists to cross-check [`crate::gateware`]: the two share no
//! message-passing code, yet must agree bitwise on marginals, hard decisions,
//! and iteration/leg counts for every input.

use crate::bp::{DecodeOutcome, RelayConfig};
use crate::gateware::{beta_range, draw_beta, masked_syndrome_ok};
use crate::model::{DecodingModel, ErrorVector, Syndrome};
use crate::qarith::{
    alpha_scale_int, beta_to_int, quantize_prior, saturate_marginal, saturating_add,
    scaled_beta_mul, scaled_gamma_mul, BetaInt, PrecisionSpec, SignMag,
};
use crate::rng::node_rng;

/// Direction of the (non-associative) saturating sums. `Reversed` exists as
/// a negative control for the cross-check harness: it must produce
/// detectable mismatches against the gateware path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SumOrder {
    #[default]
    LeftToRight,
    Reversed,
}

struct FixedState {
    /// Error-to-check messages, stored at the check side:
    /// `nu_at_check[i][k]` comes from the k-th neighbor of check i.
    nu_at_check: Vec<Vec<i32>>,
    /// Check-to-error messages, stored at the error side.
    mu_at_error: Vec<Vec<i32>>,
    prior: Vec<u32>,
    bias: Vec<i32>,
    marginal: Vec<i32>,
    /// Position of check i within the adjacency of its k-th neighbor error.
    check_pos: Vec<Vec<usize>>,
    /// Position of error j within the adjacency of its k-th neighbor check.
    error_pos: Vec<Vec<usize>>,
}

impl FixedState {
    fn new(model: &DecodingModel, spec: &PrecisionSpec) -> Self {
        let m = model.num_checks();
        let n = model.num_errors();
        let mut check_pos = vec![Vec::new(); m];
        let mut seen_at_error = vec![0usize; n];
        for i in 0..m {
            for &j in model.check_neighbors(i) {
                check_pos[i].push(seen_at_error[j]);
                seen_at_error[j] += 1;
            }
        }
        let mut error_pos = vec![Vec::new(); n];
        let mut seen_at_check = vec![0usize; m];
        for j in 0..n {
            for &i in model.error_neighbors(j) {
                error_pos[j].push(seen_at_check[i]);
                seen_at_check[i] += 1;
            }
        }
        let prior: Vec<u32> = model
            .weights()
            .iter()
            .map(|&w| quantize_prior(w, spec))
            .collect();
        Self {
            nu_at_check: (0..m)
                .map(|i| vec![0; model.check_neighbors(i).len()])
                .collect(),
            mu_at_error: (0..n)
                .map(|j| vec![0; model.error_neighbors(j).len()])
                .collect(),
            bias: prior.iter().map(|&p| p as i32).collect(),
            marginal: prior.iter().map(|&p| p as i32).collect(),
            prior,
            check_pos,
            error_pos,
        }
    }

    fn reset_messages(&mut self, model: &DecodingModel) {
        for j in 0..model.num_errors() {
            for (k, &i) in model.error_neighbors(j).iter().enumerate() {
                self.nu_at_check[i][self.error_pos[j][k]] = self.prior[j] as i32;
            }
        }
    }
}

fn sign_of(v: i32) -> i32 {
    if v < 0 {
        -1
    } else {
        1
    }
}

fn check_update(
    state: &mut FixedState,
    model: &DecodingModel,
    sigma: &Syndrome,
    spec: &PrecisionSpec,
    t: u32,
    alpha_enabled: bool,
) {
    for i in 0..model.num_checks() {
        let syndrome_sign = if sigma.0[i] == 0 { 1 } else { -1 };
        let incoming = &state.nu_at_check[i];
        for (k, &j) in model.check_neighbors(i).iter().enumerate() {
            let mut sign = 1i32;
            let mut min_mag = u32::MAX;
            for (k2, &nu) in incoming.iter().enumerate() {
                if k2 == k {
                    continue;
                }
                sign *= sign_of(nu);
                min_mag = min_mag.min(nu.unsigned_abs());
            }
            if min_mag == u32::MAX {
                min_mag = spec.max_magnitude();
            }
            let mag = if alpha_enabled {
                alpha_scale_int(min_mag, t, spec)
            } else {
                min_mag
            };
            state.mu_at_error[j][state.check_pos[i][k]] = sign * syndrome_sign * mag as i32;
        }
    }
}

fn variable_update(
    state: &mut FixedState,
    model: &DecodingModel,
    spec: &PrecisionSpec,
    betas: &[BetaInt],
    order: SumOrder,
    estimate: &mut [u8],
) {
    for j in 0..model.num_errors() {
        let beta = betas[j];
        let prior_term =
            saturate_marginal(scaled_beta_mul(state.prior[j] as i64, beta, spec), spec);
        let mem_term =
            saturate_marginal(scaled_gamma_mul(state.marginal[j] as i64, beta, spec), spec);
        let bias = saturating_add(prior_term, mem_term, spec);
        state.bias[j] = bias;

        let incoming = &state.mu_at_error[j];
        let indices: Vec<usize> = match order {
            SumOrder::LeftToRight => (0..incoming.len()).collect(),
            SumOrder::Reversed => (0..incoming.len()).rev().collect(),
        };
        for (k, &i) in model.error_neighbors(j).iter().enumerate() {
            let mut acc = bias;
            for &k2 in &indices {
                if k2 != k {
                    acc = saturating_add(acc, incoming[k2], spec);
                }
            }
            let sm = SignMag::from_value(acc as i64, spec);
            state.nu_at_check[i][state.error_pos[j][k]] = sm.value() as i32;
        }
        let mut acc = bias;
        for &k2 in &indices {
            acc = saturating_add(acc, incoming[k2], spec);
        }
        state.marginal[j] = acc;
        estimate[j] = (acc < 0) as u8;
    }
}

/// Fixed-point relay decode with per-edge exclusive computations.
pub fn decode(
    model: &DecodingModel,
    sigma: &Syndrome,
    config: &RelayConfig,
    spec: &PrecisionSpec,
) -> DecodeOutcome {
    decode_masked(model, sigma, config, spec, None, SumOrder::LeftToRight)
}

/// As [`decode`], with a convergence mask and a selectable summation order.
pub fn decode_masked(
    model: &DecodingModel,
    sigma: &Syndrome,
    config: &RelayConfig,
    spec: &PrecisionSpec,
    mask: Option<&[bool]>,
    order: SumOrder,
) -> DecodeOutcome {
    decode_inner(model, sigma, config, spec, mask, order, None)
}

/// As [`decode_masked`], invoking `trace` after every iteration with the
/// global iteration index, marginals, and hard decisions.
pub fn decode_traced(
    model: &DecodingModel,
    sigma: &Syndrome,
    config: &RelayConfig,
    spec: &PrecisionSpec,
    mask: Option<&[bool]>,
    order: SumOrder,
    trace: crate::gateware::TraceFn<'_>,
) -> DecodeOutcome {
    decode_inner(model, sigma, config, spec, mask, order, Some(trace))
}

fn decode_inner(
    model: &DecodingModel,
    sigma: &Syndrome,
    config: &RelayConfig,
    spec: &PrecisionSpec,
    mask: Option<&[bool]>,
    order: SumOrder,
    mut trace: Option<crate::gateware::TraceFn<'_>>,
) -> DecodeOutcome {
    config.validate().expect("invalid relay configuration");
    assert_eq!(sigma.len(), model.num_checks(), "syndrome length mismatch");

    let n = model.num_errors();
    let mut state = FixedState::new(model, spec);
    state.reset_messages(model);

    let uniform_beta = beta_to_int(config.gamma0, spec);
    let (beta_lo, beta_hi) = beta_range(config, spec);
    let mut betas = vec![uniform_beta; n];
    let mut estimate = vec![0u8; n];

    let mut best: Option<(Vec<u8>, u64)> = None;
    let mut solutions = 0usize;
    let mut per_leg = Vec::new();
    let mut total_iters = 0usize;
    let mut global_iter = 0u32;

    for leg in 0..config.max_legs {
        if leg > 0 {
            state.reset_messages(model);
            for (j, b) in betas.iter_mut().enumerate() {
                let mut rng = node_rng(config.seed, j, leg);
                *b = draw_beta(&mut rng, beta_lo, beta_hi);
            }
        }
        let cap = if leg == 0 {
            config.iters_leg0
        } else {
            config.iters_leg
        };
        let mut converged = false;
        let mut iters = 0usize;
        for t in 1..=cap {
            check_update(&mut state, model, sigma, spec, t as u32, config.alpha_enabled);
            variable_update(&mut state, model, spec, &betas, order, &mut estimate);
            global_iter += 1;
            if let Some(trace) = trace.as_deref_mut() {
                trace(global_iter, &state.marginal, &estimate);
            }
            iters = t;
            if masked_syndrome_ok(model, &estimate, sigma, mask) {
                converged = true;
                break;
            }
        }
        per_leg.push(iters);
        total_iters += iters;
        if converged {
            let weight: u64 = estimate
                .iter()
                .zip(&state.prior)
                .filter(|(&e, _)| e != 0)
                .map(|(_, &p)| p as u64)
                .sum();
            solutions += 1;
            let better = match &best {
                None => true,
                Some((_, w)) => weight < *w,
            };
            if better {
                best = Some((estimate.clone(), weight));
            }
            if solutions == config.solutions_sought {
                break;
            }
        }
    }

    let legs_used = per_leg.len();
    let (converged, bits) = match best {
        Some((bits, _)) => (true, bits),
        None => (false, estimate),
    };
    let error_estimate = ErrorVector(bits);
    let weight = model.solution_weight(&error_estimate);
    DecodeOutcome {
        converged,
        error_estimate,
        weight,
        iterations_total: total_iters,
        legs_used,
        solutions_found: solutions,
        per_leg_iterations: per_leg,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gateware::gateware_decode;
    use crate::model::gen_single_shot_code;

    #[test]
    fn agrees_with_gateware_on_small_cases() {
        let model = gen_single_shot_code(6, 0.12).unwrap();
        let spec = PrecisionSpec::int4_2_8();
        let config = RelayConfig {
            iters_leg0: 6,
            iters_leg: 4,
            max_legs: 5,
            ..RelayConfig::reference(11)
        };
        for s in 0..32u32 {
            let sigma = Syndrome((0..5).map(|i| ((s >> i) & 1) as u8).collect());
            let a = decode(&model, &sigma, &config, &spec);
            let b = gateware_decode(&model, &sigma, &config, &spec).unwrap();
            assert_eq!(a, b, "mismatch for syndrome {s:05b}");
        }
    }

    #[test]
    fn reversed_order_differs_under_saturation() {
        // bias 10 with incoming {+15, +15, -15} at a +/-15 accumulator:
        // left to right clips at 15 twice and ends at 0; reversed ends at 15.
        use crate::model::{ColumnSpec, DecodingModel};
        let columns = vec![ColumnSpec {
            checks: vec![0, 1, 2],
            logicals: vec![],
            prior: 0.1,
        }];
        let model = DecodingModel::from_columns(3, 0, columns, None).unwrap();
        let spec = PrecisionSpec::with_marginal_bits(4, 2.0, 3, 5).unwrap();
        let mut state = FixedState::new(&model, &spec);
        state.prior[0] = 10;
        state.marginal[0] = 10;
        state.mu_at_error[0] = vec![15, 15, -15];
        let mut est = vec![0u8];
        let betas = vec![crate::qarith::BetaInt(8)];
        variable_update(&mut state, &model, &spec, &betas, SumOrder::LeftToRight, &mut est);
        let forward = state.marginal[0];
        state.prior[0] = 10;
        state.marginal[0] = 10;
        state.mu_at_error[0] = vec![15, 15, -15];
        variable_update(&mut state, &model, &spec, &betas, SumOrder::Reversed, &mut est);
        assert_eq!(forward, 0);
        assert_eq!(state.marginal[0], 15);
    }
}
