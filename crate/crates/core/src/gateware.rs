//! Cycle-faithful emulation of the FPGA decoder core.
//!
//! One check node unit (CNU) per check row and one variable node unit (VNU)
//! per error column, connected by a fixed interconnect, stepped in a
//! two-phase flooding schedule (all CNUs, then all VNUs). The CNU does not
//! resolve the exclusive minimum per edge; it emits the smallest and
//! second-smallest incoming magnitudes plus a selector bit, and the receiving
//! VNU picks the right one. All arithmetic is the fixed-point kind defined in
//! [`crate::qarith`]; saturating adds run left to right in adjacency order,
//! and that order is part of the bit-exactness contract.

use crate::bp::{DecodeOutcome, RelayConfig};
use crate::model::{DecodingModel, ErrorVector, Syndrome};
use crate::qarith::{
    alpha_scale_int, beta_to_int, quantize_prior, saturate_marginal, saturating_add,
    scaled_beta_mul, scaled_gamma_mul, BetaInt, PrecisionSpec, SignMag,
};
use crate::rng::{node_rng, XorShift64Star};

use thiserror::Error;

/// Per-node degree bound of the emulated hardware.
pub const MAX_NODE_DEGREE: usize = 32;

#[derive(Debug, Error, PartialEq)]
pub enum GatewareError {
    #[error("node degree {degree} exceeds the implementation cap {MAX_NODE_DEGREE}")]
    DegreeTooLarge { degree: usize },
}

/// Edge-indexed routing tables precomputed from a model so the per-iteration
/// steps perform no searches.
///
/// Edges are numbered check-major (grouped by check, in adjacency order) and
/// again error-major; permutation tables link the two numberings.
#[derive(Debug, Clone)]
pub struct Interconnect {
    num_checks: usize,
    num_errors: usize,
    /// Start of check i's edge slice; length `num_checks + 1`.
    check_start: Vec<usize>,
    /// Error column of each check-major edge.
    check_edge_error: Vec<usize>,
    /// Start of error j's edge slice; length `num_errors + 1`.
    error_start: Vec<usize>,
    /// Check row of each error-major edge.
    error_edge_check: Vec<usize>,
    /// Check-major edge index of each error-major edge.
    error_to_check_edge: Vec<usize>,
}

impl Interconnect {
    pub fn build(model: &DecodingModel) -> Self {
        let m = model.num_checks();
        let n = model.num_errors();
        let mut check_start = Vec::with_capacity(m + 1);
        let mut check_edge_error = Vec::with_capacity(model.num_edges());
        check_start.push(0);
        for i in 0..m {
            check_edge_error.extend_from_slice(model.check_neighbors(i));
            check_start.push(check_edge_error.len());
        }
        let mut error_start = Vec::with_capacity(n + 1);
        let mut error_edge_check = Vec::with_capacity(model.num_edges());
        error_start.push(0);
        for j in 0..n {
            error_edge_check.extend_from_slice(model.error_neighbors(j));
            error_start.push(error_edge_check.len());
        }
        // Adjacency lists are strictly increasing, so walking errors in
        // order visits each check's edge slice in order.
        let mut cursor: Vec<usize> = (0..m).map(|i| check_start[i]).collect();
        let mut error_to_check_edge = vec![0usize; error_edge_check.len()];
        for (ee, &i) in error_edge_check.iter().enumerate() {
            error_to_check_edge[ee] = cursor[i];
            cursor[i] += 1;
        }
        Self {
            num_checks: m,
            num_errors: n,
            check_start,
            check_edge_error,
            error_start,
            error_edge_check,
            error_to_check_edge,
        }
    }

    pub fn num_edges(&self) -> usize {
        self.check_edge_error.len()
    }

    pub fn check_edge_range(&self, i: usize) -> std::ops::Range<usize> {
        self.check_start[i]..self.check_start[i + 1]
    }

    pub fn error_edge_range(&self, j: usize) -> std::ops::Range<usize> {
        self.error_start[j]..self.error_start[j + 1]
    }

    /// Error column on the far side of a check-major edge.
    pub fn edge_error(&self, check_edge: usize) -> usize {
        self.check_edge_error[check_edge]
    }

    /// Check row on the far side of an error-major edge.
    pub fn edge_check(&self, error_edge: usize) -> usize {
        self.error_edge_check[error_edge]
    }

    /// Check-major index of an error-major edge.
    pub fn to_check_edge(&self, error_edge: usize) -> usize {
        self.error_to_check_edge[error_edge]
    }

    pub fn max_degree(&self) -> usize {
        let c = (0..self.num_checks)
            .map(|i| self.check_edge_range(i).len())
            .max()
            .unwrap_or(0);
        let e = (0..self.num_errors)
            .map(|j| self.error_edge_range(j).len())
            .max()
            .unwrap_or(0);
        c.max(e)
    }
}

/// CNU outputs for one iteration: per-edge sign and selector, per-check
/// scaled minimum pair.
#[derive(Debug, Clone)]
pub struct CnuOutput {
    /// Per check-major edge: exclusive sign product times `(-1)^sigma`.
    pub sign: Vec<i8>,
    /// Set exactly on the first edge attaining the minimum magnitude.
    pub selector: Vec<bool>,
    /// Per check: smallest incoming magnitude, scaled.
    pub min1: Vec<u32>,
    /// Per check: second-smallest incoming magnitude, scaled.
    pub min2: Vec<u32>,
}

/// All registers of one decoder instance.
#[derive(Debug, Clone)]
pub struct GatewareState {
    /// Outgoing error-to-check messages, check-major, sign-magnitude.
    pub nu_sign: Vec<i8>,
    pub nu_mag: Vec<u32>,
    pub cnu: CnuOutput,
    /// Two's-complement marginal per error node.
    pub marginal: Vec<i32>,
    /// Unsigned quantized prior per error node.
    pub prior: Vec<u32>,
    /// Bias register per error node.
    pub bias: Vec<i32>,
    /// Iteration counter within the current leg (1-based once stepping).
    pub iteration: u32,
    pub leg: u32,
}

impl GatewareState {
    pub fn new(model: &DecodingModel, ic: &Interconnect, spec: &PrecisionSpec) -> Self {
        let priors: Vec<u32> = model
            .weights()
            .iter()
            .map(|&w| quantize_prior(w, spec))
            .collect();
        let edges = ic.num_edges();
        Self {
            nu_sign: vec![1; edges],
            nu_mag: vec![0; edges],
            cnu: CnuOutput {
                sign: vec![1; edges],
                selector: vec![false; edges],
                min1: vec![0; ic.num_checks],
                min2: vec![0; ic.num_checks],
            },
            marginal: vec![0; ic.num_errors],
            prior: priors,
            bias: vec![0; ic.num_errors],
            iteration: 0,
            leg: 0,
        }
    }

    /// Controller init: biases and marginals load priors (first leg only),
    /// messages load priors.
    pub fn init_from_priors(&mut self, ic: &Interconnect) {
        for j in 0..ic.num_errors {
            self.bias[j] = self.prior[j] as i32;
            self.marginal[j] = self.prior[j] as i32;
        }
        self.reset_messages_to_priors(ic);
    }

    /// Leg start: every outgoing message reloads the prior; marginals carry.
    pub fn reset_messages_to_priors(&mut self, ic: &Interconnect) {
        for j in 0..ic.num_errors {
            for ee in ic.error_edge_range(j) {
                let ce = ic.to_check_edge(ee);
                self.nu_sign[ce] = 1;
                self.nu_mag[ce] = self.prior[j];
            }
        }
        self.iteration = 0;
    }

    /// Debug validator: every stored value inside its declared range.
    pub fn validate_ranges(&self, spec: &PrecisionSpec) -> bool {
        let max_mag = spec.max_magnitude();
        let max_marg = spec.max_marginal();
        self.nu_mag.iter().all(|&v| v <= max_mag)
            && self.nu_sign.iter().all(|&s| s == 1 || s == -1)
            && self.cnu.min1.iter().all(|&v| v <= max_mag)
            && self.cnu.min2.iter().all(|&v| v <= max_mag)
            && self.marginal.iter().all(|&v| v.abs() <= max_marg)
            && self.bias.iter().all(|&v| v.abs() <= max_marg)
            && self.prior.iter().all(|&v| v <= max_mag)
    }
}

/// One CNU phase: per check, the total sign and the two smallest incoming
/// magnitudes (the first attainer holds the selector), then per-edge signs
/// with the syndrome factored in. The scaling factor applies on the value
/// path before emission.
pub fn cnu_step(
    state: &mut GatewareState,
    ic: &Interconnect,
    sigma: &Syndrome,
    spec: &PrecisionSpec,
    t: u32,
    alpha_enabled: bool,
) {
    let max_mag = spec.max_magnitude();
    for i in 0..ic.num_checks {
        let range = ic.check_edge_range(i);
        let mut total_sign: i8 = 1;
        let mut min1 = u32::MAX;
        let mut min2 = u32::MAX;
        let mut min1_edge = usize::MAX;
        for ce in range.clone() {
            total_sign *= state.nu_sign[ce];
            let mag = state.nu_mag[ce];
            if mag < min1 {
                min2 = min1;
                min1 = mag;
                min1_edge = ce;
            } else if mag < min2 {
                min2 = mag;
            }
        }
        // Empty exclusive sets resolve to the maximum representable
        // magnitude: min2 for degree-1 checks, both for degree-0.
        if min1 == u32::MAX {
            min1 = max_mag;
        }
        if min2 == u32::MAX {
            min2 = max_mag;
        }
        let (min1, min2) = if alpha_enabled {
            (
                alpha_scale_int(min1, t, spec),
                alpha_scale_int(min2, t, spec),
            )
        } else {
            (min1, min2)
        };
        state.cnu.min1[i] = min1;
        state.cnu.min2[i] = min2;
        let syndrome_sign: i8 = if sigma.0[i] == 0 { 1 } else { -1 };
        for ce in range {
            // Exclusive product via division by the edge's own sign, which
            // for +/-1 values is multiplication.
            state.cnu.sign[ce] = total_sign * state.nu_sign[ce] * syndrome_sign;
            state.cnu.selector[ce] = ce == min1_edge;
        }
    }
}

/// One VNU phase: resolve each incoming exclusive minimum via the selector,
/// update the bias register, and produce outgoing messages, marginals, and
/// hard decisions with fixed left-to-right saturating adder trees.
///
/// With `init` set the unit loads priors instead (first relay iteration).
pub fn vnu_step(
    state: &mut GatewareState,
    ic: &Interconnect,
    spec: &PrecisionSpec,
    leg_betas: &[BetaInt],
    init: bool,
    estimate: &mut [u8],
) {
    if init {
        state.init_from_priors(ic);
        for (j, e) in estimate.iter_mut().enumerate() {
            *e = (state.marginal[j] < 0) as u8;
        }
        return;
    }
    let mut resolved: Vec<i32> = Vec::with_capacity(MAX_NODE_DEGREE);
    for j in 0..ic.num_errors {
        let range = ic.error_edge_range(j);
        resolved.clear();
        for ee in range.clone() {
            let i = ic.edge_check(ee);
            let ce = ic.to_check_edge(ee);
            let mag = if state.cnu.selector[ce] {
                state.cnu.min2[i]
            } else {
                state.cnu.min1[i]
            };
            resolved.push(state.cnu.sign[ce] as i32 * mag as i32);
        }

        // Bias register: prior-side term then memory-side term, saturating.
        let beta = leg_betas[j];
        let prior_term =
            saturate_marginal(scaled_beta_mul(state.prior[j] as i64, beta, spec), spec);
        let mem_term =
            saturate_marginal(scaled_gamma_mul(state.marginal[j] as i64, beta, spec), spec);
        let bias = saturating_add(prior_term, mem_term, spec);
        state.bias[j] = bias;

        // Outgoing messages: exclusive left-to-right sums, re-encoded to
        // sign-magnitude at the message width.
        for (k, ee) in range.clone().enumerate() {
            let mut acc = bias;
            for (k2, &mu) in resolved.iter().enumerate() {
                if k2 != k {
                    acc = saturating_add(acc, mu, spec);
                }
            }
            let sm = SignMag::from_value(acc as i64, spec);
            let ce = ic.to_check_edge(ee);
            state.nu_sign[ce] = sm.sign;
            state.nu_mag[ce] = sm.mag;
        }

        // Marginal: full left-to-right sum; the hard decision is the sign
        // bit, so an exact zero decodes as no-error.
        let mut acc = bias;
        for &mu in &resolved {
            acc = saturating_add(acc, mu, spec);
        }
        state.marginal[j] = acc;
        estimate[j] = (acc < 0) as u8;
    }
}

/// Quantized memory-strength draw from a node generator:
/// `beta_lo + (next mod (beta_hi - beta_lo + 1))`.
pub fn draw_beta(rng: &mut XorShift64Star, beta_lo: u32, beta_hi: u32) -> BetaInt {
    BetaInt(rng.next_in_range(beta_lo as u64, beta_hi as u64) as u32)
}

/// Inclusive quantized range corresponding to `[gamma_min, gamma_max]`.
/// Larger memory strength means smaller beta, so the endpoints swap.
pub fn beta_range(config: &RelayConfig, spec: &PrecisionSpec) -> (u32, u32) {
    (
        beta_to_int(config.gamma_max, spec).0,
        beta_to_int(config.gamma_min, spec).0,
    )
}

pub(crate) fn masked_syndrome_ok(
    model: &DecodingModel,
    estimate: &[u8],
    sigma: &Syndrome,
    mask: Option<&[bool]>,
) -> bool {
    for i in 0..model.num_checks() {
        if let Some(mask) = mask {
            if !mask[i] {
                continue;
            }
        }
        let mut parity = 0u8;
        for &j in model.check_neighbors(i) {
            parity ^= estimate[j];
        }
        if parity != sigma.0[i] {
            return false;
        }
    }
    true
}

/// Full fixed-point relay decode.
pub fn gateware_decode(
    model: &DecodingModel,
    sigma: &Syndrome,
    config: &RelayConfig,
    spec: &PrecisionSpec,
) -> Result<DecodeOutcome, GatewareError> {
    gateware_decode_masked(model, sigma, config, spec, None, None)
}

/// Observer invoked after every iteration with (global iteration index, node
/// marginals, hard decisions).
pub type TraceFn<'a> = &'a mut dyn FnMut(u32, &[i32], &[u8]);

/// Fixed-point relay decode with an optional convergence mask over checks
/// and an optional per-iteration trace hook.
pub fn gateware_decode_masked(
    model: &DecodingModel,
    sigma: &Syndrome,
    config: &RelayConfig,
    spec: &PrecisionSpec,
    mask: Option<&[bool]>,
    mut trace: Option<TraceFn<'_>>,
) -> Result<DecodeOutcome, GatewareError> {
    config.validate().expect("invalid relay configuration");
    assert_eq!(sigma.len(), model.num_checks(), "syndrome length mismatch");

    let ic = Interconnect::build(model);
    let degree = ic.max_degree();
    if degree > MAX_NODE_DEGREE {
        return Err(GatewareError::DegreeTooLarge { degree });
    }

    let n = model.num_errors();
    let mut state = GatewareState::new(model, &ic, spec);
    let mut estimate = vec![0u8; n];
    vnu_step(&mut state, &ic, spec, &[], true, &mut estimate);

    let uniform_beta = beta_to_int(config.gamma0, spec);
    let (beta_lo, beta_hi) = beta_range(config, spec);
    let mut betas = vec![uniform_beta; n];

    let mut best: Option<(Vec<u8>, u64)> = None;
    let mut solutions = 0usize;
    let mut per_leg = Vec::new();
    let mut total_iters = 0usize;
    let mut global_iter = 0u32;

    for leg in 0..config.max_legs {
        state.leg = leg as u32;
        if leg > 0 {
            state.reset_messages_to_priors(&ic);
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
            state.iteration = t as u32;
            cnu_step(&mut state, &ic, sigma, spec, t as u32, config.alpha_enabled);
            vnu_step(&mut state, &ic, spec, &betas, false, &mut estimate);
            debug_assert!(state.validate_ranges(spec));
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
            // Solution weights compare in the scaled-integer domain.
            let weight: u64 = estimate
                .iter()
                .zip(&state.prior)
                .filter(|(&e, _)| e != 0)
                .map(|(_, &p)| p as u64)
                .sum();
            solutions += 1;
            let better = match &best {
                None => true,
                Some((_, best_weight)) => weight < *best_weight,
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
    Ok(DecodeOutcome {
        converged,
        error_estimate,
        weight,
        iterations_total: total_iters,
        legs_used,
        solutions_found: solutions,
        per_leg_iterations: per_leg,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{gen_single_shot_code, ColumnSpec};

    #[test]
    fn interconnect_round_trips_adjacency() {
        let model = crate::model::gen_memory_code(4, 3, 0.05, 0.05).unwrap();
        let ic = Interconnect::build(&model);
        assert_eq!(ic.num_edges(), model.num_edges());
        for i in 0..model.num_checks() {
            let errors: Vec<usize> =
                ic.check_edge_range(i).map(|ce| ic.edge_error(ce)).collect();
            assert_eq!(errors, model.check_neighbors(i));
        }
        for j in 0..model.num_errors() {
            let checks: Vec<usize> =
                ic.error_edge_range(j).map(|ee| ic.edge_check(ee)).collect();
            assert_eq!(checks, model.error_neighbors(j));
            for ee in ic.error_edge_range(j) {
                assert_eq!(ic.edge_error(ic.to_check_edge(ee)), j);
            }
        }
        // Handshake identity.
        let by_checks: usize = (0..model.num_checks())
            .map(|i| model.check_neighbors(i).len())
            .sum();
        assert_eq!(ic.num_edges(), by_checks);
    }

    fn single_check_model(degree: usize) -> DecodingModel {
        let columns = (0..degree)
            .map(|_| ColumnSpec {
                checks: vec![0],
                logicals: vec![],
                prior: 0.1,
            })
            .collect();
        DecodingModel::from_columns(1, 0, columns, None).unwrap()
    }

    #[test]
    fn cnu_tie_goes_to_first_attainer() {
        let model = single_check_model(3);
        let ic = Interconnect::build(&model);
        let spec = PrecisionSpec::int4_2_8();
        let mut state = GatewareState::new(&model, &ic, &spec);
        state.nu_mag = vec![2, 2, 5];
        state.nu_sign = vec![1, 1, 1];
        cnu_step(&mut state, &ic, &Syndrome(vec![0]), &spec, 1, false);
        assert_eq!(state.cnu.min1[0], 2);
        assert_eq!(state.cnu.min2[0], 2);
        assert_eq!(state.cnu.selector, vec![true, false, false]);
    }

    #[test]
    fn cnu_matches_float_hand_example() {
        // Incoming {+3, -2, +5}, fired syndrome: the |3| edge resolves to +2
        // once the VNU picks min1.
        let model = single_check_model(3);
        let ic = Interconnect::build(&model);
        let spec = PrecisionSpec::int4_2_8();
        let mut state = GatewareState::new(&model, &ic, &spec);
        state.nu_mag = vec![3, 2, 5];
        state.nu_sign = vec![1, -1, 1];
        cnu_step(&mut state, &ic, &Syndrome(vec![1]), &spec, 1, false);
        // total sign -1; edge 0: (-1)*(+1)*(-1) = +1
        assert_eq!(state.cnu.sign[0], 1);
        assert!(!state.cnu.selector[0]); // min1 sits on the |2| edge
        assert_eq!(state.cnu.min1[0], 2);
    }

    #[test]
    fn degree_one_check_convention() {
        let model = single_check_model(1);
        let ic = Interconnect::build(&model);
        let spec = PrecisionSpec::int4_2_8();
        let mut state = GatewareState::new(&model, &ic, &spec);
        state.nu_mag = vec![3];
        state.nu_sign = vec![-1];
        cnu_step(&mut state, &ic, &Syndrome(vec![1]), &spec, 1, false);
        assert!(state.cnu.selector[0]);
        assert_eq!(state.cnu.min2[0], spec.max_magnitude());
        // Exclusive product over the empty set is +1; the syndrome flips it.
        assert_eq!(state.cnu.sign[0], -1);
    }

    #[test]
    fn vnu_init_loads_priors_on_every_edge() {
        let model = gen_single_shot_code(3, 0.1).unwrap();
        let ic = Interconnect::build(&model);
        let spec = PrecisionSpec::int4_2_8();
        let mut state = GatewareState::new(&model, &ic, &spec);
        let mut estimate = vec![0u8; 3];
        vnu_step(&mut state, &ic, &spec, &[], true, &mut estimate);
        for j in 0..3 {
            for ee in ic.error_edge_range(j) {
                let ce = ic.to_check_edge(ee);
                assert_eq!(state.nu_mag[ce], state.prior[j]);
                assert_eq!(state.nu_sign[ce], 1);
            }
            assert_eq!(state.marginal[j], state.prior[j] as i32);
        }
        assert_eq!(estimate, vec![0, 0, 0]);
    }

    #[test]
    fn beta_at_mem_scale_freezes_bias_to_prior() {
        // beta_int = M eliminates the memory term: bias equals the prior
        // regardless of the carried marginal.
        let model = gen_single_shot_code(3, 0.1).unwrap();
        let ic = Interconnect::build(&model);
        let spec = PrecisionSpec::int4_2_8();
        let mut state = GatewareState::new(&model, &ic, &spec);
        let mut estimate = vec![0u8; 3];
        vnu_step(&mut state, &ic, &spec, &[], true, &mut estimate);
        state.marginal = vec![-100, 55, 7];
        let betas = vec![BetaInt(8); 3];
        vnu_step(&mut state, &ic, &spec, &betas, false, &mut estimate);
        for j in 0..3 {
            assert_eq!(state.bias[j], state.prior[j] as i32);
        }
    }

    #[test]
    fn vnu_fixed_point_hand_example() {
        // Prior 4, resolved incoming {-6, +1}: marginal -1, bit in error.
        let columns = vec![ColumnSpec {
            checks: vec![0, 1],
            logicals: vec![],
            prior: 0.1,
        }];
        let model = DecodingModel::from_columns(2, 0, columns, None).unwrap();
        let ic = Interconnect::build(&model);
        let spec = PrecisionSpec::int4_2_8();
        let mut state = GatewareState::new(&model, &ic, &spec);
        state.prior[0] = 4;
        let mut estimate = vec![0u8];
        vnu_step(&mut state, &ic, &spec, &[], true, &mut estimate);
        // Force the CNU side: check 0 contributes -6, check 1 contributes +1.
        state.cnu.min1 = vec![6, 1];
        state.cnu.min2 = vec![15, 15];
        state.cnu.sign = vec![-1, 1];
        state.cnu.selector = vec![false, false];
        vnu_step(&mut state, &ic, &spec, &[BetaInt(8)], false, &mut estimate);
        assert_eq!(state.marginal[0], -1);
        assert_eq!(estimate[0], 1);
    }

    #[test]
    fn draw_beta_bounds_and_determinism() {
        let (lo, hi) = (3u32, 10u32);
        for node in 0..40 {
            for leg in 1..4 {
                let mut rng = node_rng(9, node, leg);
                let b = draw_beta(&mut rng, lo, hi);
                assert!(b.0 >= lo && b.0 <= hi);
                let mut rng2 = node_rng(9, node, leg);
                assert_eq!(b, draw_beta(&mut rng2, lo, hi));
            }
        }
        let mut rng = node_rng(1, 2, 3);
        assert_eq!(draw_beta(&mut rng, 8, 8), BetaInt(8));
    }

    #[test]
    fn beta_range_matches_reference_interval() {
        let config = RelayConfig::reference(0);
        let spec = PrecisionSpec::int4_2_8();
        assert_eq!(beta_range(&config, &spec), (3, 10));
    }

    #[test]
    fn trivial_syndrome_converges_in_one_iteration() {
        let model = gen_single_shot_code(5, 0.1).unwrap();
        let spec = PrecisionSpec::int4_2_8();
        let out = gateware_decode(
            &model,
            &Syndrome::zeros(4),
            &RelayConfig::reference(3),
            &spec,
        )
        .unwrap();
        assert!(out.converged);
        assert_eq!(out.error_estimate, ErrorVector::zeros(5));
        assert_eq!(out.iterations_total, 1);
        assert_eq!(out.legs_used, 1);
    }

    #[test]
    fn unit_error_matches_float_path() {
        let model = gen_single_shot_code(3, 0.1).unwrap();
        let spec = PrecisionSpec::int4_2_8();
        let config = RelayConfig::reference(3);
        let out = gateware_decode(&model, &Syndrome(vec![1, 0]), &config, &spec).unwrap();
        assert!(out.converged);
        assert_eq!(out.error_estimate, ErrorVector::from_support(3, &[0]));
        let float_out = crate::bp::relay_decode(&model, &Syndrome(vec![1, 0]), &config);
        assert_eq!(out.error_estimate, float_out.error_estimate);
    }

    #[test]
    fn degree_cap_is_enforced() {
        let columns = (0..40)
            .map(|_| ColumnSpec {
                checks: vec![0],
                logicals: vec![],
                prior: 0.1,
            })
            .collect();
        let model = DecodingModel::from_columns(1, 0, columns, None).unwrap();
        let err = gateware_decode(
            &model,
            &Syndrome(vec![0]),
            &RelayConfig::reference(0),
            &PrecisionSpec::int4_2_8(),
        )
        .unwrap_err();
        assert_eq!(err, GatewareError::DegreeTooLarge { degree: 40 });
    }
}
