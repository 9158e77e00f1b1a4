//! Floating-point (binary64) reference decoder: min-sum belief propagation
//! with per-node memory strengths, and the relay ensemble that chains legs of
//! it while carrying marginals forward.
//!
//! This is the accuracy reference the fixed-point path is validated against.
//! Evaluation order is part of the contract: exclusive sums run left to right
//! in adjacency order, so two runs (or two implementations) agree bitwise.

use crate::model::{DecodingModel, ErrorVector, Syndrome};
use crate::rng::node_rng;

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("solutions sought {0} must be >= 1")]
    BadSolutions(usize),
    #[error("solutions sought {s} exceeds max legs {r}")]
    SolutionsExceedLegs { s: usize, r: usize },
    #[error("iteration limits must be >= 1")]
    BadIterationLimit,
    #[error("memory strength range [{lo}, {hi}] is empty or outside [-1, 1]")]
    BadGammaRange { lo: f64, hi: f64 },
}

/// Relay ensemble parameters.
///
/// Leg 0 runs with the uniform memory strength `gamma0` for up to
/// `iters_leg0` iterations; every later leg draws one memory strength per
/// node from `[gamma_min, gamma_max]` and runs up to `iters_leg` iterations.
/// The ensemble stops once `solutions_sought` solutions have been collected
/// or `max_legs` legs have executed, and returns the lowest-weight solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelayConfig {
    pub solutions_sought: usize,
    pub max_legs: usize,
    pub iters_leg0: usize,
    pub iters_leg: usize,
    pub gamma0: f64,
    pub gamma_min: f64,
    pub gamma_max: f64,
    pub alpha_enabled: bool,
    pub seed: u64,
}

impl RelayConfig {
    /// The reference parameterization used throughout the benchmarks:
    /// `gamma0 = 0.125`, per-node strengths in `[-0.24, 0.66]`, `T0 = 80`,
    /// `Tr = 60`, up to 600 legs, first solution wins.
    pub fn reference(seed: u64) -> Self {
        Self {
            solutions_sought: 1,
            max_legs: 600,
            iters_leg0: 80,
            iters_leg: 60,
            gamma0: 0.125,
            gamma_min: -0.24,
            gamma_max: 0.66,
            alpha_enabled: true,
            seed,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.solutions_sought < 1 {
            return Err(ConfigError::BadSolutions(self.solutions_sought));
        }
        if self.solutions_sought > self.max_legs {
            return Err(ConfigError::SolutionsExceedLegs {
                s: self.solutions_sought,
                r: self.max_legs,
            });
        }
        if self.iters_leg0 < 1 || self.iters_leg < 1 {
            return Err(ConfigError::BadIterationLimit);
        }
        if self.gamma_min > self.gamma_max
            || self.gamma_min < -1.0
            || self.gamma_max > 1.0
        {
            return Err(ConfigError::BadGammaRange {
                lo: self.gamma_min,
                hi: self.gamma_max,
            });
        }
        Ok(())
    }

    /// Memory strength of `node` in `leg`, drawn deterministically from
    /// `(seed, node, leg)`. Leg 0 is the uniform first leg.
    pub fn gamma_for(&self, node: usize, leg: usize) -> f64 {
        if leg == 0 {
            self.gamma0
        } else {
            let u = node_rng(self.seed, node, leg).next_f64();
            self.gamma_min + (self.gamma_max - self.gamma_min) * u
        }
    }
}

/// Result of a full relay decode.
#[derive(Debug, Clone, PartialEq)]
pub struct DecodeOutcome {
    pub converged: bool,
    pub error_estimate: ErrorVector,
    /// LLR weight of the returned estimate.
    pub weight: f64,
    pub iterations_total: usize,
    pub legs_used: usize,
    pub solutions_found: usize,
    pub per_leg_iterations: Vec<usize>,
}

/// Messages and beliefs of one decoder instance.
///
/// `mu_at_error[j][k]` is the check-to-error message arriving at error `j`
/// from its `k`-th neighboring check; `nu_at_check[i][k]` is the
/// error-to-check message arriving at check `i` from its `k`-th neighboring
/// error. The position tables link the two views of each edge.
#[derive(Debug, Clone)]
pub struct MessageState {
    pub mu_at_error: Vec<Vec<f64>>,
    pub nu_at_check: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
    pub bias0: Vec<f64>,
    pub marginal: Vec<f64>,
    pub iteration: usize,
    // check_pos[i][k]: position of check i inside the adjacency list of error
    // check_neighbors(i)[k]; error_pos[j][k] symmetrically.
    check_pos: Vec<Vec<usize>>,
    error_pos: Vec<Vec<usize>>,
}

impl MessageState {
    pub fn new(model: &DecodingModel) -> Self {
        let m = model.num_checks();
        let n = model.num_errors();
        let mut check_pos = vec![Vec::new(); m];
        let mut error_pos = vec![Vec::new(); n];
        let mut seen_at_error = vec![0usize; n];
        for i in 0..m {
            for &j in model.check_neighbors(i) {
                check_pos[i].push(seen_at_error[j]);
                seen_at_error[j] += 1;
            }
        }
        let mut seen_at_check = vec![0usize; m];
        for j in 0..n {
            for &i in model.error_neighbors(j) {
                error_pos[j].push(seen_at_check[i]);
                seen_at_check[i] += 1;
            }
        }
        let weights = model.weights().to_vec();
        Self {
            mu_at_error: (0..n)
                .map(|j| vec![0.0; model.error_neighbors(j).len()])
                .collect(),
            nu_at_check: (0..m)
                .map(|i| vec![0.0; model.check_neighbors(i).len()])
                .collect(),
            bias: weights.clone(),
            bias0: weights.clone(),
            marginal: weights,
            iteration: 0,
            check_pos,
            error_pos,
        }
    }

    /// Leg start: every outgoing message reloads the prior weight.
    pub fn reset_messages_to_priors(&mut self, model: &DecodingModel) {
        for j in 0..model.num_errors() {
            for (k, &i) in model.error_neighbors(j).iter().enumerate() {
                let pos = self.error_pos[j][k];
                self.nu_at_check[i][pos] = self.bias0[j];
            }
        }
    }

    /// Current message from error `j` toward its `k`-th neighboring check.
    pub fn outgoing_message(&self, model: &DecodingModel, j: usize, k: usize) -> f64 {
        let i = model.error_neighbors(j)[k];
        self.nu_at_check[i][self.error_pos[j][k]]
    }

    /// Current message arriving at error `j` from its `k`-th neighboring
    /// check.
    pub fn incoming_message(&self, j: usize, k: usize) -> f64 {
        self.mu_at_error[j][k]
    }
}

/// Ceiling for float message magnitudes. An empty exclusive minimum
/// (degree-1 check) resolves to this value; it dominates any magnitude the
/// dynamics produce while staying far from overflow, so sums never reach
/// infinity and the reference stays total.
pub const MAX_MESSAGE_MAGNITUDE: f64 = 1e30;

fn sign_of(x: f64) -> f64 {
    if x < 0.0 {
        -1.0
    } else {
        1.0
    }
}

/// `1 - 2^-t` scaling applied to message magnitudes when enabled.
fn alpha(t: usize) -> f64 {
    1.0 - 2f64.powi(-(t as i32))
}

/// Check-node update: for every edge `(i, j)` the outgoing message is the
/// syndrome-adjusted exclusive sign product times the exclusive minimum of
/// incoming magnitudes, optionally scaled by `1 - 2^-t`. An empty exclusive
/// set (degree-1 check) yields the maximum representable magnitude with
/// positive sign product.
pub fn check_to_error_messages(
    state: &mut MessageState,
    model: &DecodingModel,
    sigma: &Syndrome,
    t: usize,
    alpha_enabled: bool,
) {
    let scale = if alpha_enabled { alpha(t) } else { 1.0 };
    for i in 0..model.num_checks() {
        let neighbors = model.check_neighbors(i);
        let incoming = &state.nu_at_check[i];
        let syndrome_sign = if sigma.0[i] == 0 { 1.0 } else { -1.0 };
        for (k, &j) in neighbors.iter().enumerate() {
            let mut sign = 1.0;
            let mut min_mag = MAX_MESSAGE_MAGNITUDE;
            for (k2, &nu) in incoming.iter().enumerate() {
                if k2 == k {
                    continue;
                }
                sign *= sign_of(nu);
                let mag = nu.abs();
                if mag < min_mag {
                    min_mag = mag;
                }
            }
            let pos = state.check_pos[i][k];
            state.mu_at_error[j][pos] = sign * syndrome_sign * (scale * min_mag);
        }
    }
}

/// Error-node update: each outgoing message is the bias plus the exclusive
/// left-to-right sum of incoming messages.
pub fn error_to_check_messages(state: &mut MessageState, model: &DecodingModel) {
    for j in 0..model.num_errors() {
        let neighbors = model.error_neighbors(j);
        let incoming = &state.mu_at_error[j];
        for (k, &i) in neighbors.iter().enumerate() {
            let mut acc = state.bias[j];
            for (k2, &mu) in incoming.iter().enumerate() {
                if k2 != k {
                    acc += mu;
                }
            }
            let pos = state.error_pos[j][k];
            state.nu_at_check[i][pos] = acc;
        }
    }
}

/// Computes marginals (bias plus all incoming messages, left to right) and
/// the hard decision: a bit is declared in error exactly when its marginal is
/// negative; zero resolves to no-error.
pub fn update_marginals_and_decision(
    state: &mut MessageState,
    model: &DecodingModel,
) -> ErrorVector {
    let mut bits = vec![0u8; model.num_errors()];
    for j in 0..model.num_errors() {
        let mut acc = state.bias[j];
        for &mu in &state.mu_at_error[j] {
            acc += mu;
        }
        state.marginal[j] = acc;
        bits[j] = (acc < 0.0) as u8;
    }
    ErrorVector(bits)
}

/// Memory update: blends the initial bias with the previous marginal,
/// `bias_j = (1 - gamma_j) * bias0_j + gamma_j * marginal_j`.
pub fn update_bias(state: &mut MessageState, gammas: &[f64]) {
    for j in 0..state.bias.len() {
        let g = gammas[j];
        state.bias[j] = (1.0 - g) * state.bias0[j] + g * state.marginal[j];
    }
}

/// Observer invoked after each full iteration of a leg.
pub type IterationObserver<'a> = &'a mut dyn FnMut(&MessageState, &ErrorVector);

/// Outcome of a single decoder leg.
#[derive(Debug, Clone, PartialEq)]
pub struct LegOutcome {
    pub converged: bool,
    pub error_estimate: ErrorVector,
    pub iterations: usize,
}

/// Runs one memory-BP leg with a flooding schedule: bias update, check
/// update, error update, marginals, convergence test — until the hard
/// decision reproduces the syndrome on every masked check or the iteration
/// cap is reached. Marginals are left in `state` for the next leg.
///
/// `on_iteration`, when given, observes the state after each full iteration.
pub fn dmem_bp_leg(
    state: &mut MessageState,
    model: &DecodingModel,
    sigma: &Syndrome,
    gammas: &[f64],
    max_iters: usize,
    alpha_enabled: bool,
    mask: Option<&[bool]>,
    mut on_iteration: Option<IterationObserver<'_>>,
) -> LegOutcome {
    state.reset_messages_to_priors(model);
    let mut estimate = ErrorVector::zeros(model.num_errors());
    for t in 1..=max_iters {
        state.iteration = t;
        update_bias(state, gammas);
        check_to_error_messages(state, model, sigma, t, alpha_enabled);
        error_to_check_messages(state, model);
        estimate = update_marginals_and_decision(state, model);
        if let Some(observer) = on_iteration.as_deref_mut() {
            observer(state, &estimate);
        }
        if model.syndrome_matches(&estimate, sigma, mask) {
            return LegOutcome {
                converged: true,
                error_estimate: estimate,
                iterations: t,
            };
        }
    }
    LegOutcome {
        converged: false,
        error_estimate: estimate,
        iterations: max_iters,
    }
}

/// Full relay decode in binary64.
pub fn relay_decode(
    model: &DecodingModel,
    sigma: &Syndrome,
    config: &RelayConfig,
) -> DecodeOutcome {
    relay_decode_masked(model, sigma, config, None)
}

/// Relay decode with an optional convergence mask over checks; unmasked
/// checks are not required to match (the windowed decoder uses this).
pub fn relay_decode_masked(
    model: &DecodingModel,
    sigma: &Syndrome,
    config: &RelayConfig,
    mask: Option<&[bool]>,
) -> DecodeOutcome {
    config.validate().expect("invalid relay configuration");
    assert_eq!(sigma.len(), model.num_checks(), "syndrome length mismatch");

    let n = model.num_errors();
    let mut state = MessageState::new(model);
    let mut gammas = vec![config.gamma0; n];

    let mut best: Option<(ErrorVector, f64)> = None;
    let mut solutions = 0usize;
    let mut per_leg = Vec::new();
    let mut total_iters = 0usize;
    let mut last_estimate = ErrorVector::zeros(n);

    for leg in 0..config.max_legs {
        if leg > 0 {
            for (j, g) in gammas.iter_mut().enumerate() {
                *g = config.gamma_for(j, leg);
            }
        }
        let cap = if leg == 0 {
            config.iters_leg0
        } else {
            config.iters_leg
        };
        let leg_out = dmem_bp_leg(
            &mut state,
            model,
            sigma,
            &gammas,
            cap,
            config.alpha_enabled,
            mask,
            None,
        );
        per_leg.push(leg_out.iterations);
        total_iters += leg_out.iterations;
        last_estimate = leg_out.error_estimate;
        if leg_out.converged {
            let weight = model.solution_weight(&last_estimate);
            solutions += 1;
            // Strict comparison: the first solution wins ties.
            let better = match &best {
                None => true,
                Some((_, best_weight)) => weight < *best_weight,
            };
            if better {
                best = Some((last_estimate.clone(), weight));
            }
            if solutions == config.solutions_sought {
                break;
            }
        }
        // Final marginals carry into the next leg via `state`.
    }

    let legs_used = per_leg.len();
    match best {
        Some((estimate, weight)) => DecodeOutcome {
            converged: true,
            error_estimate: estimate,
            weight,
            iterations_total: total_iters,
            legs_used,
            solutions_found: solutions,
            per_leg_iterations: per_leg,
        },
        None => DecodeOutcome {
            converged: false,
            weight: model.solution_weight(&last_estimate),
            error_estimate: last_estimate,
            iterations_total: total_iters,
            legs_used,
            solutions_found: 0,
            per_leg_iterations: per_leg,
        },
    }
}
