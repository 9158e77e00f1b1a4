//! (W, C)-sliding-window decoding: detector ingestion with syndrome
//! differencing closure, carry of committed corrections into later windows,
//! logical Pauli frame accumulation, and final observable correction.
//!
//! A window covers `W` consecutive detector cycles; after the inner decoder
//! runs, only the error columns of the first `C` cycles are committed. The
//! committed correction's detector effect beyond the commit region is
//! carried forward by toggling the stored detector history, so the next
//! window decodes against corrected inputs.

use std::collections::VecDeque;

use thiserror::Error;

use crate::bp::DecodeOutcome;
use crate::model::{
    ColumnSpec, CycleLayout, DecodingModel, ErrorVector, ReadoutMatrices, Syndrome,
};

#[derive(Debug, Error, PartialEq)]
pub enum WindowError {
    #[error("event after the stream terminated")]
    EventAfterTerminal,
    #[error("block length {got} does not match {expected}")]
    BlockLengthMismatch { expected: usize, got: usize },
    #[error("detector FIFO overflow: {pending} cycles pending, depth {depth}")]
    FifoOverflow { pending: usize, depth: usize },
    #[error("model carries no cycle layout")]
    MissingLayout,
    #[error("stream carries a codeword but the model has no readout matrices")]
    MissingReadout,
    #[error("bad window parameters: {0}")]
    BadParameters(String),
    #[error("finalize before the stream terminated")]
    NotTerminal,
}

/// How much of the committed correction's residual detector effect is
/// carried into later cycles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CarryMode {
    /// The full residual beyond the commit region (correctness-first
    /// default).
    #[default]
    FullResidual,
    /// Only the first block past the commit region, as the minimal variant.
    SingleBlock,
}

/// One element of the input stream.
#[derive(Debug, Clone, PartialEq)]
pub enum StreamEvent {
    /// A block of detector bits for one cycle.
    Detectors(Vec<u8>),
    /// The final data-qubit readout; closes the stream.
    Codeword(Vec<u8>),
    /// Explicit end of stream without a readout.
    End,
}

/// Static configuration of a windowed decode: the restricted model, masks,
/// and stride.
#[derive(Debug, Clone)]
pub struct WindowConfig {
    pub window_width: usize,
    pub commit_width: usize,
    pub detectors_per_cycle: usize,
    /// Check and action matrices restricted to the error columns of the
    /// first `window_width` cycles, detector rows within the window.
    pub window_model: DecodingModel,
    /// Global column index of every window column.
    pub window_to_global: Vec<usize>,
    /// Marks window columns inside the commit region.
    pub commit_mask: Vec<bool>,
    /// Marks detector rows that must match for a non-terminal window to
    /// count as converged (the final window cycle is excluded).
    pub convergence_mask: Vec<bool>,
    pub readout: Option<ReadoutMatrices>,
    pub carry_mode: CarryMode,
    /// Maximum number of ingested-but-uncommitted cycles.
    pub fifo_depth: usize,
}

/// Builds a window configuration from a model with a cycle layout.
///
/// Window columns keep their global relative order, and their check lists
/// are truncated to rows inside the window. With `W` equal to the model's
/// cycle count the window model coincides with the global model.
pub fn build_window_model(
    model: &DecodingModel,
    window_width: usize,
    commit_width: usize,
) -> Result<WindowConfig, WindowError> {
    let layout: &CycleLayout = model.layout().ok_or(WindowError::MissingLayout)?;
    if commit_width < 1 || commit_width >= window_width {
        return Err(WindowError::BadParameters(format!(
            "need 1 <= C < W, got W={window_width} C={commit_width}"
        )));
    }
    if window_width > layout.cycles {
        return Err(WindowError::BadParameters(format!(
            "window width {window_width} exceeds model cycles {}",
            layout.cycles
        )));
    }
    let m_prime = layout.detectors_per_cycle;
    let window_rows = window_width * m_prime;

    let mut columns = Vec::new();
    let mut window_to_global = Vec::new();
    let mut commit_mask = Vec::new();
    for j in 0..model.num_errors() {
        let cycle = layout.column_cycle[j];
        if cycle >= window_width {
            continue;
        }
        let checks: Vec<usize> = model
            .error_neighbors(j)
            .iter()
            .copied()
            .filter(|&i| i < window_rows)
            .collect();
        let logicals: Vec<usize> = (0..model.num_logicals())
            .filter(|&k| model.logical_row(k).contains(&j))
            .collect();
        columns.push(ColumnSpec {
            checks,
            logicals,
            prior: model.priors()[j],
        });
        window_to_global.push(j);
        commit_mask.push(cycle < commit_width);
    }
    let window_model = DecodingModel::from_columns(window_rows, model.num_logicals(), columns, None)
        .map_err(|e| WindowError::BadParameters(e.to_string()))?;

    let convergence_mask: Vec<bool> = (0..window_rows)
        .map(|row| row / m_prime + 1 < window_width)
        .collect();

    Ok(WindowConfig {
        window_width,
        commit_width,
        detectors_per_cycle: m_prime,
        window_model,
        window_to_global,
        commit_mask,
        convergence_mask,
        readout: layout.readout.clone(),
        carry_mode: CarryMode::default(),
        fifo_depth: 4096,
    })
}

/// Per-window decode record.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowRecord {
    pub start_cycle: usize,
    pub converged: bool,
    pub iterations: usize,
    pub legs: usize,
    pub terminal: bool,
}

/// Inner decoder over `(window model, convergence mask, window detectors)`.
pub type InnerDecoder<'a> =
    &'a mut dyn FnMut(&DecodingModel, &[bool], &Syndrome) -> DecodeOutcome;

/// Mutable state of one stream being decoded.
#[derive(Debug, Clone)]
pub struct WindowState {
    /// Detector history, one block per cycle; committed corrections toggle
    /// bits here so later windows decode corrected inputs.
    history: VecDeque<u8>,
    /// Cycle index of `history`'s first block.
    history_base: usize,
    /// Running raw syndrome (XOR of all ingested blocks).
    running_syndrome: Vec<u8>,
    /// Accumulated logical Pauli frame.
    frame: Vec<u8>,
    /// Next window start cycle.
    start_cycle: usize,
    /// Number of ingested cycles.
    total_cycles: usize,
    terminal: bool,
    codeword: Option<Vec<u8>>,
    records: Vec<WindowRecord>,
}

impl WindowState {
    pub fn new(config: &WindowConfig, num_logicals: usize) -> Self {
        Self {
            history: VecDeque::new(),
            history_base: 0,
            running_syndrome: vec![0; config.detectors_per_cycle],
            frame: vec![0; num_logicals],
            start_cycle: 0,
            total_cycles: 0,
            terminal: false,
            codeword: None,
            records: Vec::new(),
        }
    }

    pub fn frame(&self) -> &[u8] {
        &self.frame
    }

    pub fn records(&self) -> &[WindowRecord] {
        &self.records
    }

    pub fn total_cycles(&self) -> usize {
        self.total_cycles
    }

    pub fn is_terminal(&self) -> bool {
        self.terminal
    }

    fn history_bit(&self, cycle: usize, offset: usize, m_prime: usize) -> u8 {
        if cycle < self.history_base {
            return 0;
        }
        let idx = (cycle - self.history_base) * m_prime + offset;
        self.history.get(idx).copied().unwrap_or(0)
    }

    fn toggle_history_bit(&mut self, cycle: usize, offset: usize, m_prime: usize) {
        debug_assert!(cycle >= self.history_base);
        let idx = (cycle - self.history_base) * m_prime + offset;
        // Carries may reach padding past the last real cycle; those blocks
        // materialize as zeros first.
        while idx >= self.history.len() {
            self.history.push_back(0);
        }
        self.history[idx] ^= 1;
    }

    /// Drops history blocks no window will read again.
    fn trim_history(&mut self, m_prime: usize) {
        while self.history_base < self.start_cycle && self.history.len() >= m_prime {
            for _ in 0..m_prime {
                self.history.pop_front();
            }
            self.history_base += 1;
        }
    }
}

/// Feeds one stream event: detector blocks append to the history, a codeword
/// closes the stream with the differenced final block, END closes it with a
/// zero block.
pub fn ingest(
    state: &mut WindowState,
    config: &WindowConfig,
    event: StreamEvent,
) -> Result<(), WindowError> {
    if state.terminal {
        return Err(WindowError::EventAfterTerminal);
    }
    let m_prime = config.detectors_per_cycle;
    let pending = state.total_cycles - state.start_cycle;
    if pending >= config.fifo_depth {
        return Err(WindowError::FifoOverflow {
            pending,
            depth: config.fifo_depth,
        });
    }
    let block: Vec<u8> = match event {
        StreamEvent::Detectors(d) => {
            if d.len() != m_prime {
                return Err(WindowError::BlockLengthMismatch {
                    expected: m_prime,
                    got: d.len(),
                });
            }
            d
        }
        StreamEvent::Codeword(c) => {
            let readout = config.readout.as_ref().ok_or(WindowError::MissingReadout)?;
            if c.len() != readout.num_qubits {
                return Err(WindowError::BlockLengthMismatch {
                    expected: readout.num_qubits,
                    got: c.len(),
                });
            }
            let final_syndrome = apply_readout_rows(&readout.noiseless_checks, &c);
            let block = state
                .running_syndrome
                .iter()
                .zip(&final_syndrome)
                .map(|(a, b)| a ^ b)
                .collect();
            state.terminal = true;
            state.codeword = Some(c);
            block
        }
        StreamEvent::End => {
            state.terminal = true;
            vec![0; m_prime]
        }
    };
    for (s, b) in state.running_syndrome.iter_mut().zip(&block) {
        *s ^= b;
    }
    // Carries never reach cycles that have not been ingested, so the new
    // block lands on fresh zeros.
    let cycle = state.total_cycles;
    state.total_cycles += 1;
    for (offset, &b) in block.iter().enumerate() {
        if b != 0 {
            state.toggle_history_bit(cycle, offset, m_prime);
        }
    }
    // Make the cycle's block exist even if all zero.
    let need = (cycle + 1 - state.history_base) * m_prime;
    while state.history.len() < need {
        state.history.push_back(0);
    }
    Ok(())
}

fn apply_readout_rows(rows: &[Vec<usize>], c: &[u8]) -> Vec<u8> {
    rows.iter()
        .map(|row| row.iter().fold(0u8, |acc, &q| acc ^ c[q]))
        .collect()
}

/// Decodes the next window if one is available.
///
/// A full window of real cycles decodes with the configured masks and
/// commits `C` cycles. Once the stream has terminated, the last window may
/// extend past the ingested cycles (missing blocks read as zero); it uses
/// full commit and full convergence masks and consumes everything left.
/// A window that fails to converge still commits its hard decision; the
/// record carries the flag.
pub fn try_decode_window(
    state: &mut WindowState,
    config: &WindowConfig,
    decoder: InnerDecoder<'_>,
) -> Option<WindowRecord> {
    if state.start_cycle >= state.total_cycles {
        return None;
    }
    let w = config.window_width;
    let t = state.start_cycle;
    let is_terminal_window = state.terminal && t + w >= state.total_cycles;
    if !is_terminal_window && t + w > state.total_cycles {
        return None; // wait for a full window
    }
    let m_prime = config.detectors_per_cycle;

    let mut detectors = vec![0u8; w * m_prime];
    for cycle in 0..w {
        for offset in 0..m_prime {
            detectors[cycle * m_prime + offset] = state.history_bit(t + cycle, offset, m_prime);
        }
    }

    let all_rows = vec![true; w * m_prime];
    let cvg_mask: &[bool] = if is_terminal_window {
        &all_rows
    } else {
        &config.convergence_mask
    };
    let outcome = decoder(&config.window_model, cvg_mask, &Syndrome(detectors));

    // Reduce to committed errors.
    let committed = ErrorVector(
        outcome
            .error_estimate
            .0
            .iter()
            .zip(&config.commit_mask)
            .map(|(&e, &keep)| if keep || is_terminal_window { e } else { 0 })
            .collect(),
    );
    let delta_frame = config.window_model.apply_action_matrix(&committed);
    for (f, d) in state.frame.iter_mut().zip(&delta_frame) {
        *f ^= d;
    }
    // Residual detector effect past the commit region carries forward.
    if !is_terminal_window {
        let delta_d = config.window_model.apply_check_matrix(&committed);
        let c = config.commit_width;
        let carry_end = match config.carry_mode {
            CarryMode::FullResidual => w,
            CarryMode::SingleBlock => c + 1,
        };
        for cycle in c..carry_end {
            for offset in 0..m_prime {
                if delta_d.0[cycle * m_prime + offset] != 0 {
                    state.toggle_history_bit(t + cycle, offset, m_prime);
                }
            }
        }
    }

    state.start_cycle = if is_terminal_window {
        state.total_cycles
    } else {
        t + config.commit_width
    };
    state.trim_history(m_prime);

    let record = WindowRecord {
        start_cycle: t,
        converged: outcome.converged,
        iterations: outcome.iterations_total,
        legs: outcome.legs_used,
        terminal: is_terminal_window,
    };
    state.records.push(record.clone());
    Some(record)
}

/// Drains every remaining window and returns the accumulated frame and the
/// corrected observables `(L c) xor f`. Requires a terminated stream.
pub fn finalize(
    state: &mut WindowState,
    config: &WindowConfig,
    decoder: InnerDecoder<'_>,
) -> Result<(Vec<u8>, Vec<u8>), WindowError> {
    if !state.terminal {
        return Err(WindowError::NotTerminal);
    }
    while try_decode_window(state, config, decoder).is_some() {}
    let raw_observables = match (&state.codeword, &config.readout) {
        (Some(c), Some(readout)) => apply_readout_rows(&readout.logical_readout, c),
        _ => vec![0; state.frame.len()],
    };
    let corrected: Vec<u8> = raw_observables
        .iter()
        .zip(&state.frame)
        .map(|(o, f)| o ^ f)
        .collect();
    Ok((state.frame.clone(), corrected))
}
