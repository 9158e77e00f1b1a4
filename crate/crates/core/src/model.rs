//! Decoding problems: sparse check matrix `H`, logical action matrix `A`,
//! prior error probabilities, and the log-likelihood-ratio weights derived
//! from them. Also owns the plain-text model file format and two small
//! built-in code generators used for testing and benchmarking.
//!
//! A model is immutable once constructed and may be shared freely across
//! decoder instances.

use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("error column {index}: prior {value} outside open interval (0, 1/2)")]
    PriorOutOfRange { index: usize, value: f64 },
    #[error("error column {index}: {msg}")]
    BadColumn { index: usize, msg: String },
    #[error("{0}")]
    BadParameter(String),
}

fn parse_err(line: usize, msg: impl Into<String>) -> ModelError {
    ModelError::Parse {
        line,
        msg: msg.into(),
    }
}

/// Log-likelihood-ratio weight `ln((1 - p) / p)` of an error with prior `p`.
///
/// Defined (and strictly positive) only for `p` in the open interval
/// `(0, 1/2)`.
pub fn llr_weight(p: f64) -> Result<f64, ModelError> {
    if !(p > 0.0 && p < 0.5) {
        return Err(ModelError::PriorOutOfRange { index: 0, value: p });
    }
    Ok(((1.0 - p) / p).ln())
}

/// A candidate or sampled error pattern, one bit per error mechanism.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ErrorVector(pub Vec<u8>);

impl ErrorVector {
    pub fn zeros(n: usize) -> Self {
        Self(vec![0; n])
    }

    pub fn from_support(n: usize, support: &[usize]) -> Self {
        let mut bits = vec![0u8; n];
        for &j in support {
            bits[j] = 1;
        }
        Self(bits)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Indices of set bits.
    pub fn support(&self) -> Vec<usize> {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &b)| b != 0)
            .map(|(j, _)| j)
            .collect()
    }

    pub fn hamming_weight(&self) -> usize {
        self.0.iter().filter(|&&b| b != 0).count()
    }

    pub fn xor(&self, other: &ErrorVector) -> ErrorVector {
        assert_eq!(self.len(), other.len());
        ErrorVector(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a ^ b)
                .collect(),
        )
    }
}

/// Observed parity outcomes, one bit per check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Syndrome(pub Vec<u8>);

impl Syndrome {
    pub fn zeros(m: usize) -> Self {
        Self(vec![0; m])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn xor(&self, other: &Syndrome) -> Syndrome {
        assert_eq!(self.len(), other.len());
        Syndrome(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a ^ b)
                .collect(),
        )
    }
}

/// Per-cycle structure of a multi-cycle (memory) model, used by the sliding
/// window decoder to restrict columns and detectors to cycle ranges.
#[derive(Debug, Clone, PartialEq)]
pub struct CycleLayout {
    pub cycles: usize,
    pub detectors_per_cycle: usize,
    /// Cycle assignment of every error column.
    pub column_cycle: Vec<usize>,
    /// Final-readout matrices; present for generated memory codes.
    pub readout: Option<ReadoutMatrices>,
}

/// Maps a final data-qubit readout to its noiseless syndrome and logical
/// observables.
#[derive(Debug, Clone, PartialEq)]
pub struct ReadoutMatrices {
    pub num_qubits: usize,
    /// One row per check: qubit indices whose parity gives the check value.
    pub noiseless_checks: Vec<Vec<usize>>,
    /// One row per logical: qubit indices whose parity gives the observable.
    pub logical_readout: Vec<Vec<usize>>,
}

/// A decoding problem `(H, A, p)` with derived LLR weights.
///
/// Adjacency is stored in both directions (check-to-error and
/// error-to-check); the two views always describe the same bipartite graph.
#[derive(Debug, Clone, PartialEq)]
pub struct DecodingModel {
    num_checks: usize,
    num_errors: usize,
    num_logicals: usize,
    check_adjacency: Vec<Vec<usize>>,
    error_adjacency: Vec<Vec<usize>>,
    logical_rows: Vec<Vec<usize>>,
    priors: Vec<f64>,
    weights: Vec<f64>,
    layout: Option<CycleLayout>,
}

/// Per-column description used to assemble a model: checks touched, logicals
/// touched, prior probability.
#[derive(Debug, Clone)]
pub struct ColumnSpec {
    pub checks: Vec<usize>,
    pub logicals: Vec<usize>,
    pub prior: f64,
}

impl DecodingModel {
    /// Builds a model from per-column data, validating every invariant:
    /// strictly increasing duplicate-free index lists, in-range indices, and
    /// priors inside `(0, 1/2)`.
    pub fn from_columns(
        num_checks: usize,
        num_logicals: usize,
        columns: Vec<ColumnSpec>,
        layout: Option<CycleLayout>,
    ) -> Result<Self, ModelError> {
        let num_errors = columns.len();
        let mut check_adjacency = vec![Vec::new(); num_checks];
        let mut logical_rows = vec![Vec::new(); num_logicals];
        let mut error_adjacency = Vec::with_capacity(num_errors);
        let mut priors = Vec::with_capacity(num_errors);
        let mut weights = Vec::with_capacity(num_errors);

        for (j, col) in columns.into_iter().enumerate() {
            if !(col.prior > 0.0 && col.prior < 0.5) {
                return Err(ModelError::PriorOutOfRange {
                    index: j,
                    value: col.prior,
                });
            }
            validate_index_list(&col.checks, num_checks, j, "check")?;
            validate_index_list(&col.logicals, num_logicals, j, "logical")?;
            for &i in &col.checks {
                check_adjacency[i].push(j);
            }
            for &k in &col.logicals {
                logical_rows[k].push(j);
            }
            weights.push(((1.0 - col.prior) / col.prior).ln());
            priors.push(col.prior);
            error_adjacency.push(col.checks);
        }
        // Columns were consumed in index order, so the row lists come out
        // strictly increasing as well.
        if let Some(layout) = &layout {
            if layout.column_cycle.len() != num_errors {
                return Err(ModelError::BadParameter(format!(
                    "layout assigns {} columns, model has {}",
                    layout.column_cycle.len(),
                    num_errors
                )));
            }
            if layout.cycles * layout.detectors_per_cycle != num_checks {
                return Err(ModelError::BadParameter(format!(
                    "layout implies {} detectors, model has {}",
                    layout.cycles * layout.detectors_per_cycle,
                    num_checks
                )));
            }
            if let Some(c) = layout.column_cycle.iter().find(|&&c| c >= layout.cycles) {
                return Err(ModelError::BadParameter(format!(
                    "column cycle {} out of range (cycles={})",
                    c, layout.cycles
                )));
            }
        }
        Ok(Self {
            num_checks,
            num_errors,
            num_logicals,
            check_adjacency,
            error_adjacency,
            logical_rows,
            priors,
            weights,
            layout,
        })
    }

    pub fn num_checks(&self) -> usize {
        self.num_checks
    }

    pub fn num_errors(&self) -> usize {
        self.num_errors
    }

    pub fn num_logicals(&self) -> usize {
        self.num_logicals
    }

    /// Error columns touched by check `i`, strictly increasing.
    pub fn check_neighbors(&self, i: usize) -> &[usize] {
        &self.check_adjacency[i]
    }

    /// Checks touched by error column `j`, strictly increasing.
    pub fn error_neighbors(&self, j: usize) -> &[usize] {
        &self.error_adjacency[j]
    }

    pub fn logical_row(&self, k: usize) -> &[usize] {
        &self.logical_rows[k]
    }

    pub fn priors(&self) -> &[f64] {
        &self.priors
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn layout(&self) -> Option<&CycleLayout> {
        self.layout.as_ref()
    }

    pub fn max_check_degree(&self) -> usize {
        self.check_adjacency.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn max_error_degree(&self) -> usize {
        self.error_adjacency.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Total number of edges in the decoding graph.
    pub fn num_edges(&self) -> usize {
        self.error_adjacency.iter().map(Vec::len).sum()
    }

    /// Syndrome of an error pattern: `sigma_i` is the parity of `e` over the
    /// neighborhood of check `i`.
    pub fn apply_check_matrix(&self, e: &ErrorVector) -> Syndrome {
        assert_eq!(e.len(), self.num_errors, "error vector length mismatch");
        let mut bits = vec![0u8; self.num_checks];
        for (i, neighbors) in self.check_adjacency.iter().enumerate() {
            let mut parity = 0u8;
            for &j in neighbors {
                parity ^= e.0[j];
            }
            bits[i] = parity;
        }
        Syndrome(bits)
    }

    /// Logical action of an error pattern, one bit per logical observable.
    pub fn apply_action_matrix(&self, e: &ErrorVector) -> Vec<u8> {
        assert_eq!(e.len(), self.num_errors, "error vector length mismatch");
        self.logical_rows
            .iter()
            .map(|row| row.iter().fold(0u8, |acc, &j| acc ^ e.0[j]))
            .collect()
    }

    /// LLR weight of a candidate solution: the sum of column weights over its
    /// set bits. An empty solution weighs exactly +0.
    pub fn solution_weight(&self, e: &ErrorVector) -> f64 {
        assert_eq!(e.len(), self.num_errors, "error vector length mismatch");
        e.0.iter()
            .zip(&self.weights)
            .filter(|(&b, _)| b != 0)
            .fold(0.0, |acc, (_, &w)| acc + w)
    }

    /// True when `H e` matches `sigma` on every check selected by `mask`
    /// (`mask = None` means all checks).
    pub fn syndrome_matches(
        &self,
        e: &ErrorVector,
        sigma: &Syndrome,
        mask: Option<&[bool]>,
    ) -> bool {
        assert_eq!(sigma.len(), self.num_checks, "syndrome length mismatch");
        let computed = self.apply_check_matrix(e);
        match mask {
            None => computed == *sigma,
            Some(mask) => {
                assert_eq!(mask.len(), self.num_checks, "mask length mismatch");
                computed
                    .0
                    .iter()
                    .zip(&sigma.0)
                    .zip(mask)
                    .all(|((a, b), &m)| !m || a == b)
            }
        }
    }

    /// Cross-checks that the two adjacency directions describe the same
    /// bipartite graph. Construction guarantees this; the check exists so
    /// tests can exercise it exhaustively.
    pub fn verify_transpose_consistency(&self) -> bool {
        for (i, cols) in self.check_adjacency.iter().enumerate() {
            for &j in cols {
                if !self.error_adjacency[j].contains(&i) {
                    return false;
                }
            }
        }
        for (j, rows) in self.error_adjacency.iter().enumerate() {
            for &i in rows {
                if !self.check_adjacency[i].contains(&j) {
                    return false;
                }
            }
        }
        true
    }
}

fn validate_index_list(
    list: &[usize],
    bound: usize,
    column: usize,
    kind: &str,
) -> Result<(), ModelError> {
    for window in list.windows(2) {
        if window[0] >= window[1] {
            return Err(ModelError::BadColumn {
                index: column,
                msg: format!("{kind} indices not strictly increasing"),
            });
        }
    }
    if let Some(&last) = list.last() {
        if last >= bound {
            return Err(ModelError::BadColumn {
                index: column,
                msg: format!("{kind} index {last} out of range (bound {bound})"),
            });
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Model file format
// ---------------------------------------------------------------------------
//
// UTF-8 text. Header line:
//     qldpc-model v1 M=<int> N=<int> K=<int> [cycles=<int> det_per_cycle=<int>]
// then one line per error column:
//     e <j> p=<decimal> H:<check indices> A:<logical indices> [cycle=<int>]
// Lines starting with `#` are comments. All indices are 0-based.

/// Parses a model from its textual representation.
pub fn parse_model(text: &str) -> Result<DecodingModel, ModelError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(idx, line)| (idx + 1, line.trim()))
        .filter(|(_, line)| !line.is_empty() && !line.starts_with('#'));

    let (header_no, header) = lines
        .next()
        .ok_or_else(|| parse_err(0, "empty model file"))?;
    let mut tokens = header.split_whitespace();
    if tokens.next() != Some("qldpc-model") || tokens.next() != Some("v1") {
        return Err(parse_err(header_no, "expected header `qldpc-model v1 ...`"));
    }
    let mut m = None;
    let mut n = None;
    let mut k = None;
    let mut cycles = None;
    let mut det_per_cycle = None;
    for tok in tokens {
        let (key, value) = tok
            .split_once('=')
            .ok_or_else(|| parse_err(header_no, format!("bad header token `{tok}`")))?;
        let value: usize = value
            .parse()
            .map_err(|_| parse_err(header_no, format!("bad integer in `{tok}`")))?;
        match key {
            "M" => m = Some(value),
            "N" => n = Some(value),
            "K" => k = Some(value),
            "cycles" => cycles = Some(value),
            "det_per_cycle" => det_per_cycle = Some(value),
            _ => return Err(parse_err(header_no, format!("unknown header key `{key}`"))),
        }
    }
    let m = m.ok_or_else(|| parse_err(header_no, "missing M="))?;
    let n = n.ok_or_else(|| parse_err(header_no, "missing N="))?;
    let k = k.ok_or_else(|| parse_err(header_no, "missing K="))?;
    let layout_dims = match (cycles, det_per_cycle) {
        (Some(c), Some(d)) => Some((c, d)),
        (None, None) => None,
        _ => {
            return Err(parse_err(
                header_no,
                "cycles= and det_per_cycle= must appear together",
            ))
        }
    };

    let mut columns: Vec<Option<ColumnSpec>> = vec![None; n];
    let mut column_cycle = vec![0usize; n];
    for (line_no, line) in lines {
        let mut tokens = line.split_whitespace().peekable();
        if tokens.next() != Some("e") {
            return Err(parse_err(line_no, "expected `e <j> ...`"));
        }
        let j: usize = tokens
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| parse_err(line_no, "bad column index"))?;
        if j >= n {
            return Err(parse_err(line_no, format!("column index {j} >= N={n}")));
        }
        if columns[j].is_some() {
            return Err(parse_err(line_no, format!("duplicate column {j}")));
        }

        let mut prior = None;
        let mut cycle = None;
        let mut checks = Vec::new();
        let mut logicals = Vec::new();
        // `current` points at the index list bare integers extend.
        let mut current: Option<&mut Vec<usize>> = None;
        for tok in tokens {
            if let Some(rest) = tok.strip_prefix("p=") {
                prior = Some(rest.parse::<f64>().map_err(|_| {
                    parse_err(line_no, format!("bad probability `{rest}`"))
                })?);
                current = None;
            } else if let Some(rest) = tok.strip_prefix("cycle=") {
                cycle = Some(rest.parse::<usize>().map_err(|_| {
                    parse_err(line_no, format!("bad cycle `{rest}`"))
                })?);
                current = None;
            } else if let Some(rest) = tok.strip_prefix("H:") {
                if !rest.is_empty() {
                    checks.push(parse_index(rest, line_no)?);
                }
                current = Some(&mut checks);
            } else if let Some(rest) = tok.strip_prefix("A:") {
                if !rest.is_empty() {
                    logicals.push(parse_index(rest, line_no)?);
                }
                current = Some(&mut logicals);
            } else {
                let idx = parse_index(tok, line_no)?;
                match current.as_deref_mut() {
                    Some(list) => list.push(idx),
                    None => {
                        return Err(parse_err(
                            line_no,
                            format!("stray index `{tok}` outside H:/A: list"),
                        ))
                    }
                }
            }
        }
        let prior =
            prior.ok_or_else(|| parse_err(line_no, "missing p= on column line"))?;
        if layout_dims.is_some() {
            column_cycle[j] = cycle
                .ok_or_else(|| parse_err(line_no, "model declares cycles but column lacks cycle="))?;
        } else if cycle.is_some() {
            return Err(parse_err(
                line_no,
                "cycle= given but header lacks cycles=/det_per_cycle=",
            ));
        }
        columns[j] = Some(ColumnSpec {
            checks,
            logicals,
            prior,
        });
    }

    let columns: Vec<ColumnSpec> = columns
        .into_iter()
        .enumerate()
        .map(|(j, c)| c.ok_or_else(|| parse_err(0, format!("missing column {j}"))))
        .collect::<Result<_, _>>()?;

    let layout = layout_dims.map(|(cycles, det_per_cycle)| CycleLayout {
        cycles,
        detectors_per_cycle: det_per_cycle,
        column_cycle,
        readout: None,
    });

    let model = DecodingModel::from_columns(m, k, columns, layout)?;
    if model.num_errors() != n {
        return Err(parse_err(0, "column count mismatch"));
    }
    Ok(model)
}

fn parse_index(tok: &str, line_no: usize) -> Result<usize, ModelError> {
    tok.parse()
        .map_err(|_| parse_err(line_no, format!("bad index `{tok}`")))
}

/// Renders a model in the v1 text format. Inverse of [`parse_model`] on
/// adjacency, priors and dimensions.
pub fn render_model(model: &DecodingModel) -> String {
    let mut out = String::new();
    write!(
        out,
        "qldpc-model v1 M={} N={} K={}",
        model.num_checks, model.num_errors, model.num_logicals
    )
    .unwrap();
    if let Some(layout) = &model.layout {
        write!(
            out,
            " cycles={} det_per_cycle={}",
            layout.cycles, layout.detectors_per_cycle
        )
        .unwrap();
    }
    out.push('\n');
    for j in 0..model.num_errors {
        write!(out, "e {} p={}", j, model.priors[j]).unwrap();
        out.push_str(" H:");
        out.push_str(&join_indices(&model.error_adjacency[j]));
        out.push_str(" A:");
        let logicals: Vec<usize> = (0..model.num_logicals)
            .filter(|&k| model.logical_rows[k].contains(&j))
            .collect();
        out.push_str(&join_indices(&logicals));
        if let Some(layout) = &model.layout {
            write!(out, " cycle={}", layout.column_cycle[j]).unwrap();
        }
        out.push('\n');
    }
    out
}

fn join_indices(list: &[usize]) -> String {
    list.iter()
        .map(|i| i.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

/// Loads and validates a model file.
pub fn load_model(path: &Path) -> Result<DecodingModel, ModelError> {
    let text = std::fs::read_to_string(path)?;
    parse_model(&text)
}

/// Writes a model in the v1 text format.
pub fn save_model(model: &DecodingModel, path: &Path) -> Result<(), ModelError> {
    std::fs::write(path, render_model(model))?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Built-in code generators
// ---------------------------------------------------------------------------

fn chain_checks(q: usize, n: usize) -> Vec<usize> {
    // Adjacent-pair checks of a length-n chain: qubit q touches checks q-1, q.
    let mut v = Vec::with_capacity(2);
    if q > 0 {
        v.push(q - 1);
    }
    if q + 1 < n {
        v.push(q);
    }
    v
}

/// Repetition-code model with `n` error columns and `n - 1` adjacent-pair
/// checks; the single logical observable is the bit at column 0. Uniform
/// prior `p`. Valid for `2 <= n <= 24`, so exhaustive enumeration over the
/// error space stays tractable.
pub fn gen_single_shot_code(n: usize, p: f64) -> Result<DecodingModel, ModelError> {
    if !(2..=24).contains(&n) {
        return Err(ModelError::BadParameter(format!(
            "single-shot code size {n} outside [2, 24]"
        )));
    }
    let columns = (0..n)
        .map(|q| ColumnSpec {
            checks: chain_checks(q, n),
            logicals: if q == 0 { vec![0] } else { vec![] },
            prior: p,
        })
        .collect();
    DecodingModel::from_columns(n - 1, 1, columns, None)
}

/// Multi-cycle phenomenological memory model over a length-`n` repetition
/// code: `cycles` rounds of `n - 1` detectors. Per cycle there are `n`
/// data-error columns (touching that cycle's detectors and, except in the
/// last cycle, cancelling in the next cycle's) and `n - 1` measurement-error
/// columns (touching the same detector in consecutive cycles). The logical
/// row marks every cycle's qubit-0 data column.
///
/// The returned model carries a [`CycleLayout`] with readout matrices, which
/// is what the sliding-window machinery consumes.
pub fn gen_memory_code(
    n: usize,
    cycles: usize,
    p_data: f64,
    p_meas: f64,
) -> Result<DecodingModel, ModelError> {
    if n < 2 {
        return Err(ModelError::BadParameter(format!("memory code needs n >= 2, got {n}")));
    }
    if cycles < 1 {
        return Err(ModelError::BadParameter("memory code needs cycles >= 1".into()));
    }
    let det_per_cycle = n - 1;
    let mut columns = Vec::with_capacity(cycles * (2 * n - 1));
    let mut column_cycle = Vec::with_capacity(cycles * (2 * n - 1));
    for c in 0..cycles {
        let base = c * det_per_cycle;
        let next = base + det_per_cycle;
        let last_cycle = c + 1 == cycles;
        for q in 0..n {
            let mut checks: Vec<usize> =
                chain_checks(q, n).iter().map(|&i| base + i).collect();
            if !last_cycle {
                checks.extend(chain_checks(q, n).iter().map(|&i| next + i));
            }
            columns.push(ColumnSpec {
                checks,
                logicals: if q == 0 { vec![0] } else { vec![] },
                prior: p_data,
            });
            column_cycle.push(c);
        }
        for i in 0..det_per_cycle {
            let mut checks = vec![base + i];
            if !last_cycle {
                checks.push(next + i);
            }
            columns.push(ColumnSpec {
                checks,
                logicals: vec![],
                prior: p_meas,
            });
            column_cycle.push(c);
        }
    }
    let layout = CycleLayout {
        cycles,
        detectors_per_cycle: det_per_cycle,
        column_cycle,
        readout: Some(ReadoutMatrices {
            num_qubits: n,
            noiseless_checks: (0..det_per_cycle).map(|i| vec![i, i + 1]).collect(),
            logical_readout: vec![vec![0]],
        }),
    };
    DecodingModel::from_columns(cycles * det_per_cycle, 1, columns, Some(layout))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn llr_weight_values() {
        // ln((1-p)/p) evaluated directly.
        assert!((llr_weight(0.1).unwrap() - 2.1972245773362196).abs() < 1e-15);
        assert!((llr_weight(0.2).unwrap() - 1.3862943611198906).abs() < 1e-15);
        assert!((llr_weight(1.0 / (1.0 + std::f64::consts::E)).unwrap() - 1.0).abs() < 1e-12);
        let near_half = llr_weight(0.4999).unwrap();
        assert!(near_half > 0.0);
        assert!((near_half - 4.000000053332455e-4).abs() < 1e-12);
        assert!(llr_weight(0.5).is_err());
        assert!(llr_weight(0.0).is_err());
        assert!(llr_weight(-0.1).is_err());
        assert!(llr_weight(0.7).is_err());
    }

    #[test]
    fn minimal_model_parses_and_derives_weight() {
        let model = parse_model("qldpc-model v1 M=1 N=1 K=1\ne 0 p=0.1 H:0 A:0\n").unwrap();
        assert_eq!(model.num_checks(), 1);
        assert_eq!(model.num_errors(), 1);
        assert_eq!(model.num_logicals(), 1);
        assert!((model.weights()[0] - 2.1972245773362196).abs() < 1e-15);
    }

    #[test]
    fn boundary_prior_is_rejected() {
        let err = parse_model("qldpc-model v1 M=1 N=1 K=1\ne 0 p=0.5 H:0 A:0\n").unwrap_err();
        assert!(matches!(err, ModelError::PriorOutOfRange { .. }));
    }

    #[test]
    fn round_trip_is_identity() {
        let model = gen_memory_code(4, 3, 0.02, 0.03).unwrap();
        let reparsed = parse_model(&render_model(&model)).unwrap();
        assert_eq!(reparsed.num_checks(), model.num_checks());
        assert_eq!(reparsed.num_errors(), model.num_errors());
        assert_eq!(reparsed.num_logicals(), model.num_logicals());
        for j in 0..model.num_errors() {
            assert_eq!(reparsed.error_neighbors(j), model.error_neighbors(j));
            assert!((reparsed.priors()[j] - model.priors()[j]).abs() < 1e-15);
        }
        for k in 0..model.num_logicals() {
            assert_eq!(reparsed.logical_row(k), model.logical_row(k));
        }
        // Readout matrices are generator-side only; the file format does not
        // carry them.
        let lay = reparsed.layout().unwrap();
        assert_eq!(lay.cycles, 3);
        assert_eq!(lay.detectors_per_cycle, 3);
        assert_eq!(lay.column_cycle, model.layout().unwrap().column_cycle);
    }

    #[test]
    fn parse_rejects_malformed_lines() {
        assert!(parse_model("").is_err());
        assert!(parse_model("bogus v1 M=1 N=1 K=1").is_err());
        assert!(parse_model("qldpc-model v1 M=1 N=1\ne 0 p=0.1 H:0 A:").is_err());
        // Missing column line.
        assert!(parse_model("qldpc-model v1 M=1 N=2 K=0\ne 0 p=0.1 H:0 A:\n").is_err());
        // Unsorted adjacency.
        assert!(parse_model("qldpc-model v1 M=2 N=1 K=0\ne 0 p=0.1 H:1 0 A:\n").is_err());
        // Out-of-range check index.
        assert!(parse_model("qldpc-model v1 M=1 N=1 K=0\ne 0 p=0.1 H:3 A:\n").is_err());
        // Stray index before any list marker.
        assert!(parse_model("qldpc-model v1 M=1 N=1 K=0\ne 0 p=0.1 7 H:0 A:\n").is_err());
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let text = "# header comment\n\nqldpc-model v1 M=1 N=1 K=0\n# column\ne 0 p=0.25 H:0 A:\n";
        let model = parse_model(text).unwrap();
        assert_eq!(model.num_errors(), 1);
    }

    /// The 3x5 instance used throughout the unit tests: checks {0,1},
    /// {0,1,2}, {3,4}.
    fn example_3x5() -> DecodingModel {
        let columns = vec![
            ColumnSpec { checks: vec![0, 1], logicals: vec![], prior: 0.1 },
            ColumnSpec { checks: vec![0, 1], logicals: vec![], prior: 0.1 },
            ColumnSpec { checks: vec![1], logicals: vec![], prior: 0.1 },
            ColumnSpec { checks: vec![2], logicals: vec![], prior: 0.1 },
            ColumnSpec { checks: vec![2], logicals: vec![], prior: 0.1 },
        ];
        DecodingModel::from_columns(3, 0, columns, None).unwrap()
    }

    #[test]
    fn check_matrix_application() {
        let model = example_3x5();
        let zero = ErrorVector::zeros(5);
        assert_eq!(model.apply_check_matrix(&zero).0, vec![0, 0, 0]);
        // Hand multiplication of the matrix.
        let e = ErrorVector::from_support(5, &[0, 3]);
        assert_eq!(model.apply_check_matrix(&e).0, vec![1, 1, 1]);
        let e = ErrorVector::from_support(5, &[0, 4]);
        assert_eq!(model.apply_check_matrix(&e).0, vec![1, 1, 1]);
        // A unit vector reproduces its column.
        for j in 0..5 {
            let e = ErrorVector::from_support(5, &[j]);
            let sigma = model.apply_check_matrix(&e);
            let support: Vec<usize> = sigma
                .0
                .iter()
                .enumerate()
                .filter(|(_, &b)| b != 0)
                .map(|(i, _)| i)
                .collect();
            assert_eq!(support, model.error_neighbors(j));
        }
    }

    #[test]
    fn action_matrix_is_linear() {
        let model = gen_single_shot_code(5, 0.1).unwrap();
        assert_eq!(model.apply_action_matrix(&ErrorVector::zeros(5)), vec![0]);
        let a = ErrorVector::from_support(5, &[0, 2]);
        let b = ErrorVector::from_support(5, &[1, 2, 4]);
        let ab = a.xor(&b);
        let lhs = model.apply_action_matrix(&ab);
        let rhs: Vec<u8> = model
            .apply_action_matrix(&a)
            .iter()
            .zip(model.apply_action_matrix(&b))
            .map(|(x, y)| x ^ y)
            .collect();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn solution_weight_sums_set_bits() {
        let model = gen_single_shot_code(6, 0.2).unwrap();
        assert_eq!(model.solution_weight(&ErrorVector::zeros(6)), 0.0);
        let e = ErrorVector::from_support(6, &[0, 2, 5]);
        assert!((model.solution_weight(&e) - 4.1588830833596715).abs() < 1e-12);
        // Adding a set bit can only increase the weight.
        let heavier = ErrorVector::from_support(6, &[0, 2, 4, 5]);
        assert!(model.solution_weight(&heavier) > model.solution_weight(&e));
    }

    #[test]
    fn single_shot_structure() {
        let model = gen_single_shot_code(3, 0.1).unwrap();
        assert_eq!(model.num_checks(), 2);
        assert_eq!(model.num_errors(), 3);
        assert_eq!(model.check_neighbors(0), &[0, 1]);
        assert_eq!(model.check_neighbors(1), &[1, 2]);
        assert_eq!(model.logical_row(0), &[0]);

        let pair = gen_single_shot_code(2, 0.1).unwrap();
        assert_eq!(pair.num_checks(), 1);
        assert_eq!(pair.check_neighbors(0), &[0, 1]);

        for n in [4, 9, 17] {
            let m = gen_single_shot_code(n, 0.1).unwrap();
            for q in 1..n - 1 {
                assert_eq!(m.error_neighbors(q).len(), 2, "interior column degree");
            }
        }
        assert!(gen_single_shot_code(1, 0.1).is_err());
        assert!(gen_single_shot_code(25, 0.1).is_err());
    }

    #[test]
    fn memory_code_structure() {
        // cycles=1 reduces to the single-shot code plus degree-1 measurement
        // columns.
        let m1 = gen_memory_code(3, 1, 0.1, 0.2).unwrap();
        let ss = gen_single_shot_code(3, 0.1).unwrap();
        for q in 0..3 {
            assert_eq!(m1.error_neighbors(q), ss.error_neighbors(q));
        }
        for i in 0..2 {
            assert_eq!(m1.error_neighbors(3 + i), &[i]);
        }

        // A measurement column in a non-final cycle touches the same detector
        // in consecutive cycles.
        let m2 = gen_memory_code(3, 2, 0.1, 0.2).unwrap();
        let meas0 = 3; // cycle 0: columns 0..3 data, 3..5 measurement
        for i in 0..2 {
            assert_eq!(m2.error_neighbors(meas0 + i), &[i, 2 + i]);
        }

        // Measurement-only errors carry no logical action.
        let mut e = ErrorVector::zeros(m2.num_errors());
        e.0[meas0] = 1;
        e.0[meas0 + 1] = 1;
        assert_eq!(m2.apply_action_matrix(&e), vec![0]);

        assert!(gen_memory_code(1, 3, 0.1, 0.1).is_err());
        assert!(gen_memory_code(3, 0, 0.1, 0.1).is_err());
    }

    #[test]
    fn memory_code_telescoping_parity() {
        // Every data column outside the final cycle has even total detector
        // degree; final-cycle columns keep the bare chain incidence.
        let model = gen_memory_code(5, 4, 0.01, 0.02).unwrap();
        let layout = model.layout().unwrap().clone();
        for j in 0..model.num_errors() {
            let deg = model.error_neighbors(j).len();
            if layout.column_cycle[j] + 1 < layout.cycles {
                assert_eq!(deg % 2, 0, "column {j} not cancelled");
            }
        }
    }

    #[test]
    fn transpose_consistency_holds() {
        let model = gen_memory_code(4, 3, 0.05, 0.05).unwrap();
        assert!(model.verify_transpose_consistency());
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn llr_weight_strictly_decreasing(a in 0.001f64..0.499, b in 0.001f64..0.499) {
                prop_assume!(a < b);
                prop_assert!(llr_weight(a).unwrap() > llr_weight(b).unwrap());
            }

            #[test]
            fn llr_weight_vanishes_toward_half(eps in 1e-9f64..1e-3) {
                let w = llr_weight(0.5 - eps).unwrap();
                prop_assert!(w > 0.0 && w < 5.0 * eps);
            }

            #[test]
            fn check_matrix_is_linear(bits_a in proptest::collection::vec(0u8..2, 11),
                                      bits_b in proptest::collection::vec(0u8..2, 11)) {
                let model = gen_single_shot_code(11, 0.1).unwrap();
                let a = ErrorVector(bits_a);
                let b = ErrorVector(bits_b);
                let lhs = model.apply_check_matrix(&a.xor(&b));
                let rhs = model
                    .apply_check_matrix(&a)
                    .xor(&model.apply_check_matrix(&b));
                prop_assert_eq!(lhs, rhs);
            }
        }
    }
}
