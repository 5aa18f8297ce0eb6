//! Run configurations. Every artifact embeds the one that produced it, and
//! `--config` replays it. Output locations and formats are deliberately not
//! part of a configuration: they do not change what is computed.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use stochint::basis::{BasisKind, Interval};
use stochint::coefficients::{KernelSpec, Normalization};
use stochint::mc_oracle::TruncationKind;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum RunConfig {
    Coeffs(CoeffsConfig),
    Approximate(ApproximateConfig),
    Validate(ValidateConfig),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelConfig {
    pub basis: BasisKind,
    pub t: f64,
    #[serde(rename = "T")]
    pub end: f64,
    /// Monomial exponents α₁..α_k of ψ_l(s) = (t − s)^{α_l}.
    pub weights: Vec<u32>,
}

impl KernelConfig {
    pub fn interval(&self) -> stochint::Result<Interval> {
        Interval::new(self.t, self.end)
    }

    pub fn spec(&self) -> stochint::Result<KernelSpec> {
        KernelSpec::new(self.weights.clone(), self.interval()?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoeffsConfig {
    pub kernel: KernelConfig,
    pub p: usize,
    pub normalization: Normalization,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TensorSource {
    Inline(KernelConfig),
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApproximateConfig {
    pub source: TensorSource,
    /// Truncation order; `None` uses the full tensor.
    pub p: Option<usize>,
    pub indices: Vec<usize>,
    pub m: usize,
    pub seed: u64,
    pub draws: u64,
    pub breakdown: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    /// Measured error equals `I_k − Σ C²` (all indices nonzero and distinct).
    Exact,
    /// Measured error stays below `k! (I_k − Σ C²)`.
    Bound,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationRow {
    pub indices: Vec<usize>,
    pub q: usize,
    pub basis: BasisKind,
    pub delta: f64,
    pub kind: TruncationKind,
    pub check: Check,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidateConfig {
    pub seed: u64,
    pub paths: usize,
    pub steps: usize,
    pub rows: Vec<ValidationRow>,
}

fn row(
    indices: &[usize],
    q: usize,
    basis: BasisKind,
    delta: f64,
    kind: TruncationKind,
    check: Check,
) -> ValidationRow {
    ValidationRow {
        indices: indices.to_vec(),
        q,
        basis,
        delta,
        kind,
        check,
    }
}

/// The standard theory-vs-measurement grid.
pub fn default_rows() -> Vec<ValidationRow> {
    use BasisKind::{Legendre, Trigonometric};
    use TruncationKind::{Ito, Strat};
    vec![
        row(&[1, 2], 8, Legendre, 1.0, Ito, Check::Exact),
        row(&[1, 2], 8, Legendre, 1.0, Strat, Check::Exact),
        row(&[1, 2], 8, Trigonometric, 1.0, Ito, Check::Exact),
        row(&[1, 2, 3], 4, Legendre, 1.0, Ito, Check::Exact),
        row(&[1, 1, 2], 4, Legendre, 1.0, Ito, Check::Bound),
        row(&[1, 2, 1, 2], 2, Legendre, 0.5, Ito, Check::Bound),
        row(&[1, 2, 3, 4, 5], 2, Legendre, 0.25, Ito, Check::Bound),
    ]
}
