//! Kernel norms, Parseval residuals and mean-square error bounds.
//!
//! * `I_k = ∫_{[t,T]^k} K²`, the energy of the simplex kernel.
//! * The truncation error of the Itô expansion obeys
//!   `E_k^q ≤ k! (I_k − Σ_{j ≤ q} C²)` when every noise index is nonzero
//!   (any `Δ`), or when time indices occur and `Δ < 1`.
//! * For `k = 2`, Legendre, `ψ ≡ 1`, distinct nonzero indices the error is
//!   known exactly: `Δ²/2 Σ_{i>q} 1/(4i²−1) = Δ²/(4(2q+1))`.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::basis::{BasisKind, Interval};
use crate::coefficients::{CoefficientTensor, KahanSum, KernelSpec};
use crate::gaussians::NoiseIndexVector;

/// `∫ K²` over the simplex, closed form for monomial weights:
/// `Δ^{k + 2Σα} / Π_l (l + 2 Σ_{m ≤ l} α_m)`.
pub fn kernel_norm(spec: &KernelSpec) -> f64 {
    let delta = spec.interval().delta();
    let mut exponent = 0u32;
    let mut denom = 1.0;
    for (l, &alpha) in spec.weights().iter().enumerate() {
        exponent += 2 * alpha;
        denom *= f64::from(l as u32 + 1 + exponent);
    }
    let total = spec.k() as f64 + f64::from(exponent);
    delta.powf(total) / denom
}

/// `I_k − Σ_{j ≤ q} C²` for an absolute-normalized tensor.
pub fn parseval_residual(tensor: &CoefficientTensor, q: usize) -> f64 {
    kernel_norm(&tensor.spec) - tensor.parseval_sum(q)
}

/// `k! (I_k − Σ_{j ≤ q} C²)`.
pub fn factorial_bound(tensor: &CoefficientTensor, q: usize) -> f64 {
    factorial(tensor.k()) * parseval_residual(tensor, q)
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|v| v as f64).product()
}

/// Whether the `k!`-residual bound is asserted for a noise pattern and interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundRegime {
    /// All indices nonzero; any interval length.
    NonzeroIndices,
    /// Some time indices and `Δ < 1`.
    MixedSmallInterval,
    /// Time indices with `Δ ≥ 1`: no bound is stated.
    NotAsserted,
}

pub fn bound_regime(noise: &NoiseIndexVector, interval: Interval) -> BoundRegime {
    if noise.indices().iter().all(|&i| i != 0) {
        BoundRegime::NonzeroIndices
    } else if interval.delta() < 1.0 {
        BoundRegime::MixedSmallInterval
    } else {
        BoundRegime::NotAsserted
    }
}

/// Exact mean-square error of the `q`-truncated `k = 2` Legendre expansion:
/// `Δ² / (4(2q + 1))`.
pub fn exact_e11(q: usize, interval: Interval) -> f64 {
    let d = interval.delta();
    d * d / (4.0 * (2 * q + 1) as f64)
}

/// `Δ²/2 Σ_{i=q+1}^{q+terms} 1/(4i² − 1)`, summed directly.
pub fn e11_partial_series(q: usize, interval: Interval, terms: usize) -> f64 {
    let d = interval.delta();
    let mut acc = KahanSum::default();
    // Smallest terms first.
    for i in (q + 1..=q + terms).rev() {
        let i = i as f64;
        acc.add(1.0 / (4.0 * i * i - 1.0));
    }
    d * d / 2.0 * acc.total()
}

/// The integral-comparison bound `−Δ²/8 · ln|1 − 2/(2q + 1)|`; `None` at
/// `q = 0`, where the comparison integral crosses the pole at `1/2`.
pub fn e11_log_bound(q: usize, interval: Interval) -> Option<f64> {
    if q == 0 {
        return None;
    }
    let d = interval.delta();
    let x = 1.0 - 2.0 / (2 * q + 1) as f64;
    Some(-d * d / 8.0 * x.abs().ln())
}

/// `C₁ Δ²/q` with `C₁ = 1/4`, which dominates the logarithmic bound for all
/// `q ≥ 1` since `ln((2q+1)/(2q−1)) ≤ 2/(2q−1)`.
pub fn e11_rate_bound(q: usize, interval: Interval) -> Option<f64> {
    if q == 0 {
        return None;
    }
    let d = interval.delta();
    Some(E11_RATE_CONSTANT * d * d / q as f64)
}

pub const E11_RATE_CONSTANT: f64 = 0.25;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub k: usize,
    pub p: usize,
    pub basis: BasisKind,
    pub interval: Interval,
    pub weights: Vec<u32>,
    pub i_k: f64,
    pub parseval_sum: f64,
    pub residual: f64,
    pub factorial_bound: f64,
    pub regime: Option<BoundRegime>,
    /// Present for `k = 2`, Legendre, `ψ ≡ 1`.
    pub exact_e11: Option<f64>,
    pub log_bound: Option<f64>,
    /// `C₁ Δ²/q`, alongside `exact_e11`.
    pub scaling_bound: Option<f64>,
}

impl ErrorReport {
    /// Report for the first `q ≤ tensor.p` orders; `noise` selects the bound regime.
    pub fn compute(tensor: &CoefficientTensor, q: usize, noise: Option<&NoiseIndexVector>) -> Self {
        let q = q.min(tensor.p);
        let i_k = kernel_norm(&tensor.spec);
        let parseval_sum = tensor.parseval_sum(q);
        let interval = tensor.spec.interval();
        let e11_case =
            tensor.k() == 2 && tensor.basis == BasisKind::Legendre && tensor.spec.is_unit_weight();
        Self {
            k: tensor.k(),
            p: q,
            basis: tensor.basis,
            interval,
            weights: tensor.spec.weights().to_vec(),
            i_k,
            parseval_sum,
            residual: i_k - parseval_sum,
            factorial_bound: factorial(tensor.k()) * (i_k - parseval_sum),
            regime: noise.map(|n| bound_regime(n, interval)),
            exact_e11: e11_case.then(|| exact_e11(q, interval)),
            log_bound: if e11_case {
                e11_log_bound(q, interval)
            } else {
                None
            },
            scaling_bound: if e11_case {
                e11_rate_bound(q, interval)
            } else {
                None
            },
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Two aligned columns, one quantity per row.
    pub fn to_table(&self) -> String {
        let mut rows: Vec<(&str, String)> = vec![
            ("k", self.k.to_string()),
            ("p", self.p.to_string()),
            ("basis", self.basis.to_string()),
            (
                "interval",
                format!("[{}, {}]", self.interval.start(), self.interval.end()),
            ),
            ("weights", format!("{:?}", self.weights)),
            ("I_k", format!("{:.12e}", self.i_k)),
            ("sum C^2", format!("{:.12e}", self.parseval_sum)),
            ("residual", format!("{:.12e}", self.residual)),
            ("k! * residual", format!("{:.12e}", self.factorial_bound)),
        ];
        if let Some(regime) = self.regime {
            let text = match regime {
                BoundRegime::NonzeroIndices => "asserted (nonzero indices)",
                BoundRegime::MixedSmallInterval => "asserted (time indices, T - t < 1)",
                BoundRegime::NotAsserted => "bound not asserted (time indices, T - t >= 1)",
            };
            rows.push(("bound regime", text.to_owned()));
        }
        if let Some(v) = self.exact_e11 {
            rows.push(("exact error (k=2)", format!("{v:.12e}")));
        }
        if let Some(v) = self.log_bound {
            rows.push(("log bound", format!("{v:.12e}")));
        }
        if let Some(v) = self.scaling_bound {
            rows.push(("C1 (T-t)^2 / q", format!("{v:.12e}")));
        }
        let width = rows.iter().map(|(name, _)| name.len()).max().unwrap_or(0);
        let mut out = String::new();
        for (name, value) in rows {
            let _ = writeln!(out, "{name:<width$}  {value}");
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::Basis;
    use crate::coefficients::build_tensor;

    fn iv(d: f64) -> Interval {
        Interval::new(0.0, d).unwrap()
    }

    #[test]
    fn kernel_norm_examples() {
        let n = |w: Vec<u32>, d: f64| kernel_norm(&KernelSpec::new(w, iv(d)).unwrap());
        assert!((n(vec![0, 0], 1.0) - 0.5).abs() < 1e-16);
        assert!((n(vec![0; 5], 1.0) - 1.0 / 120.0).abs() < 1e-16);
        assert!((n(vec![1], 1.0) - 1.0 / 3.0).abs() < 1e-16);
        assert!((n(vec![0, 0, 0], 2.0) - 8.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn kernel_norm_matches_quadrature() {
        use crate::quadrature::{nested_simplex, GaussLegendre};
        let rule = GaussLegendre::new(12);
        let d = 0.7;
        for w in [vec![1, 0], vec![0, 2, 1], vec![3]] {
            let factors: Vec<_> = w
                .iter()
                .map(|&a| move |s: f64| s.powi(2 * a as i32))
                .collect();
            let q = nested_simplex(&rule, 0.0, d, &factors);
            let exact = kernel_norm(&KernelSpec::new(w.clone(), iv(d)).unwrap());
            assert!((q - exact).abs() < 1e-15, "{w:?}");
        }
    }

    #[test]
    fn bound_examples() {
        let i = iv(1.0);
        let t = build_tensor(
            &KernelSpec::unit_weights(2, i).unwrap(),
            &Basis::legendre(i),
            30,
        )
        .unwrap();
        assert!((factorial_bound(&t, 0) - 0.5).abs() < 1e-15);
        let mut last = f64::INFINITY;
        for q in 0..=30 {
            let b = factorial_bound(&t, q);
            assert!(b >= 0.0 && b <= last);
            last = b;
        }
        assert!(last < 0.01);
    }

    #[test]
    fn exact_e11_examples() {
        assert!((exact_e11(0, iv(1.0)) - 0.25).abs() < 1e-16);
        assert!((exact_e11(8, iv(1.0)) - 1.0 / 68.0).abs() < 1e-16);
        for q in [0, 3, 17] {
            assert!((exact_e11(q, iv(2.0)) - 4.0 * exact_e11(q, iv(1.0))).abs() < 1e-15);
        }
    }

    #[test]
    fn e11_series_cross_check() {
        for q in [0, 1, 8, 50] {
            let n = 1_000_000;
            let direct = e11_partial_series(q, iv(1.0), n);
            // The dropped tail is itself a shifted E11.
            let tail = exact_e11(q + n, iv(1.0));
            assert!(
                (direct + tail - exact_e11(q, iv(1.0))).abs() < 1e-14,
                "q = {q}"
            );
            assert!(direct < exact_e11(q, iv(1.0)));
        }
    }

    #[test]
    fn e11_bound_chain() {
        for d in [0.1, 1.0, 3.0] {
            for q in 1..200 {
                let exact = exact_e11(q, iv(d));
                let log = e11_log_bound(q, iv(d)).unwrap();
                let rate = e11_rate_bound(q, iv(d)).unwrap();
                assert!(exact <= log * (1.0 + 1e-12), "q={q}");
                assert!(log <= rate * (1.0 + 1e-12), "q={q}");
            }
        }
        assert!(e11_log_bound(0, iv(1.0)).is_none());
    }

    #[test]
    fn regimes() {
        let n = NoiseIndexVector::new(vec![1, 2], 2).unwrap();
        assert_eq!(bound_regime(&n, iv(5.0)), BoundRegime::NonzeroIndices);
        let n = NoiseIndexVector::new(vec![0, 2], 2).unwrap();
        assert_eq!(bound_regime(&n, iv(0.5)), BoundRegime::MixedSmallInterval);
        assert_eq!(bound_regime(&n, iv(1.0)), BoundRegime::NotAsserted);
    }

    #[test]
    fn report_renders() {
        let i = iv(1.0);
        let t = build_tensor(
            &KernelSpec::unit_weights(2, i).unwrap(),
            &Basis::legendre(i),
            8,
        )
        .unwrap();
        let n = NoiseIndexVector::new(vec![1, 2], 2).unwrap();
        let r = ErrorReport::compute(&t, 8, Some(&n));
        assert!((r.residual - 1.0 / 68.0).abs() < 1e-12);
        let table = r.to_table();
        assert!(table.contains("exact error (k=2)"));
        let back: ErrorReport = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(back, r);
    }
}
