//! Truncated Stratonovich expansions: the plain product series
//! `Σ_{j ≤ p} C_{j_k…j_1} Π_l ζ_{j_l}^{(i_l)}`, plus a report of which
//! known convergence result covers a given request.

use serde::{Deserialize, Serialize};

use crate::basis::BasisKind;
use crate::coefficients::check_multiplicity;
use crate::error::{Error, Result};
use crate::gaussians::GaussianMatrix;
use crate::ito_expansion::Truncation;

pub type StratTruncation<'a> = Truncation<'a>;

/// The truncated Stratonovich expansion. Uses the same summation order as
/// [`crate::ito_expansion::eval_ito`].
pub fn eval_strat(trunc: &StratTruncation<'_>, zeta: &GaussianMatrix) -> Result<f64> {
    trunc.check_zeta(zeta)?;
    Ok(trunc.contract(zeta, &[]))
}

/// A mean-square convergence result for the Stratonovich expansion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    /// `k = 1`: the two conventions coincide.
    SingleIntegral,
    /// `k = 2`, `ψ₂ ∈ C¹`, `ψ₁ ∈ C²`.
    DoubleC1C2,
    /// `k = 2`, `ψ₁, ψ₂ ∈ C¹`.
    DoubleC1,
    /// `k = 3`, `ψ ≡ 1`, nonzero indices.
    TripleUnitWeights,
    /// `k = 3`, Legendre basis, monomial weights, one of four coincidence patterns.
    TripleLegendrePolynomial,
    /// `k = 3`, smooth weights, one of four coincidence patterns.
    TripleSmoothPattern,
    /// `k = 3`, `ψ₂ ∈ C¹`, `ψ₁, ψ₃ ∈ C²`, any nonzero indices.
    TripleSmooth,
    /// `k = 4`, `ψ ≡ 1`, indices in `0..=m`.
    QuadrupleUnitWeights,
    /// `k = 5`, `ψ ≡ 1`, indices in `0..=m`.
    QuintupleUnitWeights,
}

impl Rule {
    pub fn as_str(&self) -> &'static str {
        match self {
            Rule::SingleIntegral => "single integral",
            Rule::DoubleC1C2 => "double, smooth weights (C1/C2)",
            Rule::DoubleC1 => "double, smooth weights (C1)",
            Rule::TripleUnitWeights => "triple, unit weights",
            Rule::TripleLegendrePolynomial => "triple, Legendre with polynomial weights",
            Rule::TripleSmoothPattern => "triple, smooth weights with index pattern",
            Rule::TripleSmooth => "triple, smooth weights",
            Rule::QuadrupleUnitWeights => "quadruple, unit weights",
            Rule::QuintupleUnitWeights => "quintuple, unit weights",
        }
    }
}

impl std::fmt::Display for Rule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// The index/weight coincidence pattern a `k = 3` rule matched.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pattern {
    /// `i₁, i₂, i₃` pairwise distinct.
    DistinctIndices,
    /// `i₁ = i₂ ≠ i₃` with matching first two weights.
    LeadingPair,
    /// `i₁ ≠ i₂ = i₃` with matching last two weights.
    TrailingPair,
    /// All three weights equal.
    EqualWeights,
}

/// One covering result, with the pattern that matched (if the rule has patterns).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Coverage {
    pub rule: Rule,
    pub pattern: Option<Pattern>,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidityReport {
    pub k: usize,
    pub covered: bool,
    pub coverage: Vec<Coverage>,
    /// Set when no result applies; evaluation still proceeds.
    pub warning: Option<String>,
}

fn cov(rule: Rule, pattern: Option<Pattern>, note: &str) -> Coverage {
    Coverage {
        rule,
        pattern,
        note: note.to_owned(),
    }
}

/// Reports which mean-square convergence result covers a Stratonovich
/// expansion with these noise indices, monomial weight exponents and basis.
///
/// Informational only; nothing is blocked.
pub fn validity_conditions(
    indices: &[usize],
    weights: &[u32],
    basis: BasisKind,
) -> Result<ValidityReport> {
    use Pattern::*;
    use Rule::*;
    let k = indices.len();
    check_multiplicity(k)?;
    if weights.len() != k {
        return Err(Error::DimensionMismatch(format!(
            "{} weights for {k} noise indices",
            weights.len()
        )));
    }
    let unit = weights.iter().all(|&a| a == 0);
    let nonzero = indices.iter().all(|&i| i != 0);
    let mut coverage = Vec::new();
    match k {
        1 => coverage.push(cov(SingleIntegral, None, "Itô and Stratonovich coincide")),
        2 => {
            // Monomial weights are smooth, so the smoothness hypotheses hold.
            coverage.push(cov(DoubleC1C2, None, "ψ₂ ∈ C¹, ψ₁ ∈ C²"));
            coverage.push(cov(DoubleC1, None, "ψ₁, ψ₂ ∈ C¹"));
        }
        3 if nonzero => {
            let (i1, i2, i3) = (indices[0], indices[1], indices[2]);
            let (l1, l2, l3) = (weights[0], weights[1], weights[2]);
            if unit {
                coverage.push(cov(TripleUnitWeights, None, "ψ ≡ 1, nonzero indices"));
            }
            if basis == BasisKind::Legendre {
                if i1 != i2 && i2 != i3 && i1 != i3 {
                    coverage.push(cov(
                        TripleLegendrePolynomial,
                        Some(DistinctIndices),
                        "pairwise distinct indices",
                    ));
                }
                if i1 == i2 && i2 != i3 && l1 == l2 && l2 != l3 {
                    coverage.push(cov(
                        TripleLegendrePolynomial,
                        Some(LeadingPair),
                        "i₁=i₂≠i₃ and l₁=l₂≠l₃",
                    ));
                }
                if i1 != i2 && i2 == i3 && l1 != l2 && l2 == l3 {
                    coverage.push(cov(
                        TripleLegendrePolynomial,
                        Some(TrailingPair),
                        "i₁≠i₂=i₃ and l₁≠l₂=l₃",
                    ));
                }
                if l1 == l2 && l2 == l3 {
                    coverage.push(cov(
                        TripleLegendrePolynomial,
                        Some(EqualWeights),
                        "l₁=l₂=l₃",
                    ));
                }
            }
            if i1 != i2 && i2 != i3 && i1 != i3 {
                coverage.push(cov(
                    TripleSmoothPattern,
                    Some(DistinctIndices),
                    "pairwise distinct indices",
                ));
            }
            if i1 == i2 && i2 != i3 && l1 == l2 {
                coverage.push(cov(
                    TripleSmoothPattern,
                    Some(LeadingPair),
                    "i₁=i₂≠i₃ and ψ₁≡ψ₂",
                ));
            }
            if i1 != i2 && i2 == i3 && l2 == l3 {
                coverage.push(cov(
                    TripleSmoothPattern,
                    Some(TrailingPair),
                    "i₁≠i₂=i₃ and ψ₂≡ψ₃",
                ));
            }
            if l1 == l2 && l2 == l3 {
                coverage.push(cov(TripleSmoothPattern, Some(EqualWeights), "ψ₁≡ψ₂≡ψ₃"));
            }
            coverage.push(cov(
                TripleSmooth,
                None,
                "ψ₂ ∈ C¹, ψ₁, ψ₃ ∈ C²; any nonzero indices",
            ));
        }
        4 if unit => coverage.push(cov(QuadrupleUnitWeights, None, "ψ ≡ 1, indices 0..m")),
        5 if unit => coverage.push(cov(QuintupleUnitWeights, None, "ψ ≡ 1, indices 0..m")),
        _ => {}
    }
    let covered = !coverage.is_empty();
    let warning = (!covered).then(|| {
        format!(
            "k = {k}, indices {indices:?}, weights {weights:?}: not covered by a known convergence result; \
             the expansion is evaluated anyway and can be checked against the oracle"
        )
    });
    Ok(ValidityReport {
        k,
        covered,
        coverage,
        warning,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{Basis, Interval};
    use crate::coefficients::{build_tensor, KernelSpec};
    use crate::gaussians::{draw, NoiseIndexVector};
    use crate::ito_expansion::eval_ito;

    fn has(r: &ValidityReport, rule: Rule, pattern: Option<Pattern>) -> bool {
        r.coverage
            .iter()
            .any(|c| c.rule == rule && c.pattern == pattern)
    }

    #[test]
    fn lowest_order_values() {
        let iv = Interval::unit();
        let t = build_tensor(
            &KernelSpec::unit_weights(2, iv).unwrap(),
            &Basis::legendre(iv),
            0,
        )
        .unwrap();
        let noise = NoiseIndexVector::new(vec![1, 1], 1).unwrap();
        let tr = Truncation::new(&t, &noise, 0).unwrap();
        let z = GaussianMatrix::from_rows(t.basis(), 0, &[vec![1.3]]).unwrap();
        assert!((eval_strat(&tr, &z).unwrap() - 1.3 * 1.3 / 2.0).abs() < 1e-15);
        let gap = eval_strat(&tr, &z).unwrap() - eval_ito(&tr, &z).unwrap();
        assert!((gap - 0.5).abs() < 1e-15);
        let zero = GaussianMatrix::from_rows(t.basis(), 0, &[vec![0.0]]).unwrap();
        assert_eq!(eval_strat(&tr, &zero).unwrap(), 0.0);
    }

    #[test]
    fn distinct_indices_match_ito() {
        let iv = Interval::new(0.0, 0.5).unwrap();
        let t = build_tensor(
            &KernelSpec::unit_weights(5, iv).unwrap(),
            &Basis::legendre(iv),
            2,
        )
        .unwrap();
        let noise = NoiseIndexVector::new(vec![1, 2, 3, 4, 5], 5).unwrap();
        let tr = Truncation::new(&t, &noise, 2).unwrap();
        for seed in 0..4 {
            let z = draw(seed, 5, 2, t.basis()).unwrap();
            assert_eq!(eval_strat(&tr, &z).unwrap(), eval_ito(&tr, &z).unwrap());
        }
    }

    #[test]
    fn multilinear_in_rows() {
        let iv = Interval::unit();
        let t = build_tensor(
            &KernelSpec::unit_weights(3, iv).unwrap(),
            &Basis::legendre(iv),
            3,
        )
        .unwrap();
        let noise = NoiseIndexVector::new(vec![1, 2, 1], 2).unwrap();
        let tr = Truncation::new(&t, &noise, 3).unwrap();
        let z = draw(11, 2, 3, t.basis()).unwrap();
        let base = eval_strat(&tr, &z).unwrap();
        let mut scaled = z.clone();
        for v in scaled.row_mut(1) {
            *v *= 2.0;
        }
        for v in scaled.row_mut(2) {
            *v *= -3.0;
        }
        // Row 1 appears twice, row 2 once: factor 2² · (−3).
        let got = eval_strat(&tr, &scaled).unwrap();
        assert!((got - base * 4.0 * -3.0).abs() < 1e-12 * base.abs().max(1.0));
    }

    #[test]
    fn coverage_examples() {
        let r = validity_conditions(&[1, 1, 2], &[0, 0, 0], BasisKind::Legendre).unwrap();
        assert!(
            r.covered
                && has(&r, Rule::TripleSmoothPattern, Some(Pattern::LeadingPair))
                && has(&r, Rule::TripleSmooth, None)
        );
        let r = validity_conditions(&[1, 2, 2], &[1, 2, 2], BasisKind::Legendre).unwrap();
        assert!(
            r.covered
                && has(
                    &r,
                    Rule::TripleLegendrePolynomial,
                    Some(Pattern::TrailingPair)
                )
        );
        let r = validity_conditions(&[1, 2, 2], &[1, 2, 2], BasisKind::Trigonometric).unwrap();
        assert!(
            !has(
                &r,
                Rule::TripleLegendrePolynomial,
                Some(Pattern::TrailingPair)
            ) && has(&r, Rule::TripleSmoothPattern, Some(Pattern::TrailingPair))
        );
        for idx in [[0, 1, 2, 3, 4], [1, 1, 1, 1, 1], [2, 0, 2, 1, 0]] {
            let r = validity_conditions(&idx, &[0; 5], BasisKind::Trigonometric).unwrap();
            assert!(r.covered && has(&r, Rule::QuintupleUnitWeights, None));
        }
    }

    #[test]
    fn uncovered_requests_warn() {
        let r =
            validity_conditions(&[1, 2, 3, 1, 2], &[0, 1, 0, 0, 0], BasisKind::Legendre).unwrap();
        assert!(!r.covered);
        assert!(r.warning.is_some());
        let r = validity_conditions(&[0, 1, 1], &[0, 0, 0], BasisKind::Legendre).unwrap();
        assert!(!r.covered);
        assert!(validity_conditions(&[1; 6], &[0; 6], BasisKind::Legendre).is_err());
    }
}
