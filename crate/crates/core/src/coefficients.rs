//! Fourier coefficients of the simplex kernel
//! `K(t_1,…,t_k) = ψ_1(t_1)…ψ_k(t_k) · 1{t_1 < … < t_k}`.
//!
//! ```text
//! C_{j_k…j_1} = ∫_t^T φ_{j_k}(t_k) ψ_k(t_k) … ∫_t^{t_2} φ_{j_1}(t_1) ψ_1(t_1) dt_1 … dt_k
//! ```
//!
//! Weights are monomials `ψ_l(s) = (t − s)^{α_l}`; all-zero exponents give
//! `ψ ≡ 1`. Both bases are integrated exactly: Legendre products through
//! Legendre-series arithmetic, trigonometric products through exponential
//! polynomials. Everything is computed on `[0, 1]` and rescaled by
//! `Δ^{k/2 + Σα}`.
//!
//! Multi-indices are passed as `[j_1, …, j_k]`, i.e. the reverse of the
//! subscript order `C_{j_k…j_1}`; tensors store `j_1` fastest.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::{Basis, BasisKind, Interval};
use crate::error::{Error, Result};
use crate::exp_poly::ExpPoly;
use crate::legendre_series::LegendreSeries;
use crate::quadrature::{nested_simplex, GaussLegendre};

pub const MAX_MULTIPLICITY: usize = 5;

/// Default refusal threshold for [`build_tensor`], in entries.
pub const DEFAULT_TENSOR_BUDGET: usize = 10_000_000;

/// Multiplicity, weight exponents and interval of a simplex kernel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    weights: Vec<u32>,
    interval: Interval,
}

impl KernelSpec {
    /// `weights[l]` is the exponent `α` of `ψ_{l+1}(s) = (t − s)^α`.
    pub fn new(weights: Vec<u32>, interval: Interval) -> Result<Self> {
        check_multiplicity(weights.len())?;
        Ok(Self { weights, interval })
    }

    /// `ψ_1 ≡ … ≡ ψ_k ≡ 1`.
    pub fn unit_weights(k: usize, interval: Interval) -> Result<Self> {
        Self::new(vec![0; k], interval)
    }

    pub fn k(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[u32] {
        &self.weights
    }

    pub fn interval(&self) -> Interval {
        self.interval
    }

    pub fn is_unit_weight(&self) -> bool {
        self.weights.iter().all(|&a| a == 0)
    }

    /// `Δ^{k/2 + Σα}`: absolute coefficient over unit-interval coefficient.
    pub fn scale_factor(&self) -> f64 {
        let total: u32 = self.weights.iter().sum();
        self.interval
            .delta()
            .powf(self.k() as f64 / 2.0 + f64::from(total))
    }

    /// `(−1)^{Σα}`: the sign of `Π (t − s)^{α_l}` inside `(t, T)`.
    fn weight_sign(&self) -> f64 {
        if self.weights.iter().sum::<u32>() % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }
}

pub(crate) fn check_multiplicity(k: usize) -> Result<()> {
    if (1..=MAX_MULTIPLICITY).contains(&k) {
        Ok(())
    } else {
        Err(Error::UnsupportedMultiplicity(k))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// Coefficients of the same kernel on `[0, 1]`.
    UnitInterval,
    /// Coefficients on the kernel's own interval.
    Absolute,
}

fn check_basis(spec: &KernelSpec, basis: &Basis) -> Result<()> {
    if spec.interval != basis.interval {
        return Err(Error::InvalidArgument(format!(
            "kernel interval {:?} differs from basis interval {:?}",
            spec.interval, basis.interval
        )));
    }
    Ok(())
}

/// A single coefficient `C_{j_k…j_1}`; `j = [j_1, …, j_k]`.
pub fn coefficient(spec: &KernelSpec, basis: &Basis, j: &[usize]) -> Result<f64> {
    check_basis(spec, basis)?;
    if j.len() != spec.k() {
        return Err(Error::DimensionMismatch(format!(
            "multi-index has length {}, kernel multiplicity is {}",
            j.len(),
            spec.k()
        )));
    }
    let unit = match basis.kind {
        BasisKind::Legendre => legendre_unit_coefficient(spec.weights(), j),
        BasisKind::Trigonometric => trig_unit_coefficient(spec.weights(), j)?,
    };
    Ok(unit * spec.weight_sign() * spec.scale_factor())
}

fn legendre_level(prev: &LegendreSeries, alpha: u32, j_max: usize) -> Vec<LegendreSeries> {
    prev.mul_unit_power(alpha).legendre_products(j_max)
}

/// `Q_l(u) = ∫_0^u φ̂_j(v) v^α Q_{l−1}(v) dv` in `y = 2u − 1`, given
/// `prod = P_j · v^α · Q_{l−1}`.
fn legendre_inner(prod: &LegendreSeries, j: usize) -> LegendreSeries {
    prod.integrate_from_left()
        .scale(0.5 * ((2 * j + 1) as f64).sqrt())
}

/// `∫_0^1 φ̂_j(v) v^α Q_{k−1}(v) dv`.
fn legendre_outer(prod: &LegendreSeries, j: usize) -> f64 {
    0.5 * ((2 * j + 1) as f64).sqrt() * prod.definite_integral()
}

fn legendre_unit_coefficient(weights: &[u32], j: &[usize]) -> f64 {
    let k = j.len();
    let mut q = LegendreSeries::one();
    for (l, (&jl, &alpha)) in j.iter().zip(weights).enumerate() {
        let prods = legendre_level(&q, alpha, jl);
        let prod = &prods[jl];
        if l + 1 == k {
            return legendre_outer(prod, jl);
        }
        q = legendre_inner(prod, jl);
    }
    unreachable!("multiplicity checked to be at least one")
}

fn trig_unit_coefficient(weights: &[u32], j: &[usize]) -> Result<f64> {
    let mut q = ExpPoly::one();
    for (&jl, &alpha) in j.iter().zip(weights) {
        q = ExpPoly::trig_basis(jl)
            .mul_power(alpha)
            .mul(&q)
            .integrate_from_zero();
    }
    let v = q.value_at_one();
    let scale = v.norm().max(1.0);
    if v.im.abs() > 1e-9 * scale {
        return Err(Error::Coefficient {
            path: "exact trigonometric",
            reason: format!("non-real result {v}"),
        });
    }
    Ok(v.re)
}

/// Coefficient by nested Gauss–Legendre quadrature (`nodes` per level).
///
/// Independent of the exact paths; intended as a cross-check for small `k`.
pub fn coefficient_by_quadrature(
    spec: &KernelSpec,
    basis: &Basis,
    j: &[usize],
    nodes: usize,
) -> Result<f64> {
    check_basis(spec, basis)?;
    if j.len() != spec.k() {
        return Err(Error::DimensionMismatch(format!(
            "multi-index has length {}, kernel multiplicity is {}",
            j.len(),
            spec.k()
        )));
    }
    let rule = GaussLegendre::new(nodes);
    let t0 = spec.interval.start();
    let factors: Vec<_> = j
        .iter()
        .zip(spec.weights())
        .map(|(&jl, &alpha)| {
            move |s: f64| basis.eval(jl, s).unwrap_or(0.0) * (t0 - s).powi(alpha as i32)
        })
        .collect();
    Ok(nested_simplex(&rule, t0, spec.interval.end(), &factors))
}

/// Dense `(p+1)^k` coefficient array, `j_1` varying fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientTensor {
    pub spec: KernelSpec,
    pub basis: BasisKind,
    pub p: usize,
    pub normalization: Normalization,
    pub values: Vec<f64>,
}

impl CoefficientTensor {
    pub fn k(&self) -> usize {
        self.spec.k()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// The interval the stored values refer to.
    pub fn effective_interval(&self) -> Interval {
        match self.normalization {
            Normalization::Absolute => self.spec.interval(),
            Normalization::UnitInterval => Interval::unit(),
        }
    }

    /// The basis on [`Self::effective_interval`].
    pub fn basis(&self) -> Basis {
        Basis::new(self.basis, self.effective_interval())
    }

    pub fn flat_index(&self, j: &[usize]) -> usize {
        debug_assert_eq!(j.len(), self.k());
        j.iter().rev().fold(0, |acc, &jl| {
            debug_assert!(jl <= self.p);
            acc * (self.p + 1) + jl
        })
    }

    /// `C_{j_k…j_1}` with `j = [j_1, …, j_k]`.
    pub fn get(&self, j: &[usize]) -> f64 {
        self.values[self.flat_index(j)]
    }

    /// `Σ C²` over multi-indices with every entry at most `q`.
    pub fn parseval_sum(&self, q: usize) -> f64 {
        let q = q.min(self.p);
        let mut acc = KahanSum::default();
        for_each_index(self.k(), q, |j| {
            let c = self.get(j);
            acc.add(c * c);
        });
        acc.total()
    }

    /// Converts between normalizations.
    pub fn renormalized(&self, target: Normalization) -> Self {
        let factor = match (self.normalization, target) {
            (a, b) if a == b => 1.0,
            (Normalization::UnitInterval, Normalization::Absolute) => self.spec.scale_factor(),
            _ => 1.0 / self.spec.scale_factor(),
        };
        Self {
            values: self.values.iter().map(|v| v * factor).collect(),
            normalization: target,
            ..self.clone()
        }
    }
}

/// Calls `f` with every multi-index in `{0..=p}^k`, `j_1` fastest.
pub fn for_each_index<F: FnMut(&[usize])>(k: usize, p: usize, mut f: F) {
    let mut j = vec![0usize; k];
    loop {
        f(&j);
        let mut l = 0;
        loop {
            if l == k {
                return;
            }
            j[l] += 1;
            if j[l] <= p {
                break;
            }
            j[l] = 0;
            l += 1;
        }
    }
}

/// Neumaier compensated summation.
#[derive(Debug, Default, Clone, Copy)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Builds the full tensor in [`Normalization::Absolute`] with the default
/// memory budget.
pub fn build_tensor(spec: &KernelSpec, basis: &Basis, p: usize) -> Result<CoefficientTensor> {
    build_tensor_with(
        spec,
        basis,
        p,
        Normalization::Absolute,
        DEFAULT_TENSOR_BUDGET,
    )
}

pub fn build_tensor_with(
    spec: &KernelSpec,
    basis: &Basis,
    p: usize,
    normalization: Normalization,
    budget: usize,
) -> Result<CoefficientTensor> {
    check_basis(spec, basis)?;
    let k = spec.k();
    let required = (p as u128 + 1).pow(k as u32);
    if required > budget as u128 {
        return Err(Error::Budget {
            what: "coefficient tensor entries",
            required,
            limit: budget as u128,
        });
    }
    let stride = (p + 1).pow(k as u32 - 1);
    // Parallel over j_1; each block holds every entry with that j_1.
    let blocks: Vec<Vec<f64>> = (0..=p)
        .into_par_iter()
        .map(|j1| match basis.kind {
            BasisKind::Legendre => legendre_block(spec.weights(), p, j1),
            BasisKind::Trigonometric => trig_block(spec.weights(), p, j1),
        })
        .collect();
    let factor = match normalization {
        Normalization::Absolute => spec.weight_sign() * spec.scale_factor(),
        Normalization::UnitInterval => spec.weight_sign(),
    };
    let mut values = vec![0.0; required as usize];
    for (j1, block) in blocks.into_iter().enumerate() {
        debug_assert_eq!(block.len(), stride);
        for (rest, v) in block.into_iter().enumerate() {
            values[j1 + (p + 1) * rest] = v * factor;
        }
    }
    Ok(CoefficientTensor {
        spec: spec.clone(),
        basis: basis.kind,
        p,
        normalization,
        values,
    })
}

/// Entries with fixed `j_1`, ordered by `(j_2, …, j_k)` with `j_2` fastest.
fn legendre_block(weights: &[u32], p: usize, j1: usize) -> Vec<f64> {
    let k = weights.len();
    let mut out = vec![0.0; (p + 1).pow(k as u32 - 1)];
    let prods = legendre_level(&LegendreSeries::one(), weights[0], j1);
    if k == 1 {
        out[0] = legendre_outer(&prods[j1], j1);
        return out;
    }
    let q1 = legendre_inner(&prods[j1], j1);
    legendre_descend(weights, p, 1, &q1, 0, 1, &mut out);
    out
}

fn legendre_descend(
    weights: &[u32],
    p: usize,
    level: usize,
    q: &LegendreSeries,
    offset: usize,
    stride: usize,
    out: &mut [f64],
) {
    let k = weights.len();
    let prods = legendre_level(q, weights[level], p);
    for (j, prod) in prods.iter().enumerate() {
        let idx = offset + j * stride;
        if level + 1 == k {
            out[idx] = legendre_outer(prod, j);
        } else {
            let next = legendre_inner(prod, j);
            legendre_descend(weights, p, level + 1, &next, idx, stride * (p + 1), out);
        }
    }
}

fn trig_block(weights: &[u32], p: usize, j1: usize) -> Vec<f64> {
    let k = weights.len();
    let mut out = vec![0.0; (p + 1).pow(k as u32 - 1)];
    let basis: Vec<ExpPoly> = (0..=p).map(ExpPoly::trig_basis).collect();
    let q1 = basis[j1].mul_power(weights[0]).integrate_from_zero();
    if k == 1 {
        out[0] = q1.value_at_one().re;
        return out;
    }
    trig_descend(weights, &basis, 1, &q1, 0, 1, &mut out);
    out
}

fn trig_descend(
    weights: &[u32],
    basis: &[ExpPoly],
    level: usize,
    q: &ExpPoly,
    offset: usize,
    stride: usize,
    out: &mut [f64],
) {
    let k = weights.len();
    let weighted = q.mul_power(weights[level]);
    for (j, phi) in basis.iter().enumerate() {
        let idx = offset + j * stride;
        let next = phi.mul(&weighted).integrate_from_zero();
        if level + 1 == k {
            out[idx] = next.value_at_one().re;
        } else {
            trig_descend(
                weights,
                basis,
                level + 1,
                &next,
                idx,
                stride * basis.len(),
                out,
            );
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iv(a: f64, b: f64) -> Interval {
        Interval::new(a, b).unwrap()
    }

    fn rel_close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1e-300)
    }

    #[test]
    fn golden_values() {
        for delta in [1.0, 0.25, 3.0] {
            let i = iv(0.5, 0.5 + delta);
            let b = Basis::legendre(i);
            let k1 = KernelSpec::unit_weights(1, i).unwrap();
            assert!(rel_close(
                coefficient(&k1, &b, &[0]).unwrap(),
                delta.sqrt(),
                1e-12
            ));
            assert!(coefficient(&k1, &b, &[1]).unwrap().abs() < 1e-14);
            let k2 = KernelSpec::unit_weights(2, i).unwrap();
            assert!(rel_close(
                coefficient(&k2, &b, &[0, 0]).unwrap(),
                delta / 2.0,
                1e-12
            ));
            let c01 = delta / (2.0 * 3f64.sqrt());
            assert!(rel_close(
                coefficient(&k2, &b, &[0, 1]).unwrap(),
                c01,
                1e-12
            ));
            assert!(rel_close(
                coefficient(&k2, &b, &[1, 0]).unwrap(),
                -c01,
                1e-12
            ));
            let k3 = KernelSpec::unit_weights(3, i).unwrap();
            assert!(rel_close(
                coefficient(&k3, &b, &[0, 0, 0]).unwrap(),
                delta.powf(1.5) / 6.0,
                1e-12
            ));
        }
    }

    #[test]
    fn k2_legendre_pattern() {
        // Only the diagonal (0,0) and the first off-diagonals survive.
        let i = Interval::unit();
        let b = Basis::legendre(i);
        let t = build_tensor(&KernelSpec::unit_weights(2, i).unwrap(), &b, 12).unwrap();
        for j1 in 0..=12 {
            for j2 in 0..=12 {
                let c = t.get(&[j1, j2]);
                let expect = if j1 == 0 && j2 == 0 {
                    0.5
                } else if j2 == j1 + 1 {
                    0.5 / ((4 * j2 * j2 - 1) as f64).sqrt()
                } else if j1 == j2 + 1 {
                    -0.5 / ((4 * j1 * j1 - 1) as f64).sqrt()
                } else {
                    0.0
                };
                assert!((c - expect).abs() < 1e-14, "({j1},{j2}): {c} vs {expect}");
            }
        }
    }

    #[test]
    fn tensor_matches_single_coefficients() {
        for kind in [BasisKind::Legendre, BasisKind::Trigonometric] {
            let i = iv(0.0, 0.7);
            let b = Basis::new(kind, i);
            let spec = KernelSpec::new(vec![1, 0, 2], i).unwrap();
            let t = build_tensor(&spec, &b, 3).unwrap();
            for_each_index(3, 3, |j| {
                let c = coefficient(&spec, &b, j).unwrap();
                assert!((t.get(j) - c).abs() < 1e-14, "{kind} {j:?}");
            });
        }
    }

    #[test]
    fn exact_paths_match_quadrature() {
        for kind in [BasisKind::Legendre, BasisKind::Trigonometric] {
            let i = iv(-0.2, 0.9);
            let b = Basis::new(kind, i);
            for weights in [vec![0, 0], vec![2, 1], vec![0, 1, 0]] {
                let spec = KernelSpec::new(weights.clone(), i).unwrap();
                for_each_index(spec.k(), 3, |j| {
                    let exact = coefficient(&spec, &b, j).unwrap();
                    let quad = coefficient_by_quadrature(&spec, &b, j, 24).unwrap();
                    assert!(
                        (exact - quad).abs() < 1e-13,
                        "{kind} {weights:?} {j:?}: {exact} vs {quad}"
                    );
                });
            }
        }
    }

    #[test]
    fn build_examples() {
        let i = iv(0.0, 2.0);
        let b = Basis::legendre(i);
        let t = build_tensor(&KernelSpec::unit_weights(2, i).unwrap(), &b, 0).unwrap();
        assert_eq!(t.values.len(), 1);
        assert!(rel_close(t.values[0], 1.0, 1e-14));

        let t = build_tensor(&KernelSpec::unit_weights(5, i).unwrap(), &b, 2).unwrap();
        assert_eq!(t.values.len(), 243);
        assert!(rel_close(t.values[0], 2f64.powf(2.5) / 120.0, 1e-12));

        let t = build_tensor(&KernelSpec::unit_weights(1, i).unwrap(), &b, 3).unwrap();
        assert!(rel_close(t.values[0], 2f64.sqrt(), 1e-14));
        assert!(t.values[1..].iter().all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn budget_refusal_reports_size() {
        let i = Interval::unit();
        let spec = KernelSpec::unit_weights(5, i).unwrap();
        let err = build_tensor_with(&spec, &Basis::legendre(i), 9, Normalization::Absolute, 1000)
            .unwrap_err();
        match err {
            Error::Budget { required, .. } => assert_eq!(required, 100_000),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn multiplicity_bounds() {
        let i = Interval::unit();
        assert!(matches!(
            KernelSpec::unit_weights(0, i),
            Err(Error::UnsupportedMultiplicity(0))
        ));
        assert!(matches!(
            KernelSpec::unit_weights(6, i),
            Err(Error::UnsupportedMultiplicity(6))
        ));
    }

    #[test]
    fn normalization_scaling() {
        let i = iv(1.0, 1.3);
        let spec = KernelSpec::unit_weights(3, i).unwrap();
        let b = Basis::legendre(i);
        let abs = build_tensor(&spec, &b, 4).unwrap();
        let unit = build_tensor_with(
            &spec,
            &b,
            4,
            Normalization::UnitInterval,
            DEFAULT_TENSOR_BUDGET,
        )
        .unwrap();
        let d = 0.3f64.powf(1.5);
        for (a, u) in abs.values.iter().zip(&unit.values) {
            assert!((a - u * d).abs() <= 1e-12 * a.abs().max(1e-15));
        }
        let back = unit.renormalized(Normalization::Absolute);
        for (a, u) in abs.values.iter().zip(&back.values) {
            assert!((a - u).abs() <= 1e-14);
        }
    }

    #[test]
    fn weight_sign_convention() {
        // k = 1, α = 1: ∫_t^T (t − s) φ_0(s) ds = −Δ^{3/2}/2
        let i = iv(0.0, 4.0);
        let spec = KernelSpec::new(vec![1], i).unwrap();
        let c = coefficient(&spec, &Basis::legendre(i), &[0]).unwrap();
        assert!((c + 4.0).abs() < 1e-13);
    }

    #[test]
    fn mismatched_interval_rejected() {
        let spec = KernelSpec::unit_weights(2, Interval::unit()).unwrap();
        let b = Basis::legendre(iv(0.0, 2.0));
        assert!(coefficient(&spec, &b, &[0, 0]).is_err());
        assert!(coefficient(&spec, &Basis::legendre(Interval::unit()), &[0]).is_err());
    }
}
