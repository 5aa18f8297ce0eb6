//! Truncated expansions of iterated Itô integrals, `k = 1..=5`.
//!
//! ```text
//! J^p = Σ_{j_1..j_k ≤ p} C_{j_k…j_1} ( Π ζ_{j_l}^{(i_l)}
//!         − Σ_{pairs (a,b)} 1{i_a=i_b≠0} 1{j_a=j_b} Π_{l∉{a,b}} ζ_{j_l}^{(i_l)}
//!         + Σ_{pairs of pairs} … )
//! ```
//!
//! The correction terms are listed per multiplicity in [`corrections`]: one
//! pair for `k = 2`, three for `k = 3`, six pairs and three double pairs for
//! `k = 4`, ten pairs and fifteen double pairs for `k = 5`. A term with `r`
//! pairs enters with sign `(−1)^r`.

use std::collections::BTreeMap;

use crate::coefficients::{for_each_index, CoefficientTensor, KahanSum};
use crate::error::{Error, Result};
use crate::gaussians::{GaussianMatrix, NoiseIndexVector};

/// A set of disjoint position pairs, 0-based, `(a, b)` with `a < b`.
pub type Pairing = &'static [(usize, usize)];

const K2: &[Pairing] = &[&[(0, 1)]];

const K3: &[Pairing] = &[&[(0, 1)], &[(1, 2)], &[(0, 2)]];

const K4: &[Pairing] = &[
    &[(0, 1)],
    &[(0, 2)],
    &[(0, 3)],
    &[(1, 2)],
    &[(1, 3)],
    &[(2, 3)],
    &[(0, 1), (2, 3)],
    &[(0, 2), (1, 3)],
    &[(0, 3), (1, 2)],
];

const K5: &[Pairing] = &[
    &[(0, 1)],
    &[(0, 2)],
    &[(0, 3)],
    &[(0, 4)],
    &[(1, 2)],
    &[(1, 3)],
    &[(1, 4)],
    &[(2, 3)],
    &[(2, 4)],
    &[(3, 4)],
    &[(0, 1), (2, 3)],
    &[(0, 1), (2, 4)],
    &[(0, 1), (3, 4)],
    &[(0, 2), (1, 3)],
    &[(0, 2), (1, 4)],
    &[(0, 2), (3, 4)],
    &[(0, 3), (1, 2)],
    &[(0, 3), (1, 4)],
    &[(0, 3), (2, 4)],
    &[(0, 4), (1, 2)],
    &[(0, 4), (1, 3)],
    &[(0, 4), (2, 3)],
    &[(1, 2), (3, 4)],
    &[(1, 3), (2, 4)],
    &[(1, 4), (2, 3)],
];

/// Every indicator-correction pairing of the multiplicity-`k` expansion.
pub fn corrections(k: usize) -> &'static [Pairing] {
    match k {
        2 => K2,
        3 => K3,
        4 => K4,
        5 => K5,
        _ => &[],
    }
}

/// `(−1)^r` for a pairing with `r` pairs.
pub fn pairing_sign(pairing: &[(usize, usize)]) -> f64 {
    if pairing.len() & 1 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Pairings whose index indicators all fire for `noise`.
pub fn active_corrections(noise: &NoiseIndexVector) -> Vec<Pairing> {
    corrections(noise.k())
        .iter()
        .copied()
        .filter(|pairing| pairing.iter().all(|&(a, b)| noise.paired(a, b)))
        .collect()
}

/// A tensor, a noise selector and an order `p ≤ tensor.p`.
#[derive(Debug, Clone, Copy)]
pub struct Truncation<'a> {
    pub tensor: &'a CoefficientTensor,
    pub noise: &'a NoiseIndexVector,
    pub p: usize,
}

pub type ItoTruncation<'a> = Truncation<'a>;

impl<'a> Truncation<'a> {
    pub fn new(
        tensor: &'a CoefficientTensor,
        noise: &'a NoiseIndexVector,
        p: usize,
    ) -> Result<Self> {
        if tensor.k() != noise.k() {
            return Err(Error::DimensionMismatch(format!(
                "tensor multiplicity {} but {} noise indices",
                tensor.k(),
                noise.k()
            )));
        }
        if p > tensor.p {
            return Err(Error::DimensionMismatch(format!(
                "order {p} exceeds tensor order {}",
                tensor.p
            )));
        }
        Ok(Self { tensor, noise, p })
    }

    pub(crate) fn check_zeta(&self, zeta: &GaussianMatrix) -> Result<()> {
        if zeta.p() < self.p {
            return Err(Error::DimensionMismatch(format!(
                "ζ matrix has order {}, truncation needs {}",
                zeta.p(),
                self.p
            )));
        }
        let needed = self.noise.indices().iter().copied().max().unwrap_or(0);
        if zeta.m() < needed {
            return Err(Error::DimensionMismatch(format!(
                "ζ matrix has {} components, noise index {needed} requested",
                zeta.m()
            )));
        }
        if zeta.basis.kind != self.tensor.basis {
            return Err(Error::DimensionMismatch(format!(
                "ζ built from the {} basis, tensor uses {}",
                zeta.basis.kind, self.tensor.basis
            )));
        }
        Ok(())
    }

    /// `Σ_j C_j Π_{(a,b)∈pairing} 1{j_a=j_b} Π_{l unpaired} ζ_{j_l}^{(i_l)}`,
    /// accumulated in storage order with compensated summation. Index
    /// indicators are not checked here.
    pub fn contract(&self, zeta: &GaussianMatrix, pairing: &[(usize, usize)]) -> f64 {
        let k = self.noise.k();
        let idx = self.noise.indices();
        let mut paired = [false; 5];
        for &(a, b) in pairing {
            paired[a] = true;
            paired[b] = true;
        }
        let mut acc = KahanSum::default();
        for_each_index(k, self.p, |j| {
            if pairing.iter().any(|&(a, b)| j[a] != j[b]) {
                return;
            }
            let mut term = self.tensor.get(j);
            for l in 0..k {
                if !paired[l] {
                    term *= zeta.get(idx[l], j[l]);
                }
            }
            acc.add(term);
        });
        acc.total()
    }
}

/// The truncated Itô expansion.
pub fn eval_ito(trunc: &ItoTruncation<'_>, zeta: &GaussianMatrix) -> Result<f64> {
    trunc.check_zeta(zeta)?;
    let mut acc = KahanSum::default();
    acc.add(trunc.contract(zeta, &[]));
    for pairing in active_corrections(trunc.noise) {
        acc.add(pairing_sign(pairing) * trunc.contract(zeta, pairing));
    }
    Ok(acc.total())
}

/// Refusal threshold for the exact moment computation, in
/// `(multi-index, pairing)` terms.
pub const DEFAULT_MOMENT_BUDGET: usize = 2_000_000;

/// `((component, order), degree)` factors, sorted.
type HermiteKey = Vec<((usize, usize), u32)>;
/// A polynomial in independent standard Gaussians, in the Hermite basis.
type HermitePoly = BTreeMap<HermiteKey, f64>;

/// Exact first and second moments of the truncated Itô expansion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactMoments {
    pub mean: f64,
    pub second_moment: f64,
}

/// `E[J^p]` and `E[(J^p)²]` by expanding the truncation into Hermite
/// polynomials of the underlying Gaussians (Isserlis/Wick pairing).
///
/// Works from the raw monomials and corrections, so it does not rely on the
/// corrections forming a Wick product.
pub fn exact_moments(trunc: &ItoTruncation<'_>, budget: usize) -> Result<ExactMoments> {
    let k = trunc.noise.k();
    let active = active_corrections(trunc.noise);
    let required = (trunc.p as u128 + 1).pow(k as u32) * (active.len() as u128 + 1);
    if required > budget as u128 {
        return Err(Error::Budget {
            what: "Gaussian moment terms",
            required,
            limit: budget as u128,
        });
    }
    let time = trunc.tensor.basis();
    let end = time.interval.end();
    let time_row: Vec<f64> = (0..=trunc.p)
        .map(|j| time.antiderivative(j, end).expect("end point is in range"))
        .collect();
    let idx = trunc.noise.indices();

    let mut poly = HermitePoly::new();
    let mut pairings: Vec<(f64, &[(usize, usize)])> = vec![(1.0, &[])];
    pairings.extend(active.iter().map(|p| (pairing_sign(p), *p)));
    for_each_index(k, trunc.p, |j| {
        let c = trunc.tensor.get(j);
        if c == 0.0 {
            return;
        }
        for &(sign, pairing) in &pairings {
            if pairing.iter().any(|&(a, b)| j[a] != j[b]) {
                continue;
            }
            let mut scalar = sign * c;
            let mut powers: BTreeMap<(usize, usize), u32> = BTreeMap::new();
            for l in 0..k {
                if pairing.iter().any(|&(a, b)| a == l || b == l) {
                    continue;
                }
                if idx[l] == 0 {
                    scalar *= time_row[j[l]];
                } else {
                    *powers.entry((idx[l], j[l])).or_insert(0) += 1;
                }
            }
            add_monomial(&mut poly, scalar, &powers);
        }
    });

    let mut mean = 0.0;
    let mut second = KahanSum::default();
    for (key, c) in &poly {
        if key.is_empty() {
            mean = *c;
        }
        let norm: f64 = key.iter().map(|&(_, d)| factorial(d)).product();
        second.add(c * c * norm);
    }
    Ok(ExactMoments {
        mean,
        second_moment: second.total(),
    })
}

/// `E[(J^p)²]`, see [`exact_moments`].
pub fn second_moment_exact(trunc: &ItoTruncation<'_>) -> Result<f64> {
    exact_moments(trunc, DEFAULT_MOMENT_BUDGET).map(|m| m.second_moment)
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

/// `z^n = Σ_r n! / (2^r r! (n−2r)!) He_{n−2r}(z)`.
fn power_to_hermite(n: u32) -> Vec<(u32, f64)> {
    (0..=n / 2)
        .map(|r| {
            let c = factorial(n) / (2f64.powi(r as i32) * factorial(r) * factorial(n - 2 * r));
            (n - 2 * r, c)
        })
        .collect()
}

fn add_monomial(poly: &mut HermitePoly, scalar: f64, powers: &BTreeMap<(usize, usize), u32>) {
    let mut partial: Vec<(HermiteKey, f64)> = vec![(Vec::new(), scalar)];
    for (&var, &n) in powers {
        let expansion = power_to_hermite(n);
        let mut next = Vec::with_capacity(partial.len() * expansion.len());
        for (key, c) in &partial {
            for &(deg, hc) in &expansion {
                let mut key = key.clone();
                if deg > 0 {
                    key.push((var, deg));
                }
                next.push((key, c * hc));
            }
        }
        partial = next;
    }
    for (key, c) in partial {
        *poly.entry(key).or_insert(0.0) += c;
    }
}
