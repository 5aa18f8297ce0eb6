//! The Itô ↔ Stratonovich relation for `k ≤ 5`, `ψ ≡ 1`:
//!
//! ```text
//! J* = J + Σ_{r=1}^{⌊k/2⌋} 2^{−r} Σ_{(s_r,…,s_1) ∈ A_{k,r}} J^{s_r…s_1}
//! A_{k,r} = {(s_r,…,s_1) : s_{q+1} > s_q + 1, s_q ∈ 1..k−1}
//! ```
//!
//! `J^{s_r…s_1}` carries `Π_q 1{i_{s_q} = i_{s_q+1} ≠ 0}` and replaces each
//! adjacent pair of differentials `dw^{(i_s)} dw^{(i_{s+1})}` by a single
//! `dt`. The continuum corrections are realized on a grid by
//! [`crate::mc_oracle`]; at finite `p` the same algebra shows up as the gap
//! between the two truncated expansions ([`truncation_gap`]).

use serde::{Deserialize, Serialize};

use crate::basis::Basis;
use crate::coefficients::{check_multiplicity, KahanSum};
use crate::error::{Error, Result};
use crate::gaussians::{GaussianMatrix, NoiseIndexVector};
use crate::ito_expansion::{active_corrections, pairing_sign, ItoTruncation};
use crate::strat_expansion::StratTruncation;

/// `A_{k,r}` for `r = 1..=⌊k/2⌋`. Tuples are stored as `(s_r, …, s_1)`,
/// 1-based, in lexicographic order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairingSet {
    pub k: usize,
    /// `by_r[r − 1]` is `A_{k,r}`.
    pub by_r: Vec<Vec<Vec<usize>>>,
}

impl PairingSet {
    pub fn get(&self, r: usize) -> &[Vec<usize>] {
        self.by_r
            .get(r.wrapping_sub(1))
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &[usize])> {
        self.by_r
            .iter()
            .enumerate()
            .flat_map(|(r, set)| set.iter().map(move |s| (r + 1, s.as_slice())))
    }
}

pub fn enumerate_pairings(k: usize) -> Result<PairingSet> {
    check_multiplicity(k)?;
    let mut by_r = Vec::new();
    for r in 1..=k / 2 {
        let mut set = Vec::new();
        // Build (s_1, …, s_r) increasing with gaps ≥ 2, then reverse.
        fn rec(
            start: usize,
            max: usize,
            remaining: usize,
            cur: &mut Vec<usize>,
            out: &mut Vec<Vec<usize>>,
        ) {
            if remaining == 0 {
                out.push(cur.iter().rev().copied().collect());
                return;
            }
            for s in start..=max {
                cur.push(s);
                rec(s + 2, max, remaining - 1, cur, out);
                cur.pop();
            }
        }
        rec(1, k - 1, r, &mut Vec::new(), &mut set);
        set.sort();
        by_r.push(set);
    }
    Ok(PairingSet { k, by_r })
}

/// `2^{−r}`.
pub fn correction_weight(r: usize) -> f64 {
    0.5f64.powi(r as i32)
}

/// One differential of an iterated integral, innermost first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Level {
    Time,
    Noise(usize),
}

impl Level {
    pub fn from_index(i: usize) -> Self {
        if i == 0 {
            Level::Time
        } else {
            Level::Noise(i)
        }
    }
}

/// A correction term `2^{−r} J^{s_r…s_1}` whose indicator fires.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Correction {
    /// `(s_r, …, s_1)`, 1-based.
    pub positions: Vec<usize>,
    pub weight: f64,
    /// The differentials of the reduced integral, innermost first.
    pub levels: Vec<Level>,
}

/// The non-vanishing correction terms for `noise`.
pub fn strat_corrections(noise: &NoiseIndexVector) -> Result<Vec<Correction>> {
    let set = enumerate_pairings(noise.k())?;
    let idx = noise.indices();
    let mut out = Vec::new();
    for (r, s) in set.iter() {
        // 1-based s pairs positions s and s+1, i.e. 0-based s−1 and s.
        if !s.iter().all(|&s| noise.paired(s - 1, s)) {
            continue;
        }
        let mut levels = Vec::with_capacity(noise.k() - r);
        let mut pos = 0;
        while pos < idx.len() {
            if s.contains(&(pos + 1)) {
                levels.push(Level::Time);
                pos += 2;
            } else {
                levels.push(Level::from_index(idx[pos]));
                pos += 1;
            }
        }
        out.push(Correction {
            positions: s.to_vec(),
            weight: correction_weight(r),
            levels,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapTerm {
    /// 0-based position pairs of the correction.
    pub pairs: Vec<(usize, usize)>,
    /// Its contribution to `strat − ito`.
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    /// `eval_strat − eval_ito`.
    pub gap: f64,
    pub terms: Vec<GapTerm>,
}

impl GapReport {
    pub fn breakdown_total(&self) -> f64 {
        let mut acc = KahanSum::default();
        for t in &self.terms {
            acc.add(t.value);
        }
        acc.total()
    }
}

/// `eval_strat − eval_ito` on one draw, with the contribution of each
/// indicator term. Equal to the breakdown total up to rounding.
pub fn truncation_gap(
    ito: &ItoTruncation<'_>,
    strat: &StratTruncation<'_>,
    zeta: &GaussianMatrix,
) -> Result<GapReport> {
    if ito.tensor != strat.tensor || ito.noise != strat.noise || ito.p != strat.p {
        return Err(Error::DimensionMismatch(
            "Itô and Stratonovich truncations must share tensor, noise and order".into(),
        ));
    }
    let strat_value = crate::strat_expansion::eval_strat(strat, zeta)?;
    let ito_value = crate::ito_expansion::eval_ito(ito, zeta)?;
    let terms = active_corrections(ito.noise)
        .into_iter()
        .map(|pairing| GapTerm {
            pairs: pairing.to_vec(),
            value: -pairing_sign(pairing) * ito.contract(zeta, pairing),
        })
        .collect();
    Ok(GapReport {
        gap: strat_value - ito_value,
        terms,
    })
}

/// `(s − t) − Σ_{j ≤ p} (∫_t^s φ_j)²`: the Parseval deficit of the indicator
/// `1_{[t,s]}`. Nonnegative and nonincreasing in `p`, tending to zero.
pub fn contraction_check(basis: &Basis, p: usize, s: f64) -> Result<f64> {
    let u = basis.interval.normalize(s)?;
    if u <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "s = {s} must lie in (t, T]"
        )));
    }
    let mut acc = KahanSum::default();
    for j in 0..=p {
        let a = basis.antiderivative(j, s)?;
        acc.add(a * a);
    }
    Ok((s - basis.interval.start()) - acc.total())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{BasisKind, Interval};

    fn brute(k: usize, r: usize) -> Vec<Vec<usize>> {
        // Every r-tuple from 1..k−1, kept when strictly separated.
        let mut out = Vec::new();
        let n = (k - 1).pow(r as u32);
        for code in 0..n {
            let mut s = Vec::with_capacity(r);
            let mut c = code;
            for _ in 0..r {
                s.push(c % (k - 1) + 1);
                c /= k - 1;
            }
            // s is read as (s_r, …, s_1)
            if s.windows(2).all(|w| w[0] > w[1] + 1) {
                out.push(s);
            }
        }
        out.sort();
        out
    }

    #[test]
    fn pairing_examples() {
        assert_eq!(enumerate_pairings(2).unwrap().by_r, vec![vec![vec![1]]]);
        let p4 = enumerate_pairings(4).unwrap();
        assert_eq!(p4.get(1), &[vec![1], vec![2], vec![3]]);
        assert_eq!(p4.get(2), &[vec![3, 1]]);
        let p5 = enumerate_pairings(5).unwrap();
        assert_eq!(p5.get(1), &[vec![1], vec![2], vec![3], vec![4]]);
        assert_eq!(p5.get(2), &[vec![3, 1], vec![4, 1], vec![4, 2]]);
        assert!(enumerate_pairings(1).unwrap().by_r.is_empty());
        assert!(enumerate_pairings(6).is_err());
        assert!(enumerate_pairings(0).is_err());
    }

    #[test]
    fn pairings_match_brute_force() {
        for k in 1..=5 {
            let set = enumerate_pairings(k).unwrap();
            if k >= 2 {
                assert_eq!(set.get(1).len(), k - 1);
            }
            for r in 1..=k / 2 {
                assert_eq!(set.get(r), brute(k, r).as_slice(), "k={k} r={r}");
            }
        }
    }

    #[test]
    fn correction_levels() {
        let noise = NoiseIndexVector::new(vec![1, 1, 2, 2, 0], 2).unwrap();
        let c = strat_corrections(&noise).unwrap();
        let got: Vec<_> = c
            .iter()
            .map(|c| (c.positions.clone(), c.weight, c.levels.clone()))
            .collect();
        use Level::*;
        assert_eq!(
            got,
            vec![
                (vec![1], 0.5, vec![Time, Noise(2), Noise(2), Time]),
                (vec![3], 0.5, vec![Noise(1), Noise(1), Time, Time]),
                (vec![3, 1], 0.25, vec![Time, Time, Time]),
            ]
        );
        let distinct = NoiseIndexVector::new(vec![1, 2, 1], 2).unwrap();
        assert!(strat_corrections(&distinct).unwrap().is_empty());
    }

    #[test]
    fn contraction_examples() {
        let b = Basis::legendre(Interval::unit());
        assert!(contraction_check(&b, 0, 1.0).unwrap().abs() < 1e-15);
        assert!((contraction_check(&b, 0, 0.5).unwrap() - 0.25).abs() < 1e-15);
        let tail = contraction_check(&b, 50, 0.5).unwrap();
        assert!((0.0..=0.01).contains(&tail));
        assert!(contraction_check(&b, 3, 0.0).is_err());
    }

    #[test]
    fn contraction_monotone() {
        for kind in [BasisKind::Legendre, BasisKind::Trigonometric] {
            let b = Basis::new(kind, Interval::new(1.0, 3.0).unwrap());
            for s in [1.3, 2.0, 2.9] {
                let mut last = f64::INFINITY;
                for p in 0..40 {
                    let v = contraction_check(&b, p, s).unwrap();
                    assert!(v >= -1e-14, "{kind} s={s} p={p}: {v}");
                    assert!(v <= last + 1e-14);
                    last = v;
                }
            }
        }
    }
}
