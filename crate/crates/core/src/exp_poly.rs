//! Exponential polynomials `Σ c · u^a · e^{2πi n u}` on `[0, 1]`.
//!
//! The trigonometric basis, monomial weights and their nested
//! antiderivatives all stay inside this class, which gives closed-form
//! Fourier coefficients for the trigonometric system at any multiplicity.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;

use crate::basis::{trig_mode, TrigMode};

/// Keyed by `(frequency n, power a)`.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct ExpPoly {
    terms: BTreeMap<(i64, u32), Complex64>,
}

impl ExpPoly {
    pub fn one() -> Self {
        let mut terms = BTreeMap::new();
        terms.insert((0, 0), Complex64::new(1.0, 0.0));
        Self { terms }
    }

    /// `φ̂_j(u)` of the unit-interval trigonometric system.
    pub fn trig_basis(j: usize) -> Self {
        let s2 = std::f64::consts::SQRT_2;
        let mut terms = BTreeMap::new();
        match trig_mode(j) {
            TrigMode::Constant => {
                terms.insert((0, 0), Complex64::new(1.0, 0.0));
            }
            TrigMode::Sin(r) => {
                // sin x = (e^{ix} − e^{−ix}) / 2i
                let r = r as i64;
                terms.insert((r, 0), Complex64::new(0.0, -s2 / 2.0));
                terms.insert((-r, 0), Complex64::new(0.0, s2 / 2.0));
            }
            TrigMode::Cos(r) => {
                let r = r as i64;
                terms.insert((r, 0), Complex64::new(s2 / 2.0, 0.0));
                terms.insert((-r, 0), Complex64::new(s2 / 2.0, 0.0));
            }
        }
        Self { terms }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut terms = BTreeMap::new();
        for (&(n1, a1), &c1) in &self.terms {
            for (&(n2, a2), &c2) in &other.terms {
                *terms
                    .entry((n1 + n2, a1 + a2))
                    .or_insert(Complex64::new(0.0, 0.0)) += c1 * c2;
            }
        }
        Self { terms }
    }

    pub fn mul_power(&self, alpha: u32) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .map(|(&(n, a), &c)| ((n, a + alpha), c))
                .collect(),
        }
    }

    /// `∫_0^u f`.
    pub fn integrate_from_zero(&self) -> Self {
        let mut terms: BTreeMap<(i64, u32), Complex64> = BTreeMap::new();
        let mut add = |key: (i64, u32), c: Complex64| {
            *terms.entry(key).or_insert(Complex64::new(0.0, 0.0)) += c;
        };
        for (&(n, a), &c) in &self.terms {
            if n == 0 {
                add((0, a + 1), c / f64::from(a + 1));
                continue;
            }
            // ∫_0^u v^a e^{zv} dv
            //   = e^{zu} Σ_{m=0}^{a} (−1)^m a!/(a−m)! u^{a−m} / z^{m+1} − (−1)^a a! / z^{a+1}
            let z = Complex64::new(0.0, 2.0 * PI * n as f64);
            let mut falling = 1.0; // a!/(a−m)!
            let mut zpow = z; // z^{m+1}
            for m in 0..=a {
                let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                add((n, a - m), c * (sign * falling) / zpow);
                if m < a {
                    falling *= f64::from(a - m);
                    zpow *= z;
                }
            }
            // After the loop `falling` = a! and `zpow` = z^{a+1}.
            let sign = if a % 2 == 0 { 1.0 } else { -1.0 };
            add((0, 0), -c * (sign * falling) / zpow);
        }
        Self { terms }
    }

    /// `f(1)`; every exponential equals one there.
    pub fn value_at_one(&self) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for c in self.terms.values() {
            acc += c;
        }
        acc
    }

    #[cfg(test)]
    pub fn eval(&self, u: f64) -> Complex64 {
        self.terms
            .iter()
            .map(|(&(n, a), &c)| {
                c * u.powi(a as i32) * Complex64::from_polar(1.0, 2.0 * PI * n as f64 * u)
            })
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{Basis, Interval};
    use crate::quadrature::GaussLegendre;

    #[test]
    fn basis_matches_real_evaluation() {
        let b = Basis::trigonometric(Interval::unit());
        for j in 0..9 {
            let e = ExpPoly::trig_basis(j);
            for u in [0.0, 0.13, 0.5, 0.91] {
                let v = e.eval(u);
                assert!((v.re - b.eval_unit(j, u)).abs() < 1e-14);
                assert!(v.im.abs() < 1e-14);
            }
        }
    }

    #[test]
    fn antiderivative_matches_quadrature() {
        let rule = GaussLegendre::new(40);
        let f = ExpPoly::trig_basis(3)
            .mul_power(2)
            .mul(&ExpPoly::trig_basis(4));
        let g = f.integrate_from_zero();
        for u in [0.2, 0.7, 1.0] {
            let q = rule.integrate(0.0, u, |v| f.eval(v).re);
            assert!((g.eval(u).re - q).abs() < 1e-14, "u={u}");
        }
    }
}
