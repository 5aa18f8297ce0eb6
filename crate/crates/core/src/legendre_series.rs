//! Polynomials on `[-1, 1]` stored as Legendre series `Σ c_n P_n(y)`.
//!
//! Nested antiderivatives of Legendre products stay well conditioned in this
//! representation, whereas monomial coefficients of shifted Legendre
//! polynomials blow up combinatorially (≈5e12 already at degree 20).

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct LegendreSeries {
    coeffs: Vec<f64>,
}

impl LegendreSeries {
    pub fn one() -> Self {
        Self { coeffs: vec![1.0] }
    }

    fn zeros(len: usize) -> Self {
        Self {
            coeffs: vec![0.0; len],
        }
    }

    /// `y · f`, via `y P_n = ((n+1) P_{n+1} + n P_{n-1}) / (2n+1)`.
    pub fn mul_y(&self) -> Self {
        let mut out = Self::zeros(self.coeffs.len() + 1);
        for (n, &c) in self.coeffs.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            let nf = n as f64;
            let denom = 2.0 * nf + 1.0;
            out.coeffs[n + 1] += c * (nf + 1.0) / denom;
            if n > 0 {
                out.coeffs[n - 1] += c * nf / denom;
            }
        }
        out
    }

    fn axpby(a: f64, x: &Self, b: f64, y: &Self) -> Self {
        let len = x.coeffs.len().max(y.coeffs.len());
        let mut out = Self::zeros(len);
        for (i, o) in out.coeffs.iter_mut().enumerate() {
            let xi = x.coeffs.get(i).copied().unwrap_or(0.0);
            let yi = y.coeffs.get(i).copied().unwrap_or(0.0);
            *o = a * xi + b * yi;
        }
        out
    }

    /// `((y + 1)/2)^alpha · f`: the monomial weight `u^alpha` in the unit
    /// variable `u = (y + 1)/2`.
    pub fn mul_unit_power(&self, alpha: u32) -> Self {
        let mut g = self.clone();
        for _ in 0..alpha {
            g = Self::axpby(0.5, &g.mul_y(), 0.5, &g);
        }
        g
    }

    /// `[P_0 f, P_1 f, …, P_max f]`, generated by the Bonnet recurrence applied
    /// to whole series.
    pub fn legendre_products(&self, max: usize) -> Vec<Self> {
        let mut out = Vec::with_capacity(max + 1);
        out.push(self.clone());
        if max == 0 {
            return out;
        }
        out.push(self.mul_y());
        for n in 1..max {
            let nf = n as f64;
            let next = Self::axpby(
                (2.0 * nf + 1.0) / (nf + 1.0),
                &out[n].mul_y(),
                -nf / (nf + 1.0),
                &out[n - 1],
            );
            out.push(next);
        }
        out
    }

    /// `∫_{-1}^{y} f`.
    pub fn integrate_from_left(&self) -> Self {
        let mut out = Self::zeros(self.coeffs.len() + 1);
        for (n, &c) in self.coeffs.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            if n == 0 {
                // ∫_{-1}^y P_0 = P_1 + P_0
                out.coeffs[0] += c;
                out.coeffs[1] += c;
            } else {
                let d = c / (2 * n + 1) as f64;
                out.coeffs[n + 1] += d;
                out.coeffs[n - 1] -= d;
            }
        }
        out
    }

    /// `∫_{-1}^{1} f = 2 c_0`.
    pub fn definite_integral(&self) -> f64 {
        2.0 * self.coeffs.first().copied().unwrap_or(0.0)
    }

    pub fn scale(mut self, s: f64) -> Self {
        for c in &mut self.coeffs {
            *c *= s;
        }
        self
    }

    #[cfg(test)]
    pub fn eval(&self, y: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(n, c)| c * crate::basis::legendre_p(n, y))
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::legendre_p;

    #[test]
    fn products_match_pointwise() {
        let f = LegendreSeries::one().mul_y().integrate_from_left();
        let prods = f.legendre_products(9);
        for (j, g) in prods.iter().enumerate() {
            for y in [-0.9, -0.2, 0.0, 0.45, 1.0] {
                let expect = legendre_p(j, y) * f.eval(y);
                assert!((g.eval(y) - expect).abs() < 1e-13, "j={j}, y={y}");
            }
        }
    }

    #[test]
    fn integration_from_left() {
        // ∫_{-1}^{y} y' dy' = (y² − 1)/2
        let f = LegendreSeries::one().mul_y().integrate_from_left();
        for y in [-1.0, -0.3, 0.5, 1.0] {
            assert!((f.eval(y) - (y * y - 1.0) / 2.0).abs() < 1e-15);
        }
    }

    #[test]
    fn unit_power_weight() {
        let f = LegendreSeries::one().mul_unit_power(3);
        for y in [-1.0, 0.2, 1.0] {
            let u: f64 = (y + 1.0) / 2.0;
            assert!((f.eval(y) - u.powi(3)).abs() < 1e-15);
        }
    }
}
