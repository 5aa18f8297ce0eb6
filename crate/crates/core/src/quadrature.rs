//! Gauss–Legendre rules on `[-1, 1]` and a nested simplex integrator.
//!
//! The nested integrator is deliberately independent of the exact coefficient
//! paths in [`crate::coefficients`]; tests use it as a cross-check.

use crate::basis::legendre_p;

/// An `n`-point Gauss–Legendre rule on `[-1, 1]`, exact for polynomials of
/// degree `2n - 1`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "a quadrature rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            // Tricomi's initial guess, refined by Newton on P_n.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                let step = p / d;
                x -= step;
                if step.abs() < 1e-16 {
                    break;
                }
            }
            let (_, dp) = legendre_with_derivative(n, x);
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    /// Integrates `f` over `[a, b]`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(mid + half * x);
        }
        acc * half
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let p = legendre_p(n, x);
    let q = legendre_p(n - 1, x);
    (p, n as f64 * (x * p - q) / (x * x - 1.0))
}

/// Integrates `∫_a^b f_k(x_k) ∫_a^{x_k} f_{k-1}(x_{k-1}) … ∫_a^{x_2} f_1(x_1) dx_1 … dx_k`
/// by applying `rule` recursively at every level. `factors[0]` is the
/// innermost integrand.
pub fn nested_simplex<F: Fn(f64) -> f64>(
    rule: &GaussLegendre,
    a: f64,
    b: f64,
    factors: &[F],
) -> f64 {
    fn inner<F: Fn(f64) -> f64>(rule: &GaussLegendre, a: f64, upper: f64, factors: &[F]) -> f64 {
        match factors.split_last() {
            None => 1.0,
            Some((outer, rest)) => rule.integrate(a, upper, |x| outer(x) * inner(rule, a, x, rest)),
        }
    }
    inner(rule, a, b, factors)
}
