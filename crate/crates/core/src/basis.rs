//! Complete orthonormal systems on an interval `[t, T]`.
//!
//! Two families are provided:
//!
//! * **Legendre**: `φ_j(x) = sqrt((2j+1)/Δ) · P_j(2(x − t)/Δ − 1)`.
//! * **Trigonometric**: `φ_0 = 1/sqrt(Δ)`, then for `r ≥ 1`
//!   `φ_{2r−1}(x) = sqrt(2/Δ) sin(2πr(x − t)/Δ)` and
//!   `φ_{2r}(x) = sqrt(2/Δ) cos(2πr(x − t)/Δ)`.
//!
//! Both are evaluated, integrated (`∫_t^s φ_j`) and paired in closed form.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::GaussLegendre;

/// A non-degenerate time interval `[t, T]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    start: f64,
    end: f64,
}

impl Interval {
    pub fn new(start: f64, end: f64) -> Result<Self> {
        if !(start.is_finite() && end.is_finite()) || end <= start {
            return Err(Error::DegenerateInterval { start, end });
        }
        Ok(Self { start, end })
    }

    /// `[0, 1]`.
    pub fn unit() -> Self {
        Self {
            start: 0.0,
            end: 1.0,
        }
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn end(&self) -> f64 {
        self.end
    }

    /// Length `Δ = T − t`.
    pub fn delta(&self) -> f64 {
        self.end - self.start
    }

    /// Maps `x ∈ [t, T]` to `u = (x − t)/Δ ∈ [0, 1]`.
    ///
    /// Points within `1e-12·Δ` outside the interval are clamped onto it.
    pub fn normalize(&self, x: f64) -> Result<f64> {
        let delta = self.delta();
        let slack = 1e-12 * delta;
        if !(x >= self.start - slack && x <= self.end + slack) {
            return Err(Error::OutOfDomain {
                x,
                start: self.start,
                end: self.end,
            });
        }
        Ok(((x - self.start) / delta).clamp(0.0, 1.0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BasisKind {
    Legendre,
    Trigonometric,
}

impl BasisKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            BasisKind::Legendre => "legendre",
            BasisKind::Trigonometric => "trigonometric",
        }
    }
}

impl std::fmt::Display for BasisKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for BasisKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "legendre" => Ok(BasisKind::Legendre),
            "trigonometric" | "trig" => Ok(BasisKind::Trigonometric),
            other => Err(Error::InvalidArgument(format!("unknown basis '{other}'"))),
        }
    }
}

/// Frequency and phase of a trigonometric basis index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum TrigMode {
    Constant,
    Sin(u64),
    Cos(u64),
}

pub(crate) fn trig_mode(j: usize) -> TrigMode {
    if j == 0 {
        TrigMode::Constant
    } else if j % 2 == 1 {
        TrigMode::Sin((j as u64).div_ceil(2))
    } else {
        TrigMode::Cos(j as u64 / 2)
    }
}

/// Standard Legendre polynomial `P_n(x)` by the three-term recurrence.
pub fn legendre_p(n: usize, x: f64) -> f64 {
    match n {
        0 => 1.0,
        1 => x,
        _ => {
            let (mut prev, mut cur) = (1.0, x);
            for k in 1..n {
                let kf = k as f64;
                let next = ((2.0 * kf + 1.0) * x * cur - kf * prev) / (kf + 1.0);
                prev = cur;
                cur = next;
            }
            cur
        }
    }
}

/// An orthonormal system on a fixed interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Basis {
    pub kind: BasisKind,
    pub interval: Interval,
}

impl Basis {
    pub fn new(kind: BasisKind, interval: Interval) -> Self {
        Self { kind, interval }
    }

    pub fn legendre(interval: Interval) -> Self {
        Self::new(BasisKind::Legendre, interval)
    }

    pub fn trigonometric(interval: Interval) -> Self {
        Self::new(BasisKind::Trigonometric, interval)
    }

    /// `φ_j(x)`.
    pub fn eval(&self, j: usize, x: f64) -> Result<f64> {
        let u = self.interval.normalize(x)?;
        Ok(self.eval_unit(j, u) / self.interval.delta().sqrt())
    }

    /// `φ̂_j(u)`: the same system on `[0, 1]`.
    pub(crate) fn eval_unit(&self, j: usize, u: f64) -> f64 {
        match self.kind {
            BasisKind::Legendre => ((2 * j + 1) as f64).sqrt() * legendre_p(j, 2.0 * u - 1.0),
            BasisKind::Trigonometric => match trig_mode(j) {
                TrigMode::Constant => 1.0,
                TrigMode::Sin(r) => 2f64.sqrt() * (2.0 * PI * r as f64 * u).sin(),
                TrigMode::Cos(r) => 2f64.sqrt() * (2.0 * PI * r as f64 * u).cos(),
            },
        }
    }

    /// `∫_t^s φ_j(u) du`, in closed form.
    pub fn antiderivative(&self, j: usize, s: f64) -> Result<f64> {
        let u = self.interval.normalize(s)?;
        Ok(self.antiderivative_unit(j, u) * self.interval.delta().sqrt())
    }

    /// `∫_0^u φ̂_j` on the unit interval.
    pub(crate) fn antiderivative_unit(&self, j: usize, u: f64) -> f64 {
        match self.kind {
            BasisKind::Legendre => {
                // ∫_{-1}^{y} P_j = (P_{j+1}(y) − P_{j−1}(y)) / (2j + 1), and du = dy/2.
                let y = 2.0 * u - 1.0;
                let integral = if j == 0 {
                    y + 1.0
                } else {
                    (legendre_p(j + 1, y) - legendre_p(j - 1, y)) / (2 * j + 1) as f64
                };
                0.5 * ((2 * j + 1) as f64).sqrt() * integral
            }
            BasisKind::Trigonometric => match trig_mode(j) {
                TrigMode::Constant => u,
                TrigMode::Sin(r) => {
                    let w = 2.0 * PI * r as f64;
                    2f64.sqrt() * (1.0 - (w * u).cos()) / w
                }
                TrigMode::Cos(r) => {
                    let w = 2.0 * PI * r as f64;
                    2f64.sqrt() * (w * u).sin() / w
                }
            },
        }
    }

    /// `⟨φ_i, φ_j⟩` over `[t, T]`.
    ///
    /// Legendre pairs use a Gauss rule exact for the product degree; the
    /// trigonometric pairs use the product-to-sum closed forms.
    pub fn inner_product(&self, i: usize, j: usize) -> f64 {
        // Both systems are scale invariant: ⟨φ_i, φ_j⟩ on [t,T] equals the
        // unit-interval value, so compute there.
        match self.kind {
            BasisKind::Legendre => {
                let rule = GaussLegendre::new((i + j) / 2 + 1);
                rule.integrate(0.0, 1.0, |u| self.eval_unit(i, u) * self.eval_unit(j, u))
            }
            BasisKind::Trigonometric => trig_inner_unit(trig_mode(i), trig_mode(j)),
        }
    }
}

/// `∫_0^1 cos(2π a u) du`, written out so that nothing is assumed to vanish.
fn cos_mean(a: i64) -> f64 {
    if a == 0 {
        1.0
    } else {
        let w = 2.0 * PI * a as f64;
        w.sin() / w
    }
}

/// `∫_0^1 sin(2π a u) du`.
fn sin_mean(a: i64) -> f64 {
    if a == 0 {
        0.0
    } else {
        let w = 2.0 * PI * a as f64;
        (1.0 - w.cos()) / w
    }
}

fn trig_inner_unit(a: TrigMode, b: TrigMode) -> f64 {
    use TrigMode::*;
    let s2 = 2f64.sqrt();
    match (a, b) {
        (Constant, Constant) => 1.0,
        (Constant, Sin(r)) | (Sin(r), Constant) => s2 * sin_mean(r as i64),
        (Constant, Cos(r)) | (Cos(r), Constant) => s2 * cos_mean(r as i64),
        (Sin(r), Sin(q)) => {
            let (r, q) = (r as i64, q as i64);
            cos_mean(r - q) - cos_mean(r + q)
        }
        (Cos(r), Cos(q)) => {
            let (r, q) = (r as i64, q as i64);
            cos_mean(r - q) + cos_mean(r + q)
        }
        (Sin(r), Cos(q)) | (Cos(q), Sin(r)) => {
            let (r, q) = (r as i64, q as i64);
            sin_mean(r + q) + sin_mean(r - q)
        }
    }
}
