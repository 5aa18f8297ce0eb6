//! The random inputs `ζ_j^{(i)} = ∫_t^T φ_j(s) dw_s^{(i)}` of every expansion.
//!
//! Row `i = 0` is the time component `w^{(0)}_s = s`, so `ζ_j^{(0)} = ∫_t^T φ_j`
//! is deterministic. Rows `1..=m` are independent standard Gaussians, either
//! drawn directly ([`draw`]) or projected from a simulated path
//! ([`zeta_from_path`]).

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::basis::Basis;
use crate::coefficients::check_multiplicity;
use crate::error::{Error, Result};
use crate::mc_oracle::PathGrid;
use crate::rng::{substream, Domain};

/// Component selectors `(i_1, …, i_k)`; `0` is the time component.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct NoiseIndexVector {
    indices: Vec<usize>,
    m: usize,
}

impl NoiseIndexVector {
    pub fn new(indices: Vec<usize>, m: usize) -> Result<Self> {
        check_multiplicity(indices.len())?;
        if m == 0 {
            return Err(Error::InvalidArgument(
                "need at least one Wiener component (m ≥ 1)".into(),
            ));
        }
        if let Some(&index) = indices.iter().find(|&&i| i > m) {
            return Err(Error::NoiseIndexOutOfRange { index, m });
        }
        Ok(Self { indices, m })
    }

    /// Uses `m = max(indices)` (at least one).
    pub fn from_indices(indices: Vec<usize>) -> Result<Self> {
        let m = indices.iter().copied().max().unwrap_or(0).max(1);
        Self::new(indices, m)
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn k(&self) -> usize {
        self.indices.len()
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn all_distinct_nonzero(&self) -> bool {
        let nz: Vec<_> = self.indices.iter().filter(|&&i| i != 0).collect();
        if nz.len() != self.indices.len() {
            return false;
        }
        let mut sorted = nz.clone();
        sorted.sort();
        sorted.dedup();
        sorted.len() == nz.len()
    }

    /// `1{i_a = i_b ≠ 0}` for 0-based positions.
    pub fn paired(&self, a: usize, b: usize) -> bool {
        self.indices[a] != 0 && self.indices[a] == self.indices[b]
    }
}

/// `ζ_j^{(i)}` for `i = 0..=m`, `j = 0..=p`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianMatrix {
    m: usize,
    p: usize,
    values: Vec<f64>,
    pub seed: Option<u64>,
    pub basis: Basis,
}

impl GaussianMatrix {
    /// All stochastic rows zero; row 0 filled from the basis.
    pub fn zeros(m: usize, p: usize, basis: Basis) -> Self {
        let mut out = Self {
            m,
            p,
            values: vec![0.0; (m + 1) * (p + 1)],
            seed: None,
            basis,
        };
        out.fill_time_row();
        out
    }

    /// Builds a matrix from explicit stochastic rows (`rows[i-1]` is row `i`).
    pub fn from_rows(basis: Basis, p: usize, rows: &[Vec<f64>]) -> Result<Self> {
        let mut out = Self::zeros(rows.len(), p, basis);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != p + 1 {
                return Err(Error::DimensionMismatch(format!(
                    "row {} has {} entries, expected {}",
                    r + 1,
                    row.len(),
                    p + 1
                )));
            }
            out.values[(r + 1) * (p + 1)..(r + 2) * (p + 1)].copy_from_slice(row);
        }
        Ok(out)
    }

    fn fill_time_row(&mut self) {
        let end = self.basis.interval.end();
        for j in 0..=self.p {
            self.values[j] = self
                .basis
                .antiderivative(j, end)
                .expect("end point is in range");
        }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn p(&self) -> usize {
        self.p
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * (self.p + 1) + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        assert!(i >= 1, "row 0 is deterministic");
        self.values[i * (self.p + 1) + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * (self.p + 1)..(i + 1) * (self.p + 1)]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        assert!(i >= 1, "row 0 is deterministic");
        &mut self.values[i * (self.p + 1)..(i + 1) * (self.p + 1)]
    }
}

/// Draws rows `1..=m` from independent counter-based substreams (one lane per
/// component, orders `j` in sequence) and fills row 0 from the basis.
pub fn draw(seed: u64, m: usize, p: usize, basis: Basis) -> Result<GaussianMatrix> {
    draw_for_stream(seed, 0, m, p, basis)
}

/// As [`draw`], on ChaCha stream `stream`; distinct streams are independent.
pub fn draw_for_stream(
    seed: u64,
    stream: u64,
    m: usize,
    p: usize,
    basis: Basis,
) -> Result<GaussianMatrix> {
    if m == 0 {
        return Err(Error::InvalidArgument(
            "need at least one Wiener component (m ≥ 1)".into(),
        ));
    }
    let mut out = GaussianMatrix::zeros(m, p, basis);
    out.seed = Some(seed);
    for i in 1..=m {
        let mut rng = substream(seed, Domain::Zeta, stream, i as u64);
        for v in out.row_mut(i) {
            *v = rng.sample(StandardNormal);
        }
    }
    Ok(out)
}

/// Left-endpoint projections `Σ_n φ_j(τ_n) Δw_n^{(i)}` of a path onto the
/// basis; row 0 from the exact antiderivative.
pub fn zeta_from_path(path: &PathGrid, basis: Basis, p: usize) -> Result<GaussianMatrix> {
    ZetaProjector::new(basis, p, path.n_steps())?.project(path)
}

/// Caches `φ_j(τ_n)` for repeated projections on the same grid.
#[derive(Debug, Clone)]
pub struct ZetaProjector {
    basis: Basis,
    p: usize,
    n_steps: usize,
    /// `table[j * n_steps + n] = φ_j(τ_n)`.
    table: Vec<f64>,
}

impl ZetaProjector {
    pub fn new(basis: Basis, p: usize, n_steps: usize) -> Result<Self> {
        if n_steps == 0 {
            return Err(Error::InvalidArgument(
                "grid needs at least one step".into(),
            ));
        }
        let iv = basis.interval;
        let h = iv.delta() / n_steps as f64;
        let mut table = Vec::with_capacity((p + 1) * n_steps);
        for j in 0..=p {
            for n in 0..n_steps {
                table.push(basis.eval(j, iv.start() + n as f64 * h)?);
            }
        }
        Ok(Self {
            basis,
            p,
            n_steps,
            table,
        })
    }

    pub fn project(&self, path: &PathGrid) -> Result<GaussianMatrix> {
        if path.n_steps() != self.n_steps || path.interval() != self.basis.interval {
            return Err(Error::DimensionMismatch(format!(
                "path grid ({} steps on {:?}) does not match projector ({} steps on {:?})",
                path.n_steps(),
                path.interval(),
                self.n_steps,
                self.basis.interval
            )));
        }
        let mut out = GaussianMatrix::zeros(path.m(), self.p, self.basis);
        for i in 1..=path.m() {
            let dw = path.increments(i);
            for (j, v) in out.row_mut(i).iter_mut().enumerate() {
                let phi = &self.table[j * self.n_steps..(j + 1) * self.n_steps];
                *v = phi.iter().zip(dw).map(|(a, b)| a * b).sum();
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{BasisKind, Interval};
    use crate::mc_oracle::simulate_path;

    #[test]
    fn noise_vector_validation() {
        assert!(NoiseIndexVector::new(vec![1, 3], 2).is_err());
        assert!(NoiseIndexVector::new(vec![], 2).is_err());
        assert!(NoiseIndexVector::new(vec![1; 6], 2).is_err());
        assert!(NoiseIndexVector::new(vec![0, 0], 0).is_err());
        let n = NoiseIndexVector::new(vec![0, 1, 1], 2).unwrap();
        assert!(!n.paired(0, 1));
        assert!(n.paired(1, 2));
        assert!(!n.all_distinct_nonzero());
        assert!(NoiseIndexVector::from_indices(vec![3, 1, 2])
            .unwrap()
            .all_distinct_nonzero());
    }

    #[test]
    fn draw_is_deterministic() {
        let b = Basis::legendre(Interval::unit());
        let a = draw(7, 3, 5, b).unwrap();
        let c = draw(7, 3, 5, b).unwrap();
        assert_eq!(a, c);
        assert_ne!(a.row(1), draw(8, 3, 5, b).unwrap().row(1));
        assert_ne!(a.row(1), a.row(2));
    }

    #[test]
    fn time_row() {
        let b = Basis::legendre(Interval::new(0.0, 4.0).unwrap());
        let z = draw(1, 1, 4, b).unwrap();
        assert!((z.get(0, 0) - 2.0).abs() < 1e-15);
        for j in 1..=4 {
            assert!(z.get(0, j).abs() < 1e-14);
        }
        let t = Basis::trigonometric(Interval::new(0.0, 4.0).unwrap());
        let z = draw(1, 1, 6, t).unwrap();
        assert!((z.get(0, 0) - 2.0).abs() < 1e-15);
        for j in 1..=6 {
            assert!(z.get(0, j).abs() < 1e-14);
        }
    }

    #[test]
    fn projection_zero_path() {
        let iv = Interval::unit();
        let path = PathGrid::from_increments(iv, 1, vec![vec![0.0; 16]]).unwrap();
        let z = zeta_from_path(&path, Basis::legendre(iv), 3).unwrap();
        assert!(z.row(1).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn projection_single_step() {
        let iv = Interval::new(0.0, 2.0).unwrap();
        let path = PathGrid::from_increments(iv, 1, vec![vec![0.7]]).unwrap();
        let z = zeta_from_path(&path, Basis::legendre(iv), 0).unwrap();
        assert_eq!(z.get(1, 0), 0.7 / 2f64.sqrt());
    }

    #[test]
    fn projection_constant_mode_is_total_increment() {
        let iv = Interval::new(0.0, 1.5).unwrap();
        let path = simulate_path(3, 0, 2, iv, 512).unwrap();
        let z = zeta_from_path(&path, Basis::legendre(iv), 2).unwrap();
        for i in 1..=2 {
            let total: f64 = path.increments(i).iter().sum();
            assert!((z.get(i, 0) - total / 1.5f64.sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn projection_and_draw_share_time_row() {
        let iv = Interval::new(0.0, 3.0).unwrap();
        for kind in [BasisKind::Legendre, BasisKind::Trigonometric] {
            let b = Basis::new(kind, iv);
            let path = simulate_path(3, 4, 1, iv, 64).unwrap();
            let a = zeta_from_path(&path, b, 5).unwrap();
            let d = draw(3, 1, 5, b).unwrap();
            assert_eq!(a.row(0), d.row(0));
        }
    }

    #[test]
    fn mismatched_grid() {
        let iv = Interval::unit();
        let path = simulate_path(3, 0, 1, iv, 64).unwrap();
        let proj = ZetaProjector::new(Basis::legendre(iv), 2, 32).unwrap();
        assert!(proj.project(&path).is_err());
        let other = Basis::legendre(Interval::new(0.0, 2.0).unwrap());
        assert!(zeta_from_path(&path, other, 2).is_err());
    }
}
