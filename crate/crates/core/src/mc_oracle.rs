//! Brute-force ground truth on fine Brownian grids.
//!
//! Itô references are left-point nested sums. Stratonovich references add the
//! grid versions of the correction integrals from [`crate::bridge`] to the Itô
//! reference rather than using a midpoint rule. Per-path work is independent
//! and reduced pairwise in path order, so results do not depend on the thread
//! count.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::{BasisKind, Interval};
use crate::bridge::{strat_corrections, Level};
use crate::error::{Error, Result};
use crate::gaussians::{NoiseIndexVector, ZetaProjector};
use crate::ito_expansion::{eval_ito, Truncation};
use crate::rng::{substream, Domain};
use crate::strat_expansion::eval_strat;

/// Brownian increments on a uniform grid of `[t, T]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PathGrid {
    interval: Interval,
    n_steps: usize,
    m: usize,
    /// `increments[(i − 1) * n_steps + n] = Δw_n^{(i)}`.
    increments: Vec<f64>,
}

impl PathGrid {
    /// `rows[i − 1]` holds the increments of component `i`.
    pub fn from_increments(interval: Interval, m: usize, rows: Vec<Vec<f64>>) -> Result<Self> {
        if m == 0 || rows.len() != m {
            return Err(Error::DimensionMismatch(format!(
                "{} rows for m = {m}",
                rows.len()
            )));
        }
        let n_steps = rows[0].len();
        if n_steps == 0 || rows.iter().any(|r| r.len() != n_steps) {
            return Err(Error::DimensionMismatch(
                "rows must be non-empty and equally long".into(),
            ));
        }
        Ok(Self {
            interval,
            n_steps,
            m,
            increments: rows.concat(),
        })
    }

    pub fn interval(&self) -> Interval {
        self.interval
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn dt(&self) -> f64 {
        self.interval.delta() / self.n_steps as f64
    }

    /// Increments of component `i ∈ 1..=m`.
    pub fn increments(&self, i: usize) -> &[f64] {
        assert!(
            (1..=self.m).contains(&i),
            "component {i} out of 1..={}",
            self.m
        );
        &self.increments[(i - 1) * self.n_steps..i * self.n_steps]
    }
}

/// Path `path_id` of the ensemble keyed by `seed`: component `i` reads lane
/// `i` of ChaCha stream `path_id`.
pub fn simulate_path(
    seed: u64,
    path_id: u64,
    m: usize,
    interval: Interval,
    n_steps: usize,
) -> Result<PathGrid> {
    if m == 0 {
        return Err(Error::InvalidArgument(
            "need at least one Wiener component (m ≥ 1)".into(),
        ));
    }
    if n_steps == 0 {
        return Err(Error::InvalidArgument(
            "grid needs at least one step".into(),
        ));
    }
    let scale = (interval.delta() / n_steps as f64).sqrt();
    let mut increments = Vec::with_capacity(m * n_steps);
    for i in 1..=m {
        let mut rng = substream(seed, Domain::Path, path_id, i as u64);
        increments.extend((0..n_steps).map(|_| scale * rng.sample::<f64, _>(StandardNormal)));
    }
    Ok(PathGrid {
        interval,
        n_steps,
        m,
        increments,
    })
}

fn check_noise(path: &PathGrid, noise: &NoiseIndexVector) -> Result<()> {
    let needed = noise.indices().iter().copied().max().unwrap_or(0);
    if needed > path.m() {
        return Err(Error::DimensionMismatch(format!(
            "noise index {needed} but the path has {} components",
            path.m()
        )));
    }
    Ok(())
}

/// Left-point nested sum `L_l(n+1) = L_l(n) + L_{l−1}(n) dZ_l(n)`, `L_0 ≡ 1`,
/// over the given differentials (innermost first).
pub fn iterated_sum(path: &PathGrid, levels: &[Level]) -> f64 {
    let k = levels.len();
    let dt = path.dt();
    let rows: Vec<Option<&[f64]>> = levels
        .iter()
        .map(|l| match *l {
            Level::Time => None,
            Level::Noise(i) => Some(path.increments(i)),
        })
        .collect();
    let mut acc = [0.0f64; 6];
    acc[0] = 1.0;
    for n in 0..path.n_steps() {
        // Top level first so every update sees the previous step's values.
        for l in (1..=k).rev() {
            let dz = match rows[l - 1] {
                None => dt,
                Some(r) => r[n],
            };
            acc[l] += acc[l - 1] * dz;
        }
    }
    acc[k]
}

/// Grid Itô reference for `ψ ≡ 1`.
pub fn reference_ito(path: &PathGrid, noise: &NoiseIndexVector) -> Result<f64> {
    check_noise(path, noise)?;
    let levels: Vec<Level> = noise
        .indices()
        .iter()
        .map(|&i| Level::from_index(i))
        .collect();
    Ok(iterated_sum(path, &levels))
}

/// Grid Stratonovich reference: the Itô reference plus every firing
/// correction `2^{−r} J^{s_r…s_1}`.
pub fn reference_strat(path: &PathGrid, noise: &NoiseIndexVector) -> Result<f64> {
    let mut value = reference_ito(path, noise)?;
    for c in strat_corrections(noise)? {
        value += c.weight * iterated_sum(path, &c.levels);
    }
    Ok(value)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TruncationKind {
    Ito,
    Strat,
}

/// A truncation to score, and which convention it approximates.
#[derive(Debug, Clone, Copy)]
pub struct MeasureSpec<'a> {
    pub trunc: Truncation<'a>,
    pub kind: TruncationKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Descriptor {
    pub k: usize,
    pub indices: Vec<usize>,
    pub p: usize,
    pub basis: BasisKind,
    pub kind: TruncationKind,
}

impl Descriptor {
    fn of(spec: &MeasureSpec<'_>) -> Self {
        Self {
            k: spec.trunc.noise.k(),
            indices: spec.trunc.noise.indices().to_vec(),
            p: spec.trunc.p,
            basis: spec.trunc.tensor.basis,
            kind: spec.kind,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MsErrorEstimate {
    pub mean_sq: f64,
    /// Sample standard deviation of the squared errors over `sqrt(M)`.
    pub std_error: f64,
    pub n_paths: usize,
    pub grid_steps: usize,
    pub what: Option<Descriptor>,
}

impl MsErrorEstimate {
    pub fn from_samples(samples: &[f64], grid_steps: usize) -> Self {
        let (mean, std_error) = mean_and_std_error(samples);
        Self {
            mean_sq: mean,
            std_error,
            n_paths: samples.len(),
            grid_steps,
            what: None,
        }
    }
}

/// Sample mean and its standard error; both reductions are pairwise in
/// sample order.
pub fn mean_and_std_error(samples: &[f64]) -> (f64, f64) {
    let n = samples.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = pairwise_sum(samples) / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let dev: Vec<f64> = samples.iter().map(|x| (x - mean) * (x - mean)).collect();
    let var = pairwise_sum(&dev) / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 64 {
        xs.iter().sum()
    } else {
        let (a, b) = xs.split_at(xs.len() / 2);
        pairwise_sum(a) + pairwise_sum(b)
    }
}

/// Limits on ensemble size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleBudget {
    pub min_paths: usize,
    pub max_paths: usize,
    pub max_steps: usize,
    pub max_path_steps: u64,
}

impl Default for OracleBudget {
    fn default() -> Self {
        Self {
            min_paths: 100,
            max_paths: 1_000_000,
            max_steps: 1 << 14,
            max_path_steps: 1 << 32,
        }
    }
}

impl OracleBudget {
    pub fn check(&self, paths: usize, steps: usize) -> Result<()> {
        if paths < self.min_paths {
            return Err(Error::InvalidArgument(format!(
                "{paths} paths requested, minimum {} paths",
                self.min_paths
            )));
        }
        if paths > self.max_paths {
            return Err(Error::Budget {
                what: "paths",
                required: paths as u128,
                limit: self.max_paths as u128,
            });
        }
        if steps == 0 {
            return Err(Error::InvalidArgument(
                "grid needs at least one step".into(),
            ));
        }
        if steps > self.max_steps {
            return Err(Error::Budget {
                what: "grid steps",
                required: steps as u128,
                limit: self.max_steps as u128,
            });
        }
        let total = paths as u128 * steps as u128;
        if total > u128::from(self.max_path_steps) {
            return Err(Error::Budget {
                what: "path-steps",
                required: total,
                limit: u128::from(self.max_path_steps),
            });
        }
        Ok(())
    }
}

/// Evaluates `f` on paths `0..paths` of the ensemble `seed`; the output is in
/// path order whatever the thread count.
pub fn sample_paths<T, F>(
    seed: u64,
    paths: usize,
    steps: usize,
    m: usize,
    interval: Interval,
    f: F,
) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&PathGrid) -> Result<T> + Sync,
{
    (0..paths as u64)
        .into_par_iter()
        .map(|id| f(&simulate_path(seed, id, m, interval, steps)?))
        .collect()
}

/// Squared errors per path (outer index: spec, inner: path) for several
/// truncations scored on one shared ensemble.
pub fn sample_sq_errors(
    seed: u64,
    paths: usize,
    steps: usize,
    specs: &[MeasureSpec<'_>],
    budget: &OracleBudget,
) -> Result<Vec<Vec<f64>>> {
    budget.check(paths, steps)?;
    let first = specs
        .first()
        .ok_or_else(|| Error::InvalidArgument("no truncations to measure".into()))?;
    let interval = first.trunc.tensor.effective_interval();
    if specs
        .iter()
        .any(|s| s.trunc.tensor.effective_interval() != interval)
    {
        return Err(Error::InvalidArgument(
            "all truncations must share one interval".into(),
        ));
    }
    let m = specs.iter().map(|s| s.trunc.noise.m()).max().unwrap_or(1);
    let mut projectors: Vec<(BasisKind, ZetaProjector)> = Vec::new();
    for s in specs {
        let kind = s.trunc.tensor.basis;
        let p = specs
            .iter()
            .filter(|o| o.trunc.tensor.basis == kind)
            .map(|o| o.trunc.p)
            .max()
            .unwrap_or(0);
        if !projectors.iter().any(|(k, _)| *k == kind) {
            projectors.push((kind, ZetaProjector::new(s.trunc.tensor.basis(), p, steps)?));
        }
    }
    let per_path = sample_paths(seed, paths, steps, m, interval, |path| {
        let zetas = projectors
            .iter()
            .map(|(kind, proj)| Ok((*kind, proj.project(path)?)))
            .collect::<Result<Vec<_>>>()?;
        let mut ito_ref = None;
        let mut strat_ref = None;
        specs
            .iter()
            .map(|s| {
                let zeta = &zetas
                    .iter()
                    .find(|(k, _)| *k == s.trunc.tensor.basis)
                    .expect("projector exists")
                    .1;
                let (approx, reference) = match s.kind {
                    TruncationKind::Ito => {
                        let r = match ito_ref {
                            Some((n, v)) if std::ptr::eq(n, s.trunc.noise) => v,
                            _ => reference_ito(path, s.trunc.noise)?,
                        };
                        ito_ref = Some((s.trunc.noise, r));
                        (eval_ito(&s.trunc, zeta)?, r)
                    }
                    TruncationKind::Strat => {
                        let r = match strat_ref {
                            Some((n, v)) if std::ptr::eq(n, s.trunc.noise) => v,
                            _ => reference_strat(path, s.trunc.noise)?,
                        };
                        strat_ref = Some((s.trunc.noise, r));
                        (eval_strat(&s.trunc, zeta)?, r)
                    }
                };
                let d = approx - reference;
                Ok(d * d)
            })
            .collect::<Result<Vec<f64>>>()
    })?;
    let mut out = vec![Vec::with_capacity(paths); specs.len()];
    for row in per_path {
        for (s, v) in row.into_iter().enumerate() {
            out[s].push(v);
        }
    }
    Ok(out)
}

/// Mean-square error of one truncation against the grid reference.
pub fn measure_ms_error(
    seed: u64,
    paths: usize,
    steps: usize,
    spec: MeasureSpec<'_>,
    budget: &OracleBudget,
) -> Result<MsErrorEstimate> {
    Ok(measure_ms_errors(seed, paths, steps, &[spec], budget)?.remove(0))
}

/// As [`measure_ms_error`] for several truncations on one shared ensemble.
pub fn measure_ms_errors(
    seed: u64,
    paths: usize,
    steps: usize,
    specs: &[MeasureSpec<'_>],
    budget: &OracleBudget,
) -> Result<Vec<MsErrorEstimate>> {
    let samples = sample_sq_errors(seed, paths, steps, specs, budget)?;
    Ok(samples
        .iter()
        .zip(specs)
        .map(|(s, spec)| MsErrorEstimate {
            what: Some(Descriptor::of(spec)),
            ..MsErrorEstimate::from_samples(s, steps)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> Interval {
        Interval::unit()
    }

    #[test]
    fn simulate_is_deterministic() {
        let a = simulate_path(5, 17, 2, unit(), 128).unwrap();
        let b = simulate_path(5, 17, 2, unit(), 128).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, simulate_path(5, 18, 2, unit(), 128).unwrap());
        assert_ne!(a.increments(1), a.increments(2));
        assert!(simulate_path(5, 0, 0, unit(), 128).is_err());
    }

    #[test]
    fn paths_share_prefix_across_m() {
        // Component i does not depend on how many components were requested.
        let a = simulate_path(9, 3, 1, unit(), 64).unwrap();
        let b = simulate_path(9, 3, 3, unit(), 64).unwrap();
        assert_eq!(a.increments(1), b.increments(1));
    }

    #[test]
    fn reference_examples() {
        let iv = Interval::new(0.0, 2.0).unwrap();
        let path = simulate_path(1, 0, 2, iv, 1000).unwrap();
        let n1 = NoiseIndexVector::new(vec![1], 2).unwrap();
        let total: f64 = path.increments(1).iter().sum();
        assert!((reference_ito(&path, &n1).unwrap() - total).abs() < 1e-12);

        let zero = PathGrid::from_increments(iv, 1, vec![vec![0.0; 50]]).unwrap();
        for idx in [vec![1, 0, 1], vec![0, 1], vec![1, 1, 1, 1, 1]] {
            let n = NoiseIndexVector::new(idx, 1).unwrap();
            assert_eq!(reference_ito(&zero, &n).unwrap(), 0.0);
        }

        let n3 = NoiseIndexVector::new(vec![0, 0, 0], 1).unwrap();
        let v = reference_ito(&zero, &n3).unwrap();
        // Left-point sum of dt³ over the simplex: Δ³ C(N,3)/N³.
        let nn = 50.0;
        let expect = 8.0 * (nn * (nn - 1.0) * (nn - 2.0) / 6.0) / (nn * nn * nn);
        assert!((v - expect).abs() < 1e-12);
    }

    #[test]
    fn pure_time_converges_first_order() {
        let iv = Interval::new(0.0, 1.5).unwrap();
        for k in 1..=5 {
            let n = NoiseIndexVector::new(vec![0; k], 1).unwrap();
            let exact = 1.5f64.powi(k as i32) / (1..=k).product::<usize>() as f64;
            let mut errs = Vec::new();
            for steps in [256, 1024, 4096] {
                let path = PathGrid::from_increments(iv, 1, vec![vec![0.0; steps]]).unwrap();
                errs.push((reference_ito(&path, &n).unwrap() - exact).abs());
            }
            if k == 1 {
                assert!(errs.iter().all(|&e| e < 1e-12));
                continue;
            }
            // Quadrupling N cuts the error by about four.
            for w in errs.windows(2) {
                let ratio = w[0] / w[1];
                assert!((3.6..4.4).contains(&ratio), "k={k}: {errs:?}");
            }
        }
    }

    #[test]
    fn strat_reference_structure() {
        let iv = unit();
        let path = simulate_path(2, 0, 3, iv, 256).unwrap();
        for idx in [vec![1, 2, 3], vec![0, 1], vec![1, 0, 1]] {
            let n = NoiseIndexVector::new(idx, 3).unwrap();
            assert_eq!(
                reference_strat(&path, &n).unwrap(),
                reference_ito(&path, &n).unwrap()
            );
        }
        let n = NoiseIndexVector::new(vec![2, 2], 3).unwrap();
        let diff = reference_strat(&path, &n).unwrap() - reference_ito(&path, &n).unwrap();
        assert!((diff - 0.5).abs() < 1e-12);
    }

    #[test]
    fn budget_checks() {
        let b = OracleBudget::default();
        assert!(b.check(10, 100).is_err());
        assert!(b.check(100, 100).is_ok());
        assert!(b.check(2_000_000, 10).is_err());
        assert!(b.check(1000, 1 << 15).is_err());
        assert!(b.check(1_000_000, 1 << 14).is_err());
    }

    #[test]
    fn pairwise_sum_matches_naive() {
        let xs: Vec<f64> = (0..1000).map(|i| (i as f64).sin()).collect();
        let naive: f64 = xs.iter().sum();
        assert!((pairwise_sum(&xs) - naive).abs() < 1e-12);
        let (m, se) = mean_and_std_error(&[2.0; 10]);
        assert_eq!((m, se), (2.0, 0.0));
    }
}
