//! Mean-square expansions of iterated Itô and Stratonovich stochastic
//! integrals of multiplicity 1–5, built from multiple Fourier series of the
//! simplex kernel in Legendre or trigonometric bases.
//!
//! The crate is organized bottom-up:
//!
//! * [`basis`]: orthonormal systems on `[t, T]`.
//! * [`coefficients`]: exact Fourier coefficients `C_{j_k…j_1}` and dense tensors,
//!   persisted by [`tensor_io`].
//! * [`gaussians`]: the `ζ_j^{(i)}` inputs, drawn from counter-based streams or
//!   projected from a Brownian path.
//! * [`ito_expansion`], [`strat_expansion`]: the truncated expansions.
//! * [`bridge`]: the Itô ↔ Stratonovich correction terms.
//! * [`error_analysis`]: `I_k`, Parseval residuals and error bounds.
//! * [`mc_oracle`]: fine-grid reference integrals and Monte Carlo error estimates.
//!
//! ```
//! use stochint::prelude::*;
//!
//! let iv = Interval::new(0.0, 1.0)?;
//! let basis = Basis::legendre(iv);
//! let spec = KernelSpec::unit_weights(2, iv)?;
//! let tensor = build_tensor(&spec, &basis, 8)?;
//!
//! let noise = NoiseIndexVector::new(vec![1, 2], 2)?;
//! let trunc = Truncation::new(&tensor, &noise, 8)?;
//! let zeta = draw(42, 2, 8, basis)?;
//! let strat = eval_strat(&trunc, &zeta)?;
//! let ito = eval_ito(&trunc, &zeta)?;
//! assert_eq!(strat, ito); // distinct indices: no correction terms
//!
//! // The mean-square error of this truncation is (T − t)²/(4(2q + 1)).
//! assert!((parseval_residual(&tensor, 8) - 1.0 / 68.0).abs() < 1e-12);
//! # Ok::<(), stochint::Error>(())
//! ```

pub mod basis;
pub mod bridge;
pub mod coefficients;
pub mod error;
pub mod error_analysis;
mod exp_poly;
pub mod gaussians;
pub mod ito_expansion;
mod legendre_series;
pub mod mc_oracle;
pub mod quadrature;
pub mod rng;
pub mod strat_expansion;
pub mod tensor_io;

pub use error::{Error, Result};

pub mod prelude {
    pub use crate::basis::{Basis, BasisKind, Interval};
    pub use crate::bridge::{contraction_check, enumerate_pairings, truncation_gap};
    pub use crate::coefficients::{
        build_tensor, coefficient, CoefficientTensor, KernelSpec, Normalization,
    };
    pub use crate::error::{Error, Result};
    pub use crate::error_analysis::{
        exact_e11, factorial_bound, kernel_norm, parseval_residual, ErrorReport,
    };
    pub use crate::gaussians::{draw, zeta_from_path, GaussianMatrix, NoiseIndexVector};
    pub use crate::ito_expansion::{eval_ito, second_moment_exact, Truncation};
    pub use crate::mc_oracle::{
        measure_ms_error, reference_ito, reference_strat, simulate_path, MeasureSpec, OracleBudget,
        TruncationKind,
    };
    pub use crate::strat_expansion::{eval_strat, validity_conditions};
    pub use crate::tensor_io::{load_tensor, save_tensor};
}

// The guide's code listings run as doctests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/basis.md")]
    mod basis {}
    #[doc = include_str!("../../../book/src/coefficients.md")]
    mod coefficients {}
    #[doc = include_str!("../../../book/src/expansions.md")]
    mod expansions {}
    #[doc = include_str!("../../../book/src/bridge.md")]
    mod bridge {}
    #[doc = include_str!("../../../book/src/errors.md")]
    mod errors {}
    #[doc = include_str!("../../../book/src/oracle.md")]
    mod oracle {}
    #[doc = include_str!("../../../book/src/reproducibility.md")]
    mod reproducibility {}
    #[doc = include_str!("../../../book/src/file-formats.md")]
    mod file_formats {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
