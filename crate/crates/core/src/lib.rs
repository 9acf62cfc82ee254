//! Randomized mixture-model approximation and estimation of densities.
//!
//! A [`RandomBasis`] holds `n` Gaussian product atoms with scales drawn
//! uniformly from `(0, ω]` and centers drawn by a [`CenterScheme`]. On top of
//! a basis, [`ApproxModel`] fixes coefficients from a known target density,
//! and [`MixtureModel`] carries simplex weights fitted to data by EM
//! ([`fit_em`]). [`metrics`] measures KL and squared L2 discrepancies by
//! adaptive quadrature, and [`experiments`] runs replicated studies over
//! parameter grids.
//!
//! ```
//! use randmix::{fit_em, sample_basis, seeded_rng, target_f1, CenterSampler, Dataset, Domain, FitConfig, MixtureModel};
//!
//! let mut rng = seeded_rng(1);
//! let data = Dataset::from_scalars(target_f1().sample(&mut rng, 500)).unwrap();
//! let sampler = CenterSampler::uniform(Domain::unit(1));
//! let basis = sample_basis(50, 1, 100.0, &sampler, &mut rng).unwrap();
//! let report = fit_em(&MixtureModel::uniform(basis), &data, &FitConfig::default()).unwrap();
//! assert!((report.alpha.iter().sum::<f64>() - 1.0).abs() < 1e-9);
//! ```

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod approx;
pub mod basis;
pub mod dataset;
pub mod error;
pub mod estimation;
pub mod experiments;
pub mod kernels;
pub mod metrics;
pub mod quadrature;
pub mod rng;

pub use approx::{coeffs_target_scheme, coeffs_uniform_scheme, target_mass, ApproxModel};
pub use basis::{empirical_sampler, sample_basis, BasisAtom, CenterSampler, CenterScheme, Domain, RandomBasis};
pub use dataset::Dataset;
pub use error::{Error, Result};
pub use estimation::{fit_em, minorizer_q, FitConfig, FitReport, Init, MixtureModel};
pub use kernels::{target_f1, Kernel1D, NormalMixture};
pub use metrics::{kl_divergence, kl_l2_bound_check, l2_distance_sq, BoundCheck};
pub use quadrature::{adaptive_simpson, Quadrature, QuadratureConfig};
pub use rng::{replicate_rng, seeded_rng, StreamRng};
