//! Fixtures shared by the benchmarks.

use randmix::{
    coeffs_target_scheme, empirical_sampler, sample_basis, seeded_rng, target_f1, target_mass, ApproxModel, CenterSampler, Dataset, Domain,
    MixtureModel, QuadratureConfig,
};

/// Target-scheme approximation of the reference target on `[0, 1]`.
pub fn target_approx(n: usize, omega: f64, seed: u64) -> ApproxModel {
    let target = target_f1();
    let unit = Domain::unit(1);
    let c = target_mass(&target, &unit, &QuadratureConfig::default()).unwrap();
    let sampler = CenterSampler::target(target, unit).unwrap();
    let basis = sample_basis(n, 1, omega, &sampler, &mut seeded_rng(seed)).unwrap();
    coeffs_target_scheme(basis, c).unwrap()
}

/// A sample of `size` target draws and a uniform-weight model over `n`
/// bootstrap atoms.
pub fn fit_problem(n: usize, size: usize, omega: f64, seed: u64) -> (MixtureModel, Dataset) {
    let mut rng = seeded_rng(seed);
    let data = Dataset::from_scalars(target_f1().sample(&mut rng, size)).unwrap();
    let basis = sample_basis(n, 1, omega, &empirical_sampler(data.clone()).unwrap(), &mut rng).unwrap();
    (MixtureModel::uniform(basis), data)
}
