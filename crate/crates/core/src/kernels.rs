//! Hump-shaped marginal kernels and the normal-mixture target densities used
//! throughout the crate.
//!
//! Everything is evaluated in the log domain. Scales of a few hundred push
//! kernel exponents to around -2e4, far below what `f64` can hold as a
//! linear value, so linear densities are only ever produced as `exp` of a
//! log density.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `0.5 * ln(2π)`
pub const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

/// Symmetric unimodal marginal kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kernel1D {
    #[default]
    Gaussian,
}

impl Kernel1D {
    #[inline]
    pub fn log_pdf(self, x: f64) -> f64 {
        match self {
            Kernel1D::Gaussian => -HALF_LN_2PI - 0.5 * x * x,
        }
    }

    /// Log of the normalizing constant, i.e. `log_pdf(x) = log_norm() + log_shape(x)`.
    #[inline]
    pub(crate) fn log_norm(self) -> f64 {
        match self {
            Kernel1D::Gaussian => -HALF_LN_2PI,
        }
    }

    /// Unnormalized log density as a function of the standardized argument.
    #[inline]
    pub(crate) fn log_shape(self, z: f64) -> f64 {
        match self {
            Kernel1D::Gaussian => -0.5 * z * z,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Kernel1D::Gaussian => "gaussian",
        }
    }
}

impl std::str::FromStr for Kernel1D {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(Kernel1D::Gaussian),
            other => Err(Error::invalid(format!("unknown kernel '{other}'"))),
        }
    }
}

/// Standard normal log density. Rejects non-finite input.
pub fn std_normal_log_pdf(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::invalid(format!("non-finite abscissa {x}")));
    }
    Ok(Kernel1D::Gaussian.log_pdf(x))
}

/// Log of a product kernel `Π_j w_j k(w_j (x_j - y_j))`, without argument checks.
#[inline]
pub fn product_log_density(kernel: Kernel1D, w: &[f64], y: &[f64], x: &[f64]) -> f64 {
    w.iter()
        .zip(y)
        .zip(x)
        .map(|((&w, &y), &x)| w.ln() + kernel.log_pdf(w * (x - y)))
        .sum()
}

/// `ln Σ exp(v_i)`, stable for very negative inputs. Returns `-inf` for an
/// empty slice or one holding only `-inf`.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    if max == f64::INFINITY {
        return max;
    }
    let sum: f64 = values.iter().map(|&v| (v - max).exp()).sum();
    max + sum.ln()
}

/// Streaming log-sum-exp.
#[derive(Debug, Clone, Copy)]
pub struct LogSumExp {
    max: f64,
    sum: f64,
}

impl Default for LogSumExp {
    fn default() -> Self {
        Self::new()
    }
}

impl LogSumExp {
    pub fn new() -> Self {
        Self {
            max: f64::NEG_INFINITY,
            sum: 0.0,
        }
    }

    #[inline]
    pub fn push(&mut self, v: f64) {
        if v == f64::NEG_INFINITY {
            return;
        }
        if v > self.max {
            self.sum = self.sum * (self.max - v).exp() + 1.0;
            self.max = v;
        } else {
            self.sum += (v - self.max).exp();
        }
    }

    pub fn value(&self) -> f64 {
        if self.max == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            self.max + self.sum.ln()
        }
    }
}

/// Finite mixture of univariate normals.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalMixture {
    weights: Vec<f64>,
    means: Vec<f64>,
    sds: Vec<f64>,
    // ln(weight / sd); -inf for zero weights
    log_scale: Vec<f64>,
}

impl NormalMixture {
    pub fn new(weights: Vec<f64>, means: Vec<f64>, sds: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::invalid("mixture needs at least one component"));
        }
        if means.len() != weights.len() || sds.len() != weights.len() {
            return Err(Error::DimensionMismatch {
                expected: weights.len(),
                found: if means.len() != weights.len() { means.len() } else { sds.len() },
            });
        }
        if let Some(&w) = weights.iter().find(|w| !(**w >= 0.0) || !w.is_finite()) {
            return Err(Error::invalid(format!("mixture weight {w} is not a nonnegative number")));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::NotOnSimplex {
                sum,
                min: weights.iter().copied().fold(f64::INFINITY, f64::min),
            });
        }
        if let Some((index, &value)) = sds.iter().enumerate().find(|(_, s)| !(**s > 0.0) || !s.is_finite()) {
            return Err(Error::NonPositiveScale { index, value });
        }
        if let Some(&m) = means.iter().find(|m| !m.is_finite()) {
            return Err(Error::invalid(format!("mixture mean {m} is not finite")));
        }
        let log_scale = weights.iter().zip(&sds).map(|(w, s)| (w / s).ln()).collect();
        Ok(Self {
            weights,
            means,
            sds,
            log_scale,
        })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn sds(&self) -> &[f64] {
        &self.sds
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Log density at a finite `x`.
    pub fn log_density(&self, x: f64) -> f64 {
        let mut acc = LogSumExp::new();
        for ((&ls, &m), &s) in self.log_scale.iter().zip(&self.means).zip(&self.sds) {
            acc.push(ls + Kernel1D::Gaussian.log_pdf((x - m) / s));
        }
        acc.value()
    }

    pub fn density(&self, x: f64) -> f64 {
        self.log_density(x).exp()
    }

    /// Mixture mean `Σ w_i μ_i`.
    pub fn mean(&self) -> f64 {
        self.weights.iter().zip(&self.means).map(|(w, m)| w * m).sum()
    }

    /// Draw `count` values: pick a component by weight, then draw from it.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, count: usize) -> Vec<f64> {
        if count == 0 {
            return Vec::new();
        }
        let picker = self.component_picker();
        (0..count).map(|_| self.sample_with(&picker, rng)).collect()
    }

    pub(crate) fn component_picker(&self) -> WeightedIndex<f64> {
        WeightedIndex::new(&self.weights).expect("weights validated at construction")
    }

    #[inline]
    pub(crate) fn sample_with<R: Rng + ?Sized>(&self, picker: &WeightedIndex<f64>, rng: &mut R) -> f64 {
        let i = picker.sample(rng);
        let z: f64 = rng.sample(StandardNormal);
        self.means[i] + self.sds[i] * z
    }
}

/// The three-component normal mixture used as the target in every simulation.
///
/// Each component is normalized by its standard deviation, so the result is a
/// density on ℝ. Essentially all of its mass lies inside `[0, 1]`.
pub fn target_f1() -> NormalMixture {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    NormalMixture::new(
        vec![0.2, 0.5, 0.3],
        vec![4.0 / 10.0, 40.0 / 80.0, 20.0 / 80.0],
        vec![s / 10.0, s / 80.0, s / 80.0],
    )
    .expect("constant target is valid")
}

#[cfg(test)]
#[allow(clippy::approx_constant)] // f1(0.4) is 2/sqrt(pi) to 8 digits
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn phi(x: f64) -> f64 {
        (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
    }

    // linear-domain reference for f1
    fn f1_direct(x: f64) -> f64 {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let c = [(0.2, 0.4, s / 10.0), (0.5, 0.5, s / 80.0), (0.3, 0.25, s / 80.0)];
        c.iter().map(|&(w, m, sd)| w * phi((x - m) / sd) / sd).sum()
    }

    #[test]
    fn std_normal_values() {
        assert!((std_normal_log_pdf(0.0).unwrap() - -0.918_938_53).abs() < 1e-8);
        assert!((std_normal_log_pdf(1.0).unwrap() - -1.418_938_53).abs() < 1e-8);
        assert_eq!(std_normal_log_pdf(-1.0).unwrap(), std_normal_log_pdf(1.0).unwrap());
        assert!(std_normal_log_pdf(f64::NAN).is_err());
        assert!(std_normal_log_pdf(f64::INFINITY).is_err());
        assert_eq!(std_normal_log_pdf(1e200).unwrap(), f64::NEG_INFINITY);
    }

    #[test]
    fn kernel_is_hump_shaped() {
        let k = Kernel1D::Gaussian;
        let mut prev = k.log_pdf(0.0);
        for i in 1..200 {
            let x = i as f64 * 0.05;
            assert_eq!(k.log_pdf(x), k.log_pdf(-x));
            assert!(k.log_pdf(x) <= prev);
            prev = k.log_pdf(x);
        }
    }

    #[test]
    fn product_kernel_values() {
        let k = Kernel1D::Gaussian;
        assert!((product_log_density(k, &[1.0], &[0.0], &[0.0]) - -0.918_938_53).abs() < 1e-8);
        assert!((product_log_density(k, &[2.0], &[0.5], &[0.5]) - -0.225_791_35).abs() < 1e-8);
        assert!((product_log_density(k, &[1.0, 1.0], &[0.0, 0.0], &[0.0, 0.0]) - -1.837_877_07).abs() < 1e-8);
    }

    #[test]
    fn f1_parameters_and_values() {
        let f1 = target_f1();
        assert_eq!(f1.weights(), &[0.2, 0.5, 0.3]);
        assert_eq!(f1.means(), &[0.4, 0.5, 0.25]);
        let s = 2f64.powf(-0.5);
        assert_eq!(f1.sds(), &[s / 10.0, s / 80.0, s / 80.0]);
        assert!((f1.density(0.4) - 1.128_379_2).abs() < 1e-7);
        assert!((f1.log_density(0.4) - 0.120_78).abs() < 1e-5);
        assert!((f1.density(0.4) - f1_direct(0.4)).abs() < 1e-14);
    }

    #[test]
    fn log_density_matches_linear_sum() {
        let f1 = target_f1();
        for i in 0..=1000 {
            let x = i as f64 / 1000.0;
            let direct = f1_direct(x);
            if direct > 1e-280 {
                let rel = (f1.density(x) - direct).abs() / direct;
                assert!(rel <= 1e-12, "x={x} rel={rel}");
            }
            assert!(f1.log_density(x).is_finite());
        }
    }

    #[test]
    fn degenerate_mixtures() {
        let single = NormalMixture::new(vec![1.0], vec![0.0], vec![1.0]).unwrap();
        assert!((single.log_density(0.0) - -0.918_938_53).abs() < 1e-8);
        let doubled = NormalMixture::new(vec![0.5, 0.5], vec![0.3, 0.3], vec![0.7, 0.7]).unwrap();
        let one = NormalMixture::new(vec![1.0], vec![0.3], vec![0.7]).unwrap();
        for x in [-2.0, 0.0, 0.3, 5.0] {
            assert!((doubled.log_density(x) - one.log_density(x)).abs() < 1e-14);
        }
    }

    #[test]
    fn rejects_invalid_mixtures() {
        assert!(NormalMixture::new(vec![], vec![], vec![]).is_err());
        assert!(NormalMixture::new(vec![0.5, 0.6], vec![0.0, 0.0], vec![1.0, 1.0]).is_err());
        assert!(NormalMixture::new(vec![1.0], vec![0.0], vec![0.0]).is_err());
        assert!(NormalMixture::new(vec![1.5, -0.5], vec![0.0, 0.0], vec![1.0, 1.0]).is_err());
        assert!(NormalMixture::new(vec![1.0], vec![0.0, 1.0], vec![1.0]).is_err());
    }

    #[test]
    fn sampling() {
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let f1 = target_f1();
        assert!(f1.sample(&mut rng, 0).is_empty());

        let xs = f1.sample(&mut rng, 1_000_000);
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        assert!((mean - 0.405).abs() < 1e-3, "mean {mean}");
        assert!((f1.mean() - 0.405).abs() < 1e-15);

        let single = NormalMixture::new(vec![1.0], vec![0.4], vec![f1.sds()[0]]).unwrap();
        let ys = single.sample(&mut rng, 1_000_000);
        let m = ys.iter().sum::<f64>() / ys.len() as f64;
        assert!((m - 0.4).abs() < 3.0 * f1.sds()[0] / 1e3);

        let a = f1.sample(&mut ChaCha20Rng::seed_from_u64(9), 100);
        let b = f1.sample(&mut ChaCha20Rng::seed_from_u64(9), 100);
        assert_eq!(a, b);
    }

    #[test]
    fn log_sum_exp_edges() {
        assert_eq!(log_sum_exp(&[]), f64::NEG_INFINITY);
        assert_eq!(log_sum_exp(&[f64::NEG_INFINITY]), f64::NEG_INFINITY);
        assert!((log_sum_exp(&[-2e4, -2e4]) - (-2e4 + 2f64.ln())).abs() < 1e-9);
    }
}
