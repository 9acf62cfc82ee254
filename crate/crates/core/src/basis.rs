//! Random bases: `n` (scale, center) pairs with scales uniform on `(0, ω]^d`
//! and centers from one of three samplers.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::kernels::{product_log_density, Kernel1D, NormalMixture};

/// Consecutive rejections tolerated by the truncated-target sampler.
pub const MAX_REJECTIONS: usize = 1_000_000;

/// Terms more than this many nats below the largest term of a log-sum-exp are
/// dropped. Their combined relative contribution is below `n · e^-50`.
const NEGLIGIBLE_GAP: f64 = 50.0;

/// Axis-aligned box `[lo_1, hi_1] × … × [lo_d, hi_d]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Domain {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl Domain {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.is_empty() {
            return Err(Error::invalid("domain needs at least one dimension"));
        }
        if lo.len() != hi.len() {
            return Err(Error::DimensionMismatch {
                expected: lo.len(),
                found: hi.len(),
            });
        }
        for (j, (l, h)) in lo.iter().zip(&hi).enumerate() {
            if !(l.is_finite() && h.is_finite() && l < h) {
                return Err(Error::invalid(format!("domain side {j} is [{l}, {h}]")));
            }
        }
        Ok(Self { lo, hi })
    }

    pub fn interval(lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![lo], vec![hi])
    }

    /// `[0, 1]^d`
    pub fn unit(d: usize) -> Self {
        Self {
            lo: vec![0.0; d.max(1)],
            hi: vec![1.0; d.max(1)],
        }
    }

    /// Bounding box of a dataset. Degenerate sides are widened to `x ± 0.5`.
    pub fn enclosing(data: &Dataset) -> Self {
        let (lo, hi) = data
            .bounds()
            .into_iter()
            .map(|(l, h)| if l < h { (l, h) } else { (l - 0.5, h + 0.5) })
            .unzip();
        Self { lo, hi }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim() && x.iter().zip(&self.lo).zip(&self.hi).all(|((v, l), h)| l <= v && v <= h)
    }

    /// Side length `β` if every side has the same length (relative 1e-12).
    pub fn hypercube_side(&self) -> Option<f64> {
        let first = self.hi[0] - self.lo[0];
        self.lo
            .iter()
            .zip(&self.hi)
            .all(|(l, h)| ((h - l) - first).abs() <= 1e-12 * first)
            .then_some(first)
    }

    pub fn volume(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(l, h)| h - l).product()
    }

    fn sample_uniform<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(l, h)| l + (h - l) * rng.random::<f64>())
            .collect()
    }
}

/// One random component: per-dimension scales `w` and center `y`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasisAtom {
    pub w: Vec<f64>,
    pub y: Vec<f64>,
}

impl BasisAtom {
    pub fn new(w: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        let atom = Self { w, y };
        atom.validate()?;
        Ok(atom)
    }

    fn validate(&self) -> Result<()> {
        if self.w.is_empty() {
            return Err(Error::invalid("atom needs at least one dimension"));
        }
        if self.w.len() != self.y.len() {
            return Err(Error::DimensionMismatch {
                expected: self.w.len(),
                found: self.y.len(),
            });
        }
        if let Some((index, &value)) = self.w.iter().enumerate().find(|(_, w)| !(**w > 0.0 && w.is_finite())) {
            return Err(Error::NonPositiveScale { index, value });
        }
        if let Some(y) = self.y.iter().find(|y| !y.is_finite()) {
            return Err(Error::invalid(format!("atom center {y} is not finite")));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.w.len()
    }

    /// `ln Π_j w_j φ(w_j (x_j − y_j))`
    pub fn log_density(&self, x: &[f64]) -> Result<f64> {
        self.validate()?;
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.len(),
            });
        }
        Ok(product_log_density(Kernel1D::Gaussian, &self.w, &self.y, x))
    }
}

/// How basis centers were generated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CenterScheme {
    /// Uniform on the domain.
    Uniform,
    /// The target density truncated to the domain.
    Target,
    /// Resampled from the empirical distribution of a dataset.
    Bootstrap,
}

impl CenterScheme {
    pub fn as_str(self) -> &'static str {
        match self {
            CenterScheme::Uniform => "uniform",
            CenterScheme::Target => "target",
            CenterScheme::Bootstrap => "bootstrap",
        }
    }
}

impl fmt::Display for CenterScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CenterScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(CenterScheme::Uniform),
            "target" => Ok(CenterScheme::Target),
            "bootstrap" => Ok(CenterScheme::Bootstrap),
            other => Err(Error::invalid(format!("unknown center scheme '{other}'"))),
        }
    }
}

/// Source of basis centers.
#[derive(Debug, Clone, PartialEq)]
pub enum CenterSampler {
    Uniform(Domain),
    Target { target: NormalMixture, domain: Domain },
    Bootstrap { data: Dataset, domain: Domain },
}

impl CenterSampler {
    pub fn uniform(domain: Domain) -> Self {
        CenterSampler::Uniform(domain)
    }

    pub fn target(target: NormalMixture, domain: Domain) -> Result<Self> {
        if domain.dim() != 1 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                found: domain.dim(),
            });
        }
        Ok(CenterSampler::Target { target, domain })
    }

    pub fn scheme(&self) -> CenterScheme {
        match self {
            CenterSampler::Uniform(_) => CenterScheme::Uniform,
            CenterSampler::Target { .. } => CenterScheme::Target,
            CenterSampler::Bootstrap { .. } => CenterScheme::Bootstrap,
        }
    }

    pub fn domain(&self) -> &Domain {
        match self {
            CenterSampler::Uniform(domain) => domain,
            CenterSampler::Target { domain, .. } => domain,
            CenterSampler::Bootstrap { domain, .. } => domain,
        }
    }

    pub fn dim(&self) -> usize {
        self.domain().dim()
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Vec<f64>> {
        match self {
            CenterSampler::Uniform(domain) => Ok(domain.sample_uniform(rng)),
            CenterSampler::Target { target, domain } => sample_center_target(target, domain, rng),
            CenterSampler::Bootstrap { data, .. } => {
                let k = rng.random_range(0..data.len());
                Ok(data.row(k).to_vec())
            }
        }
    }
}

/// Sampler that resamples data points with replacement (draws from `F_N`).
pub fn empirical_sampler(data: Dataset) -> Result<CenterSampler> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let domain = Domain::enclosing(&data);
    Ok(CenterSampler::Bootstrap { data, domain })
}

/// One draw from `target` truncated to a one-dimensional `domain`, by
/// rejection from the untruncated mixture.
pub fn sample_center_target<R: Rng + ?Sized>(target: &NormalMixture, domain: &Domain, rng: &mut R) -> Result<Vec<f64>> {
    if domain.dim() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            found: domain.dim(),
        });
    }
    let picker = target.component_picker();
    let (lo, hi) = (domain.lo()[0], domain.hi()[0]);
    for _ in 0..MAX_REJECTIONS {
        let x = target.sample_with(&picker, rng);
        if lo <= x && x <= hi {
            return Ok(vec![x]);
        }
    }
    Err(Error::RejectionLimit { attempts: MAX_REJECTIONS })
}

/// The realized basis `z_n` with its generation metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomBasis {
    atoms: Vec<BasisAtom>,
    omega: f64,
    domain: Domain,
    scheme: CenterScheme,
    seed: Option<u64>,
    kernel: Kernel1D,
    // flattened n × d copies for evaluation
    scales: Vec<f64>,
    centers: Vec<f64>,
    // Σ_j ln w_ij + d · ln(kernel normalizer)
    log_norms: Vec<f64>,
}

impl RandomBasis {
    /// Assemble a basis from stored parts, checking every invariant.
    pub fn from_parts(atoms: Vec<BasisAtom>, omega: f64, domain: Domain, scheme: CenterScheme, seed: Option<u64>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::invalid("a basis needs at least one atom"));
        }
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(Error::invalid(format!("omega must be positive, got {omega}")));
        }
        let d = domain.dim();
        for atom in &atoms {
            atom.validate()?;
            if atom.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: atom.dim(),
                });
            }
            if let Some(&w) = atom.w.iter().find(|&&w| w > omega) {
                return Err(Error::invalid(format!("scale {w} exceeds omega {omega}")));
            }
            if !domain.contains(&atom.y) {
                return Err(Error::invalid(format!("center {:?} lies outside the domain", atom.y)));
            }
        }
        Ok(Self::assemble(atoms, omega, domain, scheme, seed))
    }

    fn assemble(atoms: Vec<BasisAtom>, omega: f64, domain: Domain, scheme: CenterScheme, seed: Option<u64>) -> Self {
        let kernel = Kernel1D::Gaussian;
        let d = domain.dim();
        let mut scales = Vec::with_capacity(atoms.len() * d);
        let mut centers = Vec::with_capacity(atoms.len() * d);
        let mut log_norms = Vec::with_capacity(atoms.len());
        for atom in &atoms {
            scales.extend_from_slice(&atom.w);
            centers.extend_from_slice(&atom.y);
            log_norms.push(atom.w.iter().map(|w| w.ln()).sum::<f64>() + d as f64 * kernel.log_norm());
        }
        Self {
            atoms,
            omega,
            domain,
            scheme,
            seed,
            kernel,
            scales,
            centers,
            log_norms,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn atoms(&self) -> &[BasisAtom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn scheme(&self) -> CenterScheme {
        self.scheme
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn kernel(&self) -> Kernel1D {
        self.kernel
    }

    pub(crate) fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.len(),
            });
        }
        Ok(())
    }

    /// Log density of atom `i` at `x`; `x` must have the basis dimension.
    #[inline]
    pub(crate) fn atom_log_density_unchecked(&self, i: usize, x: &[f64]) -> f64 {
        let d = x.len();
        let w = &self.scales[i * d..(i + 1) * d];
        let y = &self.centers[i * d..(i + 1) * d];
        let mut q = 0.0;
        for j in 0..d {
            q += self.kernel.log_shape(w[j] * (x[j] - y[j]));
        }
        self.log_norms[i] + q
    }

    /// `ln Σ_i exp(log_weights[i] + atom_log_density(i, x))`.
    ///
    /// Entries of `log_weights` equal to `-inf` are skipped. `x` must have the
    /// basis dimension.
    pub(crate) fn log_mixture_unchecked(&self, log_weights: &[f64], x: &[f64]) -> f64 {
        debug_assert_eq!(log_weights.len(), self.len());
        let mut max = f64::NEG_INFINITY;
        for (i, &lw) in log_weights.iter().enumerate() {
            if lw == f64::NEG_INFINITY {
                continue;
            }
            let t = lw + self.atom_log_density_unchecked(i, x);
            if t > max {
                max = t;
            }
        }
        if max == f64::NEG_INFINITY {
            return max;
        }
        let floor = max - NEGLIGIBLE_GAP;
        let mut sum = 0.0;
        for (i, &lw) in log_weights.iter().enumerate() {
            if lw == f64::NEG_INFINITY {
                continue;
            }
            let t = lw + self.atom_log_density_unchecked(i, x);
            if t > floor {
                sum += (t - max).exp();
            }
        }
        max + sum.ln()
    }
}

/// Draw a basis of `n` atoms in dimension `d`: scales i.i.d. uniform on
/// `(0, ω]`, centers from `centers`. For each atom the `d` scales are drawn
/// before the center.
pub fn sample_basis<R: Rng + ?Sized>(n: usize, d: usize, omega: f64, centers: &CenterSampler, rng: &mut R) -> Result<RandomBasis> {
    if n == 0 {
        return Err(Error::invalid("n must be at least 1"));
    }
    if d == 0 {
        return Err(Error::invalid("d must be at least 1"));
    }
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(Error::invalid(format!("omega must be positive, got {omega}")));
    }
    if centers.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: centers.dim(),
        });
    }
    let mut atoms = Vec::with_capacity(n);
    for _ in 0..n {
        // 1 - U[0,1) lies in (0, 1]
        let w = (0..d).map(|_| omega * (1.0 - rng.random::<f64>())).collect();
        let y = centers.draw(rng)?;
        atoms.push(BasisAtom { w, y });
    }
    Ok(RandomBasis::assemble(
        atoms,
        omega,
        centers.domain().clone(),
        centers.scheme(),
        None,
    ))
}
