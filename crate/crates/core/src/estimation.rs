//! Maximum-likelihood fitting of simplex weights over a fixed random basis.
//!
//! The estimator is `f(x; z_n, α) = Σ α_i Π_j w_ij φ(w_ij (x_j − y_ij))` with
//! `α` on the unit simplex. Its average log-likelihood is concave in `α`, and
//! the EM update `α_i ← N⁻¹ Σ_k τ_i(x_k; α)` is the exact maximizer of the
//! Jensen minorizer, so every step is an ascent step.

use crate::basis::RandomBasis;
use crate::dataset::Dataset;
use crate::error::{Error, Result};

/// Tolerance on `|Σα − 1|` and `min α` accepted from callers.
pub const SIMPLEX_TOL: f64 = 1e-9;

fn check_simplex(alpha: &[f64], tol: f64) -> Result<()> {
    let sum: f64 = alpha.iter().sum();
    let min = alpha.iter().copied().fold(f64::INFINITY, f64::min);
    if alpha.iter().any(|a| !a.is_finite()) || (sum - 1.0).abs() > tol || min < -tol {
        return Err(Error::NotOnSimplex { sum, min });
    }
    Ok(())
}

fn ln_weights(alpha: &[f64]) -> Vec<f64> {
    alpha.iter().map(|&a| if a > 0.0 { a.ln() } else { f64::NEG_INFINITY }).collect()
}

/// Random basis plus simplex weights.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureModel {
    basis: RandomBasis,
    alpha: Vec<f64>,
    ln_alpha: Vec<f64>,
}

impl MixtureModel {
    pub fn new(basis: RandomBasis, alpha: Vec<f64>) -> Result<Self> {
        if alpha.len() != basis.len() {
            return Err(Error::DimensionMismatch {
                expected: basis.len(),
                found: alpha.len(),
            });
        }
        check_simplex(&alpha, SIMPLEX_TOL)?;
        let alpha: Vec<f64> = alpha.into_iter().map(|a| a.max(0.0)).collect();
        let ln_alpha = ln_weights(&alpha);
        Ok(Self { basis, alpha, ln_alpha })
    }

    /// Equal weights `1/n`.
    pub fn uniform(basis: RandomBasis) -> Self {
        let n = basis.len();
        Self::new(basis, vec![1.0 / n as f64; n]).expect("uniform weights lie on the simplex")
    }

    pub fn basis(&self) -> &RandomBasis {
        &self.basis
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn with_alpha(&self, alpha: Vec<f64>) -> Result<Self> {
        Self::new(self.basis.clone(), alpha)
    }

    fn check_data(&self, data: &Dataset) -> Result<()> {
        if data.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if data.dim() != self.basis.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.basis.dim(),
                found: data.dim(),
            });
        }
        Ok(())
    }

    pub fn log_density(&self, x: &[f64]) -> Result<f64> {
        self.basis.check_point(x)?;
        Ok(self.basis.log_mixture_unchecked(&self.ln_alpha, x))
    }

    /// Scalar shortcut for one-dimensional models.
    pub fn log_density_1d(&self, x: f64) -> f64 {
        debug_assert_eq!(self.basis.dim(), 1);
        self.basis.log_mixture_unchecked(&self.ln_alpha, &[x])
    }

    /// `l_N(α) = N⁻¹ Σ_k ln f(x_k; α)`
    pub fn log_likelihood(&self, data: &Dataset) -> Result<f64> {
        self.check_data(data)?;
        let total: f64 = data.rows().map(|x| self.basis.log_mixture_unchecked(&self.ln_alpha, x)).sum();
        Ok(total / data.len() as f64)
    }

    /// Posterior membership probabilities `τ_i(x; α)`, computed as a softmax of
    /// `ln α_i + ln k_i(x)`. Atoms with `α_i = 0` get exactly zero.
    pub fn responsibilities(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.basis.check_point(x)?;
        Ok(self.responsibilities_unchecked(x))
    }

    fn responsibilities_unchecked(&self, x: &[f64]) -> Vec<f64> {
        let mut tau: Vec<f64> = self
            .ln_alpha
            .iter()
            .enumerate()
            .map(|(i, &la)| {
                if la == f64::NEG_INFINITY {
                    la
                } else {
                    la + self.basis.atom_log_density_unchecked(i, x)
                }
            })
            .collect();
        let max = tau.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        for t in tau.iter_mut() {
            *t = if *t == f64::NEG_INFINITY { 0.0 } else { (*t - max).exp() };
            sum += *t;
        }
        for t in tau.iter_mut() {
            *t /= sum;
        }
        tau
    }

    /// One EM update: the average responsibility vector over the data,
    /// accumulated in row order.
    pub fn em_step(&self, data: &Dataset) -> Result<Vec<f64>> {
        self.check_data(data)?;
        let mut acc = vec![0.0; self.basis.len()];
        for x in data.rows() {
            let tau = self.responsibilities_unchecked(x);
            for (a, t) in acc.iter_mut().zip(&tau) {
                *a += t;
            }
        }
        let n_rows = data.len() as f64;
        acc.iter_mut().for_each(|a| *a /= n_rows);
        renormalize(&mut acc);
        Ok(acc)
    }
}

fn renormalize(alpha: &mut [f64]) {
    let s: f64 = alpha.iter().sum();
    alpha.iter_mut().for_each(|a| *a /= s);
}

/// Jensen minorizer of `N · l_N` anchored at `anchor`:
///
/// `Q(α; ψ) = Σ_k Σ_i τ_i(x_k; ψ) [ln α_i + ln k_i(x_k)] − Σ_k Σ_i τ_i(x_k; ψ) ln τ_i(x_k; ψ)`
///
/// with `0 · ln 0 = 0`. `Q(α; ψ) ≤ N · l_N(α)` with equality at `α = ψ`.
pub fn minorizer_q(alpha: &[f64], anchor: &[f64], basis: &RandomBasis, data: &Dataset) -> Result<f64> {
    for v in [alpha, anchor] {
        if v.len() != basis.len() {
            return Err(Error::DimensionMismatch {
                expected: basis.len(),
                found: v.len(),
            });
        }
        check_simplex(v, SIMPLEX_TOL)?;
    }
    let anchor_model = MixtureModel::new(basis.clone(), anchor.to_vec())?;
    anchor_model.check_data(data)?;
    let ln_alpha = ln_weights(alpha);
    let mut q = 0.0;
    for x in data.rows() {
        let tau = anchor_model.responsibilities_unchecked(x);
        for (i, &t) in tau.iter().enumerate() {
            if t > 0.0 {
                q += t * (ln_alpha[i] + basis.atom_log_density_unchecked(i, x) - t.ln());
            }
        }
    }
    Ok(q)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Init {
    /// `α⁽⁰⁾ = (1/n, …, 1/n)`
    Uniform,
    Custom(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitConfig {
    pub max_iter: usize,
    /// Stop once `l_N` improves by less than `rel_tol · (1 + |l_N|)`.
    pub rel_tol: f64,
    pub init: Init,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            max_iter: 500,
            rel_tol: 1e-8,
            init: Init::Uniform,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iter < 1 {
            return Err(Error::invalid("max_iter must be at least 1"));
        }
        if !(self.rel_tol > 0.0 && self.rel_tol.is_finite()) {
            return Err(Error::invalid(format!("rel_tol must be positive, got {}", self.rel_tol)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitReport {
    pub alpha: Vec<f64>,
    /// `loglik_trace[r]` is `l_N(α⁽ʳ⁾)`; the first entry is the starting point.
    pub loglik_trace: Vec<f64>,
    /// Number of EM updates applied.
    pub iterations: usize,
    pub converged: bool,
}

impl FitReport {
    pub fn final_loglik(&self) -> f64 {
        *self.loglik_trace.last().expect("trace holds the starting point")
    }
}

/// Kernel values `k_i(x_k)` scaled by each row's largest entry, so the
/// linear form neither overflows nor loses the dominant terms.
struct KernelMatrix {
    n_atoms: usize,
    values: Vec<f64>,
    row_log_max: Vec<f64>,
}

impl KernelMatrix {
    fn build(basis: &RandomBasis, data: &Dataset) -> Self {
        let n = basis.len();
        let mut values = vec![0.0; data.len() * n];
        let mut row_log_max = Vec::with_capacity(data.len());
        for (x, row) in data.rows().zip(values.chunks_exact_mut(n)) {
            let mut max = f64::NEG_INFINITY;
            for (i, v) in row.iter_mut().enumerate() {
                *v = basis.atom_log_density_unchecked(i, x);
                max = max.max(*v);
            }
            row.iter_mut().for_each(|v| *v = (*v - max).exp());
            row_log_max.push(max);
        }
        Self {
            n_atoms: n,
            values,
            row_log_max,
        }
    }

    fn row(&self, k: usize) -> &[f64] {
        &self.values[k * self.n_atoms..(k + 1) * self.n_atoms]
    }
}

// Eight independent partial sums keep the reduction off a single add chain.
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0; 8];
    let (a8, a_rest) = a.split_at(a.len() - a.len() % 8);
    let (b8, b_rest) = b.split_at(a8.len());
    for (x, y) in a8.chunks_exact(8).zip(b8.chunks_exact(8)) {
        for j in 0..8 {
            acc[j] += x[j] * y[j];
        }
    }
    let tail: f64 = a_rest.iter().zip(b_rest).map(|(x, y)| x * y).sum();
    acc.iter().sum::<f64>() + tail
}

/// One fused pass: returns `l_N(α)` and writes the EM update into `next`.
fn em_pass(model: &MixtureModel, data: &Dataset, kernels: &KernelMatrix, next: &mut [f64]) -> f64 {
    let alpha = &model.alpha;
    next.iter_mut().for_each(|v| *v = 0.0);
    let mut ll = 0.0;
    for k in 0..data.len() {
        let row = kernels.row(k);
        let s = dot(row, alpha);
        if s.is_normal() {
            ll += s.ln() + kernels.row_log_max[k];
            let inv = 1.0 / s;
            for ((nx, r), a) in next.iter_mut().zip(row).zip(alpha) {
                *nx += a * r * inv;
            }
        } else {
            // every weighted term underflowed in the scaled linear form
            let x = data.row(k);
            ll += model.basis.log_mixture_unchecked(&model.ln_alpha, x);
            for (nx, t) in next.iter_mut().zip(model.responsibilities_unchecked(x)) {
                *nx += t;
            }
        }
    }
    let n_rows = data.len() as f64;
    next.iter_mut().for_each(|v| *v /= n_rows);
    renormalize(next);
    ll / n_rows
}

/// Run EM from `cfg.init` until the relative log-likelihood gain drops below
/// `cfg.rel_tol` or `cfg.max_iter` updates have been applied. Only the basis
/// of `model` is used; its weights are ignored.
pub fn fit_em(model: &MixtureModel, data: &Dataset, cfg: &FitConfig) -> Result<FitReport> {
    cfg.validate()?;
    model.check_data(data)?;
    let basis = &model.basis;
    let mut current = match &cfg.init {
        Init::Uniform => MixtureModel::uniform(basis.clone()),
        Init::Custom(alpha) => MixtureModel::new(basis.clone(), alpha.clone())?,
    };
    let kernels = KernelMatrix::build(basis, data);
    let mut next = vec![0.0; basis.len()];
    let mut trace = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    loop {
        let ll = em_pass(&current, data, &kernels, &mut next);
        if let Some(&prev) = trace.last() {
            trace.push(ll);
            if ll - prev < cfg.rel_tol * (1.0 + ll.abs()) {
                converged = true;
                break;
            }
        } else {
            trace.push(ll);
        }
        if iterations == cfg.max_iter {
            break;
        }
        current.ln_alpha = ln_weights(&next);
        current.alpha.copy_from_slice(&next);
        iterations += 1;
    }
    Ok(FitReport {
        alpha: current.alpha,
        loglik_trace: trace,
        iterations,
        converged,
    })
}

impl MixtureModel {
    /// Fit weights to `data` and return the fitted model with its report.
    pub fn fit(&self, data: &Dataset, cfg: &FitConfig) -> Result<(MixtureModel, FitReport)> {
        let report = fit_em(self, data, cfg)?;
        let fitted = self.with_alpha(report.alpha.clone())?;
        Ok((fitted, report))
    }
}
