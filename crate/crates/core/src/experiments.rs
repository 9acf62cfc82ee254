//! Replicated simulation studies.
//!
//! * Simulation 1 builds fixed-coefficient approximations of the target on
//!   `[0, 1]` over a grid of `(n, ω)` and averages their KL divergence and
//!   squared L2 distance to the target.
//! * Simulation 2 draws `N` observations from the target, fits simplex
//!   weights by EM over a random basis of size `n`, and averages the same
//!   two metrics over a grid of `(n, N)`.
//!
//! Cells are enumerated row-major over the grids and replicate `r` of cell
//! `c` draws everything from [`replicate_rng`]`(seed, c, r)`. Replicates run
//! in parallel; results are reduced in `(cell, replicate)` order, so a table
//! is bitwise reproducible for a fixed configuration.

use std::fmt;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::approx::{coeffs_target_scheme, coeffs_uniform_scheme, target_mass};
use crate::basis::{empirical_sampler, sample_basis, CenterSampler, CenterScheme, Domain};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::estimation::{fit_em, FitConfig, MixtureModel};
use crate::kernels::{target_f1, NormalMixture};
use crate::metrics::{kl_divergence, l2_distance_sq};
use crate::quadrature::QuadratureConfig;
use crate::rng::replicate_rng;

pub const CSV_HEADER: &str = "scheme,n,omega_or_N,mean_kl,mean_l2,reps,nonfinite";

#[derive(Debug, Clone, PartialEq)]
pub struct Sim1Config {
    /// `Target` (centers from the truncated target, `a = c`) or `Uniform`
    /// (uniform centers, `a(y) = f(y)`).
    pub scheme: CenterScheme,
    pub n_grid: Vec<usize>,
    pub omega_grid: Vec<f64>,
    pub reps: usize,
    pub seed: u64,
    pub quad: QuadratureConfig,
}

impl Sim1Config {
    /// `n ∈ {100, 1000, 10000}`, `ω ∈ {50, 100, 200}`, 100 replicates.
    pub fn full(scheme: CenterScheme, seed: u64) -> Self {
        Self {
            scheme,
            n_grid: vec![100, 1000, 10_000],
            omega_grid: vec![50.0, 100.0, 200.0],
            reps: 100,
            seed,
            quad: QuadratureConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !matches!(self.scheme, CenterScheme::Target | CenterScheme::Uniform) {
            return Err(Error::invalid(format!("simulation 1 has no {} scheme", self.scheme)));
        }
        validate_grids(&self.n_grid, self.omega_grid.len(), self.reps)?;
        if let Some(w) = self.omega_grid.iter().find(|w| !(**w > 0.0 && w.is_finite())) {
            return Err(Error::invalid(format!("omega must be positive, got {w}")));
        }
        self.quad.validate()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sim2Config {
    /// `Uniform` centers on `[0, 1]` or `Bootstrap` centers from the sample.
    pub scheme: CenterScheme,
    pub n_grid: Vec<usize>,
    /// Sample sizes `N`.
    pub sample_sizes: Vec<usize>,
    pub omega: f64,
    pub reps: usize,
    pub seed: u64,
    pub fit: FitConfig,
    pub quad: QuadratureConfig,
}

impl Sim2Config {
    /// `ω = 200`, `n ∈ {100, 500, 1000}`, `N ∈ {1000, 5000, 10000}`, 100 replicates.
    pub fn full(scheme: CenterScheme, seed: u64) -> Self {
        Self {
            scheme,
            n_grid: vec![100, 500, 1000],
            sample_sizes: vec![1000, 5000, 10_000],
            omega: 200.0,
            reps: 100,
            seed,
            fit: FitConfig::default(),
            quad: QuadratureConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !matches!(self.scheme, CenterScheme::Uniform | CenterScheme::Bootstrap) {
            return Err(Error::invalid(format!("simulation 2 has no {} scheme", self.scheme)));
        }
        validate_grids(&self.n_grid, self.sample_sizes.len(), self.reps)?;
        if self.sample_sizes.contains(&0) {
            return Err(Error::invalid("sample sizes must be at least 1"));
        }
        if !(self.omega > 0.0 && self.omega.is_finite()) {
            return Err(Error::invalid(format!("omega must be positive, got {}", self.omega)));
        }
        self.fit.validate()?;
        self.quad.validate()
    }
}

fn validate_grids(n_grid: &[usize], other_len: usize, reps: usize) -> Result<()> {
    if n_grid.is_empty() || other_len == 0 {
        return Err(Error::invalid("grids must be nonempty"));
    }
    if n_grid.contains(&0) {
        return Err(Error::invalid("n must be at least 1"));
    }
    if reps == 0 {
        return Err(Error::invalid("at least one replicate is required"));
    }
    Ok(())
}

/// Metrics of one replicate. `kl` is `None` when the divergence is infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Replicate {
    pub kl: Option<f64>,
    pub l2: f64,
    pub converged: bool,
}

impl Replicate {
    fn is_finite(&self) -> bool {
        self.kl.is_some_and(f64::is_finite) && self.l2.is_finite()
    }
}

/// Replicate averages for one grid cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellSummary {
    pub n: usize,
    /// `ω` in simulation 1, `N` in simulation 2.
    pub param: f64,
    pub mean_kl: f64,
    pub mean_l2: f64,
    pub reps: usize,
    /// Replicates excluded from the means because a metric was not finite.
    pub nonfinite: usize,
    /// Replicates whose EM run stopped at `max_iter`. Not part of the CSV form.
    pub unconverged: usize,
}

impl CellSummary {
    fn from_replicates(n: usize, param: f64, reps: &[Replicate]) -> Self {
        let finite: Vec<&Replicate> = reps.iter().filter(|r| r.is_finite()).collect();
        let count = finite.len() as f64;
        let (mean_kl, mean_l2) = if finite.is_empty() {
            (f64::NAN, f64::NAN)
        } else {
            (
                finite.iter().map(|r| r.kl.unwrap_or(f64::NAN)).sum::<f64>() / count,
                finite.iter().map(|r| r.l2).sum::<f64>() / count,
            )
        };
        Self {
            n,
            param,
            mean_kl,
            mean_l2,
            reps: reps.len(),
            nonfinite: reps.len() - finite.len(),
            unconverged: reps.iter().filter(|r| !r.converged).count(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    pub scheme: CenterScheme,
    pub cells: Vec<CellSummary>,
}

impl ResultTable {
    pub fn cell(&self, n: usize, param: f64) -> Option<&CellSummary> {
        self.cells.iter().find(|c| c.n == n && c.param == param)
    }

    /// CSV with header [`CSV_HEADER`]; means in scientific notation with six
    /// significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for c in &self.cells {
            writeln!(
                out,
                "{},{},{},{:.5e},{:.5e},{},{}",
                self.scheme, c.n, c.param, c.mean_kl, c.mean_l2, c.reps, c.nonfinite
            )
            .expect("writing to a String cannot fail");
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        match lines.next() {
            Some(h) if h.trim_end() == CSV_HEADER => {}
            other => return Err(Error::Parse(format!("unexpected header {other:?}"))),
        }
        let mut scheme = None;
        let mut cells = Vec::new();
        for (i, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let fields: Vec<&str> = line.trim_end().split(',').collect();
            if fields.len() != 7 {
                return Err(Error::Parse(format!("row {} has {} fields", i + 1, fields.len())));
            }
            let bad = |what: &str| Error::Parse(format!("row {}: bad {what}", i + 1));
            let row_scheme: CenterScheme = fields[0].parse().map_err(|_| bad("scheme"))?;
            if *scheme.get_or_insert(row_scheme) != row_scheme {
                return Err(bad("scheme (mixed schemes)"));
            }
            cells.push(CellSummary {
                n: fields[1].parse().map_err(|_| bad("n"))?,
                param: fields[2].parse().map_err(|_| bad("omega_or_N"))?,
                mean_kl: fields[3].parse().map_err(|_| bad("mean_kl"))?,
                mean_l2: fields[4].parse().map_err(|_| bad("mean_l2"))?,
                reps: fields[5].parse().map_err(|_| bad("reps"))?,
                nonfinite: fields[6].parse().map_err(|_| bad("nonfinite"))?,
                unconverged: 0,
            });
        }
        let scheme = scheme.ok_or_else(|| Error::Parse("table has no rows".into()))?;
        Ok(Self { scheme, cells })
    }
}

impl fmt::Display for ResultTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:<10} {:>7} {:>9} {:>12} {:>12} {:>5} {:>9} {:>11}",
            "scheme", "n", "omega|N", "mean_kl", "mean_l2", "reps", "nonfinite", "unconverged"
        )?;
        for c in &self.cells {
            writeln!(
                f,
                "{:<10} {:>7} {:>9} {:>12.3e} {:>12.3e} {:>5} {:>9} {:>11}",
                self.scheme.as_str(),
                c.n,
                c.param,
                c.mean_kl,
                c.mean_l2,
                c.reps,
                c.nonfinite,
                c.unconverged
            )?;
        }
        Ok(())
    }
}

/// KL and squared L2 distance from `target` to a model given by its log
/// density, on `domain`.
fn compare_to_target<G: Fn(f64) -> f64>(
    target: &NormalMixture,
    model_log: G,
    domain: &Domain,
    quad: &QuadratureConfig,
) -> Result<(Option<f64>, f64)> {
    let kl = match kl_divergence(|x| target.log_density(x), &model_log, domain, quad) {
        Ok(v) => Some(v),
        Err(Error::InfiniteDivergence { .. }) => None,
        Err(e) => return Err(e),
    };
    let l2 = l2_distance_sq(|x| target.density(x), |x| model_log(x).exp(), domain, quad)?;
    Ok((kl, l2))
}

fn run_cells<F>(cells: &[(usize, f64)], reps: usize, job: F) -> Result<Vec<CellSummary>>
where
    F: Fn(usize, usize, usize, f64) -> Result<Replicate> + Sync,
{
    let jobs: Vec<(usize, usize)> = (0..cells.len()).flat_map(|c| (0..reps).map(move |r| (c, r))).collect();
    let results: Vec<Result<Replicate>> = jobs.par_iter().map(|&(c, r)| job(c, r, cells[c].0, cells[c].1)).collect();
    let results: Vec<Replicate> = results.into_iter().collect::<Result<_>>()?;
    Ok(cells
        .iter()
        .zip(results.chunks_exact(reps))
        .map(|(&(n, p), chunk)| CellSummary::from_replicates(n, p, chunk))
        .collect())
}

fn grid(n_grid: &[usize], params: &[f64]) -> Vec<(usize, f64)> {
    n_grid.iter().flat_map(|&n| params.iter().map(move |&p| (n, p))).collect()
}

fn stream(seed: u64, cell: usize, rep: usize) -> crate::rng::StreamRng {
    let cell = u32::try_from(cell).expect("cell index fits in u32");
    let rep = u32::try_from(rep).expect("replicate index fits in u32");
    replicate_rng(seed, cell, rep)
}

/// One replicate of simulation 1.
pub fn sim1_replicate(cfg: &Sim1Config, cell: usize, rep: usize, n: usize, omega: f64) -> Result<Replicate> {
    let target = target_f1();
    let domain = Domain::unit(1);
    let mut rng = stream(cfg.seed, cell, rep);
    let model = match cfg.scheme {
        CenterScheme::Target => {
            let c = target_mass(&target, &domain, &cfg.quad)?;
            let sampler = CenterSampler::target(target.clone(), domain.clone())?;
            coeffs_target_scheme(sample_basis(n, 1, omega, &sampler, &mut rng)?.with_seed(cfg.seed), c)?
        }
        _ => {
            let sampler = CenterSampler::uniform(domain.clone());
            coeffs_uniform_scheme(sample_basis(n, 1, omega, &sampler, &mut rng)?.with_seed(cfg.seed), &target)?
        }
    };
    let (kl, l2) = compare_to_target(&target, |x| model.log_eval_1d(x), &domain, &cfg.quad)?;
    Ok(Replicate { kl, l2, converged: true })
}

pub fn run_sim1(cfg: &Sim1Config) -> Result<ResultTable> {
    cfg.validate()?;
    let cells = grid(&cfg.n_grid, &cfg.omega_grid);
    let summaries = run_cells(&cells, cfg.reps, |c, r, n, omega| sim1_replicate(cfg, c, r, n, omega))?;
    Ok(ResultTable {
        scheme: cfg.scheme,
        cells: summaries,
    })
}

/// One replicate of simulation 2: sample data, draw a basis, fit, compare.
pub fn sim2_replicate(cfg: &Sim2Config, cell: usize, rep: usize, n: usize, sample_size: usize) -> Result<Replicate> {
    let target = target_f1();
    let domain = Domain::unit(1);
    let mut rng = stream(cfg.seed, cell, rep);
    let data = Dataset::from_scalars(target.sample(&mut rng, sample_size))?;
    let sampler = match cfg.scheme {
        CenterScheme::Bootstrap => empirical_sampler(data.clone())?,
        _ => CenterSampler::uniform(domain.clone()),
    };
    let basis = sample_basis(n, 1, cfg.omega, &sampler, &mut rng)?.with_seed(cfg.seed);
    let report = fit_em(&MixtureModel::uniform(basis.clone()), &data, &cfg.fit)?;
    let model = MixtureModel::new(basis, report.alpha)?;
    let (kl, l2) = compare_to_target(&target, |x| model.log_density_1d(x), &domain, &cfg.quad)?;
    Ok(Replicate {
        kl,
        l2,
        converged: report.converged,
    })
}

pub fn run_sim2(cfg: &Sim2Config) -> Result<ResultTable> {
    cfg.validate()?;
    let params: Vec<f64> = cfg.sample_sizes.iter().map(|&s| s as f64).collect();
    let cells = grid(&cfg.n_grid, &params);
    let summaries = run_cells(&cells, cfg.reps, |c, r, n, size| sim2_replicate(cfg, c, r, n, size as usize))?;
    Ok(ResultTable {
        scheme: cfg.scheme,
        cells: summaries,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BenchmarkRecord {
    pub kl: f64,
    pub l2: f64,
}

/// KL divergence and squared L2 distance between the target and the uniform
/// density on `[0, 1]`.
pub fn uniform_benchmark(quad: &QuadratureConfig) -> Result<BenchmarkRecord> {
    let target = target_f1();
    let (kl, l2) = compare_to_target(&target, |_| 0.0, &Domain::unit(1), quad)?;
    Ok(BenchmarkRecord {
        kl: kl.ok_or(Error::InfiniteDivergence { x: f64::NAN })?,
        l2,
    })
}

/// Evaluate `f` on `points` evenly spaced abscissae from `lo` to `hi` inclusive.
pub fn emit_curve<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, points: usize) -> Result<Vec<(f64, f64)>> {
    if points < 2 {
        return Err(Error::invalid(format!("a curve needs at least 2 points, got {points}")));
    }
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::invalid(format!("curve interval [{lo}, {hi}] is invalid")));
    }
    let step = (hi - lo) / (points - 1) as f64;
    Ok((0..points)
        .map(|i| {
            let x = if i + 1 == points { hi } else { lo + step * i as f64 };
            (x, f(x))
        })
        .collect())
}

/// CSV rendering of curves. `columns` names the value columns after `x`.
pub fn curve_csv(columns: &[&str], rows: &[(f64, Vec<f64>)]) -> String {
    let mut out = String::from("x");
    for c in columns {
        out.push(',');
        out.push_str(c);
    }
    out.push('\n');
    for (x, values) in rows {
        write!(out, "{x}").expect("writing to a String cannot fail");
        for v in values {
            write!(out, ",{v:e}").expect("writing to a String cannot fail");
        }
        out.push('\n');
    }
    out
}
