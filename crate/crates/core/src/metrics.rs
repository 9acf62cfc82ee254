//! Discrepancies between one-dimensional densities on an interval, by
//! adaptive quadrature.

use serde::Serialize;

use crate::basis::Domain;
use crate::error::{Error, Result};
use crate::quadrature::{adaptive_simpson, QuadratureConfig};

/// Grid size used to verify the lower-bound precondition of
/// [`kl_l2_bound_check`].
pub const BOUND_GRID_POINTS: usize = 1000;

fn interval(domain: &Domain) -> Result<(f64, f64)> {
    if domain.dim() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            found: domain.dim(),
        });
    }
    Ok((domain.lo()[0], domain.hi()[0]))
}

/// `KL(f, g) = ∫ f ln(f / g)` over the interval, from log-density callables.
///
/// The integrand is `exp(ln f) · (ln f − ln g)`, taken as zero wherever
/// `exp(ln f)` is zero. A `-inf` in `ln g` where `f > 0` is reported as
/// [`Error::InfiniteDivergence`].
pub fn kl_divergence<F, G>(f_log: F, g_log: G, domain: &Domain, cfg: &QuadratureConfig) -> Result<f64>
where
    F: Fn(f64) -> f64,
    G: Fn(f64) -> f64,
{
    let (a, b) = interval(domain)?;
    let integrand = |x: f64| {
        let lf = f_log(x);
        let f = lf.exp();
        if f == 0.0 {
            return 0.0;
        }
        f * (lf - g_log(x))
    };
    match adaptive_simpson(integrand, a, b, cfg) {
        Ok(q) => Ok(q.value),
        Err(Error::NonFiniteIntegrand { x }) if g_log(x) == f64::NEG_INFINITY => Err(Error::InfiniteDivergence { x }),
        Err(e) => Err(e),
    }
}

/// `∫ (f − g)²` over the interval, from linear callables.
pub fn l2_distance_sq<F, G>(f: F, g: G, domain: &Domain, cfg: &QuadratureConfig) -> Result<f64>
where
    F: Fn(f64) -> f64,
    G: Fn(f64) -> f64,
{
    let (a, b) = interval(domain)?;
    Ok(adaptive_simpson(|x| (f(x) - g(x)).powi(2), a, b, cfg)?.value)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundCheck {
    pub kl: f64,
    pub l2: f64,
    pub bound_holds: bool,
}

/// Compute `KL(f, g)` and `‖f − g‖²` and test `KL ≤ ‖f − g‖² / b`, which holds
/// when both functions are at least `b` on the interval and carry equal mass
/// there. The lower bound is checked on an even grid of
/// [`BOUND_GRID_POINTS`] points; the comparison allows `10 · abs_tol` slack.
pub fn kl_l2_bound_check<F, G>(f_log: F, g_log: G, domain: &Domain, b: f64, cfg: &QuadratureConfig) -> Result<BoundCheck>
where
    F: Fn(f64) -> f64,
    G: Fn(f64) -> f64,
{
    if !(b > 0.0 && b.is_finite()) {
        return Err(Error::invalid(format!("lower bound must be positive, got {b}")));
    }
    let (lo, hi) = interval(domain)?;
    for i in 0..BOUND_GRID_POINTS {
        let x = lo + (hi - lo) * i as f64 / (BOUND_GRID_POINTS - 1) as f64;
        for value in [f_log(x).exp(), g_log(x).exp()] {
            if !(value >= b) {
                return Err(Error::LowerBoundViolated { x, value, bound: b });
            }
        }
    }
    let kl = kl_divergence(&f_log, &g_log, domain, cfg)?;
    let l2 = l2_distance_sq(|x| f_log(x).exp(), |x| g_log(x).exp(), domain, cfg)?;
    Ok(BoundCheck {
        kl,
        l2,
        bound_holds: kl <= l2 / b + 10.0 * cfg.abs_tol,
    })
}
