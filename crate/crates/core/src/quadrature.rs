//! Adaptive Simpson quadrature on a finite interval.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    /// Absolute error target for the whole interval.
    pub abs_tol: f64,
    /// Maximum bisection depth below each initial panel.
    pub max_depth: u32,
    /// Number of equal panels the interval is split into before adapting.
    /// Narrow spikes narrower than a panel would otherwise be invisible to
    /// the error estimate of the first Simpson step.
    pub initial_panels: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            max_depth: 40,
            initial_panels: 64,
        }
    }
}

impl QuadratureConfig {
    pub fn with_tol(abs_tol: f64) -> Self {
        Self {
            abs_tol,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.abs_tol.is_finite()) {
            return Err(Error::invalid(format!(
                "quadrature tolerance must be positive, got {}",
                self.abs_tol
            )));
        }
        if self.max_depth < 1 {
            return Err(Error::invalid("max_depth must be at least 1"));
        }
        if self.initial_panels < 1 {
            return Err(Error::invalid("initial_panels must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    /// Sum of the per-interval Richardson error estimates.
    pub error_estimate: f64,
    pub evaluations: usize,
    /// Some interval hit `max_depth` before meeting its tolerance.
    pub depth_exceeded: bool,
}

struct Walk<'a, F> {
    f: &'a mut F,
    evaluations: usize,
    error: f64,
    depth_exceeded: bool,
}

impl<F: FnMut(f64) -> f64> Walk<'_, F> {
    #[inline]
    fn eval(&mut self, x: f64) -> Result<f64> {
        self.evaluations += 1;
        let v = (self.f)(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFiniteIntegrand { x })
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn refine(&mut self, a: f64, fa: f64, m: f64, fm: f64, b: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> Result<f64> {
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = self.eval(lm)?;
        let frm = self.eval(rm)?;
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if delta.abs() <= 15.0 * tol || depth == 0 {
            if delta.abs() > 15.0 * tol {
                self.depth_exceeded = true;
            }
            self.error += delta.abs() / 15.0;
            return Ok(left + right + delta / 15.0);
        }
        let l = self.refine(a, fa, lm, flm, m, fm, left, 0.5 * tol, depth - 1)?;
        let r = self.refine(m, fm, rm, frm, b, fb, right, 0.5 * tol, depth - 1)?;
        Ok(l + r)
    }
}

/// Integrate `f` over `[a, b]`.
///
/// The interval is cut into `cfg.initial_panels` equal panels, each receiving
/// an equal share of `cfg.abs_tol`, and every panel is refined by recursive
/// bisection until `|S_left + S_right − S_whole| ≤ 15·tol`, with the tolerance
/// halved at each level. Panel results are summed left to right.
pub fn adaptive_simpson<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, cfg: &QuadratureConfig) -> Result<Quadrature> {
    cfg.validate()?;
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(Error::invalid(format!("integration interval [{a}, {b}] is invalid")));
    }
    let panels = cfg.initial_panels;
    let tol = cfg.abs_tol / panels as f64;
    let width = (b - a) / panels as f64;
    let mut walk = Walk {
        f: &mut f,
        evaluations: 0,
        error: 0.0,
        depth_exceeded: false,
    };
    let mut total = 0.0;
    let mut lo = a;
    let mut f_lo = walk.eval(lo)?;
    for p in 0..panels {
        let hi = if p + 1 == panels { b } else { a + width * (p + 1) as f64 };
        let mid = 0.5 * (lo + hi);
        let f_mid = walk.eval(mid)?;
        let f_hi = walk.eval(hi)?;
        let whole = (hi - lo) / 6.0 * (f_lo + 4.0 * f_mid + f_hi);
        total += walk.refine(lo, f_lo, mid, f_mid, hi, f_hi, whole, tol, cfg.max_depth)?;
        lo = hi;
        f_lo = f_hi;
    }
    Ok(Quadrature {
        value: total,
        error_estimate: walk.error,
        evaluations: walk.evaluations,
        depth_exceeded: walk.depth_exceeded,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::distribution::{ContinuousCDF, Normal};

    #[test]
    fn exact_for_cubics() {
        let q = adaptive_simpson(|x| x * x, 0.0, 1.0, &QuadratureConfig::default()).unwrap();
        assert!((q.value - 1.0 / 3.0).abs() < 1e-15);
        assert!(!q.depth_exceeded);
        let q = adaptive_simpson(|x| 2.0 * x * x * x - x + 3.0, -1.0, 2.0, &QuadratureConfig::default()).unwrap();
        // ∫ = [x^4/2 - x^2/2 + 3x] from -1 to 2
        let exact = (8.0 - 2.0 + 6.0) - (0.5 - 0.5 - 3.0);
        assert!((q.value - exact).abs() < 1e-12);
    }

    #[test]
    fn narrow_gaussian_bump() {
        let w = 200.0;
        let bump = |x: f64| w * (-0.5 * (w * (x - 0.5)).powi(2)).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let q = adaptive_simpson(bump, 0.0, 1.0, &QuadratureConfig::default()).unwrap();
        let n = Normal::new(0.0, 1.0).unwrap();
        assert!((q.value - (n.cdf(100.0) - n.cdf(-100.0))).abs() < 1e-9);
    }

    #[test]
    fn single_panel_misses_offcenter_spike() {
        let spike = |x: f64| (-0.5 * ((x - 0.3) * 2000.0).powi(2)).exp();
        let single = QuadratureConfig {
            initial_panels: 1,
            ..Default::default()
        };
        let missed = adaptive_simpson(spike, 0.0, 1.0, &single).unwrap();
        let found = adaptive_simpson(spike, 0.0, 1.0, &QuadratureConfig::default()).unwrap();
        let exact = (2.0 * std::f64::consts::PI).sqrt() / 2000.0;
        assert!(missed.value.abs() < 1e-10);
        assert!((found.value - exact).abs() < 1e-10);
    }

    #[test]
    fn errors_and_flags() {
        let err = adaptive_simpson(|x| if x > 0.5 { f64::NAN } else { 1.0 }, 0.0, 1.0, &QuadratureConfig::default());
        assert!(matches!(err, Err(Error::NonFiniteIntegrand { x }) if x > 0.5));

        let shallow = QuadratureConfig {
            abs_tol: 1e-14,
            max_depth: 1,
            initial_panels: 1,
        };
        let q = adaptive_simpson(|x: f64| x.sqrt(), 0.0, 1.0, &shallow).unwrap();
        assert!(q.depth_exceeded);

        assert!(adaptive_simpson(|x| x, 1.0, 0.0, &QuadratureConfig::default()).is_err());
        assert!(adaptive_simpson(|x| x, 0.0, 1.0, &QuadratureConfig::with_tol(0.0)).is_err());
        assert!(adaptive_simpson(|x| x, 0.0, 1.0, &QuadratureConfig::with_tol(-1.0)).is_err());
    }
}
