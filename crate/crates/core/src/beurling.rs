//! Beurling densities and dimension of finite measures.
//!
//! The limits in the definitions cannot be realized on truncated measures, so
//! every estimator works on an explicit geometric grid of window radii and
//! reports that grid with its result. "Limit" statistics are taken over the
//! top decade of the grid.

use alloc::vec::Vec;

use crate::error::{bail, Result};
use crate::math::median;
use crate::measure::{discretize, Measure, PointRule};

/// Orientation of the windows `x + R Q`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum WindowShape {
    /// `[x, x + R)`
    #[default]
    ClosedOpen,
    /// `(x - R/2, x + R/2]`; the sup over `x` equals the sup of `(y, y + R]`.
    OpenClosed,
}

/// Sup window masses and the ratios `sup / R^α` on a radius grid.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityScan {
    pub alpha: f64,
    pub radii: Vec<f64>,
    pub sup_masses: Vec<f64>,
    pub ratios: Vec<f64>,
    /// Max ratio over the top decade of the grid: the `D_α` estimate.
    pub estimate: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DimensionEstimate {
    /// Least-squares slope of `log sup_mass` against `log R` over the middle
    /// half of the grid.
    pub slope: f64,
    /// Bisection bracket of the growth/decay transition of `sup / R^α`.
    pub alpha_lo: f64,
    pub alpha_hi: f64,
    pub fit_range: (f64, f64),
    /// RMS residual of the least-squares fit.
    pub residual: f64,
    /// Set for measures with at most one atom and no diffuse part.
    pub degenerate: bool,
}

impl DimensionEstimate {
    /// The least-squares slope lies in the bisection bracket up to `tol`.
    pub fn is_consistent(&self, tol: f64) -> bool {
        self.alpha_lo - tol <= self.slope && self.slope <= self.alpha_hi + tol
    }
}

/// `R_k = lo (hi/lo)^{k/(count-1)}`, `k = 0..count`.
pub fn geometric_radii(lo: f64, hi: f64, count: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0) || !(hi > lo) || count < 2 {
        bail!(
            Usage,
            "radius grid needs 0 < lo < hi and at least two points"
        );
    }
    let step = libm::log(hi / lo) / (count - 1) as f64;
    Ok((0..count)
        .map(|k| lo * libm::exp(step * k as f64))
        .collect())
}

/// `R = 2^{k/2}` for `k = 4..=28`.
pub fn default_dimension_radii() -> Vec<f64> {
    (4..=28).map(|k| libm::pow(2.0, k as f64 / 2.0)).collect()
}

fn check_radii(radii: &[f64], min: usize) -> Result<()> {
    if radii.len() < min {
        bail!(Usage, "need at least {min} radii, got {}", radii.len());
    }
    if radii.iter().any(|r| !(*r > 0.0)) || radii.windows(2).any(|w| w[1] <= w[0]) {
        bail!(Usage, "radii must be positive and strictly increasing");
    }
    Ok(())
}

/// Indices of the top decade `R ≥ R_max / 10`.
fn top_decade(radii: &[f64]) -> core::ops::Range<usize> {
    let cut = radii[radii.len() - 1] / 10.0;
    radii.partition_point(|&r| r < cut)..radii.len()
}

/// `sup_x ν([x, x + R))`.
pub fn sup_window_mass(nu: &Measure, r: f64) -> f64 {
    nu.sup_window_mass(r)
}

fn sup_masses(nu: &Measure, radii: &[f64], shape: WindowShape) -> Vec<f64> {
    let reflected;
    let m = match shape {
        WindowShape::ClosedOpen => nu,
        WindowShape::OpenClosed => {
            reflected = nu.reflect();
            &reflected
        }
    };
    radii.iter().map(|&r| m.sup_window_mass(r)).collect()
}

/// Scan of `sup_x ν(x + RQ) / R^α` over the grid.
pub fn upper_density(nu: &Measure, alpha: f64, radii: &[f64]) -> Result<DensityScan> {
    check_radii(radii, 4)?;
    if !(alpha >= 0.0) {
        bail!(Domain, "alpha = {alpha} must be nonnegative");
    }
    let sup = sup_masses(nu, radii, WindowShape::ClosedOpen);
    Ok(scan_from_masses(alpha, radii, sup))
}

fn scan_from_masses(alpha: f64, radii: &[f64], sup_masses: Vec<f64>) -> DensityScan {
    let ratios: Vec<f64> = radii
        .iter()
        .zip(&sup_masses)
        .map(|(&r, &m)| m / libm::pow(r, alpha))
        .collect();
    let estimate = ratios[top_decade(radii)]
        .iter()
        .copied()
        .fold(0.0, f64::max);
    DensityScan {
        alpha,
        radii: radii.to_vec(),
        sup_masses,
        ratios,
        estimate,
    }
}

/// `min` over the top decade of radii of `inf_{x ∈ hull} ν([x, x + R)) / R`.
///
/// `hull` must sit well inside the support of a truncated measure: windows
/// that leave the truncation are empty and would drive the estimate to 0.
pub fn lower_density(nu: &Measure, radii: &[f64], hull: (f64, f64)) -> Result<f64> {
    check_radii(radii, 1)?;
    let (a, b) = hull;
    let r_max = radii[radii.len() - 1];
    if !(b - a >= r_max) {
        bail!(
            Usage,
            "hull [{a}, {b}] is narrower than the largest radius {r_max}"
        );
    }
    Ok(radii[top_decade(radii)]
        .iter()
        .map(|&r| nu.inf_window_mass(r, a, b) / r)
        .fold(f64::INFINITY, f64::min))
}

/// Median of pairwise slopes of `(x_i, y_i)`.
fn theil_sen(x: &[f64], y: &[f64]) -> Option<f64> {
    let mut slopes = Vec::with_capacity(x.len() * x.len() / 2);
    for i in 0..x.len() {
        for j in i + 1..x.len() {
            if x[j] != x[i] {
                slopes.push((y[j] - y[i]) / (x[j] - x[i]));
            }
        }
    }
    median(&mut slopes)
}

/// Beurling dimension estimate with `[x, x + R)` windows.
pub fn dimension(nu: &Measure, radii: &[f64]) -> Result<DimensionEstimate> {
    dimension_with_shape(nu, radii, WindowShape::ClosedOpen)
}

pub fn dimension_with_shape(
    nu: &Measure,
    radii: &[f64],
    shape: WindowShape,
) -> Result<DimensionEstimate> {
    check_radii(radii, 16)?;
    if libm::log10(radii[radii.len() - 1] / radii[0]) < 2.0 - 1e-9 {
        bail!(Usage, "radii must span at least two decades");
    }
    let degenerate = |range| DimensionEstimate {
        slope: 0.0,
        alpha_lo: 0.0,
        alpha_hi: 0.0,
        fit_range: range,
        residual: 0.0,
        degenerate: true,
    };
    let (atoms, diffuse) = nu.support_summary();
    let q0 = radii.len() / 4;
    let q1 = radii.len() - radii.len() / 4;
    let fit_range = (radii[q0], radii[q1 - 1]);
    if atoms <= 1 && !diffuse {
        return Ok(degenerate(fit_range));
    }
    let sup = sup_masses(nu, radii, shape);
    let (xs, ys): (Vec<f64>, Vec<f64>) = radii
        .iter()
        .zip(&sup)
        .filter(|(_, &m)| m > 0.0)
        .map(|(&r, &m)| (libm::log(r), libm::log(m)))
        .unzip();
    if xs.len() < 2 {
        return Ok(degenerate(fit_range));
    }

    // least squares over the middle half
    let (fx, fy): (Vec<f64>, Vec<f64>) = radii[q0..q1]
        .iter()
        .zip(&sup[q0..q1])
        .filter(|(_, &m)| m > 0.0)
        .map(|(&r, &m)| (libm::log(r), libm::log(m)))
        .unzip();
    if fx.len() < 2 {
        return Ok(degenerate(fit_range));
    }
    let k = fx.len() as f64;
    let mx = fx.iter().sum::<f64>() / k;
    let my = fy.iter().sum::<f64>() / k;
    let sxx: f64 = fx.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = fx.iter().zip(&fy).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let residual = libm::sqrt(
        fx.iter()
            .zip(&fy)
            .map(|(x, y)| {
                let e = y - (my + slope * (x - mx));
                e * e
            })
            .sum::<f64>()
            / k,
    );

    // The ratio sequence sup / R^α "grows" when its median pairwise log-log
    // slope is positive.
    let grows = |alpha: f64| -> bool {
        let logs: Vec<f64> = xs.iter().zip(&ys).map(|(x, y)| y - alpha * x).collect();
        theil_sen(&xs, &logs).unwrap_or(0.0) > 0.0
    };
    let mut lo = 0.0;
    let mut hi = 2.0;
    while grows(hi) {
        hi *= 2.0;
    }
    if !grows(lo) {
        hi = 0.0;
    }
    while hi - lo > 1e-4 {
        let mid = 0.5 * (lo + hi);
        if grows(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(DimensionEstimate {
        slope,
        alpha_lo: lo,
        alpha_hi: hi,
        fit_range,
        residual,
        degenerate: false,
    })
}

/// `Λ_ν(r, δ) = { k r : ν([k r, (k+1) r)) ≥ δ }`.
pub fn lambda_set(nu: &Measure, r: f64, delta: f64) -> Result<Vec<f64>> {
    if !(delta > 0.0) {
        bail!(Domain, "threshold δ = {delta} must be positive");
    }
    let cells = discretize(nu, r, PointRule::Left)?;
    Ok(cells
        .atoms()
        .filter(|&(_, w)| w >= delta)
        .map(|(p, _)| p)
        .collect())
}
