//! Frame bounds of candidate measures on cylinder subspaces.
//!
//! For a no-overlap system `(R, B)` and a level `n`, the step functions
//! `f = Σ_w c_w 1_{cyl(w)}` form an `N^n`-dimensional subspace of `L²(μ_B)`
//! with `‖f‖² = N^{-n} ‖c‖²`. For an atomic candidate `ν = Σ_j d_j δ_{λ_j}`
//!
//! ```text
//! ∫ |(f dμ_B)^|² dν = c* G c,   G_{w,w'} = Σ_j d_j conj(F_w(λ_j)) F_{w'}(λ_j)
//! ```
//!
//! where `F_w(t) = ∫_{cyl(w)} e^{-2πi t x} dμ_B`. The best constants `A, B`
//! in `A ‖f‖² ≤ ∫ |(f dμ)^|² dν ≤ B ‖f‖²` on that subspace are therefore
//! `N^n λ_min(G)` and `N^n λ_max(G)`.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{bail, Result};
use crate::ifs::{AffineIfs, TruncationBudget};
use crate::linalg::{hermitian_extremes, DEFAULT_REL_TOL};
use crate::math::{cis_turns, frac_turns, Denominator};
use crate::measure::{AtomicMeasure, Measure};

pub use crate::linalg::HermitianMatrix;

/// Largest Gram dimension `N^n` accepted.
pub const MAX_GRAM_DIM: usize = 4096;

/// Atoms lighter than this do not enter the Gram matrix.
pub const GRAM_WEIGHT_FLOOR: f64 = 1e-20;

/// Step function on the level-`n` cylinders of an IFS.
#[derive(Clone, Debug, PartialEq)]
pub struct CylinderFunction<'a> {
    ifs: &'a AffineIfs,
    level: usize,
    coefficients: Vec<Complex64>,
}

/// Frame bounds of a candidate measure restricted to one cylinder level.
#[derive(Clone, Debug, PartialEq)]
pub struct FrameReport {
    pub level: usize,
    pub lower: f64,
    pub upper: f64,
    /// Truncation parameter of the candidate, when it has one.
    pub lambda_truncation: Option<f64>,
    /// `min(0, λ_min(G))` scaled like the bounds; how far `G` is from PSD.
    pub psd_residual: f64,
    pub hermitian_residual: f64,
    pub eigen_residual: f64,
}

impl<'a> CylinderFunction<'a> {
    pub fn new(ifs: &'a AffineIfs, level: usize, coefficients: Vec<Complex64>) -> Result<Self> {
        ifs.require_no_overlap()?;
        let dim = ifs.digit_count().pow(level as u32);
        if coefficients.len() != dim {
            bail!(
                Usage,
                "level {level} needs {dim} coefficients, got {}",
                coefficients.len()
            );
        }
        Ok(CylinderFunction {
            ifs,
            level,
            coefficients,
        })
    }

    /// The constant function 1.
    pub fn one(ifs: &'a AffineIfs) -> Result<Self> {
        CylinderFunction::new(ifs, 0, vec![Complex64::new(1.0, 0.0)])
    }

    /// Indicator of the cylinder of one word.
    pub fn indicator(ifs: &'a AffineIfs, word: &[i64]) -> Result<Self> {
        let words = ifs.words(word.len());
        let idx = words
            .iter()
            .position(|w| w.digits() == word)
            .ok_or_else(|| crate::Error::Domain(alloc::format!("{word:?} is not a word over B")))?;
        let mut c = vec![Complex64::new(0.0, 0.0); words.len()];
        c[idx] = Complex64::new(1.0, 0.0);
        CylinderFunction::new(ifs, word.len(), c)
    }

    pub fn ifs(&self) -> &AffineIfs {
        self.ifs
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    /// `‖f‖²_{L²(μ)} = N^{-n} Σ |c_w|²`.
    pub fn norm_sqr(&self) -> f64 {
        let s: f64 = self.coefficients.iter().map(|c| c.norm_sqr()).sum();
        s * libm::pow(self.ifs.digit_count() as f64, -(self.level as f64))
    }

    /// `αf + βg` on a common level (both are lifted to the finer one).
    pub fn combine(&self, alpha: Complex64, other: &Self, beta: Complex64) -> Result<Self> {
        if self.ifs != other.ifs {
            bail!(Usage, "cylinder functions live on different systems");
        }
        let level = self.level.max(other.level);
        let a = self.lift(level);
        let b = other.lift(level);
        let c = a
            .coefficients
            .iter()
            .zip(&b.coefficients)
            .map(|(x, y)| alpha * x + beta * y)
            .collect();
        CylinderFunction::new(self.ifs, level, c)
    }

    /// The same function written on level `level ≥ self.level`.
    pub fn lift(&self, level: usize) -> Self {
        assert!(level >= self.level);
        let rep = self.ifs.digit_count().pow((level - self.level) as u32);
        let coefficients = self
            .coefficients
            .iter()
            .flat_map(|&c| core::iter::repeat_n(c, rep))
            .collect();
        CylinderFunction {
            ifs: self.ifs,
            level,
            coefficients,
        }
    }

    /// Value at a point `x = Σ R^{-k} b_k` given by its first `level` digits.
    pub fn value_at_digits(&self, digits: &[i64]) -> Result<Complex64> {
        if digits.len() < self.level {
            bail!(Usage, "need {} digits", self.level);
        }
        let nd = self.ifs.digit_count();
        let mut idx = 0;
        for &d in &digits[..self.level] {
            let pos = self
                .ifs
                .digits()
                .binary_search(&d)
                .map_err(|_| crate::Error::Domain(alloc::format!("digit {d} not in B")))?;
            idx = idx * nd + pos;
        }
        Ok(self.coefficients[idx])
    }

    /// `(f dμ_B)^(t) = Σ_w c_w F_w(t)`.
    pub fn fourier_transform(&self, t: f64, budget: &TruncationBudget) -> Complex64 {
        let nums = self
            .ifs
            .anchor_numerators(self.level)
            .expect("level fits: coefficients were allocated for it");
        let den = Denominator::power(self.ifs.scale(), self.level as u32);
        let sum: Complex64 = self
            .coefficients
            .iter()
            .zip(&nums)
            .filter(|(c, _)| c.norm_sqr() > 0.0)
            .map(|(c, &a)| c * cis_turns(-frac_turns(t, a, den)))
            .sum();
        let mass = libm::pow(self.ifs.digit_count() as f64, -(self.level as f64));
        sum * mass * self.ifs.ft_scaled(t, self.level as u32, budget)
    }
}

/// Rank-one accumulation of a Gram matrix, one atom at a time.
///
/// Accumulators over disjoint atom sets can be merged, so assembly splits
/// across threads with a final matrix sum.
#[derive(Clone, Debug)]
pub struct GramAccumulator<'a> {
    ifs: &'a AffineIfs,
    level: usize,
    budget: TruncationBudget,
    numerators: Vec<i128>,
    denominator: Denominator,
    modulation: f64,
    matrix: HermitianMatrix,
    scratch: Vec<Complex64>,
}

impl<'a> GramAccumulator<'a> {
    pub fn new(ifs: &'a AffineIfs, level: usize, budget: TruncationBudget) -> Result<Self> {
        Self::with_modulation(ifs, level, budget, 0.0)
    }

    /// Gram matrix of the modulated subspace `{e_{-s} f}` instead of the
    /// plain cylinder subspace: `F_w(λ)` is replaced by `F_w(λ + s)`
    /// with the phase `e^{-2πi s a_w}` removed.
    pub fn with_modulation(
        ifs: &'a AffineIfs,
        level: usize,
        budget: TruncationBudget,
        s: f64,
    ) -> Result<Self> {
        ifs.require_no_overlap()?;
        let dim = ifs
            .digit_count()
            .checked_pow(level as u32)
            .filter(|&d| d <= MAX_GRAM_DIM)
            .ok_or_else(|| {
                crate::Error::Size(alloc::format!(
                    "N^n = {}^{level} exceeds the Gram limit {MAX_GRAM_DIM}",
                    ifs.digit_count()
                ))
            })?;
        Ok(GramAccumulator {
            ifs,
            level,
            budget,
            numerators: ifs.anchor_numerators(level)?,
            denominator: Denominator::power(ifs.scale(), level as u32),
            modulation: s,
            matrix: HermitianMatrix::zeros(dim),
            scratch: vec![Complex64::new(0.0, 0.0); dim],
        })
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// Add `d |F(λ)><F(λ)|`.
    pub fn add_atom(&mut self, lambda: f64, weight: f64) {
        if weight < GRAM_WEIGHT_FLOOR {
            return;
        }
        let mass = libm::pow(self.ifs.digit_count() as f64, -(self.level as f64));
        let common = self
            .ifs
            .ft_scaled(lambda + self.modulation, self.level as u32, &self.budget)
            * mass;
        for (slot, &a) in self.scratch.iter_mut().zip(&self.numerators) {
            *slot = common * cis_turns(-frac_turns(lambda, a, self.denominator));
        }
        let n = self.scratch.len();
        let data = self.matrix.as_mut_slice();
        for i in 0..n {
            let left = self.scratch[i].conj() * weight;
            let row = &mut data[i * n..(i + 1) * n];
            for (entry, right) in row.iter_mut().zip(&self.scratch) {
                *entry += left * right;
            }
        }
    }

    pub fn add_measure(&mut self, nu: &AtomicMeasure) {
        for (lambda, w) in nu.atoms() {
            self.add_atom(lambda, w);
        }
    }

    pub fn merge(&mut self, other: &GramAccumulator<'_>) {
        self.matrix.add_assign(&other.matrix);
    }

    pub fn finish(self) -> HermitianMatrix {
        self.matrix
    }
}

/// Gram matrix of `ν` on the level-`n` cylinder subspace of `μ_B`.
pub fn gram_matrix(
    ifs: &AffineIfs,
    n: usize,
    nu: &AtomicMeasure,
    budget: &TruncationBudget,
) -> Result<HermitianMatrix> {
    let mut acc = GramAccumulator::new(ifs, n, *budget)?;
    acc.add_measure(nu);
    Ok(acc.finish())
}

/// Frame bounds `A_n = N^n λ_min(G)`, `B_n = N^n λ_max(G)` from an assembled
/// Gram matrix.
pub fn frame_report_from_gram(
    ifs: &AffineIfs,
    level: usize,
    gram: &HermitianMatrix,
    lambda_truncation: Option<f64>,
) -> Result<FrameReport> {
    let ext = hermitian_extremes(gram, DEFAULT_REL_TOL)?;
    let scale = libm::pow(ifs.digit_count() as f64, level as f64);
    let psd_residual = (ext.lambda_min * scale).min(0.0);
    Ok(FrameReport {
        level,
        lower: (ext.lambda_min * scale).max(0.0),
        upper: (ext.lambda_max * scale).max(0.0),
        lambda_truncation,
        psd_residual,
        hermitian_residual: gram.hermitian_residual(),
        eigen_residual: ext.residual_min.max(ext.residual_max),
    })
}

pub fn frame_bounds(
    ifs: &AffineIfs,
    n: usize,
    nu: &AtomicMeasure,
    budget: &TruncationBudget,
) -> Result<FrameReport> {
    let g = gram_matrix(ifs, n, nu, budget)?;
    frame_report_from_gram(ifs, n, &g, None)
}

/// The weighted Fourier frame `{√d_j e_{λ_j}}` of an atomic measure, as
/// `(√d_j, λ_j)` pairs with zero weights dropped.
pub fn weighted_frame(nu: &AtomicMeasure) -> Vec<(f64, f64)> {
    nu.atoms()
        .filter(|&(_, w)| w > 0.0)
        .map(|(p, w)| (libm::sqrt(w), p))
        .collect()
}

/// Rebuild `Σ c_j² δ_{λ_j}` from weighted frame pairs.
pub fn measure_from_frame(pairs: &[(f64, f64)]) -> AtomicMeasure {
    AtomicMeasure::from_pairs_unchecked(pairs.iter().map(|&(c, p)| (p, c * c)).collect())
}

/// Sub-cells per density bin in the probe quadrature.
pub const PROBE_SUBDIVISION: usize = 16;

/// `sin²(πu) / (πu)²`, equal to 1 near `u = 0`.
pub fn sinc_sqr(u: f64) -> f64 {
    if libm::fabs(u) < 1e-8 {
        return 1.0;
    }
    let s = libm::sin(core::f64::consts::PI * u) / (core::f64::consts::PI * u);
    s * s
}

/// `∫ sin²(π(T + t)) / (π²(T + t)²) dν(t)`.
///
/// This is `‖(g_T dμ)^‖²_{L²(ν)}` for `μ = 1_[0,1] dx + δ_2` and the unit
/// vector `g_T = e_{-T} 1_[0,1]`. Atoms are summed exactly; density bins use
/// composite midpoint quadrature with [`PROBE_SUBDIVISION`] cells per bin.
pub fn counterexample_probe(nu: &Measure, t_shift: f64) -> f64 {
    fn go(m: &Measure, t_shift: f64) -> f64 {
        match m {
            Measure::Atomic(a) => a.atoms().map(|(x, w)| w * sinc_sqr(t_shift + x)).sum(),
            Measure::Density(d) => {
                let h = d.bin_width() / PROBE_SUBDIVISION as f64;
                d.masses()
                    .iter()
                    .enumerate()
                    .filter(|(_, &m)| m > 0.0)
                    .map(|(i, &m)| {
                        let left = d.start() + i as f64 * d.bin_width();
                        let s: f64 = (0..PROBE_SUBDIVISION)
                            .map(|j| sinc_sqr(t_shift + left + (j as f64 + 0.5) * h))
                            .sum();
                        m * s / PROBE_SUBDIVISION as f64
                    })
                    .sum()
            }
            Measure::Sum(parts) => parts.iter().map(|p| go(p, t_shift)).sum(),
        }
    }
    go(nu, t_shift)
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecayCertificate {
    pub rows: Vec<(f64, f64)>,
    /// Probe values strictly decrease along the grid.
    pub monotone: bool,
    /// `probe(T_last) / probe(T_first)`.
    pub decay_ratio: f64,
}

/// Probe table over a grid of shifts. A decreasing trend towards 0 means the
/// unit vectors `g_T` force the lower frame bound of `ν` to 0.
pub fn lower_bound_decay_certificate(nu: &Measure, t_grid: &[f64]) -> DecayCertificate {
    let rows: Vec<(f64, f64)> = t_grid
        .iter()
        .map(|&t| (t, counterexample_probe(nu, t)))
        .collect();
    let monotone = rows.windows(2).all(|w| w[1].1 < w[0].1);
    let decay_ratio = match (rows.first(), rows.last()) {
        (Some(a), Some(b)) if a.1 > 0.0 => b.1 / a.1,
        _ => f64::NAN,
    };
    DecayCertificate {
        rows,
        monotone,
        decay_ratio,
    }
}
