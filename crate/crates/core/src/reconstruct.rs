//! Digit splits `B ⊕ C = D` and Fourier reconstruction.
//!
//! When `B ⊕ C = D` is a complete residue system mod `R`, the map
//! `(x, y) -> x + y` from `X_B × X_C` to `X_D` pushes `μ_B × μ_C` to `μ_D`.
//! Its partial inverse `p(x + y) = x` splits each `D`-digit into its
//! `B`-part, and `f -> f ∘ p` is an isometry `L²(μ_B) -> L²(μ_D)`. For the
//! canonical tiles `μ_D` is Lebesgue measure on an interval, which gives the
//! reconstruction formula
//!
//! ```text
//! f(t) = ∫ (f dμ_B)^(x) μ̂_C(x) e^{2πi t x} dx.
//! ```

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{bail, Result};
use crate::frame::CylinderFunction;
use crate::ifs::{AffineIfs, TruncationBudget};
use crate::math::cis_turns;

/// Default number of `D`-digits extracted by [`SplitSystem::project_p`].
pub const DEFAULT_DEPTH: usize = 40;

/// Points closer than this to a discontinuity of `f ∘ p` are flagged.
pub const BOUNDARY_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct SplitSystem {
    base: AffineIfs,
    complement: AffineIfs,
    combined: AffineIfs,
    // (d, b, c), sorted by d
    table: Vec<(i64, i64, i64)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReconstructionReport {
    pub t: f64,
    pub value: Complex64,
    pub cutoff: f64,
    pub step: f64,
    /// `|Q_{h/2} - Q_h| / 3` for the midpoint rule.
    pub richardson_residual: f64,
    /// Distance from `t` to the nearest cylinder edge of `f ∘ p`.
    pub boundary_distance: f64,
    pub near_boundary: bool,
}

impl SplitSystem {
    pub fn new(base: AffineIfs, complement: AffineIfs) -> Result<Self> {
        let r = base.scale();
        if complement.scale() != r {
            bail!(Domain, "scales differ: {} vs {}", r, complement.scale());
        }
        let mut table = Vec::with_capacity(base.digit_count() * complement.digit_count());
        for &b in base.digits() {
            for &c in complement.digits() {
                table.push((b + c, b, c));
            }
        }
        if table.len() as i64 != r {
            bail!(
                Domain,
                "#B * #C = {} but R = {r}; B ⊕ C cannot be a complete residue system",
                table.len()
            );
        }
        let mut residues: Vec<i64> = table.iter().map(|t| t.0.rem_euclid(r)).collect();
        residues.sort_unstable();
        if residues.windows(2).any(|w| w[0] == w[1]) {
            bail!(Domain, "B ⊕ C is not a complete residue system mod {r}");
        }
        table.sort_unstable();
        let d: Vec<i64> = table.iter().map(|t| t.0).collect();
        let combined = AffineIfs::new(r, &d)?;
        Ok(SplitSystem {
            base,
            complement,
            combined,
            table,
        })
    }

    pub fn base(&self) -> &AffineIfs {
        &self.base
    }

    pub fn complement(&self) -> &AffineIfs {
        &self.complement
    }

    /// The `D = B ⊕ C` system.
    pub fn combined(&self) -> &AffineIfs {
        &self.combined
    }

    /// `d -> (b, c)`.
    pub fn split_digit(&self, d: i64) -> Option<(i64, i64)> {
        self.table
            .binary_search_by_key(&d, |t| t.0)
            .ok()
            .map(|i| (self.table[i].1, self.table[i].2))
    }

    /// Greedy base-`R` expansion of `z` with digits in `D`; at each step the
    /// largest digit keeping the remainder inside the hull of `X_D` is used.
    pub fn d_digits(&self, z: f64, depth: usize) -> Result<Vec<i64>> {
        let (lo, hi) = self.combined.hull();
        let eps = 1e-9 * lo.abs().max(hi.abs()).max(1.0);
        if !(z >= lo - eps && z <= hi + eps) {
            bail!(Domain, "{z} lies outside the hull [{lo}, {hi}] of X_D");
        }
        let r = self.combined.scale() as f64;
        let mut rem = z;
        let mut out = Vec::with_capacity(depth);
        for _ in 0..depth {
            let y = rem * r;
            let d = self
                .combined
                .digits()
                .iter()
                .rev()
                .copied()
                .find(|&d| {
                    let next = y - d as f64;
                    next >= lo - eps && next <= hi + eps
                })
                .ok_or_else(|| {
                    crate::Error::Domain(alloc::format!("{z} is not in X_D to depth {depth}"))
                })?;
            out.push(d);
            rem = (y - d as f64).clamp(lo, hi);
        }
        Ok(out)
    }

    /// `p(z) = Σ R^{-k} b_k` where `z = Σ R^{-k} d_k` and `d_k = b_k + c_k`.
    pub fn project_p(&self, z: f64, depth: usize) -> Result<f64> {
        let ds = self.d_digits(z, depth)?;
        let r = self.base.scale() as f64;
        Ok(ds
            .iter()
            .rev()
            .fold(0.0, |x, &d| (x + self.split_digit(d).unwrap().0 as f64) / r))
    }

    /// `(f ∘ p)(z)`.
    pub fn pull_back(&self, f: &CylinderFunction<'_>, z: f64) -> Result<Complex64> {
        let ds = self.d_digits(z, f.level().max(1))?;
        let bs: Vec<i64> = ds.iter().map(|&d| self.split_digit(d).unwrap().0).collect();
        f.value_at_digits(&bs)
    }

    /// Distance from `t` to the nearest edge of a level-`n` cylinder hull of
    /// `X_D`, where `f ∘ p` may jump.
    pub fn boundary_distance(&self, t: f64, level: usize) -> f64 {
        let d = &self.combined;
        let (lo, hi) = d.hull();
        let mut best = (t - lo).abs().min((t - hi).abs());
        if level == 0 {
            return best;
        }
        let shrink = libm::pow(d.scale() as f64, -(level as f64));
        for w in d.words(level) {
            let a = d.anchor(&w);
            best = best
                .min((t - (a + shrink * lo)).abs())
                .min((t - (a + shrink * hi)).abs());
        }
        best
    }
}

fn midpoint_rule<F: Fn(f64) -> Complex64>(integrand: &F, cutoff: f64, step: f64) -> Complex64 {
    let nodes = libm::ceil(2.0 * cutoff / step - 1e-9) as usize;
    let h = 2.0 * cutoff / nodes as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..nodes {
        acc += integrand(-cutoff + (i as f64 + 0.5) * h);
    }
    acc * h
}

/// `∫_{-X}^{X} (f dμ_B)^(x) μ̂_C(x) e^{2πitx} dx` by the composite midpoint
/// rule. Accuracy is reported, not asserted.
pub fn fourier_reconstruct(
    sys: &SplitSystem,
    f: &CylinderFunction<'_>,
    t: f64,
    cutoff: f64,
    step: f64,
    budget: &TruncationBudget,
) -> Result<ReconstructionReport> {
    if f.ifs() != sys.base() {
        bail!(Usage, "f must be a cylinder function of the base system");
    }
    if !(cutoff > 0.0) || !(step > 0.0) {
        bail!(Domain, "cutoff and step must be positive");
    }
    let integrand = |x: f64| {
        f.fourier_transform(x, budget) * sys.complement.ft_invariant(x, budget) * cis_turns(t * x)
    };
    let coarse = midpoint_rule(&integrand, cutoff, step);
    let fine = midpoint_rule(&integrand, cutoff, 0.5 * step);
    let boundary_distance = sys.boundary_distance(t, f.level());
    Ok(ReconstructionReport {
        t,
        value: coarse,
        cutoff,
        step,
        richardson_residual: (fine - coarse).norm() / 3.0,
        boundary_distance,
        near_boundary: boundary_distance < BOUNDARY_TOL,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn canonical() -> SplitSystem {
        SplitSystem::new(
            AffineIfs::new(4, &[0, 2]).unwrap(),
            AffineIfs::new(4, &[0, 1]).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn construction() {
        let s = canonical();
        assert_eq!(s.combined().digits(), &[0, 1, 2, 3]);
        assert_eq!(s.split_digit(3), Some((2, 1)));
        assert_eq!(s.split_digit(5), None);
        assert!(SplitSystem::new(
            AffineIfs::new(4, &[0, 2]).unwrap(),
            AffineIfs::new(4, &[0, 2]).unwrap()
        )
        .is_err());
        assert!(SplitSystem::new(
            AffineIfs::new(4, &[0, 2]).unwrap(),
            AffineIfs::new(5, &[0, 1]).unwrap()
        )
        .is_err());
        assert!(SplitSystem::new(
            AffineIfs::new(4, &[0, 2]).unwrap(),
            AffineIfs::new(4, &[0]).unwrap()
        )
        .is_err());
    }

    #[test]
    fn project_examples() {
        let s = canonical();
        assert_eq!(s.d_digits(0.75, 3).unwrap(), alloc::vec![3, 0, 0]);
        assert_eq!(s.project_p(0.75, DEFAULT_DEPTH).unwrap(), 0.5);
        assert_eq!(s.project_p(0.0, DEFAULT_DEPTH).unwrap(), 0.0);
        assert!(matches!(
            s.project_p(1.5, DEFAULT_DEPTH),
            Err(crate::Error::Domain(_))
        ));
        // z = 0.1 (base 4: 0.0121..) -> digits 0,1,2,1 -> B parts 0,0,2,0
        let ds = s.d_digits(0.1, 4).unwrap();
        assert_eq!(ds, alloc::vec![0, 1, 2, 1]);
    }

    #[test]
    fn projection_lands_in_base_attractor() {
        let s = canonical();
        let base = s.base().clone();
        for k in 0..50 {
            let z = k as f64 / 50.0 + 0.003;
            let x = s.project_p(z, DEFAULT_DEPTH).unwrap();
            let ds = s.d_digits(z, 20).unwrap();
            let bs: alloc::vec::Vec<i64> =
                ds.iter().map(|&d| s.split_digit(d).unwrap().0).collect();
            let direct = base.encode(&bs, 20).unwrap();
            assert!((x - direct).abs() < 1e-11);
        }
    }

    #[test]
    fn boundary_flags() {
        let s = canonical();
        assert_eq!(s.boundary_distance(0.5, 0), 0.5);
        assert!(s.boundary_distance(0.5, 1) < 1e-15);
        assert!((s.boundary_distance(0.3, 1) - 0.05).abs() < 1e-15);
    }
}
