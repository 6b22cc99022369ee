//! Affine iterated function systems `τ_b(x) = (x + b) / R` on the line.
//!
//! An [`AffineIfs`] is an integer scale `R ≥ 2` with an integer digit set `B`.
//! Its invariant probability measure `μ_B` gives each level-`n` cylinder
//! `τ_{b_1} ∘ … ∘ τ_{b_n}(X_B)` mass `N^{-n}` as long as the first-level images
//! do not overlap, which for integer digits on the line is guaranteed when the
//! digits are pairwise distinct modulo `R`. Cylinder and frame operations
//! refuse systems without that property.
//!
//! The Fourier transform `μ̂_B(t) = Π_{k≥1} m_B(t / R^k)` with
//! `m_B(s) = N^{-1} Σ_b e^{-2πi s b}` is evaluated by truncating the product at a
//! depth chosen from an explicit tail bound, so every value carries a
//! certified absolute error.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{bail, Result};
use crate::math::{cis_turns, frac_turns, Denominator, TAU};
use crate::measure::AtomicMeasure;

/// Weights below this are dropped from dual measures.
pub const DUAL_WEIGHT_FLOOR: f64 = 1e-20;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AffineIfs {
    scale: i64,
    digits: Vec<i64>,
    distinct_mod_r: bool,
}

/// Finite digit word `b_1 … b_n`, most significant digit first.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Word(Vec<i64>);

/// Absolute error target for the truncated infinite product.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TruncationBudget {
    tol: f64,
}

/// Exact cylinder mass `N^{-level}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CylinderMass {
    pub base: u64,
    pub level: u32,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cylinder {
    pub lo: f64,
    pub hi: f64,
    pub mass: CylinderMass,
}

impl CylinderMass {
    pub fn to_f64(self) -> f64 {
        libm::pow(self.base as f64, -(self.level as f64))
    }
}

impl TruncationBudget {
    pub fn new(tol: f64) -> Result<Self> {
        if !(tol > 0.0) || !tol.is_finite() {
            bail!(Domain, "truncation tolerance {tol} must be positive");
        }
        Ok(TruncationBudget { tol })
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    /// Smallest `K` with `exp(2π max|b| |t| R^{-K} / (R - 1)) - 1 < tol`.
    ///
    /// Since `|m_B(s) - 1| ≤ 2π max|b| |s|`, the neglected factors
    /// `Π_{k>K} m_B(t/R^k)` differ from 1 by at most that quantity, and the
    /// kept partial product has modulus at most 1.
    pub fn depth(&self, ifs: &AffineIfs, t: f64) -> u32 {
        let c = TAU * ifs.max_abs_digit() as f64 * libm::fabs(t) / (ifs.scale - 1) as f64;
        if c == 0.0 {
            return 0;
        }
        // exp(x) - 1 < tol  <=>  x < ln(1 + tol)
        let limit = libm::log1p(self.tol);
        let r = ifs.scale as f64;
        let mut k = libm::ceil(libm::log(c / limit) / libm::log(r)).max(0.0) as u32;
        while k > 0 && c * libm::pow(r, -((k - 1) as f64)) < limit {
            k -= 1;
        }
        while c * libm::pow(r, -(k as f64)) >= limit {
            k += 1;
        }
        k
    }
}

impl Default for TruncationBudget {
    fn default() -> Self {
        TruncationBudget { tol: 1e-12 }
    }
}

impl Word {
    pub fn new(ifs: &AffineIfs, digits: Vec<i64>) -> Result<Self> {
        if let Some(d) = digits.iter().find(|d| ifs.digit_index(**d).is_none()) {
            bail!(Domain, "digit {d} is not in B = {:?}", ifs.digits);
        }
        Ok(Word(digits))
    }

    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn digits(&self) -> &[i64] {
        &self.0
    }

    pub fn level(&self) -> usize {
        self.0.len()
    }
}

impl AffineIfs {
    pub fn new(scale: i64, digits: &[i64]) -> Result<Self> {
        if scale < 2 {
            bail!(Domain, "scale R = {scale} must be at least 2");
        }
        if digits.is_empty() {
            bail!(Domain, "digit set must be nonempty");
        }
        if digits.iter().any(|d| d.unsigned_abs() > 1 << 40) {
            bail!(Domain, "digits must be bounded by 2^40 in magnitude");
        }
        let mut sorted = digits.to_vec();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            bail!(Domain, "digit set {digits:?} has duplicates");
        }
        if sorted.len() as i64 > scale {
            bail!(
                Domain,
                "{} digits exceed the scale R = {scale}",
                sorted.len()
            );
        }
        let mut residues: Vec<i64> = sorted.iter().map(|b| b.rem_euclid(scale)).collect();
        residues.sort_unstable();
        let distinct_mod_r = residues.windows(2).all(|w| w[0] != w[1]);
        Ok(AffineIfs {
            scale,
            digits: sorted,
            distinct_mod_r,
        })
    }

    pub fn scale(&self) -> i64 {
        self.scale
    }

    pub fn digits(&self) -> &[i64] {
        &self.digits
    }

    /// `N = #B`.
    pub fn digit_count(&self) -> usize {
        self.digits.len()
    }

    pub fn distinct_mod_r(&self) -> bool {
        self.distinct_mod_r
    }

    fn digit_index(&self, d: i64) -> Option<usize> {
        self.digits.binary_search(&d).ok()
    }

    fn max_abs_digit(&self) -> i64 {
        self.digits.iter().map(|d| d.abs()).max().unwrap_or(0)
    }

    /// `[min X_B, max X_B] = [min B, max B] / (R - 1)`.
    pub fn hull(&self) -> (f64, f64) {
        let r1 = (self.scale - 1) as f64;
        (
            self.digits[0] as f64 / r1,
            self.digits[self.digits.len() - 1] as f64 / r1,
        )
    }

    pub(crate) fn require_no_overlap(&self) -> Result<()> {
        if !self.distinct_mod_r {
            bail!(
                Unsupported,
                "digits {:?} are not distinct modulo R = {}; cylinder analysis needs the no-overlap regime",
                self.digits,
                self.scale
            );
        }
        Ok(())
    }

    /// All level-`n` words, lexicographic in digit order with the most
    /// significant digit first. This fixes the matrix indexing used by the
    /// frame module.
    pub fn words(&self, n: usize) -> Vec<Word> {
        let nd = self.digits.len();
        let total = nd.pow(n as u32);
        (0..total)
            .map(|mut idx| {
                let mut w = vec![0; n];
                for slot in w.iter_mut().rev() {
                    *slot = self.digits[idx % nd];
                    idx /= nd;
                }
                Word(w)
            })
            .collect()
    }

    /// Integer numerators `A_w = Σ_k b_k R^{n-k}` of the level-`n` anchors
    /// `a_w = A_w / R^n`, in [`words`](Self::words) order.
    pub(crate) fn anchor_numerators(&self, n: usize) -> Result<Vec<i128>> {
        if (self.scale as i128).checked_pow(n as u32 + 1).is_none() {
            bail!(Size, "R^{n} overflows the anchor arithmetic");
        }
        let mut out = vec![0i128];
        for _ in 0..n {
            let mut next = Vec::with_capacity(out.len() * self.digits.len());
            for &a in &out {
                for &b in &self.digits {
                    next.push(a * self.scale as i128 + b as i128);
                }
            }
            out = next;
        }
        Ok(out)
    }

    /// `Σ_{k ≤ depth} R^{-k} b_k`. With `0 ∈ B` the word is padded by zeros up
    /// to `depth`; otherwise `depth` must equal the word length.
    pub fn encode(&self, digits: &[i64], depth: usize) -> Result<f64> {
        if let Some(d) = digits.iter().find(|d| self.digit_index(**d).is_none()) {
            bail!(Domain, "digit {d} is not in B = {:?}", self.digits);
        }
        if depth < digits.len() {
            bail!(Usage, "depth {depth} is shorter than the word");
        }
        if depth > digits.len() && self.digit_index(0).is_none() {
            bail!(
                Domain,
                "zero padding to depth {depth} requires 0 in B = {:?}",
                self.digits
            );
        }
        let r = self.scale as f64;
        Ok(digits.iter().rev().fold(0.0, |x, &b| (x + b as f64) / r))
    }

    /// Anchor `a_w = Σ R^{-k} b_k` of a word.
    pub fn anchor(&self, w: &Word) -> f64 {
        let r = self.scale as f64;
        w.0.iter().rev().fold(0.0, |x, &b| (x + b as f64) / r)
    }

    /// Hull interval and exact `μ_B` mass of the cylinder of `w`.
    pub fn cylinder_interval(&self, w: &Word) -> Result<Cylinder> {
        self.require_no_overlap()?;
        let n = w.level();
        let a = self.anchor(w);
        let shrink = libm::pow(self.scale as f64, -(n as f64));
        let (lo, hi) = self.hull();
        Ok(Cylinder {
            lo: a + shrink * lo,
            hi: a + shrink * hi,
            mass: CylinderMass {
                base: self.digits.len() as u64,
                level: n as u32,
            },
        })
    }

    /// The mask `m_B(t / R^k)`.
    fn mask_at_level(&self, t: f64, k: u32) -> Complex64 {
        let den = Denominator::power(self.scale, k);
        let mut acc = Complex64::new(0.0, 0.0);
        for &b in &self.digits {
            acc += cis_turns(-frac_turns(t, b as i128, den));
        }
        acc / self.digits.len() as f64
    }

    /// `μ̂_B(t / R^shift)`, evaluated with exact integer phase reduction
    /// when `t` is an integer.
    pub(crate) fn ft_scaled(&self, t: f64, shift: u32, budget: &TruncationBudget) -> Complex64 {
        let r = libm::pow(self.scale as f64, shift as f64);
        let depth = budget.depth(self, t / r);
        let mut acc = Complex64::new(1.0, 0.0);
        for k in 1..=depth {
            acc *= self.mask_at_level(t, shift + k);
        }
        acc
    }

    /// `μ̂_B(t) = ∫ e^{-2πi t x} dμ_B(x)` with absolute error at most
    /// `budget.tol()`.
    pub fn ft_invariant(&self, t: f64, budget: &TruncationBudget) -> Complex64 {
        self.ft_scaled(t, 0, budget)
    }

    /// `∫_{cyl(w)} e^{-2πi t x} dμ_B(x) = N^{-n} e^{-2πi t a_w} μ̂_B(t / R^n)`.
    pub fn ft_cylinder(&self, w: &Word, t: f64, budget: &TruncationBudget) -> Result<Complex64> {
        self.require_no_overlap()?;
        let n = w.level() as u32;
        let numerator = w.0.iter().try_fold(0i128, |a, &b| {
            a.checked_mul(self.scale as i128)?.checked_add(b as i128)
        });
        let phase = match numerator {
            Some(num) => cis_turns(-frac_turns(t, num, Denominator::power(self.scale, n))),
            None => cis_turns(-t * self.anchor(w)),
        };
        let mass = libm::pow(self.digits.len() as f64, -(n as f64));
        Ok(self.ft_scaled(t, n, budget) * phase * mass)
    }

    /// Digit sets `C ⊆ {0, …, c_max}` with `#C = R / N` such that `B ⊕ C` is a
    /// complete residue system mod `R`, in lexicographic order.
    pub fn find_complement(&self, c_max: i64) -> Vec<Vec<i64>> {
        let r = self.scale;
        let n = self.digits.len() as i64;
        let mut out = Vec::new();
        if r % n != 0 || !self.distinct_mod_r || c_max < 0 {
            return out;
        }
        let size = (r / n) as usize;
        let residues: Vec<i64> = self.digits.iter().map(|b| b.rem_euclid(r)).collect();
        let mut covered = vec![false; r as usize];
        let mut chosen = Vec::with_capacity(size);
        self.complement_search(
            0,
            c_max,
            size,
            &residues,
            &mut covered,
            &mut chosen,
            &mut out,
        );
        out
    }

    #[allow(clippy::too_many_arguments)]
    fn complement_search(
        &self,
        from: i64,
        c_max: i64,
        size: usize,
        residues: &[i64],
        covered: &mut [bool],
        chosen: &mut Vec<i64>,
        out: &mut Vec<Vec<i64>>,
    ) {
        if chosen.len() == size {
            out.push(chosen.clone());
            return;
        }
        let r = self.scale;
        let remaining = (size - chosen.len()) as i64;
        let mut c = from;
        while c <= c_max - (remaining - 1) {
            let hits: Vec<usize> = residues
                .iter()
                .map(|b| (b + c).rem_euclid(r) as usize)
                .collect();
            if hits.iter().all(|&h| !covered[h]) {
                for &h in &hits {
                    covered[h] = true;
                }
                chosen.push(c);
                self.complement_search(c + 1, c_max, size, residues, covered, chosen, out);
                chosen.pop();
                for &h in &hits {
                    covered[h] = false;
                }
            }
            c += 1;
        }
    }

    /// `ν = Σ_γ |μ̂(γ)|² δ_γ` over the given frequencies, `self` being the
    /// complement system. Weights below [`DUAL_WEIGHT_FLOOR`] are dropped.
    pub fn dual_weights(&self, frequencies: &[f64], budget: &TruncationBudget) -> AtomicMeasure {
        let pairs = frequencies
            .iter()
            .map(|&g| (g, self.ft_invariant(g, budget).norm_sqr()))
            .filter(|&(_, w)| w >= DUAL_WEIGHT_FLOOR)
            .collect();
        AtomicMeasure::from_pairs_unchecked(pairs)
    }

    /// Dual weights on the integers of `[-lambda, lambda]`.
    pub fn dual_weights_integers(&self, lambda: i64, budget: &TruncationBudget) -> AtomicMeasure {
        let freqs: Vec<f64> = (-lambda..=lambda).map(|k| k as f64).collect();
        self.dual_weights(&freqs, budget)
    }

    /// `count` points of `μ_B`, each the encoding of `depth` i.i.d. uniform
    /// digits drawn from ChaCha8 seeded with `seed`.
    pub fn sample_invariant(&self, depth: usize, count: usize, seed: u64) -> Result<Vec<f64>> {
        if depth == 0 || count == 0 {
            bail!(Usage, "depth and count must be positive");
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let r = self.scale as f64;
        let nd = self.digits.len();
        let mut word = vec![0i64; depth];
        Ok((0..count)
            .map(|_| {
                for slot in word.iter_mut() {
                    *slot = self.digits[rng.gen_range(0..nd)];
                }
                word.iter().rev().fold(0.0, |x, &b| (x + b as f64) / r)
            })
            .collect())
    }

    /// `max_{0 < |m| ≤ m_max} |μ̂(m)|`: how far the integer exponentials are
    /// from orthogonal in `L²(μ)`. Zero up to tolerance when `ℤ` is a spectrum.
    pub fn integer_spectrum_residual(&self, m_max: i64, budget: &TruncationBudget) -> f64 {
        (1..=m_max)
            .flat_map(|m| [m, -m])
            .map(|m| self.ft_invariant(m as f64, budget).norm())
            .fold(0.0, f64::max)
    }
}
