//! Finite Borel measures on the line.
//!
//! Two concrete shapes are supported: finitely many weighted atoms, and a
//! piecewise-constant density on a uniform grid. [`Measure`] is the tagged
//! union of the two plus finite sums of them (so `1_[0,1] dx + δ_2` is a
//! first-class value).
//!
//! All values are immutable after construction.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{bail, Result};
use crate::math::{cell_index, same_point};

/// Finitely many weighted atoms, sorted by point.
#[derive(Clone, Debug, PartialEq)]
pub struct AtomicMeasure {
    points: Vec<f64>,
    weights: Vec<f64>,
    // cumulative[i] = sum of weights[..i]
    cumulative: Vec<f64>,
}

/// Piecewise-constant density: `masses[i]` is the mass of
/// `[start + i h, start + (i + 1) h)`.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMeasure {
    start: f64,
    bin_width: f64,
    masses: Vec<f64>,
    cumulative: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Measure {
    Atomic(AtomicMeasure),
    Density(DensityMeasure),
    /// Sum of atomic and density parts; never nested.
    Sum(Vec<Measure>),
}

/// Where `discretize` places the atom of each cell `r [k, k + 1)`.
#[derive(Clone, Copy)]
pub enum PointRule<'a> {
    Left,
    Center,
    /// Offset from the left edge of cell `k`; must lie in `[0, r)`.
    Custom(&'a dyn Fn(i64) -> f64),
}

impl core::fmt::Debug for PointRule<'_> {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            PointRule::Left => f.write_str("Left"),
            PointRule::Center => f.write_str("Center"),
            PointRule::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

fn prefix_sums(values: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(values.len() + 1);
    let mut acc = 0.0;
    out.push(acc);
    for v in values {
        acc += v;
        out.push(acc);
    }
    out
}

/// Build an atomic measure. Points are sorted and coincident points merged
/// by adding their weights.
pub fn make_atomic(points: &[f64], weights: &[f64]) -> Result<AtomicMeasure> {
    if points.len() != weights.len() {
        bail!(
            Usage,
            "{} points but {} weights",
            points.len(),
            weights.len()
        );
    }
    let mut pairs = Vec::with_capacity(points.len());
    for (&p, &w) in points.iter().zip(weights) {
        if !p.is_finite() {
            bail!(Domain, "atom location {p} is not finite");
        }
        if !(w >= 0.0) || !w.is_finite() {
            bail!(Domain, "atom weight {w} at {p} is negative or not finite");
        }
        pairs.push((p, w));
    }
    Ok(AtomicMeasure::from_pairs_unchecked(pairs))
}

impl AtomicMeasure {
    pub fn empty() -> Self {
        AtomicMeasure {
            points: Vec::new(),
            weights: Vec::new(),
            cumulative: vec![0.0],
        }
    }

    pub fn dirac(point: f64) -> Self {
        AtomicMeasure::from_pairs_unchecked(vec![(point, 1.0)])
    }

    /// Unit masses at the integers of `[-half_width, half_width]`.
    pub fn integer_comb(half_width: i64) -> Self {
        let pairs = (-half_width..=half_width)
            .map(|n| (n as f64, 1.0))
            .collect();
        AtomicMeasure::from_pairs_unchecked(pairs)
    }

    pub(crate) fn from_pairs_unchecked(mut pairs: Vec<(f64, f64)>) -> Self {
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut points: Vec<f64> = Vec::with_capacity(pairs.len());
        let mut weights: Vec<f64> = Vec::with_capacity(pairs.len());
        for (p, w) in pairs {
            match points.last() {
                Some(&q) if same_point(p, q) => *weights.last_mut().unwrap() += w,
                _ => {
                    points.push(p);
                    weights.push(w);
                }
            }
        }
        let cumulative = prefix_sums(&weights);
        AtomicMeasure {
            points,
            weights,
            cumulative,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn atoms(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.points
            .iter()
            .copied()
            .zip(self.weights.iter().copied())
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Mass of `[a, b)`.
    pub fn mass_closed_open(&self, a: f64, b: f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        let i = self.points.partition_point(|&p| p < a);
        let j = self.points.partition_point(|&p| p < b);
        self.cumulative[j] - self.cumulative[i]
    }

    /// Mass of `(a, b]`.
    pub fn mass_open_closed(&self, a: f64, b: f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        let i = self.points.partition_point(|&p| p <= a);
        let j = self.points.partition_point(|&p| p <= b);
        self.cumulative[j] - self.cumulative[i]
    }

    pub fn translate(&self, s: f64) -> Self {
        AtomicMeasure::from_pairs_unchecked(self.atoms().map(|(p, w)| (p + s, w)).collect())
    }

    pub fn reflect(&self) -> Self {
        AtomicMeasure::from_pairs_unchecked(self.atoms().map(|(p, w)| (-p, w)).collect())
    }

    /// Keep atoms whose weight is at least `floor`.
    pub fn drop_below(&self, floor: f64) -> Self {
        AtomicMeasure::from_pairs_unchecked(self.atoms().filter(|&(_, w)| w >= floor).collect())
    }

    /// Exact `sup_x ν([x, x + r))` by a two-pointer sweep; the sup is attained
    /// with the window starting at an atom.
    pub fn sup_window_mass(&self, r: f64) -> f64 {
        let n = self.points.len();
        let mut best = 0.0f64;
        let mut j = 0;
        for i in 0..n {
            let end = self.points[i] + r;
            if j < i {
                j = i;
            }
            while j < n && self.points[j] < end {
                j += 1;
            }
            best = best.max(self.cumulative[j] - self.cumulative[i]);
        }
        best
    }
}

impl DensityMeasure {
    pub fn new(start: f64, bin_width: f64, masses: Vec<f64>) -> Result<Self> {
        if !start.is_finite() {
            bail!(Domain, "density start {start} is not finite");
        }
        if !(bin_width > 0.0) || !bin_width.is_finite() {
            bail!(Domain, "bin width {bin_width} must be positive");
        }
        if let Some(m) = masses.iter().find(|m| !(**m >= 0.0) || !m.is_finite()) {
            bail!(Domain, "bin mass {m} is negative or not finite");
        }
        Ok(Self::new_unchecked(start, bin_width, masses))
    }

    fn new_unchecked(start: f64, bin_width: f64, masses: Vec<f64>) -> Self {
        let cumulative = prefix_sums(&masses);
        DensityMeasure {
            start,
            bin_width,
            masses,
            cumulative,
        }
    }

    /// Uniform probability density on `[start, start + width)`.
    pub fn uniform(start: f64, width: f64) -> Result<Self> {
        DensityMeasure::new(start, width, vec![1.0])
    }

    /// Lebesgue measure restricted to `[start, start + bins * width)`.
    pub fn lebesgue(start: f64, bin_width: f64, bins: usize) -> Result<Self> {
        DensityMeasure::new(start, bin_width, vec![bin_width; bins])
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn bin_width(&self) -> f64 {
        self.bin_width
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn end(&self) -> f64 {
        self.edge(self.masses.len())
    }

    pub fn total_mass(&self) -> f64 {
        self.masses.iter().sum()
    }

    #[inline]
    fn edge(&self, i: usize) -> f64 {
        self.start + i as f64 * self.bin_width
    }

    /// Bin midpoints paired with bin masses.
    pub fn bins(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.masses
            .iter()
            .enumerate()
            .map(|(i, &m)| (self.edge(i) + 0.5 * self.bin_width, m))
    }

    /// `ν((-∞, x))`; continuous and piecewise linear in `x`.
    pub fn mass_below(&self, x: f64) -> f64 {
        let n = self.masses.len();
        if n == 0 || x <= self.start {
            return 0.0;
        }
        let q = (x - self.start) / self.bin_width;
        if q >= n as f64 {
            return self.cumulative[n];
        }
        let i = (libm::floor(q) as usize).min(n - 1);
        let frac = (q - i as f64).clamp(0.0, 1.0);
        self.cumulative[i] + frac * self.masses[i]
    }

    pub fn mass_between(&self, a: f64, b: f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        (self.mass_below(b) - self.mass_below(a)).max(0.0)
    }

    /// Split every bin into `k` equal bins.
    pub fn refine(&self, k: usize) -> Self {
        assert!(k >= 1);
        let share = 1.0 / k as f64;
        let masses = self
            .masses
            .iter()
            .flat_map(|&m| core::iter::repeat_n(m * share, k))
            .collect();
        Self::new_unchecked(self.start, self.bin_width / k as f64, masses)
    }

    /// Exact cell masses of this measure on another uniform grid.
    fn resample(&self, start: f64, bin_width: f64, bins: usize) -> Self {
        let masses = (0..bins)
            .map(|i| {
                let a = start + i as f64 * bin_width;
                self.mass_between(a, a + bin_width)
            })
            .collect();
        Self::new_unchecked(start, bin_width, masses)
    }

    /// Sum of two densities on a common grid.
    pub fn add(&self, other: &DensityMeasure) -> DensityMeasure {
        if self.masses.is_empty() {
            return other.clone();
        }
        if other.masses.is_empty() {
            return self.clone();
        }
        let h = common_width(self.bin_width, other.bin_width)
            .unwrap_or(self.bin_width.min(other.bin_width));
        let start = self.start.min(other.start);
        let end = self.end().max(other.end());
        let bins = libm::ceil((end - start) / h - 1e-9).max(1.0) as usize;
        let a = self.regrid(start, h, bins);
        let b = other.regrid(start, h, bins);
        let masses = a.masses.iter().zip(&b.masses).map(|(x, y)| x + y).collect();
        Self::new_unchecked(start, h, masses)
    }

    /// Re-express on the grid `start + h [k, k+1)`, refining exactly when the
    /// grids align and prorating cell masses otherwise.
    fn regrid(&self, start: f64, h: f64, bins: usize) -> Self {
        let k = libm::round(self.bin_width / h) as usize;
        let offset = cell_index(self.start, start, h);
        let aligned = k >= 1
            && same_point(k as f64 * h, self.bin_width)
            && same_point(start + offset as f64 * h, self.start);
        if aligned && offset >= 0 {
            let fine = self.refine(k);
            let mut masses = vec![0.0; bins];
            for (i, &m) in fine.masses.iter().enumerate() {
                let j = offset as usize + i;
                if j < bins {
                    masses[j] += m;
                } else if let Some(last) = masses.last_mut() {
                    *last += m;
                }
            }
            Self::new_unchecked(start, h, masses)
        } else {
            self.resample(start, h, bins)
        }
    }

    pub fn translate(&self, s: f64) -> Self {
        Self::new_unchecked(self.start + s, self.bin_width, self.masses.clone())
    }

    pub fn reflect(&self) -> Self {
        let masses = self.masses.iter().rev().copied().collect();
        Self::new_unchecked(-self.end(), self.bin_width, masses)
    }

    /// Exact `sup_x ν([x, x + r))`. The window mass is piecewise linear in
    /// `x` with kinks where `x` or `x + r` crosses a bin edge.
    pub fn sup_window_mass(&self, r: f64) -> f64 {
        let mut best = 0.0f64;
        for i in 0..=self.masses.len() {
            let e = self.edge(i);
            best = best
                .max(self.mass_between(e, e + r))
                .max(self.mass_between(e - r, e));
        }
        best
    }
}

/// A width dividing both `a` and `b` with small integer ratios, if any.
fn common_width(a: f64, b: f64) -> Option<f64> {
    for ka in 1..=64usize {
        let h = a / ka as f64;
        let kb = libm::round(b / h);
        if kb >= 1.0 && same_point(kb * h, b) {
            return Some(h);
        }
    }
    None
}

impl Measure {
    pub fn empty() -> Self {
        Measure::Atomic(AtomicMeasure::empty())
    }

    /// Finite sum; nested sums are flattened.
    pub fn sum(parts: Vec<Measure>) -> Self {
        let mut flat = Vec::new();
        for p in parts {
            match p {
                Measure::Sum(inner) => flat.extend(inner),
                other => flat.push(other),
            }
        }
        if flat.len() == 1 {
            flat.pop().unwrap()
        } else {
            Measure::Sum(flat)
        }
    }

    /// `1_[0,1] dx + δ_2`, the measure without frame measures.
    pub fn lebesgue_plus_atom() -> Self {
        Measure::sum(vec![
            Measure::Density(DensityMeasure::lebesgue(0.0, 1.0, 1).unwrap()),
            Measure::Atomic(AtomicMeasure::dirac(2.0)),
        ])
    }

    pub fn total_mass(&self) -> f64 {
        match self {
            Measure::Atomic(a) => a.total_mass(),
            Measure::Density(d) => d.total_mass(),
            Measure::Sum(parts) => parts.iter().map(Measure::total_mass).sum(),
        }
    }

    fn parts(&self) -> &[Measure] {
        match self {
            Measure::Sum(parts) => parts,
            other => core::slice::from_ref(other),
        }
    }

    /// Mass of `[a, b)`.
    pub fn mass_closed_open(&self, a: f64, b: f64) -> f64 {
        self.parts()
            .iter()
            .map(|p| match p {
                Measure::Atomic(m) => m.mass_closed_open(a, b),
                Measure::Density(d) => d.mass_between(a, b),
                Measure::Sum(_) => p.mass_closed_open(a, b),
            })
            .sum()
    }

    /// Mass of `(a, b]`.
    pub fn mass_open_closed(&self, a: f64, b: f64) -> f64 {
        self.parts()
            .iter()
            .map(|p| match p {
                Measure::Atomic(m) => m.mass_open_closed(a, b),
                Measure::Density(d) => d.mass_between(a, b),
                Measure::Sum(_) => p.mass_open_closed(a, b),
            })
            .sum()
    }

    /// Smallest interval containing the support, `None` for the zero measure.
    pub fn hull(&self) -> Option<(f64, f64)> {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for p in self.parts() {
            match p {
                Measure::Atomic(a) => {
                    for (x, w) in a.atoms() {
                        if w > 0.0 {
                            lo = lo.min(x);
                            hi = hi.max(x);
                        }
                    }
                }
                Measure::Density(d) => {
                    for (i, &m) in d.masses.iter().enumerate() {
                        if m > 0.0 {
                            lo = lo.min(d.edge(i));
                            hi = hi.max(d.edge(i + 1));
                        }
                    }
                }
                Measure::Sum(_) => {
                    if let Some((a, b)) = p.hull() {
                        lo = lo.min(a);
                        hi = hi.max(b);
                    }
                }
            }
        }
        (lo <= hi).then_some((lo, hi))
    }

    /// Total number of atoms and whether any density part carries mass.
    pub(crate) fn support_summary(&self) -> (usize, bool) {
        let mut atoms = 0;
        let mut diffuse = false;
        for p in self.parts() {
            match p {
                Measure::Atomic(a) => atoms += a.atoms().filter(|&(_, w)| w > 0.0).count(),
                Measure::Density(d) => diffuse |= d.total_mass() > 0.0,
                Measure::Sum(_) => {
                    let (a, d) = p.support_summary();
                    atoms += a;
                    diffuse |= d;
                }
            }
        }
        (atoms, diffuse)
    }

    pub fn translate(&self, s: f64) -> Self {
        match self {
            Measure::Atomic(a) => Measure::Atomic(a.translate(s)),
            Measure::Density(d) => Measure::Density(d.translate(s)),
            Measure::Sum(parts) => Measure::Sum(parts.iter().map(|p| p.translate(s)).collect()),
        }
    }

    /// Image under `x -> -x`.
    pub fn reflect(&self) -> Self {
        match self {
            Measure::Atomic(a) => Measure::Atomic(a.reflect()),
            Measure::Density(d) => Measure::Density(d.reflect()),
            Measure::Sum(parts) => Measure::Sum(parts.iter().map(Measure::reflect).collect()),
        }
    }

    /// Points where `x -> ν([x, x + r))` may jump or change slope.
    pub(crate) fn window_breakpoints(&self, r: f64) -> Vec<f64> {
        let mut out = Vec::new();
        for p in self.parts() {
            match p {
                Measure::Atomic(a) => {
                    for &x in a.points() {
                        out.push(x);
                        out.push(x - r);
                    }
                }
                Measure::Density(d) => {
                    for i in 0..=d.masses.len() {
                        let e = d.edge(i);
                        out.push(e);
                        out.push(e - r);
                    }
                }
                Measure::Sum(_) => out.extend(p.window_breakpoints(r)),
            }
        }
        out
    }

    /// `sup_x ν([x, x + r))`, exact.
    pub fn sup_window_mass(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return 0.0;
        }
        match self {
            Measure::Atomic(a) => a.sup_window_mass(r),
            Measure::Density(d) => d.sup_window_mass(r),
            Measure::Sum(_) => {
                // Between breakpoints the window mass is affine; at a breakpoint
                // c its value is ν([c, c + r)) and its right limit ν((c, c + r]).
                let mut best = 0.0f64;
                for c in self.window_breakpoints(r) {
                    best = best
                        .max(self.mass_closed_open(c, c + r))
                        .max(self.mass_open_closed(c, c + r));
                }
                best
            }
        }
    }

    /// `inf_{x ∈ [a, b]} ν([x, x + r))`, exact.
    pub fn inf_window_mass(&self, r: f64, a: f64, b: f64) -> f64 {
        let mut best = self
            .mass_closed_open(a, a + r)
            .min(self.mass_closed_open(b, b + r));
        for c in self.window_breakpoints(r) {
            if c < a || c > b {
                continue;
            }
            best = best.min(self.mass_closed_open(c, c + r));
            if c < b {
                best = best.min(self.mass_open_closed(c, c + r));
            }
        }
        best
    }
}

impl From<AtomicMeasure> for Measure {
    fn from(a: AtomicMeasure) -> Self {
        Measure::Atomic(a)
    }
}

impl From<DensityMeasure> for Measure {
    fn from(d: DensityMeasure) -> Self {
        Measure::Density(d)
    }
}

/// `ν([x, x + r))`.
pub fn window_mass(nu: &Measure, x: f64, r: f64) -> f64 {
    nu.mass_closed_open(x, x + r)
}

fn convolve_atomic(a: &AtomicMeasure, b: &AtomicMeasure) -> AtomicMeasure {
    let mut pairs = Vec::with_capacity(a.len() * b.len());
    for (x, w) in a.atoms() {
        for (y, v) in b.atoms() {
            pairs.push((x + y, w * v));
        }
    }
    AtomicMeasure::from_pairs_unchecked(pairs)
}

fn convolve_atomic_density(a: &AtomicMeasure, d: &DensityMeasure) -> DensityMeasure {
    if a.is_empty() || d.masses.is_empty() {
        return DensityMeasure::new_unchecked(d.start, d.bin_width, Vec::new());
    }
    let p0 = a.points[0];
    let span = a.points[a.len() - 1] - p0;
    // Refine the grid until every atom offset lands on a grid edge.
    let refinement = (1..=64usize).find(|&k| {
        let h = d.bin_width / k as f64;
        a.points.iter().all(|&p| {
            let q = (p - p0) / h;
            libm::fabs(q - libm::round(q)) <= 1e-9 * libm::fmax(1.0, libm::fabs(q))
        })
    });
    match refinement {
        Some(k) => {
            let fine = d.refine(k);
            let h = fine.bin_width;
            let bins = fine.masses.len() + libm::round(span / h) as usize;
            let mut masses = vec![0.0; bins];
            for (p, w) in a.atoms() {
                let off = libm::round((p - p0) / h) as usize;
                for (i, &m) in fine.masses.iter().enumerate() {
                    masses[off + i] += w * m;
                }
            }
            DensityMeasure::new_unchecked(d.start + p0, h, masses)
        }
        None => {
            // Off-grid shifts: exact cell masses of each shifted copy.
            let h = d.bin_width;
            let start = d.start + p0;
            let bins = d.masses.len() + libm::ceil(span / h) as usize + 1;
            let mut masses = vec![0.0; bins];
            for (p, w) in a.atoms() {
                let shifted = d.translate(p);
                let first = cell_index(shifted.start, start, h).max(0) as usize;
                let last = (first + d.masses.len() + 1).min(bins - 1);
                for (j, slot) in masses.iter_mut().enumerate().take(last + 1).skip(first) {
                    let lo = start + j as f64 * h;
                    *slot += w * shifted.mass_between(lo, lo + h);
                }
            }
            DensityMeasure::new_unchecked(start, h, masses)
        }
    }
}

fn convolve_density(a: &DensityMeasure, b: &DensityMeasure) -> DensityMeasure {
    if a.masses.is_empty() || b.masses.is_empty() {
        return DensityMeasure::new_unchecked(a.start + b.start, a.bin_width, Vec::new());
    }
    let (a, b) = match common_width(a.bin_width, b.bin_width) {
        Some(h) => (
            a.refine(libm::round(a.bin_width / h) as usize),
            b.refine(libm::round(b.bin_width / h) as usize),
        ),
        None => {
            // Resample the coarser factor onto the finer grid.
            let h = a.bin_width.min(b.bin_width);
            let re = |d: &DensityMeasure| {
                let bins = libm::ceil((d.end() - d.start) / h - 1e-9) as usize;
                d.resample(d.start, h, bins)
            };
            (re(a), re(b))
        }
    };
    // Two boxes of width h convolve to a triangle on [0, 2h) that puts half
    // its mass in each of the two cells it covers.
    let n = a.masses.len() + b.masses.len();
    let mut masses = vec![0.0; n];
    for (i, &x) in a.masses.iter().enumerate() {
        if x == 0.0 {
            continue;
        }
        for (j, &y) in b.masses.iter().enumerate() {
            let half = 0.5 * x * y;
            masses[i + j] += half;
            masses[i + j + 1] += half;
        }
    }
    DensityMeasure::new_unchecked(a.start + b.start, a.bin_width, masses)
}

fn convolve_simple(nu: &Measure, rho: &Measure) -> Measure {
    match (nu, rho) {
        (Measure::Atomic(a), Measure::Atomic(b)) => Measure::Atomic(convolve_atomic(a, b)),
        (Measure::Atomic(a), Measure::Density(d)) | (Measure::Density(d), Measure::Atomic(a)) => {
            Measure::Density(convolve_atomic_density(a, d))
        }
        (Measure::Density(a), Measure::Density(b)) => Measure::Density(convolve_density(a, b)),
        _ => unreachable!("sums are expanded by the caller"),
    }
}

/// `ν * ρ`.
///
/// Atomic factors convolve exactly. Whenever a density is involved the
/// result is a density whose cell masses are the exact cell masses of the
/// true convolution on the (refined) common grid.
pub fn convolve(nu: &Measure, rho: &Measure) -> Measure {
    let mut atomic: Vec<(f64, f64)> = Vec::new();
    let mut density: Option<DensityMeasure> = None;
    for p in nu.parts() {
        for q in rho.parts() {
            match convolve_simple(p, q) {
                Measure::Atomic(a) => atomic.extend(a.atoms()),
                Measure::Density(d) => {
                    density = Some(match density {
                        None => d,
                        Some(acc) => acc.add(&d),
                    })
                }
                Measure::Sum(_) => unreachable!(),
            }
        }
    }
    let atomic = AtomicMeasure::from_pairs_unchecked(atomic);
    match density {
        None => Measure::Atomic(atomic),
        Some(d) if atomic.is_empty() => Measure::Density(d),
        Some(d) => Measure::Sum(vec![Measure::Density(d), Measure::Atomic(atomic)]),
    }
}

/// Collapse `ν` onto one atom per cell `r [k, k + 1)` carrying the cell's
/// mass. Empty cells produce no atom.
pub fn discretize(nu: &Measure, r: f64, rule: PointRule<'_>) -> Result<AtomicMeasure> {
    if !(r > 0.0) || !r.is_finite() {
        bail!(Domain, "cell size {r} must be positive");
    }
    let mut cells: Vec<(i64, f64)> = Vec::new();
    for p in nu.parts() {
        match p {
            Measure::Atomic(a) => {
                cells.extend(a.atoms().map(|(x, w)| (cell_index(x, 0.0, r), w)));
            }
            Measure::Density(d) => {
                if d.masses.is_empty() {
                    continue;
                }
                let k0 = libm::floor(d.start / r) as i64;
                let k1 = libm::ceil(d.end() / r) as i64;
                for k in k0..k1 {
                    let lo = k as f64 * r;
                    cells.push((k, d.mass_between(lo, lo + r)));
                }
            }
            Measure::Sum(_) => unreachable!("sums are flat"),
        }
    }
    cells.sort_by_key(|c| c.0);
    let mut pairs: Vec<(f64, f64)> = Vec::new();
    let mut i = 0;
    while i < cells.len() {
        let k = cells[i].0;
        let mut mass = 0.0;
        while i < cells.len() && cells[i].0 == k {
            mass += cells[i].1;
            i += 1;
        }
        if mass <= 0.0 {
            continue;
        }
        let offset = match rule {
            PointRule::Left => 0.0,
            PointRule::Center => 0.5 * r,
            PointRule::Custom(f) => {
                let o = f(k);
                if !(0.0..r).contains(&o) {
                    bail!(Domain, "offset {o} for cell {k} is outside [0, {r})");
                }
                o
            }
        };
        pairs.push((k as f64 * r + offset, mass));
    }
    Ok(AtomicMeasure::from_pairs_unchecked(pairs))
}

/// `ν * uniform[0, w)`, as a density.
pub fn mollify(nu: &Measure, kernel_width: f64) -> Result<DensityMeasure> {
    if !(kernel_width > 0.0) || !kernel_width.is_finite() {
        bail!(Domain, "kernel width {kernel_width} must be positive");
    }
    let kernel = Measure::Density(DensityMeasure::uniform(0.0, kernel_width)?);
    match convolve(nu, &kernel) {
        Measure::Density(d) => Ok(d),
        Measure::Atomic(a) if a.is_empty() => {
            Ok(DensityMeasure::new_unchecked(0.0, kernel_width, Vec::new()))
        }
        other => unreachable!("convolution with a density is diffuse: {other:?}"),
    }
}
