//! Dense Hermitian matrices and their extreme eigenvalues.
//!
//! [`hermitian_extremes`] reduces the matrix to real symmetric tridiagonal
//! form with Householder reflections, locates the smallest and largest
//! eigenvalues by Sturm-sequence bisection, recovers eigenvectors by inverse
//! iteration and back-transformation, and certifies each pair with the
//! residual `‖Mv - λv‖ / (‖M‖ ‖v‖)`.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{bail, Result};

/// Hermitian residual allowed on input, relative to the largest entry.
pub const HERMITIAN_TOL: f64 = 1e-12;

pub const DEFAULT_REL_TOL: f64 = 1e-10;

/// Square complex matrix, row major.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

/// Extreme eigenpairs with their residual certificates.
#[derive(Clone, Debug, PartialEq)]
pub struct Extremes {
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub residual_min: f64,
    pub residual_max: f64,
    pub vector_min: Vec<Complex64>,
    pub vector_max: Vec<Complex64>,
}

impl HermitianMatrix {
    pub fn zeros(dim: usize) -> Self {
        HermitianMatrix {
            dim,
            data: vec![Complex64::new(0.0, 0.0); dim * dim],
        }
    }

    /// Wrap row-major entries. Hermitian symmetry is checked by
    /// [`hermitian_extremes`], not here.
    pub fn from_rows(dim: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != dim * dim {
            bail!(Usage, "{} entries for a {dim}x{dim} matrix", data.len());
        }
        Ok(HermitianMatrix { dim, data })
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let mut m = HermitianMatrix::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = Complex64::new(d, 0.0);
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub(crate) fn as_mut_slice(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    /// `max |M_ij - conj(M_ji)|`.
    pub fn hermitian_residual(&self) -> f64 {
        let n = self.dim;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        libm::sqrt(self.data.iter().map(|z| z.norm_sqr()).sum())
    }

    pub fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        let n = self.dim;
        (0..n)
            .map(|i| {
                self.data[i * n..(i + 1) * n]
                    .iter()
                    .zip(v)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    /// `c* M c`, real for Hermitian `M`.
    pub fn quadratic_form(&self, c: &[Complex64]) -> f64 {
        let mc = self.mul_vec(c);
        c.iter().zip(&mc).map(|(x, y)| (x.conj() * y).re).sum()
    }

    /// `U* M U` for the diagonal unitary `U = diag(phases)`.
    pub fn conjugate_by_diagonal(&self, phases: &[Complex64]) -> Self {
        let n = self.dim;
        let mut out = self.clone();
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] = phases[i].conj() * self[(i, j)] * phases[j];
            }
        }
        out
    }

    pub fn add_assign(&mut self, other: &HermitianMatrix) {
        assert_eq!(self.dim, other.dim);
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
    }
}

impl core::ops::Index<(usize, usize)> for HermitianMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.dim + j]
    }
}

impl core::ops::IndexMut<(usize, usize)> for HermitianMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.dim + j]
    }
}

fn norm(v: &[Complex64]) -> f64 {
    libm::sqrt(v.iter().map(|z| z.norm_sqr()).sum())
}

/// Householder reduction `M = Q T Q*` with `T` real symmetric tridiagonal
/// (after a diagonal phase change).
struct Tridiagonal {
    diag: Vec<f64>,
    off: Vec<f64>,
    // phase[i]: T = D S D* with D = diag(phase) and S real.
    phase: Vec<Complex64>,
    // reflector k acts on indices k+1..n as I - tau v v*, v[0] = 1.
    reflectors: Vec<(f64, Vec<Complex64>)>,
}

fn tridiagonalize(m: &HermitianMatrix) -> Tridiagonal {
    let n = m.dim;
    let mut a = m.data.clone();
    let at = |i: usize, j: usize| i * n + j;
    let mut reflectors = Vec::with_capacity(n.saturating_sub(2));
    let mut sub = vec![Complex64::new(0.0, 0.0); n.saturating_sub(1)];
    for k in 0..n.saturating_sub(1) {
        let len = n - k - 1;
        let x: Vec<Complex64> = (0..len).map(|i| a[at(k + 1 + i, k)]).collect();
        let xnorm = norm(&x);
        let tail = norm(&x[1..]);
        if len == 1 || tail == 0.0 {
            sub[k] = x[0];
            continue;
        }
        let unit = if x[0].norm() > 0.0 {
            x[0] / x[0].norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        let alpha = -unit * xnorm;
        let mut v = x.clone();
        v[0] -= alpha;
        let v0 = v[0];
        for z in v.iter_mut() {
            *z /= v0;
        }
        let tau = 2.0 / v.iter().map(|z| z.norm_sqr()).sum::<f64>();
        // A22 <- H A22 H via the rank-two update A22 - v q* - q v*.
        let mut w = vec![Complex64::new(0.0, 0.0); len];
        for (i, wi) in w.iter_mut().enumerate() {
            let row = at(k + 1 + i, k + 1);
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, vj) in v.iter().enumerate() {
                acc += a[row + j] * vj;
            }
            *wi = acc * tau;
        }
        let vw: Complex64 = v.iter().zip(&w).map(|(vi, wi)| vi.conj() * wi).sum();
        let half = 0.5 * tau * vw;
        let q: Vec<Complex64> = w.iter().zip(&v).map(|(wi, vi)| wi - half * vi).collect();
        for i in 0..len {
            let row = at(k + 1 + i, k + 1);
            for j in 0..len {
                a[row + j] -= v[i] * q[j].conj() + q[i] * v[j].conj();
            }
        }
        sub[k] = alpha;
        reflectors.push((k, tau, v));
    }
    let diag: Vec<f64> = (0..n).map(|i| a[at(i, i)].re).collect();
    let mut phase = vec![Complex64::new(1.0, 0.0); n];
    let mut off = vec![0.0; n.saturating_sub(1)];
    for (i, beta) in sub.iter().enumerate() {
        let r = beta.norm();
        off[i] = r;
        phase[i + 1] = if r > 0.0 {
            phase[i] * (beta / r)
        } else {
            phase[i]
        };
    }
    let mut ordered: Vec<(f64, Vec<Complex64>)> = Vec::with_capacity(n);
    let mut slots: Vec<Option<(f64, Vec<Complex64>)>> = vec![None; n];
    for (k, tau, v) in reflectors {
        slots[k] = Some((tau, v));
    }
    for s in slots {
        ordered.push(s.unwrap_or((0.0, Vec::new())));
    }
    Tridiagonal {
        diag,
        off,
        phase,
        reflectors: ordered,
    }
}

impl Tridiagonal {
    /// Number of eigenvalues strictly below `x`.
    fn count_below(&self, x: f64) -> usize {
        let tiny = f64::MIN_POSITIVE / f64::EPSILON;
        let mut count = 0;
        let mut q = 1.0f64;
        for i in 0..self.diag.len() {
            let e2 = if i == 0 {
                0.0
            } else {
                self.off[i - 1] * self.off[i - 1]
            };
            q = self.diag[i] - x - if i == 0 { 0.0 } else { e2 / q };
            if q == 0.0 {
                q = -tiny;
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    fn gershgorin(&self) -> (f64, f64) {
        let n = self.diag.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let r = if i > 0 { self.off[i - 1] } else { 0.0 }
                + if i + 1 < n { self.off[i] } else { 0.0 };
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    /// The `k`-th smallest eigenvalue (0-based) by bisection.
    fn eigenvalue(&self, k: usize) -> f64 {
        let (mut lo, mut hi) = self.gershgorin();
        let pad = f64::EPSILON * lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE);
        lo -= pad;
        hi += pad;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Eigenvector of the real tridiagonal `S` for eigenvalue `lambda` by
    /// inverse iteration with a partially pivoted tridiagonal solve.
    fn inverse_iteration(&self, lambda: f64) -> Vec<f64> {
        let n = self.diag.len();
        let scale = self
            .diag
            .iter()
            .chain(&self.off)
            .fold(0.0f64, |m, x| m.max(x.abs()));
        if scale == 0.0 {
            let mut e = vec![0.0; n];
            e[0] = 1.0;
            return e;
        }
        let shift = lambda + 4.0 * f64::EPSILON * scale;
        let mut y: Vec<f64> = (0..n)
            .map(|i| 1.0 + 0.1 * libm::sin(1.0 + i as f64 * 0.7))
            .collect();
        for _ in 0..4 {
            y = self.solve_shifted(shift, &y, scale);
            let s = libm::sqrt(y.iter().map(|v| v * v).sum());
            if s == 0.0 || !s.is_finite() {
                break;
            }
            for v in y.iter_mut() {
                *v /= s;
            }
        }
        y
    }

    fn solve_shifted(&self, shift: f64, rhs: &[f64], scale: f64) -> Vec<f64> {
        let n = self.diag.len();
        if n == 1 {
            return vec![1.0];
        }
        // Rows carry up to three bands after pivoting: (main, +1, +2).
        let mut u0 = vec![0.0; n];
        let mut u1 = vec![0.0; n];
        let mut u2 = vec![0.0; n];
        let mut b = rhs.to_vec();
        let mut cur = (self.diag[0] - shift, self.off[0], 0.0);
        for i in 0..n - 1 {
            let next_sub = self.off[i];
            let next = (
                self.diag[i + 1] - shift,
                if i + 2 < n { self.off[i + 1] } else { 0.0 },
            );
            if cur.0.abs() >= next_sub.abs() {
                let piv = if cur.0 == 0.0 {
                    f64::EPSILON * scale
                } else {
                    cur.0
                };
                let l = next_sub / piv;
                u0[i] = piv;
                u1[i] = cur.1;
                u2[i] = cur.2;
                b[i + 1] -= l * b[i];
                cur = (next.0 - l * cur.1, next.1 - l * cur.2, 0.0);
            } else {
                let l = cur.0 / next_sub;
                u0[i] = next_sub;
                u1[i] = next.0;
                u2[i] = next.1;
                b.swap(i, i + 1);
                b[i + 1] -= l * b[i];
                cur = (cur.1 - l * next.0, cur.2 - l * next.1, 0.0);
            }
        }
        u0[n - 1] = if cur.0 == 0.0 {
            f64::EPSILON * scale
        } else {
            cur.0
        };
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let mut s = b[i];
            if i + 1 < n {
                s -= u1[i] * x[i + 1];
            }
            if i + 2 < n {
                s -= u2[i] * x[i + 2];
            }
            x[i] = s / u0[i];
        }
        x
    }

    /// Map an eigenvector of `S` back to one of `M`.
    fn back_transform(&self, s_vec: &[f64]) -> Vec<Complex64> {
        let mut v: Vec<Complex64> = s_vec
            .iter()
            .zip(&self.phase)
            .map(|(&x, &p)| p * x)
            .collect();
        for (k, (tau, refl)) in self.reflectors.iter().enumerate().rev() {
            if *tau == 0.0 {
                continue;
            }
            let seg = &mut v[k + 1..];
            let dot: Complex64 = refl.iter().zip(seg.iter()).map(|(r, x)| r.conj() * x).sum();
            let f = dot * *tau;
            for (x, r) in seg.iter_mut().zip(refl) {
                *x -= r * f;
            }
        }
        v
    }
}

fn certificate(m: &HermitianMatrix, lambda: f64, v: &[Complex64], mnorm: f64) -> f64 {
    let mv = m.mul_vec(v);
    let r = libm::sqrt(
        mv.iter()
            .zip(v)
            .map(|(a, b)| (a - b * lambda).norm_sqr())
            .sum(),
    );
    let denom = mnorm * norm(v);
    if denom == 0.0 {
        r
    } else {
        r / denom
    }
}

/// Smallest and largest eigenvalues of a Hermitian matrix, each certified by
/// `‖Mv - λv‖ ≤ rel_tol ‖M‖ ‖v‖` (Frobenius norm for `‖M‖`).
pub fn hermitian_extremes(m: &HermitianMatrix, rel_tol: f64) -> Result<Extremes> {
    let n = m.dim;
    if n == 0 {
        bail!(Usage, "matrix dimension must be at least 1");
    }
    let scale = m.max_abs().max(1.0);
    let resid = m.hermitian_residual();
    if !(resid <= HERMITIAN_TOL * scale) {
        bail!(
            Domain,
            "matrix is not Hermitian (conjugate-symmetry residual {resid:e})"
        );
    }
    let tri = tridiagonalize(m);
    let mnorm = m.frobenius_norm();
    let pair = |k: usize| -> (f64, Vec<Complex64>, f64) {
        let lambda = tri.eigenvalue(k);
        let v = tri.back_transform(&tri.inverse_iteration(lambda));
        let r = certificate(m, lambda, &v, mnorm);
        (lambda, v, r)
    };
    let (lambda_min, vector_min, residual_min) = pair(0);
    let (lambda_max, vector_max, residual_max) = pair(n - 1);
    if !(residual_min <= rel_tol && residual_max <= rel_tol) {
        bail!(
            NoConvergence,
            "eigenpair residuals {residual_min:e}, {residual_max:e} exceed {rel_tol:e}"
        );
    }
    Ok(Extremes {
        lambda_min,
        lambda_max,
        residual_min,
        residual_max,
        vector_min,
        vector_max,
    })
}
