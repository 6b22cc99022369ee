//! Small float helpers shared by the kernels.

use num_complex::Complex64;

pub(crate) const TAU: f64 = core::f64::consts::TAU;

/// `e^{2πi x}`. The argument is reduced modulo 1 before the trig calls.
#[inline]
pub fn cis_turns(x: f64) -> Complex64 {
    let r = x - libm::round(x);
    let (s, c) = libm::sincos(TAU * r);
    Complex64::new(c, s)
}

/// Largest magnitude for which an `f64` still represents every integer.
const EXACT_INT: f64 = 9_007_199_254_740_992.0;

/// Fractional part (in `[0, 1)`) of `t * num / den`.
///
/// When `t` is an integer the product is reduced with exact integer
/// arithmetic, so phases like `e^{-2πi n b / R^k}` at integer frequencies carry
/// no rounding beyond the final division.
pub(crate) fn frac_turns(t: f64, num: i128, den: Denominator) -> f64 {
    if let Denominator::Exact(d) = den {
        if t == libm::trunc(t) && libm::fabs(t) < EXACT_INT {
            if let Some(p) = (t as i128).checked_mul(num) {
                return p.rem_euclid(d) as f64 / d as f64;
            }
        }
    }
    let y = t * num as f64 / den.as_f64();
    y - libm::floor(y)
}

/// A power `R^k`, exact when it fits in `i128`.
#[derive(Clone, Copy, Debug)]
pub(crate) enum Denominator {
    Exact(i128),
    Float(f64),
}

impl Denominator {
    pub(crate) fn power(base: i64, exp: u32) -> Self {
        match (base as i128).checked_pow(exp) {
            Some(d) => Denominator::Exact(d),
            None => Denominator::Float(libm::pow(base as f64, exp as f64)),
        }
    }

    pub(crate) fn as_f64(self) -> f64 {
        match self {
            Denominator::Exact(d) => d as f64,
            Denominator::Float(f) => f,
        }
    }
}

/// Points equal up to the atom-merging tolerance.
#[inline]
pub(crate) fn same_point(x: f64, y: f64) -> bool {
    let scale = libm::fmax(1.0, libm::fmax(libm::fabs(x), libm::fabs(y)));
    libm::fabs(x - y) <= 1e-12 * scale
}

/// Cell index of `x` in the grid `origin + width * [k, k + 1)`, with values
/// within float noise of a cell edge assigned to the cell starting there.
pub(crate) fn cell_index(x: f64, origin: f64, width: f64) -> i64 {
    let q = (x - origin) / width;
    let r = libm::round(q);
    if libm::fabs(q - r) <= 1e-9 * libm::fmax(1.0, libm::fabs(q)) {
        r as i64
    } else {
        libm::floor(q) as i64
    }
}

/// Median of a slice (sorted in place). `None` when empty.
pub(crate) fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let n = values.len();
    Some(if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integer_phase_is_exact() {
        // 2 * 1 / 4 = 1/2 exactly.
        assert_eq!(frac_turns(2.0, 1, Denominator::power(4, 1)), 0.5);
        assert_eq!(frac_turns(-6.0, 1, Denominator::power(4, 1)), 0.5);
        let big = 4f64.powi(12) * 7.0;
        assert_eq!(frac_turns(big, 1, Denominator::power(4, 13)), 0.75);
    }

    #[test]
    fn cis_of_integer_turns_is_one() {
        let z = cis_turns(17.0);
        assert_eq!(z, Complex64::new(1.0, 0.0));
    }

    #[test]
    fn cell_index_snaps_to_edges() {
        assert_eq!(cell_index(0.75, 0.0, 0.25), 3);
        assert_eq!(cell_index(3.0 * 0.1, 0.0, 0.1), 3);
        assert_eq!(cell_index(-0.01, 0.0, 1.0), -1);
    }
}
