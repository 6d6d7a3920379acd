//! Scalar special functions: Pochhammer symbols, `2F1(1/2,1/2;3/2;x)`, the
//! symmetric incomplete Beta integral and the two right-hand-side bounds.

use std::f64::consts::PI;

use crate::{Error, Result};

const SERIES_REL_CUTOFF: f64 = 1e-16;
const SERIES_MAX_TERMS: usize = 1_000_000;

/// Rising factorial `a (a+1) ... (a+n-1)`; the empty product for `n = 0`.
pub fn pochhammer(a: f64, n: u32) -> f64 {
    (0..n).fold(1.0, |acc, i| acc * (a + i as f64))
}

fn check_unit_interval(x: f64) -> Result<()> {
    if !(0.0..1.0).contains(&x) {
        return Err(Error::Domain {
            value: x,
            domain: "[0, 1)",
        });
    }
    Ok(())
}

/// `2F1(1/2,1/2;3/2;x)` by direct summation of the hypergeometric series.
pub fn hyp2f1_half_series(x: f64) -> Result<f64> {
    check_unit_interval(x)?;
    let mut term = 1.0;
    let mut sum = 1.0;
    for n in 0..SERIES_MAX_TERMS {
        let nf = n as f64;
        term *= (nf + 0.5) * (nf + 0.5) / ((nf + 1.5) * (nf + 1.0)) * x;
        sum += term;
        if term.abs() < SERIES_REL_CUTOFF * sum.abs() {
            break;
        }
    }
    Ok(sum)
}

/// `2F1(1/2,1/2;3/2;x) = arcsin(sqrt x) / sqrt x`.
pub fn hyp2f1_half_closed(x: f64) -> Result<f64> {
    check_unit_interval(x)?;
    if x == 0.0 {
        return Ok(1.0);
    }
    let s = x.sqrt();
    Ok(s.asin() / s)
}

/// `2F1(1/2,1/2;3/2;x)` on `[0, 1)`, via the arcsine closed form.
pub fn hyp2f1_half(x: f64) -> Result<f64> {
    hyp2f1_half_closed(x)
}

/// `int_{1/(d+1)}^{d/(d+1)} t^{-1/2} (1-t)^{-1/2} dt
///  = pi - 4 (d+1)^{-1/2} 2F1(1/2,1/2;3/2;1/(d+1))`.
pub fn incomplete_beta_sym(d: u64) -> Result<f64> {
    if d < 2 {
        return Err(Error::Domain {
            value: d as f64,
            domain: "d >= 2",
        });
    }
    let x = 1.0 / (d as f64 + 1.0);
    Ok(PI - 4.0 * x.sqrt() * hyp2f1_half(x)?)
}

/// The same integral by adaptive Simpson quadrature after the substitution
/// `t = sin^2 u`, which maps the integrand to `2 f(sin^2 u) sin u cos u`.
pub fn incomplete_beta_sym_quadrature(d: u64, tol: f64) -> Result<f64> {
    if d < 2 {
        return Err(Error::Domain {
            value: d as f64,
            domain: "d >= 2",
        });
    }
    let lo = 1.0 / (d as f64 + 1.0);
    let hi = 1.0 - lo;
    let f = |u: f64| {
        let (s, c) = u.sin_cos();
        let t = s * s;
        2.0 * s * c / (t.sqrt() * (1.0 - t).sqrt())
    };
    Ok(adaptive_simpson(&f, lo.sqrt().asin(), hi.sqrt().asin(), tol, 50))
}

/// Adaptive Simpson rule on `[a, b]` with absolute tolerance `tol`.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, max_depth: u32) -> f64 {
    fn simpson(fa: f64, fm: f64, fb: f64, a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(fa, flm, fm, a, m);
        let right = simpson(fm, frm, fb, m, b);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        recurse(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
            + recurse(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
    let fa = f(a);
    let fb = f(b);
    let fm = f(0.5 * (a + b));
    let whole = simpson(fa, fm, fb, a, b);
    recurse(f, a, b, fa, fm, fb, whole, tol, max_depth)
}

/// Which right-hand side to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RhsKind {
    /// `2 s log(e^{1/2} / (1 - s)) = s + 2 s log(1/(1-s))`.
    SeriesBound,
    /// `2 r^2 log(1/(1-r^2)) + r^2`.
    CircleMean,
}

pub fn rhs_bounds(kind: RhsKind, x: f64) -> Result<f64> {
    check_unit_interval(x)?;
    Ok(match kind {
        RhsKind::SeriesBound => x - 2.0 * x * (-x).ln_1p(),
        RhsKind::CircleMean => {
            let r2 = x * x;
            -2.0 * r2 * (-r2).ln_1p() + r2
        }
    })
}

/// `log 1/(1 - x)` for `x` in `[0, 1)`.
pub fn log_kernel(x: f64) -> f64 {
    -(-x).ln_1p()
}

/// `sum_{j > n} x^j / j`: the mass of `log 1/(1-x)` dropped by truncating at
/// order `n`. Summed directly while cheap, closed by the geometric bound
/// `x^{m+1} / ((m+1)(1-x))` beyond that.
pub fn log_kernel_tail(x: f64, n: usize) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let first = x.powi((n + 1) as i32) / ((n + 1) as f64 * (1.0 - x));
    if first < 1e-300 {
        return first.max(0.0);
    }
    let mut sum = 0.0;
    let mut p = x.powi(n as i32);
    let cap = n + 10_000_000;
    let mut j = n;
    while j < cap {
        j += 1;
        p *= x;
        let term = p / j as f64;
        sum += term;
        if term < 1e-17 * sum {
            return sum;
        }
    }
    sum + p * x / ((j + 1) as f64 * (1.0 - x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn pochhammer_examples() {
        assert_eq!(pochhammer(2.0, 3), 24.0);
        assert_eq!(pochhammer(5.0, 0), 1.0);
        assert_eq!(pochhammer(3.0, 2), 12.0);
    }

    #[test]
    fn hypergeometric_examples() {
        assert_eq!(hyp2f1_half(0.0).unwrap(), 1.0);
        assert_eq!(hyp2f1_half_series(0.0).unwrap(), 1.0);
        assert!((hyp2f1_half(0.25).unwrap() - PI / 3.0).abs() < 1e-15);
        // 64-term partial sum leaves about 0.9^64 / 64^{3/2}, so compare loosely there
        let mut term = 1.0;
        let mut sum = 1.0;
        for n in 0..64 {
            let nf = n as f64;
            term *= (nf + 0.5) * (nf + 0.5) / ((nf + 1.5) * (nf + 1.0)) * 0.9;
            sum += term;
        }
        assert!((hyp2f1_half(0.9).unwrap() - sum).abs() < 1e-4);
        assert!((hyp2f1_half(0.9).unwrap() - hyp2f1_half_series(0.9).unwrap()).abs() < 1e-12);
        assert!(hyp2f1_half(1.0).is_err());
        assert!(hyp2f1_half(-0.1).is_err());
    }

    #[test]
    fn series_and_closed_form_agree_on_grid() {
        for i in 0..=99 {
            let x = 0.99 * i as f64 / 99.0;
            let a = hyp2f1_half_series(x).unwrap();
            let b = hyp2f1_half_closed(x).unwrap();
            assert!((a - b).abs() <= 1e-12, "x={x}: {a} vs {b}");
        }
    }

    #[test]
    fn incomplete_beta_examples() {
        assert!((incomplete_beta_sym(3).unwrap() - PI / 3.0).abs() < 1e-14);
        for d in [2u64, 3, 29, 200] {
            let q = incomplete_beta_sym_quadrature(d, 1e-12).unwrap();
            assert!((q - incomplete_beta_sym(d).unwrap()).abs() < 1e-9, "d={d}");
        }
        assert!(incomplete_beta_sym(1).is_err());
        assert!(incomplete_beta_sym(1_000_000).unwrap() < PI);
    }

    #[test]
    fn incomplete_beta_against_untransformed_quadrature() {
        let raw = |t: f64| 1.0 / (t.sqrt() * (1.0 - t).sqrt());
        for d in [3u64, 29] {
            let lo = 1.0 / (d as f64 + 1.0);
            let q = adaptive_simpson(&raw, lo, 1.0 - lo, 1e-13, 60);
            assert!((q - incomplete_beta_sym(d).unwrap()).abs() < 1e-9, "d={d}");
        }
    }

    #[test]
    fn incomplete_beta_is_increasing_and_bounded() {
        let mut prev = 0.0;
        for d in 2..500 {
            let v = incomplete_beta_sym(d).unwrap();
            assert!(v > prev && v < PI);
            prev = v;
        }
    }

    #[test]
    fn rhs_examples() {
        assert_eq!(rhs_bounds(RhsKind::SeriesBound, 0.0).unwrap(), 0.0);
        assert_eq!(rhs_bounds(RhsKind::CircleMean, 0.0).unwrap(), 0.0);
        let v = rhs_bounds(RhsKind::SeriesBound, 0.5).unwrap();
        assert!((v - (0.5 + 2f64.ln())).abs() < 1e-15);
        assert!(rhs_bounds(RhsKind::CircleMean, 1.0).is_err());
    }

    #[test]
    fn kernel_tail_matches_difference() {
        for &(x, n) in &[(0.49f64, 10usize), (0.81, 64), (0.9, 256), (0.5, 0)] {
            let head: f64 = (1..=n).map(|j| x.powi(j as i32) / j as f64).sum();
            let tail = log_kernel_tail(x, n);
            assert!((head + tail - log_kernel(x)).abs() < 1e-13, "x={x} n={n}");
            assert!(tail <= x.powi(n as i32 + 1) / ((n + 1) as f64 * (1.0 - x)) * (1.0 + 1e-12));
        }
        assert!(log_kernel_tail(0.99999, 10) > 0.0);
    }

    proptest! {
        #[test]
        fn pochhammer_recurrence(a in -5.0f64..5.0, n in 0u32..20) {
            let lhs = pochhammer(a, n + 1);
            let rhs = pochhammer(a, n) * (a + n as f64);
            prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(1.0));
        }

        #[test]
        fn series_bound_is_nonnegative(s in 0.0f64..0.999) {
            let v = rhs_bounds(RhsKind::SeriesBound, s).unwrap();
            prop_assert!(v >= 0.0);
        }
    }
}
