//! Coefficient-exact verifiers for the correlation inequalities and the
//! identities behind them. Disk and circle integrals of polynomial data are
//! evaluated through monomial moments, never by quadrature.

use num_bigint::BigInt;
use num_complex::Complex64 as C64;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::seq::SliceRandom;

use crate::gaf::{CouplingMode, GafCoupling};
use crate::matrix::{self, CMat, ContractionMatrix};
use crate::par;
use crate::report::{BoundReport, Check, Table};
use crate::rng::RngStream;
use crate::series::{PowerSeries1, PowerSeries2};
use crate::special::{log_kernel, log_kernel_tail, pochhammer, rhs_bounds, RhsKind};
use crate::symbols::contraction_from_systems;
use crate::{Error, Result};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Relative rounding allowance for sums that carry no truncation tail.
pub const ROUNDING_REL: f64 = 1e-12;
/// Relative tolerance for identities.
pub const IDENTITY_REL: f64 = 1e-10;
/// Largest per-variable degree accepted by [`diagonal_expansion_check`].
pub const EXPANSION_MAX_DEGREE: usize = 12;
/// Largest `n` accepted by [`combinatorial_identity_check`].
pub const COMBINATORIAL_MAX_N: usize = 40;

/// `F(l) = sum_{j+k=l} (jk)^{-1/2} M[(k-1, j-1)]` for `l = 0..=2N`.
pub fn antidiagonal_sums(m: &CMat) -> Vec<C64> {
    let n = m.nrows().min(m.ncols());
    let mut out = vec![ZERO; 2 * n + 1];
    for k in 1..=n {
        for j in 1..=n {
            out[j + k] += m[(k - 1, j - 1)] / ((j * k) as f64).sqrt();
        }
    }
    out
}

fn check_grid(grid: &[f64], what: &'static str) -> Result<()> {
    for &x in grid {
        if !(0.0..1.0).contains(&x) {
            return Err(Error::Domain { value: x, domain: what });
        }
    }
    Ok(())
}

/// `sum_l x^l |F(l)|^2`, with `x^l` formed in log space.
fn weighted_mass(f: &[C64], x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let lx = x.ln();
    f.iter()
        .enumerate()
        .filter(|(_, c)| c.norm_sqr() > 0.0)
        .map(|(l, c)| (l as f64 * lx).exp() * c.norm_sqr())
        .sum()
}

/// `sum_l s^l |sum_{j+k=l} (jk)^{-1/2} <x_j, y_k>|^2 <= 2 s log(e^{1/2}/(1-s))` on a grid,
/// with `<x_j, y_k>` stored at row `k-1`, column `j-1`.
pub fn verify_series_bound(a: &ContractionMatrix, s_grid: &[f64]) -> Result<BoundReport> {
    check_grid(s_grid, "0 <= s < 1")?;
    let f = antidiagonal_sums(a.entries());
    let mut r = BoundReport::new("bounds.series")
        .param("dim", a.dim())
        .param("norm", a.norm_certificate());
    for &s in s_grid {
        let lhs = weighted_mass(&f, s);
        let rhs = rhs_bounds(RhsKind::SeriesBound, s)?;
        r.push(Check::leq(format!("s={s}"), lhs, rhs, ROUNDING_REL * rhs.max(1.0)));
    }
    let mut t = Table::new(&["l", "re_S", "im_S", "abs_S_sq", "running_average"]);
    let (mut num, mut den) = (0.0, 0.0);
    for (l, c) in f.iter().enumerate().skip(2) {
        let s = c * (l as f64).sqrt();
        num += s.norm_sqr() / l as f64;
        den += 1.0 / l as f64;
        t.push(vec![l as f64, s.re, s.im, s.norm_sqr(), num / den]);
    }
    r.set_param("average_abs_S_sq", num / den.max(f64::MIN_POSITIVE));
    r.table = Some(t);
    Ok(r)
}

/// [`verify_series_bound`] for two orthonormal frames given as matrix columns.
pub fn verify_series_bound_systems(x: &CMat, y: &CMat, s_grid: &[f64]) -> Result<BoundReport> {
    verify_series_bound(&contraction_from_systems(x, y)?, s_grid)
}

/// `sum_l r^{2l} |F(l)|^2 <= 2 r^2 log(1/(1-r^2)) + r^2` for the analytic correlation of `c`.
pub fn verify_circle_mean(c: &GafCoupling, r_grid: &[f64]) -> Result<BoundReport> {
    check_grid(r_grid, "0 <= r < 1")?;
    let f = antidiagonal_sums(&c.analytic_matrix());
    let mut r = BoundReport::new("bounds.circle_mean")
        .param("mode", c.mode().name())
        .param("trunc", c.trunc());
    for &x in r_grid {
        let lhs = weighted_mass(&f, x * x);
        let rhs = rhs_bounds(RhsKind::CircleMean, x)?;
        r.push(Check::leq(format!("r={x}"), lhs, rhs, ROUNDING_REL * rhs.max(1.0)));
    }
    Ok(r)
}

/// `int_D |a w E Phi(z) Psi'(w) + b conj(w) E Phi(z) conj Psi'(w)|^2 dA(w)/|w|^2
///  <= (|a|^2 + |b|^2) log 1/(1-|z|^2)`.
///
/// The holomorphic and antiholomorphic parts are orthogonal, and each equals
/// `sum_k k |c_k(z)|^2` with `c_k(z)` the coefficient of `w^k` in the kernel.
/// The tolerance is the right-hand side mass beyond the truncation.
pub fn verify_fundamental_integral(c: &GafCoupling, zs: &[C64], a: C64, b: C64) -> Result<BoundReport> {
    for &z in zs {
        if !(z.norm() < 1.0) {
            return Err(Error::OutsideDisk(z));
        }
    }
    let n = c.trunc();
    let an = c.exact_analytic_correlation();
    let se = c.exact_sesquianalytic_correlation();
    let weight = a.norm_sqr() + b.norm_sqr();
    let mut r = BoundReport::new("bounds.fundamental_integral")
        .param("mode", c.mode().name())
        .param("trunc", n)
        .param("a", format!("{a}"))
        .param("b", format!("{b}"));
    let radial = |k: &PowerSeries2, z: C64| -> f64 {
        (1..=n)
            .map(|q| {
                let mut ck = ZERO;
                let mut zp = C64::new(1.0, 0.0);
                for p in 1..=n {
                    zp *= z;
                    ck += k.coeff(p, q) * zp;
                }
                q as f64 * ck.norm_sqr()
            })
            .sum()
    };
    for &z in zs {
        let x = z.norm_sqr();
        let lhs = a.norm_sqr() * radial(&an, z) + b.norm_sqr() * radial(&se, z);
        let rhs = weight * log_kernel(x);
        let tail = weight * log_kernel_tail(x, n);
        r.push(Check::leq(format!("z={z:.4}"), lhs, rhs, tail + ROUNDING_REL * rhs.max(1.0)));
    }
    Ok(r)
}

/// Right-hand-side mass of [`verify_fundamental_integral`] dropped by truncating at `n`.
pub fn fundamental_integral_tail(n: usize, z: C64, a: C64, b: C64) -> f64 {
    (a.norm_sqr() + b.norm_sqr()) * log_kernel_tail(z.norm_sqr(), n)
}

#[derive(Clone, Debug, PartialEq)]
pub struct AsymptoticVariance {
    pub r: Vec<f64>,
    pub ratio: Vec<f64>,
    /// Largest ratio over the last quarter of the grid; an estimate of the limsup.
    pub limsup_proxy: f64,
}

/// `(sum_l r^{2l} |F(l)|^2) / log(1/(1-r^2))` from sparse coefficients `(l, F(l))`.
pub fn asymptotic_variance(coeffs: &[(u64, C64)], r_grid: &[f64]) -> Result<AsymptoticVariance> {
    if r_grid.is_empty() {
        return Err(Error::Invalid("empty radius grid".into()));
    }
    check_grid(r_grid, "0 <= r < 1")?;
    if r_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Invalid("radius grid must increase".into()));
    }
    let ratio: Vec<f64> = r_grid
        .iter()
        .map(|&r| {
            if r == 0.0 {
                return 0.0;
            }
            let l2 = 2.0 * r.ln();
            let num: f64 = coeffs.iter().map(|&(l, c)| (l as f64 * l2).exp() * c.norm_sqr()).sum();
            num / log_kernel(r * r)
        })
        .collect();
    let start = (3 * ratio.len()) / 4;
    let limsup_proxy = ratio[start.min(ratio.len() - 1)..].iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(AsymptoticVariance {
        r: r_grid.to_vec(),
        ratio,
        limsup_proxy,
    })
}

/// Nonzero coefficients of a series as `(l, F(l))` pairs.
pub fn sparse_coefficients(f: &PowerSeries1) -> Vec<(u64, C64)> {
    f.coeffs()
        .iter()
        .enumerate()
        .filter(|(_, c)| c.norm_sqr() > 0.0)
        .map(|(l, &c)| (l as u64, c))
        .collect()
}

/// `|z^m|^2` in `A^2_alpha`: `m! Gamma(alpha+2) / Gamma(m+alpha+2)`.
pub fn weighted_bergman_moment(m: usize, alpha: f64) -> f64 {
    (1..=m).map(|i| i as f64 / (alpha + 1.0 + i as f64)).product()
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

/// Highest `(z, w)` degrees carrying a nonzero coefficient.
fn degrees(f: &PowerSeries2) -> (usize, usize) {
    f.iter()
        .filter(|&(_, _, c)| c.norm_sqr() > 0.0)
        .fold((0, 0), |(a, b), (p, q, _)| (a.max(p), b.max(q)))
}

/// Hardy-in-`z`, Bergman-in-`w` norm `sum |c_pq|^2/(q+1)` against the
/// diagonal norm expansion `sum_n (n+2)_n/(n+1)! |g_n|^2_{A^2_{2n+1}}` with
/// `g_n = sum_k (-1)^k (k+2)_{n-k} / (k! (n-k)! (n+k+2)_{n-k}) d_z^{n-k} diag(d_w^k f)`.
/// Each `n` term is also asserted nonnegative.
pub fn diagonal_expansion_check(f: &PowerSeries2) -> Result<BoundReport> {
    if f.iter().any(|(_, _, c)| !(c.re.is_finite() && c.im.is_finite())) {
        return Err(Error::NonFinite);
    }
    let (dz, dw) = degrees(f);
    if dz.max(dw) > EXPANSION_MAX_DEGREE {
        return Err(Error::Domain {
            value: dz.max(dw) as f64,
            domain: "polynomial degree <= 12 in each variable",
        });
    }
    let lhs: f64 = f.iter().map(|(_, q, c)| c.norm_sqr() / (q + 1) as f64).sum();
    let total = dz + dw;
    let terms = diagonal_expansion_terms(f, total);
    let rhs: f64 = terms.iter().sum();
    let mut r = BoundReport::new("bounds.diagonal_expansion")
        .param("degree_z", dz)
        .param("degree_w", dw);
    r.push(Check::eq("norm identity", lhs, rhs, IDENTITY_REL * lhs.max(f64::MIN_POSITIVE)));
    for (n, &t) in terms.iter().enumerate() {
        r.push(Check::leq(format!("term n={n} nonnegative"), 0.0, t, 0.0));
    }
    Ok(r)
}

/// The `n = 0..=n_max` terms of the diagonal norm expansion.
pub fn diagonal_expansion_terms(f: &PowerSeries2, n_max: usize) -> Vec<f64> {
    let (dz, dw) = degrees(f);
    let total = dz + dw;
    // diag(d_w^k f) as a polynomial in z of degree <= total - k
    let diag_k: Vec<Vec<C64>> = (0..=n_max.min(dw))
        .map(|k| {
            let mut out = vec![ZERO; total + 1];
            for (p, q, c) in f.iter() {
                if q >= k && c.norm_sqr() > 0.0 {
                    let falling: f64 = ((q - k + 1)..=q).map(|i| i as f64).product();
                    out[p + q - k] += c * falling;
                }
            }
            out
        })
        .collect();
    (0..=n_max)
        .map(|n| {
            let mut g = vec![ZERO; total + 1];
            for (k, dk) in diag_k.iter().enumerate().take(n + 1) {
                let i = n - k;
                let w = (if k % 2 == 0 { 1.0 } else { -1.0 }) * pochhammer((k + 2) as f64, i as u32)
                    / (factorial(k) * factorial(i) * pochhammer((n + k + 2) as f64, i as u32));
                for (m, &c) in dk.iter().enumerate().skip(i) {
                    if c.norm_sqr() > 0.0 {
                        let falling: f64 = ((m - i + 1)..=m).map(|x| x as f64).product();
                        g[m - i] += c * (w * falling);
                    }
                }
            }
            let alpha = (2 * n + 1) as f64;
            let norm: f64 = g.iter().enumerate().map(|(m, c)| c.norm_sqr() * weighted_bergman_moment(m, alpha)).sum();
            pochhammer((n + 2) as f64, n as u32) / factorial(n + 1) * norm
        })
        .collect()
}

fn big(n: usize) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn rising(a: usize, n: usize) -> BigRational {
    (0..n).fold(BigRational::one(), |acc, i| acc * big(a + i))
}

fn fact(n: usize) -> BigRational {
    rising(1, n)
}

/// Left side `sum_{k+l=m} (-1)^k (k+2)_{n-k} / (k! l! (n-m)! (n+k+2)_{n-k})`.
pub fn combinatorial_lhs(n: usize, m: usize) -> BigRational {
    let mut acc = BigRational::zero();
    for k in 0..=m {
        let l = m - k;
        let t = rising(k + 2, n - k) / (fact(k) * fact(l) * fact(n - m) * rising(n + k + 2, n - k));
        if k % 2 == 0 {
            acc += t;
        } else {
            acc -= t;
        }
    }
    acc
}

/// Right side `(-1)^m (n+1) [(n-m+1)_m]^2 / (m! (m+1)! (n+2)_n)`.
pub fn combinatorial_rhs(n: usize, m: usize) -> BigRational {
    let p = rising(n - m + 1, m);
    let v = big(n + 1) * &p * &p / (fact(m) * fact(m + 1) * rising(n + 2, n));
    if m.is_multiple_of(2) {
        v
    } else {
        -v
    }
}

/// Exact equality of both sides for all `0 <= m <= n <= n_max`.
pub fn combinatorial_identity_check(n_max: usize) -> Result<BoundReport> {
    if n_max > COMBINATORIAL_MAX_N {
        return Err(Error::Domain {
            value: n_max as f64,
            domain: "n_max <= 40",
        });
    }
    let pairs: Vec<(usize, usize)> = (0..=n_max).flat_map(|n| (0..=n).map(move |m| (n, m))).collect();
    let results = par::map_slice(&pairs, |&(n, m)| {
        let l = combinatorial_lhs(n, m);
        let r = combinatorial_rhs(n, m);
        let diff = (&l - &r).abs();
        (n, m, to_f64(&l), to_f64(&r), diff.is_zero())
    });
    let mut rep = BoundReport::new("bounds.combinatorial").param("n_max", n_max);
    for (n, m, l, r, exact) in results {
        let mut ch = Check::eq(format!("n={n} m={m}"), l, r, 0.0);
        ch.pass = exact;
        ch.margin = if exact { 0.0 } else { -(l - r).abs().max(f64::MIN_POSITIVE) };
        rep.push(ch);
    }
    Ok(rep)
}

fn to_f64(q: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    q.to_f64().unwrap_or(f64::NAN)
}

/// `int_D |f'|^2 (1-|z|^2) dA = int_T |f|^2 ds - int_D |f|^2 dA` for a polynomial,
/// by the moments `int_D |z|^{2k} dA = 1/(k+1)` and `int_T |z|^{2k} ds = 1`.
pub fn littlewood_paley_check(f: &PowerSeries1) -> Result<BoundReport> {
    if f.coeffs().iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
        return Err(Error::NonFinite);
    }
    let df = f.derivative();
    let lhs: f64 = df
        .coeffs()
        .iter()
        .enumerate()
        .map(|(k, c)| c.norm_sqr() * (1.0 / (k + 1) as f64 - 1.0 / (k + 2) as f64))
        .sum();
    let circle: f64 = f.coeffs().iter().map(|c| c.norm_sqr()).sum();
    let area: f64 = f.coeffs().iter().enumerate().map(|(m, c)| c.norm_sqr() / (m + 1) as f64).sum();
    let rhs = circle - area;
    let mut r = BoundReport::new("bounds.littlewood_paley").param("order", f.order());
    r.push(Check::eq("identity", lhs, rhs, 1e-12 * circle.max(1.0)));
    Ok(r)
}

/// Coupling corpus used by the bound sweeps: permutation, analytic and
/// sesquianalytic contraction and conjugate-reflect modes, in rotation.
pub fn coupling_corpus(n: usize, count: usize, seed: u64) -> Result<Vec<GafCoupling>> {
    let base = RngStream::new(seed, 0x5eed);
    par::map_range(count, |i| {
        let mut rng = base.substream(i as u64);
        match i % 4 {
            0 => {
                let mut pi: Vec<usize> = (1..=n).collect();
                pi.shuffle(rng.rng_mut());
                GafCoupling::new(n, CouplingMode::Permutation(pi))
            }
            1 => {
                let smax = 0.5 + 0.5 * rng.uniform();
                let t = matrix::random_contraction(n, smax, &mut rng);
                GafCoupling::new(n, CouplingMode::AnalyticContraction(t))
            }
            2 => Ok(GafCoupling::conjugate_reflect(n)),
            _ => {
                let t = matrix::random_contraction(n, 1.0, &mut rng);
                GafCoupling::new(n, CouplingMode::SesquianalyticContraction(t))
            }
        }
    })
    .into_iter()
    .collect()
}

/// Grid `1 - 10^{-e}` for `e` from `e_lo` to `e_hi` in `steps` equal increments, with 0 prepended (once).
pub fn near_one_grid(e_lo: f64, e_hi: f64, steps: usize) -> Vec<f64> {
    let mut g = vec![0.0];
    for i in 0..=steps {
        let e = e_lo + (e_hi - e_lo) * i as f64 / steps.max(1) as f64;
        g.push(1.0 - 10f64.powf(-e));
    }
    g.dedup();
    g
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chase::ChasePermutation;
    use proptest::prelude::*;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn series_bound_examples() {
        let grid = near_one_grid(0.0, 6.0, 24);
        let id = ContractionMatrix::identity(64);
        let r = verify_series_bound(&id, &grid).unwrap();
        assert!(r.all_pass());
        for (ch, &s) in r.checks.iter().zip(&grid) {
            let direct: f64 = (1..=64).map(|m| s.powi(2 * m) / (m * m) as f64).sum();
            assert!((ch.lhs - direct).abs() < 1e-12 * direct.max(1.0));
        }
        let z = verify_series_bound(&ContractionMatrix::zeros(8), &grid).unwrap();
        assert!(z.checks.iter().all(|ch| ch.lhs == 0.0));
        assert!(verify_series_bound(&id, &[1.0]).is_err());
    }

    #[test]
    fn series_bound_chase_permutation() {
        let p = ChasePermutation::build(29, 2).unwrap();
        let pi = p.restricted(256).unwrap();
        let m = CMat::from_fn(256, 256, |k, j| if pi[k] == j + 1 { c(1.0) } else { ZERO });
        let r = verify_series_bound(&ContractionMatrix::contraction(m).unwrap(), &[0.99]).unwrap();
        assert!(r.checks[0].margin > 0.0);
    }

    #[test]
    fn series_bound_from_frames() {
        let mut rng = RngStream::new(8, 0);
        let u = matrix::haar_unitary(40, &mut rng);
        let v = matrix::haar_unitary(40, &mut rng);
        let x = u.columns(0, 20).into_owned();
        let y = v.columns(0, 20).into_owned();
        assert!(verify_series_bound_systems(&x, &y, &[0.5, 0.999]).unwrap().all_pass());
    }

    #[test]
    fn circle_mean_examples() {
        let grid = near_one_grid(0.0, 6.0, 12);
        let r = verify_circle_mean(&GafCoupling::identical(32), &grid).unwrap();
        assert!(r.checks.iter().all(|ch| ch.lhs == 0.0 && ch.pass));
        let r = verify_circle_mean(&GafCoupling::conjugate_reflect(128), &grid).unwrap();
        assert!(r.all_pass());
        assert!(r.checks.iter().all(|ch| ch.lhs <= std::f64::consts::PI.powi(2) / 6.0));
        let p = ChasePermutation::build(29, 2).unwrap();
        let g = GafCoupling::new(256, CouplingMode::Permutation(p.restricted(256).unwrap())).unwrap();
        assert!(verify_circle_mean(&g, &[1.0 - 1e-4]).unwrap().all_pass());
    }

    #[test]
    fn fundamental_integral_examples() {
        let z = c(0.7);
        let r = verify_fundamental_integral(&GafCoupling::independent(16), &[z, c(0.2)], c(1.0), c(1.0)).unwrap();
        assert!(r.checks.iter().all(|ch| ch.lhs == 0.0));
        for (g, a, b) in [
            (GafCoupling::identical(64), c(0.0), c(1.0)),
            (GafCoupling::conjugate_reflect(64), c(1.0), c(0.0)),
        ] {
            let r = verify_fundamental_integral(&g, &[z], a, b).unwrap();
            let tail = fundamental_integral_tail(64, z, a, b);
            let ch = &r.checks[0];
            assert!(ch.pass);
            assert!(ch.margin <= tail * (1.0 + 1e-9) + 1e-14, "{} vs {tail}", ch.margin);
        }
    }

    #[test]
    fn fundamental_integral_against_polar_quadrature() {
        let mut rng = RngStream::new(9, 0);
        let n = 4;
        let t = matrix::random_contraction(n, 1.0, &mut rng);
        let g = GafCoupling::new(n, CouplingMode::AnalyticContraction(t)).unwrap();
        let k = g.exact_analytic_correlation();
        let z = C64::new(0.3, -0.4);
        let (a, b) = (C64::new(0.6, 0.2), c(0.0));
        let exact = verify_fundamental_integral(&g, &[z], a, b).unwrap().checks[0].lhs;
        // integrand |a w d_w K(z,w)|^2 / |w|^2 over the disk, normalized area
        // pad by one order so the derivative keeps every w-degree
        let padded = PowerSeries2::from_fn(n + 1, crate::series::Support::Box, |p, q| {
            if p <= n && q <= n { k.coeff(p, q) } else { ZERO }
        });
        let dk = padded.diff_w();
        let nr = 200;
        let nt = 64;
        let mut q = 0.0;
        for i in 0..nr {
            let rho = (i as f64 + 0.5) / nr as f64;
            for t in 0..nt {
                let th = 2.0 * std::f64::consts::PI * t as f64 / nt as f64;
                let w = C64::from_polar(rho, th);
                let v = a * dk.eval(z, w);
                q += v.norm_sqr() * rho;
            }
        }
        q *= 2.0 / (nr as f64 * nt as f64);
        assert!((q - exact).abs() < 1e-4 * exact.max(1e-3), "{q} vs {exact}");
    }

    #[test]
    fn asymptotic_variance_examples() {
        let grid: Vec<f64> = (1..=20).map(|i| 1.0 - 10f64.powf(-(i as f64) / 4.0)).collect();
        let zero = asymptotic_variance(&[], &grid).unwrap();
        assert!(zero.ratio.iter().all(|&x| x == 0.0));
        let f = PowerSeries1::from_fn(4000, |l| if l > 0 && l % 2 == 0 { c(2.0 / l as f64) } else { ZERO });
        let av = asymptotic_variance(&sparse_coefficients(&f), &grid).unwrap();
        assert!(av.ratio.last().unwrap() < &0.6);
        assert!(av.limsup_proxy < 1.7);
        assert!(asymptotic_variance(&[], &[]).is_err());
        assert!(asymptotic_variance(&[], &[0.5, 0.4]).is_err());
    }

    #[test]
    fn diagonal_expansion_examples() {
        let one = PowerSeries2::monomial(2, 0, 0, c(1.0));
        let r = diagonal_expansion_check(&one).unwrap();
        assert!(r.all_pass());
        assert!((r.checks[0].lhs - 1.0).abs() < 1e-15);
        let zw = PowerSeries2::monomial(2, 1, 1, c(1.0));
        let t = diagonal_expansion_terms(&zw, 2);
        for (got, want) in t.iter().zip([1.0 / 6.0, 1.0 / 30.0, 3.0 / 10.0]) {
            assert!((got - want).abs() < 1e-15, "{got} vs {want}");
        }
        assert!(diagonal_expansion_check(&zw).unwrap().all_pass());
        let big = PowerSeries2::monomial(13, 13, 0, c(1.0));
        assert!(diagonal_expansion_check(&big).is_err());
    }

    #[test]
    fn combinatorial_examples() {
        let q = |a: i64, b: i64| BigRational::new(BigInt::from(a), BigInt::from(b));
        assert_eq!(combinatorial_lhs(1, 0), q(2, 3));
        assert_eq!(combinatorial_rhs(1, 0), q(2, 3));
        assert_eq!(combinatorial_lhs(1, 1), q(-1, 3));
        assert_eq!(combinatorial_rhs(1, 1), q(-1, 3));
        assert_eq!(combinatorial_lhs(0, 0), q(1, 1));
        assert!(combinatorial_identity_check(12).unwrap().all_pass());
        assert!(combinatorial_identity_check(41).is_err());
    }

    #[test]
    fn littlewood_paley_examples() {
        for (k, want) in [(0usize, 0.0), (1, 0.5), (2, 2.0 / 3.0)] {
            let f = PowerSeries1::monomial(4, k, c(1.0));
            let r = littlewood_paley_check(&f).unwrap();
            assert!(r.all_pass());
            assert!((r.checks[0].lhs - want).abs() < 1e-15);
        }
    }

    #[test]
    fn corpus_is_valid_and_reproducible() {
        let a = coupling_corpus(12, 8, 3).unwrap();
        let b = coupling_corpus(12, 8, 3).unwrap();
        assert_eq!(a.len(), 8);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.analytic_matrix(), y.analytic_matrix());
            assert_eq!(x.sesquianalytic_matrix(), y.sesquianalytic_matrix());
        }
    }

    fn poly_strategy(deg: usize) -> impl Strategy<Value = PowerSeries2> {
        proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), (deg + 1) * (deg + 1)).prop_map(move |v| {
            PowerSeries2::from_fn(deg, crate::series::Support::Box, |p, q| {
                let (a, b) = v[p * (deg + 1) + q];
                C64::new(a, b)
            })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn diagonal_expansion_is_an_identity(f in poly_strategy(6)) {
            let r = diagonal_expansion_check(&f).unwrap();
            prop_assert!(r.all_pass(), "{:?}", r.failures().next());
        }

        #[test]
        fn littlewood_paley_holds(v in proptest::collection::vec((-2.0f64..2.0, -2.0f64..2.0), 1..30)) {
            let f = PowerSeries1::new(v.into_iter().map(|(a, b)| C64::new(a, b)).collect());
            prop_assert!(littlewood_paley_check(&f).unwrap().all_pass());
        }

        #[test]
        fn bounds_hold_on_random_contractions(seed in 0u64..1000, s in 0.0f64..0.999999) {
            let mut rng = RngStream::new(seed, 1);
            let t = matrix::random_contraction(24, 1.0, &mut rng);
            prop_assert!(verify_series_bound(&t, &[s]).unwrap().all_pass());
            let g = GafCoupling::new(24, CouplingMode::AnalyticContraction(t)).unwrap();
            prop_assert!(verify_circle_mean(&g, &[s.sqrt()]).unwrap().all_pass());
            prop_assert!(verify_fundamental_integral(&g, &[C64::new(0.0, s.sqrt())], C64::new(1.0, 0.0), C64::new(0.5, 0.5)).unwrap().all_pass());
        }
    }
}
