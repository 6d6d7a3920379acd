//! Truncated complex Taylor series in one and two disk variables.
//!
//! A [`PowerSeries1`] of order `N` stores `c_0..=c_N`. A [`PowerSeries2`] of
//! order `N` stores a dense `(N+1) x (N+1)` grid together with a [`Support`]
//! telling which coefficients are exact: every coefficient of the box, or only
//! those of total degree at most `N`. Binary operations truncate to the
//! smaller order and never invent coefficients that were not determined by
//! their inputs.
//!
//! Kernels that are antiholomorphic in the second slot (for instance
//! `log 1/(1 - z conj(w))`) are stored as holomorphic series in `(z, v)` with
//! `v = conj(w)` substituted by the caller at evaluation time.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64 as C64;

use crate::{Error, Result};

/// Slack allowed on the unit-constant-term precondition of [`PowerSeries1::log`].
pub const TOL_CONST: f64 = 1e-10;
/// Slack allowed when checking that a series vanishes on a factor's zero set.
pub const TOL_DIV: f64 = 1e-9;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

fn check_unit_constant(c0: C64) -> Result<()> {
    if c0 == ZERO {
        return Err(Error::ZeroConstantTerm);
    }
    if (c0 - ONE).norm() > TOL_CONST {
        return Err(Error::ConstantTermNotOne(c0));
    }
    Ok(())
}

/// Univariate truncated Taylor series `sum_{j<=N} c_j z^j`.
#[derive(Clone, Debug, PartialEq)]
pub struct PowerSeries1 {
    coeffs: Vec<C64>,
}

impl PowerSeries1 {
    /// Series with the given coefficients; an empty vector is the zero series of order 0.
    pub fn new(mut coeffs: Vec<C64>) -> Self {
        if coeffs.is_empty() {
            coeffs.push(ZERO);
        }
        Self { coeffs }
    }

    pub fn zeros(order: usize) -> Self {
        Self {
            coeffs: vec![ZERO; order + 1],
        }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn from_fn(order: usize, f: impl Fn(usize) -> C64) -> Self {
        Self {
            coeffs: (0..=order).map(f).collect(),
        }
    }

    /// `c * z^k` at the given order (zero if `k > order`).
    pub fn monomial(order: usize, k: usize, c: C64) -> Self {
        Self::from_fn(order, |j| if j == k { c } else { ZERO })
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Coefficient of `z^j`. Panics beyond the truncation order.
    pub fn coeff(&self, j: usize) -> C64 {
        self.coeffs[j]
    }

    pub fn get(&self, j: usize) -> Option<C64> {
        self.coeffs.get(j).copied()
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn truncate(&self, order: usize) -> Self {
        Self {
            coeffs: self.coeffs[..=order.min(self.order())].to_vec(),
        }
    }

    pub fn scale(&self, c: C64) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|&a| a * c).collect(),
        }
    }

    /// Formal derivative; the order drops by one (order 0 stays a zero constant).
    pub fn derivative(&self) -> Self {
        if self.order() == 0 {
            return Self::zeros(0);
        }
        Self::from_fn(self.order() - 1, |j| self.coeffs[j + 1] * (j + 1) as f64)
    }

    /// Antiderivative vanishing at 0; the order grows by one.
    pub fn integral(&self) -> Self {
        Self::from_fn(self.order() + 1, |j| {
            if j == 0 {
                ZERO
            } else {
                self.coeffs[j - 1] / j as f64
            }
        })
    }

    /// Multiply by `z^k`, keeping every determined coefficient (order grows by `k`).
    pub fn shift(&self, k: usize) -> Self {
        Self::from_fn(self.order() + k, |j| {
            if j < k {
                ZERO
            } else {
                self.coeffs[j - k]
            }
        })
    }

    /// Divide by `z^k`; the dropped low coefficients must vanish within [`TOL_DIV`].
    pub fn unshift(&self, k: usize) -> Result<Self> {
        if k > self.order() {
            return Err(Error::InsufficientOrder {
                have: self.order(),
                need: k,
            });
        }
        let scale = self.max_abs().max(1.0);
        let residual = self.coeffs[..k].iter().map(|c| c.norm()).fold(0.0, f64::max);
        if residual > TOL_DIV * scale {
            return Err(Error::NotDivisible {
                factor: "z^k",
                residual,
                tol: TOL_DIV * scale,
            });
        }
        Ok(Self {
            coeffs: self.coeffs[k..].to_vec(),
        })
    }

    /// Logarithm of a series with unit constant term, from `L' = a'/a`.
    pub fn log(&self) -> Result<Self> {
        let a = &self.coeffs;
        check_unit_constant(a[0])?;
        let n_max = self.order();
        let mut l = vec![ZERO; n_max + 1];
        l[0] = a[0].ln();
        let inv = a[0].inv();
        for n in 1..=n_max {
            let mut acc = a[n] * n as f64;
            for k in 1..n {
                acc -= l[k] * a[n - k] * k as f64;
            }
            l[n] = acc * inv / n as f64;
        }
        Ok(Self { coeffs: l })
    }

    /// Exponential, from `E' = a' E`.
    pub fn exp(&self) -> Self {
        let a = &self.coeffs;
        let n_max = self.order();
        let mut e = vec![ZERO; n_max + 1];
        e[0] = a[0].exp();
        for n in 1..=n_max {
            let mut acc = ZERO;
            for k in 1..=n {
                acc += a[k] * e[n - k] * k as f64;
            }
            e[n] = acc / n as f64;
        }
        Self { coeffs: e }
    }

    /// Multiplicative inverse; needs a nonzero constant term.
    pub fn recip(&self) -> Result<Self> {
        let a = &self.coeffs;
        if a[0] == ZERO {
            return Err(Error::ZeroConstantTerm);
        }
        let inv = a[0].inv();
        let n_max = self.order();
        let mut b = vec![ZERO; n_max + 1];
        b[0] = inv;
        for n in 1..=n_max {
            let mut acc = ZERO;
            for k in 1..=n {
                acc += a[k] * b[n - k];
            }
            b[n] = -acc * inv;
        }
        Ok(Self { coeffs: b })
    }

    pub fn pow(&self, k: usize) -> Self {
        let mut out = Self::monomial(self.order(), 0, ONE);
        for _ in 0..k {
            out = &out * self;
        }
        out
    }

    pub fn eval(&self, z: C64) -> C64 {
        self.coeffs.iter().rev().fold(ZERO, |acc, &c| acc * z + c)
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Largest coefficient difference over the common order.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

impl Add for &PowerSeries1 {
    type Output = PowerSeries1;
    fn add(self, rhs: &PowerSeries1) -> PowerSeries1 {
        let n = self.order().min(rhs.order());
        PowerSeries1::from_fn(n, |j| self.coeffs[j] + rhs.coeffs[j])
    }
}

impl Sub for &PowerSeries1 {
    type Output = PowerSeries1;
    fn sub(self, rhs: &PowerSeries1) -> PowerSeries1 {
        let n = self.order().min(rhs.order());
        PowerSeries1::from_fn(n, |j| self.coeffs[j] - rhs.coeffs[j])
    }
}

impl Mul for &PowerSeries1 {
    type Output = PowerSeries1;
    fn mul(self, rhs: &PowerSeries1) -> PowerSeries1 {
        let n = self.order().min(rhs.order());
        PowerSeries1::from_fn(n, |l| {
            (0..=l).map(|j| self.coeffs[j] * rhs.coeffs[l - j]).sum()
        })
    }
}

impl Neg for &PowerSeries1 {
    type Output = PowerSeries1;
    fn neg(self) -> PowerSeries1 {
        self.scale(-ONE)
    }
}

/// Which coefficients of a [`PowerSeries2`] grid are determined.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub enum Support {
    /// Every `c_jk` with `j, k <= N`.
    Box,
    /// Only `c_jk` with `j + k <= N`; the rest of the grid is stored as zero.
    Simplex,
}

/// Bivariate truncated Taylor series `sum c_jk z^j w^k`.
#[derive(Clone, Debug, PartialEq)]
pub struct PowerSeries2 {
    order: usize,
    support: Support,
    coeffs: Vec<C64>,
}

/// Factors accepted by [`PowerSeries2::divide_by`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Factor {
    Z,
    W,
    ZMinusW,
}

impl PowerSeries2 {
    pub fn zeros(order: usize, support: Support) -> Self {
        Self {
            order,
            support,
            coeffs: vec![ZERO; (order + 1) * (order + 1)],
        }
    }

    /// Fill every supported coefficient from `f(j, k)`.
    pub fn from_fn(order: usize, support: Support, f: impl Fn(usize, usize) -> C64) -> Self {
        let mut out = Self::zeros(order, support);
        for j in 0..=order {
            for k in 0..=order {
                if out.in_support(j, k) {
                    out.coeffs[j * (order + 1) + k] = f(j, k);
                }
            }
        }
        out
    }

    /// Embed `a(z)` as a bivariate series constant in `w`.
    pub fn from_z(a: &PowerSeries1) -> Self {
        Self::from_fn(a.order(), Support::Box, |j, k| {
            if k == 0 {
                a.coeff(j)
            } else {
                ZERO
            }
        })
    }

    /// Embed `a(w)` as a bivariate series constant in `z`.
    pub fn from_w(a: &PowerSeries1) -> Self {
        Self::from_z(a).transpose()
    }

    /// `c z^j w^k` at the given order.
    pub fn monomial(order: usize, j: usize, k: usize, c: C64) -> Self {
        Self::from_fn(order, Support::Box, |p, q| if (p, q) == (j, k) { c } else { ZERO })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn support(&self) -> Support {
        self.support
    }

    pub fn in_support(&self, j: usize, k: usize) -> bool {
        j <= self.order
            && k <= self.order
            && match self.support {
                Support::Box => true,
                Support::Simplex => j + k <= self.order,
            }
    }

    /// Coefficient of `z^j w^k`. Panics outside the grid; zero outside the support.
    pub fn coeff(&self, j: usize, k: usize) -> C64 {
        assert!(j <= self.order && k <= self.order, "index beyond truncation order");
        self.coeffs[j * (self.order + 1) + k]
    }

    fn idx(&self, j: usize, k: usize) -> usize {
        j * (self.order + 1) + k
    }

    /// Iterate over `(j, k, c_jk)` for the supported coefficients.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        let n = self.order;
        (0..=n)
            .flat_map(move |j| (0..=n).map(move |k| (j, k)))
            .filter(move |&(j, k)| self.in_support(j, k))
            .map(move |(j, k)| (j, k, self.coeffs[self.idx(j, k)]))
    }

    pub fn truncate(&self, order: usize) -> Self {
        let order = order.min(self.order);
        Self::from_fn(order, self.support, |j, k| self.coeff(j, k))
    }

    /// Forget the coefficients outside total degree `order`.
    pub fn to_simplex(&self) -> Self {
        Self::from_fn(self.order, Support::Simplex, |j, k| self.coeff(j, k))
    }

    /// The box of side `n + 1`, if every one of its coefficients is determined.
    pub fn restrict_to_box(&self, n: usize) -> Option<Self> {
        let fits = match self.support {
            Support::Box => n <= self.order,
            Support::Simplex => 2 * n <= self.order,
        };
        fits.then(|| Self::from_fn(n, Support::Box, |j, k| self.coeff(j, k)))
    }

    /// Swap the two variables.
    pub fn transpose(&self) -> Self {
        Self::from_fn(self.order, self.support, |j, k| self.coeff(k, j))
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.iter().all(|(j, k, c)| (c - self.coeff(k, j)).norm() <= tol)
    }

    pub fn scale(&self, c: C64) -> Self {
        Self {
            order: self.order,
            support: self.support,
            coeffs: self.coeffs.iter().map(|&a| a * c).collect(),
        }
    }

    fn reconcile(&self, rhs: &Self) -> (usize, Support) {
        let order = self.order.min(rhs.order);
        let support = if self.support == Support::Box && rhs.support == Support::Box {
            Support::Box
        } else {
            Support::Simplex
        };
        (order, support)
    }

    /// Logarithm of a series with unit constant term, computed degree by degree
    /// from `a * dL/dz = da/dz` (and the `w`-derivative on the first row).
    pub fn log(&self) -> Result<Self> {
        let a00 = self.coeff(0, 0);
        check_unit_constant(a00)?;
        let inv = a00.inv();
        let mut l = Self::zeros(self.order, self.support);
        l.coeffs[0] = a00.ln();
        for j in 0..=self.order {
            for k in 0..=self.order {
                if (j, k) == (0, 0) || !self.in_support(j, k) {
                    continue;
                }
                let val = if j == 0 {
                    let mut acc = self.coeff(0, k) * k as f64;
                    for q in 1..k {
                        acc -= self.coeff(0, q) * l.coeff(0, k - q) * (k - q) as f64;
                    }
                    acc * inv / k as f64
                } else {
                    let mut acc = self.coeff(j, k) * j as f64;
                    for p in 0..=j {
                        for q in 0..=k {
                            if (p, q) == (0, 0) || p == j {
                                continue;
                            }
                            acc -= self.coeff(p, q) * l.coeff(j - p, k - q) * (j - p) as f64;
                        }
                    }
                    acc * inv / j as f64
                };
                let i = l.idx(j, k);
                l.coeffs[i] = val;
            }
        }
        Ok(l)
    }

    /// Exponential, degree by degree from `dE/dz = (dL/dz) E`.
    pub fn exp(&self) -> Self {
        let mut e = Self::zeros(self.order, self.support);
        e.coeffs[0] = self.coeff(0, 0).exp();
        for j in 0..=self.order {
            for k in 0..=self.order {
                if (j, k) == (0, 0) || !self.in_support(j, k) {
                    continue;
                }
                let val = if j == 0 {
                    let mut acc = ZERO;
                    for q in 1..=k {
                        acc += self.coeff(0, q) * e.coeff(0, k - q) * q as f64;
                    }
                    acc / k as f64
                } else {
                    let mut acc = ZERO;
                    for p in 1..=j {
                        for q in 0..=k {
                            acc += self.coeff(p, q) * e.coeff(j - p, k - q) * p as f64;
                        }
                    }
                    acc / j as f64
                };
                let i = e.idx(j, k);
                e.coeffs[i] = val;
            }
        }
        e
    }

    /// Partial derivative in `z`; the order drops by one.
    pub fn diff_z(&self) -> Self {
        if self.order == 0 {
            return Self::zeros(0, self.support);
        }
        Self::from_fn(self.order - 1, self.support, |j, k| {
            self.coeff(j + 1, k) * (j + 1) as f64
        })
    }

    /// Partial derivative in `w`; the order drops by one.
    pub fn diff_w(&self) -> Self {
        self.transpose().diff_z().transpose()
    }

    /// Diagonal restriction `f(z, z)`, up to the order where every antidiagonal is known.
    pub fn diagonal(&self) -> PowerSeries1 {
        PowerSeries1::from_fn(self.order, |l| (0..=l).map(|j| self.coeff(j, l - j)).sum())
    }

    /// Diagonal restriction treating a box-supported grid as an exact
    /// polynomial, so the result runs to degree `2N`.
    pub fn diagonal_polynomial(&self) -> PowerSeries1 {
        match self.support {
            Support::Simplex => self.diagonal(),
            Support::Box => {
                let n = self.order;
                PowerSeries1::from_fn(2 * n, |l| {
                    let lo = l.saturating_sub(n);
                    let hi = l.min(n);
                    (lo..=hi).map(|j| self.coeff(j, l - j)).sum()
                })
            }
        }
    }

    /// Multiply by `z^a w^b`. Simplex data keeps all of its information
    /// (the order grows by `a + b`); box data is truncated back to its order.
    pub fn mul_monomial(&self, a: usize, b: usize) -> Self {
        let order = match self.support {
            Support::Box => self.order,
            Support::Simplex => self.order + a + b,
        };
        let src = self;
        let mut out = Self::zeros(order, self.support);
        for (j, k, c) in src.iter() {
            if out.in_support(j + a, k + b) {
                let i = out.idx(j + a, k + b);
                out.coeffs[i] = c;
            }
        }
        out
    }

    /// Exact coefficient-level quotient by `z`, `w` or `z - w`. The input must
    /// vanish on the factor's zero set to within [`TOL_DIV`] (relative to its
    /// largest coefficient when that exceeds 1).
    pub fn divide_by(&self, factor: Factor) -> Result<Self> {
        let tol = TOL_DIV * self.max_abs().max(1.0);
        match factor {
            Factor::Z => {
                let residual = (0..=self.order)
                    .filter(|&k| self.in_support(0, k))
                    .map(|k| self.coeff(0, k).norm())
                    .fold(0.0, f64::max);
                if residual > tol {
                    return Err(Error::NotDivisible {
                        factor: "z",
                        residual,
                        tol,
                    });
                }
                if self.order == 0 {
                    return Ok(Self::zeros(0, self.support));
                }
                Ok(Self::from_fn(self.order - 1, self.support, |j, k| self.coeff(j + 1, k)))
            }
            Factor::W => Ok(self.transpose().divide_by(Factor::Z)?.transpose()),
            Factor::ZMinusW => {
                let diag = self.diagonal();
                let residual = diag.max_abs();
                if residual > tol {
                    return Err(Error::NotDivisible {
                        factor: "z - w",
                        residual,
                        tol,
                    });
                }
                if self.order == 0 {
                    return Ok(Self::zeros(0, Support::Simplex));
                }
                // F = (z - w) G  <=>  F_jk = G_{j-1,k} - G_{j,k-1}, solved along antidiagonals.
                Ok(Self::from_fn(self.order - 1, Support::Simplex, |j, k| {
                    (0..=k).map(|i| self.coeff(j + 1 + i, k - i)).sum()
                }))
            }
        }
    }

    pub fn eval(&self, z: C64, w: C64) -> C64 {
        let mut acc = ZERO;
        let mut zp = ONE;
        for j in 0..=self.order {
            let mut row = ZERO;
            for k in (0..=self.order).rev() {
                let c = if self.in_support(j, k) {
                    self.coeff(j, k)
                } else {
                    ZERO
                };
                row = row * w + c;
            }
            acc += zp * row;
            zp *= z;
        }
        acc
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Largest coefficient difference over the coefficients both series determine.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.iter()
            .filter(|&(j, k, _)| other.in_support(j, k))
            .map(|(j, k, c)| (c - other.coeff(j, k)).norm())
            .fold(0.0, f64::max)
    }
}

impl Add for &PowerSeries2 {
    type Output = PowerSeries2;
    fn add(self, rhs: &PowerSeries2) -> PowerSeries2 {
        let (n, s) = self.reconcile(rhs);
        PowerSeries2::from_fn(n, s, |j, k| self.coeff(j, k) + rhs.coeff(j, k))
    }
}

impl Sub for &PowerSeries2 {
    type Output = PowerSeries2;
    fn sub(self, rhs: &PowerSeries2) -> PowerSeries2 {
        let (n, s) = self.reconcile(rhs);
        PowerSeries2::from_fn(n, s, |j, k| self.coeff(j, k) - rhs.coeff(j, k))
    }
}

impl Mul for &PowerSeries2 {
    type Output = PowerSeries2;
    fn mul(self, rhs: &PowerSeries2) -> PowerSeries2 {
        let (n, s) = self.reconcile(rhs);
        let mut out = PowerSeries2::zeros(n, s);
        for (p, q, a) in self.iter() {
            if a == ZERO || p > n || q > n {
                continue;
            }
            for (r, t, b) in rhs.iter() {
                if out.in_support(p + r, q + t) {
                    let i = out.idx(p + r, q + t);
                    out.coeffs[i] += a * b;
                }
            }
        }
        out
    }
}

impl Neg for &PowerSeries2 {
    type Output = PowerSeries2;
    fn neg(self) -> PowerSeries2 {
        self.scale(-ONE)
    }
}

/// `(phi(z) - phi(w)) / (z - w) = sum_n a_n sum_{i+j=n-1} z^i w^j`, built
/// without division. Determined up to total degree `order(phi) - 1`.
pub fn divided_difference(phi: &PowerSeries1) -> PowerSeries2 {
    let m = phi.order();
    if m == 0 {
        return PowerSeries2::zeros(0, Support::Simplex);
    }
    PowerSeries2::from_fn(m - 1, Support::Simplex, |i, j| phi.coeff(i + j + 1))
}
