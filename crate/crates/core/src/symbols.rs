//! Dirichlet operator symbols `W[T](z,w) = sum_{j,k} m_jk e_j(z) e_k(w)` with
//! `e_j(z) = z^j / sqrt(j)`, the transfer between contractions and couplings,
//! Möbius conjugation, and the mock-Bloch construction.
//!
//! The symbol datum is `m_jk = T[(k-1, j-1)]`, the same storage convention as
//! the analytic coupling matrices of [`crate::gaf`].

use num_complex::Complex64 as C64;

use crate::gaf::{CouplingMode, GafCoupling};
use crate::matrix::{self, CMat, ContractionMatrix};
use crate::report::{BoundReport, Check};
use crate::series::{PowerSeries1, PowerSeries2, Support};
use crate::special::log_kernel;
use crate::{Error, Result};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// Tolerance on orthonormality of input frames.
pub const ORTHONORMAL_TOL: f64 = 1e-10;
/// Largest admissible truncation tail in [`mobius_conjugate`].
pub const MOBIUS_TAIL_MAX: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub struct DirichletSymbol {
    pub w: PowerSeries2,
    pub diag: PowerSeries1,
    pub source_norm: f64,
}

impl DirichletSymbol {
    /// Symbol of the leading `n x n` block of any stored matrix.
    pub fn from_matrix(m: &CMat, n: usize) -> Result<Self> {
        if m.nrows() != m.ncols() || n > m.nrows() {
            return Err(Error::Dimension(format!(
                "order {n} for a {}x{} matrix",
                m.nrows(),
                m.ncols()
            )));
        }
        let w = PowerSeries2::from_fn(n, Support::Box, |j, k| {
            if j == 0 || k == 0 {
                ZERO
            } else {
                m[(k - 1, j - 1)] / ((j * k) as f64).sqrt()
            }
        });
        let diag = w.diagonal_polynomial();
        Ok(Self {
            w,
            diag,
            source_norm: matrix::operator_norm(m)?,
        })
    }

    pub fn order(&self) -> usize {
        self.w.order()
    }

    /// Vanishing edges and diagonal equal to antidiagonal sums.
    pub fn check_invariants(&self, tol: f64) -> Result<()> {
        let n = self.w.order();
        for i in 0..=n {
            let e = self.w.coeff(0, i).norm().max(self.w.coeff(i, 0).norm());
            if e > tol {
                return Err(Error::MalformedSymbol(format!("edge coefficient {e} at index {i}")));
            }
        }
        let d = self.w.diagonal_polynomial();
        let diff = d.max_abs_diff(&self.diag);
        if diff > tol || d.order() != self.diag.order() {
            return Err(Error::MalformedSymbol(format!("diagonal deviates by {diff}")));
        }
        Ok(())
    }

    /// Numerical rank of the coefficient grid.
    pub fn coefficient_rank(&self, rel_tol: f64) -> usize {
        let n = self.w.order();
        let g = CMat::from_fn(n + 1, n + 1, |j, k| self.w.coeff(j, k));
        let sv = g.svd(false, false).singular_values;
        let top = sv.iter().copied().fold(0.0, f64::max);
        sv.iter().filter(|&&s| s > rel_tol * top).count()
    }
}

pub fn symbol_from_contraction(a: &ContractionMatrix, n: usize) -> Result<DirichletSymbol> {
    if !a.is_contraction() {
        return Err(Error::NotContraction(a.norm_certificate()));
    }
    DirichletSymbol::from_matrix(a.entries(), n)
}

/// `T[(k-1, j-1)] = <x_j, y_k>` for orthonormal columns `x_j` of `X` and `y_k` of `Y`.
pub fn contraction_from_systems(x: &CMat, y: &CMat) -> Result<ContractionMatrix> {
    if x.nrows() != y.nrows() || x.ncols() != y.ncols() {
        return Err(Error::Dimension(format!(
            "frames {}x{} and {}x{}",
            x.nrows(),
            x.ncols(),
            y.nrows(),
            y.ncols()
        )));
    }
    for f in [x, y] {
        let d = matrix::orthonormality_defect(f);
        if d > ORTHONORMAL_TOL {
            return Err(Error::NotOrthonormal(d));
        }
    }
    ContractionMatrix::contraction(y.adjoint() * x)
}

/// The analytic coupling realizing `T`: its analytic correlation is `W[T]`.
pub fn coupling_from_contraction(t: &ContractionMatrix) -> Result<GafCoupling> {
    GafCoupling::new(t.dim(), CouplingMode::AnalyticContraction(t.clone()))
}

/// The contraction whose symbol is a given analytic correlation kernel
/// (`T[(k-1, j-1)] = sqrt(jk) [z^j w^k]`), certified.
pub fn contraction_from_correlation(kernel: &PowerSeries2) -> Result<ContractionMatrix> {
    let n = kernel.order();
    let m = CMat::from_fn(n, n, |k, j| kernel.coeff(j + 1, k + 1) * (((j + 1) * (k + 1)) as f64).sqrt());
    ContractionMatrix::contraction(m)
}

/// Disk automorphism `z -> e^{i theta} (a - z) / (1 - conj(a) z)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MobiusMap {
    a: C64,
    theta: f64,
}

impl MobiusMap {
    pub fn new(a: C64, theta: f64) -> Result<Self> {
        if !(a.norm() < 1.0) {
            return Err(Error::OutsideDisk(a));
        }
        Ok(Self { a, theta })
    }

    /// `z -> z`, which in this parametrization is `a = 0, theta = pi`.
    pub fn identity() -> Self {
        Self::rotation(0.0)
    }

    /// `z -> e^{i t} z`.
    pub fn rotation(t: f64) -> Self {
        Self {
            a: ZERO,
            theta: t + std::f64::consts::PI,
        }
    }

    pub fn a(&self) -> C64 {
        self.a
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    fn phase(&self) -> C64 {
        C64::from_polar(1.0, self.theta)
    }

    pub fn eval(&self, z: C64) -> C64 {
        self.phase() * (self.a - z) / (ONE - self.a.conj() * z)
    }

    pub fn derivative(&self, z: C64) -> C64 {
        let d = ONE - self.a.conj() * z;
        self.phase() * (self.a.norm_sqr() - 1.0) / (d * d)
    }

    pub fn inverse(&self) -> Self {
        Self {
            a: self.a * self.phase(),
            theta: -self.theta,
        }
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &MobiusMap) -> Self {
        let w0 = inner.eval(ZERO);
        let c0 = self.eval(w0);
        let c1 = self.derivative(w0) * inner.derivative(ZERO);
        let phase = -c1 / (1.0 - c0.norm_sqr());
        Self {
            a: c0 / phase,
            theta: phase.arg(),
        }
    }

    /// Taylor coefficients at 0 up to `order`.
    pub fn series(&self, order: usize) -> PowerSeries1 {
        let e = self.phase();
        let ab = self.a.conj();
        let s = self.a.norm_sqr() - 1.0;
        PowerSeries1::from_fn(order, |n| if n == 0 { e * self.a } else { e * ab.powu(n as u32 - 1) * s })
    }
}

/// `T_phi` in the stored convention at working order `M`, with its truncation tail.
#[derive(Clone, Debug)]
pub struct MobiusConjugate {
    pub matrix: ContractionMatrix,
    pub working_order: usize,
    /// Frobenius mass of the dropped columns of the change of basis.
    pub tau: f64,
    /// `|T| (2 tau + tau^2)`, a bound on the operator perturbation from truncation.
    pub tail: f64,
}

/// Conjugate `T` by the unitaries attached to `phi`, expanding
/// `(psi')(psi)^{j-1}` with `psi = phi^{-1}` in the basis `f_l = sqrt(l) z^{l-1}`.
/// Without a working order, `4n` is doubled until the tail fits (at most `64n`).
pub fn mobius_conjugate(t: &ContractionMatrix, phi: &MobiusMap, working_order: Option<usize>) -> Result<MobiusConjugate> {
    if let Some(m) = working_order {
        return mobius_conjugate_at(t, phi, m);
    }
    let n = t.dim();
    let mut m = 4 * n;
    loop {
        match mobius_conjugate_at(t, phi, m) {
            Err(Error::HeadroomTooSmall(_)) if m < 64 * n => m *= 2,
            other => return other,
        }
    }
}

fn mobius_conjugate_at(t: &ContractionMatrix, phi: &MobiusMap, big_m: usize) -> Result<MobiusConjugate> {
    let n = t.dim();
    if big_m < 2 * n {
        return Err(Error::InsufficientTruncation(format!(
            "working order {big_m} below twice the dimension {n}"
        )));
    }
    if n == 0 {
        return Ok(MobiusConjugate {
            matrix: ContractionMatrix::zeros(big_m),
            working_order: big_m,
            tau: 0.0,
            tail: 0.0,
        });
    }
    let psi_full = phi.inverse().series(n);
    let dpsi = psi_full.derivative();
    let psi = psi_full.truncate(n - 1);
    let mut v = CMat::zeros(n, big_m);
    let mut p = dpsi;
    let radius = phi.a().norm();
    let min_j = big_m.max((4.0 * n as f64 / (1.0 - radius)).ceil() as usize);
    let cap = 64 * big_m.max(min_j);
    let mut tau2 = 0.0;
    let mut j = 1usize;
    loop {
        let sj = (j as f64).sqrt();
        if j <= big_m {
            for l in 1..=n {
                v[(l - 1, j - 1)] = p.coeff(l - 1) * (sj / (l as f64).sqrt());
            }
        } else {
            let col: f64 = (1..=n).map(|l| p.coeff(l - 1).norm_sqr() * j as f64 / l as f64).sum();
            tau2 += col;
            if (j > min_j && col < 1e-34) || j >= cap || tau2 > 1.0 {
                break;
            }
        }
        p = &p * &psi;
        j += 1;
    }
    let conj_v = v.map(|x| x.conj());
    let stored = v.adjoint() * t.entries() * conj_v;
    let tau = tau2.sqrt();
    let tail = t.norm_certificate() * (2.0 * tau + tau * tau);
    if tail > MOBIUS_TAIL_MAX {
        return Err(Error::HeadroomTooSmall(tail));
    }
    Ok(MobiusConjugate {
        matrix: ContractionMatrix::new(stored)?,
        working_order: big_m,
        tau,
        tail,
    })
}

/// Both sides of the Möbius identity for diagonal symbols at each point,
/// plus norm preservation.
pub fn verify_mobius_identity(
    t: &ContractionMatrix,
    phi: &MobiusMap,
    points: &[C64],
    working_order: Option<usize>,
) -> Result<BoundReport> {
    for &z in points {
        if !(z.norm() < 1.0) {
            return Err(Error::OutsideDisk(z));
        }
    }
    let conj = mobius_conjugate(t, phi, working_order)?;
    let src = DirichletSymbol::from_matrix(t.entries(), t.dim())?;
    let img = DirichletSymbol::from_matrix(conj.matrix.entries(), conj.matrix.dim())?;
    let p0 = phi.eval(ZERO);
    let mut r = BoundReport::new("symbols.mobius")
        .param("dim", t.dim())
        .param("working_order", conj.working_order)
        .param("a", format!("{}", phi.a()))
        .param("theta", phi.theta())
        .param("tail", conj.tail);
    for &z in points {
        let pz = phi.eval(z);
        let lhs = img.diag.eval(z);
        let rhs = src.diag.eval(pz) - src.w.eval(pz, p0) - src.w.eval(p0, pz) + src.diag.eval(p0);
        let tol = MOBIUS_TAIL_MAX + log_kernel(z.norm_sqr()) * conj.tail;
        r.push(Check::eq(format!("identity at z={z:.4}"), lhs.re, rhs.re, tol));
        r.push(Check::eq(format!("identity at z={z:.4} (im)"), lhs.im, rhs.im, tol));
    }
    r.push(Check::eq(
        "norm preserved",
        conj.matrix.norm_certificate(),
        t.norm_certificate(),
        MOBIUS_TAIL_MAX + conj.tail,
    ));
    Ok(r)
}

/// Greedy sparse-sequence policy, in `lambda = log 1/(1-r)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GrowthPolicy {
    /// `lambda_1`; the default `log 2` is `r_1 = 1/2`.
    pub lambda_1: f64,
    /// Grid step in `lambda`; the minimal admissible value is rounded up to it.
    pub grid_step: f64,
    /// Factor applied to each minimal admissible `lambda` (2 doubles it).
    pub multiplier: f64,
    /// Bisection iteration cap.
    pub max_iter: usize,
}

impl Default for GrowthPolicy {
    fn default() -> Self {
        Self {
            lambda_1: std::f64::consts::LN_2,
            grid_step: 1e-6,
            multiplier: 2.0,
            max_iter: 200,
        }
    }
}

/// `log 1/(1 - r_j r_k)` from `lambda = log 1/(1-r)`.
pub fn log_cross(lj: f64, lk: f64) -> f64 {
    let (a, b) = if lj <= lk { (lj, lk) } else { (lk, lj) };
    a - ((a - b).exp() - (-b).exp()).ln_1p()
}

/// `log 1/(1 - r^2)` from `lambda`.
pub fn log_self(l: f64) -> f64 {
    l - (2.0 - (-l).exp()).ln()
}

/// Margins of the two sparseness conditions for the pair `(j, k)`, positive when they hold.
pub fn sparseness_margins(lambdas: &[f64], j: usize, k: usize) -> (f64, f64) {
    let gap = j.abs_diff(k) as f64;
    let ljk = log_cross(lambdas[j], lambdas[k]);
    let (ljj, lkk) = (log_self(lambdas[j]), log_self(lambdas[k]));
    let c1 = 2f64.powf(-gap) * (ljj * lkk).sqrt() - ljk;
    let c2 = -gap * std::f64::consts::LN_2 + ljj + lkk - 2.0 * ljk;
    (c1, c2)
}

#[derive(Clone, Debug)]
pub struct MockBloch {
    pub policy: GrowthPolicy,
    pub lambdas: Vec<f64>,
    /// `r_j = 1 - e^{-lambda_j}` (rounds to 1 for large `lambda`).
    pub r_seq: Vec<f64>,
    /// Smallest margins of the two conditions over all pairs.
    pub cond1_margin: f64,
    pub cond2_margin: f64,
    pub norm_f2: f64,
    pub norm_g2: f64,
    /// `(1 - r_l^2) f'(r_l) g(r_l)`, the finite-level sums.
    pub bloch_values: Vec<f64>,
    /// `l^{-2} (log 1/(1-r_l^2))^{1/2}`.
    pub bloch_lower: Vec<f64>,
    pub f: PowerSeries1,
    pub g: PowerSeries1,
    pub fg: PowerSeries1,
}

impl MockBloch {
    /// Rank-one operator `T[(k-1, j-1)] = sqrt(j) f_j sqrt(k) g_k` whose diagonal symbol is `fg`.
    pub fn rank_one_symbol(&self) -> Result<DirichletSymbol> {
        let n = self.f.order().min(self.g.order());
        let m = CMat::from_fn(n, n, |k, j| {
            let (j, k) = (j + 1, k + 1);
            self.f.coeff(j) * (j as f64).sqrt() * self.g.coeff(k) * (k as f64).sqrt()
        });
        DirichletSymbol::from_matrix(&m, n)
    }
}

/// Build `levels` radii greedily, then the closed-form double sums and Taylor data to `order`.
pub fn mock_bloch_construct(levels: usize, policy: GrowthPolicy, order: usize) -> Result<MockBloch> {
    if levels < 2 {
        return Err(Error::Domain {
            value: levels as f64,
            domain: "levels >= 2",
        });
    }
    if !(policy.multiplier >= 1.0 && policy.grid_step > 0.0 && policy.lambda_1 > 0.0) {
        return Err(Error::GrowthPolicy("multiplier >= 1, positive grid step and lambda_1 required".into()));
    }
    let mut lambdas = vec![policy.lambda_1];
    for k in 1..levels {
        let ok = |cand: f64, lam: &[f64]| {
            let mut all = lam.to_vec();
            all.push(cand);
            (0..k).all(|j| {
                let (a, b) = sparseness_margins(&all, j, k);
                a >= 0.0 && b >= 0.0
            })
        };
        let mut lo = lambdas[k - 1];
        let mut hi = 2.0 * lo + 1.0;
        let mut it = 0;
        while !ok(hi, &lambdas) {
            lo = hi;
            hi *= 2.0;
            it += 1;
            if it > policy.max_iter || !hi.is_finite() {
                return Err(Error::GrowthPolicy(format!("no admissible lambda for level {}", k + 1)));
            }
        }
        for _ in 0..policy.max_iter {
            if hi - lo <= policy.grid_step {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if ok(mid, &lambdas) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let snapped = (hi / policy.grid_step).ceil() * policy.grid_step;
        let chosen = snapped * policy.multiplier;
        if !ok(chosen, &lambdas) {
            return Err(Error::GrowthPolicy(format!("scaled lambda {chosen} violates a condition at level {}", k + 1)));
        }
        lambdas.push(chosen);
    }

    let n = levels;
    let mut c1 = f64::INFINITY;
    let mut c2 = f64::INFINITY;
    for j in 0..n {
        for k in 0..n {
            if j != k {
                let (a, b) = sparseness_margins(&lambdas, j, k);
                c1 = c1.min(a);
                c2 = c2.min(b);
            }
        }
    }
    let lx = |j: usize, k: usize| log_cross(lambdas[j], lambdas[k]);
    let ls: Vec<f64> = lambdas.iter().map(|&l| log_self(l)).collect();
    let w = |j: usize| 1.0 / (j + 1) as f64;
    let mut norm_f2 = 0.0;
    let mut norm_g2 = 0.0;
    for j in 0..n {
        for k in 0..n {
            norm_f2 += w(j) * w(k) * (-ls[j] - ls[k] + 2.0 * lx(j, k)).exp();
            norm_g2 += w(j) * w(k) * lx(j, k) / (ls[j] * ls[k]).sqrt();
        }
    }
    let bloch_values: Vec<f64> = (0..n)
        .map(|l| {
            let fp: f64 = (0..n).map(|j| w(j) * (-ls[l] - ls[j] + 2.0 * lx(j, l)).exp()).sum();
            let g: f64 = (0..n).map(|k| w(k) * lx(k, l) / ls[k].sqrt()).sum();
            fp * g
        })
        .collect();
    let bloch_lower: Vec<f64> = (0..n).map(|l| ls[l].sqrt() * w(l) * w(l)).collect();

    // Taylor data: f_m = sum_j j^{-1} (1 - r_j^2) r_j^{m-1}, g_m = sum_j j^{-1} L_jj^{-1/2} r_j^m / m.
    let log_r: Vec<f64> = lambdas.iter().map(|&l| (-(-l).exp()).ln_1p()).collect();
    let f = PowerSeries1::from_fn(order, |m| {
        if m == 0 {
            return ZERO;
        }
        let s: f64 = (0..n).map(|j| w(j) * (-ls[j] + (m as f64 - 1.0) * log_r[j]).exp()).sum();
        C64::new(s, 0.0)
    });
    let g = PowerSeries1::from_fn(order, |m| {
        if m == 0 {
            return ZERO;
        }
        let s: f64 = (0..n).map(|j| w(j) / ls[j].sqrt() * (m as f64 * log_r[j]).exp() / m as f64).sum();
        C64::new(s, 0.0)
    });
    let fg = &f * &g;
    Ok(MockBloch {
        policy,
        r_seq: lambdas.iter().map(|&l| -(-l).exp_m1() ).collect(),
        lambdas,
        cond1_margin: c1,
        cond2_margin: c2,
        norm_f2,
        norm_g2,
        bloch_values,
        bloch_lower,
        f,
        g,
        fg,
    })
}
