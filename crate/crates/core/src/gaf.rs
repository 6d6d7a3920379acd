//! Truncated model of a jointly Gaussian pair `(Phi, Psi)` of Dirichlet-space
//! Gaussian analytic functions `Phi(z) = sum_j alpha_j z^j / sqrt(j)`.
//!
//! A coupling fixes the cross moments of the coefficient vectors. Matrices are
//! stored with row `k-1`, column `j-1` holding `E alpha_j beta_k` (analytic) or
//! `E alpha_j conj(beta_k)` (sesquianalytic).

use num_complex::Complex64 as C64;

use crate::matrix::{self, CMat, ContractionMatrix};
use crate::report::{BoundReport, Check};
use crate::rng::RngStream;
use crate::series::{PowerSeries2, Support};
use crate::special::{log_kernel, log_kernel_tail};
use crate::{par, Error, Result};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

#[derive(Clone, Debug, PartialEq)]
pub enum CouplingMode {
    Independent,
    Identical,
    /// `beta_j = conj(alpha_j)`, so `Psi(z) = conj(Phi(conj z))`.
    ConjugateReflect,
    /// `beta_k = conj(alpha_{pi(k)})`; entry `k-1` holds `pi(k)`.
    Permutation(Vec<usize>),
    AnalyticContraction(ContractionMatrix),
    SesquianalyticContraction(ContractionMatrix),
}

impl CouplingMode {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Independent => "independent",
            Self::Identical => "identical",
            Self::ConjugateReflect => "conjugate_reflect",
            Self::Permutation(_) => "permutation",
            Self::AnalyticContraction(_) => "analytic_contraction",
            Self::SesquianalyticContraction(_) => "sesquianalytic_contraction",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GafCoupling {
    trunc: usize,
    mode: CouplingMode,
}

fn check_permutation(pi: &[usize]) -> Result<()> {
    let n = pi.len();
    let mut seen = vec![false; n + 1];
    for (k, &p) in pi.iter().enumerate() {
        if p == 0 || p > n || seen[p] {
            return Err(Error::InvalidPermutation(format!("entry {} -> {p} breaks bijectivity on 1..={n}", k + 1)));
        }
        seen[p] = true;
    }
    Ok(())
}

impl GafCoupling {
    pub fn new(trunc: usize, mode: CouplingMode) -> Result<Self> {
        if trunc == 0 {
            return Err(Error::Dimension("truncation must be at least 1".into()));
        }
        match &mode {
            CouplingMode::Permutation(pi) => {
                if pi.len() != trunc {
                    return Err(Error::Dimension(format!("permutation of length {} for truncation {trunc}", pi.len())));
                }
                check_permutation(pi)?;
            }
            CouplingMode::AnalyticContraction(c) | CouplingMode::SesquianalyticContraction(c) => {
                if c.dim() != trunc {
                    return Err(Error::Dimension(format!("{0}x{0} matrix for truncation {trunc}", c.dim())));
                }
                if !c.is_contraction() {
                    return Err(Error::NotContraction(c.norm_certificate()));
                }
            }
            _ => {}
        }
        Ok(Self { trunc, mode })
    }

    pub fn independent(trunc: usize) -> Self {
        Self::new(trunc, CouplingMode::Independent).expect("valid")
    }

    pub fn identical(trunc: usize) -> Self {
        Self::new(trunc, CouplingMode::Identical).expect("valid")
    }

    pub fn conjugate_reflect(trunc: usize) -> Self {
        Self::new(trunc, CouplingMode::ConjugateReflect).expect("valid")
    }

    pub fn trunc(&self) -> usize {
        self.trunc
    }

    pub fn mode(&self) -> &CouplingMode {
        &self.mode
    }

    /// `E alpha_j beta_k` at row `k-1`, column `j-1`.
    pub fn analytic_matrix(&self) -> CMat {
        let n = self.trunc;
        match &self.mode {
            CouplingMode::Independent | CouplingMode::Identical | CouplingMode::SesquianalyticContraction(_) => {
                CMat::zeros(n, n)
            }
            CouplingMode::ConjugateReflect => CMat::identity(n, n),
            CouplingMode::Permutation(pi) => CMat::from_fn(n, n, |k, j| if pi[k] == j + 1 { ONE } else { ZERO }),
            CouplingMode::AnalyticContraction(c) => c.entries().clone(),
        }
    }

    /// `E alpha_j conj(beta_k)` at row `k-1`, column `j-1`.
    pub fn sesquianalytic_matrix(&self) -> CMat {
        let n = self.trunc;
        match &self.mode {
            CouplingMode::Identical => CMat::identity(n, n),
            CouplingMode::SesquianalyticContraction(e) => e.entries().clone(),
            _ => CMat::zeros(n, n),
        }
    }

    /// `E Phi(z) Psi(w)` as a series in `(z, w)`.
    pub fn exact_analytic_correlation(&self) -> PowerSeries2 {
        kernel_from_matrix(&self.analytic_matrix())
    }

    /// `E Phi(z) conj(Psi(w))` as a series in `(z, v)` with `v = conj(w)`.
    pub fn exact_sesquianalytic_correlation(&self) -> PowerSeries2 {
        kernel_from_matrix(&self.sesquianalytic_matrix())
    }

    /// Sampler holding the defect completion, built once per coupling.
    pub fn sampler(&self) -> Result<Sampler> {
        let n = self.trunc;
        let plan = match &self.mode {
            CouplingMode::Independent => Plan::Independent,
            CouplingMode::Identical => Plan::Identical,
            CouplingMode::ConjugateReflect => Plan::Conjugate,
            CouplingMode::Permutation(pi) => Plan::Permutation(pi.clone()),
            CouplingMode::AnalyticContraction(c) => {
                let d = matrix::defect(&c.adjoint())?;
                Plan::Mix {
                    a: c.entries().clone(),
                    conj_input: true,
                    d,
                }
            }
            CouplingMode::SesquianalyticContraction(e) => {
                let d = matrix::defect(&e.transpose())?;
                Plan::Mix {
                    a: e.entries().map(|x| x.conj()),
                    conj_input: false,
                    d,
                }
            }
        };
        Ok(Sampler { n, plan })
    }
}

fn kernel_from_matrix(m: &CMat) -> PowerSeries2 {
    let n = m.nrows();
    PowerSeries2::from_fn(n, Support::Box, |j, k| {
        if j == 0 || k == 0 {
            ZERO
        } else {
            m[(k - 1, j - 1)] / ((j * k) as f64).sqrt()
        }
    })
}

#[derive(Clone, Debug)]
enum Plan {
    Independent,
    Identical,
    Conjugate,
    Permutation(Vec<usize>),
    /// `beta = a * (conj(alpha) or alpha) + d * nu`
    Mix { a: CMat, conj_input: bool, d: CMat },
}

/// Draws coefficient vectors `(alpha, beta)` for one coupling.
#[derive(Clone, Debug)]
pub struct Sampler {
    n: usize,
    plan: Plan,
}

impl Sampler {
    pub fn draw(&self, rng: &mut RngStream) -> (Vec<C64>, Vec<C64>) {
        let alpha = rng.complex_gaussian_vec(self.n);
        let beta = match &self.plan {
            Plan::Independent => rng.complex_gaussian_vec(self.n),
            Plan::Identical => alpha.clone(),
            Plan::Conjugate => alpha.iter().map(|a| a.conj()).collect(),
            Plan::Permutation(pi) => pi.iter().map(|&p| alpha[p - 1].conj()).collect(),
            Plan::Mix { a, conj_input, d } => {
                let nu = nalgebra::DVector::from_vec(rng.complex_gaussian_vec(self.n));
                let src = nalgebra::DVector::from_iterator(
                    self.n,
                    alpha.iter().map(|x| if *conj_input { x.conj() } else { *x }),
                );
                let b = a * src + d * nu;
                b.iter().copied().collect()
            }
        };
        (alpha, beta)
    }
}

/// `sum_{j<=N} c_j z^j / sqrt(j)` with `c_j` at index `j-1`.
pub fn eval_gaf(coeffs: &[C64], z: C64) -> C64 {
    let mut acc = ZERO;
    for (i, c) in coeffs.iter().enumerate().rev() {
        acc = (acc + c / ((i + 1) as f64).sqrt()) * z;
    }
    acc
}

/// Monte Carlo draws of `(Phi, Psi)` at fixed points.
#[derive(Clone, Debug)]
pub struct SamplePaths {
    pub points: Vec<C64>,
    pub trunc: usize,
    /// `values_phi[s][p]` for sample `s`, point `p`.
    pub values_phi: Vec<Vec<C64>>,
    pub values_psi: Vec<Vec<C64>>,
    /// Variance of the dropped tail, `sum_{j>N} |z|^{2j} / j`, per point.
    pub tail_bound: Vec<f64>,
}

fn check_points(points: &[C64]) -> Result<()> {
    for &z in points {
        if !(z.norm() < 1.0) {
            return Err(Error::OutsideDisk(z));
        }
    }
    Ok(())
}

/// Sample `n_samples` pairs, sample `s` drawing from substream `s` of `rng`.
pub fn sample_pair(c: &GafCoupling, points: &[C64], n_samples: usize, rng: &RngStream) -> Result<SamplePaths> {
    check_points(points)?;
    let sampler = c.sampler()?;
    let draws = par::map_range(n_samples, |s| {
        let mut r = rng.substream(s as u64);
        let (a, b) = sampler.draw(&mut r);
        let phi: Vec<C64> = points.iter().map(|&z| eval_gaf(&a, z)).collect();
        let psi: Vec<C64> = points.iter().map(|&z| eval_gaf(&b, z)).collect();
        (phi, psi)
    });
    let (values_phi, values_psi) = draws.into_iter().unzip();
    Ok(SamplePaths {
        points: points.to_vec(),
        trunc: c.trunc,
        values_phi,
        values_psi,
        tail_bound: points.iter().map(|z| log_kernel_tail(z.norm_sqr(), c.trunc)).collect(),
    })
}

/// A complex mean with its jackknife standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub mean: C64,
    pub se: f64,
}

/// Mean of complex samples with the leave-one-out jackknife standard error.
pub fn jackknife_mean(xs: &[C64]) -> Result<Estimate> {
    let n = xs.len();
    if n < 2 {
        return Err(Error::TooFewSamples { needed: 2, got: n });
    }
    let total: C64 = xs.iter().sum();
    let nf = n as f64;
    let mean = total / nf;
    let loo_var: f64 = xs
        .iter()
        .map(|x| ((total - x) / (nf - 1.0) - mean).norm_sqr())
        .sum();
    Ok(Estimate {
        mean,
        se: ((nf - 1.0) / nf * loo_var).sqrt(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Which {
    Analytic,
    Sesquianalytic,
}

/// `E Phi(z_p) Psi(z_q)` or `E Phi(z_p) conj(Psi(z_q))` for every point pair, indexed `[p][q]`.
pub fn empirical_correlation(samples: &SamplePaths, which: Which) -> Result<Vec<Vec<Estimate>>> {
    let np = samples.points.len();
    let ns = samples.values_phi.len();
    if ns < 2 {
        return Err(Error::TooFewSamples { needed: 2, got: ns });
    }
    (0..np)
        .map(|p| {
            (0..np)
                .map(|q| {
                    let xs: Vec<C64> = (0..ns)
                        .map(|s| {
                            let psi = samples.values_psi[s][q];
                            let psi = if which == Which::Analytic { psi } else { psi.conj() };
                            samples.values_phi[s][p] * psi
                        })
                        .collect();
                    jackknife_mean(&xs)
                })
                .collect()
        })
        .collect()
}

/// Monte Carlo check of the four coefficient contracts
/// (`E alpha_j beta_k`, `E alpha_j conj(beta_k)`, `E beta_j conj(beta_k)`, `E beta_j beta_k`)
/// on every index pair `j, k <= probe`, within `n_se` standard errors.
pub fn verify_coefficient_contracts(
    c: &GafCoupling,
    n_draws: usize,
    probe: usize,
    n_se: f64,
    rng: &RngStream,
) -> Result<BoundReport> {
    let sampler = c.sampler()?;
    let probe = probe.min(c.trunc);
    let draws = par::map_range(n_draws, |s| {
        let mut r = rng.substream(s as u64);
        let (a, b) = sampler.draw(&mut r);
        (a[..probe].to_vec(), b[..probe].to_vec())
    });
    let am = c.analytic_matrix();
    let sm = c.sesquianalytic_matrix();
    let mut report = BoundReport::new("gaf.contracts")
        .with_seed(rng.seed())
        .param("mode", c.mode.name())
        .param("trunc", c.trunc)
        .param("draws", n_draws)
        .param("probe", probe);
    for j in 0..probe {
        for k in 0..probe {
            let targets = [
                ("E a_j b_k", am[(k, j)], 0usize),
                ("E a_j conj b_k", sm[(k, j)], 1),
                ("E b_j conj b_k", if j == k { ONE } else { ZERO }, 2),
                ("E b_j b_k", ZERO, 3),
            ];
            for (label, target, kind) in targets {
                let xs: Vec<C64> = draws
                    .iter()
                    .map(|(a, b)| match kind {
                        0 => a[j] * b[k],
                        1 => a[j] * b[k].conj(),
                        2 => b[j] * b[k].conj(),
                        _ => b[j] * b[k],
                    })
                    .collect();
                let est = jackknife_mean(&xs)?;
                report.push(Check::leq(
                    format!("{label} j={} k={}", j + 1, k + 1),
                    (est.mean - target).norm(),
                    n_se * est.se,
                    0.0,
                ));
            }
        }
    }
    Ok(report)
}

/// Evaluated kernels of a coupling: `A(z,w) = E Phi(z) Psi(w)`, `S(z,v)` with `v = conj(w)`.
struct Kernels {
    analytic: PowerSeries2,
    sesqui: PowerSeries2,
    n: usize,
}

impl Kernels {
    fn of(c: &GafCoupling) -> Self {
        Self {
            analytic: c.exact_analytic_correlation(),
            sesqui: c.exact_sesquianalytic_correlation(),
            n: c.trunc,
        }
    }

    /// Truncated `log 1/(1 - x)`, the law of each marginal.
    fn marginal(&self, x: C64) -> C64 {
        let mut acc = ZERO;
        let mut p = ONE;
        for j in 1..=self.n {
            p *= x;
            acc += p / j as f64;
        }
        acc
    }
}

/// The 8x8 covariance `E X X*` of
/// `X = (Phi(z), conj Phi(z), Psi(z), conj Psi(z), Phi(w), conj Phi(w), Psi(w), conj Psi(w))`
/// with the analytic kernel multiplied by `analytic_scale` (1 for the genuine law).
pub fn correlation_matrix_8x8(c: &GafCoupling, z: C64, w: C64, analytic_scale: f64) -> CMat {
    let k = Kernels::of(c);
    let pts = [z, w];
    // slot a: (point index, function: 0 = Phi, 1 = Psi, conjugated?)
    let slots: Vec<(usize, usize, bool)> = (0..2)
        .flat_map(|p| [(p, 0, false), (p, 0, true), (p, 1, false), (p, 1, true)])
        .collect();
    // E f(p) conj g(q)
    let herm = |f: usize, p: C64, g: usize, q: C64| -> C64 {
        match (f, g) {
            (0, 0) | (1, 1) => k.marginal(p * q.conj()),
            (0, 1) => k.sesqui.eval(p, q.conj()),
            _ => k.sesqui.eval(q, p.conj()).conj(),
        }
    };
    // E f(p) g(q)
    let pair = |f: usize, p: C64, g: usize, q: C64| -> C64 {
        match (f, g) {
            (0, 1) => k.analytic.eval(p, q) * analytic_scale,
            (1, 0) => k.analytic.eval(q, p) * analytic_scale,
            _ => ZERO,
        }
    };
    CMat::from_fn(8, 8, |a, b| {
        let (pa, fa, ca) = slots[a];
        let (pb, fb, cb) = slots[b];
        let (p, q) = (pts[pa], pts[pb]);
        match (ca, cb) {
            (false, false) => herm(fa, p, fb, q),
            (false, true) => pair(fa, p, fb, q),
            (true, false) => pair(fa, p, fb, q).conj(),
            (true, true) => herm(fa, p, fb, q).conj(),
        }
    })
}

pub const PSD_TOL: f64 = 1e-8;

/// Positive-semidefiniteness of the 8x8 covariance at `(z, w)`.
pub fn corr_matrix_psd_check(c: &GafCoupling, z: C64, w: C64) -> Result<BoundReport> {
    corr_matrix_psd_check_scaled(c, z, w, 1.0)
}

/// As [`corr_matrix_psd_check`] with the analytic kernel scaled (a scale above 1 corrupts it).
pub fn corr_matrix_psd_check_scaled(c: &GafCoupling, z: C64, w: C64, analytic_scale: f64) -> Result<BoundReport> {
    check_points(&[z, w])?;
    let m = correlation_matrix_8x8(c, z, w, analytic_scale);
    let (_, min) = matrix::psd_check(&m, PSD_TOL)?;
    let mut r = BoundReport::new("gaf.psd")
        .param("mode", c.mode.name())
        .param("trunc", c.trunc)
        .param("z", format!("{z}"))
        .param("w", format!("{w}"))
        .param("analytic_scale", analytic_scale);
    r.push(Check::leq("-min eigenvalue <= 0", -min, 0.0, PSD_TOL));
    Ok(r)
}

/// `|E Phi(z) conj Psi(w)| + |E Phi(z) Psi(w)| <= (log 1/(1-|z|^2))^{1/2} (log 1/(1-|w|^2))^{1/2}`
/// on each node. The left side carries the slack `(tail(z) tail(w))^{1/2}` of the dropped modes.
pub fn triangle_bound_check(c: &GafCoupling, grid: &[(C64, C64)]) -> Result<BoundReport> {
    for &(z, w) in grid {
        check_points(&[z, w])?;
    }
    let k = Kernels::of(c);
    let mut r = BoundReport::new("gaf.triangle")
        .param("mode", c.mode.name())
        .param("trunc", c.trunc)
        .param("nodes", grid.len());
    for &(z, w) in grid {
        let (x, y) = (z.norm_sqr(), w.norm_sqr());
        let slack = (log_kernel_tail(x, c.trunc) * log_kernel_tail(y, c.trunc)).sqrt();
        let lhs = k.sesqui.eval(z, w.conj()).norm() + k.analytic.eval(z, w).norm() + slack;
        let rhs = (log_kernel(x) * log_kernel(y)).sqrt();
        r.push(Check::leq(format!("z={z:.4} w={w:.4}"), lhs, rhs, 1e-12 * rhs.max(1.0)));
    }
    Ok(r)
}

/// Largest grid radius accepted by [`cue_log_char`].
pub const CUE_MAX_RADIUS: f64 = 0.8;

/// Empirical kernels of `F(z) = log det(I - z U*) = sum_i log(1 - z conj(lambda_i))` over Haar `U`.
#[derive(Clone, Debug)]
pub struct CueResult {
    pub n: usize,
    pub points: Vec<C64>,
    pub n_samples: usize,
    /// `E F(z_p) conj F(z_q)`, indexed `[p][q]`.
    pub sesquianalytic: Vec<Vec<Estimate>>,
    /// `E F(z_p) F(z_q)`.
    pub analytic: Vec<Vec<Estimate>>,
}

impl CueResult {
    /// Limit kernel `log 1/(1 - z conj w)`.
    pub fn limit_kernel(&self, p: usize, q: usize) -> C64 {
        let x = self.points[p] * self.points[q].conj();
        -(ONE - x).ln()
    }

    /// Finite-`n` kernel `sum_k (z conj w)^k min(k, n) / k^2`.
    pub fn finite_n_kernel(&self, p: usize, q: usize) -> C64 {
        let x = self.points[p] * self.points[q].conj();
        let mut acc = ZERO;
        let mut pw = ONE;
        for k in 1..=4000usize {
            pw *= x;
            let t = pw * (k.min(self.n) as f64 / (k * k) as f64);
            acc += t;
            if t.norm() < 1e-18 {
                break;
            }
        }
        acc
    }
}

pub fn cue_log_char(n: usize, points: &[C64], n_samples: usize, rng: &RngStream) -> Result<CueResult> {
    if n < 2 {
        return Err(Error::Dimension(format!("CUE size {n} must be at least 2")));
    }
    for &z in points {
        if z.norm() > CUE_MAX_RADIUS {
            return Err(Error::Domain {
                value: z.norm(),
                domain: "|z| <= 0.8",
            });
        }
    }
    let values = par::map_range(n_samples, |s| {
        let mut r = rng.substream(s as u64);
        let u = matrix::haar_unitary(n, &mut r);
        let eig = matrix::eigenvalues(&u);
        points
            .iter()
            .map(|&z| eig.iter().map(|l| (ONE - z * l.conj()).ln()).sum::<C64>())
            .collect::<Vec<C64>>()
    });
    let np = points.len();
    let table = |conj: bool| -> Result<Vec<Vec<Estimate>>> {
        (0..np)
            .map(|p| {
                (0..np)
                    .map(|q| {
                        let xs: Vec<C64> = values
                            .iter()
                            .map(|v| v[p] * if conj { v[q].conj() } else { v[q] })
                            .collect();
                        jackknife_mean(&xs)
                    })
                    .collect()
            })
            .collect()
    };
    Ok(CueResult {
        n,
        points: points.to_vec(),
        n_samples,
        sesquianalytic: table(true)?,
        analytic: table(false)?,
    })
}
