//! Acceptance criteria, each run at its stated tolerance with one PASS/FAIL
//! line printed per criterion. Runs without the libtest harness so the lines
//! always reach stdout.
//!
//! Criterion 3 (series convergence of the Chase estimate at `1 - r^2 = 1e-6`)
//! is implemented as stated and is expected to fail: the estimate sits about
//! 12% below the closed form at that radius. It is reported, not asserted.

use std::time::{Duration, Instant};

use dgaf_core::bounds::{self, coupling_corpus, near_one_grid};
use dgaf_core::chase::{self, ChasePermutation};
use dgaf_core::gaf::{self, CouplingMode, GafCoupling};
use dgaf_core::grunsky::{self, ConformalMap};
use dgaf_core::matrix::{self, CMat, ContractionMatrix};
use dgaf_core::rng::RngStream;
use dgaf_core::series::{PowerSeries2, Support};
use dgaf_core::symbols::{self, GrowthPolicy, MobiusMap};
use dgaf_core::Complex64 as C64;

const EXPECTED_FAILURES: &[u32] = &[3];

struct Outcome {
    id: u32,
    name: &'static str,
    pass: bool,
    detail: String,
    elapsed: Duration,
}

fn run(id: u32, name: &'static str, budget: Option<Duration>, f: impl FnOnce() -> (bool, String)) -> Outcome {
    let t = Instant::now();
    let (mut pass, mut detail) = f();
    let elapsed = t.elapsed();
    if let Some(b) = budget {
        if elapsed > b {
            pass = false;
            detail.push_str(&format!("; over budget {b:?}"));
        }
    }
    Outcome {
        id,
        name,
        pass,
        detail,
        elapsed,
    }
}

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn criterion_1() -> (bool, String) {
    let v = chase::sigma2_formula(29).unwrap();
    ((1.7205..=1.7211).contains(&v), format!("sigma2(29) = {v:.6}"))
}

fn criterion_2() -> (bool, String) {
    let (d, v) = chase::sigma2_argmax(3, 200).unwrap();
    (d == 29, format!("argmax d = {d}, value {v:.6}"))
}

fn criterion_3() -> (bool, String) {
    let perm = ChasePermutation::build(29, 5).unwrap();
    let est = chase::sigma2_series_estimate_eps(&perm, &[1e-6]).unwrap()[0];
    let formula = chase::sigma2_formula(29).unwrap();
    // second route: the generic asymptotic-variance ratio on the sparse coefficients F(29^m) = S_m
    let sums = perm.diagonal_sums().unwrap();
    let coeffs: Vec<(u64, C64)> = perm.intervals().iter().zip(&sums).map(|(iv, s)| (iv.power, c(s.sum))).collect();
    let r = (1.0f64 - 1e-6).sqrt();
    let av = bounds::asymptotic_variance(&coeffs, &[r]).unwrap().ratio[0];
    let rel = (est - formula).abs() / formula;
    let routes_agree = (av - est).abs() <= 1e-9 * est;
    (
        rel <= 0.10 && routes_agree,
        format!("estimate {est:.5}, second route {av:.5}, formula {formula:.5}, relative gap {:.2}%", 100.0 * rel),
    )
}

fn corpus() -> Vec<GafCoupling> {
    coupling_corpus(256, 200, 20_240_401).unwrap()
}

fn criterion_4(corpus: &[GafCoupling]) -> (bool, String) {
    let grid = near_one_grid(0.0, 6.0, 60);
    let mut violations = 0;
    let mut checks = 0;
    for g in corpus {
        let t = ContractionMatrix::new(g.analytic_matrix()).unwrap();
        let r = bounds::verify_series_bound(&t, &grid).unwrap();
        checks += r.checks.len();
        violations += r.failures().count();
    }
    (violations == 0, format!("{violations} violations in {checks} checks"))
}

fn criterion_5(corpus: &[GafCoupling]) -> (bool, String) {
    let grid = near_one_grid(0.0, 6.0, 60);
    let mut violations = 0;
    let mut checks = 0;
    for g in corpus {
        let r = bounds::verify_circle_mean(g, &grid).unwrap();
        checks += r.checks.len();
        violations += r.failures().count();
    }
    (violations == 0, format!("{violations} violations in {checks} checks"))
}

fn criterion_6(corpus: &[GafCoupling]) -> (bool, String) {
    let zs = [c(0.0), c(0.7), C64::new(0.3, -0.5), C64::new(-0.6, 0.6), C64::new(0.0, 0.95)];
    let ab = [(c(1.0), c(0.0)), (c(0.0), c(1.0)), (C64::new(0.6, 0.3), C64::new(-0.2, 0.7))];
    let mut violations = 0;
    for g in corpus {
        for &(a, b) in &ab {
            violations += bounds::verify_fundamental_integral(g, &zs, a, b).unwrap().failures().count();
        }
    }
    let z = c(0.7);
    let mut eq_ok = true;
    let mut gaps = Vec::new();
    for (g, a, b) in [
        (GafCoupling::identical(256), c(0.0), c(1.0)),
        (GafCoupling::conjugate_reflect(256), c(1.0), c(0.0)),
    ] {
        let ch = &bounds::verify_fundamental_integral(&g, &[z], a, b).unwrap().checks[0];
        let tail = bounds::fundamental_integral_tail(256, z, a, b);
        eq_ok &= ch.pass && ch.margin <= tail * (1.0 + 1e-9) + 1e-15;
        gaps.push(format!("{:.2e}<={:.2e}", ch.margin, tail));
    }
    (
        violations == 0 && eq_ok,
        format!("{violations} violations; equality margins {}", gaps.join(", ")),
    )
}

fn criterion_7() -> (bool, String) {
    let mut rng = RngStream::new(7, 7);
    let mut worst = 0.0f64;
    let mut all = true;
    for _ in 0..100 {
        let dz = (rng.uniform() * 9.0) as usize;
        let dw = (rng.uniform() * 9.0) as usize;
        let deg = dz.max(dw);
        let vals: Vec<C64> = rng.complex_gaussian_vec((deg + 1) * (deg + 1));
        let f = PowerSeries2::from_fn(deg, Support::Box, |p, q| {
            if p <= dz && q <= dw {
                vals[p * (deg + 1) + q]
            } else {
                c(0.0)
            }
        });
        let r = bounds::diagonal_expansion_check(&f).unwrap();
        all &= r.all_pass();
        let ch = &r.checks[0];
        worst = worst.max((ch.lhs - ch.rhs).abs() / ch.lhs);
    }
    let zw = PowerSeries2::monomial(1, 1, 1, c(1.0));
    let t = bounds::diagonal_expansion_terms(&zw, 2);
    let exact = [1.0 / 6.0, 1.0 / 30.0, 3.0 / 10.0];
    let zw_ok = t.iter().zip(exact).all(|(a, b)| (a - b).abs() < 1e-15) && (t.iter().sum::<f64>() - 0.5).abs() < 1e-15;
    (all && zw_ok && worst <= 1e-10, format!("worst relative discrepancy {worst:.2e}; zw terms {t:?}"))
}

fn criterion_8() -> (bool, String) {
    let r = bounds::combinatorial_identity_check(20).unwrap();
    (r.all_pass(), format!("{} exact equalities", r.checks.iter().filter(|c| c.pass).count()))
}

fn criterion_9() -> (bool, String) {
    let koebe = ConformalMap::koebe(65);
    let m = grunsky::grunsky_matrix(&koebe, 32).unwrap();
    let dev = (m.entries() + CMat::identity(32, 32)).iter().map(|x| x.norm()).fold(0.0, f64::max);
    let norm = m.norm_certificate();
    let q = grunsky::grunsky_symbol(&koebe, 64).unwrap();
    let sym_dev = q
        .q
        .iter()
        .map(|(j, k, v)| (v - c(if j == k && j > 0 { -1.0 / j as f64 } else { 0.0 })).norm())
        .fold(0.0, f64::max);
    (
        dev <= 1e-12 && (norm - 1.0).abs() <= 1e-10 && sym_dev <= 1e-12,
        format!("matrix deviation {dev:.2e}, norm {norm:.12}, symbol deviation {sym_dev:.2e}"),
    )
}

fn criterion_10() -> (bool, String) {
    let mut worst_res = 0.0f64;
    let mut worst_rt = 0.0f64;
    for phi in grunsky::catalog(25) {
        let q = grunsky::grunsky_symbol(&phi, 24).unwrap();
        worst_res = worst_res.max(grunsky::nlw_residual(&q).unwrap().max_abs());
        let back = grunsky::reconstruct_map(&q, 24, phi.series().coeff(2)).unwrap();
        worst_rt = worst_rt.max(back.series().max_abs_diff(phi.series()));
        let again = grunsky::grunsky_symbol(&back, 24).unwrap();
        worst_rt = worst_rt.max(again.q.max_abs_diff(&q.q));
    }
    (
        worst_res <= 1e-9 && worst_rt <= 1e-8,
        format!("worst residual {worst_res:.2e}, worst round trip {worst_rt:.2e}"),
    )
}

fn criterion_11() -> (bool, String) {
    let mut rng = RngStream::new(11, 0);
    let mut all = true;
    let mut worst_ratio = 0.0f64;
    let mut worst_tail = 0.0f64;
    for _ in 0..20 {
        let t = matrix::random_contraction(16, 1.0, &mut rng);
        let a = C64::from_polar(0.4 * rng.uniform().sqrt(), std::f64::consts::TAU * rng.uniform());
        let phi = MobiusMap::new(a, std::f64::consts::TAU * rng.uniform()).unwrap();
        let pts: Vec<C64> = (0..25)
            .map(|_| C64::from_polar(0.9 * rng.uniform().sqrt(), std::f64::consts::TAU * rng.uniform()))
            .collect();
        let r = symbols::verify_mobius_identity(&t, &phi, &pts, Some(64)).unwrap();
        all &= r.all_pass();
        for ch in &r.checks {
            worst_ratio = worst_ratio.max(-ch.margin / ch.tol);
        }
        if let Some(v) = r.params.get("tail").and_then(|v| v.as_f64()) {
            worst_tail = worst_tail.max(v);
        }
    }
    (all, format!("worst discrepancy/tolerance {worst_ratio:.2e}, largest tail {worst_tail:.2e}"))
}

fn criterion_12() -> (bool, String) {
    let mut rng = RngStream::new(12, 0);
    let mut exact = true;
    for i in 0..50 {
        let n = 4 + i % 29;
        let t = matrix::random_contraction(n, 1.0, &mut rng);
        let g = symbols::coupling_from_contraction(&t).unwrap();
        exact &= g.exact_analytic_correlation() == symbols::symbol_from_contraction(&t, n).unwrap().w;
    }
    let t = matrix::random_contraction(8, 1.0, &mut rng);
    let e = matrix::random_contraction(8, 1.0, &mut rng);
    let mut failures = 0;
    let mut checks = 0;
    for g in [
        symbols::coupling_from_contraction(&t).unwrap(),
        GafCoupling::new(8, CouplingMode::SesquianalyticContraction(e)).unwrap(),
    ] {
        let r = gaf::verify_coefficient_contracts(&g, 100_000, 4, 5.0, &RngStream::new(12, 1)).unwrap();
        checks += r.checks.len();
        failures += r.failures().count();
    }
    (
        exact && failures == 0,
        format!("kernels exact: {exact}; Monte Carlo {failures} of {checks} outside 5 SE"),
    )
}

fn criterion_13() -> (bool, String) {
    let pts: Vec<C64> = [c(0.0), c(0.3), C64::new(0.0, 0.45), C64::new(-0.4, 0.2), C64::new(0.42, -0.42), c(-0.6)]
        .to_vec();
    let r = gaf::cue_log_char(64, &pts, 2000, &RngStream::new(13, 0)).unwrap();
    let mut worst_s = 0.0f64;
    let mut worst_a = 0.0f64;
    for p in 0..pts.len() {
        for q in 0..pts.len() {
            worst_s = worst_s.max((r.sesquianalytic[p][q].mean - r.limit_kernel(p, q)).norm());
            worst_a = worst_a.max(r.analytic[p][q].mean.norm());
        }
    }
    (
        worst_s <= 0.05 && worst_a <= 0.05,
        format!("sesquianalytic max error {worst_s:.4}, analytic max modulus {worst_a:.4}"),
    )
}

fn criterion_14() -> (bool, String) {
    let mut prev = 0.0;
    let mut monotone = true;
    let mut certified = true;
    let mut lows = Vec::new();
    for mult in [2.0, 3.0, 4.0] {
        let policy = GrowthPolicy {
            multiplier: mult,
            ..GrowthPolicy::default()
        };
        let mb = symbols::mock_bloch_construct(6, policy, 64).unwrap();
        certified &= mb.cond1_margin >= 0.0 && mb.cond2_margin >= 0.0 && mb.norm_f2.is_finite() && mb.norm_g2.is_finite();
        certified &= mb.bloch_values.iter().zip(&mb.bloch_lower).all(|(v, l)| v >= l);
        certified &= mb.bloch_lower.windows(2).all(|w| w[1] > w[0]);
        let low6 = mb.bloch_lower[5];
        monotone &= low6 > prev;
        prev = low6;
        lows.push(format!("x{mult}: {low6:.2}"));
    }
    let mb = symbols::mock_bloch_construct(6, GrowthPolicy::default(), 64).unwrap();
    let s = mb.rank_one_symbol().unwrap();
    let dev = s.diag.truncate(64).max_abs_diff(&mb.fg);
    (
        certified && monotone && prev > 10.0 && dev <= 1e-12,
        format!("level-6 lower bounds {}; fg vs rank-one diagonal {dev:.2e}", lows.join(", ")),
    )
}

fn criterion_15() -> (bool, String) {
    let couplings = coupling_corpus(24, 12, 15).unwrap();
    let mut rng = RngStream::new(15, 0);
    let pairs: Vec<(C64, C64)> = (0..25)
        .map(|_| {
            let mut p = || C64::from_polar(0.95 * rng.uniform().sqrt(), std::f64::consts::TAU * rng.uniform());
            (p(), p())
        })
        .collect();
    let mut valid_fail = 0;
    for g in couplings.iter().chain([&GafCoupling::identical(24), &GafCoupling::independent(24)]) {
        for &(z, w) in &pairs {
            if !gaf::corr_matrix_psd_check(g, z, w).unwrap().all_pass() {
                valid_fail += 1;
            }
        }
    }
    let cr = GafCoupling::conjugate_reflect(24);
    let detected = pairs
        .iter()
        .filter(|&&(z, w)| !gaf::corr_matrix_psd_check_scaled(&cr, z, w, 3.0).unwrap().all_pass())
        .count();
    (
        valid_fail == 0 && detected > 0,
        format!("{valid_fail} valid-coupling failures; corrupted kernel rejected at {detected}/25 pairs"),
    )
}

fn main() -> std::process::ExitCode {
    let corpus = corpus();
    let secs = Duration::from_secs;
    let outcomes = vec![
        run(1, "chase value", Some(secs(1)), criterion_1),
        run(2, "chase argmax", Some(secs(1)), criterion_2),
        run(3, "chase convergence", Some(secs(30)), criterion_3),
        run(4, "series bound", Some(secs(300)), || criterion_4(&corpus)),
        run(5, "circle-mean bound", None, || criterion_5(&corpus)),
        run(6, "fundamental integral", None, || criterion_6(&corpus)),
        run(7, "diagonal norm expansion", Some(secs(60)), criterion_7),
        run(8, "combinatorial identity", None, criterion_8),
        run(9, "grunsky koebe", None, criterion_9),
        run(10, "wave-equation residual", None, criterion_10),
        run(11, "mobius identity", None, criterion_11),
        run(12, "transfer consistency", None, criterion_12),
        run(13, "cue", None, criterion_13),
        run(14, "mock-bloch", None, criterion_14),
        run(15, "psd sanity", None, criterion_15),
    ];
    let mut unexpected = Vec::new();
    for o in &outcomes {
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {:>2} {:<26} {tag}  [{:.2?}] {}", o.id, o.name, o.elapsed, o.detail);
        if !o.pass && !EXPECTED_FAILURES.contains(&o.id) {
            unexpected.push(o.id);
        }
    }
    let passed = outcomes.iter().filter(|o| o.pass).count();
    println!("acceptance: {passed}/{} criteria pass", outcomes.len());
    if unexpected.is_empty() {
        std::process::ExitCode::SUCCESS
    } else {
        eprintln!("criteria failed unexpectedly: {unexpected:?}");
        std::process::ExitCode::FAILURE
    }
}
