//! One runner per subcommand. Each returns a report whose checks decide the exit code.

use std::f64::consts::TAU;

use anyhow::{bail, ensure, Result};
use dgaf_core::bounds::{self, near_one_grid};
use dgaf_core::chase::{self, ChasePermutation};
use dgaf_core::gaf::{self, CouplingMode, GafCoupling};
use dgaf_core::grunsky::{self, ConformalMap};
use dgaf_core::matrix::{self, ContractionMatrix, CONTRACTION_SLACK};
use dgaf_core::report::{BoundReport, Check, Table};
use dgaf_core::rng::RngStream;
use dgaf_core::series::{PowerSeries1, PowerSeries2, Support};
use dgaf_core::special;
use dgaf_core::symbols::{self, GrowthPolicy, MobiusMap};
use dgaf_core::Complex64 as C64;
use rand::seq::SliceRandom;

use crate::{
    BoundsArgs, BoundsSuite, ChaseArgs, ChaseMode, CueArgs, ExpansionArgs, ExpansionSuite, GafArgs, GrunskyArgs,
    GrunskyCheck, MockBlochArgs, ModeArg, SymbolsArgs, SymbolsSuite,
};

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn disk_point(rng: &mut RngStream, radius: f64) -> C64 {
    C64::from_polar(radius * rng.uniform().sqrt(), TAU * rng.uniform())
}

/// Smallest `m_max` whose covered range reaches `n`.
fn chase_covering(d: u64, n: usize) -> Result<ChasePermutation> {
    for m in 1..=40 {
        let p = ChasePermutation::build(d, m)?;
        if p.n_max() >= n as u64 {
            return Ok(p);
        }
    }
    bail!("no Chase permutation of base {d} covers 1..={n}")
}

fn coupling(mode: ModeArg, n: usize, d: Option<u64>, rng: &mut RngStream) -> Result<GafCoupling> {
    ensure!(n >= 1, "truncation must be at least 1");
    if d.is_some() && mode != ModeArg::Permutation {
        bail!("--d applies only to --mode permutation");
    }
    Ok(match mode {
        ModeArg::Independent => GafCoupling::independent(n),
        ModeArg::Identical => GafCoupling::identical(n),
        ModeArg::ConjugateReflect => GafCoupling::conjugate_reflect(n),
        ModeArg::Permutation => {
            let pi = match d {
                Some(d) => chase_covering(d, n)?.restricted(n)?,
                None => {
                    let mut pi: Vec<usize> = (1..=n).collect();
                    pi.shuffle(rng.rng_mut());
                    pi
                }
            };
            GafCoupling::new(n, CouplingMode::Permutation(pi))?
        }
        ModeArg::Contraction => {
            GafCoupling::new(n, CouplingMode::AnalyticContraction(matrix::random_contraction(n, 1.0, rng)))?
        }
        ModeArg::Sesquianalytic => {
            GafCoupling::new(n, CouplingMode::SesquianalyticContraction(matrix::random_contraction(n, 1.0, rng)))?
        }
    })
}

fn default_grid(grid: &Option<Vec<f64>>) -> Vec<f64> {
    grid.clone().unwrap_or_else(|| near_one_grid(0.0, 6.0, 60))
}

pub fn bounds(a: &BoundsArgs, seed: u64) -> Result<BoundReport> {
    ensure!(a.trials >= 1, "--trials must be at least 1");
    let s_grid = default_grid(&a.s_grid);
    let r_grid = default_grid(&a.r_grid);
    let zs = [c(0.0), c(0.7), C64::new(0.3, -0.5), C64::new(-0.6, 0.6), C64::new(0.0, 0.95)];
    let ab = [(c(1.0), c(0.0)), (c(0.0), c(1.0)), (C64::new(0.6, 0.3), C64::new(-0.2, 0.7))];
    let base = RngStream::new(seed, 1);
    let mut report = BoundReport::new("bounds");
    for trial in 0..a.trials {
        let mut rng = base.substream(trial as u64);
        let g = coupling(a.mode, a.trunc, a.d, &mut rng)?;
        let prefix = if a.trials > 1 { format!("trial {trial}: ") } else { String::new() };
        if matches!(a.suite, BoundsSuite::Series | BoundsSuite::All) {
            let t = ContractionMatrix::new(g.analytic_matrix())?;
            let r = bounds::verify_series_bound(&t, &s_grid)?;
            if trial == 0 && a.suite == BoundsSuite::Series {
                report.table = r.table.clone();
                if let Some(v) = r.params.get("average_abs_S_sq") {
                    report.set_param("average_abs_S_sq", v.clone());
                }
            }
            report.absorb(&format!("{prefix}series: "), r);
        }
        if matches!(a.suite, BoundsSuite::Circle | BoundsSuite::All) {
            report.absorb(&format!("{prefix}circle: "), bounds::verify_circle_mean(&g, &r_grid)?);
        }
        if matches!(a.suite, BoundsSuite::Fundamental | BoundsSuite::All) {
            for &(x, y) in &ab {
                report.absorb(
                    &format!("{prefix}fundamental a={x} b={y}: "),
                    bounds::verify_fundamental_integral(&g, &zs, x, y)?,
                );
            }
        }
    }
    report.set_param("s_grid", s_grid);
    report.set_param("r_grid", r_grid);
    Ok(report)
}

const CHASE_WINDOW: (f64, f64) = (1.7205, 1.7211);
const CHASE_CONVERGENCE_REL: f64 = 0.10;

pub fn chase(a: &ChaseArgs) -> Result<BoundReport> {
    let mut report = BoundReport::new(format!("chase.{}", mode_name(a.mode)));
    match a.mode {
        ChaseMode::Formula => {
            let v = chase::sigma2_formula(a.d)?;
            let q = special::incomplete_beta_sym_quadrature(a.d, 1e-14)?;
            let v_quad = q * q / (a.d as f64).ln();
            report.set_param("sigma2", v);
            report.push(Check::eq("closed form vs quadrature", v, v_quad, 1e-10 * v));
            if a.d == 29 {
                report.push(Check::leq("sigma2(29) >= 1.7205", CHASE_WINDOW.0, v, 0.0));
                report.push(Check::leq("sigma2(29) <= 1.7211", v, CHASE_WINDOW.1, 0.0));
            }
        }
        ChaseMode::Argmax => {
            ensure!(a.lo >= 3 && a.lo < a.hi, "argmax range needs 3 <= lo < hi");
            let (d, v) = chase::sigma2_argmax(a.lo, a.hi)?;
            report.set_param("argmax_d", d);
            report.set_param("sigma2", v);
            for nb in [d.saturating_sub(1), d + 1] {
                if nb >= 3 {
                    report.push(Check::leq(format!("sigma2({nb}) <= sigma2({d})"), chase::sigma2_formula(nb)?, v, 0.0));
                }
            }
            report.push(Check::leq("argmax interior (lower)", a.lo as f64 + 1.0, d as f64, 0.0));
            report.push(Check::leq("argmax interior (upper)", d as f64, a.hi as f64 - 1.0, 0.0));
        }
        ChaseMode::Sums => {
            let perm = ChasePermutation::build(a.d, a.m_max)?;
            let sums = perm.diagonal_sums()?;
            let mut table = Table::new(&["m", "sum", "beta", "error", "envelope", "constant"]);
            let c_max = sums.iter().map(|s| s.constant).fold(0.0, f64::max);
            for s in &sums {
                table.push(vec![s.m as f64, s.sum, s.beta, s.error, s.envelope, s.constant]);
                report.push(Check::leq(format!("S_{} within d^(1-m)", s.m), s.error, s.envelope, 0.0));
            }
            report.set_param("measured_constant", c_max);
            report.table = Some(table);
        }
        ChaseMode::Series => {
            let r_grid = a
                .r_grid
                .clone()
                .unwrap_or_else(|| (1..=12).map(|i| (1.0 - 10f64.powf(-0.5 * i as f64)).sqrt()).collect());
            ensure!(!r_grid.is_empty(), "empty radius grid");
            let perm = ChasePermutation::build(a.d, a.m_max)?;
            let sums = perm.diagonal_sums()?;
            let formula = chase::sigma2_formula(a.d)?;
            let eps: Vec<f64> = r_grid.iter().map(|r| 1.0 - r * r).collect();
            let est = chase::sigma2_from_sums(&perm, &sums, &eps)?;
            let coeffs: Vec<(u64, C64)> =
                perm.intervals().iter().zip(&sums).map(|(iv, s)| (iv.power, c(s.sum))).collect();
            let mut table = Table::new(&["r", "ratio", "formula_value"]);
            for (&r, &e) in r_grid.iter().zip(&est) {
                table.push(vec![r, e, formula]);
                let av = bounds::asymptotic_variance(&coeffs, &[r])?.ratio[0];
                report.push(Check::eq(format!("two routes agree at r={r}"), e, av, 1e-9 * e.abs().max(1e-300)));
            }
            let last = *est.last().expect("nonempty");
            report.set_param("formula", formula);
            report.set_param("estimate_at_largest_r", last);
            report.push(Check::leq(
                "relative gap to formula at largest r",
                (last - formula).abs() / formula,
                CHASE_CONVERGENCE_REL,
                0.0,
            ));
            report.table = Some(table);
        }
    }
    Ok(report)
}

fn mode_name(m: ChaseMode) -> &'static str {
    match m {
        ChaseMode::Formula => "formula",
        ChaseMode::Argmax => "argmax",
        ChaseMode::Sums => "sums",
        ChaseMode::Series => "series",
    }
}

pub fn grunsky(a: &GrunskyArgs) -> Result<BoundReport> {
    ensure!(a.trunc >= 1, "truncation must be at least 1");
    let phi = ConformalMap::parse(&a.map, 2 * a.trunc + 1)?;
    let q = grunsky::grunsky_symbol(&phi, a.trunc)?;
    let want = |k: GrunskyCheck| a.check == k || a.check == GrunskyCheck::All;
    let mut report = BoundReport::new("grunsky");
    report.set_param("map_name", phi.name().to_string());
    if want(GrunskyCheck::Invariants) {
        let ok = q.check_invariants(grunsky::SYMBOL_TOL).is_ok();
        report.push(Check::eq("symbol invariants", if ok { 0.0 } else { 1.0 }, 0.0, 0.0));
    }
    if want(GrunskyCheck::Matrix) {
        let m = grunsky::grunsky_matrix(&phi, a.trunc)?;
        report.push(Check::leq("matrix norm <= 1", m.norm_certificate(), 1.0, CONTRACTION_SLACK));
    }
    if want(GrunskyCheck::Diagonal) {
        let direct = phi.log_diagonal_symbol()?.truncate(a.trunc);
        report.push(Check::eq("diagonal vs log derivative form", q.diagonal().max_abs_diff(&direct), 0.0, 1e-12));
    }
    if want(GrunskyCheck::Residual) {
        let res = grunsky::nlw_residual(&q)?.max_abs();
        report.push(Check::leq("wave-equation residual", res, grunsky::RESIDUAL_MAX, 0.0));
    }
    if want(GrunskyCheck::Roundtrip) {
        let back = grunsky::reconstruct_map(&q, a.trunc, phi.series().coeff(2))?;
        let d_map = back.series().max_abs_diff(phi.series());
        let d_sym = grunsky::grunsky_symbol(&back, a.trunc)?.q.max_abs_diff(&q.q);
        report.push(Check::leq("reconstructed map", d_map, 1e-8, 0.0));
        report.push(Check::leq("reconstructed symbol", d_sym, 1e-8, 0.0));
    }
    Ok(report)
}

pub fn symbols(a: &SymbolsArgs, seed: u64) -> Result<BoundReport> {
    ensure!(a.trunc >= 1 && a.trials >= 1, "--trunc and --trials must be at least 1");
    ensure!((0.0..1.0).contains(&a.radius), "--radius must lie in [0, 1)");
    let want = |s: SymbolsSuite| a.suite == s || a.suite == SymbolsSuite::All;
    let base = RngStream::new(seed, 2);
    let n = a.trunc;
    let mut report = BoundReport::new("symbols");
    if want(SymbolsSuite::Systems) {
        let grid = near_one_grid(0.0, 6.0, 30);
        for i in 0..a.trials {
            let mut rng = base.substream(i as u64);
            let ambient = 2 * n;
            let x = matrix::haar_unitary(ambient, &mut rng).columns(0, n).into_owned();
            let y = matrix::haar_unitary(ambient, &mut rng).columns(0, n).into_owned();
            let t = symbols::contraction_from_systems(&x, &y)?;
            report.push(Check::leq(format!("systems {i}: contraction"), t.norm_certificate(), 1.0, CONTRACTION_SLACK));
            let r = bounds::verify_series_bound_systems(&x, &y, &grid)?;
            let worst = r.worst_margin();
            let pass = r.all_pass();
            report.push(Check {
                label: format!("systems {i}: series bound on {} radii", r.checks.len()),
                lhs: 0.0,
                rhs: worst,
                margin: worst,
                pass,
                tol: 0.0,
            });
        }
    }
    if want(SymbolsSuite::Transfer) {
        for i in 0..a.trials {
            let mut rng = base.substream(1_000 + i as u64);
            let t = matrix::random_contraction(n, 1.0, &mut rng);
            let g = symbols::coupling_from_contraction(&t)?;
            let k = g.exact_analytic_correlation();
            let diff = k.max_abs_diff(&symbols::symbol_from_contraction(&t, n)?.w);
            report.push(Check::eq(format!("transfer {i}: kernel equals symbol"), diff, 0.0, 0.0));
            let back = symbols::contraction_from_correlation(&k)?;
            let rt = (back.entries() - t.entries()).norm();
            report.push(Check::eq(format!("transfer {i}: contraction round trip"), rt, 0.0, 1e-12));
        }
    }
    if want(SymbolsSuite::Mobius) {
        for i in 0..a.trials {
            let mut rng = base.substream(2_000 + i as u64);
            let t = matrix::random_contraction(n, 1.0, &mut rng);
            let phi = MobiusMap::new(disk_point(&mut rng, a.radius), TAU * rng.uniform())?;
            let pts: Vec<C64> = (0..25).map(|_| disk_point(&mut rng, 0.9)).collect();
            let r = symbols::verify_mobius_identity(&t, &phi, &pts, a.working_order)?;
            report.absorb(&format!("mobius {i}: "), r);
        }
    }
    Ok(report)
}

pub fn gaf(a: &GafArgs, seed: u64) -> Result<BoundReport> {
    ensure!(a.trials >= 2, "--trials must be at least 2");
    let mut rng = RngStream::new(seed, 3);
    let g = coupling(a.mode, a.trunc, None, &mut rng)?;
    let mut report = BoundReport::new("gaf");
    report.absorb(
        "contracts: ",
        gaf::verify_coefficient_contracts(&g, a.trials, a.probe, 5.0, &RngStream::new(seed, 4))?,
    );
    let pairs: Vec<(C64, C64)> = (0..16).map(|_| (disk_point(&mut rng, 0.95), disk_point(&mut rng, 0.95))).collect();
    for (i, &(z, w)) in pairs.iter().enumerate() {
        report.absorb(&format!("psd pair {i}: "), gaf::corr_matrix_psd_check(&g, z, w)?);
    }
    report.absorb("triangle: ", gaf::triangle_bound_check(&g, &pairs)?);
    Ok(report)
}

pub fn cue(a: &CueArgs, seed: u64) -> Result<BoundReport> {
    ensure!(a.trials >= 2, "--trials must be at least 2");
    let mut pts = Vec::new();
    for &r in &a.r_grid {
        pts.push(c(r));
        if r != 0.0 {
            pts.push(C64::new(0.0, r));
        }
    }
    let res = gaf::cue_log_char(a.trunc, &pts, a.trials, &RngStream::new(seed, 5))?;
    let mut report = BoundReport::new("cue");
    let mut table = Table::new(&["p", "q", "re_mean", "im_mean", "re_limit", "im_limit", "re_finite_n", "im_finite_n"]);
    for p in 0..pts.len() {
        for q in 0..pts.len() {
            let s = res.sesquianalytic[p][q].mean;
            let lim = res.limit_kernel(p, q);
            let fin = res.finite_n_kernel(p, q);
            table.push(vec![p as f64, q as f64, s.re, s.im, lim.re, lim.im, fin.re, fin.im]);
            let (zp, zq) = (pts[p], pts[q]);
            report.push(Check::leq(format!("E F conj F at ({zp}, {zq})"), (s - lim).norm(), a.tol, 0.0));
            report.push(Check::leq(format!("E F F at ({zp}, {zq})"), res.analytic[p][q].mean.norm(), a.tol, 0.0));
        }
    }
    report.table = Some(table);
    Ok(report)
}

pub fn expansion(a: &ExpansionArgs, seed: u64) -> Result<BoundReport> {
    ensure!(
        a.degree <= bounds::EXPANSION_MAX_DEGREE,
        "--degree above {}",
        bounds::EXPANSION_MAX_DEGREE
    );
    let want = |s: ExpansionSuite| a.suite == s || a.suite == ExpansionSuite::All;
    let base = RngStream::new(seed, 6);
    let mut report = BoundReport::new("expansion");
    if want(ExpansionSuite::Diagonal) {
        for i in 0..a.trials {
            let mut rng = base.substream(i as u64);
            let dz = (rng.uniform() * (a.degree + 1) as f64) as usize;
            let dw = (rng.uniform() * (a.degree + 1) as f64) as usize;
            let deg = dz.max(dw);
            let vals = rng.complex_gaussian_vec((deg + 1) * (deg + 1));
            let f = PowerSeries2::from_fn(deg, Support::Box, |p, q| {
                if p <= dz && q <= dw {
                    vals[p * (deg + 1) + q]
                } else {
                    c(0.0)
                }
            });
            report.absorb(&format!("diagonal {i}: "), bounds::diagonal_expansion_check(&f)?);
        }
    }
    if want(ExpansionSuite::Combinatorial) {
        report.absorb("", bounds::combinatorial_identity_check(a.n_max)?);
    }
    if want(ExpansionSuite::LittlewoodPaley) {
        for i in 0..a.trials {
            let mut rng = base.substream(10_000 + i as u64);
            let f = PowerSeries1::new(rng.complex_gaussian_vec(a.degree + 1));
            report.absorb(&format!("littlewood-paley {i}: "), bounds::littlewood_paley_check(&f)?);
        }
    }
    Ok(report)
}

pub fn mockbloch(a: &MockBlochArgs) -> Result<BoundReport> {
    ensure!(!a.multiplier.is_empty(), "--multiplier needs at least one value");
    let mut report = BoundReport::new("mockbloch");
    let mut table = Table::new(&["multiplier", "level", "lambda", "bloch_value", "bloch_lower"]);
    let mut prev = f64::NEG_INFINITY;
    let mut last = 0.0;
    for &mult in &a.multiplier {
        let policy = GrowthPolicy {
            multiplier: mult,
            ..GrowthPolicy::default()
        };
        let mb = symbols::mock_bloch_construct(a.levels, policy, a.order)?;
        let tag = format!("x{mult}");
        report.push(Check::leq(format!("{tag}: first condition"), 0.0, mb.cond1_margin, 0.0));
        report.push(Check::leq(format!("{tag}: second condition"), 0.0, mb.cond2_margin, 0.0));
        let finite = mb.norm_f2.is_finite() && mb.norm_g2.is_finite();
        report.push(Check::eq(format!("{tag}: finite norms"), if finite { 0.0 } else { 1.0 }, 0.0, 0.0));
        for (l, (&v, &lo)) in mb.bloch_values.iter().zip(&mb.bloch_lower).enumerate() {
            table.push(vec![mult, (l + 1) as f64, mb.lambdas[l], v, lo]);
            report.push(Check::leq(format!("{tag}: level {} value above lower bound", l + 1), lo, v, 0.0));
        }
        for (l, w) in mb.bloch_lower.windows(2).enumerate() {
            report.push(Check::leq(format!("{tag}: lower bound grows at level {}", l + 2), w[0], w[1], 0.0));
        }
        let dev = mb.rank_one_symbol()?.diag.truncate(a.order).max_abs_diff(&mb.fg);
        report.push(Check::eq(format!("{tag}: fg equals rank-one diagonal"), dev, 0.0, 1e-12));
        last = *mb.bloch_lower.last().expect("levels >= 2");
        report.push(Check::leq(format!("{tag}: sharper than previous policy"), prev, last, 0.0));
        prev = last;
        report.set_param(&format!("last_lower_{tag}"), last);
    }
    report.push(Check::leq("last level exceeds threshold", a.threshold, last, 0.0));
    report.table = Some(table);
    Ok(report)
}
