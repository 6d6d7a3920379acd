//! Cross-module pipelines: operators built in one module feed the bounds of another.

use dgaf_core::bounds::{self, near_one_grid};
use dgaf_core::chase::ChasePermutation;
use dgaf_core::gaf::{CouplingMode, GafCoupling};
use dgaf_core::grunsky::{self, ConformalMap};
use dgaf_core::matrix::{self, CMat, ContractionMatrix};
use dgaf_core::rng::RngStream;
use dgaf_core::symbols;
use dgaf_core::Complex64 as C64;

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

#[test]
fn systems_feed_couplings_and_bounds() {
    let grid = near_one_grid(0.0, 6.0, 24);
    let mut rng = RngStream::new(40, 0);
    for _ in 0..4 {
        let x = matrix::haar_unitary(48, &mut rng).columns(0, 24).into_owned();
        let y = matrix::haar_unitary(48, &mut rng).columns(0, 24).into_owned();
        let t = symbols::contraction_from_systems(&x, &y).unwrap();
        let g = symbols::coupling_from_contraction(&t).unwrap();
        assert!(bounds::verify_series_bound(&t, &grid).unwrap().all_pass());
        assert!(bounds::verify_circle_mean(&g, &grid).unwrap().all_pass());
        let zs = [c(0.0), C64::new(0.5, 0.5), c(-0.9)];
        assert!(bounds::verify_fundamental_integral(&g, &zs, c(1.0), C64::new(0.0, 1.0)).unwrap().all_pass());
    }
}

#[test]
fn grunsky_operators_are_admissible_couplings() {
    let grid = near_one_grid(0.0, 6.0, 24);
    for phi in grunsky::catalog(49) {
        let m = grunsky::grunsky_matrix(&phi, 24).unwrap();
        let t = ContractionMatrix::contraction(m.entries().clone()).unwrap();
        let g = GafCoupling::new(24, CouplingMode::AnalyticContraction(t.clone())).unwrap();
        assert!(bounds::verify_series_bound(&t, &grid).unwrap().all_pass(), "{}", phi.name());
        assert!(bounds::verify_circle_mean(&g, &grid).unwrap().all_pass(), "{}", phi.name());
    }
    let koebe = grunsky::grunsky_matrix(&ConformalMap::koebe(49), 24).unwrap();
    assert!((koebe.entries() + CMat::identity(24, 24)).norm() < 1e-12);
}

#[test]
fn chase_sums_are_antidiagonal_sums() {
    let perm = ChasePermutation::build(3, 4).unwrap();
    let pi = perm.restricted(60).unwrap();
    let g = GafCoupling::new(60, CouplingMode::Permutation(pi)).unwrap();
    let t = ContractionMatrix::new(g.analytic_matrix()).unwrap();
    let f = bounds::antidiagonal_sums(t.entries());
    for s in perm.diagonal_sums().unwrap() {
        let l = 3usize.pow(s.m);
        assert!((f[l] - c(s.sum)).norm() < 1e-13, "l = {l}: {} vs {}", f[l], s.sum);
    }
    for (l, v) in f.iter().enumerate() {
        if ![3, 9, 27, 81].contains(&l) {
            assert_eq!(v.norm(), 0.0, "l = {l}");
        }
    }
}

#[test]
fn transfer_then_mobius_preserves_kernel_norm() {
    let mut rng = RngStream::new(41, 0);
    let t = matrix::random_contraction(10, 1.0, &mut rng);
    let phi = symbols::MobiusMap::new(C64::new(0.2, -0.1), 0.7).unwrap();
    let conj = symbols::mobius_conjugate(&t, &phi, None).unwrap();
    let g = symbols::coupling_from_contraction(&conj.matrix).unwrap();
    assert!((conj.matrix.norm_certificate() - t.norm_certificate()).abs() <= 1e-6 + conj.tail);
    assert!(bounds::verify_circle_mean(&g, &near_one_grid(0.0, 4.0, 8)).unwrap().all_pass());
}
