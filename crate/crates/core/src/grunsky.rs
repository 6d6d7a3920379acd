//! Grunsky symbols of normalized univalent maps `phi(z) = z + a_2 z^2 + ...`:
//!
//! `Q(z,w) = log((phi(z) - phi(w)) / (z - w)) - log(phi(z)/z) - log(phi(w)/w)`,
//!
//! the Grunsky matrix `sqrt(jk) [z^j w^k] Q`, the nonlinear wave equation
//! residual, and recovery of the map from `Q`.

use num_complex::Complex64 as C64;

use crate::matrix::{CMat, ContractionMatrix};
use crate::series::{divided_difference, Factor, PowerSeries1, PowerSeries2, Support};
use crate::{Error, Result};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// Largest residual coefficient accepted by [`reconstruct_map`].
pub const RESIDUAL_MAX: f64 = 1e-8;
/// Tolerance for the structural invariants of a [`GrunskySymbol`].
pub const SYMBOL_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub enum MapName {
    Identity,
    Koebe,
    /// `z / (1 - c z)`.
    CayleyLike(C64),
    Custom(String),
}

impl std::fmt::Display for MapName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Identity => write!(f, "identity"),
            Self::Koebe => write!(f, "koebe"),
            Self::CayleyLike(c) => write!(f, "cayley_like({c})"),
            Self::Custom(s) => write!(f, "{s}"),
        }
    }
}

/// Taylor data of a map with `phi(0) = 0`, `phi'(0) = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConformalMap {
    series: PowerSeries1,
    name: MapName,
}

impl ConformalMap {
    pub fn new(series: PowerSeries1, name: MapName) -> Result<Self> {
        if series.order() < 1 {
            return Err(Error::NotNormalized("order below 1".into()));
        }
        if series.coeff(0) != ZERO || series.coeff(1) != ONE {
            return Err(Error::NotNormalized(format!(
                "c_0 = {}, c_1 = {}",
                series.coeff(0),
                series.coeff(1)
            )));
        }
        Ok(Self { series, name })
    }

    pub fn identity(order: usize) -> Self {
        Self::from_coeffs(order, MapName::Identity, |n| if n == 1 { ONE } else { ZERO })
    }

    /// `z / (1 - z)^2 = sum n z^n`.
    pub fn koebe(order: usize) -> Self {
        Self::from_coeffs(order, MapName::Koebe, |n| C64::new(n as f64, 0.0))
    }

    /// `z / (1 - c z) = sum c^{n-1} z^n`.
    pub fn cayley_like(c: C64, order: usize) -> Self {
        Self::from_coeffs(order, MapName::CayleyLike(c), |n| if n == 0 { ZERO } else { c.powu(n as u32 - 1) })
    }

    /// Polynomial `z + sum_{n>=2} a_n z^n` from `[a_2, a_3, ...]`, padded to `order`.
    pub fn polynomial(tail: &[C64], order: usize) -> Result<Self> {
        let order = order.max(tail.len() + 1);
        let name = MapName::Custom(format!(
            "z{}",
            tail.iter()
                .enumerate()
                .filter(|(_, c)| **c != ZERO)
                .map(|(i, c)| format!("+({c})z^{}", i + 2))
                .collect::<String>()
        ));
        Ok(Self::from_coeffs(order, name, |n| match n {
            0 => ZERO,
            1 => ONE,
            _ => tail.get(n - 2).copied().unwrap_or(ZERO),
        }))
    }

    fn from_coeffs(order: usize, name: MapName, f: impl Fn(usize) -> C64) -> Self {
        let order = order.max(1);
        Self {
            series: PowerSeries1::from_fn(order, f),
            name,
        }
    }

    /// `identity`, `koebe`, `cayley:<c>` or `poly:<a_2>,<a_3>,...`, with complex
    /// values written `x`, `yi` or `x+yi`.
    pub fn parse(text: &str, order: usize) -> Result<Self> {
        let text = text.trim();
        match text {
            "identity" => return Ok(Self::identity(order)),
            "koebe" => return Ok(Self::koebe(order)),
            _ => {}
        }
        if let Some(c) = text.strip_prefix("cayley:") {
            let c = parse_complex(c)?;
            if c.norm() > 1.0 {
                return Err(Error::Invalid(format!("cayley parameter {c} outside the closed disk")));
            }
            return Ok(Self::cayley_like(c, order));
        }
        if let Some(list) = text.strip_prefix("poly:") {
            let tail = list.split(',').map(parse_complex).collect::<Result<Vec<_>>>()?;
            return Self::polynomial(&tail, order);
        }
        Err(Error::Invalid(format!("unknown map `{text}`")))
    }

    pub fn series(&self) -> &PowerSeries1 {
        &self.series
    }

    pub fn name(&self) -> &MapName {
        &self.name
    }

    pub fn order(&self) -> usize {
        self.series.order()
    }

    /// `log(z^2 phi'(z) / phi(z)^2)`, computed from `phi'` and `z / phi` alone.
    pub fn log_diagonal_symbol(&self) -> Result<PowerSeries1> {
        let h = self.series.unshift(1)?.recip()?;
        let d = self.series.derivative();
        (&d * &(&h * &h)).log()
    }
}

/// Parse `x`, `yi`, `x+yi` or `x-yi`.
pub fn parse_complex(s: &str) -> Result<C64> {
    let t = s.trim().replace(' ', "");
    let bad = || Error::Invalid(format!("cannot parse complex number `{s}`"));
    if let Some(body) = t.strip_suffix('i') {
        let split = body
            .char_indices()
            .skip(1)
            .filter(|&(i, ch)| (ch == '+' || ch == '-') && !body[..i].ends_with(['e', 'E']))
            .map(|(i, _)| i)
            .last();
        let (re, im) = match split {
            Some(i) => (&body[..i], &body[i..]),
            None => ("0", body),
        };
        let im = match im {
            "" | "+" => "1",
            "-" => "-1",
            x => x,
        };
        let re: f64 = re.parse().map_err(|_| bad())?;
        let im: f64 = im.parse().map_err(|_| bad())?;
        Ok(C64::new(re, im))
    } else {
        Ok(C64::new(t.parse().map_err(|_| bad())?, 0.0))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GrunskySymbol {
    pub q: PowerSeries2,
    pub source: String,
}

impl GrunskySymbol {
    pub fn order(&self) -> usize {
        self.q.order()
    }

    /// Vanishing edges and symmetry.
    pub fn check_invariants(&self, tol: f64) -> Result<()> {
        let n = self.q.order();
        for k in 0..=n {
            let e = self.q.coeff(0, k).norm().max(self.q.coeff(k, 0).norm());
            if e > tol {
                return Err(Error::MalformedSymbol(format!("edge coefficient {e} at degree {k}")));
            }
        }
        if !self.q.is_symmetric(tol) {
            return Err(Error::MalformedSymbol("not symmetric".into()));
        }
        Ok(())
    }

    /// `Q(z, z)`.
    pub fn diagonal(&self) -> PowerSeries1 {
        self.q.diagonal()
    }
}

/// `Q` through total degree `n`; needs the map to order `n + 1`.
pub fn grunsky_symbol(phi: &ConformalMap, n: usize) -> Result<GrunskySymbol> {
    if phi.order() < n + 1 {
        return Err(Error::InsufficientOrder {
            have: phi.order(),
            need: n + 1,
        });
    }
    let s = phi.series().truncate(n + 1);
    let dd = divided_difference(&s).log()?;
    let ratio = s.unshift(1)?.log()?;
    let q = &(&dd - &PowerSeries2::from_z(&ratio)) - &PowerSeries2::from_w(&ratio);
    let q = q.to_simplex();
    Ok(GrunskySymbol {
        q,
        source: phi.name().to_string(),
    })
}

/// `m_jk = sqrt(jk) [z^j w^k] Q` for `1 <= j, k <= n`, with its norm certificate.
/// Needs the map to order `2n + 1` so every box coefficient is determined.
pub fn grunsky_matrix(phi: &ConformalMap, n: usize) -> Result<ContractionMatrix> {
    if phi.order() < 2 * n + 1 {
        return Err(Error::InsufficientOrder {
            have: phi.order(),
            need: 2 * n + 1,
        });
    }
    let q = grunsky_symbol(phi, 2 * n)?;
    ContractionMatrix::new(CMat::from_fn(n, n, |k, j| {
        q.q.coeff(j + 1, k + 1) * (((j + 1) * (k + 1)) as f64).sqrt()
    }))
}

/// `d_z d_w Q + d_z Q d_w Q - (z^2 d_z Q - w^2 d_w Q) / (zw (z - w))`
/// through total degree `N - 2`.
pub fn nlw_residual(sym: &GrunskySymbol) -> Result<PowerSeries2> {
    sym.check_invariants(SYMBOL_TOL.max(1e-12 * sym.q.max_abs()))?;
    let q = sym.q.to_simplex();
    let n = q.order();
    if n < 2 {
        return Ok(PowerSeries2::zeros(0, Support::Simplex));
    }
    let qz = q.diff_z();
    let qw = q.diff_w();
    let qzw = qz.diff_w();
    let prod = &qz * &qw;
    let num = &qz.mul_monomial(2, 0) - &qw.mul_monomial(0, 2);
    let frac = num
        .divide_by(Factor::ZMinusW)?
        .divide_by(Factor::Z)?
        .divide_by(Factor::W)?;
    Ok(&(&qzw + &prod) - &frac)
}

/// Rebuild `phi` from `Q` through order `n + 1`. `Q` fixes `phi` only up to
/// `phi -> phi / (1 + c phi)`, which moves `a_2`; the second Taylor
/// coefficient is therefore an input.
///
/// With `h = z / phi`, `exp(Q(z, z)) = h - z h'`, so `h_l = e_l / (1 - l)` for
/// `l >= 2` and `h_1 = -a_2`.
pub fn reconstruct_map(sym: &GrunskySymbol, n: usize, second_coefficient: C64) -> Result<ConformalMap> {
    if n > sym.order() {
        return Err(Error::InsufficientOrder {
            have: sym.order(),
            need: n,
        });
    }
    let res = nlw_residual(sym)?;
    let worst = res.max_abs();
    if worst > RESIDUAL_MAX {
        return Err(Error::MalformedSymbol(format!(
            "wave-equation residual {worst:e} exceeds {RESIDUAL_MAX:e}"
        )));
    }
    let e = sym.diagonal().truncate(n).exp();
    let h = PowerSeries1::from_fn(n, |l| match l {
        0 => ONE,
        1 => -second_coefficient,
        _ => e.coeff(l) / (1.0 - l as f64),
    });
    let phi = h.recip()?.shift(1);
    ConformalMap::new(
        PowerSeries1::from_fn(phi.order(), |l| match l {
            0 => ZERO,
            1 => ONE,
            _ => phi.coeff(l),
        }),
        MapName::Custom(format!("reconstructed({})", sym.source)),
    )
}

/// Maps with known univalence used by the checks: identity, Koebe,
/// `z/(1 - 0.3 z)`, `z/(1 - 0.7i z)` and `z + 0.1 z^2`.
pub fn catalog(order: usize) -> Vec<ConformalMap> {
    vec![
        ConformalMap::identity(order),
        ConformalMap::koebe(order),
        ConformalMap::cayley_like(C64::new(0.3, 0.0), order),
        ConformalMap::cayley_like(C64::new(0.0, 0.7), order),
        ConformalMap::polynomial(&[C64::new(0.1, 0.0)], order).expect("normalized"),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn normalization_is_enforced() {
        assert!(ConformalMap::new(PowerSeries1::from_real(&[0.0, 2.0, 1.0]), MapName::Custom("x".into())).is_err());
        assert!(ConformalMap::new(PowerSeries1::from_real(&[0.1, 1.0]), MapName::Custom("x".into())).is_err());
        assert!(ConformalMap::new(PowerSeries1::from_real(&[0.0, 1.0, 0.3]), MapName::Custom("x".into())).is_ok());
    }

    #[test]
    fn parse_maps_and_numbers() {
        assert_eq!(parse_complex("0.7i").unwrap(), C64::new(0.0, 0.7));
        assert_eq!(parse_complex("0.3").unwrap(), c(0.3));
        assert_eq!(parse_complex("1-2i").unwrap(), C64::new(1.0, -2.0));
        assert_eq!(parse_complex("-1e-3+2e-2i").unwrap(), C64::new(-1e-3, 2e-2));
        assert!(parse_complex("x").is_err());
        assert_eq!(ConformalMap::parse("koebe", 5).unwrap(), ConformalMap::koebe(5));
        let p = ConformalMap::parse("poly:0.1", 8).unwrap();
        assert_eq!(p.series().coeff(2), c(0.1));
        assert!(ConformalMap::parse("cayley:2", 8).is_err());
        assert!(ConformalMap::parse("nope", 8).is_err());
    }

    #[test]
    fn identity_symbol_is_zero() {
        let q = grunsky_symbol(&ConformalMap::identity(20), 19).unwrap();
        assert_eq!(q.q.max_abs(), 0.0);
        let m = grunsky_matrix(&ConformalMap::identity(21), 10).unwrap();
        assert_eq!(m.norm_certificate(), 0.0);
    }

    #[test]
    fn koebe_symbol_is_log_one_minus_zw() {
        let q = grunsky_symbol(&ConformalMap::koebe(41), 40).unwrap();
        for (j, k, v) in q.q.iter() {
            let want = if j == k && j > 0 { -1.0 / j as f64 } else { 0.0 };
            assert!((v - c(want)).norm() < 1e-12, "({j},{k}): {v}");
        }
        let d = q.diagonal();
        let log = ConformalMap::koebe(41).log_diagonal_symbol().unwrap();
        assert!(d.max_abs_diff(&log) < 1e-12);
        for l in 1..=20 {
            let want = if l % 2 == 0 { -2.0 / l as f64 } else { 0.0 };
            assert!((d.coeff(l) - c(want)).norm() < 1e-12);
        }
    }

    #[test]
    fn koebe_matrix_is_minus_identity() {
        let m = grunsky_matrix(&ConformalMap::koebe(65), 32).unwrap();
        assert!((m.entries() + CMat::identity(32, 32)).camax() < 1e-12);
        assert!((m.norm_certificate() - 1.0).abs() < 1e-10);
        assert!(matches!(grunsky_matrix(&ConformalMap::koebe(40), 32), Err(Error::InsufficientOrder { .. })));
    }

    #[test]
    fn catalog_norms_and_diagonals() {
        for phi in catalog(65) {
            let m = grunsky_matrix(&phi, 32).unwrap();
            assert!(m.norm_certificate() <= 1.0 + 1e-9, "{}: {}", phi.name(), m.norm_certificate());
            let q = grunsky_symbol(&phi, 40).unwrap();
            q.check_invariants(SYMBOL_TOL).unwrap();
            let direct = phi.log_diagonal_symbol().unwrap().truncate(40);
            assert!(q.diagonal().max_abs_diff(&direct) < 1e-12, "{}", phi.name());
        }
        let small = ConformalMap::polynomial(&[c(0.1)], 65).unwrap();
        assert!(grunsky_matrix(&small, 32).unwrap().norm_certificate() < 1.0);
    }

    #[test]
    fn residual_examples() {
        let zero = GrunskySymbol {
            q: PowerSeries2::zeros(10, Support::Simplex),
            source: "zero".into(),
        };
        assert_eq!(nlw_residual(&zero).unwrap().max_abs(), 0.0);
        let log = GrunskySymbol {
            q: PowerSeries2::from_fn(24, Support::Simplex, |j, k| if j == k && j > 0 { c(-1.0 / j as f64) } else { ZERO }),
            source: "log".into(),
        };
        let r = nlw_residual(&log).unwrap();
        assert_eq!(r.order(), 22);
        assert!(r.max_abs() < 1e-13);
        for phi in catalog(25) {
            let r = nlw_residual(&grunsky_symbol(&phi, 24).unwrap()).unwrap();
            assert!(r.max_abs() <= 1e-9, "{}: {}", phi.name(), r.max_abs());
        }
        let bad = GrunskySymbol {
            q: PowerSeries2::monomial(6, 1, 2, c(1.0)).to_simplex(),
            source: "bad".into(),
        };
        assert!(nlw_residual(&bad).is_err());
    }

    #[test]
    fn residual_detects_non_grunsky_symbols() {
        let q = PowerSeries2::from_fn(12, Support::Simplex, |j, k| if j == 1 && k == 1 { c(0.5) } else if j == 2 && k == 2 { c(0.4) } else { ZERO });
        let sym = GrunskySymbol { q, source: "fake".into() };
        assert!(nlw_residual(&sym).unwrap().max_abs() > 1e-3);
        assert!(reconstruct_map(&sym, 12, ZERO).is_err());
    }

    #[test]
    fn reconstruction_examples() {
        let zero = GrunskySymbol {
            q: PowerSeries2::zeros(16, Support::Simplex),
            source: "zero".into(),
        };
        let phi = reconstruct_map(&zero, 16, ZERO).unwrap();
        assert_eq!(phi.series().max_abs_diff(ConformalMap::identity(17).series()), 0.0);
        let koebe = grunsky_symbol(&ConformalMap::koebe(25), 24).unwrap();
        let back = reconstruct_map(&koebe, 24, c(2.0)).unwrap();
        assert!(back.series().max_abs_diff(ConformalMap::koebe(25).series()) < 1e-8);
        // the other normalization gives the rotated Koebe map z/(1+z^2) with the same symbol
        let rot = reconstruct_map(&koebe, 24, ZERO).unwrap();
        let q2 = grunsky_symbol(&rot, 24).unwrap();
        assert!(q2.q.max_abs_diff(&koebe.q) < 1e-8);
        for phi in catalog(25) {
            let q = grunsky_symbol(&phi, 24).unwrap();
            let back = reconstruct_map(&q, 24, phi.series().coeff(2)).unwrap();
            assert!(back.series().max_abs_diff(phi.series()) < 1e-8, "{}", phi.name());
        }
    }

    fn near_identity() -> impl Strategy<Value = ConformalMap> {
        // sum n |a_n| <= 1/2 keeps the map univalent
        proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..8).prop_map(|v| {
            let tail: Vec<C64> = v
                .iter()
                .enumerate()
                .map(|(i, &(a, b))| C64::new(a, b) * (0.5 / (2.0f64.sqrt() * (i + 2) as f64 * v.len() as f64)))
                .collect();
            ConformalMap::polynomial(&tail, 25).unwrap()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn symbols_satisfy_invariants(phi in near_identity()) {
            let q = grunsky_symbol(&phi, 24).unwrap();
            prop_assert!(q.check_invariants(SYMBOL_TOL).is_ok());
            prop_assert!(nlw_residual(&q).unwrap().max_abs() <= 1e-9);
        }

        #[test]
        fn reconstruction_round_trips(phi in near_identity()) {
            let q = grunsky_symbol(&phi, 24).unwrap();
            let back = reconstruct_map(&q, 24, phi.series().coeff(2)).unwrap();
            prop_assert!(back.series().max_abs_diff(phi.series()) < 1e-8);
            let again = grunsky_symbol(&back, 24).unwrap();
            prop_assert!(again.q.max_abs_diff(&q.q) < 1e-8);
        }

        #[test]
        fn grunsky_inequality_near_identity(phi in near_identity()) {
            let phi = ConformalMap::new(phi.series().truncate(25), phi.name().clone()).unwrap();
            let m = grunsky_matrix(&phi, 12).unwrap();
            prop_assert!(m.norm_certificate() <= 1.0 + 1e-9);
        }
    }
}
