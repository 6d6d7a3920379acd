//! The interval-reversal involution `pi_d(j) = d^m - j` on consecutive
//! intervals `I_m`, its antidiagonal sums and the asymptotic variance it
//! produces.

use crate::special::incomplete_beta_sym;
use crate::{par, Error, Result};

/// `I_m = [lo, hi]` with reflection constant `d^m`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub struct Interval {
    pub m: u32,
    pub lo: u64,
    pub hi: u64,
    pub power: u64,
}

impl Interval {
    pub fn len(&self) -> u64 {
        self.hi - self.lo + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// The involution on `1..=n_max`. The map is evaluated on demand from the
/// interval table (an explicit array at `d = 29, m = 5` would hold ~2e7 entries).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChasePermutation {
    d: u64,
    intervals: Vec<Interval>,
}

fn exact_div(num: u64, den: u64) -> Result<u64> {
    if !num.is_multiple_of(den) {
        return Err(Error::Invalid(format!("endpoint {num}/{den} is not integral")));
    }
    Ok(num / den)
}

impl ChasePermutation {
    pub fn build(d: u64, m_max: u32) -> Result<Self> {
        if d < 3 {
            return Err(Error::Domain {
                value: d as f64,
                domain: "d >= 3",
            });
        }
        if m_max < 1 {
            return Err(Error::Domain {
                value: m_max as f64,
                domain: "m_max >= 1",
            });
        }
        let mut intervals = Vec::with_capacity(m_max as usize);
        for m in 1..=m_max {
            let power = d.checked_pow(m).ok_or(Error::Overflow("d^m"))?;
            let next = power.checked_mul(d).ok_or(Error::Overflow("d^(m+1)"))?;
            let (lo, hi) = if m % 2 == 1 {
                (exact_div(power + 1, d + 1)?, exact_div(next - 1, d + 1)?)
            } else {
                (exact_div(power + d, d + 1)?, exact_div(next - d, d + 1)?)
            };
            intervals.push(Interval { m, lo, hi, power });
        }
        let perm = Self { d, intervals };
        perm.check_partition()?;
        Ok(perm)
    }

    fn check_partition(&self) -> Result<()> {
        let mut expect = 1;
        for iv in &self.intervals {
            if iv.lo != expect || iv.hi < iv.lo || iv.lo + iv.hi != iv.power {
                return Err(Error::Invalid(format!("interval I_{} = [{}, {}] breaks the partition", iv.m, iv.lo, iv.hi)));
            }
            expect = iv.hi + 1;
        }
        Ok(())
    }

    pub fn d(&self) -> u64 {
        self.d
    }

    pub fn m_max(&self) -> u32 {
        self.intervals.len() as u32
    }

    pub fn n_max(&self) -> u64 {
        self.intervals.last().map_or(0, |iv| iv.hi)
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn interval(&self, m: u32) -> Option<&Interval> {
        self.intervals.get((m as usize).checked_sub(1)?)
    }

    pub fn interval_of(&self, j: u64) -> Option<&Interval> {
        let i = self.intervals.partition_point(|iv| iv.hi < j);
        self.intervals.get(i).filter(|iv| iv.lo <= j)
    }

    /// `pi(j)` for `1 <= j <= n_max`.
    pub fn apply(&self, j: u64) -> Option<u64> {
        self.interval_of(j).map(|iv| iv.power - j)
    }

    /// A bijection of `1..=n`: `pi(j)` where both `j` and `pi(j)` lie in `1..=n`,
    /// `j` itself where the partner falls beyond `n`. Entry `k-1` holds the image of `k`.
    pub fn restricted(&self, n: usize) -> Result<Vec<usize>> {
        if n as u64 > self.n_max() {
            return Err(Error::InsufficientTruncation(format!(
                "n = {n} exceeds the covered range 1..={}",
                self.n_max()
            )));
        }
        Ok((1..=n as u64)
            .map(|j| {
                let p = self.apply(j).expect("j within covered range");
                if p as usize <= n {
                    p as usize
                } else {
                    j as usize
                }
            })
            .collect())
    }

    /// `sum_{j in I_m} j^{-1/2} (d^m - j)^{-1/2}`, compensated.
    pub fn diagonal_sum(&self, m: u32) -> Result<DiagonalSum> {
        let iv = *self.interval(m).ok_or(Error::Domain {
            value: m as f64,
            domain: "1 <= m <= m_max",
        })?;
        let p = iv.power as f64;
        const CHUNK: u64 = 1 << 16;
        let chunks = iv.len().div_ceil(CHUNK) as usize;
        let parts = par::map_range(chunks, |c| {
            let a = iv.lo + c as u64 * CHUNK;
            let b = (a + CHUNK - 1).min(iv.hi);
            let mut acc = Neumaier::default();
            for j in a..=b {
                let jf = j as f64;
                acc.add(1.0 / (jf * (p - jf)).sqrt());
            }
            acc
        });
        let mut total = Neumaier::default();
        for part in parts {
            total.add(part.sum);
            total.add(part.comp);
        }
        let sum = total.value();
        let beta = incomplete_beta_sym(self.d)?;
        let error = (sum - beta).abs();
        let envelope = (self.d as f64).powi(1 - m as i32);
        Ok(DiagonalSum {
            m,
            sum,
            beta,
            error,
            envelope,
            constant: error / envelope,
        })
    }

    /// All diagonal sums `S_1..S_{m_max}`.
    pub fn diagonal_sums(&self) -> Result<Vec<DiagonalSum>> {
        (1..=self.m_max()).map(|m| self.diagonal_sum(m)).collect()
    }
}

/// Antidiagonal sum over `I_m` against its incomplete Beta limit.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct DiagonalSum {
    pub m: u32,
    pub sum: f64,
    pub beta: f64,
    pub error: f64,
    /// `d^{1-m}`.
    pub envelope: f64,
    /// Measured `error / envelope`.
    pub constant: f64,
}

/// Neumaier compensated summation.
#[derive(Clone, Copy, Debug, Default)]
pub struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// `(1 / log d) (pi - 4 (d+1)^{-1/2} 2F1(1/2,1/2;3/2;1/(d+1)))^2`.
pub fn sigma2_formula(d: u64) -> Result<f64> {
    if d < 3 {
        return Err(Error::Domain {
            value: d as f64,
            domain: "d >= 3",
        });
    }
    let b = incomplete_beta_sym(d)?;
    Ok(b * b / (d as f64).ln())
}

/// Maximizer of [`sigma2_formula`] over `lo..=hi`.
pub fn sigma2_argmax(lo: u64, hi: u64) -> Result<(u64, f64)> {
    let mut best = (lo, f64::NEG_INFINITY);
    for d in lo..=hi {
        let v = sigma2_formula(d)?;
        if v > best.1 {
            best = (d, v);
        }
    }
    Ok(best)
}

/// `sum_m r^{2 d^m} S_m^2 / log(1/(1-r^2))` for each `eps = 1 - r^2`.
pub fn sigma2_series_estimate_eps(perm: &ChasePermutation, eps: &[f64]) -> Result<Vec<f64>> {
    let sums = perm.diagonal_sums()?;
    sigma2_from_sums(perm, &sums, eps)
}

/// The same estimate from precomputed diagonal sums.
pub fn sigma2_from_sums(perm: &ChasePermutation, sums: &[DiagonalSum], eps: &[f64]) -> Result<Vec<f64>> {
    let top = perm.interval(perm.m_max()).expect("m_max >= 1").power as f64;
    eps.iter()
        .map(|&e| {
            if !(e > 0.0 && e <= 1.0) {
                return Err(Error::Domain {
                    value: e,
                    domain: "0 < 1 - r^2 <= 1",
                });
            }
            if e == 1.0 {
                return Ok(0.0);
            }
            if top < 1.0 / e {
                return Err(Error::InsufficientTruncation(format!(
                    "d^m_max = {top} is below 1/(1-r^2) = {}",
                    1.0 / e
                )));
            }
            let log_r2 = (-e).ln_1p();
            let mut acc = Neumaier::default();
            for (iv, s) in perm.intervals().iter().zip(sums) {
                acc.add((iv.power as f64 * log_r2).exp() * s.sum * s.sum);
            }
            Ok(acc.value() / -e.ln())
        })
        .collect()
}

/// [`sigma2_series_estimate_eps`] parametrized by the radius `r`.
pub fn sigma2_series_estimate(perm: &ChasePermutation, r: &[f64]) -> Result<Vec<f64>> {
    let eps: Vec<f64> = r.iter().map(|&r| 1.0 - r * r).collect();
    sigma2_series_estimate_eps(perm, &eps)
}
