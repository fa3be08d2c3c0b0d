//! Mutual information and MMSE of unit-energy signaling alphabets over the
//! complex AWGN channel `y = sqrt(snr) s + n`, `n ~ CN(0, 1)`.
//!
//! Square QAM is evaluated per dimension (it is the product of two PAMs), each
//! expectation over the noise taken by Gauss-Hermite quadrature. Arbitrary
//! constellations go through the full two-dimensional product rule. Hot paths
//! use [`InfoTable`], a monotone cubic interpolant on a dB grid.

use alloc::format;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

#[allow(unused_imports)] // inherent once std is in the graph
use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg::C64;

/// Gauss-Hermite nodes per PAM dimension. Fewer nodes lose accuracy above
/// about 20 dB; the node recursion itself degrades well beyond this.
pub const DEFAULT_QUADRATURE_NODES: usize = 128;
pub const TABLE_START_DB: f64 = -30.0;
pub const TABLE_STOP_DB: f64 = 60.0;
pub const TABLE_STEP_DB: f64 = 0.1;
/// Smallest MMSE kept in a table. Above the SNR where it is reached the
/// alphabet counts as saturated.
pub const MMSE_FLOOR: f64 = 1e-15;

/// Unit-energy square QAM.
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    points: Vec<C64>,
    order: usize,
    /// Per-dimension amplitude levels, each dimension carrying energy 1/2.
    levels: Vec<f64>,
}

impl Constellation {
    pub fn square_qam(order: usize) -> Result<Self> {
        let side = (order as f64).sqrt().round() as usize;
        if order < 4 || side * side != order || !side.is_power_of_two() {
            return Err(Error::Argument(format!("{order}-QAM is not a square power-of-two constellation")));
        }
        let scale = (3.0 / (2.0 * (order as f64 - 1.0))).sqrt();
        let levels: Vec<f64> = (0..side).map(|i| (2.0 * i as f64 - (side as f64 - 1.0)) * scale).collect();
        let mut points = Vec::with_capacity(order);
        for &im in &levels {
            for &re in &levels {
                points.push(C64::new(re, im));
            }
        }
        Ok(Self { points, order, levels })
    }

    pub fn qam256() -> Self {
        Self::square_qam(256).expect("256 is a valid order")
    }

    pub fn points(&self) -> &[C64] {
        &self.points
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn bits_per_symbol(&self) -> f64 {
        (self.order as f64).log2()
    }

    pub fn mean_energy(&self) -> f64 {
        self.points.iter().map(|p| p.norm_sqr()).sum::<f64>() / self.order as f64
    }

    pub fn mean(&self) -> C64 {
        self.points.iter().sum::<C64>() / self.order as f64
    }
}

/// Nodes and weights of the `n`-point Gauss-Hermite rule for weight `exp(-t^2)`.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    const PIM4: f64 = 0.751_125_544_464_942_5; // pi^(-1/4)
    let mut x = alloc::vec![0.0; n];
    let mut w = alloc::vec![0.0; n];
    let nf = n as f64;
    let mut z = 0.0f64;
    for i in 0..n.div_ceil(2) {
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.855_75 * (2.0 * nf + 1.0).powf(-0.166_67),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * x[0],
            3 => 1.91 * z - 0.91 * x[1],
            _ => 2.0 * z - x[i - 2],
        };
        let mut pp = 0.0;
        for _ in 0..100 {
            let (mut p1, mut p2) = (PIM4, 0.0);
            for j in 1..=n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = z * (2.0 / jf).sqrt() * p2 - ((jf - 1.0) / jf).sqrt() * p3;
            }
            pp = (2.0 * nf).sqrt() * p2;
            let step = p1 / pp;
            z -= step;
            if step.abs() <= 1e-15 * z.abs().max(1.0) {
                break;
            }
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = 2.0 / (pp * pp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// `ln sum exp(e_j)`, stable.
fn log_sum_exp(e: &[f64]) -> f64 {
    let m = e.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    m + e.iter().map(|v| (v - m).exp()).sum::<f64>().ln()
}

/// (MI in bits, MMSE) of a real PAM with noise variance 1/2.
fn pam_info(levels: &[f64], snr: f64, nodes: &[f64], weights: &[f64]) -> (f64, f64) {
    let l = levels.len();
    let a = snr.sqrt();
    let mut expo = alloc::vec![0.0; l];
    let (mut h, mut err) = (0.0, 0.0);
    for &ai in levels {
        for (&t, &wt) in nodes.iter().zip(weights) {
            for (e, &aj) in expo.iter_mut().zip(levels) {
                let d = a * (ai - aj);
                *e = -(d * d + 2.0 * t * d);
            }
            let lse = log_sum_exp(&expo);
            h += wt * lse;
            // a_i - E[a | y], accumulated as a sum of differences to avoid cancellation
            let diff: f64 = expo.iter().zip(levels).map(|(e, &aj)| (e - lse).exp() * (ai - aj)).sum();
            err += wt * diff * diff;
        }
    }
    let norm = 1.0 / (l as f64 * core::f64::consts::PI.sqrt());
    ((l as f64).log2() - h * norm / core::f64::consts::LN_2, err * norm)
}

/// (MI in bits, MMSE) of an arbitrary unit-energy constellation by the 2-D
/// product Gauss-Hermite rule.
pub fn info_2d(points: &[C64], snr: f64, num_nodes: usize) -> (f64, f64) {
    let (nodes, weights) = gauss_hermite(num_nodes);
    let m = points.len();
    let a = snr.sqrt();
    let mut expo = alloc::vec![0.0; m];
    let (mut h, mut err) = (0.0, 0.0);
    for &si in points {
        for (&tr, &wr) in nodes.iter().zip(&weights) {
            for (&ti, &wi) in nodes.iter().zip(&weights) {
                let n = C64::new(tr, ti);
                for (e, &sj) in expo.iter_mut().zip(points) {
                    let d = (si - sj) * a;
                    *e = -(d.norm_sqr() + 2.0 * (n.conj() * d).re);
                }
                let lse = log_sum_exp(&expo);
                let wt = wr * wi;
                h += wt * lse;
                let diff: C64 = expo.iter().zip(points).map(|(e, &sj)| (si - sj) * (e - lse).exp()).sum();
                err += wt * diff.norm_sqr();
            }
        }
    }
    let norm = 1.0 / (m as f64 * core::f64::consts::PI);
    ((m as f64).log2() - h * norm / core::f64::consts::LN_2, err * norm)
}

/// Exact-quadrature mutual information in bits.
pub fn mutual_information(c: &Constellation, snr: f64) -> f64 {
    qam_info(c, snr, DEFAULT_QUADRATURE_NODES).0
}

/// Exact-quadrature MMSE.
pub fn mmse(c: &Constellation, snr: f64) -> f64 {
    qam_info(c, snr, DEFAULT_QUADRATURE_NODES).1
}

fn qam_info(c: &Constellation, snr: f64, num_nodes: usize) -> (f64, f64) {
    if snr <= 0.0 {
        return (0.0, 1.0);
    }
    let (nodes, weights) = gauss_hermite(num_nodes);
    let (mi, e) = pam_info(&c.levels, snr, &nodes, &weights);
    ((2.0 * mi).max(0.0), (2.0 * e).clamp(0.0, 1.0))
}

pub fn gaussian_mi(snr: f64) -> f64 {
    snr.max(0.0).ln_1p() / core::f64::consts::LN_2
}

pub fn gaussian_mmse(snr: f64) -> f64 {
    1.0 / (1.0 + snr.max(0.0))
}

/// Piecewise cubic Hermite interpolant on a uniform grid, Fritsch-Carlson
/// slopes (monotone data stays monotone).
#[derive(Debug, Clone, PartialEq)]
struct Pchip {
    x0: f64,
    h: f64,
    y: Vec<f64>,
    d: Vec<f64>,
}

impl Pchip {
    fn new(x0: f64, h: f64, y: Vec<f64>) -> Self {
        let n = y.len();
        let delta: Vec<f64> = y.windows(2).map(|w| (w[1] - w[0]) / h).collect();
        let mut d = alloc::vec![0.0; n];
        if n == 2 {
            d[0] = delta[0];
            d[1] = delta[0];
        } else if n > 2 {
            for i in 1..n - 1 {
                let (a, b) = (delta[i - 1], delta[i]);
                d[i] = if a * b <= 0.0 { 0.0 } else { 2.0 / (1.0 / a + 1.0 / b) };
            }
            d[0] = end_slope(delta[0], delta[1]);
            d[n - 1] = end_slope(delta[n - 2], delta[n - 3]);
        }
        Self { x0, h, y, d }
    }

    fn eval(&self, x: f64) -> f64 {
        let n = self.y.len();
        let s = ((x - self.x0) / self.h).clamp(0.0, (n - 1) as f64);
        let i = (s.floor() as usize).min(n - 2);
        let t = s - i as f64;
        let (t2, t3) = (t * t, t * t * t);
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * self.y[i] + h10 * self.h * self.d[i] + h01 * self.y[i + 1] + h11 * self.h * self.d[i + 1]
    }
}

/// `int mmse(u) du` for `u` from `a` to `b` dB, by 5-point Gauss-Legendre in
/// the dB variable.
fn segment_integral(ln_mmse: &Pchip, a: f64, b: f64) -> f64 {
    const X: [f64; 5] = [0.0, -0.538_469_310_105_683_1, 0.538_469_310_105_683_1, -0.906_179_845_938_664, 0.906_179_845_938_664];
    const W: [f64; 5] = [
        0.568_888_888_888_888_9,
        0.478_628_670_499_366_47,
        0.478_628_670_499_366_47,
        0.236_926_885_056_189_08,
        0.236_926_885_056_189_08,
    ];
    let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
    let k = core::f64::consts::LN_10 / 10.0;
    X.iter()
        .zip(W)
        .map(|(&t, w)| {
            let x = mid + half * t;
            w * (ln_mmse.eval(x) + k * x).exp()
        })
        .sum::<f64>()
        * half
        * k
}

// three-point end slope, limited to keep monotonicity
fn end_slope(d0: f64, d1: f64) -> f64 {
    let s = (3.0 * d0 - d1) / 2.0;
    if s * d0 <= 0.0 {
        0.0
    } else if d0 * d1 <= 0.0 && s.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        s
    }
}

/// Information functions of a signaling alphabet, as seen by the power
/// allocators and the SE evaluation.
pub trait Alphabet: Sync {
    fn mi_bits(&self, snr: f64) -> f64;
    fn mmse(&self, snr: f64) -> f64;
    /// Smallest SNR with `mmse(snr) <= target`; the saturation SNR when the
    /// target is below the MMSE floor.
    fn mmse_inverse(&self, target: f64) -> f64;
    /// SNR beyond which extra power buys nothing (infinite for Gaussian input).
    fn saturation_snr(&self) -> f64;
    /// Upper bound of `mi_bits`, if any.
    fn max_bits(&self) -> Option<f64>;
}

/// Gaussian input: `log2(1 + snr)` and `1 / (1 + snr)`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct GaussianInput;

impl Alphabet for GaussianInput {
    fn mi_bits(&self, snr: f64) -> f64 {
        gaussian_mi(snr)
    }

    fn mmse(&self, snr: f64) -> f64 {
        gaussian_mmse(snr)
    }

    fn mmse_inverse(&self, target: f64) -> f64 {
        if target >= 1.0 {
            0.0
        } else if target <= 0.0 {
            f64::INFINITY
        } else {
            1.0 / target - 1.0
        }
    }

    fn saturation_snr(&self) -> f64 {
        f64::INFINITY
    }

    fn max_bits(&self) -> Option<f64> {
        None
    }
}

/// Tabulated MI and MMSE of a QAM alphabet on a uniform dB grid.
#[derive(Debug, Clone, PartialEq)]
pub struct InfoTable {
    order: usize,
    quadrature_nodes: usize,
    snr_db: Vec<f64>,
    mi_bits: Vec<f64>,
    mmse: Vec<f64>,
    ln_mmse_interp: Pchip,
    /// `int_0^{s_i} mmse(u) du` (nats) at every grid point, from the
    /// interpolant itself.
    cum_nats: Vec<f64>,
    /// Maps the integrated MMSE onto `log2(order)` at saturation.
    mi_scale: f64,
    /// Grid index where the MMSE first reaches the floor.
    saturation_index: usize,
}

impl InfoTable {
    /// Computes the table on the default grid (-30..60 dB, 0.1 dB).
    pub fn build(c: &Constellation, quadrature_nodes: usize) -> Self {
        let n = ((TABLE_STOP_DB - TABLE_START_DB) / TABLE_STEP_DB).round() as usize + 1;
        let snr_db: Vec<f64> = (0..n).map(|i| TABLE_START_DB + TABLE_STEP_DB * i as f64).collect();
        let (nodes, weights) = gauss_hermite(quadrature_nodes);
        let (mut mi, mut mm) = (Vec::with_capacity(n), Vec::with_capacity(n));
        for &db in &snr_db {
            let (a, b) = pam_info(&c.levels, 10f64.powf(db / 10.0), &nodes, &weights);
            mi.push(2.0 * a);
            mm.push(2.0 * b);
        }
        Self::from_samples(c.order(), quadrature_nodes, snr_db, mi, mm).expect("grid is uniform")
    }

    /// Builds a table from precomputed samples (e.g. a cache file). The grid
    /// must be uniform and increasing; samples are made monotone and clamped.
    pub fn from_samples(
        order: usize,
        quadrature_nodes: usize,
        snr_db: Vec<f64>,
        mut mi_bits: Vec<f64>,
        mut mmse: Vec<f64>,
    ) -> Result<Self> {
        let n = snr_db.len();
        if n < 3 || mi_bits.len() != n || mmse.len() != n {
            return Err(Error::Argument(format!("table needs >= 3 aligned samples, got {n}")));
        }
        let step = snr_db[1] - snr_db[0];
        if !(step > 0.0) || snr_db.windows(2).any(|w| ((w[1] - w[0]) - step).abs() > 1e-9 * step.max(1.0)) {
            return Err(Error::Argument("table grid must be uniform and increasing".into()));
        }
        if mi_bits.iter().chain(&mmse).any(|v| !v.is_finite()) {
            return Err(Error::Argument("table contains non-finite samples".into()));
        }
        let cap = (order as f64).log2();
        let mut run = 0.0f64;
        for v in mi_bits.iter_mut() {
            run = run.max(*v).min(cap);
            *v = run;
        }
        let mut run = 1.0f64;
        for v in mmse.iter_mut() {
            run = run.min(*v).max(MMSE_FLOOR);
            *v = run;
        }
        let saturation_index = mmse.iter().position(|&v| v <= MMSE_FLOOR).unwrap_or(n - 1);
        let ln: Vec<f64> = mmse.iter().map(|v| v.ln()).collect();
        let ln_mmse_interp = Pchip::new(snr_db[0], step, ln);
        let mut cum_nats = Vec::with_capacity(n);
        cum_nats.push(mi_bits[0] * core::f64::consts::LN_2);
        for i in 1..n {
            let prev = cum_nats[i - 1];
            cum_nats.push(if i <= saturation_index { prev + segment_integral(&ln_mmse_interp, snr_db[i - 1], snr_db[i]) } else { prev });
        }
        let saturated = mmse[saturation_index] <= MMSE_FLOOR;
        let mi_scale = if saturated { cap * core::f64::consts::LN_2 / cum_nats[saturation_index] } else { 1.0 };
        Ok(Self { order, quadrature_nodes, ln_mmse_interp, cum_nats, mi_scale, snr_db, mi_bits, mmse, saturation_index })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn quadrature_nodes(&self) -> usize {
        self.quadrature_nodes
    }

    pub fn snr_db(&self) -> &[f64] {
        &self.snr_db
    }

    pub fn mi_table(&self) -> &[f64] {
        &self.mi_bits
    }

    pub fn mmse_table(&self) -> &[f64] {
        &self.mmse
    }

    fn snr_min(&self) -> f64 {
        10f64.powf(self.snr_db[0] / 10.0)
    }
}

impl Alphabet for InfoTable {
    /// Integral of [`InfoTable::mmse`], so the pair obeys I-MMSE exactly and
    /// mercury/water-filling is optimal for this very MI curve.
    fn mi_bits(&self, snr: f64) -> f64 {
        if snr <= 0.0 {
            return 0.0;
        }
        let s0 = self.snr_min();
        let nats = if snr < s0 {
            // integral of the linear mmse below the grid, pinned to the first sample
            let q = |s: f64| s - 0.5 * (1.0 - self.mmse[0]) * s * s / s0;
            self.cum_nats[0] * q(snr) / q(s0)
        } else if snr >= self.saturation_snr() {
            self.cum_nats[self.saturation_index]
        } else {
            let x = 10.0 * snr.log10();
            let step = self.snr_db[1] - self.snr_db[0];
            let i = (((x - self.snr_db[0]) / step).floor() as usize).min(self.snr_db.len() - 2);
            self.cum_nats[i] + segment_integral(&self.ln_mmse_interp, self.snr_db[i], x)
        };
        self.mi_scale * nats / core::f64::consts::LN_2
    }

    fn mmse(&self, snr: f64) -> f64 {
        if snr <= 0.0 {
            return 1.0;
        }
        let s0 = self.snr_min();
        if snr < s0 {
            return 1.0 - (1.0 - self.mmse[0]) * snr / s0;
        }
        if snr >= self.saturation_snr() && self.mmse[self.saturation_index] <= MMSE_FLOOR {
            return 0.0;
        }
        self.ln_mmse_interp.eval(10.0 * snr.log10()).exp()
    }

    fn mmse_inverse(&self, target: f64) -> f64 {
        if target >= 1.0 {
            return 0.0;
        }
        let s0 = self.snr_min();
        if target >= self.mmse[0] {
            return s0 * (1.0 - target) / (1.0 - self.mmse[0]);
        }
        let sat = self.saturation_index;
        if target <= self.mmse[sat] {
            return self.saturation_snr();
        }
        // mmse[i] > target >= mmse[i + 1] for some i < sat
        let lt = target.ln();
        let (mut lo, mut hi) = (0usize, sat);
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if self.mmse[mid] > target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let (mut a, mut b) = (self.snr_db[lo], self.snr_db[hi]);
        while b - a > 1e-11 {
            let mid = 0.5 * (a + b);
            if self.ln_mmse_interp.eval(mid) > lt {
                a = mid;
            } else {
                b = mid;
            }
        }
        10f64.powf(b / 10.0)
    }

    fn saturation_snr(&self) -> f64 {
        10f64.powf(self.snr_db[self.saturation_index] / 10.0)
    }

    fn max_bits(&self) -> Option<f64> {
        Some((self.order as f64).log2())
    }
}

/// Signaling alphabet selected for a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Modulation {
    Qam256,
    Gaussian,
}

impl Modulation {
    pub fn name(self) -> &'static str {
        match self {
            Modulation::Qam256 => "qam256",
            Modulation::Gaussian => "gaussian",
        }
    }
}

impl fmt::Display for Modulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Modulation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "qam256" => Ok(Modulation::Qam256),
            "gaussian" => Ok(Modulation::Gaussian),
            _ => Err(Error::Config(format!("unknown modulation '{s}' (expected qam256 or gaussian)"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use std::sync::OnceLock;

    fn table() -> &'static InfoTable {
        static T: OnceLock<InfoTable> = OnceLock::new();
        T.get_or_init(|| InfoTable::build(&Constellation::qam256(), DEFAULT_QUADRATURE_NODES))
    }

    fn db(x: f64) -> f64 {
        10f64.powf(x / 10.0)
    }

    #[test]
    fn constellation_is_unit_energy_zero_mean() {
        for order in [4, 16, 64, 256] {
            let c = Constellation::square_qam(order).unwrap();
            assert_eq!(c.points().len(), order);
            assert!((c.mean_energy() - 1.0).abs() < 1e-12);
            assert!(c.mean().norm() < 1e-12);
        }
        assert!(Constellation::square_qam(8).is_err());
        assert!(Constellation::square_qam(36).is_err());
    }

    #[test]
    fn hermite_rule_integrates_moments() {
        let (x, w) = gauss_hermite(32);
        let sp = core::f64::consts::PI.sqrt();
        let m0: f64 = w.iter().sum();
        let m2: f64 = x.iter().zip(&w).map(|(x, w)| w * x * x).sum();
        let m4: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(4)).sum();
        assert!((m0 - sp).abs() < 1e-13);
        assert!((m2 - sp / 2.0).abs() < 1e-13);
        assert!((m4 - 0.75 * sp).abs() < 1e-12);
        assert!(x.windows(2).all(|p| p[0] > p[1]));
    }

    #[test]
    fn endpoints() {
        let c = Constellation::qam256();
        assert_eq!(mutual_information(&c, 0.0), 0.0);
        assert_eq!(mmse(&c, 0.0), 1.0);
        assert!((mutual_information(&c, db(60.0)) - 8.0).abs() < 1e-9);
        assert!(mmse(&c, db(60.0)) < 1e-15);
        assert!((gaussian_mi(1.0) - 1.0).abs() < 1e-15);
        assert!((gaussian_mi(3.0) - 2.0).abs() < 1e-15);
        assert_eq!(gaussian_mi(0.0), 0.0);
        assert_eq!(gaussian_mmse(0.0), 1.0);
    }

    #[test]
    fn separable_matches_two_dimensional_rule() {
        let c = Constellation::square_qam(16).unwrap();
        for snr_db in [-10.0, 0.0, 7.0, 15.0, 25.0] {
            let (a, b) = qam_info(&c, db(snr_db), 32);
            let (a2, b2) = info_2d(c.points(), db(snr_db), 32);
            assert!((a - a2).abs() < 1e-10, "{snr_db}: {a} vs {a2}");
            assert!((b - b2).abs() < 1e-10, "{snr_db}: {b} vs {b2}");
        }
    }

    // Monte-Carlo estimate of I(s; y) over the complex constellation
    fn mc_mi(c: &Constellation, snr: f64, samples: usize, seed: u64) -> f64 {
        let mut r = rng::stream(seed, &[]);
        let pts = c.points();
        let a = snr.sqrt();
        let mut expo = alloc::vec![0.0; pts.len()];
        let mut acc = 0.0;
        for s in 0..samples {
            let si = pts[s % pts.len()];
            let n = rng::complex_normal(&mut r);
            for (e, &sj) in expo.iter_mut().zip(pts) {
                let d = (si - sj) * a;
                *e = -(d.norm_sqr() + 2.0 * (n.conj() * d).re);
            }
            acc += log_sum_exp(&expo);
        }
        c.bits_per_symbol() - acc / samples as f64 / core::f64::consts::LN_2
    }

    #[test]
    fn quadrature_agrees_with_monte_carlo() {
        let c = Constellation::qam256();
        for (i, snr_db) in [0.0, 10.0, 20.0, 30.0].into_iter().enumerate() {
            let q = mutual_information(&c, db(snr_db));
            let mc = mc_mi(&c, db(snr_db), 1_000_000, 100 + i as u64);
            assert!((q - mc).abs() < 0.01, "{snr_db} dB: quadrature {q} vs mc {mc}");
        }
    }

    #[test]
    fn table_is_monotone_and_bounded() {
        let t = table();
        assert_eq!(t.snr_db().len(), 901);
        assert!(t.mi_table().windows(2).all(|w| w[1] >= w[0]));
        assert!(t.mmse_table().windows(2).all(|w| w[1] <= w[0]));
        assert!(t.mi_table().iter().all(|&v| (0.0..=8.0).contains(&v)));
        assert!(t.mmse_table().iter().all(|&v| (0.0..=1.0).contains(&v)));
        assert!(t.mi_bits(db(60.0)) >= 7.99);
    }

    #[test]
    fn gaussian_dominates_qam() {
        let t = table();
        for i in 0..=900 {
            let snr = db(-30.0 + 0.1 * i as f64);
            assert!(gaussian_mi(snr) >= t.mi_bits(snr) - 1e-12);
        }
    }

    #[test]
    fn i_mmse_relation_on_table() {
        let t = table();
        let (g, mi, mm) = (t.snr_db(), t.mi_table(), t.mmse_table());
        let mut worst = 0.0f64;
        for i in 1..g.len() - 1 {
            let dmi = (mi[i + 1] - mi[i - 1]) * core::f64::consts::LN_2;
            let ds = db(g[i + 1]) - db(g[i - 1]);
            worst = worst.max((dmi / ds - mm[i]).abs());
        }
        assert!(worst < 1e-3, "{worst}");
    }

    #[test]
    fn interpolation_matches_quadrature_off_grid() {
        let t = table();
        let c = Constellation::qam256();
        for snr_db in [-25.03, -3.37, 4.44, 12.05, 18.71, 27.77, 33.33] {
            let s = db(snr_db);
            assert!((t.mi_bits(s) - mutual_information(&c, s)).abs() < 1e-3);
            let exact = mmse(&c, s);
            assert!((t.mmse(s) - exact).abs() < 1e-3 * exact.max(1e-3), "{snr_db}");
        }
        // below the grid
        assert!(t.mi_bits(1e-5) > 0.0 && t.mi_bits(1e-5) < t.mi_bits(1e-3));
        assert!(t.mmse(1e-5) < 1.0 && t.mmse(1e-5) > t.mmse(1e-3));
    }

    #[test]
    fn mmse_inverse_round_trips() {
        let t = table();
        for snr_db in [-29.0, -12.3, 0.0, 9.9, 21.4, 30.2] {
            let s = db(snr_db);
            let back = t.mmse_inverse(t.mmse(s));
            assert!((back / s - 1.0).abs() < 1e-9, "{snr_db}: {back} vs {s}");
        }
        assert_eq!(t.mmse_inverse(1.0), 0.0);
        assert_eq!(t.mmse_inverse(0.0), t.saturation_snr());
        let sat_db = 10.0 * t.saturation_snr().log10();
        assert!((30.0..45.0).contains(&sat_db), "{sat_db}");
        let g = GaussianInput;
        assert!((g.mmse_inverse(g.mmse(7.5)) - 7.5).abs() < 1e-12);
    }

    #[test]
    fn cached_samples_rebuild_identically() {
        let t = table();
        let u = InfoTable::from_samples(256, DEFAULT_QUADRATURE_NODES, t.snr_db().to_vec(), t.mi_table().to_vec(), t.mmse_table().to_vec()).unwrap();
        assert_eq!(&u, t);
        assert!(InfoTable::from_samples(256, 32, alloc::vec![0.0, 1.0, 3.0], alloc::vec![0.0; 3], alloc::vec![1.0; 3]).is_err());
    }

    #[test]
    fn modulation_names_round_trip() {
        for m in [Modulation::Qam256, Modulation::Gaussian] {
            assert_eq!(m.name().parse::<Modulation>().unwrap(), m);
        }
        assert!("qpsk".parse::<Modulation>().is_err());
    }
}
