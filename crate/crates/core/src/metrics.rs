//! SINR evaluation, spectral efficiency, fairness and summary statistics.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // inherent once std is in the graph
use num_traits::Float;

use crate::channel::ChannelTensor;
use crate::error::{Error, Result};
use crate::modulation::Alphabet;
use crate::precoding::Precoder;

/// Sum SE of K = 24 UEs with 256-QAM saturated on every resource block.
pub const MAX_SUM_SE_256QAM: f64 = 161.28;

/// Conversion from summed per-subcarrier information (bits per channel use)
/// to bits/s/Hz: each simulated subcarrier stands for
/// `total_subcarriers / F` physical ones carrying `symbols_per_slot` symbols
/// per `slot_s` over `bandwidth_hz`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SeNormalization {
    pub total_subcarriers: usize,
    pub symbols_per_slot: usize,
    pub slot_s: f64,
    pub bandwidth_hz: f64,
}

impl Default for SeNormalization {
    fn default() -> Self {
        Self { total_subcarriers: 1200, symbols_per_slot: 14, slot_s: 1e-3, bandwidth_hz: 20e6 }
    }
}

impl SeNormalization {
    pub fn factor(&self, num_subcarriers: usize) -> f64 {
        (self.total_subcarriers as f64 / num_subcarriers as f64) * self.symbols_per_slot as f64
            / (self.slot_s * self.bandwidth_hz)
    }
}

/// `sinr[k][f]`, linear. UEs without a stream on a subcarrier get 0 there.
pub fn compute_sinr(h: &ChannelTensor, w: &Precoder, noise: f64) -> Result<Vec<Vec<f64>>> {
    if h.num_antennas() != w.num_antennas || h.num_subcarriers() != w.num_subcarriers() {
        return Err(Error::Argument("precoder does not match the channel".into()));
    }
    if !(noise > 0.0) {
        return Err(Error::Argument("noise variance must be positive".into()));
    }
    let k = h.num_ues();
    let mut out = vec![vec![0.0; h.num_subcarriers()]; k];
    for f in 0..h.num_subcarriers() {
        let streams = w.streams(f);
        for (s, st) in streams.iter().enumerate() {
            if st.ue >= k {
                return Err(Error::Argument("stream addresses a UE outside the channel".into()));
            }
            let row = h.row(f, st.ue);
            let signal = st.response(row).norm_sqr();
            let interference: f64 = streams
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != s)
                .map(|(_, o)| o.response(row).norm_sqr())
                .sum();
            out[st.ue][f] = signal / (noise + interference);
        }
    }
    Ok(out)
}

/// Per-UE SE `factor * sum_f I(sinr)` and their sum.
pub fn spectral_efficiency<A: Alphabet + ?Sized>(sinr: &[Vec<f64>], alphabet: &A, factor: f64) -> (Vec<f64>, f64) {
    let per_ue: Vec<f64> = sinr.iter().map(|row| factor * row.iter().map(|&s| alphabet.mi_bits(s)).sum::<f64>()).collect();
    let sum = per_ue.iter().sum();
    (per_ue, sum)
}

/// `(sum S)^2 / (K sum S^2)`.
pub fn jain_index(se: &[f64]) -> Result<f64> {
    if se.is_empty() || se.iter().any(|&s| !(s >= 0.0)) {
        return Err(Error::Argument("Jain's index needs non-negative values".into()));
    }
    let s: f64 = se.iter().sum();
    let s2: f64 = se.iter().map(|v| v * v).sum();
    if s2 == 0.0 {
        return Err(Error::Argument("Jain's index is undefined for an all-zero vector".into()));
    }
    Ok(s * s / (se.len() as f64 * s2))
}

/// Nearest-rank percentile of already sorted values: the element at rank
/// `ceil(p / 100 * n)` (1-based, at least 1).
pub fn percentile_sorted(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    let rank = ((p / 100.0) * n as f64).ceil().max(1.0) as usize;
    sorted[rank.min(n) - 1]
}

/// Metrics of one (drop, realization) of a sweep cell.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRecord {
    pub per_ue_se: Vec<f64>,
    pub sum_se: f64,
    /// NaN when every UE has zero SE.
    pub jain: f64,
    pub se_p5: f64,
    pub se_p95: f64,
}

impl MetricsRecord {
    pub fn from_per_ue(per_ue_se: Vec<f64>) -> Self {
        let sum_se = per_ue_se.iter().sum();
        let jain = jain_index(&per_ue_se).unwrap_or(f64::NAN);
        let mut sorted = per_ue_se.clone();
        sorted.sort_by(f64::total_cmp);
        let (se_p5, se_p95) = if sorted.is_empty() {
            (f64::NAN, f64::NAN)
        } else {
            (percentile_sorted(&sorted, 5.0), percentile_sorted(&sorted, 95.0))
        };
        Self { per_ue_se, sum_se, jain, se_p5, se_p95 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stats {
    pub mean: f64,
    pub p5: f64,
    pub p95: f64,
}

/// Order-independent accumulator of a cell's records. Values are sorted
/// before summing, so merged partial results give bit-identical statistics.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Aggregate {
    sum_se: Vec<f64>,
    jain: Vec<f64>,
}

impl Aggregate {
    pub fn push(&mut self, r: &MetricsRecord) {
        self.sum_se.push(r.sum_se);
        self.jain.push(r.jain);
    }

    pub fn merge(&mut self, other: Aggregate) {
        self.sum_se.extend(other.sum_se);
        self.jain.extend(other.jain);
    }

    pub fn count(&self) -> usize {
        self.sum_se.len()
    }

    pub fn sum_se(&self) -> Option<Stats> {
        stats(&self.sum_se)
    }

    /// Statistics of Jain's index over records where it is defined.
    pub fn jain(&self) -> Option<Stats> {
        let v: Vec<f64> = self.jain.iter().copied().filter(|x| !x.is_nan()).collect();
        stats(&v)
    }
}

pub fn stats(values: &[f64]) -> Option<Stats> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    Some(Stats { mean, p5: percentile_sorted(&v, 5.0), p95: percentile_sorted(&v, 95.0) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::C64;
    use crate::modulation::{Constellation, GaussianInput, InfoTable, DEFAULT_QUADRATURE_NODES};
    use crate::precoding::{PowerConstraint, Scheme, Stream};
    use crate::rng;
    use rand::Rng;

    fn precoder(m: usize, streams: Vec<Vec<Stream>>) -> Precoder {
        Precoder {
            scheme: Scheme::Network,
            constraint: PowerConstraint::Total,
            num_antennas: m,
            site_ranges: alloc::vec![0..m],
            budgets: alloc::vec![1.0],
            subcarriers: streams,
            scale_factor: 1.0,
        }
    }

    #[test]
    fn sinr_hand_cases() {
        let mut h = ChannelTensor::zeros(2, 1, alloc::vec![2.1e9], alloc::vec![0..1]);
        *h.get_mut(0, 0, 0) = C64::new(2.0, 0.0);
        *h.get_mut(1, 0, 0) = C64::new(2.0, 0.0);
        let one = precoder(1, alloc::vec![alloc::vec![Stream { ue: 0, offset: 0, coeffs: alloc::vec![C64::new(1.0, 0.0)] }]]);
        let s = compute_sinr(&h, &one, 1.0).unwrap();
        assert_eq!(s[0][0], 4.0);
        assert_eq!(s[1][0], 0.0);
        let both = precoder(
            1,
            alloc::vec![alloc::vec![
                Stream { ue: 0, offset: 0, coeffs: alloc::vec![C64::new(1.0, 0.0)] },
                Stream { ue: 1, offset: 0, coeffs: alloc::vec![C64::new(0.0, 1.0)] },
            ]],
        );
        let s = compute_sinr(&h, &both, 1e-12).unwrap();
        assert!((s[0][0] - 1.0).abs() < 1e-9);
        let bad = precoder(2, alloc::vec![alloc::vec![]]);
        assert!(compute_sinr(&h, &bad, 1.0).is_err());
    }

    #[test]
    fn sinr_matches_symbol_level_simulation() {
        let mut r = rng::stream(21, &[]);
        let (k, m) = (3, 4);
        let mut h = ChannelTensor::zeros(k, m, alloc::vec![2.1e9], alloc::vec![0..m]);
        for kk in 0..k {
            for mm in 0..m {
                *h.get_mut(kk, mm, 0) = rng::complex_normal(&mut r);
            }
        }
        let streams: Vec<Stream> = (0..k)
            .map(|ue| Stream { ue, offset: 0, coeffs: (0..m).map(|_| rng::complex_normal(&mut r) * 0.5).collect() })
            .collect();
        let noise = 0.2;
        let w = precoder(m, alloc::vec![streams.clone()]);
        let sinr = compute_sinr(&h, &w, noise).unwrap();
        // transmit unit-energy QPSK symbols and estimate SINR from received samples
        let n = 100_000;
        for ue in 0..k {
            let gains: Vec<C64> = streams.iter().map(|s| s.response(h.row(0, ue))).collect();
            let (mut corr, mut samples) = (C64::new(0.0, 0.0), Vec::with_capacity(n));
            for _ in 0..n {
                let sym: Vec<C64> = (0..k)
                    .map(|_| C64::new(if r.random::<bool>() { 1.0 } else { -1.0 }, if r.random::<bool>() { 1.0 } else { -1.0 }) * core::f64::consts::FRAC_1_SQRT_2)
                    .collect();
                let y: C64 = gains.iter().zip(&sym).map(|(g, s)| g * s).sum::<C64>() + rng::complex_normal(&mut r) * noise.sqrt();
                corr += y * sym[ue].conj();
                samples.push((y, sym[ue]));
            }
            let a = corr / n as f64;
            let rest: f64 = samples.iter().map(|(y, s)| (y - a * s).norm_sqr()).sum::<f64>() / n as f64;
            let est = a.norm_sqr() / rest;
            assert!((est / sinr[ue][0] - 1.0).abs() < 0.02, "ue {ue}: {est} vs {}", sinr[ue][0]);
        }
    }

    #[test]
    fn se_normalization_anchors() {
        let t = InfoTable::build(&Constellation::qam256(), DEFAULT_QUADRATURE_NODES);
        let norm = SeNormalization::default();
        let factor = norm.factor(100);
        assert!((factor - 0.0084).abs() < 1e-15);
        let saturated = alloc::vec![alloc::vec![1e9; 100]; 24];
        let (per_ue, sum) = spectral_efficiency(&saturated, &t, factor);
        assert!((sum - MAX_SUM_SE_256QAM).abs() < 1e-9, "{sum}");
        assert!((per_ue[0] - 6.72).abs() < 1e-10);
        let zero = alloc::vec![alloc::vec![0.0; 100]; 24];
        assert_eq!(spectral_efficiency(&zero, &t, factor).1, 0.0);
        // fewer simulated subcarriers carry proportionally more weight
        assert!((norm.factor(10) * 10.0 - factor * 100.0).abs() < 1e-15);
        let (_, g) = spectral_efficiency(&[alloc::vec![1.0, 3.0]], &GaussianInput, 1.0);
        assert!((g - 3.0).abs() < 1e-12);
    }

    #[test]
    fn jain_cases() {
        assert!((jain_index(&[2.5; 24]).unwrap() - 1.0).abs() < 1e-15);
        let mut one = [0.0; 24];
        one[3] = 7.0;
        assert!((jain_index(&one).unwrap() - 1.0 / 24.0).abs() < 1e-15);
        assert!((jain_index(&[1.0, 1.0, 2.0]).unwrap() - 16.0 / 18.0).abs() < 1e-15);
        assert!(jain_index(&[0.0; 4]).is_err());
        let mut r = rng::stream(3, &[]);
        for _ in 0..200 {
            let v: Vec<f64> = (0..24).map(|_| r.random_range(0.0..5.0)).collect();
            let j = jain_index(&v).unwrap();
            assert!((1.0 / 24.0..=1.0 + 1e-15).contains(&j));
            let scaled: Vec<f64> = v.iter().map(|x| x * 3.7).collect();
            assert!((jain_index(&scaled).unwrap() - j).abs() < 1e-12);
        }
    }

    #[test]
    fn nearest_rank_percentiles() {
        let s = stats(&[4.2]).unwrap();
        assert_eq!((s.mean, s.p5, s.p95), (4.2, 4.2, 4.2));
        let s = stats(&[1.5; 100]).unwrap();
        assert_eq!((s.p5, s.p95), (1.5, 1.5));
        // 20 values: rank ceil(1) = 1 and ceil(19) = 19
        let v: Vec<f64> = (0..20).rev().map(|i| (i * i) as f64).collect();
        let s = stats(&v).unwrap();
        assert_eq!(s.p5, 0.0);
        assert_eq!(s.p95, 324.0);
        assert!((s.mean - 123.5).abs() < 1e-12);
    }

    #[test]
    fn aggregation_is_order_independent() {
        let recs: Vec<MetricsRecord> = (0..37).map(|i| MetricsRecord::from_per_ue(alloc::vec![0.1 * i as f64 + 0.3, 1.0 / (i + 1) as f64])).collect();
        let mut a = Aggregate::default();
        recs.iter().for_each(|r| a.push(r));
        let (mut b, mut c) = (Aggregate::default(), Aggregate::default());
        recs.iter().rev().take(20).for_each(|r| b.push(r));
        recs.iter().rev().skip(20).for_each(|r| c.push(r));
        c.merge(b);
        assert_eq!(a.sum_se(), c.sum_se());
        assert_eq!(a.jain(), c.jain());
        assert_eq!(a.count(), 37);
        let r = &recs[5];
        assert!((r.sum_se - r.per_ue_se.iter().sum::<f64>()).abs() < 1e-12);
    }
}
