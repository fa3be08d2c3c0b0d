//! Power allocation over parallel channels under one sum-power budget.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // inherent once std is in the graph
use num_traits::Float;

use crate::error::{Error, Result};
use crate::modulation::{Alphabet, GaussianInput};

/// Channels below this gain are left unpowered.
pub const GAIN_FLOOR: f64 = 1e-20;
const MAX_ITERATIONS: usize = 200;

/// `gains[j]` is the received SNR per unit transmit power on channel j.
#[derive(Debug, Clone, PartialEq)]
pub struct ParallelChannels {
    pub gains: Vec<f64>,
    pub budget: f64,
}

impl ParallelChannels {
    pub fn new(gains: Vec<f64>, budget: f64) -> Result<Self> {
        if !(budget > 0.0) || !budget.is_finite() {
            return Err(Error::Argument(alloc::format!("power budget must be positive, got {budget}")));
        }
        if gains.iter().any(|g| !g.is_finite() || *g < 0.0) {
            return Err(Error::Argument("channel gains must be finite and non-negative".into()));
        }
        Ok(Self { gains, budget })
    }

    fn usable(&self) -> Result<Vec<usize>> {
        let idx: Vec<usize> = (0..self.gains.len()).filter(|&j| self.gains[j] >= GAIN_FLOOR).collect();
        if idx.is_empty() {
            Err(Error::NoUsableChannel)
        } else {
            Ok(idx)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerAllocation {
    pub powers: Vec<f64>,
    /// Water level mu: `g_j mmse(g_j q_j) = 1 / mu` on unsaturated active channels.
    pub water_level: f64,
    pub active_set: Vec<usize>,
    /// `max_j |g_j mmse(g_j q_j) mu - 1|` over active, unsaturated channels.
    pub kkt_residual: f64,
}

impl PowerAllocation {
    pub fn total(&self) -> f64 {
        self.powers.iter().sum()
    }
}

/// Classic water-filling, `q_j = max(0, mu - 1/g_j)`.
pub fn waterfill(ch: &ParallelChannels) -> Result<PowerAllocation> {
    let usable = ch.usable()?;
    let p = ch.budget;
    let used = |mu: f64| usable.iter().map(|&j| (mu - 1.0 / ch.gains[j]).max(0.0)).sum::<f64>();
    let (mut lo, mut hi) = (0.0, p + usable.iter().map(|&j| 1.0 / ch.gains[j]).fold(0.0, f64::max));
    let mut iterations = 0;
    while hi - lo > 1e-12 * p && iterations < MAX_ITERATIONS {
        let mid = 0.5 * (lo + hi);
        if used(mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }
    // close the budget exactly on the identified active set
    let active: Vec<usize> = usable.iter().copied().filter(|&j| 1.0 / ch.gains[j] < hi).collect();
    let mu = (p + active.iter().map(|&j| 1.0 / ch.gains[j]).sum::<f64>()) / active.len() as f64;
    let mut powers = vec![0.0; ch.gains.len()];
    for &j in &active {
        powers[j] = (mu - 1.0 / ch.gains[j]).max(0.0);
    }
    let kkt_residual = active
        .iter()
        .filter(|&&j| powers[j] > 0.0)
        .map(|&j| (ch.gains[j] * GaussianInput.mmse(ch.gains[j] * powers[j]) * mu - 1.0).abs())
        .fold(0.0, f64::max);
    Ok(PowerAllocation { powers, water_level: mu, active_set: active, kkt_residual })
}

/// Mercury/water-filling: maximizes `sum_j I(g_j q_j)` for the given alphabet.
///
/// Channels saturate at the alphabet's saturation SNR. If the budget exceeds
/// what saturates every usable channel, the remainder is spread evenly over
/// them so the budget is still spent exactly.
pub fn mercury_waterfill<A: Alphabet + ?Sized>(ch: &ParallelChannels, alphabet: &A) -> Result<PowerAllocation> {
    let usable = ch.usable()?;
    let p = ch.budget;
    // normalized problem: gains g P, budget 1
    let g: Vec<f64> = usable.iter().map(|&j| ch.gains[j] * p).collect();
    let sat = alphabet.saturation_snr();
    let alloc_at = |mu: f64, out: &mut [f64]| -> f64 {
        let mut s = 0.0;
        for (q, &gj) in out.iter_mut().zip(&g) {
            *q = if mu * gj <= 1.0 { 0.0 } else { alphabet.mmse_inverse(1.0 / (mu * gj)).min(sat) / gj };
            s += *q;
        }
        s
    };
    let mut q = vec![0.0; g.len()];
    // capping every channel at saturation may still leave budget unspent
    let saturated_all = g.iter().map(|&gj| sat / gj).sum::<f64>() < 1.0;
    let g_max = g.iter().copied().fold(0.0, f64::max);
    let mut lo = 1.0 / g_max;
    let mut hi = 2.0 * lo;
    let mut iterations = 0;
    while !saturated_all && alloc_at(hi, &mut q) < 1.0 {
        lo = hi;
        hi *= 2.0;
        iterations += 1;
        if iterations > MAX_ITERATIONS {
            return Err(Error::NoConvergence { iterations, residual: 1.0 - alloc_at(hi, &mut q), last: hi });
        }
    }
    let mu;
    if saturated_all {
        mu = hi;
        let caps: Vec<f64> = g.iter().map(|&gj| sat / gj).collect();
        let spare = (1.0 - caps.iter().sum::<f64>()) / g.len() as f64;
        for (qj, c) in q.iter_mut().zip(&caps) {
            *qj = c + spare;
        }
    } else {
        let mut it = 0;
        while hi / lo - 1.0 > 1e-14 {
            let mid = 0.5 * (lo + hi);
            if alloc_at(mid, &mut q) < 1.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            it += 1;
            if it > MAX_ITERATIONS {
                let s = alloc_at(hi, &mut q);
                return Err(Error::NoConvergence { iterations: it, residual: (s - 1.0).abs(), last: hi });
            }
        }
        mu = hi;
        let s = alloc_at(mu, &mut q);
        if s > 0.0 {
            q.iter_mut().for_each(|v| *v /= s);
        }
    }
    let mut powers = vec![0.0; ch.gains.len()];
    let mut active = Vec::new();
    let mut kkt_residual = 0.0f64;
    for (i, &j) in usable.iter().enumerate() {
        powers[j] = q[i] * p;
        if q[i] > 0.0 {
            active.push(j);
            let snr = g[i] * q[i];
            if !saturated_all && snr < sat * (1.0 - 1e-9) {
                kkt_residual = kkt_residual.max((g[i] * alphabet.mmse(snr) * mu - 1.0).abs());
            }
        }
    }
    Ok(PowerAllocation { powers, water_level: mu / p, active_set: active, kkt_residual })
}

/// Sum of `I(g_j q_j)` in bits.
pub fn sum_mi<A: Alphabet + ?Sized>(gains: &[f64], powers: &[f64], alphabet: &A) -> f64 {
    gains.iter().zip(powers).map(|(g, q)| alphabet.mi_bits(g * q)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modulation::{Constellation, InfoTable, DEFAULT_QUADRATURE_NODES};
    use rand::Rng;
    use std::sync::OnceLock;

    fn table() -> &'static InfoTable {
        static T: OnceLock<InfoTable> = OnceLock::new();
        T.get_or_init(|| InfoTable::build(&Constellation::qam256(), DEFAULT_QUADRATURE_NODES))
    }

    fn ch(g: &[f64], p: f64) -> ParallelChannels {
        ParallelChannels::new(g.to_vec(), p).unwrap()
    }

    #[test]
    fn waterfill_hand_cases() {
        let a = waterfill(&ch(&[1.0, 1.0], 2.0)).unwrap();
        assert!((a.powers[0] - 1.0).abs() < 1e-12 && (a.powers[1] - 1.0).abs() < 1e-12);
        let b = waterfill(&ch(&[1.0, 0.1], 1.0)).unwrap();
        assert!((b.powers[0] - 1.0).abs() < 1e-12 && b.powers[1] == 0.0);
        assert!((b.water_level - 2.0).abs() < 1e-12);
        let c = waterfill(&ch(&[3.0], 5.0)).unwrap();
        assert_eq!(c.powers, alloc::vec![5.0]);
        assert_eq!(waterfill(&ch(&[0.0, 0.0], 1.0)), Err(Error::NoUsableChannel));
    }

    #[test]
    fn waterfill_beats_grid_search() {
        let (g, p) = ([1.0, 0.1], 1.0);
        let a = waterfill(&ch(&g, p)).unwrap();
        let opt = sum_mi(&g, &a.powers, &GaussianInput);
        let mut best = f64::NEG_INFINITY;
        for i in 0..=10_000 {
            let q0 = p * i as f64 / 10_000.0;
            best = best.max(sum_mi(&g, &[q0, p - q0], &GaussianInput));
        }
        assert!(opt >= best - 1e-12);
    }

    #[test]
    fn mercury_symmetry_and_single_channel() {
        let t = table();
        let a = mercury_waterfill(&ch(&[2.0, 2.0, 2.0], 3.0), t).unwrap();
        for q in &a.powers {
            assert!((q - 1.0).abs() < 1e-9);
        }
        let b = mercury_waterfill(&ch(&[0.7], 4.0), t).unwrap();
        assert!((b.powers[0] - 4.0).abs() < 1e-12);
        assert_eq!(mercury_waterfill(&ch(&[1e-25], 1.0), t), Err(Error::NoUsableChannel));
    }

    #[test]
    fn mercury_matches_simplex_grid() {
        let t = table();
        let (g, p) = ([1.0, 0.25], 4.0);
        let a = mercury_waterfill(&ch(&g, p), t).unwrap();
        let opt = sum_mi(&g, &a.powers, t);
        // 400 x 400 grid over the (two-channel) simplex
        let mut best = f64::NEG_INFINITY;
        for i in 0..=400 {
            for j in 0..=400 - i {
                let q = [p * i as f64 / 400.0, p * j as f64 / 400.0];
                best = best.max(sum_mi(&g, &q, t));
            }
        }
        assert!((opt - best).abs() < 1e-3 || opt > best, "{opt} vs {best}");
    }

    #[test]
    fn mercury_with_gaussian_reduces_to_waterfill() {
        let mut r = crate::rng::stream(5, &[]);
        for _ in 0..200 {
            let n = r.random_range(1..=16);
            let g: Vec<f64> = (0..n).map(|_| 10f64.powf(r.random_range(-3.0..3.0))).collect();
            let p = 10f64.powf(r.random_range(-2.0..2.0));
            let a = waterfill(&ch(&g, p)).unwrap();
            let b = mercury_waterfill(&ch(&g, p), &GaussianInput).unwrap();
            for (x, y) in a.powers.iter().zip(&b.powers) {
                assert!((x - y).abs() <= 1e-8 * p, "{x} vs {y}");
            }
        }
    }

    #[test]
    fn budget_exact_and_nonnegative() {
        let t = table();
        let mut r = crate::rng::stream(6, &[]);
        for _ in 0..100 {
            let n = r.random_range(1..=64);
            let g: Vec<f64> = (0..n).map(|_| 10f64.powf(r.random_range(-4.0..6.0))).collect();
            let p = 10f64.powf(r.random_range(-3.0..3.0));
            for a in [waterfill(&ch(&g, p)).unwrap(), mercury_waterfill(&ch(&g, p), t).unwrap()] {
                assert!(a.powers.iter().all(|&q| q >= 0.0));
                assert!((a.total() - p).abs() <= 1e-9 * p);
                for j in 0..n {
                    if !a.active_set.contains(&j) {
                        assert_eq!(a.powers[j], 0.0);
                    }
                }
            }
        }
    }

    #[test]
    fn high_power_saturates_every_channel() {
        let t = table();
        let a = mercury_waterfill(&ch(&[1.0, 0.01, 3.0], 1e8), t).unwrap();
        for (g, q) in [1.0, 0.01, 3.0].iter().zip(&a.powers) {
            assert!(t.mi_bits(g * q) > 8.0 - 1e-9);
        }
        assert!((a.total() - 1e8).abs() < 1e-9 * 1e8);
    }

    #[test]
    fn kkt_residual_small() {
        let t = table();
        let a = mercury_waterfill(&ch(&[5.0, 0.3, 0.02, 40.0], 20.0), t).unwrap();
        assert!(a.kkt_residual < 1e-6, "{}", a.kkt_residual);
    }
}
