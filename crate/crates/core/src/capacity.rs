//! Sum capacity of the Gaussian broadcast channel under a total power
//! constraint, computed on the dual multiple-access channel. Subcarriers are
//! independent blocks sharing one power budget.
//!
//! With single-antenna UEs every user covariance is a scalar `p_k^(f)`, so all
//! matrix work happens in the `K x K` Gram domain of each subcarrier.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // inherent once std is in the graph
use num_traits::Float;

use crate::channel::ChannelTensor;
use crate::error::{Error, Result};
use crate::linalg::{hermitian_logdet, CMat, Lu, C64, ONE, ZERO};
use crate::powalloc::{waterfill, ParallelChannels};

#[derive(Debug, Clone)]
pub struct DualMacProblem<'a> {
    pub h: &'a ChannelTensor,
    pub noise: f64,
    pub total_power: f64,
    /// Relative change of the objective below which iteration stops.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl<'a> DualMacProblem<'a> {
    pub fn new(h: &'a ChannelTensor, noise: f64, total_power: f64) -> Self {
        Self { h, noise, total_power, tolerance: 1e-8, max_iterations: 1000 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CapacityBound {
    /// `sum_f log2 det(I + sum_k p_k h_k h_k^H / noise)` at the final iterate.
    pub bits: f64,
    pub iterations: usize,
    /// Dual-MAC powers, indexed `[f][k]`.
    pub powers: Vec<Vec<f64>>,
    /// Linearization bound on the remaining suboptimality, in bits.
    pub gap_bits: f64,
}

struct Block {
    gram: CMat,
}

impl Block {
    fn objective_bits(&self, p: &[f64], noise: f64) -> Option<f64> {
        let k = p.len();
        let s: Vec<f64> = p.iter().map(|v| v.sqrt()).collect();
        let m = CMat::from_fn(k, k, |r, c| {
            let base = if r == c { ONE } else { ZERO };
            base + self.gram[(r, c)] * (s[r] * s[c] / noise)
        });
        hermitian_logdet(&m).map(|v| v / core::f64::consts::LN_2)
    }

    /// `b_k = h_k^H (noise I + sum_j p_j h_j h_j^H)^-1 h_k`, via the Gram
    /// identity `B = R (noise I + P R)^-1`.
    fn b(&self, p: &[f64], noise: f64) -> Option<Vec<f64>> {
        let k = p.len();
        let a = CMat::from_fn(k, k, |r, c| {
            let base = if r == c { C64::new(noise, 0.0) } else { ZERO };
            base + self.gram[(r, c)] * p[r]
        });
        let lu = Lu::new(a)?;
        let mut out = vec![0.0; k];
        let mut e = vec![ZERO; k];
        for col in 0..k {
            e.iter_mut().for_each(|v| *v = ZERO);
            e[col] = ONE;
            let x = lu.solve(&e);
            // B[col][col] = sum_j R[col][j] X[j][col]
            out[col] = (0..k).map(|j| self.gram[(col, j)] * x[j]).sum::<C64>().re.max(0.0);
        }
        Some(out)
    }
}

/// Sum-power iterative water-filling with averaging: each round water-fills
/// the whole budget over every (UE, subcarrier) pair against the others'
/// current powers, then moves `1/K` of the way to that allocation.
pub fn sum_capacity_bound(problem: &DualMacProblem<'_>) -> Result<CapacityBound> {
    let h = problem.h;
    let (k, nf) = (h.num_ues(), h.num_subcarriers());
    if !(problem.noise > 0.0) || !(problem.total_power > 0.0) || k == 0 || nf == 0 {
        return Err(Error::Argument("capacity bound needs positive noise, power and a non-empty channel".into()));
    }
    let blocks: Vec<Block> = (0..nf)
        .map(|f| {
            let g = h.subcarrier(f);
            Block { gram: g.matmul(&g.conj_transpose()) }
        })
        .collect();
    let noise = problem.noise;
    let numerical = |what: &str| Error::Argument(alloc::format!("dual-MAC {what} is not numerically positive definite"));
    let objective = |p: &[Vec<f64>]| -> Result<f64> {
        let mut s = 0.0;
        for (b, pf) in blocks.iter().zip(p) {
            s += b.objective_bits(pf, noise).ok_or_else(|| numerical("covariance"))?;
        }
        Ok(s)
    };

    let mut p = vec![vec![problem.total_power / (k * nf) as f64; k]; nf];
    let mut value = objective(&p)?;
    let keep = (k as f64 - 1.0) / k as f64;
    let mut iterations = 0;
    loop {
        iterations += 1;
        let mut gains = Vec::with_capacity(k * nf);
        for (b, pf) in blocks.iter().zip(&p) {
            let bv = b.b(pf, noise).ok_or_else(|| numerical("system"))?;
            for (bk, pk) in bv.iter().zip(pf) {
                // Sherman-Morrison: remove the user's own contribution
                let denom = 1.0 - pk * bk;
                gains.push(if denom > 0.0 { bk / denom } else { 0.0 });
            }
        }
        let wf = waterfill(&ParallelChannels::new(gains, problem.total_power)?)?;
        for f in 0..nf {
            for kk in 0..k {
                p[f][kk] = keep * p[f][kk] + (1.0 - keep) * wf.powers[f * k + kk];
            }
        }
        let next = objective(&p)?;
        let change = (next - value).abs();
        let converged = change <= problem.tolerance * next.abs().max(1e-300);
        // averaging of a concave ascent step never decreases the objective
        debug_assert!(next >= value - 1e-9 * value.abs().max(1.0), "objective decreased: {value} -> {next}");
        value = next;
        if converged {
            break;
        }
        if iterations >= problem.max_iterations {
            return Err(Error::NoConvergence { iterations, residual: change, last: value });
        }
    }

    // Frank-Wolfe certificate: C* <= C(p) + P max b - sum p b (nats -> bits)
    let mut max_b = 0.0f64;
    let mut inner = 0.0;
    for (b, pf) in blocks.iter().zip(&p) {
        let bv = b.b(pf, noise).ok_or_else(|| numerical("system"))?;
        for (bk, pk) in bv.iter().zip(pf) {
            max_b = max_b.max(*bk);
            inner += bk * pk;
        }
    }
    let gap_bits = ((problem.total_power * max_b - inner) / core::f64::consts::LN_2).max(0.0);
    Ok(CapacityBound { bits: value, iterations, powers: p, gap_bits })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::C64;
    use crate::rng;

    fn tensor(k: usize, m: usize, nf: usize, seed: u64) -> ChannelTensor {
        let mut r = rng::stream(seed, &[]);
        let mut t = ChannelTensor::zeros(k, m, vec![2.1e9; nf], vec![0..m]);
        for f in 0..nf {
            for kk in 0..k {
                for mm in 0..m {
                    *t.get_mut(kk, mm, f) = rng::complex_normal(&mut r);
                }
            }
        }
        t
    }

    #[test]
    fn scalar_channel() {
        let mut t = ChannelTensor::zeros(1, 1, vec![2.1e9], vec![0..1]);
        *t.get_mut(0, 0, 0) = C64::new(0.6, 0.8);
        let c = sum_capacity_bound(&DualMacProblem::new(&t, 0.5, 3.0)).unwrap();
        assert!((c.bits - (1.0 + 3.0 * 1.0 / 0.5f64).log2()).abs() < 1e-12);
    }

    #[test]
    fn identical_scalar_users() {
        let mut t = ChannelTensor::zeros(2, 1, vec![2.1e9], vec![0..1]);
        *t.get_mut(0, 0, 0) = C64::new(1.5, 0.0);
        *t.get_mut(1, 0, 0) = C64::new(0.0, 1.5);
        let c = sum_capacity_bound(&DualMacProblem::new(&t, 1.0, 2.0)).unwrap();
        assert!((c.bits - (1.0 + 2.0 * 2.25f64).log2()).abs() < 1e-7, "{}", c.bits);
    }

    #[test]
    fn two_user_grid_search() {
        for seed in 0..5 {
            let t = tensor(2, 2, 1, seed);
            let (noise, p) = (0.3, 2.0);
            let c = sum_capacity_bound(&DualMacProblem::new(&t, noise, p)).unwrap();
            let g = t.subcarrier(0);
            let block = Block { gram: g.matmul(&g.conj_transpose()) };
            let mut best = f64::NEG_INFINITY;
            let n = 100_000;
            for i in 0..=n {
                let p1 = p * i as f64 / n as f64;
                best = best.max(block.objective_bits(&[p1, p - p1], noise).unwrap());
            }
            assert!((c.bits - best).abs() < 1e-4, "{} vs {best}", c.bits);
            assert!(c.gap_bits < 1e-3);
        }
    }

    #[test]
    fn noise_and_power_scaling_invariance() {
        let t = tensor(4, 6, 3, 7);
        let a = sum_capacity_bound(&DualMacProblem::new(&t, 0.1, 1.0)).unwrap();
        let b = sum_capacity_bound(&DualMacProblem::new(&t, 0.2, 2.0)).unwrap();
        assert!((a.bits - b.bits).abs() < 1e-6 * a.bits);
        let total: f64 = a.powers.iter().flatten().sum();
        assert!((total - 1.0).abs() < 1e-9);
    }

    #[test]
    fn converges_on_larger_instances() {
        let t = tensor(24, 48, 4, 9);
        let c = sum_capacity_bound(&DualMacProblem::new(&t, 1e-2, 10.0)).unwrap();
        assert!(c.iterations < 1000);
        assert!(c.gap_bits < 1e-3 * c.bits, "gap {} of {}", c.gap_bits, c.bits);
    }

    #[test]
    fn iteration_cap_reports_error() {
        let t = tensor(6, 6, 2, 3);
        let p = DualMacProblem { max_iterations: 1, ..DualMacProblem::new(&t, 1e-2, 1.0) };
        assert!(matches!(sum_capacity_bound(&p), Err(Error::NoConvergence { .. })));
    }
}
