//! Zero-forcing precoders for local, LS-MIMO and network MIMO transmission,
//! single-UE MRT, UE association and per-subcarrier user scheduling.
//!
//! Conventions: the channel row of UE k on a subcarrier is `g_k = h_k^H`, so a
//! transmit vector `x` reaches UE k as `g_k x`. A ZF precoder `T` satisfies
//! `G T = I`; stream k is sent along `t_k / |t_k|`, which turns a stream power
//! `q_k` into the received SNR `q_k g_k / noise` with `g_k = 1 / |t_k|^2`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::Range;
use core::str::FromStr;

#[allow(unused_imports)] // inherent once std is in the graph
use num_traits::Float;

use crate::channel::ChannelTensor;
use crate::error::{Error, Result};
use crate::geometry::Deployment;
use crate::linalg::{dot, lower_triangular_inverse, lq, norm, norm_sq, CMat, C64};
use crate::modulation::Alphabet;
use crate::powalloc::{mercury_waterfill, ParallelChannels};

/// Condition-number estimate above which a ZF problem counts as rank deficient.
pub const MAX_CONDITION: f64 = 1e12;
/// Relative slack of the power audit.
pub const POWER_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Scheme {
    Local,
    LsMimo,
    Network,
    NetworkTotalPower,
    MrtSingle,
}

impl Scheme {
    pub const SWEEP: [Scheme; 4] = [Scheme::Local, Scheme::LsMimo, Scheme::Network, Scheme::NetworkTotalPower];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Local => "local",
            Scheme::LsMimo => "lsmimo",
            Scheme::Network => "network",
            Scheme::NetworkTotalPower => "network-totalpower",
            Scheme::MrtSingle => "mrt-single",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [Scheme::Local, Scheme::LsMimo, Scheme::Network, Scheme::NetworkTotalPower, Scheme::MrtSingle]
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown scheme '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PowerConstraint {
    PerBs,
    Total,
}

/// One data stream on one subcarrier: beamforming weights on the contiguous
/// antenna block `offset..offset + coeffs.len()`.
#[derive(Debug, Clone, PartialEq)]
pub struct Stream {
    pub ue: usize,
    pub offset: usize,
    pub coeffs: Vec<C64>,
}

impl Stream {
    /// Received amplitude `g w` for a full-length channel row.
    pub fn response(&self, row: &[C64]) -> C64 {
        self.coeffs.iter().zip(&row[self.offset..]).map(|(w, g)| g * w).sum()
    }

    fn power_in(&self, range: &Range<usize>) -> f64 {
        let lo = range.start.max(self.offset);
        let hi = range.end.min(self.offset + self.coeffs.len());
        if lo >= hi {
            return 0.0;
        }
        norm_sq(&self.coeffs[lo - self.offset..hi - self.offset])
    }
}

/// Per-subcarrier streams of a whole network.
#[derive(Debug, Clone, PartialEq)]
pub struct Precoder {
    pub scheme: Scheme,
    pub constraint: PowerConstraint,
    pub num_antennas: usize,
    pub site_ranges: Vec<Range<usize>>,
    /// Effective budgets `P_i^eff` over all simulated subcarriers.
    pub budgets: Vec<f64>,
    pub subcarriers: Vec<Vec<Stream>>,
    /// Power factor applied by the per-BS rescaling of network MIMO (1 otherwise).
    pub scale_factor: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerAudit {
    pub per_bs: Vec<f64>,
    /// Largest relative excess over the applicable budget (<= 0 when satisfied).
    pub max_violation: f64,
}

impl PowerAudit {
    pub fn is_satisfied(&self) -> bool {
        self.max_violation <= POWER_TOLERANCE
    }
}

impl Precoder {
    pub fn num_subcarriers(&self) -> usize {
        self.subcarriers.len()
    }

    pub fn streams(&self, f: usize) -> &[Stream] {
        &self.subcarriers[f]
    }

    /// Dense `M x K'` matrix of subcarrier `f` and its stream-to-UE map.
    pub fn dense(&self, f: usize) -> (CMat, Vec<usize>) {
        let streams = &self.subcarriers[f];
        let mut w = CMat::zeros(self.num_antennas, streams.len());
        for (s, st) in streams.iter().enumerate() {
            for (j, c) in st.coeffs.iter().enumerate() {
                w[(st.offset + j, s)] = *c;
            }
        }
        (w, streams.iter().map(|s| s.ue).collect())
    }

    /// Power each BS radiates on subcarrier `f`.
    pub fn power_on_subcarrier(&self, f: usize) -> Vec<f64> {
        self.site_ranges
            .iter()
            .map(|r| self.subcarriers[f].iter().map(|s| s.power_in(r)).sum())
            .collect()
    }

    /// `sum_f |W_i^(f)|_F^2` per BS.
    pub fn power_per_bs(&self) -> Vec<f64> {
        let mut p = vec![0.0; self.site_ranges.len()];
        for f in 0..self.num_subcarriers() {
            for (acc, v) in p.iter_mut().zip(self.power_on_subcarrier(f)) {
                *acc += v;
            }
        }
        p
    }

    pub fn audit(&self) -> PowerAudit {
        let per_bs = self.power_per_bs();
        let max_violation = match self.constraint {
            PowerConstraint::PerBs => per_bs
                .iter()
                .zip(&self.budgets)
                .map(|(p, b)| (p - b) / b)
                .fold(f64::NEG_INFINITY, f64::max),
            PowerConstraint::Total => {
                let b: f64 = self.budgets.iter().sum();
                (per_bs.iter().sum::<f64>() - b) / b
            }
        };
        PowerAudit { per_bs, max_violation }
    }
}

/// Serving BS of every UE.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Association {
    pub serving_bs: Vec<usize>,
    pub per_bs_ues: Vec<usize>,
}

impl Association {
    pub fn ues_of(&self, bs: usize) -> Vec<usize> {
        (0..self.serving_bs.len()).filter(|&k| self.serving_bs[k] == bs).collect()
    }
}

/// Assigns each UE to the BS with the largest mean received power per
/// antenna, `mean |h|^2 * P_i / M_i`; ties go to the lower index.
pub fn associate_ues(h: &ChannelTensor, deployment: &Deployment) -> Association {
    let mut serving_bs = Vec::with_capacity(h.num_ues());
    for k in 0..h.num_ues() {
        let mut best = (0, f64::NEG_INFINITY);
        for (i, site) in deployment.sites.iter().enumerate() {
            let v = h.mean_gain(k, i) * site.power_budget_w / site.num_antennas as f64;
            if v > best.1 {
                best = (i, v);
            }
        }
        serving_bs.push(best.0);
    }
    let mut per_bs_ues = vec![0; deployment.num_sites()];
    for &i in &serving_bs {
        per_bs_ues[i] += 1;
    }
    Association { serving_bs, per_bs_ues }
}

/// `P_i^eff`: the share of each site's budget carried by `num_subcarriers`
/// simulated subcarriers, each standing for `total_subcarriers / num_subcarriers`
/// physical ones.
pub fn effective_budgets(deployment: &Deployment, num_subcarriers: usize, total_subcarriers: usize) -> Vec<f64> {
    let share = num_subcarriers as f64 / total_subcarriers as f64;
    deployment.sites.iter().map(|s| s.power_budget_w * share).collect()
}

/// ZF solution for a `K' x M` channel matrix.
#[derive(Debug, Clone)]
pub struct ZeroForcing {
    /// `M x K'` right inverse.
    pub t: CMat,
    /// `1 / |t_k|^2`.
    pub gains: Vec<f64>,
    pub condition: f64,
}

impl ZeroForcing {
    /// Unit-norm beam direction of stream k.
    pub fn direction(&self, k: usize) -> Vec<C64> {
        let s = self.gains[k].sqrt();
        (0..self.t.rows()).map(|m| self.t[(m, k)] * s).collect()
    }
}

/// Right pseudo-inverse `G^H (G G^H)^-1` through an LQ factorization.
pub fn zf_pseudo_inverse(g: &CMat) -> Result<ZeroForcing> {
    let f = lq(g).ok_or(Error::RankDeficient { condition: f64::INFINITY })?;
    let linv = lower_triangular_inverse(&f.l);
    let condition = f.l.frobenius_sq().sqrt() * linv.frobenius_sq().sqrt();
    if !(condition <= MAX_CONDITION) {
        return Err(Error::RankDeficient { condition });
    }
    let t = f.q.conj_transpose().matmul(&linv);
    let k = g.rows();
    let gains = (0..k)
        .map(|c| 1.0 / (0..k).map(|r| linv[(r, c)].norm_sqr()).sum::<f64>())
        .collect();
    Ok(ZeroForcing { t, gains, condition })
}

/// ZF on the given rows, dropping the weakest row (smallest channel norm)
/// until the problem is well conditioned. Returns the kept row indices.
pub fn zf_with_fallback(g: &CMat, mut rows: Vec<usize>) -> (Vec<usize>, Option<ZeroForcing>) {
    while !rows.is_empty() {
        match zf_pseudo_inverse(&g.select_rows(&rows)) {
            Ok(z) => return (rows, Some(z)),
            Err(_) => {
                let weakest = (0..rows.len())
                    .min_by(|&a, &b| norm_sq(g.row(rows[a])).total_cmp(&norm_sq(g.row(rows[b]))))
                    .unwrap_or(0);
                rows.remove(weakest);
            }
        }
    }
    (rows, None)
}

/// Greedy semi-orthogonal selection of up to `max_streams` rows: start from
/// the strongest row, then repeatedly add the row with the largest component
/// orthogonal to the span of those already chosen.
pub fn greedy_semi_orthogonal(g: &CMat, max_streams: usize) -> Vec<usize> {
    greedy_from(g, max_streams, None)
}

fn greedy_from(g: &CMat, max_streams: usize, first: Option<usize>) -> Vec<usize> {
    let k = g.rows();
    let mut chosen: Vec<usize> = Vec::new();
    let mut residual: Vec<Vec<C64>> = (0..k).map(|r| g.row(r).to_vec()).collect();
    while chosen.len() < max_streams.min(k) {
        let best = match (chosen.is_empty(), first) {
            (true, Some(f)) => (f, norm_sq(&residual[f])),
            _ => (0..k)
                .filter(|r| !chosen.contains(r))
                .map(|r| (r, norm_sq(&residual[r])))
                .fold((usize::MAX, -1.0), |a, b| if b.1 > a.1 { b } else { a }),
        };
        if best.0 == usize::MAX || best.1 <= 0.0 {
            break;
        }
        chosen.push(best.0);
        let mut e = residual[best.0].clone();
        let n = norm(&e);
        e.iter_mut().for_each(|v| *v /= n);
        for r in 0..k {
            if !chosen.contains(&r) {
                let c = dot(&e, &residual[r]);
                for (v, b) in residual[r].iter_mut().zip(&e) {
                    *v -= c * b;
                }
            }
        }
    }
    chosen
}

/// Equal-power ZF sum information of a candidate set; `snr` is the
/// per-subcarrier transmit power over the noise variance.
fn zf_equal_power_rate<A: Alphabet + ?Sized>(g: &CMat, set: &[usize], snr: f64, alphabet: &A) -> f64 {
    match zf_pseudo_inverse(&g.select_rows(set)) {
        Ok(z) => {
            let p = snr / set.len() as f64;
            z.gains.iter().map(|&gk| alphabet.mi_bits(p * gk)).sum()
        }
        Err(_) => f64::NEG_INFINITY,
    }
}

/// Picks at most `max_streams` of the rows of `g` for one subcarrier.
///
/// Runs [`greedy_semi_orthogonal`] once per choice of first row, refines
/// each distinct start by steepest single-swap ascent on the equal-power ZF
/// sum information at `snr`, and keeps the best result.
pub fn schedule_users<A: Alphabet + ?Sized>(g: &CMat, max_streams: usize, snr: f64, alphabet: &A) -> Vec<usize> {
    let k = g.rows();
    if k <= max_streams {
        return (0..k).collect();
    }
    let mut starts: Vec<Vec<usize>> = Vec::new();
    for first in 0..k {
        let mut s = greedy_from(g, max_streams, Some(first));
        s.sort_unstable();
        if !starts.contains(&s) {
            starts.push(s);
        }
    }
    let mut best: (Vec<usize>, f64) = (Vec::new(), f64::NEG_INFINITY);
    for start in starts {
        let (set, value) = swap_ascent(g, start, snr, alphabet);
        if value > best.1 {
            best = (set, value);
        }
    }
    best.0
}

fn swap_ascent<A: Alphabet + ?Sized>(g: &CMat, mut set: Vec<usize>, snr: f64, alphabet: &A) -> (Vec<usize>, f64) {
    let k = g.rows();
    let mut value = zf_equal_power_rate(g, &set, snr, alphabet);
    for _ in 0..4 * k {
        let mut best: Option<(usize, usize, f64)> = None;
        for pos in 0..set.len() {
            for cand in (0..k).filter(|c| !set.contains(c)) {
                let mut trial = set.clone();
                trial[pos] = cand;
                let v = zf_equal_power_rate(g, &trial, snr, alphabet);
                if v > value * (1.0 + 1e-12) && best.is_none_or(|b| v > b.2) {
                    best = Some((pos, cand, v));
                }
            }
        }
        match best {
            Some((pos, cand, v)) => {
                set[pos] = cand;
                value = v;
            }
            None => break,
        }
    }
    set.sort_unstable();
    (set, value)
}

/// Channel rows of `ues` on subcarrier `f`, restricted to antennas `cols`.
fn local_rows(h: &ChannelTensor, f: usize, ues: &[usize], cols: &Range<usize>) -> CMat {
    let mut data = Vec::with_capacity(ues.len() * cols.len());
    for &k in ues {
        data.extend_from_slice(&h.row(f, k)[cols.clone()]);
    }
    CMat::from_row_major(ues.len(), cols.len(), data)
}

struct Candidate {
    f: usize,
    ue: usize,
    offset: usize,
    direction: Vec<C64>,
    gain: f64,
}

/// Allocates `budget` over the candidates and turns them into streams.
fn allocate<A: Alphabet + ?Sized>(
    cands: Vec<Candidate>,
    budget: f64,
    noise: f64,
    alphabet: &A,
    out: &mut [Vec<Stream>],
) -> Result<()> {
    if cands.is_empty() {
        return Ok(());
    }
    let ch = ParallelChannels::new(cands.iter().map(|c| c.gain / noise).collect(), budget)?;
    let a = match mercury_waterfill(&ch, alphabet) {
        Ok(a) => a,
        Err(Error::NoUsableChannel) => return Ok(()),
        Err(e) => return Err(e),
    };
    for (c, q) in cands.into_iter().zip(a.powers) {
        if q > 0.0 {
            let s = q.sqrt();
            out[c.f].push(Stream { ue: c.ue, offset: c.offset, coeffs: c.direction.into_iter().map(|v| v * s).collect() });
        }
    }
    Ok(())
}

fn check_dims(h: &ChannelTensor, deployment: &Deployment, budgets: &[f64], noise: f64) -> Result<()> {
    if h.num_antennas() != deployment.total_antennas || budgets.len() != deployment.num_sites() {
        return Err(Error::Argument("channel, deployment and budgets disagree".into()));
    }
    if !(noise > 0.0) || budgets.iter().any(|b| !(*b > 0.0)) {
        return Err(Error::Argument("noise variance and budgets must be positive".into()));
    }
    Ok(())
}

fn empty_precoder(h: &ChannelTensor, deployment: &Deployment, budgets: &[f64], scheme: Scheme, constraint: PowerConstraint) -> Precoder {
    Precoder {
        scheme,
        constraint,
        num_antennas: h.num_antennas(),
        site_ranges: deployment.antenna_ranges(),
        budgets: budgets.to_vec(),
        subcarriers: vec![Vec::new(); h.num_subcarriers()],
        scale_factor: 1.0,
    }
}

/// Each BS zero-forces among its own UEs with its own antennas, scheduling
/// per subcarrier when it has more UEs than antennas. Other cells'
/// interference is ignored when allocating power.
pub fn precode_local<A: Alphabet + ?Sized>(
    h: &ChannelTensor,
    assoc: &Association,
    deployment: &Deployment,
    budgets: &[f64],
    noise: f64,
    alphabet: &A,
) -> Result<Precoder> {
    check_dims(h, deployment, budgets, noise)?;
    let mut pre = empty_precoder(h, deployment, budgets, Scheme::Local, PowerConstraint::PerBs);
    let nf = h.num_subcarriers();
    for (i, cols) in deployment.antenna_ranges().into_iter().enumerate() {
        let ues = assoc.ues_of(i);
        if ues.is_empty() {
            continue;
        }
        let snr = budgets[i] / nf as f64 / noise;
        let mut cands = Vec::new();
        for f in 0..nf {
            let g = local_rows(h, f, &ues, &cols);
            let rows = schedule_users(&g, cols.len(), snr, alphabet);
            let (kept, zf) = zf_with_fallback(&g, rows);
            if let Some(z) = zf {
                for (s, &r) in kept.iter().enumerate() {
                    cands.push(Candidate { f, ue: ues[r], offset: cols.start, direction: z.direction(s), gain: z.gains[s] });
                }
            }
        }
        allocate(cands, budgets[i], noise, alphabet, &mut pre.subcarriers)?;
    }
    Ok(pre)
}

/// Each BS nulls its interference at every UE of the network using only its
/// own antennas and CSI; power goes to the UEs it serves.
pub fn precode_lsmimo<A: Alphabet + ?Sized>(
    h: &ChannelTensor,
    assoc: &Association,
    deployment: &Deployment,
    budgets: &[f64],
    noise: f64,
    alphabet: &A,
) -> Result<Precoder> {
    check_dims(h, deployment, budgets, noise)?;
    let k = h.num_ues();
    for (i, site) in deployment.sites.iter().enumerate() {
        if site.num_antennas < k {
            return Err(Error::Infeasible { bs: i, antennas: site.num_antennas, ues: k });
        }
    }
    let mut pre = empty_precoder(h, deployment, budgets, Scheme::LsMimo, PowerConstraint::PerBs);
    let all: Vec<usize> = (0..k).collect();
    for (i, cols) in deployment.antenna_ranges().into_iter().enumerate() {
        let mut cands = Vec::new();
        for f in 0..h.num_subcarriers() {
            let g = local_rows(h, f, &all, &cols);
            let (kept, zf) = zf_with_fallback(&g, all.clone());
            if let Some(z) = zf {
                for (s, &ue) in kept.iter().enumerate() {
                    if assoc.serving_bs[ue] == i {
                        cands.push(Candidate { f, ue, offset: cols.start, direction: z.direction(s), gain: z.gains[s] });
                    }
                }
            }
        }
        allocate(cands, budgets[i], noise, alphabet, &mut pre.subcarriers)?;
    }
    Ok(pre)
}

/// All BSs act as one distributed array: ZF over the full `K x M` channel,
/// power allocated under the summed budget. With [`PowerConstraint::PerBs`]
/// the whole precoder is then scaled down until the most loaded BS meets its
/// own budget.
pub fn precode_network<A: Alphabet + ?Sized>(
    h: &ChannelTensor,
    deployment: &Deployment,
    budgets: &[f64],
    noise: f64,
    alphabet: &A,
    constraint: PowerConstraint,
) -> Result<Precoder> {
    check_dims(h, deployment, budgets, noise)?;
    let (k, m) = (h.num_ues(), h.num_antennas());
    if k > m {
        return Err(Error::Argument(format!("network MIMO needs K <= M, got K = {k}, M = {m}")));
    }
    let scheme = match constraint {
        PowerConstraint::PerBs => Scheme::Network,
        PowerConstraint::Total => Scheme::NetworkTotalPower,
    };
    let mut pre = empty_precoder(h, deployment, budgets, scheme, constraint);
    let mut cands = Vec::new();
    let all: Vec<usize> = (0..k).collect();
    for f in 0..h.num_subcarriers() {
        let g = h.subcarrier(f);
        let (kept, zf) = zf_with_fallback(&g, all.clone());
        if let Some(z) = zf {
            for (s, &ue) in kept.iter().enumerate() {
                cands.push(Candidate { f, ue, offset: 0, direction: z.direction(s), gain: z.gains[s] });
            }
        }
    }
    allocate(cands, budgets.iter().sum(), noise, alphabet, &mut pre.subcarriers)?;
    if constraint == PowerConstraint::PerBs {
        let used = pre.power_per_bs();
        let factor = used
            .iter()
            .zip(budgets)
            .filter(|(u, _)| **u > 0.0)
            .map(|(u, b)| b / u)
            .fold(1.0, f64::min);
        let amp = factor.sqrt();
        for streams in pre.subcarriers.iter_mut() {
            for s in streams.iter_mut() {
                s.coeffs.iter_mut().for_each(|c| *c *= amp);
            }
        }
        pre.scale_factor = factor;
    }
    Ok(pre)
}

/// Single-UE MRT: every BS beams its equal per-subcarrier share of `P_i^eff`
/// along the conjugate of its channel, phases aligned so all BSs add
/// coherently at the UE.
pub fn precode_mrt_single(h: &ChannelTensor, ue: usize, deployment: &Deployment, budgets: &[f64]) -> Result<Precoder> {
    if h.num_antennas() != deployment.total_antennas || budgets.len() != deployment.num_sites() || ue >= h.num_ues() {
        return Err(Error::Argument("channel, deployment, budgets and UE index disagree".into()));
    }
    let mut pre = empty_precoder(h, deployment, budgets, Scheme::MrtSingle, PowerConstraint::PerBs);
    let nf = h.num_subcarriers();
    for f in 0..nf {
        let row = h.row(f, ue);
        let mut coeffs = vec![C64::new(0.0, 0.0); row.len()];
        for (i, r) in deployment.antenna_ranges().into_iter().enumerate() {
            let n = norm(&row[r.clone()]);
            if n > 0.0 {
                let a = (budgets[i] / nf as f64).sqrt() / n;
                for m in r {
                    coeffs[m] = row[m].conj() * a;
                }
            }
        }
        pre.subcarriers[f].push(Stream { ue, offset: 0, coeffs });
    }
    Ok(pre)
}

/// Received SNR of single-UE MRT on every subcarrier:
/// `(sum_i sqrt(P_i^eff / F) |h_{k,i}|)^2 / noise`.
pub fn mrt_snr(h: &ChannelTensor, ue: usize, budgets: &[f64], noise: f64) -> Vec<f64> {
    let nf = h.num_subcarriers();
    (0..nf)
        .map(|f| {
            let p: Vec<f64> = budgets.iter().map(|b| b / nf as f64).collect();
            mrt_snr_with_powers(h, ue, f, &p, noise)
        })
        .collect()
}

/// MRT SNR on subcarrier `f` when BS i radiates `powers[i]` there. Bounds the
/// SINR of UE `ue` under any linear precoder with the same per-BS powers.
pub fn mrt_snr_with_powers(h: &ChannelTensor, ue: usize, f: usize, powers: &[f64], noise: f64) -> f64 {
    let row = h.row(f, ue);
    let amp: f64 = h
        .site_ranges()
        .iter()
        .zip(powers)
        .map(|(r, p)| p.sqrt() * norm(&row[r.clone()]))
        .sum();
    amp * amp / noise
}
