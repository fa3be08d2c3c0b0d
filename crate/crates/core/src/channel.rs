//! Per-subcarrier channel coefficients between every BS antenna and every UE.
//!
//! Large-scale fading follows log-distance pathloss classes (indoor LOS,
//! indoor NLOS with per-wall penetration loss, outdoor-to-indoor) plus
//! log-normal shadowing. Small-scale fading is a tapped delay line with an
//! exponential power-delay profile, i.i.d. over antennas; LOS links add a
//! Rician component whose phases come from the exact antenna-to-UE distances.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

#[allow(unused_imports)] // inherent once std is in the graph
use num_traits::Float;
use rand::Rng;

use crate::error::{Error, Result};
use crate::geometry::{count_walls, BsSite, Deployment, FloorPlan, Point3, UeDrop, SPEED_OF_LIGHT};
use crate::linalg::{CMat, C64, ZERO};
use crate::rng::{self, domain};
use crate::units::db_to_linear;

/// Coefficients of one propagation class.
///
/// Pathloss in dB is `slope * log10(d / 1 m) + intercept + freq * log10(f / 5 GHz)`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ClassParams {
    pub pl_slope_db: f64,
    pub pl_intercept_db: f64,
    pub pl_freq_db: f64,
    pub shadow_sigma_db: f64,
    /// Rician K-factor in dB; `None` for pure scattering.
    pub rice_k_db: Option<f64>,
    pub delay_spread_s: f64,
}

impl ClassParams {
    pub fn pathloss_db(&self, distance_m: f64, carrier_hz: f64) -> f64 {
        self.pl_slope_db * distance_m.max(1.0).log10()
            + self.pl_intercept_db
            + self.pl_freq_db * (carrier_hz / 5e9).log10()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum LinkClass {
    IndoorLos,
    IndoorNlos,
    OutdoorToIndoor,
}

/// Propagation model parameters. Defaults follow the usual indoor-office and
/// outdoor-to-indoor coefficient sets; none of them are measured values.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct ChannelModelConfig {
    pub indoor_los: ClassParams,
    pub indoor_nlos: ClassParams,
    /// Indoor part of outdoor-to-indoor links; pathloss uses these coefficients
    /// over the full outdoor + indoor path length.
    pub outdoor_to_indoor: ClassParams,
    pub building_entry_loss_db: f64,
    pub wall_loss_db: f64,
    pub num_taps: usize,
}

impl Default for ChannelModelConfig {
    fn default() -> Self {
        Self {
            indoor_los: ClassParams {
                pl_slope_db: 18.7,
                pl_intercept_db: 46.8,
                pl_freq_db: 20.0,
                shadow_sigma_db: 3.0,
                rice_k_db: Some(7.0),
                delay_spread_s: 38e-9,
            },
            indoor_nlos: ClassParams {
                pl_slope_db: 36.8,
                pl_intercept_db: 43.8,
                pl_freq_db: 20.0,
                shadow_sigma_db: 4.0,
                rice_k_db: None,
                delay_spread_s: 25e-9,
            },
            outdoor_to_indoor: ClassParams {
                pl_slope_db: 36.8,
                pl_intercept_db: 43.8,
                pl_freq_db: 20.0,
                shadow_sigma_db: 7.0,
                rice_k_db: None,
                delay_spread_s: 41e-9,
            },
            building_entry_loss_db: 14.0,
            wall_loss_db: 12.0,
            num_taps: 8,
        }
    }
}

impl ChannelModelConfig {
    pub fn class(&self, class: LinkClass) -> &ClassParams {
        match class {
            LinkClass::IndoorLos => &self.indoor_los,
            LinkClass::IndoorNlos => &self.indoor_nlos,
            LinkClass::OutdoorToIndoor => &self.outdoor_to_indoor,
        }
    }
}

/// Large-scale description of one BS-UE link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkProfile {
    pub class: LinkClass,
    /// Distance-dependent pathloss including wall and building-entry losses.
    pub pathloss_db: f64,
    pub los: bool,
    pub num_walls: usize,
    pub shadowing_db: f64,
    pub rice_k_linear: f64,
    pub distance_m: f64,
}

impl LinkProfile {
    /// Mean per-antenna power gain `10^(-(pathloss + shadowing) / 10)`.
    pub fn gain_linear(&self) -> f64 {
        db_to_linear(-(self.pathloss_db + self.shadowing_db))
    }
}

/// Classifies the link from `site` to `ue` and draws its shadowing from `rng`.
pub fn classify_link<R: Rng + ?Sized>(
    plan: &FloorPlan,
    site: &BsSite,
    ue: Point3,
    model: &ChannelModelConfig,
    carrier_hz: f64,
    rng: &mut R,
) -> LinkProfile {
    let (class, pathloss_db, los, num_walls, distance_m) = if site.is_outdoor() {
        let entry = plan.nearest_outer_wall_point(ue.xy());
        let entry = Point3::new(entry.x, entry.y, ue.z);
        let distance = site.position.distance(entry) + entry.distance(ue);
        let walls = count_walls(plan, entry, ue).num_walls;
        let pl = model.outdoor_to_indoor.pathloss_db(distance, carrier_hz)
            + model.building_entry_loss_db
            + model.wall_loss_db * walls as f64;
        (LinkClass::OutdoorToIndoor, pl, false, walls, distance)
    } else {
        let distance = site.position.distance(ue);
        let wc = count_walls(plan, site.position, ue);
        if wc.los {
            (LinkClass::IndoorLos, model.indoor_los.pathloss_db(distance, carrier_hz), true, 0, distance)
        } else {
            // the first penetrated wall is part of the NLOS coefficients
            let pl = model.indoor_nlos.pathloss_db(distance, carrier_hz)
                + model.wall_loss_db * wc.num_walls.saturating_sub(1) as f64;
            (LinkClass::IndoorNlos, pl, false, wc.num_walls, distance)
        }
    };
    let params = model.class(class);
    let shadowing_db = params.shadow_sigma_db * rng::normal(rng);
    let rice_k_linear = match (los, params.rice_k_db) {
        (true, Some(k)) => db_to_linear(k),
        _ => 0.0,
    };
    LinkProfile { class, pathloss_db, los, num_walls, shadowing_db, rice_k_linear, distance_m }
}

/// Profiles of every (site, UE) pair of a drop, indexed `[site][ue]`.
///
/// Shadowing is drawn per (drop, site, UE), so it is shared by all
/// realizations of the drop.
pub fn link_profiles(
    plan: &FloorPlan,
    deployment: &Deployment,
    drop: &UeDrop,
    model: &ChannelModelConfig,
    carrier_hz: f64,
    seed: u64,
) -> Vec<Vec<LinkProfile>> {
    deployment
        .sites
        .iter()
        .enumerate()
        .map(|(i, site)| {
            drop.positions
                .iter()
                .enumerate()
                .map(|(k, &ue)| {
                    let mut r = rng::stream(seed, &[domain::SHADOWING, drop.drop_index, i as u64, k as u64]);
                    classify_link(plan, site, ue, model, carrier_hz, &mut r)
                })
                .collect()
        })
        .collect()
}

/// Center frequencies of `count` equally wide resource blocks covering the
/// active band around `carrier_hz`.
pub fn subcarrier_frequencies(carrier_hz: f64, active_bandwidth_hz: f64, count: usize) -> Vec<f64> {
    let width = active_bandwidth_hz / count as f64;
    (0..count)
        .map(|p| carrier_hz - 0.5 * active_bandwidth_hz + (p as f64 + 0.5) * width)
        .collect()
}

/// Complex downlink coefficients for K UEs, M network antennas and F
/// subcarriers. Entry `(k, m, f)` is the m-th element of the row `h_k^H`, so
/// UE k receives `sum_m h(k, m, f) x_m` on subcarrier f.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelTensor {
    num_ues: usize,
    num_antennas: usize,
    /// Stored subcarrier-major: `[f][k][m]`.
    data: Vec<C64>,
    subcarrier_freqs: Vec<f64>,
    site_ranges: Vec<Range<usize>>,
    pub realization_index: u64,
    pub seed: u64,
}

impl ChannelTensor {
    /// Builds a tensor from `[k][m][f]`-ordered coefficients.
    pub fn from_kmf(
        num_ues: usize,
        num_antennas: usize,
        subcarrier_freqs: Vec<f64>,
        site_ranges: Vec<Range<usize>>,
        coeffs: &[C64],
    ) -> Result<Self> {
        let f = subcarrier_freqs.len();
        if coeffs.len() != num_ues * num_antennas * f {
            return Err(Error::Argument(format!(
                "{} coefficients for a {num_ues} x {num_antennas} x {f} tensor",
                coeffs.len()
            )));
        }
        check_partition(&site_ranges, num_antennas)?;
        let mut t = Self::zeros(num_ues, num_antennas, subcarrier_freqs, site_ranges);
        for k in 0..num_ues {
            for m in 0..num_antennas {
                for n in 0..f {
                    *t.get_mut(k, m, n) = coeffs[(k * num_antennas + m) * f + n];
                }
            }
        }
        Ok(t)
    }

    pub fn zeros(num_ues: usize, num_antennas: usize, subcarrier_freqs: Vec<f64>, site_ranges: Vec<Range<usize>>) -> Self {
        let f = subcarrier_freqs.len();
        Self {
            num_ues,
            num_antennas,
            data: vec![ZERO; f * num_ues * num_antennas],
            subcarrier_freqs,
            site_ranges,
            realization_index: 0,
            seed: 0,
        }
    }

    pub fn num_ues(&self) -> usize {
        self.num_ues
    }

    pub fn num_antennas(&self) -> usize {
        self.num_antennas
    }

    pub fn num_subcarriers(&self) -> usize {
        self.subcarrier_freqs.len()
    }

    pub fn subcarrier_freqs(&self) -> &[f64] {
        &self.subcarrier_freqs
    }

    /// Network antenna columns belonging to each BS.
    pub fn site_ranges(&self) -> &[Range<usize>] {
        &self.site_ranges
    }

    fn offset(&self, k: usize, m: usize, f: usize) -> usize {
        (f * self.num_ues + k) * self.num_antennas + m
    }

    pub fn get(&self, k: usize, m: usize, f: usize) -> C64 {
        self.data[self.offset(k, m, f)]
    }

    pub fn get_mut(&mut self, k: usize, m: usize, f: usize) -> &mut C64 {
        let o = self.offset(k, m, f);
        &mut self.data[o]
    }

    /// Row `h_k^H` on subcarrier `f` (length M).
    pub fn row(&self, f: usize, k: usize) -> &[C64] {
        let o = self.offset(k, 0, f);
        &self.data[o..o + self.num_antennas]
    }

    /// The K x M channel matrix of subcarrier `f`.
    pub fn subcarrier(&self, f: usize) -> CMat {
        let o = self.offset(0, 0, f);
        CMat::from_row_major(self.num_ues, self.num_antennas, self.data[o..o + self.num_ues * self.num_antennas].to_vec())
    }

    /// Coefficients in `[k][m][f]` order.
    pub fn to_kmf(&self) -> Vec<C64> {
        let mut out = Vec::with_capacity(self.data.len());
        for k in 0..self.num_ues {
            for m in 0..self.num_antennas {
                for f in 0..self.num_subcarriers() {
                    out.push(self.get(k, m, f));
                }
            }
        }
        out
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Mean of `|h|^2` over the antennas of BS `site` and all subcarriers.
    pub fn mean_gain(&self, k: usize, site: usize) -> f64 {
        let r = self.site_ranges[site].clone();
        let n = (r.len() * self.num_subcarriers()) as f64;
        let mut s = 0.0;
        for f in 0..self.num_subcarriers() {
            s += self.row(f, k)[r.clone()].iter().map(|z| z.norm_sqr()).sum::<f64>();
        }
        s / n
    }

    /// Mean of `|h|` over the antennas of BS `site` and all subcarriers.
    pub fn mean_magnitude(&self, k: usize, site: usize) -> f64 {
        let r = self.site_ranges[site].clone();
        let n = (r.len() * self.num_subcarriers()) as f64;
        let mut s = 0.0;
        for f in 0..self.num_subcarriers() {
            s += self.row(f, k)[r.clone()].iter().map(|z| z.norm()).sum::<f64>();
        }
        s / n
    }
}

fn check_partition(ranges: &[Range<usize>], num_antennas: usize) -> Result<()> {
    let mut next = 0;
    for r in ranges {
        if r.start != next || r.end <= r.start {
            return Err(Error::Argument(format!("site ranges {ranges:?} do not partition {num_antennas} antennas")));
        }
        next = r.end;
    }
    if next != num_antennas {
        return Err(Error::Argument(format!("site ranges {ranges:?} do not partition {num_antennas} antennas")));
    }
    Ok(())
}

/// Normalized exponential power-delay profile: taps every half delay spread.
fn tap_profile(num_taps: usize, delay_spread_s: f64) -> (Vec<f64>, Vec<f64>) {
    let delays: Vec<f64> = (0..num_taps).map(|l| 0.5 * delay_spread_s * l as f64).collect();
    let mut powers: Vec<f64> = delays.iter().map(|t| (-t / delay_spread_s).exp()).collect();
    let total: f64 = powers.iter().sum();
    powers.iter_mut().for_each(|p| *p /= total);
    (delays, powers)
}

/// Generates one fast-fading realization.
///
/// `profiles` is indexed `[site][ue]` as returned by [`link_profiles`]. Every
/// (site, UE, antenna) triple draws its taps from its own stream, so adding
/// antennas to a site leaves the coefficients of the existing ones unchanged.
pub fn generate_channel(
    profiles: &[Vec<LinkProfile>],
    deployment: &Deployment,
    drop: &UeDrop,
    model: &ChannelModelConfig,
    subcarrier_freqs: &[f64],
    carrier_hz: f64,
    seed: u64,
) -> Result<ChannelTensor> {
    if subcarrier_freqs.is_empty() || model.num_taps == 0 {
        return Err(Error::Argument("need at least one subcarrier and one tap".into()));
    }
    if profiles.len() != deployment.num_sites() || profiles.iter().any(|p| p.len() != drop.positions.len()) {
        return Err(Error::Argument("link profiles do not match deployment and drop".into()));
    }
    let num_ues = drop.positions.len();
    let mut tensor = ChannelTensor::zeros(
        num_ues,
        deployment.total_antennas,
        subcarrier_freqs.to_vec(),
        deployment.antenna_ranges(),
    );
    tensor.seed = seed;

    let num_f = subcarrier_freqs.len();
    let classes = [LinkClass::IndoorLos, LinkClass::IndoorNlos, LinkClass::OutdoorToIndoor];
    // twiddles[class][f * taps + l] = sqrt(p_l) exp(-j 2 pi (f_n - f_c) tau_l)
    let twiddles: Vec<Vec<C64>> = classes
        .iter()
        .map(|&c| {
            let (delays, powers) = tap_profile(model.num_taps, model.class(c).delay_spread_s);
            let mut t = Vec::with_capacity(num_f * model.num_taps);
            for &freq in subcarrier_freqs {
                for (tau, p) in delays.iter().zip(&powers) {
                    let phase = -2.0 * core::f64::consts::PI * (freq - carrier_hz) * tau;
                    t.push(C64::from_polar(p.sqrt(), phase));
                }
            }
            t
        })
        .collect();

    let mut taps = vec![ZERO; model.num_taps];
    for (i, site) in deployment.sites.iter().enumerate() {
        let base = deployment.antenna_range(i).start;
        for (k, profile) in profiles[i].iter().enumerate() {
            let amplitude = profile.gain_linear().sqrt();
            let kf = profile.rice_k_linear;
            let (los_w, nlos_w) = if kf.is_infinite() {
                (1.0, 0.0)
            } else {
                ((kf / (kf + 1.0)).sqrt(), (1.0 / (kf + 1.0)).sqrt())
            };
            let tw = &twiddles[classes.iter().position(|&c| c == profile.class).unwrap_or(1)];
            let ue = drop.positions[k];
            for (j, antenna) in site.antenna_positions.iter().enumerate() {
                let mut r = rng::stream(seed, &[domain::FADING, i as u64, k as u64, j as u64]);
                for t in taps.iter_mut() {
                    *t = rng::complex_normal(&mut r);
                }
                let d = antenna.distance(ue);
                for (n, &freq) in subcarrier_freqs.iter().enumerate() {
                    let row = &tw[n * model.num_taps..(n + 1) * model.num_taps];
                    let scatter: C64 = taps.iter().zip(row).map(|(a, b)| a * b).sum();
                    let mut h = scatter * nlos_w;
                    if los_w > 0.0 {
                        let phase = -2.0 * core::f64::consts::PI * freq * d / SPEED_OF_LIGHT;
                        h += C64::from_polar(los_w, phase);
                    }
                    *tensor.get_mut(k, base + j, n) = h * amplitude;
                }
            }
        }
    }
    Ok(tensor)
}

/// Channel estimate `h + e` used to build precoders.
#[derive(Debug, Clone)]
pub struct NoisyChannelTensor<'a> {
    pub base: &'a ChannelTensor,
    pub estimate: ChannelTensor,
    /// Normalized estimation-error variance (linear).
    pub nmse: f64,
}

/// Adds i.i.d. proper complex Gaussian estimation errors.
///
/// For the link between BS i and UE k the error variance is
/// `mean(|h|)^2 * nmse`, the mean taken over the antennas of BS i and all
/// subcarriers of `h`.
pub fn add_estimation_error(h: &ChannelTensor, nmse: f64, seed: u64) -> Result<NoisyChannelTensor<'_>> {
    if !(nmse >= 0.0) || !nmse.is_finite() {
        return Err(Error::Argument(format!("estimation NMSE must be a finite non-negative number, got {nmse}")));
    }
    let mut estimate = h.clone();
    if nmse > 0.0 {
        for (i, range) in h.site_ranges().iter().enumerate() {
            for k in 0..h.num_ues() {
                let sigma = h.mean_magnitude(k, i) * nmse.sqrt();
                for (j, m) in range.clone().enumerate() {
                    let mut r = rng::stream(seed, &[domain::ESTIMATION, i as u64, k as u64, j as u64]);
                    for f in 0..h.num_subcarriers() {
                        *estimate.get_mut(k, m, f) += rng::complex_normal(&mut r) * sigma;
                    }
                }
            }
        }
    }
    Ok(NoisyChannelTensor { base: h, estimate, nmse })
}
