use alloc::format;
use alloc::vec::Vec;
use core::fmt;
use core::ops::Range;
use core::str::FromStr;

#[allow(unused_imports)] // inherent once std is in the graph
use num_traits::Float;

use super::{build_array, ArrayKind, FloorPlan, Point2, Point3};
use crate::error::{Error, Result};
use crate::units::dbm_to_watts;

/// Height of the outdoor BS arrays above ground.
pub const OUTDOOR_HEIGHT_M: f64 = 10.0;
/// Distance of the outdoor BSs from the north/south outer walls.
pub const OUTDOOR_SETBACK_M: f64 = 15.0;
/// Inset of the single central BS from the walls of its room corner.
pub const CORNER_INSET_M: f64 = 0.5;

/// The six BS layouts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum DeploymentKind {
    SingleCentral,
    TwoIndoor,
    FourIndoor,
    FortyIndoor,
    Outdoor,
    IndoorOutdoor,
}

impl DeploymentKind {
    pub const ALL: [DeploymentKind; 6] = [
        DeploymentKind::SingleCentral,
        DeploymentKind::TwoIndoor,
        DeploymentKind::FourIndoor,
        DeploymentKind::FortyIndoor,
        DeploymentKind::Outdoor,
        DeploymentKind::IndoorOutdoor,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DeploymentKind::SingleCentral => "single-central",
            DeploymentKind::TwoIndoor => "two-indoor",
            DeploymentKind::FourIndoor => "four-indoor",
            DeploymentKind::FortyIndoor => "forty-indoor",
            DeploymentKind::Outdoor => "outdoor",
            DeploymentKind::IndoorOutdoor => "indoor-outdoor",
        }
    }
}

impl fmt::Display for DeploymentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DeploymentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        DeploymentKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown deployment '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BsSite {
    pub position: Point3,
    pub array_kind: ArrayKind,
    pub num_antennas: usize,
    /// Full-band power budget in watts.
    pub power_budget_w: f64,
    pub antenna_positions: Vec<Point3>,
}

impl BsSite {
    pub fn is_outdoor(&self) -> bool {
        self.array_kind == ArrayKind::UlaOutdoor
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Deployment {
    pub kind: DeploymentKind,
    pub sites: Vec<BsSite>,
    pub total_antennas: usize,
}

impl Deployment {
    pub fn num_sites(&self) -> usize {
        self.sites.len()
    }

    /// Columns of the network channel row that belong to BS `i`.
    pub fn antenna_range(&self, i: usize) -> Range<usize> {
        let start: usize = self.sites[..i].iter().map(|s| s.num_antennas).sum();
        start..start + self.sites[i].num_antennas
    }

    pub fn antenna_ranges(&self) -> Vec<Range<usize>> {
        (0..self.sites.len()).map(|i| self.antenna_range(i)).collect()
    }

    pub fn total_power_w(&self) -> f64 {
        self.sites.iter().map(|s| s.power_budget_w).sum()
    }

    /// BS index owning network antenna `m`.
    pub fn site_of_antenna(&self, m: usize) -> usize {
        let mut end = 0;
        for (i, s) in self.sites.iter().enumerate() {
            end += s.num_antennas;
            if m < end {
                return i;
            }
        }
        panic!("antenna index {m} out of range");
    }
}

/// Site positions (before arrays are attached) of a layout on `plan`.
fn site_positions(plan: &FloorPlan, kind: DeploymentKind) -> Result<Vec<(Point3, ArrayKind)>> {
    let ceiling = plan.ceiling_height();
    let indoor = |p: Point2| (Point3::new(p.x, p.y, ceiling), ArrayKind::RectangularCeiling);
    let need_corridors = || {
        if plan.corridors().is_empty() {
            Err(Error::Config(format!("deployment {kind} needs at least one corridor")))
        } else {
            Ok(())
        }
    };
    let sites = match kind {
        DeploymentKind::SingleCentral => alloc::vec![indoor(central_corner(plan))],
        DeploymentKind::TwoIndoor => {
            need_corridors()?;
            plan.corridors().iter().map(|c| indoor(c.center())).collect()
        }
        DeploymentKind::FourIndoor => {
            need_corridors()?;
            plan.corridors()
                .iter()
                .flat_map(|c| {
                    let mid = c.center();
                    let pts = if c.width() >= c.height() {
                        [Point2::new(c.x0 + 0.25 * c.width(), mid.y), Point2::new(c.x0 + 0.75 * c.width(), mid.y)]
                    } else {
                        [Point2::new(mid.x, c.y0 + 0.25 * c.height()), Point2::new(mid.x, c.y0 + 0.75 * c.height())]
                    };
                    pts.map(indoor)
                })
                .collect()
        }
        DeploymentKind::FortyIndoor => plan.rooms().iter().map(|r| indoor(r.center())).collect(),
        DeploymentKind::Outdoor => outdoor_sites(plan).to_vec(),
        DeploymentKind::IndoorOutdoor => {
            let mut v = alloc::vec![indoor(central_corner(plan))];
            v.extend(outdoor_sites(plan));
            v
        }
    };
    Ok(sites)
}

fn outdoor_sites(plan: &FloorPlan) -> [(Point3, ArrayKind); 2] {
    let x = 0.5 * plan.width();
    [
        (Point3::new(x, -OUTDOOR_SETBACK_M, OUTDOOR_HEIGHT_M), ArrayKind::UlaOutdoor),
        (Point3::new(x, plan.depth() + OUTDOOR_SETBACK_M, OUTDOOR_HEIGHT_M), ArrayKind::UlaOutdoor),
    ]
}

/// Inner corner, inset by [`CORNER_INSET_M`], of the tile just southwest of
/// the building center.
fn central_corner(plan: &FloorPlan) -> Point2 {
    let c = plan.footprint().center();
    let probe = Point2::new(c.x - 1e-6, c.y - 1e-6);
    let tile = plan
        .rooms()
        .iter()
        .chain(plan.corridors())
        .find(|t| t.contains(probe))
        .copied()
        .unwrap_or(plan.footprint());
    let cx = if (tile.x1 - c.x).abs() <= (c.x - tile.x0).abs() { tile.x1 - CORNER_INSET_M } else { tile.x0 + CORNER_INSET_M };
    let cy = if (tile.y1 - c.y).abs() <= (c.y - tile.y0).abs() { tile.y1 - CORNER_INSET_M } else { tile.y0 + CORNER_INSET_M };
    Point2::new(cx, cy)
}

/// Number of BS sites `kind` has on `plan`.
pub fn site_count(plan: &FloorPlan, kind: DeploymentKind) -> Result<usize> {
    Ok(site_positions(plan, kind)?.len())
}

/// Places the BSs of `kind` with `total_antennas` split evenly over the
/// sites and `sum_power_dbm` split evenly in the linear domain.
pub fn place_deployment(
    plan: &FloorPlan,
    kind: DeploymentKind,
    total_antennas: usize,
    sum_power_dbm: f64,
    carrier_hz: f64,
) -> Result<Deployment> {
    let positions = site_positions(plan, kind)?;
    let n = positions.len();
    if total_antennas == 0 || total_antennas % n != 0 {
        return Err(Error::Config(format!(
            "{total_antennas} antennas cannot be split evenly over the {n} sites of {kind}"
        )));
    }
    let per_site = total_antennas / n;
    let per_site_dbm = sum_power_dbm - 10.0 * (n as f64).log10();
    let power = dbm_to_watts(per_site_dbm);
    let sites = positions
        .into_iter()
        .map(|(position, array_kind)| BsSite {
            position,
            array_kind,
            num_antennas: per_site,
            power_budget_w: power,
            antenna_positions: build_array(position, array_kind, per_site, carrier_hz),
        })
        .collect();
    Ok(Deployment { kind, sites, total_antennas })
}
