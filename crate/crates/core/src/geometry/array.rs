use alloc::vec::Vec;

#[allow(unused_imports)] // inherent once std is in the graph
use num_traits::Float;

use super::{wavelength, Point3};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum ArrayKind {
    /// Horizontal planar array under the ceiling, filled row by row.
    RectangularCeiling,
    /// Uniform linear array parallel to the long (x) side of the building.
    UlaOutdoor,
}

/// Antenna positions of an array centered on `center`, spaced half a carrier
/// wavelength apart.
///
/// The rectangular array has `ceil(sqrt(n))` antennas per row; the last row
/// may be partially filled.
pub fn build_array(center: Point3, kind: ArrayKind, num_antennas: usize, carrier_hz: f64) -> Vec<Point3> {
    let spacing = 0.5 * wavelength(carrier_hz);
    match kind {
        ArrayKind::UlaOutdoor => {
            let mid = 0.5 * (num_antennas as f64 - 1.0);
            (0..num_antennas)
                .map(|i| Point3::new(center.x + (i as f64 - mid) * spacing, center.y, center.z))
                .collect()
        }
        ArrayKind::RectangularCeiling => {
            let cols = (num_antennas as f64).sqrt().ceil().max(1.0) as usize;
            let rows = num_antennas.div_ceil(cols);
            let col_mid = 0.5 * (cols as f64 - 1.0);
            let row_mid = 0.5 * (rows as f64 - 1.0);
            (0..num_antennas)
                .map(|i| {
                    let (r, c) = (i / cols, i % cols);
                    Point3::new(
                        center.x + (c as f64 - col_mid) * spacing,
                        center.y + (r as f64 - row_mid) * spacing,
                        center.z,
                    )
                })
                .collect()
        }
    }
}
