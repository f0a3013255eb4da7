use serde::{Deserialize, Serialize};

use super::BinaryImage;
use crate::error::{Error, Result};

/// Raw spatial moments up to second order of a binary mask.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentSet {
    pub m00: f64,
    pub m10: f64,
    pub m01: f64,
    pub m11: f64,
    pub m20: f64,
    pub m02: f64,
    pub centroid: (f64, f64),
}

impl MomentSet {
    /// Normalized central second moments `(mu20, mu02, mu11)`.
    pub fn central(&self) -> (f64, f64, f64) {
        let (xc, yc) = self.centroid;
        (
            self.m20 / self.m00 - xc * xc,
            self.m02 / self.m00 - yc * yc,
            self.m11 / self.m00 - xc * yc,
        )
    }
}

pub fn hand_moments(mask: &BinaryImage) -> Result<MomentSet> {
    let (mut m00, mut m10, mut m01, mut m11, mut m20, mut m02) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
    for y in 0..mask.height() {
        for x in 0..mask.width() {
            if mask.get(x, y) {
                let (xf, yf) = (x as f64, y as f64);
                m00 += 1.0;
                m10 += xf;
                m01 += yf;
                m11 += xf * yf;
                m20 += xf * xf;
                m02 += yf * yf;
            }
        }
    }
    if m00 == 0.0 {
        return Err(Error::AllBackground);
    }
    Ok(MomentSet {
        m00,
        m10,
        m01,
        m11,
        m20,
        m02,
        centroid: (m10 / m00, m01 / m00),
    })
}

/// Angle in degrees, in `(-90, 90]`, between the image x axis and the
/// major axis of the moment-equivalent ellipse. Image coordinates (y down),
/// so a positive angle tilts the axis towards +y.
pub fn orientation_angle(moments: &MomentSet) -> Result<f64> {
    if moments.m00 <= 0.0 {
        return Err(Error::AllBackground);
    }
    let (mu20, mu02, mu11) = moments.central();
    let scale = (mu20 + mu02).abs().max(f64::MIN_POSITIVE);
    if mu11.abs() <= 1e-12 * scale && (mu20 - mu02).abs() <= 1e-12 * scale {
        return Err(Error::DegenerateOrientation);
    }
    let theta = 0.5 * (2.0 * mu11).atan2(mu20 - mu02).to_degrees();
    // atan2 returns (-pi, pi]; halving keeps (-90, 90]
    Ok(if theta <= -90.0 { theta + 180.0 } else { theta })
}
