//! Parametric synthetic hands: a rounded palm, a wrist block and five
//! tapered capsule fingers, bright on a dark noisy background.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::GrayImage;

pub const CANVAS_WIDTH: usize = 383;
pub const CANVAS_HEIGHT: usize = 526;

/// One tapered capsule finger. `length` runs from the base center to the
/// center of the tip cap; the cap radius adds half the tip width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FingerParams {
    pub length: f64,
    pub base_width: f64,
    /// Tip width over base width.
    pub taper: f64,
    /// Tilt from vertical in degrees, positive towards +x.
    pub splay: f64,
    /// Base center relative to the palm's top-left corner.
    pub base: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HandParams {
    pub thumb: FingerParams,
    /// Index, middle, ring, little.
    pub fingers: [FingerParams; 4],
    /// Top-left corner of the palm on the unrotated canvas.
    pub palm_origin: (f64, f64),
    pub palm_width: f64,
    pub palm_height: f64,
    pub palm_corner: f64,
    pub wrist_width: f64,
    pub wrist_height: f64,
    /// In-plane rotation about the canvas center, degrees.
    pub rotation: f64,
    /// Relative intra-class jitter of every length and width.
    pub noise: f64,
}

impl Default for HandParams {
    fn default() -> Self {
        let f = |length, base_width, splay, base| FingerParams {
            length,
            base_width,
            taper: 0.8,
            splay,
            base,
        };
        HandParams {
            thumb: f(100.0, 34.0, -38.0, (15.0, 85.0)),
            fingers: [
                f(115.0, 30.0, -8.0, (24.0, 14.0)),
                f(130.0, 32.0, -2.0, (61.0, 12.0)),
                f(120.0, 30.0, 4.0, (99.0, 14.0)),
                f(95.0, 26.0, 12.0, (136.0, 34.0)),
            ],
            palm_origin: (112.0, 200.0),
            palm_width: 160.0,
            palm_height: 160.0,
            palm_corner: 24.0,
            wrist_width: 110.0,
            wrist_height: 60.0,
            rotation: 0.0,
            noise: 0.02,
        }
    }
}

impl HandParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::ParamsOutOfRange(what.to_string()));
        for f in std::iter::once(&self.thumb).chain(&self.fingers) {
            if !(f.length > 0.0 && f.base_width > 0.0) {
                return bad("finger lengths and widths must be positive");
            }
            if !(f.taper > 0.0 && f.taper <= 1.5) {
                return bad("taper must lie in (0, 1.5]");
            }
            if !f.splay.is_finite() || !f.base.0.is_finite() || !f.base.1.is_finite() {
                return bad("finger placement must be finite");
            }
        }
        if !(self.palm_width > 0.0
            && self.palm_height > 0.0
            && self.wrist_width > 0.0
            && self.wrist_height > 0.0)
        {
            return bad("palm and wrist dimensions must be positive");
        }
        if !(self.palm_corner >= 0.0
            && 2.0 * self.palm_corner <= self.palm_width.min(self.palm_height))
        {
            return bad("palm corner radius out of range");
        }
        if !(0.0..=0.2).contains(&self.noise) {
            return bad("noise scale must lie in [0, 0.2]");
        }
        if self.rotation.is_nan() || self.rotation.abs() > 90.0 {
            return bad("rotation must lie in [-90, 90]");
        }
        Ok(())
    }

    /// The geometry actually drawn for one sample: lengths and widths scaled
    /// by `1 + noise·N(0,1)`, finger splay jittered by `noise·50` degrees
    /// and the whole hand shifted by up to `noise·250` pixels.
    pub fn jittered(&self, rng: &mut impl Rng) -> HandParams {
        let mut p = self.clone();
        let s = self.noise;
        let scale = |rng: &mut dyn rand::RngCore| {
            let z: f64 = StandardNormal.sample(rng);
            (1.0 + s * z).max(0.5)
        };
        for f in std::iter::once(&mut p.thumb).chain(p.fingers.iter_mut()) {
            f.length *= scale(rng);
            f.base_width *= scale(rng);
            let z: f64 = StandardNormal.sample(rng);
            f.splay += s * 50.0 * z;
        }
        p.palm_width *= scale(rng);
        p.palm_height *= scale(rng);
        let (dx, dy): (f64, f64) = (StandardNormal.sample(rng), StandardNormal.sample(rng));
        p.palm_origin.0 += s * 250.0 * dx;
        p.palm_origin.1 += s * 250.0 * dy;
        p
    }
}

struct Capsule {
    base: (f64, f64),
    dir: (f64, f64),
    length: f64,
    half_base: f64,
    half_tip: f64,
}

impl Capsule {
    fn new(palm: (f64, f64), f: &FingerParams) -> Capsule {
        let a = f.splay.to_radians();
        Capsule {
            base: (palm.0 + f.base.0, palm.1 + f.base.1),
            dir: (a.sin(), -a.cos()),
            length: f.length,
            half_base: f.base_width / 2.0,
            half_tip: f.base_width * f.taper / 2.0,
        }
    }

    fn contains(&self, x: f64, y: f64) -> bool {
        let (px, py) = (x - self.base.0, y - self.base.1);
        let t = px * self.dir.0 + py * self.dir.1;
        if t < 0.0 {
            return false;
        }
        if t <= self.length {
            let d = (px * self.dir.1 - py * self.dir.0).abs();
            return d <= self.half_base + (self.half_tip - self.half_base) * t / self.length;
        }
        let (tx, ty) = (px - self.dir.0 * self.length, py - self.dir.1 * self.length);
        tx * tx + ty * ty <= self.half_tip * self.half_tip
    }
}

/// Point-in-hand test on the unrotated canvas.
struct Silhouette {
    palm: (f64, f64, f64, f64, f64),
    wrist: (f64, f64, f64, f64),
    fingers: Vec<Capsule>,
}

impl Silhouette {
    fn new(p: &HandParams) -> Silhouette {
        let (x0, y0) = p.palm_origin;
        let cx = x0 + p.palm_width / 2.0;
        let bottom = y0 + p.palm_height;
        let fingers = std::iter::once(&p.thumb)
            .chain(&p.fingers)
            .map(|f| Capsule::new(p.palm_origin, f))
            .collect();
        Silhouette {
            palm: (x0, y0, x0 + p.palm_width, bottom, p.palm_corner),
            wrist: (
                cx - p.wrist_width / 2.0,
                bottom - p.palm_corner,
                cx + p.wrist_width / 2.0,
                bottom + p.wrist_height,
            ),
            fingers,
        }
    }

    fn contains(&self, x: f64, y: f64) -> bool {
        let (x0, y0, x1, y1, r) = self.palm;
        if x >= x0 && x <= x1 && y >= y0 && y <= y1 {
            // rounded corners
            let qx = if x < x0 + r {
                x0 + r
            } else if x > x1 - r {
                x1 - r
            } else {
                x
            };
            let qy = if y < y0 + r {
                y0 + r
            } else if y > y1 - r {
                y1 - r
            } else {
                y
            };
            if (x - qx).powi(2) + (y - qy).powi(2) <= r * r {
                return true;
            }
        }
        let (wx0, wy0, wx1, wy1) = self.wrist;
        if x >= wx0 && x <= wx1 && y >= wy0 && y <= wy1 {
            return true;
        }
        self.fingers.iter().any(|c| c.contains(x, y))
    }
}

/// Renders one sample of the hand described by `params`.
///
/// The sample draws its own jitter, hand intensity (200±10) and background
/// noise (uniform in [0, 40]) from `seed`; rendering is deterministic per
/// `(params, seed)`.
pub fn synth_hand(params: &HandParams, seed: u64) -> Result<GrayImage> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let geometry = params.jittered(&mut rng);
    let shape = Silhouette::new(&geometry);
    let level: u8 = rng.gen_range(190..=210);
    let (cx, cy) = (CANVAS_WIDTH as f64 / 2.0, CANVAS_HEIGHT as f64 / 2.0);
    let (s, c) = params.rotation.to_radians().sin_cos();
    let mut img = GrayImage::new(CANVAS_WIDTH, CANVAS_HEIGHT);
    for y in 0..CANVAS_HEIGHT {
        for x in 0..CANVAS_WIDTH {
            // inverse rotation back onto the unrotated hand
            let (dx, dy) = (x as f64 - cx, y as f64 - cy);
            let (ux, uy) = (cx + c * dx + s * dy, cy - s * dx + c * dy);
            let v = if shape.contains(ux, uy) {
                level
            } else {
                rng.gen_range(0..=40)
            };
            img.set(x, y, v);
        }
    }
    Ok(img)
}

/// Draws the parameters of one synthetic subject around the defaults:
/// finger lengths and widths ±15%, palm ±10%, splay ±3°.
pub fn random_subject(rng: &mut impl Rng, noise: f64) -> HandParams {
    let mut p = HandParams {
        noise,
        ..HandParams::default()
    };
    for f in std::iter::once(&mut p.thumb).chain(p.fingers.iter_mut()) {
        f.length *= rng.gen_range(0.85..1.15);
        f.base_width *= rng.gen_range(0.85..1.15);
        f.taper = rng.gen_range(0.72..0.88);
        f.splay += rng.gen_range(-3.0..3.0);
    }
    p.palm_width *= rng.gen_range(0.9..1.1);
    p.palm_height *= rng.gen_range(0.9..1.1);
    // keep finger bases on the (resized) palm top
    let sx = p.palm_width / HandParams::default().palm_width;
    for f in p.fingers.iter_mut() {
        f.base.0 *= sx;
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rendering_is_deterministic() {
        let p = HandParams::default();
        assert_eq!(synth_hand(&p, 5).unwrap(), synth_hand(&p, 5).unwrap());
        assert_ne!(synth_hand(&p, 5).unwrap(), synth_hand(&p, 6).unwrap());
    }

    #[test]
    fn intensities_are_bimodal() {
        let img = synth_hand(&HandParams::default(), 1).unwrap();
        assert!(img
            .pixels()
            .iter()
            .all(|&v| v <= 40 || (190..=210).contains(&v)));
        let bright = img.pixels().iter().filter(|&&v| v > 100).count();
        assert!(bright > 20_000 && bright < 80_000, "{bright}");
    }

    #[test]
    fn out_of_range_noise_is_rejected() {
        let p = HandParams {
            noise: 0.3,
            ..HandParams::default()
        };
        assert!(matches!(synth_hand(&p, 0), Err(Error::ParamsOutOfRange(_))));
    }

    #[test]
    fn capsule_tip_is_round() {
        let c = Capsule::new(
            (0.0, 0.0),
            &FingerParams {
                length: 10.0,
                base_width: 4.0,
                taper: 1.0,
                splay: 0.0,
                base: (0.0, 20.0),
            },
        );
        assert!(c.contains(0.0, 8.5));
        assert!(c.contains(1.9, 15.0));
        assert!(!c.contains(2.1, 15.0));
        assert!(!c.contains(1.9, 8.5));
    }
}
