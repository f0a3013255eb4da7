use super::moments::{hand_moments, orientation_angle};
use super::{BinaryImage, GrayImage};

/// Rotation (degrees, image coordinates) that brings a major axis at
/// `axis_angle` (as returned by `orientation_angle`) onto the vertical,
/// choosing the smaller of the two possible turns.
pub fn upright_rotation(axis_angle: f64) -> f64 {
    if axis_angle >= 0.0 {
        90.0 - axis_angle
    } else {
        -90.0 - axis_angle
    }
}

/// Geometry shared by the gray and binary rotations: rotation about
/// `center`, output canvas enlarged to hold the whole rotated source.
#[derive(Debug, Clone, Copy)]
struct Frame {
    cos: f64,
    sin: f64,
    center: (f64, f64),
    out_center: (f64, f64),
    out_w: usize,
    out_h: usize,
}

impl Frame {
    fn new(width: usize, height: usize, center: (f64, f64), degrees: f64) -> Frame {
        let (sin, cos) = if degrees == 0.0 {
            (0.0, 1.0)
        } else {
            degrees.to_radians().sin_cos()
        };
        let corners = [
            (0.0, 0.0),
            (width as f64 - 1.0, 0.0),
            (0.0, height as f64 - 1.0),
            (width as f64 - 1.0, height as f64 - 1.0),
        ];
        let (mut x0, mut y0, mut x1, mut y1) = (f64::MAX, f64::MAX, f64::MIN, f64::MIN);
        for (x, y) in corners {
            let (dx, dy) = (x - center.0, y - center.1);
            let (rx, ry) = (cos * dx - sin * dy, sin * dx + cos * dy);
            x0 = x0.min(rx);
            y0 = y0.min(ry);
            x1 = x1.max(rx);
            y1 = y1.max(ry);
        }
        // keep the canvas shift integral so that an identity rotation is exact
        let ox = center.0 - (x0 + center.0).floor();
        let oy = center.1 - (y0 + center.1).floor();
        Frame {
            cos,
            sin,
            center,
            out_center: (ox, oy),
            out_w: (x1 + ox).ceil() as usize + 1,
            out_h: (y1 + oy).ceil() as usize + 1,
        }
    }

    /// Source coordinates of output pixel `(u, v)`.
    #[inline]
    fn source(&self, u: usize, v: usize) -> (f64, f64) {
        let (dx, dy) = (u as f64 - self.out_center.0, v as f64 - self.out_center.1);
        (
            self.center.0 + self.cos * dx + self.sin * dy,
            self.center.1 - self.sin * dx + self.cos * dy,
        )
    }
}

/// Rotates `image` by `degrees` about `center` with bilinear sampling;
/// pixels mapping outside the source are 0.
pub fn rotate_gray(image: &GrayImage, center: (f64, f64), degrees: f64) -> GrayImage {
    let f = Frame::new(image.width(), image.height(), center, degrees);
    rotate_gray_in(image, &f)
}

fn rotate_gray_in(image: &GrayImage, f: &Frame) -> GrayImage {
    let (w, h) = (image.width() as f64, image.height() as f64);
    let mut out = GrayImage::new(f.out_w, f.out_h);
    for v in 0..f.out_h {
        for u in 0..f.out_w {
            let (sx, sy) = f.source(u, v);
            if sx < -0.5 || sy < -0.5 || sx > w - 0.5 || sy > h - 0.5 {
                continue;
            }
            let (sx, sy) = (sx.clamp(0.0, w - 1.0), sy.clamp(0.0, h - 1.0));
            let (x0, y0) = (sx.floor() as usize, sy.floor() as usize);
            let (x1, y1) = (
                (x0 + 1).min(image.width() - 1),
                (y0 + 1).min(image.height() - 1),
            );
            let (fx, fy) = (sx - x0 as f64, sy - y0 as f64);
            let p = |x: usize, y: usize| image.get(x, y) as f64;
            let val = p(x0, y0) * (1.0 - fx) * (1.0 - fy)
                + p(x1, y0) * fx * (1.0 - fy)
                + p(x0, y1) * (1.0 - fx) * fy
                + p(x1, y1) * fx * fy;
            out.set(u, v, val.round().clamp(0.0, 255.0) as u8);
        }
    }
    out
}

/// Rotates a mask by `degrees` about `center`; each output pixel takes the
/// majority of nine nearest-neighbor subsamples, so the result stays binary.
pub fn rotate_binary(image: &BinaryImage, center: (f64, f64), degrees: f64) -> BinaryImage {
    let f = Frame::new(image.width(), image.height(), center, degrees);
    rotate_binary_in(image, &f)
}

fn rotate_binary_in(image: &BinaryImage, f: &Frame) -> BinaryImage {
    // majority of a 3x3 grid of nearest-neighbor subsamples per output pixel;
    // plain NN skews the moments of thin shapes by over half a degree
    const OFF: [f64; 3] = [-1.0 / 3.0, 0.0, 1.0 / 3.0];
    let mut out = BinaryImage::new(f.out_w, f.out_h);
    for v in 0..f.out_h {
        for u in 0..f.out_w {
            let (sx, sy) = f.source(u, v);
            let mut hits = 0;
            for dv in OFF {
                for du in OFF {
                    let x = sx + f.cos * du + f.sin * dv;
                    let y = sy - f.sin * du + f.cos * dv;
                    hits += usize::from(image.get_signed(x.round() as isize, y.round() as isize));
                }
            }
            if hits >= 5 {
                out.set(u, v, true);
            }
        }
    }
    out
}

/// Adjusts `rotation` until the re-measured axis of the rotated mask sits
/// close to vertical. A turn that moves the mask extremities by under half
/// a pixel leaves the raster unchanged, so the residual is a staircase in
/// the turn: step along it until its sign flips, then bisect.
pub fn settle_rotation(mask: &BinaryImage, center: (f64, f64), rotation: f64) -> f64 {
    const TOLERANCE: f64 = 0.25;
    let residual = |r: f64| {
        hand_moments(&rotate_binary(mask, center, r))
            .and_then(|m| orientation_angle(&m))
            .map(upright_rotation)
            .ok()
    };
    let Some(e) = residual(rotation) else {
        return rotation;
    };
    let mut best = (e.abs(), rotation);
    let (mut a, mut ea) = (rotation, e);
    let mut bracket = None;
    for _ in 0..6 {
        if best.0 <= TOLERANCE {
            return best.1;
        }
        let b = a + ea.signum() * ea.abs().max(TOLERANCE);
        let Some(eb) = residual(b) else { break };
        if eb.abs() < best.0 {
            best = (eb.abs(), b);
        }
        if eb.signum() != ea.signum() {
            bracket = Some((a, b, ea));
            break;
        }
        (a, ea) = (b, eb);
    }
    if let Some((mut lo, mut hi, elo)) = bracket {
        for _ in 0..8 {
            if best.0 <= TOLERANCE {
                break;
            }
            let mid = 0.5 * (lo + hi);
            let Some(em) = residual(mid) else { break };
            if em.abs() < best.0 {
                best = (em.abs(), mid);
            }
            if em.signum() == elo.signum() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
    }
    best.1
}

/// Rotates the grayscale hand and its mask together by `degrees` about
/// the mask centroid `center`, on a shared enlarged canvas.
pub fn rotate_upright(
    gray: &GrayImage,
    binary: &BinaryImage,
    center: (f64, f64),
    degrees: f64,
) -> (GrayImage, BinaryImage) {
    assert_eq!(
        (gray.width(), gray.height()),
        (binary.width(), binary.height())
    );
    let f = Frame::new(gray.width(), gray.height(), center, degrees);
    (rotate_gray_in(gray, &f), rotate_binary_in(binary, &f))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imaging::{hand_moments, orientation_angle};

    fn ellipse(w: usize, h: usize, a: f64, b: f64, tilt_deg: f64) -> BinaryImage {
        let (cx, cy) = (w as f64 / 2.0, h as f64 / 2.0);
        let (s, c) = tilt_deg.to_radians().sin_cos();
        let mut img = BinaryImage::new(w, h);
        for y in 0..h {
            for x in 0..w {
                let (dx, dy) = (x as f64 - cx, y as f64 - cy);
                let (u, v) = (c * dx + s * dy, -s * dx + c * dy);
                if (u / a).powi(2) + (v / b).powi(2) <= 1.0 {
                    img.set(x, y, true);
                }
            }
        }
        img
    }

    #[test]
    fn zero_rotation_is_identity() {
        let mut g = GrayImage::new(9, 7);
        for (i, y) in (0..7).enumerate() {
            g.set(3, y, 10 * i as u8 + 5);
        }
        let b = BinaryImage::from_points(9, 7, &[(1, 1), (4, 5)]);
        let (g2, b2) = rotate_upright(&g, &b, (4.3, 2.7), 0.0);
        assert_eq!(g2, g);
        assert_eq!(b2, b);
    }

    #[test]
    fn upright_rotation_choices() {
        assert_eq!(upright_rotation(90.0), 0.0);
        assert_eq!(upright_rotation(70.0), 20.0);
        assert_eq!(upright_rotation(-70.0), -20.0);
        assert_eq!(upright_rotation(0.0), 90.0);
    }

    #[test]
    fn rotated_ellipse_becomes_vertical() {
        let img = ellipse(120, 120, 45.0, 15.0, 30.0);
        let m = hand_moments(&img).unwrap();
        let theta = orientation_angle(&m).unwrap();
        assert!((theta - 30.0).abs() < 0.5);
        let rot = rotate_binary(&img, m.centroid, upright_rotation(theta));
        let theta2 = orientation_angle(&hand_moments(&rot).unwrap()).unwrap();
        assert!(90.0 - theta2.abs() <= 0.5, "theta after = {theta2}");
    }

    #[test]
    fn settling_escapes_a_stalled_turn() {
        // thin ellipse just off vertical: the direct turn is too small to
        // change the raster, so the axis stays where it was
        let img = ellipse(200, 200, 40.0, 8.0, 90.703);
        let m = hand_moments(&img).unwrap();
        let rot = upright_rotation(orientation_angle(&m).unwrap());
        let after = |r| {
            orientation_angle(&hand_moments(&rotate_binary(&img, m.centroid, r)).unwrap()).unwrap()
        };
        assert!(upright_rotation(after(rot)).abs() > 0.5);
        let settled = settle_rotation(&img, m.centroid, rot);
        assert!(upright_rotation(after(settled)).abs() <= 0.25);
    }
}
