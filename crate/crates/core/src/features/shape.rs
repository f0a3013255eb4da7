//! The 13 per-finger measurements.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::{BinaryImage, FingerShape};

pub const FEATURES_PER_FINGER: usize = 13;

type Point = (f64, f64);

/// Short names of the per-finger features, in vector order.
pub const FEATURE_NAMES: [&str; FEATURES_PER_FINGER] = [
    "area", "solidity", "eqdiam", "major", "minor", "w1", "w2", "w3", "d1", "d2", "d3", "d4", "d5",
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FingerFeatures {
    pub area: f64,
    pub solidity: f64,
    pub equivalent_diameter: f64,
    pub major_axis: f64,
    pub minor_axis: f64,
    pub widths: [f64; 3],
    pub centroid_distances: [f64; 5],
}

impl FingerFeatures {
    pub fn compute(finger: &FingerShape) -> Result<FingerFeatures> {
        let (area, solidity, equivalent_diameter) = shape_scalars(finger)?;
        let (major_axis, minor_axis) = ellipse_axes(finger)?;
        Ok(FingerFeatures {
            area,
            solidity,
            equivalent_diameter,
            major_axis,
            minor_axis,
            widths: phalanx_widths(finger)?,
            centroid_distances: centroid_distances(finger)?,
        })
    }

    pub fn to_array(&self) -> [f64; FEATURES_PER_FINGER] {
        let mut v = [0.0; FEATURES_PER_FINGER];
        v[0] = self.area;
        v[1] = self.solidity;
        v[2] = self.equivalent_diameter;
        v[3] = self.major_axis;
        v[4] = self.minor_axis;
        v[5..8].copy_from_slice(&self.widths);
        v[8..13].copy_from_slice(&self.centroid_distances);
        v
    }
}

/// Row extents `(y, x_min, x_max)` of every nonempty row, top to bottom.
fn row_extents(mask: &BinaryImage) -> Vec<(usize, usize, usize)> {
    let mut out = Vec::new();
    for y in 0..mask.height() {
        let mut ext: Option<(usize, usize)> = None;
        for x in 0..mask.width() {
            if mask.get(x, y) {
                ext = Some(ext.map_or((x, x), |(a, _)| (a, x)));
            }
        }
        if let Some((a, b)) = ext {
            out.push((y, a, b));
        }
    }
    out
}

fn cross(o: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

/// Convex hull (monotone chain, counter-clockwise in a y-up frame) of a
/// point set; collinear points are dropped.
pub fn convex_hull(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.partial_cmp(b).expect("finite coordinates"));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut lower: Vec<(f64, f64)> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<(f64, f64)> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

pub fn polygon_area(poly: &[(f64, f64)]) -> f64 {
    let n = poly.len();
    let twice: f64 = (0..n)
        .map(|i| {
            let (a, b) = (poly[i], poly[(i + 1) % n]);
            a.0 * b.1 - b.0 * a.1
        })
        .sum();
    twice.abs() / 2.0
}

/// Area of the convex hull of the mask, each pixel taken as a unit square.
pub fn hull_area(mask: &BinaryImage) -> f64 {
    // the hull of all pixel squares is the hull of the row-extreme corners
    let mut corners = Vec::new();
    for (y, a, b) in row_extents(mask) {
        let (y0, y1) = (y as f64 - 0.5, y as f64 + 0.5);
        corners.extend([
            (a as f64 - 0.5, y0),
            (a as f64 - 0.5, y1),
            (b as f64 + 0.5, y0),
            (b as f64 + 0.5, y1),
        ]);
    }
    polygon_area(&convex_hull(&corners))
}

/// `(area, solidity, equivalent diameter)`.
pub fn shape_scalars(finger: &FingerShape) -> Result<(f64, f64, f64)> {
    let area = finger.mask.count() as f64;
    if area == 0.0 {
        return Err(Error::EmptyShape);
    }
    let solidity = (area / hull_area(&finger.mask)).min(1.0);
    Ok((area, solidity, (4.0 * area / std::f64::consts::PI).sqrt()))
}

/// Centroid and normalized central second moments relative to the mask's
/// bounding-box corner, so that translation leaves them bit-identical.
fn local_moments(mask: &BinaryImage) -> Result<(Point, (f64, f64, f64))> {
    let (x0, y0, _, _) = mask.bounding_box().ok_or(Error::EmptyShape)?;
    let pts: Vec<(f64, f64)> = mask
        .points()
        .into_iter()
        .map(|(x, y)| ((x - x0) as f64, (y - y0) as f64))
        .collect();
    let n = pts.len() as f64;
    let cx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let cy = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for &(x, y) in &pts {
        let (dx, dy) = (x - cx, y - cy);
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    Ok(((cx, cy), (sxx / n, syy / n, sxy / n)))
}

/// Major and minor axis of the ellipse with the same normalized second
/// moments as the mask (pixels counted as unit squares, hence the `1/12`).
pub fn ellipse_axes(finger: &FingerShape) -> Result<(f64, f64)> {
    let (_, (mxx, myy, mxy)) = local_moments(&finger.mask)?;
    let (a, b) = (mxx + 1.0 / 12.0, myy + 1.0 / 12.0);
    let root = ((a - b).powi(2) + 4.0 * mxy * mxy).sqrt();
    let l1 = (a + b + root) / 2.0;
    let l2 = ((a + b - root) / 2.0).max(0.0);
    Ok((4.0 * l1.sqrt(), 4.0 * l2.sqrt()))
}

/// Horizontal extents at 1/6, 1/2 and 5/6 of the finger height, measured
/// from the tip (the topmost row).
pub fn phalanx_widths(finger: &FingerShape) -> Result<[f64; 3]> {
    let rows = row_extents(&finger.mask);
    let (top, bottom) = match (rows.first(), rows.last()) {
        (Some(t), Some(b)) => (t.0, b.0),
        _ => return Err(Error::EmptyShape),
    };
    let height = (bottom - top + 1) as f64;
    let mut out = [0.0; 3];
    for (o, k) in out.iter_mut().zip([1.0 / 6.0, 0.5, 5.0 / 6.0]) {
        let target = top + ((k * height).floor() as usize).min(bottom - top);
        // nearest nonempty row; a single component has no empty rows inside
        let &(_, a, b) = rows
            .iter()
            .min_by_key(|r| r.0.abs_diff(target))
            .expect("nonempty");
        *o = (b - a + 1) as f64;
    }
    Ok(out)
}

/// Distances from the mask centroid to the points of the pixel outline at
/// arc lengths `0, L/5, …, 4L/5`, starting at the top-left corner of the
/// topmost (then leftmost) pixel and running clockwise.
///
/// The outline follows pixel edges, so it scales with the shape. Arc length
/// is measured on a copy smoothed over about a twentieth of the outline;
/// raw staircase steps would otherwise inflate diagonal runs differently
/// at each scale.
pub fn centroid_distances(finger: &FingerShape) -> Result<[f64; 5]> {
    let (x0, y0, _, _) = finger.mask.bounding_box().ok_or(Error::EmptyShape)?;
    let ((cx, cy), _) = local_moments(&finger.mask)?;
    let (cx, cy) = (cx + 0.5, cy + 0.5);
    let pts: Vec<(f64, f64)> = crack_outline(&finger.mask)
        .into_iter()
        .map(|(x, y)| ((x - x0 as isize) as f64, (y - y0 as isize) as f64))
        .collect();
    let n = pts.len();
    let win = (2 * (n / 40) + 1).max(3);
    let half = win / 2;
    let smooth: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let (sx, sy) = (0..win).fold((0.0, 0.0), |acc, k| {
                let p = pts[(i + n + k - half) % n];
                (acc.0 + p.0, acc.1 + p.1)
            });
            (sx / win as f64, sy / win as f64)
        })
        .collect();
    let step = |i: usize| {
        let (a, b) = (smooth[i], smooth[(i + 1) % n]);
        (b.0 - a.0).hypot(b.1 - a.1)
    };
    let mut cum = Vec::with_capacity(n + 1);
    cum.push(0.0);
    for i in 0..n {
        cum.push(cum[i] + step(i));
    }
    let total = cum[n];

    let mut out = [0.0; 5];
    for (k, o) in out.iter_mut().enumerate() {
        let s = k as f64 * total / 5.0;
        let j = (cum.partition_point(|&c| c <= s) - 1).min(n - 1);
        let seg = cum[j + 1] - cum[j];
        let t = if seg > 0.0 { (s - cum[j]) / seg } else { 0.0 };
        let (a, b) = (pts[j], pts[(j + 1) % n]);
        let (px, py) = (a.0 + t * (b.0 - a.0), a.1 + t * (b.1 - a.1));
        *o = (px - cx).hypot(py - cy);
    }
    Ok(out)
}

/// Corner points of the outer pixel-edge boundary of the component holding
/// the topmost-leftmost pixel, clockwise from that pixel's top-left corner.
/// At a diagonal pinch the walk turns away from the pixel it is circling,
/// so 8-connected pixels share one loop.
fn crack_outline(mask: &BinaryImage) -> Vec<(isize, isize)> {
    use std::collections::HashMap;
    let on = |x: isize, y: isize| mask.get_signed(x, y);
    let mut next: HashMap<(isize, isize), Vec<(isize, isize)>> = HashMap::new();
    let points = mask.points();
    for &(x, y) in &points {
        let (x, y) = (x as isize, y as isize);
        let edges = [
            (!on(x, y - 1), (x, y), (x + 1, y)),
            (!on(x + 1, y), (x + 1, y), (x + 1, y + 1)),
            (!on(x, y + 1), (x + 1, y + 1), (x, y + 1)),
            (!on(x - 1, y), (x, y + 1), (x, y)),
        ];
        for (open, a, b) in edges {
            if open {
                next.entry(a).or_default().push(b);
            }
        }
    }
    let Some(&(sx, sy)) = points.iter().min_by_key(|&&(x, y)| (y, x)) else {
        return Vec::new();
    };
    let start = (sx as isize, sy as isize);
    let mut out = vec![start];
    let (mut prev, mut cur) = (start, (start.0 + 1, start.1));
    while cur != start {
        out.push(cur);
        let cands = &next[&cur];
        let nxt = match cands.as_slice() {
            [only] => *only,
            _ => {
                let (dx, dy) = (cur.0 - prev.0, cur.1 - prev.1);
                let outward = (cur.0 + dy, cur.1 - dx);
                cands
                    .iter()
                    .copied()
                    .find(|&c| c == outward)
                    .unwrap_or(cands[0])
            }
        };
        (prev, cur) = (cur, nxt);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imaging::FingerLabel;

    fn shape(mask: BinaryImage) -> FingerShape {
        FingerShape::from_mask(FingerLabel::Index, mask, (0, 0))
    }

    fn rect(w: usize, h: usize, pad: usize) -> FingerShape {
        let mut m = BinaryImage::new(w + 2 * pad, h + 2 * pad);
        for y in pad..pad + h {
            for x in pad..pad + w {
                m.set(x, y, true);
            }
        }
        shape(m)
    }

    fn disc(r: f64) -> FingerShape {
        let n = (2.0 * r) as usize + 5;
        let c = n as f64 / 2.0;
        let mut m = BinaryImage::new(n, n);
        for y in 0..n {
            for x in 0..n {
                if (x as f64 - c).hypot(y as f64 - c) <= r {
                    m.set(x, y, true);
                }
            }
        }
        shape(m)
    }

    #[test]
    fn square_scalars() {
        let (a, s, d) = shape_scalars(&rect(10, 10, 2)).unwrap();
        assert_eq!(a, 100.0);
        assert_eq!(s, 1.0);
        assert!((d - 11.284).abs() < 1e-3);
    }

    #[test]
    fn empty_mask_is_an_error() {
        let f = shape(BinaryImage::new(3, 3));
        assert!(matches!(shape_scalars(&f), Err(Error::EmptyShape)));
        assert!(matches!(ellipse_axes(&f), Err(Error::EmptyShape)));
        assert!(matches!(phalanx_widths(&f), Err(Error::EmptyShape)));
        assert!(matches!(centroid_distances(&f), Err(Error::EmptyShape)));
    }

    #[test]
    fn disc_axes_and_distances() {
        let f = disc(30.0);
        let (ma, mi) = ellipse_axes(&f).unwrap();
        assert!((ma / 60.0 - 1.0).abs() < 0.02 && (mi / 60.0 - 1.0).abs() < 0.02);
        for d in centroid_distances(&f).unwrap() {
            assert!((d - 30.0).abs() <= 1.0, "{d}");
        }
    }

    #[test]
    fn rectangle_axes_closed_form() {
        let (ma, mi) = ellipse_axes(&rect(7, 19, 1)).unwrap();
        assert!((ma - 4.0 * (19.0f64 * 19.0 / 12.0).sqrt()).abs() < 1e-9);
        assert!((mi - 4.0 * (7.0f64 * 7.0 / 12.0).sqrt()).abs() < 1e-9);
    }

    #[test]
    fn constant_width_rectangle() {
        assert_eq!(phalanx_widths(&rect(20, 60, 3)).unwrap(), [20.0; 3]);
    }

    #[test]
    fn square_outline_distances() {
        // 41x41 square: edge outline of 164 unit steps from the top-left
        // corner, samples every 32.8 along it, centroid at (20.5, 20.5)
        let f = rect(41, 41, 1);
        let d = centroid_distances(&f).unwrap();
        let pts = [
            (0.0, 0.0),
            (32.8, 0.0),
            (41.0, 24.6),
            (24.6, 41.0),
            (0.0, 32.8),
        ];
        let want: Vec<f64> = pts
            .iter()
            .map(|&(x, y): &(f64, f64)| (x - 20.5).hypot(y - 20.5))
            .collect();
        assert_eq!(d[0], want[0]);
        for (got, want) in d.iter().zip(&want) {
            assert!((got - want).abs() < 0.5, "{got} vs {want}");
        }
        // the square's symmetry survives the smoothing
        assert!((d[1] - d[4]).abs() < 1e-9 && (d[2] - d[3]).abs() < 1e-9);
    }

    #[test]
    fn outline_walks_diagonal_pinches() {
        let m = BinaryImage::from_points(3, 3, &[(0, 0), (1, 1), (2, 2)]);
        let o = crack_outline(&m);
        assert_eq!(o.len(), 12);
        assert_eq!(o[0], (0, 0));
        assert_eq!(o[1], (1, 0));
    }

    #[test]
    fn translation_is_exact() {
        let a = rect(9, 23, 1);
        let b = rect(9, 23, 17);
        assert_eq!(
            FingerFeatures::compute(&a).unwrap(),
            FingerFeatures::compute(&b).unwrap()
        );
    }

    #[test]
    fn plus_shape_solidity() {
        // plus pentomino: hull is an octagon of area 7 around 5 unit squares
        let m = BinaryImage::from_points(5, 5, &[(2, 1), (1, 2), (2, 2), (3, 2), (2, 3)]);
        let (_, s, _) = shape_scalars(&shape(m)).unwrap();
        assert!((s - 5.0 / 7.0).abs() < 1e-12);
    }
}
