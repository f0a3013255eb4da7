use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::components::{fill_holes, label_components, largest_component, Component};
use super::contour::trace_contour;
use super::morphology::{dilate, erode};
use super::profiles::Profiles;
use super::BinaryImage;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FingerLabel {
    Thumb,
    Index,
    Middle,
    Ring,
    Little,
}

impl FingerLabel {
    pub const ALL: [FingerLabel; 5] = [
        FingerLabel::Thumb,
        FingerLabel::Index,
        FingerLabel::Middle,
        FingerLabel::Ring,
        FingerLabel::Little,
    ];

    /// The four fingers used for features, in feature-vector order.
    pub const FOUR: [FingerLabel; 4] = [
        FingerLabel::Index,
        FingerLabel::Middle,
        FingerLabel::Ring,
        FingerLabel::Little,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FingerLabel::Thumb => "thumb",
            FingerLabel::Index => "index",
            FingerLabel::Middle => "middle",
            FingerLabel::Ring => "ring",
            FingerLabel::Little => "little",
        }
    }
}

impl fmt::Display for FingerLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Which hand the images show. Decides the left-to-right label order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HandSide {
    /// Thumb leftmost in the upright image.
    #[default]
    Right,
    /// Thumb rightmost.
    Left,
}

impl FromStr for HandSide {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "right" => Ok(HandSide::Right),
            "left" => Ok(HandSide::Left),
            other => Err(Error::InvalidConfig(format!("unknown hand side {other:?}"))),
        }
    }
}

/// One segmented finger: a cropped mask, its outer contour (in crop
/// coordinates) and the crop offset in the upright hand image.
#[derive(Debug, Clone, PartialEq)]
pub struct FingerShape {
    pub label: FingerLabel,
    pub mask: BinaryImage,
    pub contour: Vec<(usize, usize)>,
    pub origin: (usize, usize),
}

impl FingerShape {
    /// Wraps a mask, tracing its contour. The mask should hold a single
    /// component.
    pub fn from_mask(label: FingerLabel, mask: BinaryImage, origin: (usize, usize)) -> Self {
        let contour = trace_contour(&mask);
        FingerShape {
            label,
            mask,
            contour,
            origin,
        }
    }
}

fn sorted_segments(image: &BinaryImage) -> Vec<Component> {
    let mut comps = label_components(image);
    comps.sort_by_key(|c| {
        let (x, y) = c.topmost();
        (x, y)
    });
    comps
}

/// Keeps the pixels of `seg` at or above `row`, then its largest piece.
fn cut_segment(seg: &Component, row: usize, w: usize, h: usize) -> Vec<(usize, usize)> {
    let kept: Vec<_> = seg
        .pixels
        .iter()
        .copied()
        .filter(|&(_, y)| y <= row)
        .collect();
    largest_component(&BinaryImage::from_points(w, h, &kept))
        .map(|img| img.points())
        .unwrap_or_default()
}

/// Drops the part of a horizontal run on the bottom row that sticks out
/// past the row above, away from the finger (towards -x for a left
/// profile, +x for a right one).
fn trim_base_run(points: &mut Vec<(usize, usize)>, left_profile: bool) {
    let Some(bottom) = points.iter().map(|p| p.1).max() else {
        return;
    };
    let above: Vec<usize> = points
        .iter()
        .filter(|p| p.1 + 1 == bottom)
        .map(|p| p.0)
        .collect();
    if above.is_empty() {
        return;
    }
    if left_profile {
        let lim = above.iter().min().expect("nonempty").saturating_sub(1);
        points.retain(|&(x, y)| y != bottom || x >= lim);
    } else {
        let lim = above.iter().max().expect("nonempty") + 1;
        points.retain(|&(x, y)| y != bottom || x <= lim);
    }
}

fn bottom_pixel(points: &[(usize, usize)], prefer_right: bool) -> (usize, usize) {
    *points
        .iter()
        .max_by_key(|&&(x, y)| {
            (
                y,
                if prefer_right {
                    x as isize
                } else {
                    -(x as isize)
                },
            )
        })
        .expect("segment is nonempty")
}

fn closed_finger(
    left: &Component,
    right: &Component,
    w: usize,
    h: usize,
) -> Option<(BinaryImage, (usize, usize))> {
    // level the base at the higher of the two profile ends
    let base = left.bbox.3.min(right.bbox.3);
    let mut lp = cut_segment(left, base, w, h);
    let mut rp = cut_segment(right, base, w, h);
    trim_base_run(&mut lp, true);
    trim_base_run(&mut rp, false);
    if lp.is_empty() || rp.is_empty() {
        return None;
    }

    let mut outline = BinaryImage::from_points(w, h, &lp);
    for &(x, y) in &rp {
        outline.set(x, y, true);
    }
    // tip gap: top of the right profile to the nearest left-profile pixel
    let r_top = *rp.iter().min_by_key(|&&(x, y)| (y, x)).expect("nonempty");
    let l_near = *lp
        .iter()
        .min_by_key(|&&(x, y)| {
            let (dx, dy) = (x as i64 - r_top.0 as i64, y as i64 - r_top.1 as i64);
            dx * dx + dy * dy
        })
        .expect("nonempty");
    outline.draw_line(l_near, r_top);
    outline.draw_line(bottom_pixel(&lp, true), bottom_pixel(&rp, false));

    let (x0, y0, x1, y1) = outline.bounding_box()?;
    // one pixel of background around the outline so the outside is reachable
    let (cw, ch) = (x1 - x0 + 3, y1 - y0 + 3);
    let mut padded = BinaryImage::new(cw, ch);
    for (x, y) in outline.points() {
        padded.set(x - x0 + 1, y - y0 + 1, true);
    }
    // opening strips one-pixel spurs left by valley runs and the tip line
    let filled = largest_component(&dilate(&erode(&fill_holes(&padded))))?;
    let (bx0, by0, bx1, by1) = filled.bounding_box()?;
    let mask = filled.crop(bx0, by0, bx1, by1);
    Some((mask, (x0 + bx0 - 1, y0 + by0 - 1)))
}

/// Pairs left and right profile segments by the x coordinate of their
/// topmost pixel and closes each pair into a filled finger mask.
///
/// Returns five fingers in left-to-right order with labels assigned for
/// `side`. Both profile images must hold exactly five components.
pub fn extract_fingers(profiles: &Profiles, side: HandSide) -> Result<Vec<FingerShape>> {
    let (w, h) = (profiles.left.width(), profiles.left.height());
    let lefts = sorted_segments(&profiles.left);
    let rights = sorted_segments(&profiles.right);
    for n in [lefts.len(), rights.len()] {
        if n != 5 {
            return Err(Error::Segmentation { count: n });
        }
    }
    let mut labels = FingerLabel::ALL;
    if side == HandSide::Left {
        labels.reverse();
    }
    let mut out = Vec::with_capacity(5);
    for ((l, r), label) in lefts.iter().zip(&rights).zip(labels) {
        let (mask, origin) = closed_finger(l, r, w, h).ok_or(Error::Segmentation { count: 5 })?;
        out.push(FingerShape::from_mask(label, mask, origin));
    }
    Ok(out)
}

/// Index, middle, ring and little finger, in that order.
pub fn drop_thumb(fingers: Vec<FingerShape>) -> Result<Vec<FingerShape>> {
    let mut slots: [Option<FingerShape>; 5] = Default::default();
    for f in fingers {
        let i = f.label as usize;
        if slots[i].is_some() {
            return Err(Error::MissingFinger(format!("duplicate {} label", f.label)));
        }
        slots[i] = Some(f);
    }
    FingerLabel::FOUR
        .iter()
        .map(|&l| {
            slots[l as usize]
                .take()
                .ok_or_else(|| Error::MissingFinger(l.to_string()))
        })
        .collect()
}
