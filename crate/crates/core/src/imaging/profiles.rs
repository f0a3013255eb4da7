use serde::{Deserialize, Serialize};

use super::components::label_components;
use super::morphology::{bridge, close};
use super::{BinaryImage, GrayImage};
use crate::error::{Error, Result};

/// Which sign of the horizontal gradient marks a pixel in `L_BW`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GradientPolarity {
    /// Only bright-to-dark steps when moving right (right-hand edges of a
    /// bright object on a dark background).
    #[default]
    Falling,
    /// Any nonzero step.
    Both,
}

/// Left and right finger profile images.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Profiles {
    pub left: BinaryImage,
    pub right: BinaryImage,
}

/// `L_H(p, q) = η·(L(p, q) − L(p, q+1))`, truncated toward zero; pixels with
/// a nonzero value (of the selected sign) become foreground. The last column
/// has no right neighbor and is never marked.
pub fn gradient_mask(image: &GrayImage, eta: f64, polarity: GradientPolarity) -> BinaryImage {
    let (w, h) = (image.width(), image.height());
    let mut out = BinaryImage::new(w, h);
    for y in 0..h {
        for x in 0..w.saturating_sub(1) {
            let d = (eta * (image.get(x, y) as f64 - image.get(x + 1, y) as f64)).trunc();
            let on = match polarity {
                GradientPolarity::Falling => d > 0.0,
                GradientPolarity::Both => d != 0.0,
            };
            if on {
                out.set(x, y, true);
            }
        }
    }
    out
}

/// Profiles before any morphology: `LP = L_R ∖ L_BW`, `RP = L_R ⊕ LP`.
pub fn split_profiles_raw(contour: &BinaryImage, gradient: &BinaryImage) -> Profiles {
    let left = contour.minus(gradient);
    let right = contour.xor(&left);
    Profiles { left, right }
}

/// Raw split followed by cleanup: closing and bridging on both profiles,
/// then removal of components smaller than `min_segment` pixels.
pub fn split_profiles(
    contour: &BinaryImage,
    gradient: &BinaryImage,
    min_segment: usize,
) -> Profiles {
    let raw = split_profiles_raw(contour, gradient);
    let left = bridge(&close(&raw.left));
    let right = bridge(&close(&raw.right));
    Profiles {
        left: drop_small(&left, min_segment),
        right: drop_small(&right, min_segment),
    }
}

pub(crate) fn drop_small(image: &BinaryImage, min_size: usize) -> BinaryImage {
    let mut out = BinaryImage::new(image.width(), image.height());
    for c in label_components(image) {
        if c.len() >= min_size {
            for &(x, y) in &c.pixels {
                out.set(x, y, true);
            }
        }
    }
    out
}

/// Clears every profile pixel below `cut_row` and drops remnants smaller
/// than `min_segment`.
///
/// Fails with `CutAboveFingers` when a segment reaching into the upper half
/// of the profiles' vertical extent disappears completely, or when nothing
/// is left.
pub fn trim_wrist(profiles: &Profiles, cut_row: usize, min_segment: usize) -> Result<Profiles> {
    let extent = [&profiles.left, &profiles.right]
        .iter()
        .filter_map(|p| p.bounding_box())
        .fold(None, |acc: Option<(usize, usize)>, (_, y0, _, y1)| {
            Some(acc.map_or((y0, y1), |(a, b)| (a.min(y0), b.max(y1))))
        });
    let Some((top, bottom)) = extent else {
        return Err(Error::CutAboveFingers { row: cut_row });
    };
    let mid = (top + bottom) / 2;

    let mut trimmed = Vec::with_capacity(2);
    for side in [&profiles.left, &profiles.right] {
        for c in label_components(side) {
            if c.len() >= min_segment && c.bbox.1 <= mid && c.bbox.1 > cut_row {
                return Err(Error::CutAboveFingers { row: cut_row });
            }
        }
        let mut out = side.clone();
        for y in (cut_row + 1).min(side.height())..side.height() {
            for x in 0..side.width() {
                out.set(x, y, false);
            }
        }
        trimmed.push(drop_small(&out, min_segment));
    }
    let right = trimmed.pop().expect("two sides");
    let left = trimmed.pop().expect("two sides");
    if left.is_empty() && right.is_empty() {
        return Err(Error::CutAboveFingers { row: cut_row });
    }
    Ok(Profiles { left, right })
}
