//! Hand normalization and four-finger segmentation.
//!
//! The stages follow the classic contact-free hand pipeline: denoise and
//! threshold the grayscale photograph, measure the silhouette's moments,
//! rotate it upright, split the hand contour into left and right finger
//! profiles with a horizontal gradient, cut off the wrist and pair the
//! profiles back into one filled mask per finger.

mod components;
mod contour;
mod fingers;
pub mod io;
mod moments;
mod morphology;
mod pipeline;
mod profiles;
mod rotate;
mod threshold;

pub use components::{fill_holes, label_components, largest_component, Component};
pub use contour::{contour_image, trace_contour};
pub use fingers::{drop_thumb, extract_fingers, FingerLabel, FingerShape, HandSide};
pub use moments::{hand_moments, orientation_angle, MomentSet};
pub use morphology::{bridge, close, dilate, erode};
pub use pipeline::{segment_hand, DebugStages, SegmentationConfig};
pub use profiles::{
    gradient_mask, split_profiles, split_profiles_raw, trim_wrist, GradientPolarity, Profiles,
};
pub use rotate::{rotate_binary, rotate_gray, rotate_upright, settle_rotation, upright_rotation};
pub use threshold::{binarize_hand, median_filter, otsu_threshold, otsu_threshold_from_histogram};

/// 8-bit grayscale image, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize) -> Self {
        Self::filled(width, height, 0)
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be positive");
        GrayImage {
            width,
            height,
            pixels: vec![value; width * height],
        }
    }

    pub fn from_raw(width: usize, height: usize, pixels: Vec<u8>) -> Option<Self> {
        (width > 0 && height > 0 && pixels.len() == width * height).then_some(GrayImage {
            width,
            height,
            pixels,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: u8) {
        self.pixels[y * self.width + x] = v;
    }

    /// Copy with every pixel outside `mask` set to zero.
    pub fn masked(&self, mask: &BinaryImage) -> GrayImage {
        assert_eq!((self.width, self.height), (mask.width, mask.height));
        let pixels = self
            .pixels
            .iter()
            .zip(&mask.mask)
            .map(|(&p, &m)| if m { p } else { 0 })
            .collect();
        GrayImage {
            width: self.width,
            height: self.height,
            pixels,
        }
    }
}

/// Binary image, row-major, `true` = foreground.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryImage {
    width: usize,
    height: usize,
    mask: Vec<bool>,
}

impl BinaryImage {
    pub fn new(width: usize, height: usize) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be positive");
        BinaryImage {
            width,
            height,
            mask: vec![false; width * height],
        }
    }

    pub fn from_raw(width: usize, height: usize, mask: Vec<bool>) -> Option<Self> {
        (width > 0 && height > 0 && mask.len() == width * height).then_some(BinaryImage {
            width,
            height,
            mask,
        })
    }

    /// Builds a `width`×`height` mask with the given pixels set.
    pub fn from_points(width: usize, height: usize, points: &[(usize, usize)]) -> Self {
        let mut img = BinaryImage::new(width, height);
        for &(x, y) in points {
            img.set(x, y, true);
        }
        img
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[bool] {
        &self.mask
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.mask[y * self.width + x]
    }

    /// Like [`get`](Self::get) but treats out-of-bounds coordinates as background.
    #[inline]
    pub fn get_signed(&self, x: isize, y: isize) -> bool {
        x >= 0
            && y >= 0
            && (x as usize) < self.width
            && (y as usize) < self.height
            && self.mask[y as usize * self.width + x as usize]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: bool) {
        self.mask[y * self.width + x] = v;
    }

    pub fn count(&self) -> usize {
        self.mask.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.mask.iter().any(|&b| b)
    }

    /// Foreground coordinates in row-major order.
    pub fn points(&self) -> Vec<(usize, usize)> {
        self.mask
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| (i % self.width, i / self.width))
            .collect()
    }

    /// Inclusive bounding box `(min_x, min_y, max_x, max_y)`.
    pub fn bounding_box(&self) -> Option<(usize, usize, usize, usize)> {
        let mut bb: Option<(usize, usize, usize, usize)> = None;
        for (i, _) in self.mask.iter().enumerate().filter(|(_, &b)| b) {
            let (x, y) = (i % self.width, i / self.width);
            bb = Some(match bb {
                None => (x, y, x, y),
                Some((x0, y0, x1, y1)) => (x0.min(x), y0.min(y), x1.max(x), y1.max(y)),
            });
        }
        bb
    }

    fn zip_with(&self, other: &BinaryImage, f: impl Fn(bool, bool) -> bool) -> BinaryImage {
        assert_eq!(
            (self.width, self.height),
            (other.width, other.height),
            "binary images must share dimensions"
        );
        BinaryImage {
            width: self.width,
            height: self.height,
            mask: self
                .mask
                .iter()
                .zip(&other.mask)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn and(&self, other: &BinaryImage) -> BinaryImage {
        self.zip_with(other, |a, b| a && b)
    }

    pub fn or(&self, other: &BinaryImage) -> BinaryImage {
        self.zip_with(other, |a, b| a || b)
    }

    pub fn xor(&self, other: &BinaryImage) -> BinaryImage {
        self.zip_with(other, |a, b| a ^ b)
    }

    /// Set difference `self ∖ other`.
    pub fn minus(&self, other: &BinaryImage) -> BinaryImage {
        self.zip_with(other, |a, b| a && !b)
    }

    pub fn not(&self) -> BinaryImage {
        BinaryImage {
            width: self.width,
            height: self.height,
            mask: self.mask.iter().map(|&b| !b).collect(),
        }
    }

    /// Crops the inclusive rectangle `(x0, y0)..=(x1, y1)`.
    pub fn crop(&self, x0: usize, y0: usize, x1: usize, y1: usize) -> BinaryImage {
        let (w, h) = (x1 - x0 + 1, y1 - y0 + 1);
        let mut out = BinaryImage::new(w, h);
        for y in 0..h {
            for x in 0..w {
                out.set(x, y, self.get(x0 + x, y0 + y));
            }
        }
        out
    }

    /// Sets every pixel on the straight segment between two points (inclusive).
    pub fn draw_line(&mut self, from: (usize, usize), to: (usize, usize)) {
        let (x0, y0) = (from.0 as isize, from.1 as isize);
        let (x1, y1) = (to.0 as isize, to.1 as isize);
        let (dx, dy) = ((x1 - x0).abs(), -(y1 - y0).abs());
        let (sx, sy) = (if x0 < x1 { 1 } else { -1 }, if y0 < y1 { 1 } else { -1 });
        let (mut x, mut y, mut err) = (x0, y0, dx + dy);
        loop {
            if x >= 0 && y >= 0 && (x as usize) < self.width && (y as usize) < self.height {
                self.set(x as usize, y as usize, true);
            }
            if x == x1 && y == y1 {
                break;
            }
            let e2 = 2 * err;
            if e2 >= dy {
                err += dy;
                x += sx;
            }
            if e2 <= dx {
                err += dx;
                y += sy;
            }
        }
    }
}
