use std::path::Path;

use serde::{Deserialize, Serialize};

use super::components::{fill_holes, largest_component};
use super::contour::contour_image;
use super::fingers::{extract_fingers, FingerShape, HandSide};
use super::io::{save_binary, save_gray};
use super::moments::{hand_moments, orientation_angle};
use super::profiles::{
    gradient_mask, split_profiles, split_profiles_raw, trim_wrist, GradientPolarity,
};
use super::rotate::{rotate_upright, settle_rotation, upright_rotation};
use super::threshold::{binarize_hand, median_filter};
use super::{BinaryImage, GrayImage};
use crate::error::{Error, Result};

/// Knobs of the segmentation pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SegmentationConfig {
    pub median_window: usize,
    /// Gradient scale `η`.
    pub eta: f64,
    /// Wrist cut below the centroid, as a fraction of the hand height.
    pub wrist_offset: f64,
    pub polarity: GradientPolarity,
    /// Profile components smaller than this (pixels) are discarded as noise.
    pub min_segment: usize,
    pub hand: HandSide,
}

impl Default for SegmentationConfig {
    fn default() -> Self {
        SegmentationConfig {
            median_window: 3,
            eta: 0.5,
            wrist_offset: 0.10,
            polarity: GradientPolarity::Falling,
            min_segment: 30,
            hand: HandSide::Right,
        }
    }
}

impl SegmentationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.median_window == 0 || self.median_window.is_multiple_of(2) {
            return Err(Error::InvalidConfig(format!(
                "median window must be odd and positive, got {}",
                self.median_window
            )));
        }
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "eta must be positive, got {}",
                self.eta
            )));
        }
        if !(-1.0..=1.0).contains(&self.wrist_offset) {
            return Err(Error::InvalidConfig(format!(
                "wrist offset must lie in [-1, 1], got {}",
                self.wrist_offset
            )));
        }
        Ok(())
    }
}

/// Intermediate images of one segmentation run.
#[derive(Debug, Clone, Default)]
pub struct DebugStages {
    pub gray: Option<GrayImage>,
    pub binary: Option<BinaryImage>,
    pub rotated_gray: Option<GrayImage>,
    pub rotated_mask: Option<BinaryImage>,
    pub contour: Option<BinaryImage>,
    pub gradient: Option<BinaryImage>,
    pub left_raw: Option<BinaryImage>,
    pub right_raw: Option<BinaryImage>,
    pub left: Option<BinaryImage>,
    pub right: Option<BinaryImage>,
    pub rotation: Option<f64>,
    pub cut_row: Option<usize>,
    pub fingers: Vec<FingerShape>,
}

impl DebugStages {
    /// Writes the captured stages as numbered PNG files `<prefix>_NN_<stage>.png`.
    pub fn write_png(&self, dir: &Path, prefix: &str) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let name = |n: usize, s: &str| dir.join(format!("{prefix}_{n:02}_{s}.png"));
        if let Some(g) = &self.gray {
            save_gray(g, &name(1, "gray"))?;
        }
        if let Some(b) = &self.binary {
            save_binary(b, &name(2, "binary"))?;
        }
        if let Some(g) = &self.rotated_gray {
            save_gray(g, &name(3, "rotated"))?;
        }
        if let Some(b) = &self.contour {
            save_binary(b, &name(4, "contour"))?;
        }
        if let Some(b) = &self.gradient {
            save_binary(b, &name(5, "gradient"))?;
        }
        if let Some(b) = &self.left {
            save_binary(b, &name(6, "left_profile"))?;
        }
        if let Some(b) = &self.right {
            save_binary(b, &name(7, "right_profile"))?;
        }
        for (i, f) in self.fingers.iter().enumerate() {
            save_binary(&f.mask, &name(8 + i, &format!("finger_{}", f.label)))?;
        }
        Ok(())
    }
}

/// Segments a hand photograph into five labeled fingers.
pub fn segment_hand(image: &GrayImage, config: &SegmentationConfig) -> Result<Vec<FingerShape>> {
    run(image, config, None)
}

impl DebugStages {
    /// Runs [`segment_hand`] while recording every stage reached.
    pub fn capture(
        image: &GrayImage,
        config: &SegmentationConfig,
    ) -> (DebugStages, Result<Vec<FingerShape>>) {
        let mut stages = DebugStages::default();
        let res = run(image, config, Some(&mut stages));
        if let Ok(f) = &res {
            stages.fingers = f.clone();
        }
        (stages, res)
    }
}

fn run(
    image: &GrayImage,
    config: &SegmentationConfig,
    mut debug: Option<&mut DebugStages>,
) -> Result<Vec<FingerShape>> {
    config.validate()?;
    let smooth = median_filter(image, config.median_window);
    let mask = binarize_hand(&smooth, 1)?;
    let moments = hand_moments(&mask)?;
    let rotation = match orientation_angle(&moments) {
        Ok(theta) => settle_rotation(&mask, moments.centroid, upright_rotation(theta)),
        Err(Error::DegenerateOrientation) => 0.0,
        Err(e) => return Err(e),
    };
    let (rot_gray, rot_mask) = rotate_upright(&smooth, &mask, moments.centroid, rotation);
    let upright = largest_component(&rot_mask)
        .map(|m| fill_holes(&m))
        .ok_or(Error::AllBackground)?;
    let l_theta = rot_gray.masked(&upright);
    let contour = contour_image(&upright);
    let gradient = gradient_mask(&l_theta, config.eta, config.polarity);

    let up_moments = hand_moments(&upright)?;
    let (_, y0, _, y1) = upright.bounding_box().ok_or(Error::AllBackground)?;
    let cut = up_moments.centroid.1 + config.wrist_offset * (y1 - y0 + 1) as f64;
    let cut_row = cut.round().clamp(0.0, (upright.height() - 1) as f64) as usize;

    let profiles = split_profiles(&contour, &gradient, config.min_segment);
    if let Some(d) = debug.as_deref_mut() {
        let raw = split_profiles_raw(&contour, &gradient);
        d.gray = Some(image.clone());
        d.binary = Some(mask.clone());
        d.rotated_gray = Some(l_theta.clone());
        d.rotated_mask = Some(upright.clone());
        d.contour = Some(contour.clone());
        d.gradient = Some(gradient.clone());
        d.left_raw = Some(raw.left);
        d.right_raw = Some(raw.right);
        d.rotation = Some(rotation);
        d.cut_row = Some(cut_row);
    }
    let trimmed = trim_wrist(&profiles, cut_row, config.min_segment)?;
    if let Some(d) = debug {
        d.left = Some(trimmed.left.clone());
        d.right = Some(trimmed.right.clone());
    }
    extract_fingers(&trimmed, config.hand)
}
