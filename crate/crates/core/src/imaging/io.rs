//! PNG/BMP reading and writing.

use std::path::Path;

use image::{DynamicImage, ImageBuffer, Luma};

use super::{BinaryImage, GrayImage};
use crate::error::Result;

/// Loads an image as 8-bit gray. Color input is converted with the
/// 0.299/0.587/0.114 luma weights.
pub fn load_gray(path: &Path) -> Result<GrayImage> {
    let img = image::open(path)?;
    Ok(to_gray(&img))
}

pub fn to_gray(img: &DynamicImage) -> GrayImage {
    let (w, h) = (img.width() as usize, img.height() as usize);
    let pixels = match img {
        DynamicImage::ImageLuma8(buf) => buf.as_raw().clone(),
        other => other
            .to_rgb8()
            .pixels()
            .map(|p| {
                let [r, g, b] = p.0;
                (0.299 * r as f64 + 0.587 * g as f64 + 0.114 * b as f64)
                    .round()
                    .min(255.0) as u8
            })
            .collect(),
    };
    GrayImage::from_raw(w, h, pixels).expect("decoder dimensions")
}

fn buffer(w: usize, h: usize, pixels: Vec<u8>) -> ImageBuffer<Luma<u8>, Vec<u8>> {
    ImageBuffer::from_raw(w as u32, h as u32, pixels).expect("dimensions")
}

/// Saves as PNG or BMP depending on the extension.
pub fn save_gray(image: &GrayImage, path: &Path) -> Result<()> {
    buffer(image.width(), image.height(), image.pixels().to_vec()).save(path)?;
    Ok(())
}

/// Saves a mask with foreground 255 and background 0.
pub fn save_binary(image: &BinaryImage, path: &Path) -> Result<()> {
    let px = image
        .data()
        .iter()
        .map(|&b| if b { 255 } else { 0 })
        .collect();
    buffer(image.width(), image.height(), px).save(path)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use image::{Rgb, RgbImage};

    #[test]
    fn gray_png_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("g.png");
        let g = GrayImage::from_raw(3, 2, vec![0, 10, 20, 30, 40, 255]).unwrap();
        save_gray(&g, &p).unwrap();
        assert_eq!(load_gray(&p).unwrap(), g);
    }

    #[test]
    fn color_uses_luma_weights() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.bmp");
        let mut img = RgbImage::new(2, 1);
        img.put_pixel(0, 0, Rgb([255, 0, 0]));
        img.put_pixel(1, 0, Rgb([10, 200, 30]));
        img.save(&p).unwrap();
        let g = load_gray(&p).unwrap();
        assert_eq!(g.get(0, 0), 76);
        assert_eq!(
            g.get(1, 0),
            (0.299f64 * 10.0 + 0.587 * 200.0 + 0.114 * 30.0).round() as u8
        );
    }
}
