use super::components::{fill_holes, largest_component};
use super::{BinaryImage, GrayImage};
use crate::error::{Error, Result};

/// Square median filter with replicated borders. `window` must be odd.
pub fn median_filter(image: &GrayImage, window: usize) -> GrayImage {
    assert!(window % 2 == 1, "median window must be odd");
    if window == 1 {
        return image.clone();
    }
    let r = (window / 2) as isize;
    let (w, h) = (image.width() as isize, image.height() as isize);
    let mut out = GrayImage::new(image.width(), image.height());
    let mut hist = [0u32; 256];
    let half = (window * window / 2) as u32;
    for y in 0..h {
        // sliding histogram along the row
        hist.fill(0);
        for dy in -r..=r {
            for dx in -r..=r {
                let v = image.get(
                    dx.clamp(0, w - 1) as usize,
                    (y + dy).clamp(0, h - 1) as usize,
                );
                hist[v as usize] += 1;
            }
        }
        for x in 0..w {
            if x > 0 {
                for dy in -r..=r {
                    let yy = (y + dy).clamp(0, h - 1) as usize;
                    let out_v = image.get((x - 1 - r).clamp(0, w - 1) as usize, yy);
                    let in_v = image.get((x + r).clamp(0, w - 1) as usize, yy);
                    hist[out_v as usize] -= 1;
                    hist[in_v as usize] += 1;
                }
            }
            let mut acc = 0u32;
            let mut median = 0u8;
            for (v, &c) in hist.iter().enumerate() {
                acc += c;
                if acc > half {
                    median = v as u8;
                    break;
                }
            }
            out.set(x as usize, y as usize, median);
        }
    }
    out
}

/// Otsu threshold of a 256-bin histogram.
///
/// Returns the smallest `t` in `0..=254` maximizing the between-class
/// variance of the split `{v <= t}` / `{v > t}`. A histogram with a single
/// populated level has no valid split and yields 0.
pub fn otsu_threshold_from_histogram(hist: &[u64; 256]) -> u8 {
    let total: u128 = hist.iter().map(|&c| c as u128).sum();
    let sum: u128 = hist
        .iter()
        .enumerate()
        .map(|(v, &c)| v as u128 * c as u128)
        .sum();
    // between-class variance ∝ (N·S0 − S·W0)² / (W0·W1); the cross-multiplied
    // comparison is bounded by (N²·S)², exact in u128 while N²·S fits in u64
    let exact = total
        .checked_mul(total)
        .and_then(|n2| n2.checked_mul(sum.max(1)))
        .is_some_and(|v| v <= u64::MAX as u128);

    let mut best_t = 0u8;
    let mut best_exact: Option<(u128, u128)> = None;
    let mut best_f = f64::NEG_INFINITY;
    let (mut w0, mut s0) = (0u128, 0u128);
    for (t, &count) in hist.iter().enumerate().take(255) {
        w0 += count as u128;
        s0 += t as u128 * count as u128;
        let w1 = total - w0;
        if w0 == 0 || w1 == 0 {
            continue;
        }
        let diff = (total * s0).abs_diff(sum * w0);
        let den = w0 * w1;
        if exact {
            let num = diff * diff;
            let better = match best_exact {
                None => true,
                Some((bn, bd)) => num * bd > bn * den,
            };
            if better {
                best_exact = Some((num, den));
                best_t = t as u8;
            }
        } else {
            let v = (diff as f64) * (diff as f64) / den as f64;
            if v > best_f {
                best_f = v;
                best_t = t as u8;
            }
        }
    }
    best_t
}

pub fn otsu_threshold(image: &GrayImage) -> u8 {
    let mut hist = [0u64; 256];
    for &p in image.pixels() {
        hist[p as usize] += 1;
    }
    otsu_threshold_from_histogram(&hist)
}

/// Median filter, Otsu threshold (foreground = brighter than threshold),
/// keep the largest 8-connected component and fill its holes.
pub fn binarize_hand(image: &GrayImage, median_window: usize) -> Result<BinaryImage> {
    if median_window.is_multiple_of(2) {
        return Err(Error::InvalidConfig(format!(
            "median window must be odd, got {median_window}"
        )));
    }
    let smooth = median_filter(image, median_window);
    let t = otsu_threshold(&smooth);
    let raw = BinaryImage::from_raw(
        smooth.width(),
        smooth.height(),
        smooth.pixels().iter().map(|&p| p > t).collect(),
    )
    .expect("same dimensions");
    let largest = largest_component(&raw).ok_or(Error::AllBackground)?;
    Ok(fill_holes(&largest))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_zero_image_is_all_background() {
        let img = GrayImage::new(16, 16);
        assert!(matches!(binarize_hand(&img, 3), Err(Error::AllBackground)));
    }

    #[test]
    fn bimodal_image_marks_bright_half() {
        let (w, h) = (20, 10);
        let mut img = GrayImage::filled(w, h, 10);
        for y in 0..h {
            for x in w / 2..w {
                img.set(x, y, 240);
            }
        }
        let t = otsu_threshold(&img);
        assert!((10..240).contains(&t));
        let mask = binarize_hand(&img, 1).unwrap();
        for y in 0..h {
            for x in 0..w {
                assert_eq!(mask.get(x, y), img.get(x, y) == 240);
            }
        }
    }

    #[test]
    fn median_removes_salt() {
        let mut img = GrayImage::filled(9, 9, 50);
        img.set(4, 4, 255);
        let out = median_filter(&img, 3);
        assert_eq!(out.get(4, 4), 50);
    }

    #[test]
    fn even_window_rejected() {
        let img = GrayImage::filled(4, 4, 9);
        assert!(matches!(
            binarize_hand(&img, 2),
            Err(Error::InvalidConfig(_))
        ));
    }

    #[test]
    fn median_matches_naive_sort() {
        let mut state = 12345u32;
        let px: Vec<u8> = (0..13 * 7)
            .map(|_| {
                state = state.wrapping_mul(1664525).wrapping_add(1013904223);
                (state >> 24) as u8
            })
            .collect();
        let img = GrayImage::from_raw(13, 7, px).unwrap();
        let out = median_filter(&img, 5);
        for y in 0..7isize {
            for x in 0..13isize {
                let mut win = vec![];
                for dy in -2..=2 {
                    for dx in -2..=2 {
                        win.push(img.get(
                            (x + dx).clamp(0, 12) as usize,
                            (y + dy).clamp(0, 6) as usize,
                        ));
                    }
                }
                win.sort();
                assert_eq!(out.get(x as usize, y as usize), win[12]);
            }
        }
    }
}
