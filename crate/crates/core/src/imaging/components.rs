use std::collections::VecDeque;

use super::BinaryImage;

const NEIGHBORS_8: [(isize, isize); 8] = [
    (-1, -1),
    (0, -1),
    (1, -1),
    (-1, 0),
    (1, 0),
    (-1, 1),
    (0, 1),
    (1, 1),
];

/// One 8-connected foreground component.
#[derive(Debug, Clone)]
pub struct Component {
    /// Pixels in discovery order.
    pub pixels: Vec<(usize, usize)>,
    /// Inclusive `(min_x, min_y, max_x, max_y)`.
    pub bbox: (usize, usize, usize, usize),
}

impl Component {
    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    /// Topmost pixel, leftmost among ties.
    pub fn topmost(&self) -> (usize, usize) {
        *self
            .pixels
            .iter()
            .min_by_key(|&&(x, y)| (y, x))
            .expect("component is nonempty")
    }

    pub fn to_image(&self, width: usize, height: usize) -> BinaryImage {
        BinaryImage::from_points(width, height, &self.pixels)
    }
}

/// 8-connected components in row-major order of their first pixel.
pub fn label_components(image: &BinaryImage) -> Vec<Component> {
    let (w, h) = (image.width(), image.height());
    let mut seen = vec![false; w * h];
    let mut out = Vec::new();
    let mut queue = VecDeque::new();
    for start in 0..w * h {
        if seen[start] || !image.data()[start] {
            continue;
        }
        seen[start] = true;
        queue.push_back(start);
        let mut pixels = Vec::new();
        let (mut x0, mut y0, mut x1, mut y1) = (usize::MAX, usize::MAX, 0, 0);
        while let Some(i) = queue.pop_front() {
            let (x, y) = (i % w, i / w);
            pixels.push((x, y));
            x0 = x0.min(x);
            y0 = y0.min(y);
            x1 = x1.max(x);
            y1 = y1.max(y);
            for (dx, dy) in NEIGHBORS_8 {
                let (nx, ny) = (x as isize + dx, y as isize + dy);
                if image.get_signed(nx, ny) {
                    let j = ny as usize * w + nx as usize;
                    if !seen[j] {
                        seen[j] = true;
                        queue.push_back(j);
                    }
                }
            }
        }
        out.push(Component {
            pixels,
            bbox: (x0, y0, x1, y1),
        });
    }
    out
}

/// The largest 8-connected component as its own image, `None` if empty.
/// Ties keep the component found first in row-major order.
pub fn largest_component(image: &BinaryImage) -> Option<BinaryImage> {
    let comps = label_components(image);
    let mut best: Option<&Component> = None;
    for c in &comps {
        if best.is_none_or(|b| c.len() > b.len()) {
            best = Some(c);
        }
    }
    best.map(|c| c.to_image(image.width(), image.height()))
}

/// Sets every background pixel not 4-connected to the image border.
pub fn fill_holes(image: &BinaryImage) -> BinaryImage {
    let (w, h) = (image.width(), image.height());
    let mut outside = vec![false; w * h];
    let mut queue = VecDeque::new();
    let seed = |x: usize, y: usize, outside: &mut Vec<bool>, queue: &mut VecDeque<usize>| {
        let i = y * w + x;
        if !image.data()[i] && !outside[i] {
            outside[i] = true;
            queue.push_back(i);
        }
    };
    for x in 0..w {
        seed(x, 0, &mut outside, &mut queue);
        seed(x, h - 1, &mut outside, &mut queue);
    }
    for y in 0..h {
        seed(0, y, &mut outside, &mut queue);
        seed(w - 1, y, &mut outside, &mut queue);
    }
    while let Some(i) = queue.pop_front() {
        let (x, y) = ((i % w) as isize, (i / w) as isize);
        for (dx, dy) in [(1, 0), (-1, 0), (0, 1), (0, -1)] {
            let (nx, ny) = (x + dx, y + dy);
            if nx < 0 || ny < 0 || nx >= w as isize || ny >= h as isize {
                continue;
            }
            let j = ny as usize * w + nx as usize;
            if !image.data()[j] && !outside[j] {
                outside[j] = true;
                queue.push_back(j);
            }
        }
    }
    BinaryImage::from_raw(w, h, outside.into_iter().map(|o| !o).collect()).expect("dims")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_pixels_are_one_component() {
        let img = BinaryImage::from_points(4, 4, &[(0, 0), (1, 1), (2, 2), (3, 0)]);
        let comps = label_components(&img);
        assert_eq!(comps.len(), 2);
        assert_eq!(comps[0].len(), 3);
    }

    #[test]
    fn largest_component_wins() {
        let img = BinaryImage::from_points(6, 3, &[(0, 0), (3, 1), (4, 1), (5, 1)]);
        let big = largest_component(&img).unwrap();
        assert_eq!(big.count(), 3);
        assert!(!big.get(0, 0));
    }

    #[test]
    fn ring_is_filled() {
        let mut img = BinaryImage::new(7, 7);
        for i in 1..6 {
            img.set(i, 1, true);
            img.set(i, 5, true);
            img.set(1, i, true);
            img.set(5, i, true);
        }
        let filled = fill_holes(&img);
        assert_eq!(filled.count(), 25);
        assert!(filled.get(3, 3));
        assert!(!filled.get(0, 0));
    }
}
