//! 3×3 binary morphology.

use super::BinaryImage;

const RING: [(isize, isize); 8] = [
    (-1, -1),
    (0, -1),
    (1, -1),
    (1, 0),
    (1, 1),
    (0, 1),
    (-1, 1),
    (-1, 0),
];

pub fn dilate(image: &BinaryImage) -> BinaryImage {
    let mut out = BinaryImage::new(image.width(), image.height());
    for y in 0..image.height() {
        for x in 0..image.width() {
            if image.get(x, y)
                || RING
                    .iter()
                    .any(|&(dx, dy)| image.get_signed(x as isize + dx, y as isize + dy))
            {
                out.set(x, y, true);
            }
        }
    }
    out
}

/// Erosion; pixels outside the image count as foreground so that
/// closing never removes original pixels at the border.
pub fn erode(image: &BinaryImage) -> BinaryImage {
    let (w, h) = (image.width() as isize, image.height() as isize);
    let mut out = BinaryImage::new(image.width(), image.height());
    for y in 0..h {
        for x in 0..w {
            let keep = image.get(x as usize, y as usize)
                && RING.iter().all(|&(dx, dy)| {
                    let (nx, ny) = (x + dx, y + dy);
                    nx < 0 || ny < 0 || nx >= w || ny >= h || image.get(nx as usize, ny as usize)
                });
            if keep {
                out.set(x as usize, y as usize, true);
            }
        }
    }
    out
}

pub fn close(image: &BinaryImage) -> BinaryImage {
    erode(&dilate(image))
}

/// Sets background pixels whose 8-neighborhood holds at least two
/// foreground groups that are not connected within the neighborhood.
pub fn bridge(image: &BinaryImage) -> BinaryImage {
    let mut out = image.clone();
    for y in 0..image.height() {
        for x in 0..image.width() {
            if image.get(x, y) {
                continue;
            }
            let on: Vec<bool> = RING
                .iter()
                .map(|&(dx, dy)| image.get_signed(x as isize + dx, y as isize + dy))
                .collect();
            if neighborhood_groups(&on) >= 2 {
                out.set(x, y, true);
            }
        }
    }
    out
}

// Number of 8-connected groups among the ring pixels, ignoring the center.
fn neighborhood_groups(on: &[bool]) -> usize {
    let mut parent: [usize; 8] = [0, 1, 2, 3, 4, 5, 6, 7];
    fn find(p: &mut [usize; 8], i: usize) -> usize {
        let mut i = i;
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    for i in 0..8 {
        if !on[i] {
            continue;
        }
        for j in (i + 1)..8 {
            if !on[j] {
                continue;
            }
            let (a, b) = (RING[i], RING[j]);
            if (a.0 - b.0).abs() <= 1 && (a.1 - b.1).abs() <= 1 {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                parent[ri] = rj;
            }
        }
    }
    let mut roots: Vec<usize> = (0..8)
        .filter(|&i| on[i])
        .map(|i| find(&mut parent, i))
        .collect();
    roots.sort_unstable();
    roots.dedup();
    roots.len()
}
