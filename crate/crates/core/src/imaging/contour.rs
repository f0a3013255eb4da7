use super::BinaryImage;

// Moore neighborhood in clockwise order (image coordinates, y down),
// starting from west.
const MOORE: [(isize, isize); 8] = [
    (-1, 0),
    (-1, -1),
    (0, -1),
    (1, -1),
    (1, 0),
    (1, 1),
    (0, 1),
    (-1, 1),
];

fn direction_index(dx: isize, dy: isize) -> usize {
    MOORE
        .iter()
        .position(|&d| d == (dx, dy))
        .expect("offset is a Moore neighbor")
}

/// Moore-neighbor tracing of the outer boundary of the component containing
/// the first foreground pixel in row-major order.
///
/// The returned loop starts at the topmost (then leftmost) pixel, runs
/// clockwise on screen and does not repeat the start pixel at the end.
/// Pixels on one-pixel-wide necks may appear twice.
pub fn trace_contour(mask: &BinaryImage) -> Vec<(usize, usize)> {
    let Some(start_idx) = mask.data().iter().position(|&b| b) else {
        return Vec::new();
    };
    let w = mask.width();
    let start = ((start_idx % w) as isize, (start_idx / w) as isize);
    let mut contour = vec![(start.0 as usize, start.1 as usize)];

    // the west neighbor of the first row-major pixel is background
    let mut current = start;
    let mut backtrack = 0usize;
    let max_steps = 4 * mask.width() * mask.height() + 8;
    let mut second: Option<(isize, isize)> = None;

    for _ in 0..max_steps {
        let mut next = None;
        for k in 0..8 {
            let dir = (backtrack + k) % 8;
            let (dx, dy) = MOORE[dir];
            let cand = (current.0 + dx, current.1 + dy);
            if mask.get_signed(cand.0, cand.1) {
                // the neighbor scanned just before `cand`, seen from `cand`
                let prev_dir = (dir + 7) % 8;
                let (pdx, pdy) = MOORE[prev_dir];
                let prev = (current.0 + pdx, current.1 + pdy);
                backtrack = direction_index(prev.0 - cand.0, prev.1 - cand.1);
                next = Some(cand);
                break;
            }
        }
        let Some(next) = next else {
            // isolated pixel
            return contour;
        };
        if current == start {
            match second {
                None => second = Some(next),
                Some(s) if s == next => break,
                // start is a neck pixel passed through mid-loop
                Some(_) => contour.push((start.0 as usize, start.1 as usize)),
            }
        }
        current = next;
        if current != start {
            contour.push((current.0 as usize, current.1 as usize));
        }
    }
    contour
}

/// One-pixel-wide image of the traced outer boundary.
pub fn contour_image(mask: &BinaryImage) -> BinaryImage {
    BinaryImage::from_points(mask.width(), mask.height(), &trace_contour(mask))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square(n: usize) -> BinaryImage {
        let mut img = BinaryImage::new(n + 2, n + 2);
        for y in 1..=n {
            for x in 1..=n {
                img.set(x, y, true);
            }
        }
        img
    }

    #[test]
    fn single_pixel() {
        let img = BinaryImage::from_points(3, 3, &[(1, 1)]);
        assert_eq!(trace_contour(&img), vec![(1, 1)]);
    }

    #[test]
    fn square_boundary_clockwise() {
        let c = trace_contour(&square(4));
        assert_eq!(c.len(), 12);
        assert_eq!(c[0], (1, 1));
        assert_eq!(c[1], (2, 1));
        assert_eq!(c[3], (4, 1));
        assert_eq!(c[6], (4, 4));
        let img = contour_image(&square(4));
        assert_eq!(img.count(), 12);
        assert!(!img.get(2, 2));
    }

    #[test]
    fn loop_is_closed() {
        let c = trace_contour(&square(6));
        let (a, b) = (c[0], *c.last().unwrap());
        assert!(a.0.abs_diff(b.0) <= 1 && a.1.abs_diff(b.1) <= 1);
    }

    #[test]
    fn thin_line_is_walked_both_ways() {
        let img = BinaryImage::from_points(7, 3, &[(1, 1), (2, 1), (3, 1), (4, 1)]);
        let c = trace_contour(&img);
        assert_eq!(c, vec![(1, 1), (2, 1), (3, 1), (4, 1), (3, 1), (2, 1)]);
    }
}
