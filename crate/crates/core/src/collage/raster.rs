use thiserror::Error;

use super::geometry::{Picture, Point};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RasterError {
    #[error("picture rasterizes to no pixels; distance undefined")]
    EmptyPicture,
    #[error("masks have different viewports or sizes")]
    GridMismatch,
}

/// Axis-aligned rectangle of the plane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Viewport {
    pub min_x: f64,
    pub min_y: f64,
    pub max_x: f64,
    pub max_y: f64,
}

impl Viewport {
    pub const UNIT: Viewport = Viewport { min_x: 0.0, min_y: 0.0, max_x: 1.0, max_y: 1.0 };

    pub const fn new(min_x: f64, min_y: f64, max_x: f64, max_y: f64) -> Self {
        Viewport { min_x, min_y, max_x, max_y }
    }

    pub fn width(&self) -> f64 {
        self.max_x - self.min_x
    }

    pub fn height(&self) -> f64 {
        self.max_y - self.min_y
    }
}

/// Pixel counts; both at least 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Grid {
    pub width: usize,
    pub height: usize,
}

impl Grid {
    pub fn new(width: usize, height: usize) -> Self {
        Grid { width: width.max(1), height: height.max(1) }
    }

    pub fn square(n: usize) -> Self {
        Grid::new(n, n)
    }
}

/// Bitmap with row 0 at the top of the viewport, packed 64 pixels per word.
#[derive(Clone, Debug, PartialEq)]
pub struct RasterMask {
    pub viewport: Viewport,
    pub width: usize,
    pub height: usize,
    stride: usize,
    words: Vec<u64>,
}

impl RasterMask {
    pub fn empty(viewport: Viewport, grid: Grid) -> Self {
        let stride = grid.width.div_ceil(64);
        RasterMask { viewport, width: grid.width, height: grid.height, stride, words: vec![0; stride * grid.height] }
    }

    pub fn pitch_x(&self) -> f64 {
        self.viewport.width() / self.width as f64
    }

    pub fn pitch_y(&self) -> f64 {
        self.viewport.height() / self.height as f64
    }

    pub fn pixel_area(&self) -> f64 {
        self.pitch_x() * self.pitch_y()
    }

    pub fn center_x(&self, col: usize) -> f64 {
        self.viewport.min_x + (col as f64 + 0.5) * self.pitch_x()
    }

    pub fn center_y(&self, row: usize) -> f64 {
        self.viewport.max_y - (row as f64 + 0.5) * self.pitch_y()
    }

    pub fn center(&self, col: usize, row: usize) -> Point {
        Point::new(self.center_x(col), self.center_y(row))
    }

    pub fn get(&self, col: usize, row: usize) -> bool {
        self.words[row * self.stride + col / 64] >> (col % 64) & 1 == 1
    }

    pub fn set(&mut self, col: usize, row: usize, v: bool) {
        let w = &mut self.words[row * self.stride + col / 64];
        if v {
            *w |= 1 << (col % 64);
        } else {
            *w &= !(1 << (col % 64));
        }
    }

    /// Sets columns `lo..hi` of `row`.
    fn fill_span(&mut self, row: usize, lo: usize, hi: usize) {
        let base = row * self.stride;
        let mut c = lo;
        while c < hi {
            let word = c / 64;
            let start = c % 64;
            let end = (hi - word * 64).min(64);
            let bits = if end - start == 64 { u64::MAX } else { ((1u64 << (end - start)) - 1) << start };
            self.words[base + word] |= bits;
            c = word * 64 + end;
        }
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_blank(&self) -> bool {
        self.words.iter().all(|w| *w == 0)
    }

    fn same_grid(&self, other: &RasterMask) -> bool {
        self.viewport == other.viewport && self.width == other.width && self.height == other.height
    }

    /// Number of pixels set in exactly one of the masks.
    pub fn xor_count(&self, other: &RasterMask) -> Result<usize, RasterError> {
        if !self.same_grid(other) {
            return Err(RasterError::GridMismatch);
        }
        Ok(self.words.iter().zip(&other.words).map(|(a, b)| (a ^ b).count_ones() as usize).sum())
    }

    /// Row-major booleans.
    pub fn to_bools(&self) -> Vec<bool> {
        let mut out = Vec::with_capacity(self.width * self.height);
        for r in 0..self.height {
            for c in 0..self.width {
                out.push(self.get(c, r));
            }
        }
        out
    }
}

/// Sets each pixel whose center lies inside some polygon under the
/// even-odd rule. Spans are half-open: a center on a left edge is inside,
/// one on a right edge is not; likewise bottom/top.
pub fn rasterize(pic: &Picture, viewport: Viewport, grid: Grid) -> RasterMask {
    let mut mask = RasterMask::empty(viewport, grid);
    let mut xs: Vec<f64> = Vec::new();
    for row in 0..mask.height {
        let y = mask.center_y(row);
        for poly in &pic.polygons {
            xs.clear();
            for (a, b) in poly.edges() {
                if (a.y <= y) != (b.y <= y) {
                    xs.push(a.x + (y - a.y) * (b.x - a.x) / (b.y - a.y));
                }
            }
            if xs.len() < 2 {
                continue;
            }
            xs.sort_by(f64::total_cmp);
            for pair in xs.chunks_exact(2) {
                let (lo, hi) = (first_col_at_or_after(&mask, pair[0]), first_col_at_or_after(&mask, pair[1]));
                if lo < hi {
                    mask.fill_span(row, lo, hi);
                }
            }
        }
    }
    mask
}

/// Smallest column whose center is `>= x` (or `width`).
fn first_col_at_or_after(mask: &RasterMask, x: f64) -> usize {
    if x.is_nan() {
        return mask.width;
    }
    let guess = ((x - mask.viewport.min_x) / mask.pitch_x() - 0.5).ceil();
    let mut c = if guess <= 0.0 { 0 } else { (guess as usize).min(mask.width) };
    while c < mask.width && mask.center_x(c) < x {
        c += 1;
    }
    while c > 0 && mask.center_x(c - 1) >= x {
        c -= 1;
    }
    c
}

/// Area of the symmetric difference, measured as differing pixels times
/// pixel area.
pub fn sym_diff_area(a: &Picture, b: &Picture, viewport: Viewport, grid: Grid) -> f64 {
    let ma = rasterize(a, viewport, grid);
    let mb = rasterize(b, viewport, grid);
    mask_sym_diff(&ma, &mb).expect("same grid")
}

pub fn mask_sym_diff(a: &RasterMask, b: &RasterMask) -> Result<f64, RasterError> {
    Ok(a.xor_count(b)? as f64 * a.pixel_area())
}

/// Discrete Hausdorff distance between the set-pixel centers.
pub fn hausdorff_distance(a: &Picture, b: &Picture, viewport: Viewport, grid: Grid) -> Result<f64, RasterError> {
    mask_hausdorff(&rasterize(a, viewport, grid), &rasterize(b, viewport, grid))
}

pub fn mask_hausdorff(a: &RasterMask, b: &RasterMask) -> Result<f64, RasterError> {
    if !a.same_grid(b) {
        return Err(RasterError::GridMismatch);
    }
    if a.is_blank() || b.is_blank() {
        return Err(RasterError::EmptyPicture);
    }
    Ok(directed(a, b).max(directed(b, a)))
}

fn directed(from: &RasterMask, to: &RasterMask) -> f64 {
    let d2 = squared_distance_field(to);
    from.to_bools().iter().zip(&d2).filter(|(b, _)| **b).map(|(_, d)| *d).fold(0.0f64, f64::max).sqrt()
}

/// Squared Euclidean distance from each pixel center to the nearest set
/// pixel center, in viewport units.
pub fn squared_distance_field(mask: &RasterMask) -> Vec<f64> {
    let (w, h) = (mask.width, mask.height);
    let (px, py) = (mask.pitch_x(), mask.pitch_y());
    let mut f = vec![0.0; w * h];
    let mut col_in = vec![0.0; h];
    let mut col_out = vec![0.0; h];
    for c in 0..w {
        for r in 0..h {
            col_in[r] = if mask.get(c, r) { 0.0 } else { f64::INFINITY };
        }
        edt_1d(&col_in, py, &mut col_out);
        for r in 0..h {
            f[r * w + c] = col_out[r];
        }
    }
    let mut row_out = vec![0.0; w];
    for r in 0..h {
        edt_1d(&f[r * w..(r + 1) * w], px, &mut row_out);
        f[r * w..(r + 1) * w].copy_from_slice(&row_out);
    }
    f
}

/// Lower envelope of parabolas `f(q) + (spacing·(p − q))²`.
fn edt_1d(f: &[f64], spacing: f64, out: &mut [f64]) {
    let n = f.len();
    let s2 = spacing * spacing;
    let finite: Vec<usize> = (0..n).filter(|&q| f[q].is_finite()).collect();
    if finite.is_empty() {
        out.iter_mut().for_each(|o| *o = f64::INFINITY);
        return;
    }
    let mut v: Vec<usize> = Vec::with_capacity(finite.len());
    let mut z: Vec<f64> = Vec::with_capacity(finite.len() + 1);
    let inter = |q: usize, p: usize| -> f64 {
        ((f[q] / s2 + (q * q) as f64) - (f[p] / s2 + (p * p) as f64)) / (2.0 * q as f64 - 2.0 * p as f64)
    };
    for &q in &finite {
        loop {
            match v.last() {
                None => {
                    v.push(q);
                    z.push(f64::NEG_INFINITY);
                    break;
                }
                Some(&p) => {
                    let s = inter(q, p);
                    if s <= *z.last().unwrap() {
                        v.pop();
                        z.pop();
                    } else {
                        v.push(q);
                        z.push(s);
                        break;
                    }
                }
            }
        }
    }
    z.push(f64::INFINITY);
    let mut k = 0;
    for (p, o) in out.iter_mut().enumerate() {
        while z[k + 1] < p as f64 {
            k += 1;
        }
        let q = v[k];
        let d = p as f64 - q as f64;
        *o = d * d * s2 + f[q];
    }
}

#[cfg(test)]
mod tests {
    use super::super::geometry::{AffineTransform, CollageOp, Polygon};
    use super::*;

    #[test]
    fn unit_square_fills_everything() {
        let m = rasterize(&Picture::unit_square(), Viewport::UNIT, Grid::square(4));
        assert_eq!(m.count(), 16);
        assert!(rasterize(&Picture::empty(), Viewport::UNIT, Grid::square(4)).is_blank());
    }

    #[test]
    fn left_half_sets_two_columns() {
        let half = Picture::new(vec![Polygon::from_coords(&[(0.0, 0.0), (0.5, 0.0), (0.5, 1.0), (0.0, 1.0)]).unwrap()]);
        let m = rasterize(&half, Viewport::UNIT, Grid::square(4));
        for r in 0..4 {
            assert_eq!((0..4).map(|c| m.get(c, r)).collect::<Vec<_>>(), vec![true, true, false, false]);
        }
    }

    #[test]
    fn degenerate_polygons_are_invisible() {
        let flat = Picture::unit_square().transformed(&AffineTransform::new(1.0, 0.0, 0.0, 0.0, 0.0, 0.5));
        assert!(rasterize(&flat, Viewport::UNIT, Grid::square(16)).is_blank());
    }

    #[test]
    fn grid_tiles_cover_odd_resolutions() {
        let sq = Picture::unit_square();
        let tiled = CollageOp::grid().apply(&[&sq, &sq, &sq, &sq]).unwrap();
        for n in [1, 3, 7, 16, 33] {
            assert_eq!(rasterize(&tiled, Viewport::UNIT, Grid::square(n)).count(), n * n);
        }
    }

    #[test]
    fn edt_matches_brute_force() {
        let mut m = RasterMask::empty(Viewport::new(0.0, 0.0, 2.0, 1.0), Grid::new(9, 5));
        m.set(1, 1, true);
        m.set(7, 4, true);
        m.set(3, 0, true);
        let field = squared_distance_field(&m);
        for r in 0..5 {
            for c in 0..9 {
                let p = m.center(c, r);
                let mut best = f64::INFINITY;
                for r2 in 0..5 {
                    for c2 in 0..9 {
                        if m.get(c2, r2) {
                            let d = p.dist(m.center(c2, r2));
                            best = best.min(d * d);
                        }
                    }
                }
                assert!((field[r * 9 + c] - best).abs() < 1e-12, "({c},{r})");
            }
        }
    }

    #[test]
    fn hausdorff_cases() {
        let sq = Picture::unit_square();
        let vp = Viewport::new(0.0, 0.0, 1.5, 1.0);
        let g = Grid::new(96, 64);
        assert_eq!(hausdorff_distance(&sq, &sq, vp, g).unwrap(), 0.0);
        let shifted = sq.transformed(&AffineTransform::scale_translate(1.0, 0.5, 0.0));
        let d = hausdorff_distance(&sq, &shifted, vp, g).unwrap();
        assert!((d - 0.5).abs() <= 1.5 / 96.0, "{d}");
        assert_eq!(hausdorff_distance(&sq, &Picture::empty(), vp, g), Err(RasterError::EmptyPicture));
    }
}
