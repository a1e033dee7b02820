use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("polygon needs at least 3 vertices, got {0}")]
    TooFewVertices(usize),
    #[error("vertex {0} is not finite")]
    NonFinite(usize),
    #[error("edges {0} and {1} intersect")]
    SelfIntersecting(usize, usize),
    #[error("parameter vector has length {0}, expected a positive multiple of 6")]
    ParameterLength(usize),
    #[error("operator takes {expected} pictures, got {found}")]
    ArityMismatch { expected: usize, found: usize },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn dist(self, o: Point) -> f64 {
        (self.x - o.x).hypot(self.y - o.y)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Polygon {
    vertices: Vec<Point>,
}

fn orient(a: Point, b: Point, c: Point) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

fn on_segment(a: Point, b: Point, p: Point) -> bool {
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

fn segments_meet(a: Point, b: Point, c: Point, d: Point) -> bool {
    let (d1, d2, d3, d4) = (orient(c, d, a), orient(c, d, b), orient(a, b, c), orient(a, b, d));
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    (d1 == 0.0 && on_segment(c, d, a))
        || (d2 == 0.0 && on_segment(c, d, b))
        || (d3 == 0.0 && on_segment(a, b, c))
        || (d4 == 0.0 && on_segment(a, b, d))
}

impl Polygon {
    /// A validated simple polygon.
    pub fn new(vertices: Vec<Point>) -> Result<Self, GeometryError> {
        let n = vertices.len();
        if n < 3 {
            return Err(GeometryError::TooFewVertices(n));
        }
        if let Some(i) = vertices.iter().position(|p| !p.x.is_finite() || !p.y.is_finite()) {
            return Err(GeometryError::NonFinite(i));
        }
        for i in 0..n {
            for j in i + 1..n {
                let adjacent = j == i + 1 || (i == 0 && j == n - 1);
                if adjacent {
                    continue;
                }
                let (a, b) = (vertices[i], vertices[(i + 1) % n]);
                let (c, d) = (vertices[j], vertices[(j + 1) % n]);
                if segments_meet(a, b, c, d) {
                    return Err(GeometryError::SelfIntersecting(i, j));
                }
            }
        }
        Ok(Polygon { vertices })
    }

    /// Skips validation; used for affine images, which may be degenerate.
    pub fn from_vertices_unchecked(vertices: Vec<Point>) -> Self {
        Polygon { vertices }
    }

    pub fn from_coords(coords: &[(f64, f64)]) -> Result<Self, GeometryError> {
        Self::new(coords.iter().map(|&(x, y)| Point::new(x, y)).collect())
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn edges(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    /// Shoelace area (unsigned).
    pub fn area(&self) -> f64 {
        self.edges().map(|(a, b)| a.x * b.y - b.x * a.y).sum::<f64>().abs() / 2.0
    }

    pub fn transformed(&self, t: &AffineTransform) -> Polygon {
        Polygon { vertices: self.vertices.iter().map(|p| t.apply(*p)).collect() }
    }
}

/// A finite union of polygons.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Picture {
    pub polygons: Vec<Polygon>,
}

impl Picture {
    pub fn new(polygons: Vec<Polygon>) -> Self {
        Picture { polygons }
    }

    pub fn empty() -> Self {
        Picture::default()
    }

    pub fn is_empty(&self) -> bool {
        self.polygons.is_empty()
    }

    pub fn unit_square() -> Self {
        Picture::new(vec![Polygon::from_coords(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]).unwrap()])
    }

    /// The right triangle with legs along the axes.
    pub fn unit_right_triangle() -> Self {
        Picture::new(vec![Polygon::from_coords(&[(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)]).unwrap()])
    }

    /// The isosceles triangle with base on the x-axis and apex at `(½, 1)`.
    pub fn isosceles_triangle() -> Self {
        Picture::new(vec![Polygon::from_coords(&[(0.0, 0.0), (1.0, 0.0), (0.5, 1.0)]).unwrap()])
    }

    pub fn transformed(&self, t: &AffineTransform) -> Picture {
        Picture { polygons: self.polygons.iter().map(|p| p.transformed(t)).collect() }
    }

    /// `(min_x, min_y, max_x, max_y)`, or `None` for the empty picture.
    pub fn bounds(&self) -> Option<(f64, f64, f64, f64)> {
        let mut it = self.polygons.iter().flat_map(|p| p.vertices.iter());
        let first = it.next()?;
        Some(it.fold((first.x, first.y, first.x, first.y), |(a, b, c, d), p| {
            (a.min(p.x), b.min(p.y), c.max(p.x), d.max(p.y))
        }))
    }

    pub fn vertex_count(&self) -> usize {
        self.polygons.iter().map(|p| p.vertices.len()).sum()
    }
}

/// `x ↦ Mx + b`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AffineTransform {
    pub m11: f64,
    pub m12: f64,
    pub m21: f64,
    pub m22: f64,
    pub b1: f64,
    pub b2: f64,
}

impl AffineTransform {
    pub const IDENTITY: AffineTransform = AffineTransform { m11: 1.0, m12: 0.0, m21: 0.0, m22: 1.0, b1: 0.0, b2: 0.0 };

    pub const fn new(m11: f64, m12: f64, m21: f64, m22: f64, b1: f64, b2: f64) -> Self {
        AffineTransform { m11, m12, m21, m22, b1, b2 }
    }

    /// Uniform scaling by `s` followed by translation by `(bx, by)`.
    pub const fn scale_translate(s: f64, bx: f64, by: f64) -> Self {
        AffineTransform::new(s, 0.0, 0.0, s, bx, by)
    }

    pub fn apply(&self, p: Point) -> Point {
        Point::new(self.m11 * p.x + self.m12 * p.y + self.b1, self.m21 * p.x + self.m22 * p.y + self.b2)
    }

    /// `self ∘ inner`: apply `inner` first.
    pub fn compose(&self, inner: &AffineTransform) -> AffineTransform {
        AffineTransform {
            m11: self.m11 * inner.m11 + self.m12 * inner.m21,
            m12: self.m11 * inner.m12 + self.m12 * inner.m22,
            m21: self.m21 * inner.m11 + self.m22 * inner.m21,
            m22: self.m21 * inner.m12 + self.m22 * inner.m22,
            b1: self.m11 * inner.b1 + self.m12 * inner.b2 + self.b1,
            b2: self.m21 * inner.b1 + self.m22 * inner.b2 + self.b2,
        }
    }

    /// `[m11, m12, m21, m22, b1, b2]`
    pub fn params(&self) -> [f64; 6] {
        [self.m11, self.m12, self.m21, self.m22, self.b1, self.b2]
    }

    pub fn from_params(p: &[f64]) -> Self {
        AffineTransform::new(p[0], p[1], p[2], p[3], p[4], p[5])
    }
}

impl fmt::Display for AffineTransform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {} {} {} {}", self.m11, self.m12, self.m21, self.m22, self.b1, self.b2)
    }
}

/// `⟨f₁ ⋯ f_k⟩`: maps `k` pictures to the union of their images.
#[derive(Clone, Debug, PartialEq)]
pub struct CollageOp {
    pub transforms: Vec<AffineTransform>,
}

impl CollageOp {
    pub fn new(transforms: Vec<AffineTransform>) -> Self {
        CollageOp { transforms }
    }

    pub fn from_params(params: &[f64]) -> Result<Self, GeometryError> {
        if params.is_empty() || !params.len().is_multiple_of(6) {
            return Err(GeometryError::ParameterLength(params.len()));
        }
        Ok(CollageOp { transforms: params.chunks(6).map(AffineTransform::from_params).collect() })
    }

    /// Four half-scale copies tiling the unit square: lower left, lower
    /// right, upper left, upper right.
    pub fn grid() -> Self {
        CollageOp::new(vec![
            AffineTransform::scale_translate(0.5, 0.0, 0.0),
            AffineTransform::scale_translate(0.5, 0.5, 0.0),
            AffineTransform::scale_translate(0.5, 0.0, 0.5),
            AffineTransform::scale_translate(0.5, 0.5, 0.5),
        ])
    }

    pub fn arity(&self) -> usize {
        self.transforms.len()
    }

    pub fn params(&self) -> Vec<f64> {
        self.transforms.iter().flat_map(|t| t.params()).collect()
    }

    pub fn apply(&self, pics: &[&Picture]) -> Result<Picture, GeometryError> {
        if pics.len() != self.arity() {
            return Err(GeometryError::ArityMismatch { expected: self.arity(), found: pics.len() });
        }
        let mut polygons = Vec::with_capacity(pics.iter().map(|p| p.polygons.len()).sum());
        for (t, p) in self.transforms.iter().zip(pics) {
            polygons.extend(p.polygons.iter().map(|poly| poly.transformed(t)));
        }
        Ok(Picture { polygons })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn affine_examples() {
        assert_eq!(AffineTransform::IDENTITY.apply(Point::new(0.3, 0.7)), Point::new(0.3, 0.7));
        assert_eq!(AffineTransform::scale_translate(0.5, 0.0, 0.0).apply(Point::new(1.0, 1.0)), Point::new(0.5, 0.5));
        assert_eq!(AffineTransform::scale_translate(1.0, 0.5, 0.0).apply(Point::new(0.2, 0.2)), Point::new(0.7, 0.2));
    }

    #[test]
    fn composition_applies_inner_first() {
        let s = AffineTransform::new(1.0, 2.0, 0.0, 1.0, 0.5, 0.0);
        let t = AffineTransform::new(0.0, -1.0, 1.0, 0.0, 0.0, 1.0);
        let p = Point::new(0.25, -0.75);
        let direct = t.apply(s.apply(p));
        let composed = t.compose(&s).apply(p);
        assert!((direct.x - composed.x).abs() < 1e-12 && (direct.y - composed.y).abs() < 1e-12);
    }

    #[test]
    fn polygon_validation() {
        assert_eq!(Polygon::from_coords(&[(0.0, 0.0), (1.0, 0.0)]), Err(GeometryError::TooFewVertices(2)));
        let bowtie = Polygon::from_coords(&[(0.0, 0.0), (1.0, 1.0), (1.0, 0.0), (0.0, 1.0)]);
        assert!(matches!(bowtie, Err(GeometryError::SelfIntersecting(..))));
        assert!((Picture::unit_square().polygons[0].area() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn collage_apply_cases() {
        let sq = Picture::unit_square();
        let out = CollageOp::grid().apply(&[&sq, &sq, &sq, &sq]).unwrap();
        assert_eq!(out.polygons.len(), 4);
        let id = CollageOp::new(vec![AffineTransform::IDENTITY]);
        assert_eq!(id.apply(&[&sq]).unwrap(), sq);
        let e = Picture::empty();
        assert!(CollageOp::grid().apply(&[&e, &e, &e, &e]).unwrap().is_empty());
        assert!(matches!(id.apply(&[&sq, &sq]), Err(GeometryError::ArityMismatch { expected: 1, found: 2 })));
    }

    #[test]
    fn params_round_trip() {
        let g = CollageOp::grid();
        assert_eq!(CollageOp::from_params(&g.params()).unwrap(), g);
        assert!(CollageOp::from_params(&[1.0; 7]).is_err());
    }
}
