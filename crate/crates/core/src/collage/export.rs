use std::fmt::Write as _;
use std::io;
use std::path::Path;

use super::geometry::{Picture, Point, Polygon};
use super::raster::{RasterMask, Viewport};
use crate::io::write_atomic;

/// SVG with one `path` per polygon, filled with the even-odd rule. The
/// group flips the y-axis so coordinates are written unchanged.
pub fn svg_string(pic: &Picture, viewport: Viewport) -> String {
    let (w, h) = (viewport.width(), viewport.height());
    let mut s = String::new();
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {w} {h}\" width=\"512\" height=\"{}\">",
        (512.0 * h / w).round()
    );
    let _ = writeln!(s, "<g transform=\"matrix(1 0 0 -1 {} {})\">", -viewport.min_x, viewport.max_y);
    for poly in &pic.polygons {
        let mut d = String::new();
        for (i, p) in poly.vertices().iter().enumerate() {
            let _ = write!(d, "{}{} {} ", if i == 0 { "M" } else { "L" }, p.x, p.y);
        }
        d.push('Z');
        let _ = writeln!(s, "<path d=\"{d}\" fill=\"black\" fill-rule=\"evenodd\"/>");
    }
    s.push_str("</g>\n</svg>\n");
    s
}

pub fn export_svg(pic: &Picture, viewport: Viewport, path: &Path) -> io::Result<()> {
    write_atomic(path, svg_string(pic, viewport).as_bytes())
}

/// Polygons of the `path` elements in an SVG produced by [`svg_string`].
pub fn parse_svg_paths(svg: &str) -> Option<Picture> {
    let mut polygons = Vec::new();
    let mut rest = svg;
    while let Some(i) = rest.find(" d=\"") {
        rest = &rest[i + 4..];
        let end = rest.find('"')?;
        let d = &rest[..end];
        rest = &rest[end..];
        let mut vertices = Vec::new();
        for cmd in d.split(['M', 'L']).map(str::trim).filter(|c| !c.is_empty()) {
            let cmd = cmd.trim_end_matches('Z').trim();
            if cmd.is_empty() {
                continue;
            }
            let mut it = cmd.split_whitespace();
            let x: f64 = it.next()?.parse().ok()?;
            let y: f64 = it.next()?.parse().ok()?;
            vertices.push(Point::new(x, y));
        }
        polygons.push(Polygon::from_vertices_unchecked(vertices));
    }
    Some(Picture::new(polygons))
}

/// 1-bit grayscale PNG; set pixels are black.
pub fn png_bytes(mask: &RasterMask) -> Vec<u8> {
    let mut out = Vec::new();
    {
        let mut enc = png::Encoder::new(&mut out, mask.width as u32, mask.height as u32);
        enc.set_color(png::ColorType::Grayscale);
        enc.set_depth(png::BitDepth::One);
        let mut writer = enc.write_header().expect("in-memory header");
        let stride = mask.width.div_ceil(8);
        let mut data = vec![0xffu8; stride * mask.height];
        for r in 0..mask.height {
            for c in 0..mask.width {
                if mask.get(c, r) {
                    data[r * stride + c / 8] &= !(0x80 >> (c % 8));
                }
            }
        }
        writer.write_image_data(&data).expect("in-memory image");
    }
    out
}

pub fn export_png_mask(mask: &RasterMask, path: &Path) -> io::Result<()> {
    write_atomic(path, &png_bytes(mask))
}
