//! Collage algebras: polygon pictures under affine operators, raster
//! distances, and fitting of an open operator from examples.

mod algebra;
mod export;
mod fit;
mod geometry;
mod raster;

pub use algebra::{
    chair_grammar, collage_example, collage_operation, collage_signature, collage_template, corpus_loss,
    eval_picture_term, make_collage_example, reference_algebra, reference_operator, CollageError, CollageTemplate,
    DistanceConfig, DistanceKind, DEFAULT_RESOLUTION, DEFAULT_VIEWPORT, PIC, REAL,
};
pub use export::{export_png_mask, export_svg, parse_svg_paths, png_bytes, svg_string};
pub use fit::{fit_transforms, perturb, FitConfig, FitResult};
pub use geometry::{AffineTransform, CollageOp, GeometryError, Picture, Point, Polygon};
pub use raster::{
    hausdorff_distance, mask_hausdorff, mask_sym_diff, rasterize, squared_distance_field, sym_diff_area, Grid,
    RasterError, RasterMask, Viewport,
};
