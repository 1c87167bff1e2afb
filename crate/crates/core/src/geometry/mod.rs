//! Planar primitives, the line measure, contours and polygon metrics.

mod index;
mod line;
mod lines;
mod metric;
mod point;
mod polygon;
pub mod render;
mod window;

pub use index::SegmentIndex;
pub use line::{Line, PARALLEL_TOL};
pub use lines::{measure_lines_hitting, sample_poisson_lines};
pub use metric::{best_circle_fit, hausdorff_distance, hausdorff_distance_with, CircleFit};
pub use point::{
    orient, point_segment_distance, segment_circle_params, segment_line_params, segment_segment_distance,
    segments_intersect, BBox, Point, EPS_GEOM,
};
pub use polygon::{
    admissibility_violation, chain_crossing, colinear_edge_pair, densify_chain, Contour, PolygonalConfiguration,
    Polyline,
};
pub use window::{
    clip_polygon_convex, point_in_polygon, polygon_boundary_distance, polygon_centroid, polygon_disk_overlap,
    signed_area, Region, Window,
};
