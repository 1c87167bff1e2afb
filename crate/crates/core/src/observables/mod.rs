//! Colouring, magnetisation, large contours, skeletons and droplet reports.

mod colour;
mod large;
mod skeleton;
mod wulff;

pub use colour::{magnetisation, magnetisation_with, Colouring};
pub use large::{check_no_boundary_large, distance_to_circle, large_contours};
pub use skeleton::{
    clockwise_vertices, extract_skeleton, isoperimetric_check, verify_skeleton, IsoperimetricReport, LatticePoint,
    Skeleton, SkeletonSegment, ISO_C1, ISO_C2,
};
pub use wulff::{wulff_radius, wulff_report, WulffReport};
