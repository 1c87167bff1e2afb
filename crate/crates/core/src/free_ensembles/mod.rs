//! Free contour and path measures: enumeration on finite line sets, the
//! partition-function estimator, and walk-closure proposals with exact
//! densities.

mod enumerate;
mod partition;
mod proposal;

pub use enumerate::{
    assemble_segments, enumerate_admissible_on_lines, enumerate_on_subsets, enumerate_with_cap, BoundaryMode, LineConfiguration,
    DEFAULT_ENUMERATION_CAP,
};
pub use partition::{configuration_sum, estimate_partition_function, PartitionEstimate, ESTIMATOR_LINE_CAP};
pub use proposal::{
    log_proposal_density, propose_free_contour, propose_free_path, ClosureParams, PathFamilySpec, Rejection,
    WeightedContourProposal, WeightedPath,
};
