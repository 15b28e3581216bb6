//! Sampling of spheres and balls, hitting times, basin and Siegel-disc scans.

mod hitting;
mod sampling;
mod scan;
mod siegel;

pub use hitting::{hitting_time, HittingStatus, HittingTimeRecord};
pub use sampling::{
    ball_samples, default_depth, enumerate_ball, enumerate_sphere, sphere_samples, SampleDescription,
    SampleSet, Shape, Tail, DEFAULT_SEED,
};
pub use scan::{basin_scan, SampleRegion, ScanConfig, ScanEntry, ScanReport};
pub use siegel::{
    boundary_discriminant, boundary_escape_witness, boundary_log_radius, check_sphere, siegel_scan,
    BoundaryConclusion, RadiusCheck, RadiusVerdict, SiegelReport,
};
