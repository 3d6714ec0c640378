//! Dynamics of the planar map f(x,y) = (xy + c, x): exact evaluation, the
//! region filtration, interval certification of the region transitions,
//! orbit classification and image sweeps.

pub mod certify;
pub mod classify;
pub mod dynamics;
pub mod interval;
pub mod json;
pub mod poly;
pub mod regions;
pub mod render;

pub use dynamics::{
    apply, apply_inverse, fixed_points, stability, three_cycle, DynError, FixedPoints,
    Parameter, Point, StabilityClass, StabilityReport, StabilityTarget, ThreeCycle,
};
pub use regions::{catalog, region_of, Catalog, RegionBox, RegionId};
pub use certify::{
    certify_claim, certify_disjoint, certify_inclusion, certify_r0_backward_exclusion,
    certify_suite, Certificate, CertifyError, CertifyOptions, Status,
};
pub use classify::{
    classify_backward, classify_forward, envelope_check, orbit, return_times, BackwardClass,
    Classification, Classifier, ClassifyError, ClassifyOptions, CycleMode, Direction,
    ForwardClass, OrbitRecord, Regime, StopReason, Tag,
};
pub use interval::{IBox, Interval};
pub use render::{sweep, write_ppm, ClassImage, GridSpec, Palette, Stats};
