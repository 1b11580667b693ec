//! The `k`-numerical range `W_k(c)`: support function, touch points,
//! boundary tracing and classification.

mod boundary;
mod support;

pub use boundary::{
    analytic_pieces, classify, local_fit_residual, trace_boundary, Arc, BoundaryKind,
    Classification, Corner, CornerReport, RangeBoundary, Sample, Segment,
};
pub use support::{
    complement_identity_check, line_intersection, selfadjoint_interval, support_wk,
    tangent_intersection, touch_set, Touch,
};
