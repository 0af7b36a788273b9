//! Estimate-verification harness.

pub mod cavalieri;
pub mod excess;
pub mod iteration;
pub mod pointwise;
pub mod profile;
pub mod report;

pub use excess::{excess, excess_decay_run, BallQuadrature, ExcessDecay, ExcessSequence, ALPHA_D, ALPHA_V};
pub use report::{EstimateReport, EstimateSample, Verdict};
pub use cavalieri::{cavalieri_identity, CavalieriCheck};
pub use iteration::{absorb_constant, iterate_absorb, iterate_geometric, AbsorbCheck, GeometricCheck, GeometricHypothesis};
pub use pointwise::{pointwise_wolff_check, PointwiseCheck, PointwiseSample};
pub use profile::{campanato_fit, vmo_profile, CampanatoFit, VmoProfile, VMO_THRESHOLD};
