//! Finite-element solver for `-div A(x, Du) = mu` in the plane.

pub mod checks;
pub mod comparison;
pub mod energy;
pub mod mesh;
pub mod minimize;
pub mod radial;
pub mod sola;
pub mod vfield;

pub use checks::{caccioppoli_sample, component_deviation, oscillation_decay, oscillation_exponent, sobolev_poincare_sample};
pub use comparison::{aharmonic_comparison, Comparison};
pub use energy::{energy, load_vector, Functional};
pub use mesh::{subtriangle_points, Mesh2D, SubMesh};
pub use minimize::{solve_dirichlet, solve_zero_dirichlet, Solution, SolveConfig, StageReport, StepRule};
pub use radial::{radial_reference, RadialReference, RadialSource};
pub use vfield::VectorField2D;
pub use sola::{sola_loop, CauchyProfile, SolaRun};
