//! Numerical kernels for isomonodromic deformations of Fuchsian systems on the
//! sphere, their autonomous (Gaudin) limits, and local checks of W-structure
//! curvature identities.

pub mod algebra;
pub mod connection;
pub mod error;
pub mod hitchin;
pub mod isoflow;
pub mod monodromy;
pub mod ode;
pub mod sampling;
pub mod wstructures;

pub use algebra::{OrbitPoint, SquareMatrix, C64};
pub use connection::{evaluate_l, spectral_curve, FuchsianConnection, SpectralCurveData};
pub use error::{Error, Result};
pub use hitchin::AutonomousState;
pub use isoflow::{FlowTrajectory, SchlesingerState, Trajectory};
pub use monodromy::{ContourPath, MonodromyRep};
pub use wstructures::{BiJet, MatrixBiJet, WFieldSample};
