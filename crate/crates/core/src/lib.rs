//! Two-view triangulation through the diagonalized epipolar constraint.
//!
//! A correspondence `(x1, x2)` is corrected onto the epipolar variety
//! `(x1;1)^T F (x2;1) = 0`. After translating by the epipoles and rotating
//! by an orthogonal change of basis, the constraint becomes
//! `a1 (y1^2 - y2^2) + a2 (y3^2 - y4^2) = 0`. In these coordinates:
//!
//! * [`weighted`] solves a reweighted problem in closed form (a quadratic),
//!   with the weight ratio chosen to minimize the true squared error,
//! * [`critical`] handles arbitrary positive weights and provides the exact
//!   (unweighted) optimum from the degree-6 critical polynomial,
//! * [`bounds`] gives cheap two-sided bounds on the optimal error,
//! * [`baselines`] holds the reference correctors and 3D point recovery.

pub mod baselines;
pub mod bounds;
pub mod critical;
pub mod epipolar;
pub mod error;
pub mod poly;
pub mod weighted;

pub use baselines::{Method, TriangulationResult};
pub use bounds::ErrorBounds;
pub use critical::{CriticalPolynomial, ExactSolution, WeightCase, WeightVector};
pub use epipolar::{CameraMatrix, Correspondence, DiagonalizedProblem, FundamentalMatrix};
pub use error::{Result, TriangulationError};
pub use weighted::{QuadraticData, WeightedSolution, WeightedTriangulation};
