//! Condition numbers of spherical linear feasibility problems.
//!
//! An instance is a list of rows `a_1, …, a_n ∈ S^m`; it is feasible when some nonzero `x`
//! satisfies `<a_i, x> <= 0` for all `i`. The GCC condition number is `1/|cos ρ|`, where
//! `ρ` is the angular radius of the smallest spherical cap containing every row.
//!
//! Geometry, linear programming and cap solvers are generic over [`Scalar`] (`f32`, `f64`).
//! Samplers and the Monte Carlo [`harness`] work in `f64`. Exact Wendel probabilities use
//! [`harness::bounds::Rational`].

pub mod cone;
pub mod error;
pub mod harness;
pub mod instance;
pub mod io;
pub mod linalg;
pub mod lp;
pub mod quad;
pub mod rng;
pub mod sampler;
pub mod scalar;
pub mod sic;
pub mod sphere;

pub use cone::{Side, SpherePolytope};
pub use error::{Error, Result};
pub use instance::Instance;
pub use lp::{gordan_classify, FeasibilityClass};
pub use rng::RngStream;
pub use sampler::{AdversarialParams, CapSampler, DeltaMode, HSpec};
pub use scalar::Scalar;
pub use sic::{cond_and_class, sic_bruteforce, sic_solve, CondReport, SicResult};
pub use sphere::{angular_distance, projective_distance, Cap, Rotation, SpherePoint};

pub type SpherePointF64 = SpherePoint<f64>;
pub type SpherePointF32 = SpherePoint<f32>;
pub type CapF64 = Cap<f64>;
pub type CapF32 = Cap<f32>;
pub type InstanceF64 = Instance<f64>;
pub type InstanceF32 = Instance<f32>;
pub type SpherePolytopeF64 = SpherePolytope<f64>;
pub type SicResultF64 = SicResult<f64>;
pub type SicResultF32 = SicResult<f32>;
pub type CondReportF64 = CondReport<f64>;
