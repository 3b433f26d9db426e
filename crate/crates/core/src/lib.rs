//! Sparse recovery via l1 minimization with mixed l2/linf/l1 residual
//! constraints and linear side constraints.
//!
//! The crate solves
//!
//! ```text
//!     min \|x\|_1   s.t.   a1*\|y - Ax\|_2 + a2*\|U^T(Ax-y)\|_inf
//!                          + a3*\|U^T(Ax-y)\|_1 <= eps,    Bx <= b
//! ```
//!
//! by circumscribing the Euclidean unit ball with a polytope and passing the
//! result to a dense two-phase simplex. Around that core it provides:
//!
//! * certification of the (restricted) weak range space property of a
//!   matrix pair, with per-pattern witnesses ([`rsp`]);
//! * the optimality system coupling primal and dual points, usable both as
//!   an optimality check and as a feasibility problem ([`l1`]);
//! * stability constants, an empirical Hoffman-constant estimator, and
//!   error-bound evaluation ([`stability`]);
//! * a brute-force l0 reference solver at desk scale ([`l0`]);
//! * a deterministic experiment runner emitting CSV records ([`experiment`]).

pub mod ball;
pub mod error;
pub mod experiment;
pub mod l0;
pub mod l1;
pub mod linalg;
pub mod problem;
pub mod rsp;
pub mod simplex;
pub mod stability;

pub use error::{Error, Result};
pub use linalg::{Matrix, PNorm};
pub use problem::{ProblemData, SpecialCase, Weights};
