//! Core model of a UAV-swarm air-to-ground network with coordinated
//! multi-point (CoMP) transmission.
//!
//! The crate covers the full pipeline from stochastic UAV deployment to
//! link-level performance numbers:
//!
//! * [`geometry`] — marked-Poisson deployment, Delaunay triangulation and
//!   CoMP set selection,
//! * [`channel`] — Nakagami-m fading and SIR sample generation,
//! * [`analytic`] — Gamma-approximated signal/interference statistics,
//!   coverage probability and ergodic rate in closed/quadrature form,
//! * [`formation`] — second-order leader-follower formation control with
//!   pinning and its feasibility check,
//! * [`tracking`] — impulsive swarm tracking of a mobile user,
//! * [`montecarlo`] — the reproducible trial harness tying it together,
//! * [`specialfn`] — the special functions and adaptive quadrature backing
//!   the analytical formulas.
//!
//! Everything is deterministic given a seed and safe to drive from multiple
//! threads; the crate is `no_std` (with `alloc`) so the numerics stay free
//! of platform-dependent libm variations.

#![cfg_attr(not(test), no_std)]
// `!(x > 0.0)` style guards are deliberate: they reject NaN along with the
// out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod analytic;
pub mod channel;
pub mod formation;
pub mod geometry;
pub mod linalg;
pub mod math;
pub mod montecarlo;
pub mod rng;
pub mod specialfn;
pub mod tracking;

pub use analytic::{GammaApprox, NetworkParams};
pub use channel::{FadingParams, SirSample};
pub use geometry::{CompSet, Deployment, Triangulation};
pub use montecarlo::{McConfig, MetricEstimate, Scheme};
pub use specialfn::{QuadratureSpec, Transform};
