//! Interpolating holomorphic automorphisms for finite point sets, with
//! numerical verification of every claimed property.
//!
//! The crate builds *chains* of primitive invertible holomorphic maps —
//! shears `z ↦ z + f(λ·z)v` with `λ·v = 0`, closed-form one-parameter flows
//! on SL₂(ℂ), ℂ×ℂ*, and Koras–Russell-type varieties, and coordinate-pair
//! lifts — that realize a prescribed action on a finite point set: mapping
//! one discrete set onto another, relabeling points along an axis, or
//! flattening a plane lattice onto a line.  Every construction comes with a
//! verifier: interpolation residuals, symplectic pullback `DᵀJD − J`,
//! Jacobian determinants, Haar-density distortion on SL₂(ℂ), Lie-bracket
//! tables, and tangent-space spanning ranks are all measured numerically and
//! reported with explicit tolerances.
//!
//! Entire functions prescribed on a discrete set are represented by
//! finite-node Newton-form polynomial interpolants with Leja node ordering
//! ([`Interpolant`]); all constructions are therefore finite truncations,
//! with hard caps keeping double-precision arithmetic honest.
//!
//! The crate is `no_std`-compatible (requires `alloc`); the default `std`
//! feature simply re-enables the standard library in the dependencies.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod chain;
pub mod composer;
pub mod error;
pub mod euclid;
pub mod interp;
pub mod numerics;
pub mod poly;
pub mod products;
pub mod sl2;
pub mod symplectic;

pub use chain::{
    AutoChain, Check, FlowPrimitive, FlowTime, Generator, LiftPrimitive, Primitive,
    SampleRegion, ShearPrimitive, VerificationReport,
};
pub use composer::{CompactBox, StageLog};
pub use error::Error;
pub use interp::{Interpolant, RootPoly};
pub use numerics::{Cx, CxDd, CxMatrix, Dd, DdMatrix, ToleranceConfig};
pub use poly::{KrField, KrVariety, MPoly};
pub use products::CStarPoint;
