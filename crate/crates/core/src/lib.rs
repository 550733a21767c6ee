//! Numerics for stability bounds of bosonic lattice gauge models on finite
//! lattices with free boundary conditions: unitary group kernels, Haar and
//! Weyl integration, Gaussian Bose partition functions, Wilson gauge weights,
//! bound verification and the CUE to GUE scaling limit.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod action;
pub mod bounds;
pub mod error;
pub mod group;
pub mod haar;
pub mod lattice;
pub mod mc;
pub mod partition;
pub mod quadrature;
pub mod rmt;
pub mod su2;

pub use error::{Error, Result};
pub use group::{GroupKind, LieAlgebraElement, UnitaryMatrix, C64};
pub use lattice::{GaugeFixing, Lattice};
pub use partition::{Estimate, Method};
