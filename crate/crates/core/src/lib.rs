//! Numerical toolkit for Poisson bracket invariants of disk covers on
//! two-dimensional symplectic surfaces.
//!
//! The crate computes certified upper bounds for the Poisson bracket
//! invariant `pb` of discrete and continuous covers by symplectically
//! embedded disks, together with the supporting machinery: Darboux-chart
//! surfaces and finite-difference brackets ([`surface`]), measure-preserving
//! Hilbert space-filling curves ([`spacefill`]), disk embeddings and cover
//! conversions ([`cover`]), partitions of unity ([`partition`]), the
//! box-constrained bilinear maximization behind every `pb` evaluation
//! ([`pbnorm`]), and theorem-level experiment drivers ([`experiments`]).

pub mod cover;
pub mod error;
pub mod experiments;
pub mod partition;
pub mod pbnorm;
pub mod scenarios;
pub mod spacefill;
pub mod surface;

pub use error::{Error, Result};
pub use surface::{
    displacement_energy_cap, poisson_bracket, ChartedSurface, FdOrder, GridSpec, ScalarField,
    SurfaceKind,
};
