//! Rearrangement kernels on uniform lattices: polarization, Steiner
//! symmetrization, random sampling of rearrangement parameters, convergence
//! metrics and orbits of direction sets.
#![no_std]
extern crate alloc;

pub mod edt;
pub mod error;
pub mod exact;
pub mod geometry;
pub mod grid;
pub mod linalg;
pub mod metrics;
pub mod orbits;
pub mod polarize;
pub mod sampling;
pub mod steiner;

pub use error::{Error, Result};
pub use exact::{ConeFunction, EllipsoidFunction};
pub use geometry::{Direction, Point, PolarParam, Side};
pub use grid::{GridFunction, GridSet, Lattice};
pub use linalg::{SymEigen, SymMatrix};
pub use polarize::Mode;
