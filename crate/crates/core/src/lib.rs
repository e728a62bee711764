//! Content-aware image resizing by seam carving.
//!
//! The crate is organised around the stages of a carve:
//!
//! * [`raster`] holds images and the grids derived from them,
//! * [`energy`] turns luminance into per-pixel importance,
//! * [`solvers`] finds a minimum-energy connected seam with one of four backends,
//! * [`carver`] repeatedly removes or inserts seams,
//! * [`bench`] times the backends and fits their scaling exponents,
//! * [`cli`] wires everything to the `seamcarve` binary.

pub mod bench;
pub mod carver;
pub mod cli;
pub mod energy;
mod error;
pub mod raster;
pub mod solvers;

pub use error::{Error, Result};
