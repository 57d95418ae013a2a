//! Normal forms of contracting polynomial germ cocycles over a cyclic orbit,
//! and Lyapunov exponent estimation for endomorphisms of projective space
//! through their repulsive periodic cycles.
//!
//! The crate is split along the pipeline:
//!
//! * [`jets`]: truncated polynomial map jets (sparse, complex, up to dimension 3)
//!   with composition, formal inversion and norm estimates;
//! * [`spectrum`]: contraction spectra, resonance classification of monomial
//!   degrees and the margin constant that controls the homological series;
//! * [`cocycle`]: periodic linear/germ cocycles, monodromy and the
//!   Oseledec-Pesin reduction to a constant block-diagonal linear part;
//! * [`normalform`]: the homological equation, degree-by-degree normalization
//!   and the renormalization limit that conjugates a cocycle to its resonant
//!   normal form;
//! * [`dynamics`]: projective endomorphisms, repulsive periodic points,
//!   exterior-derivative growth averages and the desk-scale checks that tie
//!   the cycle averages to the Lyapunov spectrum.
//!
//! `no_std` + `alloc`; all numerics are `f64`/`Complex64`.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod cocycle;
pub mod dynamics;
pub mod error;
pub mod jets;
pub mod linalg;
pub mod normalform;
pub mod projective;
pub mod roots;
pub mod spectrum;

pub use error::Error;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
