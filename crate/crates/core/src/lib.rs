//! Spectra of discrete Schrödinger operators on periodic graphs and on their
//! subcoverings, the graphs obtained by rolling a periodic graph up along a
//! set of chiral vectors.
//!
//! The crate is organised bottom-up:
//!
//! * [`intlat`]: exact integer lattice algebra (Smith form, primitivity,
//!   unimodular completion, saturation).
//! * [`graph`]: fundamental graphs, the built-in lattices and the two quotient
//!   constructions.
//! * [`floquet`]: Floquet matrices, the Hermitian eigensolver and dispersion
//!   sampling.
//! * [`spectrum`]: band edges by grid scan and local zoom, spectrum sets and
//!   the inclusion check.
//! * [`asymptotics`]: band-edge asymptotics for long chiral vectors.
//! * [`iso`]: exact isospectrality decisions over rational quasimomenta.

pub mod asymptotics;
pub mod error;
pub mod floquet;
pub mod graph;
pub mod intlat;
pub mod iso;
pub mod linalg;
pub mod spectrum;

pub use error::{Error, Result};
pub use graph::FundamentalGraph;
pub use intlat::{ChiralMatrix, IntMatrix};
