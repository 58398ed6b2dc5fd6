//! Measured foliated unions of bands: exact construction, the Rips machine,
//! leaf exploration, the explicit thin-type gallery `Z(w, l)` and the
//! spectral data of self-similar complexes.

pub mod complex;
pub mod error;
pub mod fixtures;
pub mod format;
pub mod gallery;
pub mod iso;
pub mod leaf;
pub mod normalize;
pub mod rational;
pub mod rips;
pub mod spectral;
pub mod sweep;

pub use complex::{Band, BandComplex, BandId, BaseAttachment, Component, ComponentId, ComplexBuilder, DPoint, Side};
pub use error::{Error, Result};
pub use rational::Rational;
