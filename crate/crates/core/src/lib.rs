//! Extended L² homology in the commutative model `N(Z^n) ≅ L∞(T^n)`.
//!
//! Morphisms of free Hilbertian modules are Laurent matrices ([`laurent`]);
//! they act fiberwise over the n-torus ([`fiber`]). On top of that sit the
//! extended category of virtual modules ([`ecat`]), spectral density functions
//! and Novikov–Shubin invariants ([`spectral`]), homology of free chain
//! complexes ([`homology`]), and topological applications: presets, twisted
//! coefficients, TOR, minimal numbers of generators and Morse bounds
//! ([`topology`]). [`battery`] bundles the property checks run by `l2ext check`.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod battery;
pub mod ecat;
pub mod error;
pub mod fiber;
pub mod homology;
pub mod laurent;
pub mod settings;
pub mod spectral;
pub mod topology;

pub use ecat::VirtualModule;
pub use error::{Error, Result};
pub use fiber::{Symbol, TorusGrid};
pub use homology::FreeChainComplex;
pub use laurent::{LaurentMatrix, LaurentPoly, TorusPoint};
pub use settings::Settings;
pub use spectral::{NSFit, SpectralDensity};
