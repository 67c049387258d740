//! Numerics for the extended Kodaira-Spencer functional on flat complex tori.
//!
//! Fields are truncated Fourier series on the real 2n-torus. Everything above
//! [`torus_field`] is exact linear algebra on the retained modes.

pub mod cli;
pub mod error;
pub mod exterior;
pub mod functional;
pub mod hodge;
pub mod json;
pub mod omega;
pub mod report;
pub mod sample;
pub mod search;
pub mod torus_field;
pub mod verify;

pub use error::{Error, Result};
pub use exterior::{BasisLabel, MultiIndex, PolyvectorForm};
pub use functional::{first_variation, phi, phi_extended, TPolynomial};
pub use hodge::Hodge;
pub use num_complex::Complex64;
pub use omega::{ComplexForm, FormLabel};
pub use search::{SearchConfig, SearchResult};
pub use torus_field::{DerivKind, FourierScalar, Freq, TorusSpec};
