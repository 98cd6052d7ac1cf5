//! Discrete tomography with coded diffraction patterns.
//!
//! The crate covers the forward side of tomographic phase retrieval on a
//! discrete lattice: Dirichlet-kernel X-ray transforms and their Fourier
//! slice property, masked (coded) diffraction patterns and their inherent
//! ambiguities, exit-wave models, measurement schemes, exact CT
//! reconstruction from field projections, and executable uniqueness checks.

pub mod ct_recon;
pub mod diffraction;
pub mod error;
pub mod grid;
pub mod io;
pub mod object;
pub mod physics;
pub mod schemes;
pub mod spectral;
pub mod support;
pub mod uniqueness;
pub mod xray;

pub use error::{Error, Result};
pub use grid::{dirichlet_kernel, CenteredRange};
pub use object::{random_object, Object3D, ObjectKind};
pub use support::{classify_support, SupportClass};
pub use xray::{project, Direction, Family, Projection2D};
