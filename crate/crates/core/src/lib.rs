//! Non-Hermitian lattice models as quantum sensors: operator construction, spectral
//! topology, analytic generalized-Brillouin-zone oracles and Fisher-information scaling.

pub mod error;
pub mod gbz;
pub mod metrology;
pub mod model;
pub mod models;
pub mod spectral;

pub use error::{Error, Result};
pub use model::{Bc, Family, InterCell, ModelSpec};
pub use num_complex::Complex64 as C64;
