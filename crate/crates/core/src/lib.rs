pub mod error;
pub mod params;
pub mod soliton;
pub mod spectral;

pub use error::{Error, Result};
pub mod evolve;
pub mod functionals;
pub mod variational;
pub mod stability;
pub mod io;
pub mod cli;
