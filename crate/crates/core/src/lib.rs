pub mod ballbasis;
pub mod cli;
pub mod error;
pub mod expansion;
pub mod harmonics;
pub mod innerprod;
pub mod onevar;
pub mod polyalg;

pub use error::{Error, Result};
