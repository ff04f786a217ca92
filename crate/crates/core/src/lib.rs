#![forbid(unsafe_code)]

pub mod divergences;
pub mod error;
pub mod hashing;
pub mod linalg;
pub mod protocols;
pub mod sdp;
pub mod states;

pub use error::{Error, Result};
