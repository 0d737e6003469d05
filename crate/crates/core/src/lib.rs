//! Certification of no-signaling boxes, theta-body relaxations, and
//! steering assemblages.

pub mod assemblage;
pub mod cli;
pub mod entangle;
pub mod error;
pub mod exact;
pub mod io;
pub mod linalg;
pub mod orthograph;
pub mod polytope;
pub mod scenario;
pub mod thetabody;

pub use error::{Error, Result};
