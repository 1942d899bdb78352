//! Exact matrix-product eigenstates of Onsager-integrable chiral clock chains,
//! together with the dense exact-diagonalization machinery used to check them.

pub mod clock;
pub mod ed;
pub mod error;
pub mod laurent;
pub mod linalg;
pub mod mps;
pub mod observables;
pub mod policy;
pub mod skeleton;

pub use error::{Error, Result};
pub use policy::NumericPolicy;
