//! Time-dependent problems: the p-Laplace heat flow, its pressure form and the
//! log-transformed equation, with Harnack checks and pointwise identities.

pub mod exact;
pub mod harnack;
pub mod identity;
pub mod reg;
pub mod step;

pub use exact::*;
pub use harnack::*;
pub use identity::*;
pub use reg::*;
pub use step::*;
