//! Covariance engines for the solution field: exact-in-law second-order
//! structure on the time axis, in space at a fixed time, for the stationary
//! pinned field, and for the closed-form reference processes.

pub mod matrix;
pub mod pinned;
pub mod reference;
pub mod spatial;
pub mod temporal;
