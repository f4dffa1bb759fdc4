//! Equivariant filtering on homogeneous spaces, with a complete treatment of
//! single-bearing estimation on the sphere and the simulation tools used to
//! compare it against an extended Kalman filter.

pub mod attitude;
pub mod bearing;
pub mod eqf;
pub mod lie;
pub mod numeric;
pub mod ekf;
pub mod sim;
pub mod selftest;
