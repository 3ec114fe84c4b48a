//! 2-isogeny descent for `E: y² = x(x + εp)(x + εq)` with `q = p + 2` twin
//! primes, over the nine imaginary quadratic fields of class number one.

pub mod descent;
pub mod f2;
pub mod localfield;
pub mod qfield;
pub mod sharank;
pub mod verify;
