//! Relay-style belief-propagation decoding for quantum LDPC codes.
//!
//! The crate provides two arithmetic paths over the same algorithm: a
//! binary64 reference ([`bp`]) and a bit-accurate emulation of the
//! fixed-point decoder gateware ([`gateware`], on the primitives in
//! [`qarith`]), plus a sliding-window decoder ([`window`]) and a Monte Carlo
//! benchmarking harness ([`bench`]).

pub mod bench;
pub mod bp;
pub mod fixed_ref;
pub mod gateware;
pub mod model;
pub mod qarith;
pub mod rng;
pub mod verify;
pub mod window;
