//! Models of a Su-Schrieffer-Heeger metamaterial waveguide built from coupled
//! LC resonators, and of qubits attached to it.
//!
//! Frequencies are angular (rad/s) throughout the library; the CLI converts to
//! Hz on output. The lattice constant is fixed to 1, so wavevectors are `k·d`.

pub mod band_structure;
pub mod bound_states;
pub mod circuit_model;
pub mod cooperative;
pub mod dynamics;
pub mod error;
pub mod finite_lattice;
pub mod numerics;
pub mod scattering;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;

/// 2π, for converting between Hz and rad/s.
pub const TAU: f64 = std::f64::consts::TAU;

/// Angular frequency (rad/s) from a frequency in Hz.
pub fn hz(f: f64) -> f64 {
    TAU * f
}

/// Frequency in Hz from an angular frequency.
pub fn to_hz(w: f64) -> f64 {
    w / TAU
}
