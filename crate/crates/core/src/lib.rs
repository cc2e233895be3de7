//! Algebraic-rotation NOMA over block fading channels.
//!
//! Two users share one rotated `Z^n` lattice built from a totally real
//! cyclotomic field; each carves coset leaders of `Lambda / 2^m Lambda` and
//! the transmitter superimposes them. Every user then decodes alone, without
//! successive interference cancellation, yet keeps full diversity because
//! the composite constellation inherits the lattice's nonzero minimum product
//! distance.
//!
//! Modules, bottom-up:
//! - [`lattice`]: number field and orthogonal generator matrix
//! - [`constellation`]: per-user coset leaders, superposition and
//!   lattice-partition schemes
//! - [`analysis`]: exhaustive and analytical distance figures
//! - [`sim`]: Monte Carlo SER for SISO and Alamouti receivers

pub mod analysis;
pub mod constellation;
pub mod error;
pub mod lattice;
pub mod sim;

pub use analysis::{
    demin_analytic, demin_bruteforce, distance_report, dpmin_bruteforce, dpmin_lattice_partition,
    dpmin_upper_bound, dpmin_upper_bound_with, min_determinant, BandVariant, DistanceReport,
    StbcScaling,
};
pub use constellation::{
    coset_leaders, lattice_partition_scheme, superimpose, CompositeScheme, SchemeMode,
    UserConstellation,
};
pub use error::{NomaError, Result};
pub use lattice::{
    build_field, cyclotomic_lattice, generator_matrix, lattice_dpmin, NumberField, RotatedLattice,
};
pub use sim::{
    estimate_diversity, simulate_ser, ChannelConfig, ChannelKind, Decoder, SerCurve, SerPoint,
    SimOptions,
};
