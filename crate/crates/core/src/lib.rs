//! Emptiness formation probability of the isotropic XY chain driven out of
//! equilibrium by two thermal reservoirs and coupled through a local
//! magnetic impurity.
//!
//! The steady-state correlation matrix is built either entry by entry from
//! the wave operators of the impurity Hamiltonian or as a Toeplitz plus
//! Hankel section; [`oracle`] re-derives it from finite-volume dynamics.
//!
//! Everything is generic over [`Real`]; the aliases below fix the scalar.

pub mod correlation;
pub mod error;
pub mod linalg;
pub mod model;
pub mod oracle;
pub mod pfaffian;
pub mod quadrature;
pub mod scalar;
pub mod scattering;
pub mod spectral;
pub mod szego;

pub use correlation::{
    assemble_full_skew, assemble_theta, assemble_theta_structured, efp, efp_profile, theta_entry_direct, AssemblyPath,
    NessModel, ReducedCorrelation,
};
pub use error::{Error, Result};
pub use model::{ChainParams, Pm, ScalarSymbol, Side};
pub use oracle::{FiniteVolume, FiniteVolumeSpec};
pub use pfaffian::{LogScaled, SkewMatrix};
pub use quadrature::{Integrator, QuadSpec};
pub use scalar::{Real, C};
pub use spectral::BoundState;
pub use szego::{decay_rates, AsymptoticProfile, DecayRates, HankelMode, JumpDiagnostic};

pub type ChainParamsF64 = ChainParams<f64>;
pub type ChainParamsF32 = ChainParams<f32>;
pub type NessModelF64 = NessModel<f64>;
pub type NessModelF32 = NessModel<f32>;
pub type QuadSpecF64 = QuadSpec<f64>;
pub type QuadSpecF32 = QuadSpec<f32>;
pub type FiniteVolumeSpecF64 = FiniteVolumeSpec<f64>;
pub type FiniteVolumeSpecF32 = FiniteVolumeSpec<f32>;
pub type DecayRatesF64 = DecayRates<f64>;
pub type DecayRatesF32 = DecayRates<f32>;
pub type LogScaledF64 = LogScaled<f64>;
pub type LogScaledF32 = LogScaled<f32>;
