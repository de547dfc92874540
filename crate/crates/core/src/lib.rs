//! Spectral and asymptotic analysis of finite-dimensional quantum channels
//! and GKLS generators: multiplicities of stationary and peripheral
//! eigenvalues, fixed-point spaces, commutants, and the bounds
//! `ℓ0 ≤ ℓP ≤ d² − 2d + 2` and `m0 ≤ mP ≤ d² − 2d + 2` together with the
//! CKKS inequalities.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod asymptotics;
pub mod bounds;
pub mod campaign;
pub mod commutant;
pub mod constructions;
pub mod error;
pub mod gkls;
pub mod linalg;
pub mod spectra;
pub mod subject;
pub mod superop;

#[cfg(test)]
mod testutil;

pub use analysis::{analyze, AnalysisOptions, AnalysisReport};
pub use bounds::{BoundCheck, BoundReport, Classification};
pub use commutant::{CommutantResult, JordanProfile};
pub use constructions::{Ensemble, SamplerConfig};
pub use error::{Error, Result};
pub use gkls::GklsGenerator;
pub use linalg::{ComplexMatrix, C64};
pub use spectra::{SpectralSummary, SpectralTolerances, SpectrumKind};
pub use subject::Subject;
pub use superop::QuantumChannel;
