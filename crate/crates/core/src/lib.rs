//! Generalized Jaynes-Cummings Hamiltonians built from shape-invariant
//! superpotentials.
//!
//! * [`algebra`]: potential families, parameter chains, remainders and
//!   closed-form spectra.
//! * [`dressed`]: exact truncated matrices of `B+`, `S`, `S^2` and
//!   `H = S^2 + sqrt(hbar Omega) S` in the dressed product basis.
//! * [`grid`]: finite-difference position-space operators used as an
//!   independent check of the closed forms.
//! * [`linalg`]: dense and banded symmetric eigensolvers.
//! * [`cli`]: the `sijc` command-line front end.

pub mod algebra;
pub mod cli;
pub mod dressed;
pub mod error;
pub mod format;
pub mod grid;
pub mod linalg;

pub use algebra::{
    energy_level, jc_eigenvalue, level_count, morse_closed_form, parameter_chain, remainder, spectrum_table,
    superpotential, Branch, DressedLevel, EnergyLevel, FamilyKind, LevelCount, LevelLabel, ParameterChain,
    PotentialFamily, SpectrumTable, Units,
};
pub use error::{Error, Result};
