// SPDX-License-Identifier: Apache-2.0

//! Qubit subspace leakage estimation from Rabi-oscillation spectra.
//!
//! A driven multi-level system started in `|0>` is observed only through its
//! ground-state population. The Fourier spectrum of that record has a DC line
//! `h0` and a dominant Rabi line `h01`; probability conservation turns these
//! two heights into lower and upper bounds on the population that escapes the
//! `{|0>, |1>}` subspace.
//!
//! Modules, bottom up:
//! - [`linalg`]: dense Hermitian operators, Jacobi eigendecomposition, propagators.
//! - [`analytic`]: exact peak heights and leakage straight from a Hamiltonian.
//! - [`families`]: named trial Hamiltonians and random leaky ensembles.
//! - [`sim`]: ideal and projection-noise-limited Rabi traces.
//! - [`spectral`]: DFT, phase matching and noise-floor statistics.
//! - [`estimate`]: bounds with uncertainties and significance tests.
//! - [`campaign`]: validation, convergence and efficiency studies.
//! - [`decoherence`]: Pauli-channel Bloch dynamics and resolution limits.
//! - [`formats`]: file formats shared by the CLI and downstream tooling.

pub mod analytic;
pub mod campaign;
pub mod decoherence;
pub mod error;
pub mod estimate;
pub mod families;
pub mod formats;
pub mod linalg;
pub mod sim;
pub mod spectral;

pub use analytic::{analytic_bounds, analytic_peaks, bounds_from_heights, exact_leakage, PeakSet, Transition};
pub use error::{Error, Result};
pub use estimate::{analyze_trace, estimate, significance_confinement, Flags, LeakageEstimate};
pub use families::{family, random_hermitian, random_leaky_hamiltonian, Family};
pub use linalg::{eigendecompose, propagate, CMatrix, EigenSystem, HermitianOperator};
pub use sim::{ideal_trace, sample_trace, RabiTrace, SamplingPlan};
pub use spectral::{dft, peak_stats, phase_match, phase_match_with, third_peak_test, third_peak_test_at, PeakStats, PhaseMatchOptions, Spectrum};
