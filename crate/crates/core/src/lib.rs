//! 2D FDTD Maxwell solver and multi-slit interference analysis.
//!
//! The crate simulates monochromatic light transmitted by metallic slit
//! devices on a Yee grid (Ex, Ez, Hy polarization), extracts steady-state
//! phasors on a monitor line, transforms them to far-field angular spectra,
//! and quantifies the three-slit interference metrics Σ(θ), Δ(θ), κ(θ)
//! together with amplitude-superposition residuals across the seven
//! open/closed slit configurations.
//!
//! Module map:
//! - [`geometry`]: slit-device scenes and staircase rasterization
//! - [`materials`]: Drude fits and ADE update coefficients
//! - [`solver`]: the leapfrog stencil core, absorbing layers, sources
//! - [`monitors`]: running-DFT phasors and the near-to-far-field transform
//! - [`analysis`]: Fraunhofer oracle and interference metrics
//! - [`runner`]: experiment expansion, execution, and report assembly
//!
//! Internally the solver uses natural units: c = ε0 = μ0 = 1, lengths in
//! meters, time measured as ct in meters. All reported quantities are
//! normalized, so the unit system never leaks into outputs.

pub mod analysis;
pub mod config;
pub mod error;
pub mod geometry;
pub mod io;
pub mod materials;
pub mod monitors;
pub mod runner;
pub mod solver;

pub use analysis::{FraunhoferParams, InterferenceReport};
pub use error::CoreError;
pub use geometry::{MaterialGrid, SceneSpec, SlitConfiguration, SlitPlateSpec, SlitState};
pub use materials::{AdeCoefficients, DrudeMedium};
pub use monitors::{AngularSpectrum, PhasorField};
pub use runner::{ExperimentKind, ExperimentPlan, Profile};
pub use solver::{FieldState, RunReport, RunSchedule, SourceSpec, YeeGrid};
