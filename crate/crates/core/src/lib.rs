//! Geometric phases and topology of a spin-1/2 particle tunnelling between
//! two sites under a circularly polarized drive.
//!
//! Everything numerical is generic over [`Real`] (`f32` or `f64`); the
//! `*F64` / `*F32` aliases below pin the scalar for everyday use.

pub mod cli;
pub mod error;
pub mod evolution;
pub mod geometry;
pub mod phasescan;
pub mod qmodel;
pub mod scalar;
pub mod spectra;

pub use error::{Error, Result};
pub use qmodel::{
    build_hamiltonian, build_rotating_hamiltonian, spin_site_operators, DriveConfig, Ket,
    Operator4, PhaseBranch, StateLabel,
};
pub use scalar::Real;
pub use spectra::{
    eigensystem, label_eigenstates, labeled_spectrum, labeled_spectrum_by_sector, EigenSystem,
    LabeledSpectrum, Regime,
};
pub use geometry::{ChernReport, PhaseValue};
pub use evolution::{extract_phases, propagator_exact, propagator_rk4, PhaseBreakdown};
pub use phasescan::{classify_point, scan_diagram, Method, PhaseClass, PhaseDiagramCell};

pub type DriveConfigF64 = DriveConfig<f64>;
pub type DriveConfigF32 = DriveConfig<f32>;
pub type Operator4F64 = Operator4<f64>;
pub type Operator4F32 = Operator4<f32>;
pub type EigenSystemF64 = EigenSystem<f64>;
pub type EigenSystemF32 = EigenSystem<f32>;
pub type PhaseValueF64 = PhaseValue<f64>;
pub type PhaseValueF32 = PhaseValue<f32>;
pub type PhaseBreakdownF64 = PhaseBreakdown<f64>;
pub type PhaseBreakdownF32 = PhaseBreakdown<f32>;
pub type ChernReportF64 = ChernReport<f64>;
pub type ChernReportF32 = ChernReport<f32>;
