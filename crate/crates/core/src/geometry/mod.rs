//! Berry and Aharonov-Anandan phases, Berry curvature and first Chern
//! numbers, each computed numerically from gauge-invariant overlap products
//! and in closed form.
//!
//! Orientation: curvature is reported as the density `F` for which the Berry
//! phase of the constant-θ loop (varphi increasing) satisfies
//! `γ(θ) = ∫_0^θ ∫_0^{2π} F dvarphi dθ' (mod 2π)`. With this orientation the
//! in-phase adiabatic band `(m1, ·)` has Chern number `+m1`. The component
//! of `dA` on `dvarphi ∧ dθ` is `-F`.

mod berry;
mod chern;
mod curvature;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::qmodel::{rotate_ket, DriveConfig};
use crate::scalar::{wrap_angle, Real};
use crate::spectra::{labeled_spectrum_by_sector, LabeledSpectrum, Regime};

pub use berry::{
    aa_phase_closed, aa_phase_from_state, berry_phase_closed, berry_phase_wilson,
    berry_phases_wilson, f_m2, wilson_phase, WilsonOptions, DEFAULT_WILSON_STEPS, MIN_WILSON_STEPS,
    WILSON_CONVERGENCE,
};
pub use chern::{
    chern_closed, chern_from_grid, chern_lattice, ChernReport, StateGrid, MIN_GRID, MIN_LINK_OVERLAP,
    QUANTIZATION_TOLERANCE, TRANSITION_TOLERANCE,
};
pub use curvature::{curvature_closed, curvature_numeric, plaquette_phase, CurvatureSample};

/// Angle in the principal range `(-π, π]`; compared modulo 2π.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PhaseValue<T>(T);

impl<T: Real> PhaseValue<T> {
    pub fn new(x: T) -> Self {
        PhaseValue(wrap_angle(x))
    }

    pub fn value(self) -> T {
        self.0
    }

    /// Shortest angular distance on the circle, in `[0, π]`.
    pub fn circular_distance(self, other: Self) -> T {
        wrap_angle(self.0 - other.0).abs()
    }

    /// `|e^{iγ} - e^{iγ'}|`.
    pub fn chord_distance(self, other: Self) -> T {
        T::lit(2.0) * (self.circular_distance(other) * T::lit(0.5)).sin()
    }
}

/// Labelled band states at `(θ, varphi)`.
///
/// Adiabatic: eigenstates of the lab-frame Hamiltonian at drive phase varphi.
/// Nonadiabatic: the rotating-frame eigenstates at `varphi = 0`, carried to
/// varphi by `exp(-i varphi S_z_total)`.
pub fn band_states<T: Real>(cfg: &DriveConfig<T>, theta: T, varphi: T, regime: Regime) -> Result<LabeledSpectrum<T>> {
    let at = cfg.at_theta_unchecked(theta);
    match regime {
        Regime::Adiabatic => labeled_spectrum_by_sector(&at, varphi, regime),
        Regime::Nonadiabatic => {
            let mut ls = labeled_spectrum_by_sector(&at, T::zero(), regime)?;
            for v in ls.vectors.iter_mut() {
                *v = rotate_ket(v, varphi);
            }
            Ok(ls)
        }
    }
}
