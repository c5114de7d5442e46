use num_complex::Complex;
use num_traits::One;

use super::{band_states, PhaseValue};
use crate::error::{Error, Result};
use crate::qmodel::{inner, spin_site_operators, DriveConfig, Ket, PhaseBranch, StateLabel};
use crate::scalar::{wrap_angle, Real};
use crate::spectra::{labeled_spectrum_by_sector, spread, Regime};

pub const DEFAULT_WILSON_STEPS: usize = 256;
pub const MIN_WILSON_STEPS: usize = 64;
/// Largest tolerated change of the extrapolated loop phase when the step count doubles.
pub const WILSON_CONVERGENCE: f64 = 1e-6;

/// Discretization controls for the Wilson loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WilsonOptions {
    /// Coarsest loop resolution; loops at `2n` and `4n` are evaluated too.
    pub n_steps: usize,
}

impl Default for WilsonOptions {
    fn default() -> Self {
        Self {
            n_steps: DEFAULT_WILSON_STEPS,
        }
    }
}

/// `-arg Π_k ⟨ψ_k|ψ_{k+1}⟩` around the closed loop `ψ_0 … ψ_{n-1} ψ_0`.
pub fn wilson_phase<T: Real>(states: &[Ket<T>]) -> PhaseValue<T> {
    let n = states.len();
    let mut prod = Complex::<T>::one();
    for k in 0..n {
        prod *= inner(&states[k], &states[(k + 1) % n]);
        // keep the running product at unit modulus
        let m = prod.norm();
        if m > T::zero() {
            prod = prod.unscale(m);
        }
    }
    PhaseValue::new(-prod.arg())
}

fn loop_phases<T: Real>(cfg: &DriveConfig<T>, theta: T, n: usize) -> Result<[T; 4]> {
    let mut loops: [Vec<Ket<T>>; 4] = Default::default();
    for k in 0..n {
        let s = T::TAU() * T::lit(k as f64) / T::lit(n as f64);
        let ls = band_states(cfg, theta, s, Regime::Adiabatic)
            .map_err(|e| e.at(theta.as_f64(), Some(s.as_f64())))?;
        for (l, v) in loops.iter_mut().zip(ls.vectors) {
            l.push(v);
        }
    }
    Ok(loops.map(|l| wilson_phase(&l).value()))
}

/// Richardson step for an `O(n⁻²)` error: `g_2n + (g_2n - g_n) / 3`, with
/// the difference taken on the circle.
fn richardson<T: Real>(coarse: T, fine: T) -> T {
    fine + wrap_angle(fine - coarse) / T::lit(3.0)
}

/// Berry phases of all four bands around the constant-θ circle, varphi
/// running `0 → 2π`, indexed by [`StateLabel::index`].
///
/// The discrete loop converges as `O(n⁻²)`. Loops at `n`, `2n` and `4n`
/// steps give two Richardson estimates; the finer one is returned, and the
/// call fails with `NonConverged` if they differ by more than `1e-6`.
pub fn berry_phases_wilson<T: Real>(
    cfg: &DriveConfig<T>,
    theta: T,
    opts: WilsonOptions,
) -> Result<[PhaseValue<T>; 4]> {
    let n = opts.n_steps;
    if n < MIN_WILSON_STEPS {
        return Err(Error::invalid("n_steps", format!("must be >= {MIN_WILSON_STEPS}, got {n}")));
    }
    let g1 = loop_phases(cfg, theta, n)?;
    let g2 = loop_phases(cfg, theta, 2 * n)?;
    let g4 = loop_phases(cfg, theta, 4 * n)?;
    let mut out = [PhaseValue::new(T::zero()); 4];
    for k in 0..4 {
        let coarse = richardson(g1[k], g2[k]);
        let fine = richardson(g2[k], g4[k]);
        let change = wrap_angle(fine - coarse).abs();
        if change > T::floor_tol(WILSON_CONVERGENCE) {
            return Err(Error::NonConverged {
                detail: format!(
                    "Wilson loop for {} moved by {:e} between {n}/{} and {}/{} steps",
                    StateLabel::ALL[k],
                    change.as_f64(),
                    2 * n,
                    2 * n,
                    4 * n
                ),
            });
        }
        out[k] = PhaseValue::new(fine);
    }
    Ok(out)
}

pub fn berry_phase_wilson<T: Real>(
    cfg: &DriveConfig<T>,
    theta: T,
    label: StateLabel,
    n_steps: usize,
) -> Result<PhaseValue<T>> {
    Ok(berry_phases_wilson(cfg, theta, WilsonOptions { n_steps })?[label.index()])
}

/// `f_{m2}(λ, θ) = √(1 + λ² - 2 m2 λ cosθ)`.
pub fn f_m2<T: Real>(lambda: T, theta: T, m2: i8) -> T {
    spread(T::lit(f64::from(m2)) * lambda, theta)
}

const DENOMINATOR_FLOOR: f64 = 1e-9;

/// Adiabatic Berry phase: `π(1 - m1 cosθ)` in phase,
/// `π [m1(λ m2 - cosθ) + f_{m2}] / f_{m2}` opposed.
pub fn berry_phase_closed<T: Real>(cfg: &DriveConfig<T>, theta: T, label: StateLabel) -> Result<PhaseValue<T>> {
    let m1: T = label.m1_real();
    let m2: T = label.m2_real();
    let pi = T::PI();
    match cfg.branch()? {
        PhaseBranch::InPhase => Ok(PhaseValue::new(pi * (T::one() - m1 * theta.cos()))),
        PhaseBranch::Opposed => {
            let lambda = cfg.lambda();
            let f = f_m2(lambda, theta, label.m2());
            if f <= T::floor_tol(DENOMINATOR_FLOOR) {
                return Err(Error::degenerate(f.as_f64(), DENOMINATOR_FLOOR).at(theta.as_f64(), None));
            }
            Ok(PhaseValue::new(pi * (m1 * (lambda * m2 - theta.cos()) + f) / f))
        }
    }
}

/// Aharonov-Anandan phase of the cyclic rotating-frame state,
/// `m1 π (x - cosθ) / √(1 + x² - 2x cosθ)` with `x = μ` in phase and
/// `x = Δ_{m2}` opposed.
pub fn aa_phase_closed<T: Real>(cfg: &DriveConfig<T>, label: StateLabel) -> Result<PhaseValue<T>> {
    let x = match cfg.branch()? {
        PhaseBranch::InPhase => cfg.mu(),
        PhaseBranch::Opposed => cfg.delta(label.m2()),
    };
    let theta = cfg.theta();
    let d = spread(x, theta);
    if d <= T::floor_tol(DENOMINATOR_FLOOR) {
        return Err(Error::degenerate(d.as_f64(), DENOMINATOR_FLOOR).at(theta.as_f64(), None));
    }
    let m1: T = label.m1_real();
    Ok(PhaseValue::new(m1 * T::PI() * (x - theta.cos()) / d))
}

/// `2π ⟨ψ̃|S_z_total|ψ̃⟩` of the labelled rotating-frame eigenstate.
pub fn aa_phase_from_state<T: Real>(cfg: &DriveConfig<T>, label: StateLabel) -> Result<PhaseValue<T>> {
    let ls = labeled_spectrum_by_sector(cfg, T::zero(), Regime::Nonadiabatic)?;
    let sz = spin_site_operators::<T>().sz_total;
    Ok(PhaseValue::new(T::TAU() * sz.expectation(ls.state(label)).re))
}
