use serde::{Deserialize, Serialize};

use super::band_states;
use crate::error::{Error, Result};
use crate::qmodel::{inner, DriveConfig, Ket, PhaseBranch, StateLabel};
use crate::scalar::Real;
use crate::spectra::{spread, Regime};

/// Curvature density of one band at polar angle `theta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvatureSample<T> {
    pub theta: T,
    pub value: T,
    pub label: StateLabel,
    pub regime: Regime,
}

/// `m1 (sinθ / 2) (1 - x cosθ) / (1 + x² - 2x cosθ)^{3/2}` where
/// `x = 0` (adiabatic, in phase), `m2 λ` (adiabatic, opposed), `μ`
/// (rotating, in phase) or `Δ_{m2}` (rotating, opposed).
pub fn curvature_closed<T: Real>(
    cfg: &DriveConfig<T>,
    theta: T,
    label: StateLabel,
    regime: Regime,
) -> Result<CurvatureSample<T>> {
    let x = match (regime, cfg.branch()?) {
        (Regime::Adiabatic, PhaseBranch::InPhase) => T::zero(),
        (Regime::Adiabatic, PhaseBranch::Opposed) => label.m2_real::<T>() * cfg.lambda(),
        (Regime::Nonadiabatic, PhaseBranch::InPhase) => cfg.mu(),
        (Regime::Nonadiabatic, PhaseBranch::Opposed) => cfg.delta(label.m2()),
    };
    let d = spread(x, theta);
    let floor = T::floor_tol(1e-9);
    if d <= floor {
        return Err(Error::degenerate(d.as_f64(), floor.as_f64()).at(theta.as_f64(), None));
    }
    let (sin, cos) = theta.sin_cos();
    let m1: T = label.m1_real();
    Ok(CurvatureSample {
        theta,
        value: m1 * sin * T::lit(0.5) * (T::one() - x * cos) / (d * d * d),
        label,
        regime,
    })
}

/// Berry phase of the closed loop `a → b → c → d → a`,
/// `-arg(⟨a|b⟩⟨b|c⟩⟨c|d⟩⟨d|a⟩)`.
pub fn plaquette_phase<T: Real>(a: &Ket<T>, b: &Ket<T>, c: &Ket<T>, d: &Ket<T>) -> T {
    let z = inner(a, b) * inner(b, c) * inner(c, d) * inner(d, a);
    -z.arg()
}

/// Field strength of an `h × h` cell centred on `(theta, varphi)`: the loop
/// phase around `(θ+, φ-) → (θ+, φ+) → (θ-, φ+) → (θ-, φ-)` divided by `h²`.
pub fn curvature_numeric<T: Real>(
    cfg: &DriveConfig<T>,
    theta: T,
    varphi: T,
    label: StateLabel,
    regime: Regime,
    h: T,
) -> Result<CurvatureSample<T>> {
    if h <= T::zero() || !h.is_finite() {
        return Err(Error::invalid("h", "step must be positive"));
    }
    let half = h * T::lit(0.5);
    let state = |t: T, p: T| -> Result<Ket<T>> {
        band_states(cfg, t, p, regime)
            .map(|ls| *ls.state(label))
            .map_err(|e| e.at(t.as_f64(), Some(p.as_f64())))
    };
    let a = state(theta + half, varphi - half)?;
    let b = state(theta + half, varphi + half)?;
    let c = state(theta - half, varphi + half)?;
    let d = state(theta - half, varphi - half)?;
    Ok(CurvatureSample {
        theta,
        value: plaquette_phase(&a, &b, &c, &d) / (h * h),
        label,
        regime,
    })
}
