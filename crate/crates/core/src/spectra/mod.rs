//! Hermitian diagonalization, closed-form energies and quasienergies, and
//! the `(m1, m2)` labelling of numerical eigenstates.

mod jacobi;
mod sector;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qmodel::{
    build_hamiltonian, inner, rotating_hamiltonian_at, DriveConfig, Ket, Operator4, PhaseBranch,
    StateLabel,
};
use crate::scalar::Real;

pub use sector::{labeled_spectrum_by_sector, sector_operator};

/// Which Hamiltonian defines the bands: the instantaneous lab-frame one, or
/// the static one of the co-rotating frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Adiabatic,
    #[serde(alias = "rotating")]
    Nonadiabatic,
}

/// Relative threshold (times `b`) below which two levels count as degenerate.
pub const DEGENERACY_THRESHOLD: f64 = 1e-6;
/// Largest tolerated gap between a numerical level and its closed form (times `b`).
pub const ASSIGNMENT_TOLERANCE: f64 = 1e-8;

/// Ascending eigenvalues with orthonormal eigenvectors; `vectors[k]` pairs
/// with `values[k]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenSystem<T> {
    pub values: [T; 4],
    pub vectors: [Ket<T>; 4],
}

impl<T: Real> EigenSystem<T> {
    /// `Σ E_k |v_k⟩⟨v_k|`.
    pub fn reconstruct(&self) -> Operator4<T> {
        let mut m = Operator4::zero();
        for (e, v) in self.values.iter().zip(&self.vectors) {
            for i in 0..4 {
                for j in 0..4 {
                    m[(i, j)] += v[i] * v[j].conj() * *e;
                }
            }
        }
        m
    }

    /// `max_k |H v_k - E_k v_k|`.
    pub fn residual(&self, h: &Operator4<T>) -> T {
        let mut worst = T::zero();
        for (e, v) in self.values.iter().zip(&self.vectors) {
            let hv = h.apply(v);
            let r = hv
                .iter()
                .zip(v)
                .fold(T::zero(), |acc, (a, b)| acc + (*a - *b * *e).norm_sqr())
                .sqrt();
            worst = worst.max(r);
        }
        worst
    }

    /// `max |V†V - 1|`.
    pub fn orthonormality_error(&self) -> T {
        let mut worst = T::zero();
        for i in 0..4 {
            for j in 0..4 {
                let g = inner(&self.vectors[i], &self.vectors[j]);
                let target = if i == j { T::one() } else { T::zero() };
                worst = worst.max((g.re - target).abs().max(g.im.abs()));
            }
        }
        worst
    }

    /// Smallest separation between consecutive eigenvalues.
    pub fn gap_min(&self) -> T {
        self.values
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(T::infinity(), T::min)
    }

    pub fn unitary(&self) -> Operator4<T> {
        Operator4::from_columns(&self.vectors)
    }
}

/// Diagonalizes a Hermitian operator with cyclic Jacobi rotations.
pub fn eigensystem<T: Real>(h: &Operator4<T>) -> Result<EigenSystem<T>> {
    let dev = h.hermiticity_deviation();
    if dev > T::floor_tol(1e-12) * h.max_abs() {
        return Err(Error::NotHermitian {
            deviation: dev.as_f64(),
        });
    }
    let (values, v) = jacobi::jacobi_hermitian(h)?;
    let mut order = [0usize, 1, 2, 3];
    order.sort_by(|&i, &j| values[i].partial_cmp(&values[j]).expect("finite eigenvalues"));
    let mut out = EigenSystem {
        values: order.map(|k| values[k]),
        vectors: order.map(|k| v.column(k)),
    };
    out.vectors.iter_mut().for_each(jacobi::fix_phase);
    Ok(out)
}

/// Instantaneous energies for `φ ∈ {0, π}`:
/// `-(B/2)(m1 + m2 λ)` in phase, `-(m1 B/2) √(1 + λ² - 2 m2 λ cosθ)` opposed.
pub fn closed_form_adiabatic_energies<T: Real>(cfg: &DriveConfig<T>, label: StateLabel) -> Result<T> {
    let half_b = cfg.b() * T::lit(0.5);
    let m1: T = label.m1_real();
    let m2: T = label.m2_real();
    let lambda = cfg.lambda();
    Ok(match cfg.branch()? {
        PhaseBranch::InPhase => -half_b * (m1 + m2 * lambda),
        PhaseBranch::Opposed => -m1 * half_b * spread(m2 * lambda, cfg.theta()),
    })
}

/// Rotating-frame quasienergies: `-m1 (B/2) √(1 + μ² - 2μ cosθ) - m2 t_LR` in
/// phase, `-m1 (B/2) √(1 + Δ² - 2Δ cosθ)` with `Δ = Δ_{m2}` opposed.
pub fn closed_form_quasienergies<T: Real>(cfg: &DriveConfig<T>, label: StateLabel) -> Result<T> {
    let half_b = cfg.b() * T::lit(0.5);
    let m1: T = label.m1_real();
    let m2: T = label.m2_real();
    Ok(match cfg.branch()? {
        PhaseBranch::InPhase => -m1 * half_b * spread(cfg.mu(), cfg.theta()) - m2 * cfg.t_lr(),
        PhaseBranch::Opposed => -m1 * half_b * spread(cfg.delta(label.m2()), cfg.theta()),
    })
}

/// `√(1 + x² - 2x cosθ)`: length of the effective field in units of `B`.
pub(crate) fn spread<T: Real>(x: T, theta: T) -> T {
    (T::one() + x * x - T::lit(2.0) * x * theta.cos()).max(T::zero()).sqrt()
}

/// Closed-form level of `label` in the given regime.
pub fn closed_form_energy<T: Real>(cfg: &DriveConfig<T>, label: StateLabel, regime: Regime) -> Result<T> {
    match regime {
        Regime::Adiabatic => closed_form_adiabatic_energies(cfg, label),
        Regime::Nonadiabatic => closed_form_quasienergies(cfg, label),
    }
}

/// Eigenpairs indexed by [`StateLabel::index`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabeledSpectrum<T> {
    pub energies: [T; 4],
    pub vectors: [Ket<T>; 4],
    pub gap_min: T,
    /// Largest `|E_numeric - E_closed|` over the four assignments.
    pub assignment_error: T,
}

impl<T: Real> LabeledSpectrum<T> {
    pub fn energy(&self, label: StateLabel) -> T {
        self.energies[label.index()]
    }

    pub fn state(&self, label: StateLabel) -> &Ket<T> {
        &self.vectors[label.index()]
    }
}

/// Binds numerical eigenpairs to `(m1, m2)` by matching them to the closed
/// forms with the permutation of least total deviation.
pub fn label_eigenstates<T: Real>(
    es: &EigenSystem<T>,
    cfg: &DriveConfig<T>,
    regime: Regime,
) -> Result<LabeledSpectrum<T>> {
    let closed = StateLabel::try_map(|l| closed_form_energy(cfg, l, regime))?;
    let b = cfg.b();

    let gap_min = es.gap_min();
    let threshold = T::lit(DEGENERACY_THRESHOLD) * b;
    if gap_min < threshold {
        return Err(Error::degenerate(gap_min.as_f64(), threshold.as_f64()));
    }

    // perm[label] = eigen index
    let mut best: Option<([usize; 4], T)> = None;
    let mut runner_up = T::infinity();
    for perm in permutations4() {
        let cost = (0..4).fold(T::zero(), |acc, l| acc + (es.values[perm[l]] - closed[l]).abs());
        match best {
            Some((_, c)) if cost >= c => runner_up = runner_up.min(cost),
            _ => {
                if let Some((_, c)) = best {
                    runner_up = runner_up.min(c);
                }
                best = Some((perm, cost));
            }
        }
    }
    let (perm, cost) = best.expect("24 permutations");
    let tol = T::floor_tol(ASSIGNMENT_TOLERANCE) * b;
    if runner_up - cost <= tol {
        return Err(Error::AmbiguousMatch {
            detail: format!(
                "best and runner-up assignments differ by {:e}",
                (runner_up - cost).as_f64()
            ),
        });
    }
    let assignment_error = (0..4).fold(T::zero(), |acc, l| acc.max((es.values[perm[l]] - closed[l]).abs()));
    if assignment_error > tol {
        return Err(Error::AmbiguousMatch {
            detail: format!(
                "numerical level deviates from its closed form by {:e}",
                assignment_error.as_f64()
            ),
        });
    }
    Ok(LabeledSpectrum {
        energies: perm.map(|k| es.values[k]),
        vectors: perm.map(|k| es.vectors[k]),
        gap_min,
        assignment_error,
    })
}

/// Hamiltonian of the regime at drive phase `s`: lab frame for adiabatic
/// transport, `R(s) H̃ R(s)†` for the rotating frame.
pub fn regime_hamiltonian<T: Real>(cfg: &DriveConfig<T>, s: T, regime: Regime) -> Operator4<T> {
    match regime {
        Regime::Adiabatic => build_hamiltonian(cfg, s),
        Regime::Nonadiabatic => rotating_hamiltonian_at(cfg, s),
    }
}

/// Diagonalizes and labels the regime Hamiltonian at drive phase `s`.
pub fn labeled_spectrum<T: Real>(cfg: &DriveConfig<T>, s: T, regime: Regime) -> Result<LabeledSpectrum<T>> {
    let es = eigensystem(&regime_hamiltonian(cfg, s, regime))?;
    label_eigenstates(&es, cfg, regime)
}

fn permutations4() -> impl Iterator<Item = [usize; 4]> {
    (0..4usize).flat_map(|a| {
        (0..4usize).flat_map(move |b| {
            (0..4usize).flat_map(move |c| {
                (0..4usize).filter_map(move |d| {
                    let p = [a, b, c, d];
                    let distinct = (0..4).all(|i| (i + 1..4).all(|j| p[i] != p[j]));
                    distinct.then_some(p)
                })
            })
        })
    })
}
