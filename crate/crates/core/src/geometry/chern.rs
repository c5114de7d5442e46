use rayon::prelude::*;
use serde::Serialize;

use super::{band_states, plaquette_phase};
use crate::error::{Error, Result};
use crate::qmodel::{inner, DriveConfig, Ket, PhaseBranch, StateLabel};
use crate::scalar::Real;
use crate::spectra::Regime;

pub const MIN_GRID: usize = 20;
/// Largest tolerated distance of a plaquette sum from an integer (in units of 2π).
pub const QUANTIZATION_TOLERANCE: f64 = 1e-9;
/// Neighbouring grid states with a smaller overlap modulus make a plaquette ill-defined.
pub const MIN_LINK_OVERLAP: f64 = 1e-2;
pub const TRANSITION_TOLERANCE: f64 = 1e-9;

/// Labelled band states on a `(θ, varphi)` grid covering the sphere.
///
/// Rows `j = 0 .. n_theta` sit at `θ_j = jπ/(n_theta - 1)` and include both
/// poles, where one state serves the whole row; columns are periodic with
/// `varphi_k = 2πk / n_phi`.
#[derive(Debug, Clone)]
pub struct StateGrid<T> {
    pub n_theta: usize,
    pub n_phi: usize,
    /// `states[j * n_phi + k][label.index()]`.
    pub states: Vec<[Ket<T>; 4]>,
    pub min_gap: T,
}

impl<T: Real> StateGrid<T> {
    pub fn build(cfg: &DriveConfig<T>, n_theta: usize, n_phi: usize, regime: Regime) -> Result<Self> {
        if n_theta < MIN_GRID || n_phi < MIN_GRID {
            return Err(Error::invalid(
                "grid",
                format!("n_theta and n_phi must be >= {MIN_GRID}, got {n_theta}x{n_phi}"),
            ));
        }
        // rows are independent; collect keeps them in index order
        let rows: Vec<Result<(Vec<[Ket<T>; 4]>, T)>> = (0..n_theta)
            .into_par_iter()
            .map(|j| {
                let theta = Self::theta_at(j, n_theta);
                let pole = j == 0 || j + 1 == n_theta;
                let mut row: Vec<[Ket<T>; 4]> = Vec::with_capacity(n_phi);
                let mut gap = T::infinity();
                for k in 0..n_phi {
                    if pole && k > 0 {
                        row.push(row[0]);
                        continue;
                    }
                    let varphi = Self::varphi_at(k, n_phi);
                    let ls = band_states(cfg, theta, varphi, regime)
                        .map_err(|e| e.at(theta.as_f64(), Some(varphi.as_f64())))?;
                    gap = gap.min(ls.gap_min);
                    row.push(ls.vectors);
                }
                Ok((row, gap))
            })
            .collect();
        let mut states = Vec::with_capacity(n_theta * n_phi);
        let mut min_gap = T::infinity();
        for r in rows {
            let (row, gap) = r?;
            states.extend(row);
            min_gap = min_gap.min(gap);
        }
        Ok(Self {
            n_theta,
            n_phi,
            states,
            min_gap,
        })
    }

    pub fn theta_at(j: usize, n_theta: usize) -> T {
        T::PI() * T::lit(j as f64) / T::lit((n_theta - 1) as f64)
    }

    pub fn varphi_at(k: usize, n_phi: usize) -> T {
        T::TAU() * T::lit(k as f64) / T::lit(n_phi as f64)
    }

    pub fn state(&self, j: usize, k: usize, label: StateLabel) -> &Ket<T> {
        &self.states[j * self.n_phi + (k % self.n_phi)][label.index()]
    }

    pub fn state_mut(&mut self, j: usize, k: usize, label: StateLabel) -> &mut Ket<T> {
        &mut self.states[j * self.n_phi + (k % self.n_phi)][label.index()]
    }
}

/// Sums plaquette phases over the grid in fixed row-major order. Returns
/// per-label Chern numbers and the distance of each raw sum from its integer.
pub fn chern_from_grid<T: Real>(grid: &StateGrid<T>) -> Result<([i32; 4], [T; 4])> {
    let floor = T::lit(MIN_LINK_OVERLAP);
    let mut c1 = [0i32; 4];
    let mut residual = [T::zero(); 4];
    for label in StateLabel::ALL {
        let mut total = T::zero();
        for j in 0..grid.n_theta - 1 {
            for k in 0..grid.n_phi {
                // (θ_{j+1}, φ_k) → (θ_{j+1}, φ_{k+1}) → (θ_j, φ_{k+1}) → (θ_j, φ_k)
                let a = grid.state(j + 1, k, label);
                let b = grid.state(j + 1, k + 1, label);
                let c = grid.state(j, k + 1, label);
                let d = grid.state(j, k, label);
                for (x, y) in [(a, b), (b, c), (c, d), (d, a)] {
                    let m = inner(x, y).norm();
                    if m < floor {
                        return Err(Error::NonConverged {
                            detail: format!(
                                "link overlap {:e} for {label} near rows {j}-{} column {k}; refine the grid",
                                m.as_f64(),
                                j + 1
                            ),
                        });
                    }
                }
                total += plaquette_phase(a, b, c, d);
            }
        }
        let raw = total / T::TAU();
        let nearest = raw.round();
        let r = (raw - nearest).abs();
        if r > T::floor_tol(QUANTIZATION_TOLERANCE) {
            return Err(Error::NonConverged {
                detail: format!("plaquette sum for {label} is {} turns, not an integer", raw.as_f64()),
            });
        }
        c1[label.index()] = nearest.to_i32().expect("small integer");
        residual[label.index()] = r;
    }
    Ok((c1, residual))
}

/// Per-band first Chern numbers from the lattice plaquette method.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChernReport<T> {
    /// Indexed by [`StateLabel::index`].
    pub c1: [i32; 4],
    pub n_theta: usize,
    pub n_phi: usize,
    /// Smallest level spacing met on the grid.
    pub min_gap: T,
    pub max_residual: T,
    pub regime: Regime,
}

impl<T: Real> ChernReport<T> {
    pub fn get(&self, label: StateLabel) -> i32 {
        self.c1[label.index()]
    }

    pub fn band_sum(&self) -> i32 {
        self.c1.iter().sum()
    }
}

/// Chern numbers of all four bands over the `(θ, varphi)` sphere.
pub fn chern_lattice<T: Real>(
    cfg: &DriveConfig<T>,
    n_theta: usize,
    n_phi: usize,
    regime: Regime,
) -> Result<ChernReport<T>> {
    let grid = StateGrid::build(cfg, n_theta, n_phi, regime)?;
    let (c1, residual) = chern_from_grid(&grid)?;
    Ok(ChernReport {
        c1,
        n_theta,
        n_phi,
        min_gap: grid.min_gap,
        max_residual: residual.into_iter().fold(T::zero(), T::max),
        regime,
    })
}

/// `m1 Θ(1 - |x|)`, failing when `|x|` sits on the step.
fn stepped<T: Real>(m1: i8, x: T, what: &str) -> Result<i32> {
    let dist = x.abs() - T::one();
    if dist.abs() <= T::floor_tol(TRANSITION_TOLERANCE) {
        return Err(Error::OnTransition {
            detail: format!("{what} = {}", x.as_f64()),
        });
    }
    Ok(if dist < T::zero() { i32::from(m1) } else { 0 })
}

/// Closed-form first Chern number: `m1` (adiabatic, in phase),
/// `m1 Θ(1 - λ)` (adiabatic, opposed), `(m1/2)(1 + sign(1 - μ))` (rotating,
/// in phase) and `m1 Θ(1 - |Δ_{m2}|)` (rotating, opposed).
pub fn chern_closed<T: Real>(cfg: &DriveConfig<T>, label: StateLabel, regime: Regime) -> Result<i32> {
    let m1 = label.m1();
    match (regime, cfg.branch()?) {
        (Regime::Adiabatic, PhaseBranch::InPhase) => Ok(i32::from(m1)),
        (Regime::Adiabatic, PhaseBranch::Opposed) => stepped(m1, cfg.lambda(), "lambda"),
        (Regime::Nonadiabatic, PhaseBranch::InPhase) => stepped(m1, cfg.mu(), "mu"),
        (Regime::Nonadiabatic, PhaseBranch::Opposed) => stepped(m1, cfg.delta(label.m2()), "|Delta_m2|"),
    }
}
