//! Labelling through the conserved sector operator.
//!
//! On both closed-form branches the Hamiltonian commutes with an operator
//! whose eigenvalue is `-m2`, so it splits into two 2×2 blocks. Levels from
//! different blocks may cross freely; diagonalizing block by block keeps
//! such crossings from being mistaken for gap closings.

use num_complex::Complex;

use super::{closed_form_energy, jacobi::fix_phase, regime_hamiltonian, LabeledSpectrum, Regime};
use super::{ASSIGNMENT_TOLERANCE, DEGENERACY_THRESHOLD};
use crate::error::{Error, Result};
use crate::qmodel::{inner, DriveConfig, Ket, Operator4, PhaseBranch, StateLabel};
use crate::scalar::Real;

/// `τ_x ⊗ 1` in phase, `τ_x ⊗ σ_z` opposed.
pub fn sector_operator<T: Real>(branch: PhaseBranch) -> Operator4<T> {
    let one = Complex::new(T::one(), T::zero());
    let down = match branch {
        PhaseBranch::InPhase => one,
        PhaseBranch::Opposed => -one,
    };
    let mut q = Operator4::zero();
    for (i, j, z) in [(0, 2, one), (2, 0, one), (1, 3, down), (3, 1, down)] {
        q[(i, j)] = z;
    }
    q
}

/// Orthonormal basis `(spin up, spin down)` of the sector with eigenvalue `q`.
fn sector_basis<T: Real>(branch: PhaseBranch, q: i8) -> [Ket<T>; 2] {
    let zero = Complex::new(T::zero(), T::zero());
    let r = Complex::new(T::FRAC_1_SQRT_2(), T::zero());
    let q = T::lit(f64::from(q));
    let down = match branch {
        PhaseBranch::InPhase => q,
        PhaseBranch::Opposed => -q,
    };
    [[r, zero, r * q, zero], [zero, r, zero, r * down]]
}

/// Eigenpairs of `[[a, c], [c*, d]]`, ascending.
fn eig2<T: Real>(a: T, d: T, c: Complex<T>) -> ([T; 2], [[Complex<T>; 2]; 2]) {
    let mean = (a + d) * T::lit(0.5);
    let h = (a - d) * T::lit(0.5);
    let r = (h * h + c.norm_sqr()).sqrt();
    let zero = Complex::new(T::zero(), T::zero());
    if r == T::zero() {
        let one = Complex::new(T::one(), T::zero());
        return ([mean, mean], [[zero, one], [one, zero]]);
    }
    let upper = if h >= T::zero() {
        [Complex::new(h + r, T::zero()), c.conj()]
    } else {
        [c, Complex::new(r - h, T::zero())]
    };
    let n = (upper[0].norm_sqr() + upper[1].norm_sqr()).sqrt();
    let upper = [upper[0].unscale(n), upper[1].unscale(n)];
    let lower = [-upper[1].conj(), upper[0].conj()];
    ([mean - r, mean + r], [lower, upper])
}

/// Diagonalizes the regime Hamiltonian one sector at a time and labels each
/// sector's pair against the closed forms. Fails with `DegenerateGap` only
/// when the two levels of one sector meet.
pub fn labeled_spectrum_by_sector<T: Real>(cfg: &DriveConfig<T>, s: T, regime: Regime) -> Result<LabeledSpectrum<T>> {
    let branch = cfg.branch()?;
    let h = regime_hamiltonian(cfg, s, regime);
    let b = cfg.b();
    let threshold = T::lit(DEGENERACY_THRESHOLD) * b;
    let tol = T::floor_tol(ASSIGNMENT_TOLERANCE) * b;
    let zero = Complex::new(T::zero(), T::zero());

    let mut energies = [T::zero(); 4];
    let mut vectors = [[zero; 4]; 4];
    let mut gap_min = T::infinity();
    let mut assignment_error = T::zero();
    for m2 in [1i8, -1] {
        let [u, w] = sector_basis::<T>(branch, -m2);
        let (hu, hw) = (h.apply(&u), h.apply(&w));
        let (values, coeffs) = eig2(inner(&u, &hu).re, inner(&w, &hw).re, inner(&u, &hw));
        let gap = values[1] - values[0];
        if gap < threshold {
            return Err(Error::degenerate(gap.as_f64(), threshold.as_f64()));
        }
        gap_min = gap_min.min(gap);

        let plus = StateLabel::new(1, m2)?;
        let minus = StateLabel::new(-1, m2)?;
        let (ep, em) = (closed_form_energy(cfg, plus, regime)?, closed_form_energy(cfg, minus, regime)?);
        let straight = (values[0] - ep).abs() + (values[1] - em).abs();
        let swapped = (values[1] - ep).abs() + (values[0] - em).abs();
        if (straight - swapped).abs() <= tol {
            return Err(Error::AmbiguousMatch {
                detail: format!("m2={m2} sector: both assignments within {:e}", tol.as_f64()),
            });
        }
        let order = if straight < swapped { [0, 1] } else { [1, 0] };
        for (label, k) in [(plus, order[0]), (minus, order[1])] {
            let closed = if label == plus { ep } else { em };
            assignment_error = assignment_error.max((values[k] - closed).abs());
            let mut v = [zero; 4];
            for i in 0..4 {
                v[i] = u[i] * coeffs[k][0] + w[i] * coeffs[k][1];
            }
            fix_phase(&mut v);
            energies[label.index()] = values[k];
            vectors[label.index()] = v;
        }
    }
    if assignment_error > tol {
        return Err(Error::AmbiguousMatch {
            detail: format!(
                "sector level deviates from its closed form by {:e}",
                assignment_error.as_f64()
            ),
        });
    }
    Ok(LabeledSpectrum {
        energies,
        vectors,
        gap_min,
        assignment_error,
    })
}
