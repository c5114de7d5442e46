//! Time evolution over one drive period and the phases it accumulates.
//!
//! The exact propagator uses the frame identity
//! `U(t) = R(Ωt) exp(-i H̃ t)`, with the exponential taken through the
//! spectral decomposition of the rotating-frame Hamiltonian. An RK4
//! integrator of the lab-frame Schrödinger equation serves as an
//! independent oracle.

use num_complex::Complex;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{aa_phase_closed, PhaseValue};
use crate::qmodel::{
    build_hamiltonian, build_rotating_hamiltonian, frame_rotation, inner, rotate_ket,
    spin_site_operators, DriveConfig, Ket, Operator4, StateLabel,
};
use crate::scalar::{cis, Real};
use crate::spectra::{eigensystem, labeled_spectrum, EigenSystem, Regime};

pub const MIN_RK4_STEPS: usize = 1000;
pub const QUADRATURE_PANELS: usize = 10_000;

fn require_frequency<T: Real>(cfg: &DriveConfig<T>) -> Result<()> {
    if cfg.omega() > T::zero() {
        Ok(())
    } else {
        Err(Error::ZeroFrequency)
    }
}

/// Drive period `2π/Ω`.
pub fn period<T: Real>(cfg: &DriveConfig<T>) -> Result<T> {
    require_frequency(cfg)?;
    Ok(T::TAU() / cfg.omega())
}

/// Diagonalizes the rotating-frame generator once so the propagator can be
/// evaluated at many times cheaply.
#[derive(Debug, Clone)]
pub struct ExactPropagator<T> {
    omega: T,
    generator: EigenSystem<T>,
}

impl<T: Real> ExactPropagator<T> {
    pub fn new(cfg: &DriveConfig<T>) -> Result<Self> {
        require_frequency(cfg)?;
        Ok(Self {
            omega: cfg.omega(),
            generator: eigensystem(&build_rotating_hamiltonian(cfg))?,
        })
    }

    pub fn at(&self, t: T) -> Operator4<T> {
        let v = self.generator.unitary();
        let phases = Operator4::from_complex_diagonal(self.generator.values.map(|e| cis(-e * t)));
        frame_rotation(self.omega * t) * (v * phases * v.adjoint())
    }

    pub fn apply(&self, t: T, psi: &Ket<T>) -> Ket<T> {
        let mut out = [Complex::new(T::zero(), T::zero()); 4];
        for (e, v) in self.generator.values.iter().zip(&self.generator.vectors) {
            let c = inner(v, psi) * cis(-*e * t);
            for (o, x) in out.iter_mut().zip(v) {
                *o += *x * c;
            }
        }
        rotate_ket(&out, self.omega * t)
    }
}

/// Lab-frame propagator from `0` to `t`.
pub fn propagator_exact<T: Real>(cfg: &DriveConfig<T>, t: T) -> Result<Operator4<T>> {
    Ok(ExactPropagator::new(cfg)?.at(t))
}

/// `H(s) = H₀ + cos(s) A + sin(s) B`, read off the builder at three phases.
struct DriveSplit<T> {
    h0: Operator4<T>,
    a: Operator4<T>,
    b: Operator4<T>,
}

impl<T: Real> DriveSplit<T> {
    fn new(cfg: &DriveConfig<T>) -> Self {
        let half = T::lit(0.5);
        let h_0 = build_hamiltonian(cfg, T::zero());
        let h_pi = build_hamiltonian(cfg, T::PI());
        let h0 = (h_0 + h_pi).scale_real(half);
        let a = (h_0 - h_pi).scale_real(half);
        let b = build_hamiltonian(cfg, T::FRAC_PI_2()) - h0;
        Self { h0, a, b }
    }

    /// `-i H(s)`.
    fn generator(&self, s: T) -> Operator4<T> {
        let (sin, cos) = s.sin_cos();
        (self.h0 + self.a.scale_real(cos) + self.b.scale_real(sin)).scale(Complex::new(T::zero(), -T::one()))
    }
}

#[derive(Clone, Copy)]
pub struct Rk4Propagator<T> {
    pub operator: Operator4<T>,
    pub n_steps: usize,
    /// Frobenius norm of the polar correction applied after integration.
    pub correction_norm: T,
}

impl<T: Real> std::fmt::Debug for Rk4Propagator<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Rk4Propagator")
            .field("operator", &self.operator)
            .field("n_steps", &self.n_steps)
            .field("correction_norm", &self.correction_norm)
            .finish()
    }
}

fn integrate_rk4<T: Real>(cfg: &DriveConfig<T>, t: T, n_steps: usize) -> Operator4<T> {
    let split = DriveSplit::new(cfg);
    let omega = cfg.omega();
    let dt = t / T::from_usize(n_steps).expect("step count fits the scalar");
    let half = dt * T::lit(0.5);
    let sixth = dt / T::lit(6.0);
    let mut u = Operator4::identity();
    for n in 0..n_steps {
        let t0 = dt * T::from_usize(n).expect("step index fits the scalar");
        let g0 = split.generator(omega * t0);
        let gm = split.generator(omega * (t0 + half));
        let g1 = split.generator(omega * (t0 + dt));
        let k1 = g0 * u;
        let k2 = gm * (u + k1.scale_real(half));
        let k3 = gm * (u + k2.scale_real(half));
        let k4 = g1 * (u + k3.scale_real(dt));
        u = u + (k1 + k2.scale_real(T::lit(2.0)) + k3.scale_real(T::lit(2.0)) + k4).scale_real(sixth);
    }
    u
}

/// Closest unitary `U (U†U)^{-1/2}` and the size of the change.
pub fn polar_unitary<T: Real>(u: &Operator4<T>) -> Result<(Operator4<T>, T)> {
    let gram = eigensystem(&(u.adjoint() * *u))?;
    if gram.values[0] <= T::zero() {
        return Err(Error::NonConverged {
            detail: "propagator became singular".into(),
        });
    }
    let w = gram.unitary();
    let inv_sqrt = w * Operator4::from_diagonal(gram.values.map(|d| d.sqrt().recip())) * w.adjoint();
    let corrected = *u * inv_sqrt;
    let norm = (corrected - *u).frobenius_norm();
    Ok((corrected, norm))
}

/// Classical RK4 integration of `i dU/dt = H(Ωt) U` from the identity,
/// re-unitarized at the end.
pub fn propagator_rk4<T: Real>(cfg: &DriveConfig<T>, t: T, n_steps: usize) -> Result<Rk4Propagator<T>> {
    require_frequency(cfg)?;
    if n_steps < MIN_RK4_STEPS {
        return Err(Error::invalid("n_steps", format!("need at least {MIN_RK4_STEPS}, got {n_steps}")));
    }
    if !t.is_finite() {
        return Err(Error::invalid("t", "must be finite"));
    }
    let (operator, correction_norm) = polar_unitary(&integrate_rk4(cfg, t, n_steps))?;
    Ok(Rk4Propagator {
        operator,
        n_steps,
        correction_norm,
    })
}

/// Composite Simpson rule on `[a, b]` with an even number of panels.
pub fn simpson<T: Real>(f: impl Fn(T) -> T, a: T, b: T, panels: usize) -> T {
    let panels = panels + panels % 2;
    let h = (b - a) / T::from_usize(panels).expect("panel count fits the scalar");
    let mut sum = f(a) + f(b);
    for k in 1..panels {
        let w = if k % 2 == 1 { T::lit(4.0) } else { T::lit(2.0) };
        sum += w * f(a + h * T::from_usize(k).expect("panel index fits the scalar"));
    }
    sum * h / T::lit(3.0)
}

/// Phases accumulated by a cyclic (rotating-frame eigen-) state over one period.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PhaseBreakdown<T> {
    pub label: StateLabel,
    pub period: T,
    pub total: PhaseValue<T>,
    pub dynamical: PhaseValue<T>,
    pub geometric: PhaseValue<T>,
    pub quasienergy: T,
    pub sz_expectation: T,
    /// `-T(ℰ + Ω⟨S_z⟩)` before folding.
    pub dynamical_integral: T,
    /// The same integral evaluated by Simpson quadrature along `ψ(t)`.
    pub dynamical_quadrature: T,
    /// `|⟨ψ(0)|ψ(T)⟩|`.
    pub cyclic_overlap: T,
    /// `|U(T)ψ - ζψ|` with `ζ = ⟨ψ|U(T)|ψ⟩`.
    pub floquet_residual: T,
    /// Distance of `(π - arg ζ)/T - ℰ` from the nearest multiple of `Ω`.
    pub quasienergy_mismatch: T,
    /// Closed-form A-A phase of the same state, for comparison.
    pub aa_closed: PhaseValue<T>,
    /// `geometric - aa_closed`, folded; `π` for spin-1/2 rotations.
    pub lift_offset: PhaseValue<T>,
}

pub fn extract_phases<T: Real>(cfg: &DriveConfig<T>, label: StateLabel) -> Result<PhaseBreakdown<T>> {
    let prop = ExactPropagator::new(cfg)?;
    let period = T::TAU() / cfg.omega();
    let spectrum = labeled_spectrum(cfg, T::zero(), Regime::Nonadiabatic)?;
    let psi0 = *spectrum.state(label);
    let quasienergy = spectrum.energy(label);
    let sz_expectation = spin_site_operators::<T>().sz_total.expectation(&psi0).re;

    let psi_t = prop.apply(period, &psi0);
    let zeta = inner(&psi0, &psi_t);
    let total = PhaseValue::new(zeta.arg());
    let floquet_residual = psi_t
        .iter()
        .zip(&psi0)
        .fold(T::zero(), |acc, (a, b)| acc + (*a - *b * zeta).norm_sqr())
        .sqrt();

    let dynamical_integral = -period * (quasienergy + cfg.omega() * sz_expectation);
    let energy_at = |t: T| {
        let psi = prop.apply(t, &psi0);
        build_hamiltonian(cfg, cfg.omega() * t).expectation(&psi).re
    };
    let dynamical_quadrature = -simpson(energy_at, T::zero(), period, QUADRATURE_PANELS);

    let dynamical = PhaseValue::new(dynamical_integral);
    let geometric = PhaseValue::new(total.value() - dynamical.value());

    let floquet = (T::PI() - zeta.arg()) / period;
    let offset = (floquet - quasienergy) / cfg.omega();
    let quasienergy_mismatch = (offset - offset.round()).abs() * cfg.omega();

    let aa_closed = aa_phase_closed(cfg, label)?;
    Ok(PhaseBreakdown {
        label,
        period,
        total,
        dynamical,
        geometric,
        quasienergy,
        sz_expectation,
        dynamical_integral,
        dynamical_quadrature,
        cyclic_overlap: zeta.norm(),
        floquet_residual,
        quasienergy_mismatch,
        aa_closed,
        lift_offset: PhaseValue::new(geometric.value() - aa_closed.value()),
    })
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;

    fn cfg(b: f64, theta: f64, phi: f64, omega: f64, t_lr: f64) -> DriveConfig<f64> {
        DriveConfig::with_phase_difference(b, theta, phi, omega, t_lr).unwrap()
    }

    fn random_cfg(rng: &mut impl Rng) -> DriveConfig<f64> {
        DriveConfig::new(
            rng.gen_range(0.3..3.0),
            rng.gen_range(0.0..PI),
            rng.gen_range(-PI..PI),
            rng.gen_range(-PI..PI),
            rng.gen_range(0.2..3.0),
            rng.gen_range(0.0..2.0),
        )
        .unwrap()
    }

    #[test]
    fn zero_frequency_is_rejected() {
        let c = cfg(2.0, 1.0, PI, 0.0, 1.0);
        assert_eq!(propagator_exact(&c, 1.0).unwrap_err(), Error::ZeroFrequency);
        assert_eq!(propagator_rk4(&c, 1.0, 2000).unwrap_err(), Error::ZeroFrequency);
        assert_eq!(extract_phases(&c, StateLabel::PP).unwrap_err(), Error::ZeroFrequency);
        let c = c.with_omega(1.0).unwrap();
        assert_eq!(propagator_rk4(&c, 1.0, 999).unwrap_err().kind(), "InvalidParameter");
    }

    #[test]
    fn propagators_start_at_identity() {
        let c = cfg(1.4, 0.8, PI, 0.9, 0.6);
        assert!(propagator_exact(&c, 0.0).unwrap().max_abs_diff(&Operator4::identity()) < 1e-15);
        let r = propagator_rk4(&c, 0.0, 1000).unwrap();
        assert!(r.operator.max_abs_diff(&Operator4::identity()) < 1e-15);
        assert!(r.correction_norm < 1e-15);
    }

    #[test]
    fn exact_propagator_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let c = random_cfg(&mut rng);
            let u = propagator_exact(&c, rng.gen_range(-20.0..20.0)).unwrap();
            assert!(u.unitarity_deviation() < 1e-12);
        }
    }

    #[test]
    fn drive_split_reproduces_builder() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..50 {
            let c = random_cfg(&mut rng);
            let split = DriveSplit::new(&c);
            let s = rng.gen_range(-10.0..10.0);
            let want = build_hamiltonian(&c, s).scale(Complex::new(0.0, -1.0));
            assert!(split.generator(s).max_abs_diff(&want) < 1e-14);
        }
    }

    #[test]
    fn exact_solves_schrodinger_equation() {
        let c = cfg(1.8, 1.1, PI, 1.3, 0.7);
        let prop = ExactPropagator::new(&c).unwrap();
        let h = 1e-5;
        for t in [0.3, 1.7, 4.2] {
            let du = (prop.at(t + h) - prop.at(t - h)).scale_real(0.5 / h);
            let rhs = build_hamiltonian(&c, c.omega() * t).scale(Complex::new(0.0, -1.0)) * prop.at(t);
            assert!(du.max_abs_diff(&rhs) < 1e-8);
        }
    }

    #[test]
    fn rk4_agrees_with_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..3 {
            let c = random_cfg(&mut rng);
            let t = period(&c).unwrap();
            let rk = propagator_rk4(&c, t, 100_000).unwrap();
            let exact = propagator_exact(&c, t).unwrap();
            assert!(rk.operator.max_abs_diff(&exact) < 1e-8);
            assert!(rk.correction_norm < 1e-10);
        }
    }

    #[test]
    fn rk4_is_fourth_order() {
        let c = cfg(2.0, 1.0, PI, 1.0, 1.0);
        let t = period(&c).unwrap();
        let exact = propagator_exact(&c, t).unwrap();
        let err = |n| propagator_rk4(&c, t, n).unwrap().operator.max_abs_diff(&exact);
        let (e1, e2) = (err(1000), err(2000));
        let ratio = e1 / e2;
        assert!((12.8..=19.2).contains(&ratio), "{e1:e} {e2:e} ratio {ratio}");
    }

    #[test]
    fn aligned_field_has_closed_propagator() {
        let (b, t_lr, time) = (1.6, 0.7, 3.3);
        let c = cfg(b, 0.0, PI, 0.9, t_lr);
        let (s, co) = (t_lr * time).sin_cos();
        let mut want = Operator4::zero();
        for (spin, sign) in [(0, 1.0), (1, -1.0)] {
            let z = cis(-sign * b * time / 2.0);
            want[(spin, spin)] = z * co;
            want[(spin + 2, spin + 2)] = z * co;
            want[(spin, spin + 2)] = z * Complex::new(0.0, -s);
            want[(spin + 2, spin)] = z * Complex::new(0.0, -s);
        }
        assert!(propagator_exact(&c, time).unwrap().max_abs_diff(&want) < 1e-13);
        assert!(propagator_rk4(&c, time, 20_000).unwrap().operator.max_abs_diff(&want) < 1e-10);
    }

    #[test]
    fn polar_correction_repairs_scaled_unitary() {
        let u = propagator_exact(&cfg(1.0, 0.5, 0.0, 1.0, 0.3), 2.0).unwrap();
        let (fixed, norm) = polar_unitary(&u.scale_real(1.001)).unwrap();
        assert!(fixed.max_abs_diff(&u) < 1e-14);
        assert!((norm - 0.001 * 2.0).abs() < 1e-12);
    }

    #[test]
    fn simpson_is_exact_for_cubics() {
        let v = simpson(|x: f64| x * x * x - 2.0 * x + 1.0, 0.0, 2.0, 10);
        assert!((v - 2.0).abs() < 1e-14);
    }

    #[test]
    fn extracted_phases_are_consistent() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let mut done = 0;
        while done < 40 {
            let phi = if rng.gen_bool(0.5) { 0.0 } else { PI };
            let c = cfg(rng.gen_range(0.5..3.0), rng.gen_range(0.0..PI), phi, rng.gen_range(0.2..4.0), rng.gen_range(0.0..2.0));
            for l in StateLabel::ALL {
                let p = match extract_phases(&c, l) {
                    Ok(p) => p,
                    Err(e) => {
                        assert_eq!(e.kind(), "DegenerateGap");
                        continue;
                    }
                };
                assert!((p.cyclic_overlap - 1.0).abs() < 1e-10);
                assert!(p.floquet_residual < 1e-10);
                assert!(p.quasienergy_mismatch < 1e-8);
                assert!((p.dynamical_quadrature - p.dynamical_integral).abs() < 1e-8);
                let diff = PhaseValue::new(p.total.value() - p.dynamical.value());
                assert!(diff.circular_distance(p.geometric) < 1e-10);
                assert!(p.lift_offset.circular_distance(PhaseValue::new(PI)) < 1e-6, "{p:?}");
                let from_sz = PhaseValue::new(PI + 2.0 * PI * p.sz_expectation);
                assert!(from_sz.circular_distance(p.geometric) < 1e-9);
            }
            done += 1;
        }
    }

    #[test]
    fn floquet_states_diagonalize_period_propagator() {
        let c = cfg(2.0, PI / 3.0, PI, 1.5, 1.0);
        let u = propagator_exact(&c, period(&c).unwrap()).unwrap();
        let es = eigensystem(&build_rotating_hamiltonian(&c)).unwrap();
        for v in &es.vectors {
            let p = Operator4::from_columns(&[*v; 4]);
            let proj = p * p.adjoint().scale_real(0.25);
            assert!(u.commutator(&proj).max_abs() < 1e-12);
        }
    }

    #[test]
    fn f32_propagator_is_usable() {
        let c = DriveConfig::<f32>::with_phase_difference(2.0, 1.0, std::f32::consts::PI, 1.5, 1.0).unwrap();
        let u = propagator_exact(&c, 2.0).unwrap();
        assert!(u.unitarity_deviation() < 1e-5);
    }
}
