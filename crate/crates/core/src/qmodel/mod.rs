//! Hilbert space, operators and Hamiltonians of a single spin-1/2 particle
//! tunnelling between two sites under a circularly polarized drive.
//!
//! Basis order is `|L↑⟩, |L↓⟩, |R↑⟩, |R↓⟩`, so site operators are
//! block-diagonal. Spin operators are `S = σ/2`.

mod operator;

use std::fmt;
use std::str::FromStr;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{cis, wrap_angle, Real};

pub use operator::{inner, norm, scale_ket, Ket, Operator4};

/// Physical parameters of the drive.
///
/// The field has magnitude `b` and polar angle `theta`; its transverse part
/// rotates with phase `Ωt + phi_i` at site `i`. Units have `ħ = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDriveConfig<T>", bound(deserialize = "T: Real + Deserialize<'de>"))]
pub struct DriveConfig<T> {
    b: T,
    theta: T,
    phi_l: T,
    phi_r: T,
    omega: T,
    t_lr: T,
}

#[derive(Deserialize)]
struct RawDriveConfig<T> {
    b: T,
    theta: T,
    phi_l: T,
    phi_r: T,
    omega: T,
    t_lr: T,
}

impl<T: Real> TryFrom<RawDriveConfig<T>> for DriveConfig<T> {
    type Error = Error;
    fn try_from(r: RawDriveConfig<T>) -> Result<Self> {
        DriveConfig::new(r.b, r.theta, r.phi_l, r.phi_r, r.omega, r.t_lr)
    }
}

/// Phase difference between the two site drives for which closed forms exist.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PhaseBranch {
    /// `φ = 0`: fields in phase.
    InPhase,
    /// `φ = π`: fields in phase opposition.
    Opposed,
}

impl<T: Real> DriveConfig<T> {
    pub fn new(b: T, theta: T, phi_l: T, phi_r: T, omega: T, t_lr: T) -> Result<Self> {
        let finite = [b, theta, phi_l, phi_r, omega, t_lr]
            .iter()
            .all(|x| x.is_finite());
        if !finite {
            return Err(Error::invalid("config", "all parameters must be finite"));
        }
        if b <= T::zero() {
            return Err(Error::invalid("b", format!("must be > 0, got {b}")));
        }
        if theta < T::zero() || theta > T::PI() {
            return Err(Error::invalid("theta", format!("must lie in [0, pi], got {theta}")));
        }
        if omega < T::zero() {
            return Err(Error::invalid("omega", format!("must be >= 0, got {omega}")));
        }
        if t_lr < T::zero() {
            return Err(Error::invalid("t_lr", format!("must be >= 0, got {t_lr}")));
        }
        Ok(Self {
            b,
            theta,
            phi_l,
            phi_r,
            omega,
            t_lr,
        })
    }

    /// Configuration with drive phases `phi_l = 0`, `phi_r = -phi`; only the
    /// difference `phi_l - phi_r` enters any computed quantity.
    pub fn with_phase_difference(b: T, theta: T, phi: T, omega: T, t_lr: T) -> Result<Self> {
        Self::new(b, theta, T::zero(), -phi, omega, t_lr)
    }

    pub fn b(&self) -> T {
        self.b
    }
    pub fn theta(&self) -> T {
        self.theta
    }
    pub fn phi_l(&self) -> T {
        self.phi_l
    }
    pub fn phi_r(&self) -> T {
        self.phi_r
    }
    pub fn omega(&self) -> T {
        self.omega
    }
    pub fn t_lr(&self) -> T {
        self.t_lr
    }

    pub fn with_theta(&self, theta: T) -> Result<Self> {
        Self::new(self.b, theta, self.phi_l, self.phi_r, self.omega, self.t_lr)
    }

    pub fn with_omega(&self, omega: T) -> Result<Self> {
        Self::new(self.b, self.theta, self.phi_l, self.phi_r, omega, self.t_lr)
    }

    pub fn with_t_lr(&self, t_lr: T) -> Result<Self> {
        Self::new(self.b, self.theta, self.phi_l, self.phi_r, self.omega, t_lr)
    }

    /// Same parameters at polar angle `theta`, which may lie slightly outside
    /// `[0, π]` (finite-difference stencils straddling a pole).
    pub(crate) fn at_theta_unchecked(&self, theta: T) -> Self {
        Self { theta, ..*self }
    }

    /// `λ = 2 t_LR / B`.
    pub fn lambda(&self) -> T {
        T::lit(2.0) * self.t_lr / self.b
    }

    /// `μ = Ω / B`.
    pub fn mu(&self) -> T {
        self.omega / self.b
    }

    /// `Δ_{m2} = (Ω + 2 m2 t_LR) / B`.
    pub fn delta(&self, m2: i8) -> T {
        (self.omega + T::lit(2.0 * f64::from(m2)) * self.t_lr) / self.b
    }

    /// `φ = phi_l - phi_r`, folded into `(-π, π]`.
    pub fn phase_difference(&self) -> T {
        wrap_angle(self.phi_l - self.phi_r)
    }

    /// Closed-form branch of the phase difference (tolerance `1e-9` mod 2π).
    pub fn branch(&self) -> Result<PhaseBranch> {
        let phi = self.phase_difference();
        let tol = T::floor_tol(1e-9);
        if phi.abs() <= tol {
            Ok(PhaseBranch::InPhase)
        } else if (T::PI() - phi.abs()).abs() <= tol {
            Ok(PhaseBranch::Opposed)
        } else {
            Err(Error::UnsupportedPhase { phi: phi.as_f64() })
        }
    }
}

/// Band label `(m1, m2)`, each `±1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StateLabel {
    m1: i8,
    m2: i8,
}

impl StateLabel {
    pub const PP: StateLabel = StateLabel { m1: 1, m2: 1 };
    pub const PM: StateLabel = StateLabel { m1: 1, m2: -1 };
    pub const MP: StateLabel = StateLabel { m1: -1, m2: 1 };
    pub const MM: StateLabel = StateLabel { m1: -1, m2: -1 };

    /// Canonical order used for tables and per-label arrays.
    pub const ALL: [StateLabel; 4] = [Self::PP, Self::PM, Self::MP, Self::MM];

    pub fn new(m1: i8, m2: i8) -> Result<Self> {
        if m1.abs() != 1 || m2.abs() != 1 {
            return Err(Error::invalid("label", format!("({m1}, {m2}) is not in {{+1,-1}}^2")));
        }
        Ok(Self { m1, m2 })
    }

    /// Evaluates `f` for every label in canonical order, stopping at the first error.
    pub fn try_map<U, E>(mut f: impl FnMut(StateLabel) -> std::result::Result<U, E>) -> std::result::Result<[U; 4], E> {
        let [a, b, c, d] = Self::ALL;
        Ok([f(a)?, f(b)?, f(c)?, f(d)?])
    }

    pub fn m1(&self) -> i8 {
        self.m1
    }

    pub fn m2(&self) -> i8 {
        self.m2
    }

    /// Position in [`StateLabel::ALL`].
    pub fn index(&self) -> usize {
        usize::from(self.m1 < 0) * 2 + usize::from(self.m2 < 0)
    }

    pub(crate) fn m1_real<T: Real>(&self) -> T {
        T::lit(f64::from(self.m1))
    }

    pub(crate) fn m2_real<T: Real>(&self) -> T {
        T::lit(f64::from(self.m2))
    }
}

impl fmt::Display for StateLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = |m: i8| if m > 0 { '+' } else { '-' };
        write!(f, "m1{}_m2{}", s(self.m1), s(self.m2))
    }
}

impl FromStr for StateLabel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        StateLabel::ALL
            .into_iter()
            .find(|l| l.to_string() == s)
            .ok_or_else(|| Error::invalid("label", format!("unknown label `{s}`")))
    }
}

impl Serialize for StateLabel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for StateLabel {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Spin components of each site, the hopping matrix and total `S_z`.
#[derive(Clone, Copy)]
pub struct SpinSiteOperators<T> {
    pub sx_l: Operator4<T>,
    pub sy_l: Operator4<T>,
    pub sz_l: Operator4<T>,
    pub sx_r: Operator4<T>,
    pub sy_r: Operator4<T>,
    pub sz_r: Operator4<T>,
    pub hop: Operator4<T>,
    pub sz_total: Operator4<T>,
}

pub fn spin_site_operators<T: Real>() -> SpinSiteOperators<T> {
    let half = T::lit(0.5);
    let re = |x: T| Complex::new(x, T::zero());
    let im = |x: T| Complex::new(T::zero(), x);
    let site = |offset: usize| {
        let mut sx = Operator4::zero();
        let mut sy = Operator4::zero();
        let mut sz = Operator4::zero();
        let (up, dn) = (offset, offset + 1);
        sx[(up, dn)] = re(half);
        sx[(dn, up)] = re(half);
        sy[(up, dn)] = im(-half);
        sy[(dn, up)] = im(half);
        sz[(up, up)] = re(half);
        sz[(dn, dn)] = re(-half);
        (sx, sy, sz)
    };
    let (sx_l, sy_l, sz_l) = site(0);
    let (sx_r, sy_r, sz_r) = site(2);
    let mut hop = Operator4::zero();
    for (i, j) in [(0, 2), (2, 0), (1, 3), (3, 1)] {
        hop[(i, j)] = re(T::one());
    }
    SpinSiteOperators {
        sx_l,
        sy_l,
        sz_l,
        sx_r,
        sy_r,
        sz_r,
        hop,
        sz_total: sz_l + sz_r,
    }
}

/// Assembles `z·S_z_total + t·Hop + transverse·Σ_i [cos(a_i) S_x^i + sin(a_i) S_y^i]`.
fn assemble<T: Real>(z: T, transverse: T, t_lr: T, angle_l: T, angle_r: T) -> Operator4<T> {
    let half = T::lit(0.5);
    let mut h = Operator4::from_diagonal([z * half, -z * half, z * half, -z * half]);
    let t = Complex::new(t_lr, T::zero());
    for (i, j) in [(0, 2), (2, 0), (1, 3), (3, 1)] {
        h[(i, j)] = t;
    }
    let flip_l = cis(-angle_l).scale(transverse * half);
    let flip_r = cis(-angle_r).scale(transverse * half);
    h[(0, 1)] = flip_l;
    h[(1, 0)] = flip_l.conj();
    h[(2, 3)] = flip_r;
    h[(3, 2)] = flip_r.conj();
    h
}

/// Lab-frame Hamiltonian at drive phase `s` (`s = Ωt` for time evolution,
/// or the loop parameter `varphi` for adiabatic transport).
pub fn build_hamiltonian<T: Real>(cfg: &DriveConfig<T>, s: T) -> Operator4<T> {
    let (sin, cos) = cfg.theta.sin_cos();
    assemble(
        cfg.b * cos,
        cfg.b * sin,
        cfg.t_lr,
        s + cfg.phi_l,
        s + cfg.phi_r,
    )
}

/// Time-independent Hamiltonian in the frame co-rotating with the drive:
/// the Zeeman term becomes `B cosθ - Ω`, site phases stay static.
pub fn build_rotating_hamiltonian<T: Real>(cfg: &DriveConfig<T>) -> Operator4<T> {
    rotating_hamiltonian_at(cfg, T::zero())
}

/// `R(s) H̃ R(s)†` with `R(s) = exp(-i s S_z_total)`: the rotating-frame
/// Hamiltonian with both drive phases advanced by `s`.
pub(crate) fn rotating_hamiltonian_at<T: Real>(cfg: &DriveConfig<T>, s: T) -> Operator4<T> {
    let (sin, cos) = cfg.theta.sin_cos();
    assemble(
        cfg.b * cos - cfg.omega,
        cfg.b * sin,
        cfg.t_lr,
        s + cfg.phi_l,
        s + cfg.phi_r,
    )
}

/// `exp(-i s S_z_total)`, diagonal in this basis.
pub fn frame_rotation<T: Real>(s: T) -> Operator4<T> {
    let half = s * T::lit(0.5);
    Operator4::from_complex_diagonal([cis(-half), cis(half), cis(-half), cis(half)])
}

/// Applies `exp(-i s S_z_total)` to a ket without forming the matrix.
pub fn rotate_ket<T: Real>(v: &Ket<T>, s: T) -> Ket<T> {
    let half = s * T::lit(0.5);
    let (down, up) = (cis(-half), cis(half));
    [v[0] * down, v[1] * up, v[2] * down, v[3] * up]
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    type C = Complex<f64>;

    fn cfg(b: f64, theta: f64, phi_l: f64, phi_r: f64, omega: f64, t_lr: f64) -> DriveConfig<f64> {
        DriveConfig::new(b, theta, phi_l, phi_r, omega, t_lr).unwrap()
    }

    /// The Hamiltonian assembled term by term from the site operators.
    fn hamiltonian_from_operators(c: &DriveConfig<f64>, s: f64) -> Operator4<f64> {
        let ops = spin_site_operators::<f64>();
        let (b, th) = (c.b(), c.theta());
        let site = |sx: Operator4<f64>, sy: Operator4<f64>, phase: f64| {
            sx.scale_real((s + phase).cos()) + sy.scale_real((s + phase).sin())
        };
        ops.sz_total.scale_real(b * th.cos())
            + ops.hop.scale_real(c.t_lr())
            + (site(ops.sx_l, ops.sy_l, c.phi_l()) + site(ops.sx_r, ops.sy_r, c.phi_r()))
                .scale_real(b * th.sin())
    }

    #[test]
    fn validation_rejects_out_of_range() {
        assert!(DriveConfig::new(0.0, 0.1, 0.0, 0.0, 0.0, 0.0).is_err());
        assert!(DriveConfig::new(1.0, 4.0, 0.0, 0.0, 0.0, 0.0).is_err());
        assert!(DriveConfig::new(1.0, -0.1, 0.0, 0.0, 0.0, 0.0).is_err());
        assert!(DriveConfig::new(1.0, 0.1, 0.0, 0.0, -1.0, 0.0).is_err());
        assert!(DriveConfig::new(1.0, 0.1, 0.0, 0.0, 0.0, -1.0).is_err());
        assert!(DriveConfig::new(1.0, f64::NAN, 0.0, 0.0, 0.0, 0.0).is_err());
        let e = DriveConfig::new(1.0, 4.0, 0.0, 0.0, 0.0, 0.0).unwrap_err();
        assert_eq!(e.kind(), "InvalidParameter");
    }

    #[test]
    fn derived_ratios() {
        let c = cfg(2.0, 0.3, 0.0, PI, 1.5, 1.0);
        assert_eq!(c.lambda(), 1.0);
        assert_eq!(c.mu(), 0.75);
        assert_eq!(c.delta(1), 1.75);
        assert_eq!(c.delta(-1), -0.25);
        assert_eq!(c.branch().unwrap(), PhaseBranch::Opposed);
        assert_eq!(cfg(2.0, 0.3, 0.2, 0.2, 0.0, 1.0).branch().unwrap(), PhaseBranch::InPhase);
        assert_eq!(cfg(2.0, 0.3, 0.0, -PI, 0.0, 1.0).branch().unwrap(), PhaseBranch::Opposed);
        assert_eq!(cfg(2.0, 0.3, 0.0, 1.0, 0.0, 1.0).branch().unwrap_err().kind(), "UnsupportedPhase");
    }

    #[test]
    fn labels_are_indexed_and_printed() {
        for (k, l) in StateLabel::ALL.iter().enumerate() {
            assert_eq!(l.index(), k);
            assert_eq!(l.to_string().parse::<StateLabel>().unwrap(), *l);
        }
        assert_eq!(StateLabel::PM.to_string(), "m1+_m2-");
        assert!(StateLabel::new(0, 1).is_err());
        assert!(StateLabel::new(1, 2).is_err());
    }

    #[test]
    fn site_operators_obey_su2_per_site() {
        let o = spin_site_operators::<f64>();
        let i = C::new(0.0, 1.0);
        assert_eq!(o.sx_l.commutator(&o.sy_l), o.sz_l.scale(i));
        assert_eq!(o.sy_l.commutator(&o.sz_l), o.sx_l.scale(i));
        assert_eq!(o.sx_r.commutator(&o.sy_r), o.sz_r.scale(i));
        assert_eq!(o.sx_l.commutator(&o.sy_r), Operator4::zero());
        assert_eq!(o.sz_l.commutator(&o.sx_r), Operator4::zero());
        for op in [o.sx_l, o.sy_l, o.sz_l, o.sx_r, o.sy_r, o.sz_r, o.hop, o.sz_total] {
            assert!(op.is_hermitian());
        }
        assert_eq!(o.sz_total, o.sz_l + o.sz_r);
    }

    #[test]
    fn total_sz_spectrum_and_hop_square() {
        let o = spin_site_operators::<f64>();
        let diag: Vec<f64> = (0..4).map(|k| o.sz_total[(k, k)].re).collect();
        assert_eq!(diag, vec![0.5, -0.5, 0.5, -0.5]);
        assert_eq!(o.sz_total.max_abs_diff(&Operator4::from_diagonal([0.5, -0.5, 0.5, -0.5])), 0.0);
        assert_eq!(o.hop * o.hop, Operator4::identity());
    }

    #[test]
    fn theta_zero_is_diagonal_zeeman() {
        for s in [0.0, 1.3, -2.0] {
            let h = build_hamiltonian(&cfg(2.0, 0.0, 0.4, 1.1, 0.7, 0.0), s);
            assert!(h.max_abs_diff(&Operator4::from_diagonal([1.0, -1.0, 1.0, -1.0])) < 1e-15);
        }
    }

    #[test]
    fn direct_assembly_matches_operator_sum() {
        let c = cfg(1.7, 0.9, 0.3, -2.2, 0.4, 0.65);
        for s in [0.0, 0.5, 3.0, -1.2] {
            let d = build_hamiltonian(&c, s).max_abs_diff(&hamiltonian_from_operators(&c, s));
            assert!(d < 1e-15, "{d}");
        }
    }

    #[test]
    fn rotating_equals_lab_at_zero_frequency() {
        let c = cfg(1.3, 1.1, 0.2, 2.0, 0.0, 0.8);
        assert_eq!(build_rotating_hamiltonian(&c), build_hamiltonian(&c, 0.0));
    }

    #[test]
    fn rotation_matrix_matches_ket_rotation() {
        let v = [C::new(1.0, 0.5), C::new(-0.3, 0.2), C::new(0.0, 1.0), C::new(0.7, 0.0)];
        let a = frame_rotation(0.83).apply(&v);
        let b = rotate_ket(&v, 0.83);
        for k in 0..4 {
            assert!((a[k] - b[k]).norm() < 1e-15);
        }
        // full 2π turn is -1 on the single-particle sector
        assert!(frame_rotation(2.0 * PI).max_abs_diff(&Operator4::identity().scale_real(-1.0)) < 1e-15);
    }

    fn arb_cfg() -> impl Strategy<Value = DriveConfig<f64>> {
        (0.1..5.0, 0.0..PI, -PI..PI, -PI..PI, 0.0..5.0, 0.0..3.0)
            .prop_map(|(b, th, pl, pr, w, t)| cfg(b, th, pl, pr, w, t))
    }

    proptest! {
        #[test]
        fn hamiltonian_is_hermitian_and_periodic(c in arb_cfg(), s in -10.0..10.0f64) {
            let h = build_hamiltonian(&c, s);
            prop_assert!(h.is_hermitian());
            prop_assert!(h.max_abs_diff(&build_hamiltonian(&c, s + 2.0 * PI)) < 1e-12 * h.max_abs());
            prop_assert!(build_rotating_hamiltonian(&c).is_hermitian());
        }

        #[test]
        fn frame_transformation_law(c in arb_cfg(), t in 0.0..20.0f64) {
            // U†(t) H(Ωt) U(t) - Ω S_z_total = H̃
            let o = spin_site_operators::<f64>();
            let u = frame_rotation(c.omega() * t);
            let lhs = u.adjoint() * build_hamiltonian(&c, c.omega() * t) * u
                - o.sz_total.scale_real(c.omega());
            let d = lhs.max_abs_diff(&build_rotating_hamiltonian(&c));
            prop_assert!(d < 1e-12, "deviation {}", d);
        }

        #[test]
        fn rotated_frame_shifts_drive_phase(c in arb_cfg(), s in -5.0..5.0f64) {
            let u = frame_rotation(s);
            let lhs = u * build_rotating_hamiltonian(&c) * u.adjoint();
            prop_assert!(lhs.max_abs_diff(&rotating_hamiltonian_at(&c, s)) < 1e-12);
        }
    }
}
