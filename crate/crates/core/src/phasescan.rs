//! Topological classification of drive parameters and `(B, Ω)` phase diagrams.
//!
//! A class is the pair of Chern-number magnitudes carried by the `m2 = +1`
//! and `m2 = -1` sectors; within a sector the two `m1` bands always carry
//! opposite signs, so one magnitude per sector is enough.

use std::fmt;

use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::geometry::{chern_closed, chern_lattice, TRANSITION_TOLERANCE};
use crate::qmodel::{DriveConfig, PhaseBranch, StateLabel};
use crate::scalar::Real;
use crate::spectra::Regime;

pub const DEFAULT_LATTICE_RESOLUTION: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PhaseClass {
    pub c_plus: u8,
    pub c_minus: u8,
}

impl PhaseClass {
    pub const TRIVIAL: PhaseClass = PhaseClass { c_plus: 0, c_minus: 0 };
    pub const FULL: PhaseClass = PhaseClass { c_plus: 1, c_minus: 1 };
    pub const MINUS_ONLY: PhaseClass = PhaseClass { c_plus: 0, c_minus: 1 };
    pub const PLUS_ONLY: PhaseClass = PhaseClass { c_plus: 1, c_minus: 0 };

    /// Reduces four per-band Chern numbers (in [`StateLabel::ALL`] order).
    pub fn from_chern(c1: [i32; 4]) -> Result<Self> {
        let sector = |up: StateLabel, down: StateLabel| -> Result<u8> {
            let (a, b) = (c1[up.index()], c1[down.index()]);
            match (a, b) {
                (0, 0) => Ok(0),
                (1, -1) | (-1, 1) => Ok(1),
                _ => Err(Error::NonConverged {
                    detail: format!("Chern numbers {c1:?} do not pair into a class"),
                }),
            }
        };
        Ok(Self {
            c_plus: sector(StateLabel::PP, StateLabel::MP)?,
            c_minus: sector(StateLabel::PM, StateLabel::MM)?,
        })
    }
}

impl fmt::Display for PhaseClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sym = |c: u8| if c == 0 { "0" } else { "ℤ" };
        write!(f, "({},{})", sym(self.c_plus), sym(self.c_minus))
    }
}

impl Serialize for PhaseClass {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "method", rename_all = "lowercase")]
#[derive(Default)]
pub enum Method {
    #[default]
    Closed,
    Lattice { resolution: usize },
}

impl Method {
    pub fn lattice() -> Self {
        Method::Lattice {
            resolution: DEFAULT_LATTICE_RESOLUTION,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Method::Closed => "closed",
            Method::Lattice { .. } => "lattice",
        }
    }
}


/// `min over m2 of ||Δ_{m2}| - 1|`; for the in-phase branch both sectors use `μ`.
pub fn boundary_distance<T: Real>(cfg: &DriveConfig<T>) -> Result<T> {
    let gap = |x: T| (x.abs() - T::one()).abs();
    Ok(match cfg.branch()? {
        PhaseBranch::InPhase => gap(cfg.mu()),
        PhaseBranch::Opposed => gap(cfg.delta(1)).min(gap(cfg.delta(-1))),
    })
}

pub fn classify_point<T: Real>(cfg: &DriveConfig<T>, method: Method) -> Result<PhaseClass> {
    let c1 = match method {
        Method::Closed => StateLabel::try_map(|l| chern_closed(cfg, l, Regime::Nonadiabatic))?,
        Method::Lattice { resolution } => {
            let d = boundary_distance(cfg)?;
            if d <= T::floor_tol(TRANSITION_TOLERANCE) {
                return Err(Error::OnTransition {
                    detail: format!("boundary distance {:e}", d.as_f64()),
                });
            }
            chern_lattice(cfg, resolution, resolution, Regime::Nonadiabatic)?.c1
        }
    };
    PhaseClass::from_chern(c1)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseDiagramCell<T> {
    pub b: T,
    pub omega: T,
    pub class: Result<PhaseClass>,
    pub method: Method,
    pub boundary_distance: T,
}

/// Axis of a cell-centred scan: `n` points at `lo + (i + 1/2)(hi - lo)/n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis<T> {
    pub lo: T,
    pub hi: T,
    pub n: usize,
}

impl<T: Real> Axis<T> {
    pub fn new(lo: T, hi: T, n: usize) -> Self {
        Self { lo, hi, n }
    }

    pub fn point(&self, i: usize) -> T {
        let frac = (T::from_usize(i).expect("index fits the scalar") + T::lit(0.5))
            / T::from_usize(self.n).expect("count fits the scalar");
        self.lo + (self.hi - self.lo) * frac
    }

    fn validate(&self, name: &'static str) -> Result<()> {
        if !(self.lo.is_finite() && self.hi.is_finite()) || self.lo < T::zero() || self.hi <= self.lo {
            return Err(Error::invalid(name, "range must satisfy 0 <= lo < hi"));
        }
        if self.n < 2 {
            return Err(Error::invalid(name, "need at least 2 cells"));
        }
        Ok(())
    }
}

/// Row-major scan (rows: `Ω`, columns: `B`). Per-cell failures are stored
/// in the cell rather than aborting the scan.
pub fn scan_diagram<T: Real>(
    b_axis: Axis<T>,
    omega_axis: Axis<T>,
    t_lr: T,
    phi: T,
    method: Method,
) -> Result<Vec<PhaseDiagramCell<T>>> {
    b_axis.validate("b_range")?;
    omega_axis.validate("omega_range")?;
    let probe = DriveConfig::with_phase_difference(b_axis.point(0), T::zero(), phi, omega_axis.point(0), t_lr)?;
    probe.branch()?;
    if let Method::Lattice { resolution } = method {
        if resolution < crate::geometry::MIN_GRID {
            return Err(Error::invalid("resolution", format!("need at least {}", crate::geometry::MIN_GRID)));
        }
    }

    let cells = (0..omega_axis.n * b_axis.n)
        .into_par_iter()
        .map(|idx| {
            let (b, omega) = (b_axis.point(idx % b_axis.n), omega_axis.point(idx / b_axis.n));
            let cfg = DriveConfig::with_phase_difference(b, T::zero(), phi, omega, t_lr)
                .expect("scan points are validated");
            PhaseDiagramCell {
                b,
                omega,
                class: classify_point(&cfg, method),
                method,
                boundary_distance: boundary_distance(&cfg).expect("branch checked"),
            }
        })
        .collect();
    Ok(cells)
}

#[cfg(test)]
mod tests {
    use std::collections::HashSet;
    use std::f64::consts::PI;

    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;

    fn opposed(b: f64, omega: f64, t_lr: f64) -> DriveConfig<f64> {
        DriveConfig::with_phase_difference(b, 0.0, PI, omega, t_lr).unwrap()
    }

    #[test]
    fn classes_render_with_integers_symbol() {
        assert_eq!(PhaseClass::TRIVIAL.to_string(), "(0,0)");
        assert_eq!(PhaseClass::FULL.to_string(), "(ℤ,ℤ)");
        assert_eq!(PhaseClass::MINUS_ONLY.to_string(), "(0,ℤ)");
        assert_eq!(PhaseClass::PLUS_ONLY.to_string(), "(ℤ,0)");
        assert_eq!(serde_json::to_string(&PhaseClass::MINUS_ONLY).unwrap(), "\"(0,ℤ)\"");
    }

    #[test]
    fn from_chern_requires_opposite_pairs() {
        assert_eq!(PhaseClass::from_chern([0, 1, 0, -1]).unwrap(), PhaseClass::MINUS_ONLY);
        assert_eq!(PhaseClass::from_chern([1, 1, -1, -1]).unwrap(), PhaseClass::FULL);
        assert_eq!(PhaseClass::from_chern([1, 0, 0, 0]).unwrap_err().kind(), "NonConverged");
    }

    #[test]
    fn classify_examples() {
        assert_eq!(classify_point(&opposed(2.0, 0.5, 1.0), Method::Closed).unwrap(), PhaseClass::MINUS_ONLY);
        assert_eq!(classify_point(&opposed(4.0, 0.5, 1.0), Method::Closed).unwrap(), PhaseClass::FULL);
        assert_eq!(classify_point(&opposed(2.0, 0.0, 1.2), Method::Closed).unwrap(), PhaseClass::TRIVIAL);
        assert_eq!(classify_point(&opposed(2.0, 1.5, 1.0), Method::Closed).unwrap(), PhaseClass::MINUS_ONLY);
    }

    #[test]
    fn transitions_are_not_assigned() {
        // Δ₋ = (Ω - 2 t_LR) / B = -1
        let on_line = opposed(2.0, 0.0, 1.0);
        assert_eq!(classify_point(&on_line, Method::Closed).unwrap_err().kind(), "OnTransition");
        assert_eq!(classify_point(&on_line, Method::lattice()).unwrap_err().kind(), "OnTransition");
        let off_branch = DriveConfig::with_phase_difference(2.0, 0.0, 1.0, 1.0, 1.0).unwrap();
        assert_eq!(classify_point(&off_branch, Method::Closed).unwrap_err().kind(), "UnsupportedPhase");
    }

    #[test]
    fn plus_only_class_never_occurs() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100_000 {
            let cfg = opposed(rng.gen_range(1e-3..10.0), rng.gen_range(1e-3..10.0), rng.gen_range(1e-3..10.0));
            if let Ok(class) = classify_point(&cfg, Method::Closed) {
                assert_ne!(class, PhaseClass::PLUS_ONLY, "{cfg:?}");
            }
        }
    }

    #[test]
    fn zero_frequency_matches_adiabatic_step() {
        for i in 1..=60 {
            let b = 0.1 * i as f64;
            let cfg = opposed(b, 0.0, 1.0);
            let want = if cfg.lambda() < 1.0 { PhaseClass::FULL } else { PhaseClass::TRIVIAL };
            match classify_point(&cfg, Method::Closed) {
                Ok(c) => assert_eq!(c, want),
                Err(e) => assert!(e.kind() == "OnTransition" && (cfg.lambda() - 1.0).abs() < 1e-9),
            }
        }
    }

    #[test]
    fn default_window_contains_three_classes() {
        let cells = scan_diagram(Axis::new(0.0, 6.0, 60), Axis::new(0.0, 6.0, 60), 1.0, PI, Method::Closed).unwrap();
        assert_eq!(cells.len(), 3600);
        let classes: HashSet<_> = cells.iter().filter_map(|c| c.class.clone().ok()).collect();
        assert!(classes.contains(&PhaseClass::TRIVIAL));
        assert!(classes.contains(&PhaseClass::FULL));
        assert!(classes.contains(&PhaseClass::MINUS_ONLY));
        assert!(!classes.contains(&PhaseClass::PLUS_ONLY));
        // row-major: the second cell advances B
        assert_eq!(cells[0].omega, cells[1].omega);
        assert!(cells[1].b > cells[0].b);
        assert_eq!(cells[60].b, cells[0].b);
    }

    #[test]
    fn class_changes_only_across_boundary_lines() {
        let (nb, nw) = (80, 80);
        let cells = scan_diagram(Axis::new(0.0, 6.0, nb), Axis::new(0.0, 6.0, nw), 1.0, PI, Method::Closed).unwrap();
        let side = |c: &PhaseDiagramCell<f64>, m2: f64| (c.omega + 2.0 * m2).abs() < c.b;
        let mut changes = 0;
        for r in 0..nw {
            for col in 0..nb {
                let here = &cells[r * nb + col];
                for other in [(col + 1 < nb).then(|| &cells[r * nb + col + 1]), (r + 1 < nw).then(|| &cells[(r + 1) * nb + col])]
                    .into_iter()
                    .flatten()
                {
                    if here.class != other.class {
                        changes += 1;
                        assert!(side(here, 1.0) != side(other, 1.0) || side(here, -1.0) != side(other, -1.0));
                    }
                }
            }
        }
        assert!(changes > 0);
    }

    #[test]
    fn minus_only_band_width_is_twice_min_of_b_and_two_t() {
        let n = 6000;
        let axis = Axis::new(0.0, 12.0, n);
        let dw = 12.0 / n as f64;
        for (b, t_lr) in [(2.0, 1.0), (3.0, 0.5), (1.0, 2.0), (2.5, 0.05)] {
            let width = (0..n)
                .filter(|&i| classify_point(&opposed(b, axis.point(i), t_lr), Method::Closed) == Ok(PhaseClass::MINUS_ONLY))
                .count() as f64
                * dw;
            let want = 2.0 * f64::min(b, 2.0 * t_lr);
            assert!((width - want).abs() <= 2.0 * dw, "b={b} t={t_lr}: {width} vs {want}");
        }
    }

    #[test]
    fn weak_tunnelling_recovers_in_phase_diagram() {
        let axis = Axis::new(0.0, 6.0, 40);
        let opposed = scan_diagram(axis, axis, 1e-7, PI, Method::Closed).unwrap();
        let in_phase = scan_diagram(axis, axis, 1e-7, 0.0, Method::Closed).unwrap();
        for (a, b) in opposed.iter().zip(&in_phase) {
            if (a.omega - a.b).abs() > 1e-5 {
                assert_eq!(a.class, b.class);
                let want = if a.omega < a.b { PhaseClass::FULL } else { PhaseClass::TRIVIAL };
                assert_eq!(a.class, Ok(want));
            }
        }
    }

    #[test]
    fn lattice_scan_agrees_with_closed_form() {
        let (b, w) = (Axis::new(0.5, 5.5, 5), Axis::new(0.0, 5.0, 5));
        let closed = scan_diagram(b, w, 1.0, PI, Method::Closed).unwrap();
        let lattice = scan_diagram(b, w, 1.0, PI, Method::Lattice { resolution: 40 }).unwrap();
        for (c, l) in closed.iter().zip(&lattice) {
            assert_eq!(c.boundary_distance, l.boundary_distance);
            if c.boundary_distance > 0.05 {
                assert_eq!(c.class, l.class, "b={} omega={}", c.b, c.omega);
            }
        }
    }

    #[test]
    fn scan_rejects_bad_axes() {
        let ok = Axis::new(0.0, 6.0, 10);
        assert_eq!(scan_diagram(Axis::new(1.0, 1.0, 10), ok, 1.0, PI, Method::Closed).unwrap_err().kind(), "InvalidParameter");
        assert_eq!(scan_diagram(ok, Axis::new(0.0, 1.0, 1), 1.0, PI, Method::Closed).unwrap_err().kind(), "InvalidParameter");
        assert_eq!(scan_diagram(ok, ok, 1.0, 0.5, Method::Closed).unwrap_err().kind(), "UnsupportedPhase");
    }
}
