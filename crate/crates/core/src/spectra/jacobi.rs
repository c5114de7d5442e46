//! Cyclic Jacobi diagonalization of a Hermitian 4×4 matrix.

use num_complex::Complex;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::qmodel::{Ket, Operator4};
use crate::scalar::Real;

pub(crate) const MAX_SWEEPS: usize = 50;

/// Unsorted eigenvalues and the unitary whose columns are the eigenvectors.
pub(crate) fn jacobi_hermitian<T: Real>(h: &Operator4<T>) -> Result<([T; 4], Operator4<T>)> {
    let mut a = h.entries;
    let mut v = Operator4::<T>::identity().entries;
    let scale = h.frobenius_norm();
    let tol = T::floor_tol(1e-14) * scale;

    // diagonal of a Hermitian input is real; drop rounding noise in the imaginary part
    for (k, row) in a.iter_mut().enumerate() {
        row[k] = Complex::new(row[k].re, T::zero());
    }

    for _ in 0..MAX_SWEEPS {
        if off_diagonal_norm(&a) <= tol {
            let values = [a[0][0].re, a[1][1].re, a[2][2].re, a[3][3].re];
            return Ok((values, Operator4 { entries: v }));
        }
        for p in 0..3 {
            for q in (p + 1)..4 {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }
    Err(Error::NonConverged {
        detail: format!(
            "Jacobi eigensolver: off-diagonal norm {:e} after {MAX_SWEEPS} sweeps",
            off_diagonal_norm(&a).as_f64()
        ),
    })
}

fn off_diagonal_norm<T: Real>(a: &[[Complex<T>; 4]; 4]) -> T {
    let mut s = T::zero();
    for (i, row) in a.iter().enumerate() {
        for (j, x) in row.iter().enumerate() {
            if i != j {
                s += x.norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Annihilates `a[p][q]` with the unitary `G = diag(1, e^{-iα}) · R(c, s)`
/// acting on the `(p, q)` plane, `α = arg a[p][q]`.
fn rotate<T: Real>(a: &mut [[Complex<T>; 4]; 4], v: &mut [[Complex<T>; 4]; 4], p: usize, q: usize) {
    let apq = a[p][q];
    let mag = apq.norm_sqr().sqrt();
    if mag == T::zero() {
        return;
    }
    let phase = apq.unscale(mag); // e^{iα}
    let app = a[p][p].re;
    let aqq = a[q][q].re;
    let tau = (aqq - app) / (T::lit(2.0) * mag);
    let t = if tau >= T::zero() {
        T::one() / (tau + (T::one() + tau * tau).sqrt())
    } else {
        -T::one() / (-tau + (T::one() + tau * tau).sqrt())
    };
    let c = T::one() / (T::one() + t * t).sqrt();
    let s = t * c;

    // G = [[c, s], [-s e^{-iα}, c e^{-iα}]] in the (p, q) plane
    let conj_phase = phase.conj();
    let g_pp = Complex::new(c, T::zero());
    let g_pq = Complex::new(s, T::zero());
    let g_qp = conj_phase.scale(-s);
    let g_qq = conj_phase.scale(c);

    // A <- A G
    for row in a.iter_mut() {
        let (x, y) = (row[p], row[q]);
        row[p] = x * g_pp + y * g_qp;
        row[q] = x * g_pq + y * g_qq;
    }
    // A <- G† A
    for k in 0..4 {
        let (x, y) = (a[p][k], a[q][k]);
        a[p][k] = g_pp.conj() * x + g_qp.conj() * y;
        a[q][k] = g_pq.conj() * x + g_qq.conj() * y;
    }
    a[p][q] = Complex::zero();
    a[q][p] = Complex::zero();
    a[p][p] = Complex::new(a[p][p].re, T::zero());
    a[q][q] = Complex::new(a[q][q].re, T::zero());
    // V <- V G
    for row in v.iter_mut() {
        let (x, y) = (row[p], row[q]);
        row[p] = x * g_pp + y * g_qp;
        row[q] = x * g_pq + y * g_qq;
    }
}

/// Multiplies `v` by the phase that makes its largest-modulus component real
/// and positive (first such index on ties).
pub(crate) fn fix_phase<T: Real>(v: &mut Ket<T>) {
    let mut best = 0;
    for k in 1..4 {
        if v[k].norm_sqr() > v[best].norm_sqr() {
            best = k;
        }
    }
    let m = v[best].norm_sqr().sqrt();
    if m > T::zero() {
        let z = v[best].conj().unscale(m);
        for x in v.iter_mut() {
            *x *= z;
        }
    }
}
