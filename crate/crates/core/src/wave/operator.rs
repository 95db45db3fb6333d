//! Row-independent stencils for the MFDE and its linearisations, and their
//! assembly into banded matrices with the exponential tails folded into the
//! boundary columns.

use crate::grid::{shift_stencil, Scheme, Tails};
use crate::linalg::{Banded, Scalar};

/// `(offset, weight)` pairs, one per distinct offset.
pub type Stencil<T> = Vec<(isize, T)>;

pub fn merge<T: Scalar>(entries: impl IntoIterator<Item = (isize, T)>) -> Stencil<T> {
    let mut out: Stencil<T> = Vec::new();
    for (o, w) in entries {
        match out.iter_mut().find(|(p, _)| *p == o) {
            Some(e) => e.1 += w,
            None => out.push((o, w)),
        }
    }
    out.sort_by_key(|e| e.0);
    out
}

/// `-c D + Σ_s S_s - 4` for the four shifts.
pub fn mfde_stencil(c: f64, shifts: &[f64; 4], scheme: Scheme, h: f64) -> Stencil<f64> {
    let mut all: Vec<(isize, f64)> = scheme.derivative(h, c).into_iter().map(|(o, w)| (o, -c * w)).collect();
    for &s in shifts {
        all.extend(shift_stencil(s, h));
    }
    all.push((0, -4.0));
    merge(all)
}

/// `c D + Σ_s S_{-s} - 4`, the formal adjoint of [`mfde_stencil`]. For the
/// upwind and central schemes this is exactly the transposed stencil.
pub fn adjoint_stencil(c: f64, shifts: &[f64; 4], scheme: Scheme, h: f64) -> Stencil<f64> {
    mfde_stencil(-c, &shifts.map(|s| -s), scheme, h)
}

/// Stencil of the transposed matrix (ignoring boundary folding).
pub fn transpose_stencil<T: Scalar>(st: &[(isize, T)]) -> Stencil<T> {
    merge(st.iter().map(|&(o, w)| (-o, w)))
}

pub fn bandwidths<T>(st: &[(isize, T)]) -> (usize, usize) {
    let kl = st.iter().map(|e| (-e.0).max(0) as usize).max().unwrap_or(0);
    let ku = st.iter().map(|e| e.0.max(0) as usize).max().unwrap_or(0);
    (kl, ku)
}

/// Matrix of `v ↦ stencil * v + diag ⊙ v` for functions decaying like the
/// homogeneous tails.
pub fn assemble<T: Scalar>(st: &[(isize, T)], diag: &[T], tails: &Tails, h: f64) -> Banded<T> {
    let n = diag.len();
    let (kl, ku) = bandwidths(st);
    let mut m = Banded::zeros(n, kl, ku);
    for (k, &d) in diag.iter().enumerate() {
        m.add(k, k, d);
        for &(o, w) in st {
            let j = k as isize + o;
            if j >= 0 && (j as usize) < n {
                m.add(k, j as usize, w);
            } else {
                let (b, f) = tails.ghost_factor(j, n, h);
                m.add(k, b, w * T::from_f64(f));
            }
        }
    }
    m
}

/// `stencil * v` with inhomogeneous tail continuation (no diagonal term).
pub fn apply<T: Scalar>(st: &[(isize, T)], v: &[T], tails: &Tails, h: f64) -> Vec<T> {
    (0..v.len())
        .map(|k| {
            let mut acc = T::zero();
            for &(o, w) in st {
                acc += w * tails.value(v, k as isize + o, h);
            }
            acc
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn assembled_matrix_matches_apply() {
        let h = 0.1;
        let st = mfde_stencil(0.3, &[0.73, 1.0, -0.73, -1.0], Scheme::Fourth, h);
        let tails = Tails { lo: 0.0, hi: 0.0, eta_left: 0.7, eta_right: 1.1 };
        let n = 60;
        let v: Vec<f64> = (0..n).map(|k| ((k as f64) * 0.37).sin()).collect();
        let diag: Vec<f64> = (0..n).map(|k| -0.1 * k as f64).collect();
        let m = assemble(&st, &diag, &tails, h);
        let direct = apply(&st, &v, &tails, h);
        let mv = m.matvec(&v);
        for k in 0..n {
            assert!((mv[k] - direct[k] - diag[k] * v[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn adjoint_stencil_is_the_transpose() {
        let h = 0.05;
        let sh = [0.41, 1.0, -0.41, -1.0];
        for scheme in [Scheme::Upwind, Scheme::Central] {
            for c in [0.2, -0.3] {
                let a = mfde_stencil(c, &sh, scheme, h);
                let b = adjoint_stencil(c, &sh, scheme, h);
                let t = transpose_stencil(&a);
                assert_eq!(b.len(), t.len());
                for (p, q) in b.iter().zip(&t) {
                    assert_eq!(p.0, q.0);
                    assert!((p.1 - q.1).abs() < 1e-12);
                }
            }
        }
    }
}
