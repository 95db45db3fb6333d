//! Banded LU with partial pivoting, bordered solves and a few vector helpers,
//! generic over `f64` and `Complex64`.

use std::fmt::Debug;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub trait Scalar:
    Copy
    + Send
    + Sync
    + Debug
    + PartialEq
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
    + 'static
{
    fn zero() -> Self;
    fn one() -> Self;
    fn from_f64(x: f64) -> Self;
    fn modulus(self) -> f64;
    fn conj(self) -> Self;
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_f64(x: f64) -> Self {
        x
    }
    fn modulus(self) -> f64 {
        self.abs()
    }
    fn conj(self) -> Self {
        self
    }
}

impl Scalar for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn from_f64(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    fn modulus(self) -> f64 {
        self.norm()
    }
    fn conj(self) -> Self {
        Complex64::conj(&self)
    }
}

/// Square matrix with `kl` sub- and `ku` super-diagonals. Rows keep room
/// for the extra `kl` super-diagonals created by pivoting.
#[derive(Clone, Debug)]
pub struct Banded<T> {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<T>,
}

impl<T: Scalar> Banded<T> {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        Self { n, kl, ku, width, data: vec![T::zero(); n * width] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn bandwidths(&self) -> (usize, usize) {
        (self.kl, self.ku)
    }

    #[inline]
    fn pos(&self, i: usize, j: usize) -> usize {
        i * self.width + (j + self.kl - i)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        if j + self.kl < i || j > i + self.ku {
            return T::zero();
        }
        self.data[self.pos(i, j)]
    }

    /// Adds `v` at `(i, j)`, which must lie inside the declared band.
    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: T) {
        assert!(j + self.kl >= i && j <= i + self.ku, "({i},{j}) outside band");
        let p = self.pos(i, j);
        self.data[p] += v;
    }

    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.kl);
                let hi = (i + self.ku).min(self.n - 1);
                let mut acc = T::zero();
                for j in lo..=hi {
                    acc += self.data[self.pos(i, j)] * x[j];
                }
                acc
            })
            .collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.n, self.ku, self.kl);
        for i in 0..self.n {
            let lo = i.saturating_sub(self.kl);
            let hi = (i + self.ku).min(self.n - 1);
            for j in lo..=hi {
                t.add(j, i, self.get(i, j));
            }
        }
        t
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let mut t = self.transpose();
        for v in &mut t.data {
            *v = v.conj();
        }
        t
    }

    /// Adds `s` to every diagonal entry.
    pub fn shift_diagonal(&mut self, s: T) {
        for i in 0..self.n {
            self.add(i, i, s);
        }
    }

    pub fn factor(&self) -> Result<BandedLu<T>> {
        let mut a = self.clone();
        let n = a.n;
        let (kl, ku) = (a.kl, a.ku);
        let mut piv = vec![0usize; n];
        let scale = a.data.iter().map(|v| v.modulus()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        for k in 0..n {
            let last = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = a.get(k, k).modulus();
            for i in k + 1..=last {
                let m = a.get(i, k).modulus();
                if m > best {
                    best = m;
                    p = i;
                }
            }
            piv[k] = p;
            if best <= scale * 1e-300 {
                return Err(Error::Singular(format!("zero pivot in column {k}")));
            }
            let right = (k + kl + ku).min(n - 1);
            if p != k {
                for j in k..=right {
                    let (x, y) = (a.pos(k, j), a.pos(p, j));
                    a.data.swap(x, y);
                }
            }
            let pivot = a.data[a.pos(k, k)];
            for i in k + 1..=last {
                let pi = a.pos(i, k);
                let l = a.data[pi] / pivot;
                a.data[pi] = l;
                if l == T::zero() {
                    continue;
                }
                for j in k + 1..=right {
                    let pk = a.pos(k, j);
                    let pij = a.pos(i, j);
                    let v = a.data[pk];
                    a.data[pij] -= l * v;
                }
            }
        }
        Ok(BandedLu { a, piv })
    }
}

pub struct BandedLu<T> {
    a: Banded<T>,
    piv: Vec<usize>,
}

impl<T: Scalar> BandedLu<T> {
    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let a = &self.a;
        let n = a.n;
        let mut x = b.to_vec();
        for k in 0..n {
            let p = self.piv[k];
            if p != k {
                x.swap(k, p);
            }
            let xk = x[k];
            for i in k + 1..=(k + a.kl).min(n - 1) {
                let l = a.data[a.pos(i, k)];
                x[i] -= l * xk;
            }
        }
        for k in (0..n).rev() {
            let mut acc = x[k];
            for j in k + 1..=(k + a.kl + a.ku).min(n - 1) {
                acc -= a.data[a.pos(k, j)] * x[j];
            }
            x[k] = acc / a.data[a.pos(k, k)];
        }
        x
    }

    /// Smallest pivot modulus relative to the largest, a cheap conditioning hint.
    pub fn pivot_ratio(&self) -> f64 {
        let d: Vec<f64> = (0..self.a.n).map(|k| self.a.data[self.a.pos(k, k)].modulus()).collect();
        let max = d.iter().cloned().fold(0.0, f64::max);
        let min = d.iter().cloned().fold(f64::INFINITY, f64::min);
        min / max
    }
}

/// Small dense LU solve with partial pivoting.
pub fn dense_solve<T: Scalar>(mut m: Vec<Vec<T>>, mut b: Vec<T>) -> Result<Vec<T>> {
    let n = b.len();
    for k in 0..n {
        let p = (k..n)
            .max_by(|&x, &y| m[x][k].modulus().total_cmp(&m[y][k].modulus()))
            .unwrap();
        if m[p][k].modulus() == 0.0 {
            return Err(Error::Singular("dense block".into()));
        }
        m.swap(k, p);
        b.swap(k, p);
        for i in k + 1..n {
            let l = m[i][k] / m[k][k];
            for j in k..n {
                let v = m[k][j];
                m[i][j] -= l * v;
            }
            let bk = b[k];
            b[i] -= l * bk;
        }
    }
    let mut x = vec![T::zero(); n];
    for k in (0..n).rev() {
        let mut acc = b[k];
        for j in k + 1..n {
            acc -= m[k][j] * x[j];
        }
        x[k] = acc / m[k][k];
    }
    Ok(x)
}

/// `[[A, B], [C, D]]` with `A` banded and `B`, `C`, `D` thin and dense.
pub struct Bordered<'a, T> {
    pub a: &'a Banded<T>,
    pub lu: &'a BandedLu<T>,
    /// Columns of `B`.
    pub b: Vec<Vec<T>>,
    /// Rows of `C`.
    pub c: Vec<Vec<T>>,
    pub d: Vec<Vec<T>>,
}

impl<T: Scalar> Bordered<'_, T> {
    fn apply(&self, x: &[T], y: &[T]) -> (Vec<T>, Vec<T>) {
        let mut top = self.a.matvec(x);
        for (col, &yk) in self.b.iter().zip(y) {
            for (t, &v) in top.iter_mut().zip(col) {
                *t += v * yk;
            }
        }
        let bottom = self
            .c
            .iter()
            .zip(&self.d)
            .map(|(row, drow)| {
                let mut acc = dot(row, x);
                for (&dv, &yk) in drow.iter().zip(y) {
                    acc += dv * yk;
                }
                acc
            })
            .collect();
        (top, bottom)
    }

    fn eliminate(&self, xb: &[Vec<T>], f: &[T], g: &[T]) -> Result<(Vec<T>, Vec<T>)> {
        let m = self.b.len();
        let xf = self.lu.solve(f);
        let mut s = self.d.clone();
        let mut rhs = g.to_vec();
        for i in 0..m {
            for j in 0..m {
                s[i][j] -= dot(&self.c[i], &xb[j]);
            }
            rhs[i] -= dot(&self.c[i], &xf);
        }
        let y = dense_solve(s, rhs)?;
        let mut x = xf;
        for (col, &yk) in xb.iter().zip(&y) {
            for (xi, &v) in x.iter_mut().zip(col) {
                *xi -= v * yk;
            }
        }
        Ok((x, y))
    }

    /// Block elimination followed by `refine` rounds of iterative refinement.
    pub fn solve(&self, f: &[T], g: &[T], refine: usize) -> Result<(Vec<T>, Vec<T>)> {
        let xb: Vec<Vec<T>> = self.b.iter().map(|col| self.lu.solve(col)).collect();
        let (mut x, mut y) = self.eliminate(&xb, f, g)?;
        for _ in 0..refine {
            let (top, bottom) = self.apply(&x, &y);
            let rf: Vec<T> = f.iter().zip(&top).map(|(&a, &b)| a - b).collect();
            let rg: Vec<T> = g.iter().zip(&bottom).map(|(&a, &b)| a - b).collect();
            let (dx, dy) = self.eliminate(&xb, &rf, &rg)?;
            for (a, b) in x.iter_mut().zip(&dx) {
                *a += *b;
            }
            for (a, b) in y.iter_mut().zip(&dy) {
                *a += *b;
            }
        }
        Ok((x, y))
    }
}

pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    let mut acc = T::zero();
    for (&x, &y) in a.iter().zip(b) {
        acc += x * y;
    }
    acc
}

/// `Σ conj(a_k) b_k`.
pub fn dotc<T: Scalar>(a: &[T], b: &[T]) -> T {
    let mut acc = T::zero();
    for (&x, &y) in a.iter().zip(b) {
        acc += x.conj() * y;
    }
    acc
}

pub fn norm2<T: Scalar>(a: &[T]) -> f64 {
    a.iter().map(|v| v.modulus().powi(2)).sum::<f64>().sqrt()
}

pub fn norm_inf<T: Scalar>(a: &[T]) -> f64 {
    a.iter().map(|v| v.modulus()).fold(0.0, f64::max)
}

pub fn scale<T: Scalar>(a: &mut [T], s: T) {
    for v in a {
        *v *= s;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_band(n: usize, kl: usize, ku: usize, seed: u64) -> Banded<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut a = Banded::zeros(n, kl, ku);
        for i in 0..n {
            for j in i.saturating_sub(kl)..=(i + ku).min(n - 1) {
                a.add(i, j, rng.gen_range(-1.0..1.0));
            }
        }
        a
    }

    #[test]
    fn lu_solves_random_banded_systems() {
        for (kl, ku) in [(0, 0), (1, 1), (3, 2), (5, 7)] {
            let a = random_band(60, kl, ku, (kl * 10 + ku) as u64);
            let x: Vec<f64> = (0..60).map(|k| (k as f64 * 0.37).sin()).collect();
            let b = a.matvec(&x);
            let got = a.factor().unwrap().solve(&b);
            let err = got.iter().zip(&x).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
            assert!(err < 1e-9, "kl={kl} ku={ku} err={err}");
        }
    }

    #[test]
    fn pivoting_handles_zero_diagonal() {
        let mut a = Banded::zeros(3, 1, 1);
        a.add(0, 1, 1.0);
        a.add(1, 0, 1.0);
        a.add(1, 2, 2.0);
        a.add(2, 1, 3.0);
        a.add(2, 2, 1.0);
        let x = [1.0, -2.0, 0.5];
        let got = a.factor().unwrap().solve(&a.matvec(&x));
        for (p, q) in got.iter().zip(x) {
            assert!((p - q).abs() < 1e-14);
        }
    }

    #[test]
    fn complex_solve_and_adjoint() {
        let n = 40;
        let mut a = Banded::<Complex64>::zeros(n, 2, 3);
        for i in 0..n {
            for j in i.saturating_sub(2)..=(i + 3).min(n - 1) {
                let v = Complex64::new(((i * 7 + j * 3) % 11) as f64 - 5.0, ((i + 2 * j) % 5) as f64 - 2.0);
                a.add(i, j, v);
            }
            a.add(i, i, Complex64::new(12.0, 0.0));
        }
        let x: Vec<Complex64> = (0..n).map(|k| Complex64::new(k as f64, -(k as f64) / 3.0)).collect();
        let got = a.factor().unwrap().solve(&a.matvec(&x));
        assert!(got.iter().zip(&x).all(|(p, q)| (p - q).norm() < 1e-9));
        let y: Vec<Complex64> = (0..n).map(|k| Complex64::new((k as f64).cos(), 1.0)).collect();
        let lhs = dotc(&y, &a.matvec(&x));
        let rhs = dotc(&a.adjoint().matvec(&y), &x);
        assert!((lhs - rhs).norm() < 1e-9);
    }

    #[test]
    fn bordered_matches_dense_solution() {
        let n = 30;
        let a = random_band(n, 2, 2, 5);
        let lu = a.factor().unwrap();
        let b: Vec<f64> = (0..n).map(|k| (k as f64).cos()).collect();
        let c: Vec<f64> = (0..n).map(|k| if k == 7 { 1.0 } else { 0.0 }).collect();
        let sys = Bordered { a: &a, lu: &lu, b: vec![b.clone()], c: vec![c.clone()], d: vec![vec![0.0]] };
        let x: Vec<f64> = (0..n).map(|k| 0.1 * k as f64).collect();
        let y = 0.7;
        let mut f = a.matvec(&x);
        for (fi, bi) in f.iter_mut().zip(&b) {
            *fi += bi * y;
        }
        let g = [dot(&c, &x)];
        let (gx, gy) = sys.solve(&f, &g, 2).unwrap();
        assert!((gy[0] - y).abs() < 1e-10);
        assert!(gx.iter().zip(&x).all(|(p, q)| (p - q).abs() < 1e-10));
    }
}
