//! Dense complex matrices and the Hermitian eigensolver.

use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::scalar::{tol, Real};

/// Dense row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> ComplexMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![Complex::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex<T>) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from row-major entries. Rejects non-finite entries.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<Complex<T>>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::dims(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<Complex<T>>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::dims("ragged rows"));
        }
        Self::from_vec(r, c, rows.iter().flatten().copied().collect())
    }

    pub fn from_real_diagonal(diag: &[T]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = Complex::new(d, T::zero());
        }
        m
    }

    /// `|u><v|`
    pub fn outer(u: &[Complex<T>], v: &[Complex<T>]) -> Self {
        Self::from_fn(u.len(), v.len(), |i, j| u[i] * v[j].conj())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[Complex<T>] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[Complex<T>] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<Complex<T>> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn scale(&self, s: T) -> Self {
        self.map(|z| z * s)
    }

    pub fn scale_complex(&self, s: Complex<T>) -> Self {
        self.map(|z| z * s)
    }

    pub fn map(&self, f: impl Fn(Complex<T>) -> Complex<T>) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&z| f(z)).collect() }
    }

    pub fn trace(&self) -> Complex<T> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matmul shape mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                let orow = other.row(k);
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, &b) in dst.iter_mut().zip(orow) {
                    *d += a * b;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Complex<T>]) -> Vec<Complex<T>> {
        assert_eq!(self.cols, v.len(), "mul_vec shape mismatch");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(&a, &b)| a * b).sum())
            .collect()
    }

    /// `U A U†`
    pub fn conjugate_by(&self, u: &Self) -> Self {
        u.matmul(self).matmul(&u.adjoint())
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Self) -> Self {
        let (r2, c2) = (other.rows, other.cols);
        Self::from_fn(self.rows * r2, self.cols * c2, |i, j| {
            self[(i / r2, j / c2)] * other[(i % r2, j % c2)]
        })
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(T::zero(), T::max)
    }

    /// Largest `|A_ij - conj(A_ji)|`.
    pub fn hermitian_deviation(&self) -> T {
        if !self.is_square() {
            return T::infinity();
        }
        let mut dev = T::zero();
        for i in 0..self.rows {
            for j in i..self.cols {
                dev = dev.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        dev
    }

    pub fn frobenius_norm(&self) -> T {
        self.data.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt()
    }

    /// `(A + A†)/2`
    pub fn hermitian_part(&self) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| {
            (self[(i, j)] + self[(j, i)].conj()) * T::lit(0.5)
        })
    }

    pub fn cast<U: Real>(&self) -> ComplexMatrix<U> {
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .map(|z| Complex::new(U::lit(z.re.as_f64()), U::lit(z.im.as_f64())))
                .collect(),
        }
    }
}

impl<T> Index<(usize, usize)> for ComplexMatrix<T> {
    type Output = Complex<T>;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex<T> {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for ComplexMatrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<T> {
        &mut self.data[i * self.cols + j]
    }
}

impl<T: Real> Add for &ComplexMatrix<T> {
    type Output = ComplexMatrix<T>;

    fn add(self, rhs: Self) -> ComplexMatrix<T> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "add shape mismatch");
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl<T: Real> Sub for &ComplexMatrix<T> {
    type Output = ComplexMatrix<T>;

    fn sub(self, rhs: Self) -> ComplexMatrix<T> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "sub shape mismatch");
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl<T: Real> Mul for &ComplexMatrix<T> {
    type Output = ComplexMatrix<T>;

    fn mul(self, rhs: Self) -> ComplexMatrix<T> {
        self.matmul(rhs)
    }
}

/// Spectral decomposition of a Hermitian matrix.
///
/// `values` are sorted descending; column `k` of `vectors` is the eigenvector
/// belonging to `values[k]`.
#[derive(Debug, Clone)]
pub struct HermitianEigen<T> {
    pub values: Vec<T>,
    pub vectors: ComplexMatrix<T>,
}

impl<T: Real> HermitianEigen<T> {
    /// `V f(Λ) V†`
    pub fn reconstruct_with(&self, f: impl Fn(T) -> T) -> ComplexMatrix<T> {
        let n = self.values.len();
        let fvals: Vec<T> = self.values.iter().map(|&l| f(l)).collect();
        let v = &self.vectors;
        ComplexMatrix::from_fn(n, n, |i, j| {
            (0..n)
                .filter(|&k| !fvals[k].is_zero())
                .map(|k| v[(i, k)] * v[(j, k)].conj() * fvals[k])
                .sum()
        })
    }

    pub fn reconstruct(&self) -> ComplexMatrix<T> {
        self.reconstruct_with(|l| l)
    }

    pub fn eigenvector(&self, k: usize) -> Vec<Complex<T>> {
        self.vectors.column(k)
    }
}

/// Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi rotations.
///
/// Fails with [`Error::NonHermitian`] when the input deviates from Hermitian
/// symmetry by more than `1e-8` in any entry.
pub fn eig_hermitian<T: Real>(h: &ComplexMatrix<T>) -> Result<HermitianEigen<T>> {
    if !h.is_square() {
        return Err(Error::dims(format!("eigensolver needs a square matrix, got {}x{}", h.rows, h.cols)));
    }
    if h.as_slice().iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite);
    }
    let dev = h.hermitian_deviation();
    if dev > T::tol(tol::EIG_HERMITIAN) {
        return Err(Error::NonHermitian { deviation: dev.as_f64() });
    }
    Ok(jacobi(h.hermitian_part()))
}

/// Eigenvalues (unsorted) of a matrix already known to be Hermitian, with
/// closed forms for orders one and two.
pub(crate) fn hermitian_eigenvalues<T: Real>(a: ComplexMatrix<T>) -> Vec<T> {
    match a.rows {
        0 => Vec::new(),
        1 => vec![a.data[0].re],
        2 => {
            let (p, q) = (a.data[0].re, a.data[3].re);
            let mean = (p + q) / T::lit(2.0);
            let half = (p - q) / T::lit(2.0);
            let r = (half * half + a.data[1].norm_sqr()).sqrt();
            vec![mean + r, mean - r]
        }
        _ => jacobi(a).values,
    }
}

fn jacobi<T: Real>(mut a: ComplexMatrix<T>) -> HermitianEigen<T> {
    let n = a.rows;
    let mut v = ComplexMatrix::<T>::identity(n);
    let eps = T::epsilon();
    let tiny = T::min_positive_value();

    for _sweep in 0..64 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let mag = apq.norm();
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                if mag <= eps * (app.abs() * aqq.abs()).sqrt() || mag <= tiny {
                    a[(p, q)] = Complex::zero();
                    a[(q, p)] = Complex::zero();
                    continue;
                }
                rotated = true;
                // phase e^{iφ} = apq/|apq|; rotate in the real frame
                let phase = apq / mag;
                let theta = (aqq - app) / (T::lit(2.0) * mag);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                // J = diag(1, e^{-iφ}) · [[c, s], [-s, c]]
                let jpp = Complex::new(c, T::zero());
                let jpq = Complex::new(s, T::zero());
                let jqp = phase.conj() * (-s);
                let jqq = phase.conj() * c;
                // A <- A J
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * jpp + akq * jqp;
                    a[(k, q)] = akp * jpq + akq * jqq;
                }
                // A <- J† A
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = jpp.conj() * apk + jqp.conj() * aqk;
                    a[(q, k)] = jpq.conj() * apk + jqq.conj() * aqk;
                }
                a[(p, q)] = Complex::zero();
                a[(q, p)] = Complex::zero();
                a[(p, p)] = Complex::new(a[(p, p)].re, T::zero());
                a[(q, q)] = Complex::new(a[(q, q)].re, T::zero());
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * jpp + vkq * jqp;
                    v[(k, q)] = vkp * jpq + vkq * jqq;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].re.partial_cmp(&a[(i, i)].re).unwrap_or(std::cmp::Ordering::Equal));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |i, k| v[(i, order[k])]);
    HermitianEigen { values, vectors }
}

/// Inner product `<u|v>`.
pub fn inner<T: Real>(u: &[Complex<T>], v: &[Complex<T>]) -> Complex<T> {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

pub fn norm_sqr<T: Real>(v: &[Complex<T>]) -> T {
    v.iter().map(|z| z.norm_sqr()).sum()
}

/// Largest `|(V†V - I)_ij|` over the columns of `v`.
pub fn orthonormality_defect<T: Real>(v: &ComplexMatrix<T>) -> T {
    v.adjoint().matmul(v).max_abs_diff(&ComplexMatrix::identity(v.cols()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    type C = Complex<f64>;

    fn random_hermitian(n: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix<f64> {
        let g = ComplexMatrix::from_fn(n, n, |_, _| C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        g.hermitian_part()
    }

    #[test]
    fn identity_spectrum() {
        let e = eig_hermitian(&ComplexMatrix::<f64>::identity(3)).unwrap();
        assert_eq!(e.values, vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn diagonal_input_keeps_standard_basis() {
        let m = ComplexMatrix::from_real_diagonal(&[0.1f64, 0.9]);
        let e = eig_hermitian(&m).unwrap();
        assert_eq!(e.values, vec![0.9, 0.1]);
        assert!((e.vectors[(1, 0)].norm() - 1.0).abs() < 1e-15);
        assert!((e.vectors[(0, 1)].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn reconstruction_of_random_hermitian() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 1..=8 {
            for _ in 0..10 {
                let h = random_hermitian(n, &mut rng);
                let e = eig_hermitian(&h).unwrap();
                assert!(e.reconstruct().max_abs_diff(&h) < 1e-9);
                assert!(orthonormality_defect(&e.vectors) < 1e-9);
                assert!(e.values.windows(2).all(|w| w[0] >= w[1]));
            }
        }
    }

    #[test]
    fn degenerate_spectrum() {
        // projector of rank 2 in dimension 4 rotated by a non-trivial unitary
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let h = random_hermitian(4, &mut rng);
        let u = eig_hermitian(&h).unwrap().vectors;
        let p = ComplexMatrix::from_real_diagonal(&[1.0, 1.0, 0.0, 0.0]).conjugate_by(&u);
        let e = eig_hermitian(&p).unwrap();
        for (got, want) in e.values.iter().zip([1.0, 1.0, 0.0, 0.0]) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_non_hermitian() {
        let mut m = ComplexMatrix::<f64>::identity(2);
        m[(0, 1)] = C::new(1e-3, 0.0);
        assert!(matches!(eig_hermitian(&m), Err(Error::NonHermitian { .. })));
    }

    #[test]
    fn kron_traces_multiply() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = random_hermitian(2, &mut rng);
        let b = ComplexMatrix::from_fn(3, 3, |_, _| C::new(rng.gen(), rng.gen()));
        let k = a.kron(&b);
        assert!((k.trace() - a.trace() * b.trace()).norm() < 1e-12);
        let i6 = ComplexMatrix::<f64>::identity(2).kron(&ComplexMatrix::identity(3));
        assert_eq!(i6, ComplexMatrix::identity(6));
    }

    #[test]
    fn single_precision_solver() {
        let m = ComplexMatrix::<f32>::from_fn(2, 2, |i, j| {
            if i == j {
                Complex::new(0.5, 0.0)
            } else if i < j {
                Complex::new(0.0, 0.25)
            } else {
                Complex::new(0.0, -0.25)
            }
        });
        let e = eig_hermitian(&m).unwrap();
        assert!((e.values[0] - 0.75).abs() < 1e-6);
        assert!((e.values[1] - 0.25).abs() < 1e-6);
    }
}
