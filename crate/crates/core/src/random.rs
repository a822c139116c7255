//! Seeded random states, unitaries and isometries.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{inner, norm_sqr, ComplexMatrix};
use crate::scalar::Real;
use crate::state::{DensityMatrix, PureState};

/// Which ensemble to sample from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StateKind {
    /// Unitarily invariant pure states.
    HaarPure,
    /// `G G† / Tr(G G†)` with `G` a `dim × rank` complex Gaussian matrix.
    GinibreMixed,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RandomState<T> {
    Pure(PureState<T>),
    Mixed(DensityMatrix<T>),
}

/// The RNG used for every seeded draw in the crate.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian<T: Real, R: Rng + ?Sized>(rng: &mut R) -> Complex<T> {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex::new(T::lit(re), T::lit(im))
}

pub fn ginibre<T: Real, R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix<T> {
    ComplexMatrix::from_fn(rows, cols, |_, _| gaussian(rng))
}

pub fn haar_pure<T: Real, R: Rng + ?Sized>(dims: &[usize], rng: &mut R) -> Result<PureState<T>> {
    let d: usize = dims.iter().product();
    let v: Vec<Complex<T>> = (0..d).map(|_| gaussian(rng)).collect();
    PureState::normalized(v, dims.to_vec())
}

pub fn ginibre_mixed<T: Real, R: Rng + ?Sized>(dims: &[usize], rank: usize, rng: &mut R) -> Result<DensityMatrix<T>> {
    let d: usize = dims.iter().product();
    if rank == 0 || rank > d {
        return Err(Error::InvalidRank { rank, dim: d });
    }
    let g = ginibre::<T, R>(d, rank, rng);
    let m = g.matmul(&g.adjoint());
    let tr = m.trace().re;
    DensityMatrix::new(m.hermitian_part().scale(T::one() / tr), dims.to_vec())
}

/// `n × d` matrix with orthonormal columns, Haar distributed.
pub fn haar_isometry<T: Real, R: Rng + ?Sized>(n: usize, d: usize, rng: &mut R) -> ComplexMatrix<T> {
    assert!(d <= n, "isometry needs d <= n");
    let g = ginibre::<T, R>(n, d, rng);
    let mut cols: Vec<Vec<Complex<T>>> = Vec::with_capacity(d);
    for j in 0..d {
        let mut v = g.column(j);
        // two passes of Gram-Schmidt
        for _ in 0..2 {
            for q in &cols {
                let ov = inner(q, &v);
                for (x, y) in v.iter_mut().zip(q) {
                    *x -= y * ov;
                }
            }
        }
        let nrm = norm_sqr(&v).sqrt();
        v.iter_mut().for_each(|x| *x = *x / nrm);
        cols.push(v);
    }
    ComplexMatrix::from_fn(n, d, |i, j| cols[j][i])
}

pub fn haar_unitary<T: Real, R: Rng + ?Sized>(d: usize, rng: &mut R) -> ComplexMatrix<T> {
    haar_isometry(d, d, rng)
}

/// Draws a state of the requested kind. Identical seeds give bit-identical output.
pub fn random_state<T: Real>(kind: StateKind, dims: &[usize], rank: usize, seed: u64) -> Result<RandomState<T>> {
    let mut rng = rng_from_seed(seed);
    match kind {
        StateKind::HaarPure => haar_pure(dims, &mut rng).map(RandomState::Pure),
        StateKind::GinibreMixed => ginibre_mixed(dims, rank, &mut rng).map(RandomState::Mixed),
    }
}

/// Random probability vector, uniform on the simplex.
pub fn random_probabilities<T: Real, R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<T> {
    let e: Vec<f64> = (0..n).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|x| T::lit(x / s)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::orthonormality_defect;

    #[test]
    fn same_seed_same_state() {
        let a = random_state::<f64>(StateKind::HaarPure, &[2, 3], 1, 0).unwrap();
        let b = random_state::<f64>(StateKind::HaarPure, &[2, 3], 1, 0).unwrap();
        assert_eq!(a, b);
        let a = random_state::<f64>(StateKind::GinibreMixed, &[4], 2, 0).unwrap();
        let b = random_state::<f64>(StateKind::GinibreMixed, &[4], 2, 0).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn ginibre_rank_controls_spectrum() {
        for seed in 0..10 {
            let RandomState::Mixed(rho) = random_state::<f64>(StateKind::GinibreMixed, &[4], 2, seed).unwrap() else {
                unreachable!()
            };
            assert_eq!(rho.spectrum().iter().filter(|&&l| l > 1e-10).count(), 2);
            let RandomState::Mixed(rho) = random_state::<f64>(StateKind::GinibreMixed, &[3], 1, seed).unwrap() else {
                unreachable!()
            };
            assert!((rho.spectrum()[0] - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn invalid_rank() {
        assert!(matches!(
            random_state::<f64>(StateKind::GinibreMixed, &[2], 3, 0),
            Err(Error::InvalidRank { rank: 3, dim: 2 })
        ));
        assert!(random_state::<f64>(StateKind::GinibreMixed, &[2], 0, 0).is_err());
    }

    #[test]
    fn isometries_are_orthonormal() {
        let mut rng = rng_from_seed(4);
        for (n, d) in [(2, 2), (4, 2), (9, 3), (16, 4)] {
            let v = haar_isometry::<f64, _>(n, d, &mut rng);
            assert!(orthonormality_defect(&v) < 1e-12);
        }
    }

    #[test]
    fn haar_pure_first_moment_is_maximally_mixed() {
        // E[|ψ><ψ|] = I/d, and it is invariant under a fixed unitary
        let mut rng = rng_from_seed(77);
        let u = haar_unitary::<f64, _>(3, &mut rng);
        let n = 4000;
        let mut acc = ComplexMatrix::<f64>::zeros(3, 3);
        let mut acc_u = ComplexMatrix::<f64>::zeros(3, 3);
        for _ in 0..n {
            let psi = haar_pure::<f64, _>(&[3], &mut rng).unwrap();
            let p = psi.density().into_matrix();
            acc_u = &acc_u + &p.conjugate_by(&u);
            acc = &acc + &p;
        }
        let target = ComplexMatrix::identity(3).scale(1.0 / 3.0);
        assert!(acc.scale(1.0 / n as f64).max_abs_diff(&target) < 0.03);
        assert!(acc_u.scale(1.0 / n as f64).max_abs_diff(&target) < 0.03);
    }

    #[test]
    fn simplex_probabilities() {
        let mut rng = rng_from_seed(1);
        let p: Vec<f64> = random_probabilities(5, &mut rng);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(p.iter().all(|&x| x >= 0.0));
    }
}
