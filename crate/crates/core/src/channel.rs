//! Completely positive trace-preserving maps in Kraus form.

use num_complex::Complex;
use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::random::haar_isometry;
use crate::scalar::{tol, Real};
use crate::state::DensityMatrix;

/// `Φ(ρ) = Σ_i K_i ρ K_i†` with `Σ_i K_i† K_i = I`.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausChannel<T> {
    operators: Vec<ComplexMatrix<T>>,
}

impl<T: Real> KrausChannel<T> {
    /// Rejects operator sets whose completeness deviates by more than 1e-9.
    pub fn new(operators: Vec<ComplexMatrix<T>>) -> Result<Self> {
        let first = operators.first().ok_or(Error::IncompleteKraus { deviation: f64::INFINITY })?;
        let (out_dim, in_dim) = (first.rows(), first.cols());
        if operators.iter().any(|k| k.rows() != out_dim || k.cols() != in_dim) {
            return Err(Error::dims("Kraus operators have different shapes"));
        }
        let mut sum = ComplexMatrix::zeros(in_dim, in_dim);
        for k in &operators {
            sum = &sum + &k.adjoint().matmul(k);
        }
        let deviation = sum.max_abs_diff(&ComplexMatrix::identity(in_dim));
        if deviation > T::tol(tol::COMPLETENESS) {
            return Err(Error::IncompleteKraus { deviation: deviation.as_f64() });
        }
        Ok(Self { operators })
    }

    pub fn identity(d: usize) -> Self {
        Self { operators: vec![ComplexMatrix::identity(d)] }
    }

    pub fn unitary(u: ComplexMatrix<T>) -> Result<Self> {
        Self::new(vec![u])
    }

    /// Projects onto the computational basis: `ρ ↦ Σ_i |i><i| ρ |i><i|`.
    pub fn dephasing(d: usize) -> Self {
        let ops = (0..d)
            .map(|i| {
                let mut p = ComplexMatrix::zeros(d, d);
                p[(i, i)] = Complex::new(T::one(), T::zero());
                p
            })
            .collect();
        Self { operators: ops }
    }

    /// `ρ ↦ (1-p) ρ + p I/d`, built from the `d²` Weyl operators.
    pub fn depolarizing(d: usize, p: T) -> Self {
        let n = T::lit((d * d) as f64);
        let mut ops = Vec::with_capacity(d * d);
        for a in 0..d {
            for b in 0..d {
                let w = if a == 0 && b == 0 {
                    (T::one() - p + p / n).sqrt()
                } else {
                    (p / n).sqrt()
                };
                // X^a Z^b
                let m = ComplexMatrix::from_fn(d, d, |i, j| {
                    if i == (j + a) % d {
                        let angle = T::lit(2.0 * std::f64::consts::PI * (b * j) as f64 / d as f64);
                        Complex::from_polar(w, angle)
                    } else {
                        Complex::new(T::zero(), T::zero())
                    }
                });
                ops.push(m);
            }
        }
        Self { operators: ops }
    }

    /// Qubit amplitude damping with decay probability `gamma`.
    pub fn amplitude_damping(gamma: T) -> Self {
        let z = T::zero();
        let c = |re: T| Complex::new(re, z);
        let k0 = ComplexMatrix::from_fn(2, 2, |i, j| match (i, j) {
            (0, 0) => c(T::one()),
            (1, 1) => c((T::one() - gamma).sqrt()),
            _ => c(z),
        });
        let k1 = ComplexMatrix::from_fn(2, 2, |i, j| if (i, j) == (0, 1) { c(gamma.sqrt()) } else { c(z) });
        Self { operators: vec![k0, k1] }
    }

    /// Random channel from a Haar isometry `C^{in} → C^{out} ⊗ C^{n_kraus}`.
    pub fn random<R: Rng + ?Sized>(in_dim: usize, out_dim: usize, n_kraus: usize, rng: &mut R) -> Self {
        let v = haar_isometry::<T, R>(out_dim * n_kraus, in_dim, rng);
        let ops = (0..n_kraus)
            .map(|k| ComplexMatrix::from_fn(out_dim, in_dim, |i, j| v[(i * n_kraus + k, j)]))
            .collect();
        Self { operators: ops }
    }

    pub fn operators(&self) -> &[ComplexMatrix<T>] {
        &self.operators
    }

    pub fn in_dim(&self) -> usize {
        self.operators[0].cols()
    }

    pub fn out_dim(&self) -> usize {
        self.operators[0].rows()
    }

    /// `Φ ⊗ Ψ`
    pub fn tensor(&self, other: &Self) -> Self {
        let mut ops = Vec::with_capacity(self.operators.len() * other.operators.len());
        for a in &self.operators {
            for b in &other.operators {
                ops.push(a.kron(b));
            }
        }
        Self { operators: ops }
    }

    /// Applies the channel. Subsystem labels are kept when the dimension is unchanged.
    pub fn apply(&self, rho: &DensityMatrix<T>) -> Result<DensityMatrix<T>> {
        if rho.dim() != self.in_dim() {
            return Err(Error::dims(format!("channel input {} vs state {}", self.in_dim(), rho.dim())));
        }
        let mut out = ComplexMatrix::zeros(self.out_dim(), self.out_dim());
        for k in &self.operators {
            out = &out + &k.matmul(rho.matrix()).matmul(&k.adjoint());
        }
        let dims = if self.out_dim() == self.in_dim() { rho.dims().to_vec() } else { vec![self.out_dim()] };
        DensityMatrix::new(out.hermitian_part(), dims)
    }

    /// `(Φ_A ⊗ Φ_B)(ρ_AB)` for a bipartite state, output labelled `[out_A, out_B]`.
    pub fn apply_local(a: &Self, b: &Self, rho_ab: &DensityMatrix<T>) -> Result<DensityMatrix<T>> {
        match rho_ab.dims() {
            [da, db] if *da == a.in_dim() && *db == b.in_dim() => {}
            dims => return Err(Error::dims(format!("local channels on {}x{} vs state {dims:?}", a.in_dim(), b.in_dim()))),
        }
        a.tensor(b).apply(rho_ab)?.with_dims(vec![a.out_dim(), b.out_dim()])
    }
}

/// Free-function form of [`KrausChannel::apply`].
pub fn apply_channel<T: Real>(channel: &KrausChannel<T>, rho: &DensityMatrix<T>) -> Result<DensityMatrix<T>> {
    channel.apply(rho)
}
