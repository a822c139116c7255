//! Density matrices, pure states and the operations that move between them.

use num_complex::Complex;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::linalg::{eig_hermitian, inner, norm_sqr, ComplexMatrix, HermitianEigen};
use crate::scalar::{tol, Real};

fn check_dims(dims: &[usize], dim: usize) -> Result<()> {
    if dims.is_empty() || dims.iter().any(|&d| d == 0) {
        return Err(Error::dims(format!("invalid subsystem dimensions {dims:?}")));
    }
    let prod: usize = dims.iter().product();
    if prod != dim {
        return Err(Error::dims(format!("subsystem dimensions {dims:?} multiply to {prod}, not {dim}")));
    }
    Ok(())
}

/// Hermitian, positive semi-definite, unit-trace matrix with declared subsystems.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix<T> {
    matrix: ComplexMatrix<T>,
    dims: Vec<usize>,
}

impl<T: Real> DensityMatrix<T> {
    /// Validates Hermiticity (1e-10), positivity (eigenvalues ≥ -1e-8) and unit trace (1e-10).
    pub fn new(matrix: ComplexMatrix<T>, dims: Vec<usize>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::dims("density matrix must be square"));
        }
        check_dims(&dims, matrix.rows())?;
        let dev = matrix.hermitian_deviation();
        if dev > T::tol(tol::HERMITIAN) {
            return Err(Error::NonHermitian { deviation: dev.as_f64() });
        }
        let trace = matrix.trace().re;
        if (trace - T::one()).abs() > T::tol(tol::TRACE) {
            return Err(Error::InvalidTrace { trace: trace.as_f64() });
        }
        let eig = eig_hermitian(&matrix)?;
        let min = eig.values.last().copied().unwrap_or_else(T::zero);
        if min < -T::tol(tol::NEG_EIGENVALUE) {
            return Err(Error::NotPositive { eigenvalue: min.as_f64() });
        }
        Ok(Self { matrix, dims })
    }

    /// Skips validation; callers guarantee the invariants up to rounding.
    pub(crate) fn new_unchecked(matrix: ComplexMatrix<T>, dims: Vec<usize>) -> Self {
        Self { matrix, dims }
    }

    /// Normalizes a PSD operator `M` to `M / Tr M` (no positivity check).
    pub(crate) fn from_unnormalized(matrix: ComplexMatrix<T>, dims: Vec<usize>) -> Self {
        let tr = matrix.trace().re;
        Self::new_unchecked(matrix.hermitian_part().scale(T::one() / tr), dims)
    }

    pub fn from_pure(psi: &PureState<T>) -> Self {
        Self {
            matrix: ComplexMatrix::outer(psi.amplitudes(), psi.amplitudes()),
            dims: psi.dims().to_vec(),
        }
    }

    /// `I/d` on the given subsystems.
    pub fn maximally_mixed(dims: Vec<usize>) -> Self {
        let d: usize = dims.iter().product();
        let m = ComplexMatrix::identity(d).scale(T::one() / T::lit(d as f64));
        Self { matrix: m, dims }
    }

    /// Diagonal state with the given probabilities.
    pub fn diagonal(probs: &[T], dims: Vec<usize>) -> Result<Self> {
        Self::new(ComplexMatrix::from_real_diagonal(probs), dims)
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn matrix(&self) -> &ComplexMatrix<T> {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix<T> {
        self.matrix
    }

    /// Same matrix with new subsystem labels.
    pub fn with_dims(self, dims: Vec<usize>) -> Result<Self> {
        check_dims(&dims, self.dim())?;
        Ok(Self { matrix: self.matrix, dims })
    }

    pub fn eigen(&self) -> HermitianEigen<T> {
        eig_hermitian(&self.matrix).expect("density matrices are Hermitian")
    }

    /// Eigenvalues, descending, with `[-1e-8, 0)` clipped to zero.
    pub fn spectrum(&self) -> Vec<T> {
        self.eigen().values.into_iter().map(|l| clip(l)).collect()
    }

    /// Number of eigenvalues above `threshold`.
    pub fn rank(&self, threshold: T) -> usize {
        self.spectrum().iter().filter(|&&l| l > threshold).count()
    }

    /// `ρ^α` via the spectral decomposition, with `0^α = 0`.
    pub fn power(&self, alpha: T) -> Result<ComplexMatrix<T>> {
        if !(alpha > T::zero()) || !alpha.is_finite() {
            return Err(Error::InvalidAlpha { alpha: alpha.as_f64(), domain: "(0, inf)" });
        }
        let eig = self.eigen();
        if let Some(&min) = eig.values.last() {
            if min < -T::tol(tol::NEG_EIGENVALUE) {
                return Err(Error::NotPositive { eigenvalue: min.as_f64() });
            }
        }
        Ok(eig.reconstruct_with(|l| {
            let l = clip(l);
            if l.is_zero() {
                T::zero()
            } else {
                l.powf(alpha)
            }
        }))
    }

    /// `ρ ⊗ σ` with concatenated subsystem dimensions.
    pub fn tensor(&self, other: &Self) -> Self {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        Self { matrix: self.matrix.kron(&other.matrix), dims }
    }

    /// Reduced state on the subsystems listed in `keep` (in ascending order of index).
    pub fn partial_trace(&self, keep: &[usize]) -> Result<Self> {
        check_dims(&self.dims, self.dim())?;
        let (matrix, dims) = partial_trace_matrix(&self.matrix, &self.dims, keep)?;
        Ok(Self { matrix, dims })
    }

    /// `U ρ U†`
    pub fn conjugate_by(&self, u: &ComplexMatrix<T>) -> Result<Self> {
        if u.rows() != self.dim() || u.cols() != self.dim() {
            return Err(Error::dims("unitary does not match state dimension"));
        }
        Ok(Self { matrix: self.matrix.conjugate_by(u).hermitian_part(), dims: self.dims.clone() })
    }

    /// `Σ p_k ρ_k` for states of a common shape.
    pub fn mixture(weights: &[T], states: &[&Self]) -> Result<Self> {
        let first = states.first().ok_or_else(|| Error::dims("empty mixture"))?;
        let mut acc = ComplexMatrix::zeros(first.dim(), first.dim());
        for (&w, s) in weights.iter().zip(states) {
            if s.dims != first.dims {
                return Err(Error::dims("mixture members have different subsystem dimensions"));
            }
            acc = &acc + &s.matrix.scale(w);
        }
        Self::new(acc, first.dims.clone())
    }

    pub fn cast<U: Real>(&self) -> DensityMatrix<U> {
        DensityMatrix { matrix: self.matrix.cast(), dims: self.dims.clone() }
    }
}

#[inline]
pub(crate) fn clip<T: Real>(l: T) -> T {
    if l < T::zero() {
        T::zero()
    } else {
        l
    }
}

fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * dims[k + 1];
    }
    s
}

/// Partial trace of an operator on `dims`, keeping the listed subsystems.
pub fn partial_trace_matrix<T: Real>(
    m: &ComplexMatrix<T>,
    dims: &[usize],
    keep: &[usize],
) -> Result<(ComplexMatrix<T>, Vec<usize>)> {
    let total: usize = dims.iter().product();
    if m.rows() != total || m.cols() != total {
        return Err(Error::dims(format!("operator of size {} on subsystems {dims:?}", m.rows())));
    }
    if keep.is_empty() || keep.windows(2).any(|w| w[0] >= w[1]) || keep.iter().any(|&k| k >= dims.len()) {
        return Err(Error::dims(format!("invalid kept subsystem list {keep:?} for {} subsystems", dims.len())));
    }
    let traced: Vec<usize> = (0..dims.len()).filter(|k| !keep.contains(k)).collect();
    let kdims: Vec<usize> = keep.iter().map(|&k| dims[k]).collect();
    let tdims: Vec<usize> = traced.iter().map(|&k| dims[k]).collect();
    let full_strides = strides(dims);
    let kd: usize = kdims.iter().product();
    let td: usize = tdims.iter().product();

    let offsets = |sub: &[usize], subdims: &[usize], n: usize| -> Vec<usize> {
        let ss = strides(subdims);
        (0..n)
            .map(|idx| {
                sub.iter()
                    .enumerate()
                    .map(|(pos, &k)| ((idx / ss[pos]) % subdims[pos]) * full_strides[k])
                    .sum()
            })
            .collect()
    };
    let koff = offsets(keep, &kdims, kd);
    let toff = offsets(&traced, &tdims, td);

    let mut out = ComplexMatrix::zeros(kd, kd);
    for i in 0..kd {
        for j in 0..kd {
            let mut acc = Complex::zero();
            for &t in &toff {
                acc += m[(koff[i] + t, koff[j] + t)];
            }
            out[(i, j)] = acc;
        }
    }
    Ok((out, kdims))
}

/// Unit-norm state vector with declared subsystems.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState<T> {
    amplitudes: Vec<Complex<T>>,
    dims: Vec<usize>,
}

impl<T: Real> PureState<T> {
    /// Validates that the squared norm is within 1e-10 of one.
    pub fn new(amplitudes: Vec<Complex<T>>, dims: Vec<usize>) -> Result<Self> {
        check_dims(&dims, amplitudes.len())?;
        if amplitudes.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        let n = norm_sqr(&amplitudes);
        if (n - T::one()).abs() > T::tol(tol::TRACE) {
            return Err(Error::InvalidNorm { norm: n.as_f64() });
        }
        Ok(Self { amplitudes, dims })
    }

    /// Rescales a non-zero vector to unit norm.
    pub fn normalized(amplitudes: Vec<Complex<T>>, dims: Vec<usize>) -> Result<Self> {
        let n = norm_sqr(&amplitudes).sqrt();
        if !(n > T::zero()) {
            return Err(Error::InvalidNorm { norm: 0.0 });
        }
        Self::new(amplitudes.into_iter().map(|z| z / n).collect(), dims)
    }

    pub(crate) fn new_unchecked(amplitudes: Vec<Complex<T>>, dims: Vec<usize>) -> Self {
        Self { amplitudes, dims }
    }

    /// Computational basis state `|index>`.
    pub fn basis(index: usize, dims: Vec<usize>) -> Result<Self> {
        let d: usize = dims.iter().product();
        if index >= d {
            return Err(Error::dims(format!("basis index {index} out of range {d}")));
        }
        let mut v = vec![Complex::zero(); d];
        v[index] = Complex::new(T::one(), T::zero());
        Self::new(v, dims)
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amplitudes
    }

    pub fn density(&self) -> DensityMatrix<T> {
        DensityMatrix::from_pure(self)
    }

    pub fn tensor(&self, other: &Self) -> Self {
        let mut amps = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.amplitudes {
            for b in &other.amplitudes {
                amps.push(a * b);
            }
        }
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        Self { amplitudes: amps, dims }
    }

    pub fn with_dims(self, dims: Vec<usize>) -> Result<Self> {
        check_dims(&dims, self.dim())?;
        Ok(Self { amplitudes: self.amplitudes, dims })
    }

    /// Reduced state on `keep`, computed from amplitudes directly.
    pub fn reduced(&self, keep: &[usize]) -> Result<DensityMatrix<T>> {
        let (l, r, perm) = self.bipartition_matrix(keep)?;
        let ordered = self.permute(&perm)?;
        let a = ordered.amplitudes();
        let m = ComplexMatrix::from_fn(l, l, |i, j| (0..r).map(|k| a[i * r + k] * a[j * r + k].conj()).sum());
        let kdims = keep.iter().map(|&k| self.dims[k]).collect();
        Ok(DensityMatrix::new_unchecked(m, kdims))
    }

    /// Reorders subsystems so that `perm[k]` becomes position `k`.
    pub fn permute(&self, perm: &[usize]) -> Result<Self> {
        let n = self.dims.len();
        let mut seen = vec![false; n];
        if perm.len() != n || perm.iter().any(|&p| p >= n || std::mem::replace(&mut seen[p], true)) {
            return Err(Error::dims(format!("{perm:?} is not a permutation of {n} subsystems")));
        }
        let old_strides = strides(&self.dims);
        let new_dims: Vec<usize> = perm.iter().map(|&p| self.dims[p]).collect();
        let new_strides = strides(&new_dims);
        let mut amps = vec![Complex::zero(); self.dim()];
        for (idx, amp) in amps.iter_mut().enumerate() {
            let old: usize = perm
                .iter()
                .enumerate()
                .map(|(k, &p)| ((idx / new_strides[k]) % new_dims[k]) * old_strides[p])
                .sum();
            *amp = self.amplitudes[old];
        }
        Ok(Self { amplitudes: amps, dims: new_dims })
    }

    /// Coefficient matrix `M[i][r]` with row index over `left` subsystems.
    fn bipartition_matrix(&self, left: &[usize]) -> Result<(usize, usize, Vec<usize>)> {
        if left.is_empty() || left.iter().any(|&k| k >= self.dims.len()) || left.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::dims(format!("invalid subsystem list {left:?}")));
        }
        let l: usize = left.iter().map(|&k| self.dims[k]).product();
        let mut perm = left.to_vec();
        perm.extend((0..self.dims.len()).filter(|k| !left.contains(k)));
        Ok((l, self.dim() / l, perm))
    }

    pub fn cast<U: Real>(&self) -> PureState<U> {
        PureState {
            amplitudes: self
                .amplitudes
                .iter()
                .map(|z| Complex::new(U::lit(z.re.as_f64()), U::lit(z.im.as_f64())))
                .collect(),
            dims: self.dims.clone(),
        }
    }
}

/// `|ψ> = Σ_l c_l |a_l>|b_l>` with `c` descending.
#[derive(Debug, Clone)]
pub struct SchmidtDecomposition<T> {
    pub coefficients: Vec<T>,
    pub left_basis: Vec<Vec<Complex<T>>>,
    pub right_basis: Vec<Vec<Complex<T>>>,
    pub left_dims: Vec<usize>,
    pub right_dims: Vec<usize>,
}

impl<T: Real> SchmidtDecomposition<T> {
    /// Reassembles the state in (left, right) subsystem order.
    pub fn reconstruct(&self) -> Vec<Complex<T>> {
        let l = self.left_dims.iter().product::<usize>();
        let r = self.right_dims.iter().product::<usize>();
        let mut out = vec![Complex::zero(); l * r];
        for ((&c, a), b) in self.coefficients.iter().zip(&self.left_basis).zip(&self.right_basis) {
            for i in 0..l {
                for j in 0..r {
                    out[i * r + j] += a[i] * b[j] * c;
                }
            }
        }
        out
    }

    /// Squared coefficients, the spectrum of either reduced state.
    pub fn weights(&self) -> Vec<T> {
        self.coefficients.iter().map(|&c| c * c).collect()
    }
}

/// Schmidt decomposition across the cut `left | rest`.
pub fn schmidt<T: Real>(psi: &PureState<T>, left: &[usize]) -> Result<SchmidtDecomposition<T>> {
    let (l, r, perm) = psi.bipartition_matrix(left)?;
    let ordered = psi.permute(&perm)?;
    let amps = ordered.amplitudes();
    let m = ComplexMatrix::from_fn(l, r, |i, j| amps[i * r + j]);
    let rho_left = m.matmul(&m.adjoint());
    let eig = eig_hermitian(&rho_left)?;

    // b_k ∝ M† a_k, with c_k its norm
    let mut terms: Vec<(T, Vec<Complex<T>>, Vec<Complex<T>>)> = (0..l)
        .map(|k| {
            let a = eig.eigenvector(k);
            let b: Vec<Complex<T>> = (0..r).map(|j| (0..l).map(|i| a[i].conj() * m[(i, j)]).sum()).collect();
            let c = norm_sqr(&b).sqrt();
            (c, a, b)
        })
        .filter(|(c, _, _)| *c > T::lit(1e-13))
        .collect();
    terms.sort_by(|x, y| y.0.partial_cmp(&x.0).unwrap_or(std::cmp::Ordering::Equal));

    let mut coefficients = Vec::with_capacity(terms.len());
    let mut left_basis = Vec::with_capacity(terms.len());
    let mut right_basis: Vec<Vec<Complex<T>>> = Vec::with_capacity(terms.len());
    for (c, a, b) in terms {
        let mut b: Vec<Complex<T>> = b.into_iter().map(|z| z / c).collect();
        // Gram-Schmidt against earlier vectors; errors scale with c so the reconstruction is unaffected
        for prev in &right_basis {
            let ov = inner(prev, &b);
            for (x, p) in b.iter_mut().zip(prev) {
                *x -= p * ov;
            }
        }
        let n = norm_sqr(&b).sqrt();
        b.iter_mut().for_each(|x| *x = *x / n);
        coefficients.push(c);
        left_basis.push(a);
        right_basis.push(b);
    }
    let left_dims = perm[..left.len()].iter().map(|&k| psi.dims()[k]).collect();
    let right_dims = perm[left.len()..].iter().map(|&k| psi.dims()[k]).collect();
    Ok(SchmidtDecomposition { coefficients, left_basis, right_basis, left_dims, right_dims })
}

/// Purification with an environment of dimension `rank(ρ)` (eigenvalues > 1e-12).
///
/// The environment is appended as the last subsystem:
/// `|ψ> = Σ_k √λ_k |v_k> ⊗ |k>`.
pub fn purify<T: Real>(rho: &DensityMatrix<T>) -> PureState<T> {
    let eig = rho.eigen();
    let keep: Vec<usize> = (0..rho.dim()).filter(|&k| eig.values[k] > T::tol(tol::RANK)).collect();
    let r = keep.len().max(1);
    let d = rho.dim();
    let mut amps = vec![Complex::zero(); d * r];
    for (e, &k) in keep.iter().enumerate() {
        let s = eig.values[k].sqrt();
        for i in 0..d {
            amps[i * r + e] = eig.vectors[(i, k)] * s;
        }
    }
    // absorb the discarded weight so the vector stays normalized
    let n = norm_sqr(&amps).sqrt();
    amps.iter_mut().for_each(|z| *z = *z / n);
    let mut dims = rho.dims().to_vec();
    dims.push(r);
    PureState::new_unchecked(amps, dims)
}
