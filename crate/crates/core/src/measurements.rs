//! POVMs, their unconstrained parametrizations, and local measurements of
//! bipartite states.

use num_complex::Complex;
use num_traits::Zero;

use crate::entropy::QEnsemble;
use crate::error::{Error, Result};
use crate::linalg::{eig_hermitian, ComplexMatrix};
use crate::scalar::{tol, Real};
use crate::state::DensityMatrix;

/// Positive operators summing to the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct Povm<T> {
    effects: Vec<ComplexMatrix<T>>,
    rank1: bool,
}

impl<T: Real> Povm<T> {
    /// Checks positivity and completeness (1e-9) and records whether every
    /// effect has rank at most one.
    pub fn new(effects: Vec<ComplexMatrix<T>>) -> Result<Self> {
        let d = effects.first().map(ComplexMatrix::rows).ok_or_else(|| Error::InvalidPovm("no effects".into()))?;
        if effects.iter().any(|e| e.rows() != d || e.cols() != d) {
            return Err(Error::InvalidPovm("effects must share one square shape".into()));
        }
        let mut sum = ComplexMatrix::zeros(d, d);
        let mut rank1 = true;
        let eps = T::tol(tol::COMPLETENESS);
        for e in &effects {
            let eig = eig_hermitian(e)?;
            let min = eig.values.last().copied().unwrap_or_else(T::zero);
            if min < -eps {
                return Err(Error::InvalidPovm(format!("effect has eigenvalue {min}")));
            }
            rank1 &= eig.values.iter().filter(|&&l| l > eps).count() <= 1;
            sum = &sum + e;
        }
        let dev = sum.max_abs_diff(&ComplexMatrix::identity(d));
        if dev > eps {
            return Err(Error::InvalidPovm(format!("effects sum to identity only within {dev}")));
        }
        Ok(Self { effects, rank1 })
    }

    pub(crate) fn new_unchecked(effects: Vec<ComplexMatrix<T>>, rank1: bool) -> Self {
        Self { effects, rank1 }
    }

    /// Projective measurement in the computational basis.
    pub fn computational(d: usize) -> Self {
        let effects = (0..d)
            .map(|i| {
                let mut e = ComplexMatrix::zeros(d, d);
                e[(i, i)] = Complex::new(T::one(), T::zero());
                e
            })
            .collect();
        Self { effects, rank1: true }
    }

    /// Projective measurement onto the columns of a unitary.
    pub fn projective(u: &ComplexMatrix<T>) -> Result<Self> {
        let effects = (0..u.cols()).map(|k| {
            let v = u.column(k);
            ComplexMatrix::outer(&v, &v)
        });
        Self::new(effects.collect())
    }

    pub fn effects(&self) -> &[ComplexMatrix<T>] {
        &self.effects
    }

    pub fn dim(&self) -> usize {
        self.effects[0].rows()
    }

    pub fn len(&self) -> usize {
        self.effects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.effects.is_empty()
    }

    pub fn is_rank1(&self) -> bool {
        self.rank1
    }

    /// `Σ_x Tr(E_x ·)` deviation from the identity.
    pub fn completeness_defect(&self) -> T {
        let d = self.dim();
        let mut sum = ComplexMatrix::zeros(d, d);
        for e in &self.effects {
            sum = &sum + e;
        }
        sum.max_abs_diff(&ComplexMatrix::identity(d))
    }
}

/// Real coordinates of an `n × d` isometry `V` (`V†V = I`).
///
/// Layout: `d` column phases, then for each column `k < d` and row `j > k`
/// a Givens angle and its phase, `2nd − d²` reals in total. All-zero
/// parameters give `V = [I_d; 0]`.
#[derive(Debug, Clone, PartialEq)]
pub struct IsometryParams {
    pub n_outcomes: usize,
    pub dim: usize,
    pub angles: Vec<f64>,
}

impl IsometryParams {
    pub fn param_count(n_outcomes: usize, dim: usize) -> usize {
        2 * n_outcomes * dim - dim * dim
    }

    pub fn new(n_outcomes: usize, dim: usize, angles: Vec<f64>) -> Result<Self> {
        if dim == 0 || n_outcomes < dim {
            return Err(Error::TooFewOutcomes { outcomes: n_outcomes, dim });
        }
        let want = Self::param_count(n_outcomes, dim);
        if angles.len() != want {
            return Err(Error::dims(format!("{} isometry parameters, expected {want}", angles.len())));
        }
        Ok(Self { n_outcomes, dim, angles })
    }

    pub fn zeros(n_outcomes: usize, dim: usize) -> Result<Self> {
        if dim == 0 || n_outcomes < dim {
            return Err(Error::TooFewOutcomes { outcomes: n_outcomes, dim });
        }
        Self::new(n_outcomes, dim, vec![0.0; Self::param_count(n_outcomes, dim)])
    }

    /// Builds `V` as a product of Givens rotations applied to `[I_d; 0]`.
    pub fn isometry<T: Real>(&self) -> ComplexMatrix<T> {
        isometry_from_angles(self.n_outcomes, self.dim, &self.angles)
    }
}

pub(crate) fn isometry_from_angles<T: Real>(n: usize, d: usize, angles: &[f64]) -> ComplexMatrix<T> {
    let mut v = ComplexMatrix::<T>::zeros(n, d);
    for k in 0..d {
        v[(k, k)] = Complex::from_polar(T::one(), T::lit(angles[k]));
    }
    let mut pairs = Vec::with_capacity(n * d);
    for k in 0..d {
        for j in k + 1..n {
            pairs.push((k, j));
        }
    }
    for (idx, &(k, j)) in pairs.iter().enumerate().rev() {
        let theta = angles[d + 2 * idx];
        let phi = angles[d + 2 * idx + 1];
        let (s, c) = theta.sin_cos();
        let c = T::lit(c);
        let e = Complex::from_polar(T::lit(s), T::lit(phi));
        for col in 0..d {
            let vk = v[(k, col)];
            let vj = v[(j, col)];
            v[(k, col)] = vk * c - e * vj;
            v[(j, col)] = e.conj() * vk + vj * c;
        }
    }
    v
}

/// Rank-1 effects from the rows of `V`: `E_x = V†|x><x|V`.
pub(crate) fn effects_from_isometry<T: Real>(v: &ComplexMatrix<T>) -> Vec<ComplexMatrix<T>> {
    (0..v.rows())
        .map(|x| {
            let col: Vec<Complex<T>> = v.row(x).iter().map(|z| z.conj()).collect();
            ComplexMatrix::outer(&col, &col)
        })
        .collect()
}

/// Rank-1 POVM with `n_outcomes` effects `E_x = V†|x><x|V`.
pub fn povm_from_isometry<T: Real>(params: &IsometryParams) -> Result<Povm<T>> {
    if params.n_outcomes < params.dim {
        return Err(Error::TooFewOutcomes { outcomes: params.n_outcomes, dim: params.dim });
    }
    let v = params.isometry::<T>();
    Ok(Povm::new_unchecked(effects_from_isometry(&v), true))
}

/// Effects `S^{-1/2} B_x† B_x S^{-1/2}` with `S = Σ_x B_x† B_x`.
pub fn general_povm_from_blocks<T: Real>(blocks: &[ComplexMatrix<T>]) -> Result<Povm<T>> {
    let d = blocks.first().map(ComplexMatrix::cols).ok_or_else(|| Error::InvalidPovm("no blocks".into()))?;
    if blocks.iter().any(|b| b.cols() != d) {
        return Err(Error::dims("blocks must share a column dimension"));
    }
    let grams: Vec<ComplexMatrix<T>> = blocks.iter().map(|b| b.adjoint().matmul(b)).collect();
    let mut s = ComplexMatrix::zeros(d, d);
    for g in &grams {
        s = &s + g;
    }
    let eig = eig_hermitian(&s.hermitian_part())?;
    let min = eig.values.last().copied().unwrap_or_else(T::zero);
    if !(min >= T::lit(tol::SINGULAR)) {
        return Err(Error::SingularNormalizer { eigenvalue: min.as_f64() });
    }
    let inv_sqrt = eig.reconstruct_with(|l| T::one() / l.sqrt());
    let effects = grams
        .iter()
        .map(|g| inv_sqrt.matmul(g).matmul(&inv_sqrt).hermitian_part())
        .collect();
    Ok(Povm::new_unchecked(effects, false))
}

/// `n` square `d × d` blocks from `2nd²` reals (real parts then imaginary parts, row-major).
pub fn blocks_from_params<T: Real>(params: &[f64], n: usize, d: usize) -> Vec<ComplexMatrix<T>> {
    assert_eq!(params.len(), 2 * n * d * d, "block parameter count");
    (0..n)
        .map(|x| {
            let off = 2 * x * d * d;
            ComplexMatrix::from_fn(d, d, |i, j| {
                let k = off + 2 * (i * d + j);
                Complex::new(T::lit(params[k]), T::lit(params[k + 1]))
            })
        })
        .collect()
}

/// Which factor of a bipartite state is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    A,
    B,
}

impl Side {
    pub fn other(self) -> Self {
        match self {
            Side::A => Side::B,
            Side::B => Side::A,
        }
    }

    fn index(self) -> usize {
        match self {
            Side::A => 0,
            Side::B => 1,
        }
    }
}

/// Outcome statistics of a local measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementRecord<T> {
    /// `p_x` for every effect, including dropped outcomes.
    pub probabilities: Vec<T>,
    /// Effects whose outcome made it into the ensemble (`p_x ≥ 1e-12`).
    pub kept: Vec<usize>,
}

fn bipartite_dims(rho: &DensityMatrix<impl Real>) -> Result<(usize, usize)> {
    match rho.dims() {
        [a, b] => Ok((*a, *b)),
        d => Err(Error::dims(format!("expected a bipartite state, got subsystems {d:?}"))),
    }
}

/// Unnormalized conditional states `Tr_side((E ⊗ I) ρ)` on the unmeasured factor.
pub(crate) fn conditional_operators<T: Real>(
    rho: &ComplexMatrix<T>,
    da: usize,
    db: usize,
    side: Side,
    effects: &[ComplexMatrix<T>],
) -> Vec<ComplexMatrix<T>> {
    effects
        .iter()
        .map(|e| match side {
            Side::B => ComplexMatrix::from_fn(da, da, |a, a2| {
                let mut acc = Complex::zero();
                for b in 0..db {
                    for b2 in 0..db {
                        let ev = e[(b2, b)];
                        if !ev.is_zero() {
                            acc += rho[(a * db + b, a2 * db + b2)] * ev;
                        }
                    }
                }
                acc
            }),
            Side::A => ComplexMatrix::from_fn(db, db, |b, b2| {
                let mut acc = Complex::zero();
                for a in 0..da {
                    for a2 in 0..da {
                        let ev = e[(a2, a)];
                        if !ev.is_zero() {
                            acc += rho[(a * db + b, a2 * db + b2)] * ev;
                        }
                    }
                }
                acc
            }),
        })
        .collect()
}

/// Measures `side` of `ρ_AB` and returns the ensemble left on the other factor.
///
/// `p_x ρ_x = Tr_side((E_x ⊗ I) ρ_AB)`; outcomes with `p_x < 1e-12` are dropped.
pub fn measure_local<T: Real>(
    rho_ab: &DensityMatrix<T>,
    side: Side,
    povm: &Povm<T>,
) -> Result<(QEnsemble<T>, MeasurementRecord<T>)> {
    let (da, db) = bipartite_dims(rho_ab)?;
    let measured = rho_ab.dims()[side.index()];
    if povm.dim() != measured {
        return Err(Error::dims(format!("POVM on dimension {} but side {side:?} has dimension {measured}", povm.dim())));
    }
    let ops = conditional_operators(rho_ab.matrix(), da, db, side, povm.effects());
    let out_dim = rho_ab.dims()[side.other().index()];
    let mut probabilities = Vec::with_capacity(ops.len());
    let mut kept = Vec::new();
    let mut members = Vec::new();
    for (x, op) in ops.into_iter().enumerate() {
        let p = op.trace().re;
        probabilities.push(p);
        if p >= T::lit(tol::PRUNE) {
            kept.push(x);
            members.push((p, DensityMatrix::from_unnormalized(op, vec![out_dim])));
        }
    }
    let total: T = members.iter().map(|(p, _)| *p).sum();
    for m in &mut members {
        m.0 /= total;
    }
    Ok((QEnsemble::new_unchecked(members), MeasurementRecord { probabilities, kept }))
}

/// `Σ_x p_x ρ_x ⊗ |x><x|`, register dimension equal to the member count.
pub fn qc_state<T: Real>(ensemble: &QEnsemble<T>) -> DensityMatrix<T> {
    let n = ensemble.len();
    let d = ensemble.members()[0].1.dim();
    let mut m = ComplexMatrix::zeros(d * n, d * n);
    for (x, (p, rho)) in ensemble.members().iter().enumerate() {
        for i in 0..d {
            for j in 0..d {
                m[(i * n + x, j * n + x)] = rho.matrix()[(i, j)] * *p;
            }
        }
    }
    DensityMatrix::new_unchecked(m, vec![d, n])
}
