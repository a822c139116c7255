//! Classical and quantum Rényi entropies, Schatten norms and the Rényi
//! quantum Jensen-Shannon divergence. All logarithms are base 2.

use crate::error::{Error, Result};
use crate::linalg::{eig_hermitian, ComplexMatrix};
use crate::scalar::{tol, Real};
use crate::state::{clip, DensityMatrix};

/// Order parameter of a Rényi quantity.
///
/// Raw entropies accept `(0, 2]`; divergences and correlation measures accept
/// `(0, 1) ∪ {1}`. Values within 1e-6 of one select the von Neumann/Shannon branch.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct AlphaParam<T>(T);

impl<T: Real> AlphaParam<T> {
    pub fn entropy(alpha: T) -> Result<Self> {
        if alpha > T::zero() && alpha <= T::lit(2.0) {
            Ok(Self(alpha))
        } else {
            Err(Error::InvalidAlpha { alpha: alpha.as_f64(), domain: "(0, 2]" })
        }
    }

    pub fn correlation(alpha: T) -> Result<Self> {
        let a = Self(alpha);
        if (alpha > T::zero() && alpha < T::one()) || a.is_one() {
            Ok(a)
        } else {
            Err(Error::InvalidAlpha { alpha: alpha.as_f64(), domain: "(0, 1) ∪ {1}" })
        }
    }

    pub fn value(self) -> T {
        self.0
    }

    pub fn is_one(self) -> bool {
        (self.0 - T::one()).abs() < T::lit(tol::ALPHA_ONE)
    }

    /// Re-checks an entropy-domain parameter against the correlation domain.
    pub fn as_correlation(self) -> Result<Self> {
        Self::correlation(self.0)
    }
}

/// Non-negative weights summing to one within 1e-10.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityVector<T>(Vec<T>);

impl<T: Real> ProbabilityVector<T> {
    pub fn new(weights: Vec<T>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidDistribution("empty distribution".into()));
        }
        if weights.iter().any(|&w| !(w >= T::zero()) || !w.is_finite()) {
            return Err(Error::InvalidDistribution("negative or non-finite weight".into()));
        }
        let s: T = weights.iter().copied().sum();
        if (s - T::one()).abs() > T::tol(tol::PROBABILITY) {
            return Err(Error::InvalidDistribution(format!("weights sum to {s}")));
        }
        Ok(Self(weights))
    }

    pub fn uniform(n: usize) -> Self {
        Self(vec![T::one() / T::lit(n as f64); n])
    }

    pub fn weights(&self) -> &[T] {
        &self.0
    }
}

/// Joint distribution `p(x, y)`; rows index `x`, columns index `y`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution<T> {
    table: Vec<Vec<T>>,
}

impl<T: Real> JointDistribution<T> {
    pub fn new(table: Vec<Vec<T>>) -> Result<Self> {
        let cols = table.first().map_or(0, Vec::len);
        if cols == 0 || table.iter().any(|r| r.len() != cols) {
            return Err(Error::InvalidDistribution("joint table must be rectangular and non-empty".into()));
        }
        ProbabilityVector::new(table.iter().flatten().copied().collect())?;
        Ok(Self { table })
    }

    pub fn table(&self) -> &[Vec<T>] {
        &self.table
    }

    pub fn marginal_x(&self) -> Vec<T> {
        self.table.iter().map(|r| r.iter().copied().sum()).collect()
    }

    pub fn marginal_y(&self) -> Vec<T> {
        let cols = self.table[0].len();
        (0..cols).map(|j| self.table.iter().map(|r| r[j]).sum()).collect()
    }

    pub fn flattened(&self) -> Vec<T> {
        self.table.iter().flatten().copied().collect()
    }
}

/// Rényi entropy of a list of non-negative weights (assumed normalized).
///
/// `0^α = 0` and `0 log 0 = 0`; tiny negative eigenvalues are clipped.
pub fn renyi_from_spectrum<T: Real>(weights: &[T], alpha: AlphaParam<T>) -> T {
    let ln2 = T::LN_2();
    if alpha.is_one() {
        return weights
            .iter()
            .map(|&w| clip(w))
            .filter(|&w| w > T::zero())
            .map(|w| -w * w.ln())
            .sum::<T>()
            / ln2;
    }
    let a = alpha.value();
    // log Σ w^α = ln_1p(Σ w (w^{α-1} - 1) + (Σ w - 1)), accurate for α near one
    let mut excess = -T::one();
    for &w in weights {
        let w = clip(w);
        if w > T::zero() {
            excess += w + w * ((a - T::one()) * w.ln()).exp_m1();
        }
    }
    excess.ln_1p() / ((T::one() - a) * ln2)
}

/// Rescales the eigenvalues of an unnormalized operator to a spectrum in
/// place, with the same noise floor as [`renyi_quantum`]; returns the trace.
pub(crate) fn normalize_spectrum<T: Real>(eigs: &mut [T]) -> T {
    let q: T = eigs.iter().map(|&l| clip(l)).sum();
    if !(q > T::zero()) {
        return T::zero();
    }
    let top = eigs.iter().copied().fold(T::zero(), T::max);
    let floor = T::epsilon() * T::lit(32.0 * eigs.len() as f64) * top;
    for l in eigs.iter_mut() {
        *l = if *l <= floor { T::zero() } else { *l / q };
    }
    q
}

pub fn renyi_classical<T: Real>(p: &ProbabilityVector<T>, alpha: AlphaParam<T>) -> T {
    renyi_from_spectrum(p.weights(), alpha)
}

pub fn shannon<T: Real>(p: &ProbabilityVector<T>) -> T {
    renyi_from_spectrum(p.weights(), AlphaParam(T::one()))
}

/// `S_α(ρ) = log Tr ρ^α / (1 - α)`; the von Neumann entropy at α = 1.
/// Eigenvalues below `32·ε·d·λ_max` are rounding noise from the eigensolver
/// and are set to zero; for small α they would otherwise dominate `Σ λ^α`.
pub fn renyi_quantum<T: Real>(rho: &DensityMatrix<T>, alpha: AlphaParam<T>) -> T {
    renyi_from_spectrum(&denoised_spectrum(rho), alpha)
}

pub(crate) fn denoised_spectrum<T: Real>(rho: &DensityMatrix<T>) -> Vec<T> {
    let mut spec = rho.spectrum();
    let top = spec.first().copied().unwrap_or_else(T::zero);
    let floor = T::epsilon() * T::lit(32.0 * rho.dim() as f64) * top;
    for l in &mut spec {
        if *l <= floor {
            *l = T::zero();
        }
    }
    spec
}

pub fn von_neumann<T: Real>(rho: &DensityMatrix<T>) -> T {
    renyi_quantum(rho, AlphaParam(T::one()))
}

/// `H_α(X|Y) = Σ_y p_y log Σ_x p(x|y)^α / (1 - α)`; Shannon `H(X|Y)` at α = 1.
pub fn renyi_conditional<T: Real>(pxy: &JointDistribution<T>, alpha: AlphaParam<T>) -> T {
    let py = pxy.marginal_y();
    let mut total = T::zero();
    for (y, &p) in py.iter().enumerate() {
        if p <= T::zero() {
            continue;
        }
        let cond: Vec<T> = pxy.table.iter().map(|row| row[y] / p).collect();
        total += p * renyi_from_spectrum(&cond, alpha);
    }
    total
}

fn singular_values<T: Real>(a: &ComplexMatrix<T>) -> Vec<T> {
    let gram = a.adjoint().matmul(a);
    eig_hermitian(&gram)
        .expect("Gram matrices are Hermitian")
        .values
        .into_iter()
        .map(|l| clip(l).sqrt())
        .collect()
}

fn lp<T: Real>(values: &[T], p: T) -> T {
    let m = values.iter().copied().fold(T::zero(), T::max);
    if m.is_zero() {
        return T::zero();
    }
    let s: T = values.iter().filter(|&&v| v > T::zero()).map(|&v| (v / m).powf(p)).sum();
    m * s.powf(T::one() / p)
}

/// Schatten-p norm `(Σ σ_k^p)^{1/p}` for `p ≥ 1`.
pub fn schatten_norm<T: Real>(a: &ComplexMatrix<T>, p: T) -> Result<T> {
    if !(p >= T::one()) {
        return Err(Error::InvalidOrder { p: p.as_f64(), domain: "[1, inf)" });
    }
    Ok(lp(&singular_values(a), p))
}

/// The same expression for `p ∈ (0, 1)`, where it is only a quasi-norm.
pub fn schatten_quasi<T: Real>(a: &ComplexMatrix<T>, p: T) -> Result<T> {
    if !(p > T::zero() && p < T::one()) {
        return Err(Error::InvalidOrder { p: p.as_f64(), domain: "(0, 1)" });
    }
    Ok(lp(&singular_values(a), p))
}

/// Trace norm of a Hermitian operator, the sum of absolute eigenvalues.
pub fn trace_norm_hermitian<T: Real>(a: &ComplexMatrix<T>) -> Result<T> {
    Ok(eig_hermitian(a)?.values.iter().map(|l| l.abs()).sum())
}

/// Finite ensemble `{p_k, ρ_k}` of states on a common space.
#[derive(Debug, Clone, PartialEq)]
pub struct QEnsemble<T> {
    members: Vec<(T, DensityMatrix<T>)>,
}

impl<T: Real> QEnsemble<T> {
    pub fn new(members: Vec<(T, DensityMatrix<T>)>) -> Result<Self> {
        let first = members.first().ok_or_else(|| Error::InvalidDistribution("empty ensemble".into()))?;
        if members.iter().any(|(_, r)| r.dims() != first.1.dims()) {
            return Err(Error::dims("ensemble members live on different spaces"));
        }
        ProbabilityVector::new(members.iter().map(|(p, _)| *p).collect())?;
        Ok(Self { members })
    }

    pub(crate) fn new_unchecked(members: Vec<(T, DensityMatrix<T>)>) -> Self {
        Self { members }
    }

    pub fn members(&self) -> &[(T, DensityMatrix<T>)] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn probabilities(&self) -> Vec<T> {
        self.members.iter().map(|(p, _)| *p).collect()
    }

    pub fn dims(&self) -> &[usize] {
        self.members[0].1.dims()
    }

    /// `Σ p_k ρ_k`
    pub fn average(&self) -> DensityMatrix<T> {
        let d = self.members[0].1.dim();
        let mut acc = ComplexMatrix::zeros(d, d);
        for (p, r) in &self.members {
            acc = &acc + &r.matrix().scale(*p);
        }
        DensityMatrix::from_unnormalized(acc, self.dims().to_vec())
    }

    /// `{p_k, U ρ_k U†}`
    pub fn conjugate_by(&self, u: &ComplexMatrix<T>) -> Result<Self> {
        let members = self
            .members
            .iter()
            .map(|(p, r)| Ok((*p, r.conjugate_by(u)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { members })
    }
}

/// `Q_α(ξ) = S_α(Σ p_k ρ_k) - Σ p_k S_α(ρ_k)` for α ∈ (0, 1) ∪ {1}.
pub fn qjsd<T: Real>(xi: &QEnsemble<T>, alpha: AlphaParam<T>) -> Result<T> {
    let alpha = alpha.as_correlation()?;
    Ok(qjsd_unchecked(xi, alpha))
}

pub(crate) fn qjsd_unchecked<T: Real>(xi: &QEnsemble<T>, alpha: AlphaParam<T>) -> T {
    if xi.len() == 1 {
        return T::zero();
    }
    let avg = renyi_quantum(&xi.average(), alpha);
    let members: T = xi.members.iter().map(|(p, r)| *p * renyi_quantum(r, alpha)).sum();
    avg - members
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{ginibre_mixed, haar_pure, haar_unitary, random_probabilities, rng_from_seed};
    use num_complex::Complex;

    fn a(x: f64) -> AlphaParam<f64> {
        AlphaParam::entropy(x).unwrap()
    }

    #[test]
    fn alpha_domains() {
        assert!(AlphaParam::<f64>::entropy(0.0).is_err());
        assert!(AlphaParam::<f64>::entropy(2.0).is_ok());
        assert!(AlphaParam::<f64>::entropy(2.1).is_err());
        assert!(AlphaParam::<f64>::correlation(1.0).is_ok());
        assert!(AlphaParam::<f64>::correlation(1.0 + 5e-7).is_ok());
        assert!(AlphaParam::<f64>::correlation(1.5).is_err());
        assert!(AlphaParam::<f64>::correlation(-1.0).is_err());
    }

    #[test]
    fn classical_examples() {
        let u = ProbabilityVector::<f64>::uniform(4);
        for x in [0.1, 0.5, 0.9, 1.0, 1.5, 2.0] {
            assert!((renyi_classical(&u, a(x)) - 2.0).abs() < 1e-12);
        }
        let det = ProbabilityVector::new(vec![1.0, 0.0]).unwrap();
        assert_eq!(renyi_classical(&det, a(0.5)), 0.0);
        let p = ProbabilityVector::new(vec![0.9, 0.1]).unwrap();
        // 2 log2(√0.9 + √0.1)
        let expected = 2.0 * (0.9f64.sqrt() + 0.1f64.sqrt()).log2();
        assert!((renyi_classical(&p, a(0.5)) - expected).abs() < 1e-12);
        assert!((expected - 0.67807190511263).abs() < 1e-10);
    }

    #[test]
    fn quantum_examples() {
        let mm = DensityMatrix::<f64>::maximally_mixed(vec![2]);
        assert!((renyi_quantum(&mm, a(0.3)) - 1.0).abs() < 1e-12);
        let mut rng = rng_from_seed(1);
        let pure = haar_pure::<f64, _>(&[3], &mut rng).unwrap().density();
        assert!(renyi_quantum(&pure, a(0.5)).abs() < 1e-10);
        let d = DensityMatrix::diagonal(&[0.9, 0.1], vec![2]).unwrap();
        assert!((renyi_quantum(&d, a(0.5)) - 0.67807190511263).abs() < 1e-10);
    }

    #[test]
    fn quantum_matches_classical_on_spectrum() {
        let mut rng = rng_from_seed(2);
        for d in 2..=5 {
            let rho = ginibre_mixed::<f64, _>(&[d], d, &mut rng).unwrap();
            let spec = ProbabilityVector::new(rho.spectrum()).unwrap();
            for x in [0.2, 0.5, 1.0, 1.7] {
                assert!((renyi_quantum(&rho, a(x)) - renyi_classical(&spec, a(x))).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn alpha_one_continuity() {
        let mut rng = rng_from_seed(3);
        for _ in 0..20 {
            let rho = ginibre_mixed::<f64, _>(&[4], 3, &mut rng).unwrap();
            let s1 = von_neumann(&rho);
            let near = renyi_quantum(&rho, a(0.999999));
            assert!((near - s1).abs() < 1e-4);
            let above = renyi_quantum(&rho, a(1.00001));
            assert!((above - s1).abs() < 1e-3);
        }
    }

    #[test]
    fn conditional_entropy_cases() {
        // independent: H_α(X|Y) = H_α(X)
        let px = [0.3, 0.7];
        let qy = [0.2, 0.5, 0.3];
        let table: Vec<Vec<f64>> = px.iter().map(|p| qy.iter().map(|q| p * q).collect()).collect();
        let j = JointDistribution::new(table).unwrap();
        let hx = renyi_classical(&ProbabilityVector::new(px.to_vec()).unwrap(), a(0.4));
        assert!((renyi_conditional(&j, a(0.4)) - hx).abs() < 1e-12);

        let coupled = JointDistribution::new(vec![vec![0.5, 0.0], vec![0.0, 0.5]]).unwrap();
        assert!(renyi_conditional(&coupled, a(0.4)).abs() < 1e-15);

        // direct evaluation for [[0.4,0.1],[0.2,0.3]] at α = 1/2:
        // p_y = (0.6, 0.4); p(x|y=0) = (2/3, 1/3), p(x|y=1) = (1/4, 3/4)
        let t = JointDistribution::new(vec![vec![0.4, 0.1], vec![0.2, 0.3]]).unwrap();
        let expected = 2.0
            * (0.6 * ((2.0f64 / 3.0).sqrt() + (1.0f64 / 3.0).sqrt()).log2()
                + 0.4 * (0.25f64.sqrt() + 0.75f64.sqrt()).log2());
        assert!((renyi_conditional(&t, a(0.5)) - expected).abs() < 1e-12);

        // α = 1: H(X|Y) = H(XY) - H(Y)
        let hxy = shannon(&ProbabilityVector::new(t.flattened()).unwrap());
        let hy = shannon(&ProbabilityVector::new(t.marginal_y()).unwrap());
        assert!((renyi_conditional(&t, a(1.0)) - (hxy - hy)).abs() < 1e-12);
    }

    #[test]
    fn schatten_examples() {
        for d in 1..=4 {
            for p in [1.0, 2.0, 3.5] {
                let n = schatten_norm(&ComplexMatrix::<f64>::identity(d), p).unwrap();
                assert!((n - (d as f64).powf(1.0 / p)).abs() < 1e-12);
            }
        }
        let m = ComplexMatrix::from_real_diagonal(&[3.0f64, 4.0]);
        assert!((schatten_norm(&m, 2.0).unwrap() - 5.0).abs() < 1e-12);
        assert!(schatten_norm(&m, 0.5).is_err());
        assert!(schatten_quasi(&m, 1.5).is_err());
    }

    #[test]
    fn schatten_isometry_invariance() {
        let mut rng = rng_from_seed(4);
        for _ in 0..20 {
            let g = crate::random::ginibre::<f64, _>(3, 3, &mut rng);
            let u = haar_unitary::<f64, _>(3, &mut rng);
            let v = haar_unitary::<f64, _>(3, &mut rng);
            let t = u.matmul(&g).matmul(&v);
            for p in [1.0, 1.5, 2.0, 4.0] {
                assert!((schatten_norm(&g, p).unwrap() - schatten_norm(&t, p).unwrap()).abs() < 1e-9);
            }
            assert!((schatten_quasi(&g, 0.5).unwrap() - schatten_quasi(&t, 0.5).unwrap()).abs() < 1e-9);
        }
    }

    #[test]
    fn schatten_matches_trace_power() {
        // ‖ρ‖_α^α = Tr ρ^α
        let mut rng = rng_from_seed(5);
        let rho = ginibre_mixed::<f64, _>(&[3], 3, &mut rng).unwrap();
        let tr = rho.power(0.4).unwrap().trace().re;
        assert!((schatten_quasi(rho.matrix(), 0.4).unwrap().powf(0.4) - tr).abs() < 1e-10);
    }

    fn basis(i: usize) -> DensityMatrix<f64> {
        let mut v = vec![Complex::new(0.0, 0.0); 2];
        v[i] = Complex::new(1.0, 0.0);
        crate::state::PureState::new(v, vec![2]).unwrap().density()
    }

    #[test]
    fn qjsd_examples() {
        let mut rng = rng_from_seed(6);
        let rho = ginibre_mixed::<f64, _>(&[2], 2, &mut rng).unwrap();
        let single = QEnsemble::new(vec![(1.0, rho.clone())]).unwrap();
        assert_eq!(qjsd(&single, a(0.5)).unwrap(), 0.0);
        let orth = QEnsemble::new(vec![(0.5, basis(0)), (0.5, basis(1))]).unwrap();
        for x in [0.1, 0.5, 0.9, 1.0] {
            assert!((qjsd(&orth, a(x)).unwrap() - 1.0).abs() < 1e-12);
        }
        let twin = QEnsemble::new(vec![(0.5, rho.clone()), (0.5, rho)]).unwrap();
        assert!(qjsd(&twin, a(0.5)).unwrap().abs() < 1e-12);
        assert!(matches!(qjsd(&orth, a(1.5)), Err(Error::InvalidAlpha { .. })));
    }

    #[test]
    fn qjsd_unitary_invariance() {
        let mut rng = rng_from_seed(7);
        for _ in 0..20 {
            let members: Vec<_> = (0..3).map(|_| ginibre_mixed::<f64, _>(&[3], 2, &mut rng).unwrap()).collect();
            let p: Vec<f64> = random_probabilities(3, &mut rng);
            let xi = QEnsemble::new(p.into_iter().zip(members).collect()).unwrap();
            let u = haar_unitary::<f64, _>(3, &mut rng);
            let rot = xi.conjugate_by(&u).unwrap();
            for x in [0.3, 0.7, 1.0] {
                assert!((qjsd(&xi, a(x)).unwrap() - qjsd(&rot, a(x)).unwrap()).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn ensemble_validation() {
        let m = DensityMatrix::<f64>::maximally_mixed(vec![2]);
        assert!(QEnsemble::new(vec![(0.6, m.clone()), (0.6, m.clone())]).is_err());
        let other = DensityMatrix::<f64>::maximally_mixed(vec![3]);
        assert!(QEnsemble::new(vec![(0.5, m), (0.5, other)]).is_err());
    }

    #[test]
    fn single_precision_entropy() {
        let mm = DensityMatrix::<f32>::maximally_mixed(vec![4]);
        let s = renyi_quantum(&mm, AlphaParam::entropy(0.5f32).unwrap());
        assert!((s - 2.0).abs() < 1e-5);
    }
}
