//! Generalized robustness of pure states, the α = 1/2 identities built on it,
//! and minimum-error discrimination of ensembles.

use crate::correlations::{c_alpha, convex_roof, eof_alpha, reduced_entropy, CorrelationValue};
use crate::entropy::{renyi_quantum, trace_norm_hermitian, AlphaParam, QEnsemble};
use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::measurements::{blocks_from_params, general_povm_from_blocks, Povm, Side};
use crate::optimize::{optimize_scalar, Direction, OptReport, OptimizerConfig};
use crate::scalar::Real;
use crate::state::{schmidt, DensityMatrix, PureState};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobustnessValue<T> {
    pub r_g: T,
    /// `log2(1 + r_g)`.
    pub lr_g: T,
}

fn half<T: Real>() -> AlphaParam<T> {
    AlphaParam::correlation(T::lit(0.5)).expect("1/2 is a valid order")
}

fn split_point<T: Real>(psi: &PureState<T>) -> Result<usize> {
    match psi.dims() {
        [_, _] => Ok(1),
        d => Err(Error::dims(format!("expected a bipartite pure state, got subsystems {d:?}"))),
    }
}

/// `R_G(ψ) = (Σ_i √μ_i)² − 1` from the Schmidt coefficients `√μ_i`.
pub fn robustness_pure<T: Real>(psi_ab: &PureState<T>) -> Result<RobustnessValue<T>> {
    let cut = split_point(psi_ab)?;
    let left: Vec<usize> = (0..cut).collect();
    let sum: T = schmidt(psi_ab, &left)?.coefficients.iter().copied().sum();
    let r_g = (sum * sum - T::one()).max(T::zero());
    Ok(RobustnessValue { r_g, lr_g: (T::one() + r_g).log2() })
}

/// `(S_{1/2}(ρ_A), LR_g(ψ), S_{1/2}(ρ_A) − LR_g(ψ))`, the entropy taken from
/// the spectrum of `ρ_A` and `LR_g` from the Schmidt decomposition.
pub fn check_half_lemma<T: Real>(psi_ab: &PureState<T>) -> Result<(T, T, T)> {
    let lr_g = robustness_pure(psi_ab)?.lr_g;
    let s_half = reduced_entropy(psi_ab, half());
    Ok((s_half, lr_g, s_half - lr_g))
}

/// `(E_f^{1/2}, min Σ q_x LR_g(ψ_x), difference)` from two separate searches.
pub fn eof_half_roof_check<T: Real>(rho_ab: &DensityMatrix<T>, config: &OptimizerConfig) -> Result<(T, T, T)> {
    let eof = eof_alpha(rho_ab, half(), config)?.value;
    let r = rho_ab.rank(T::lit(crate::scalar::tol::RANK)).max(1);
    let roof = convex_roof(
        rho_ab,
        r * r,
        |mu: &[T]| {
            let s: T = mu.iter().map(|m| m.max(T::zero()).sqrt()).sum();
            T::lit(2.0) * s.log2()
        },
        config,
    )?
    .value;
    Ok((eof, roof, eof - roof))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscriminationResult<T> {
    pub p_success: T,
    pub optimal_povm: Povm<T>,
    pub opt_report: OptReport,
    /// `½(1 + ‖p_0ρ_0 − p_1ρ_1‖_1)` for two-member ensembles.
    pub helstrom_value: Option<T>,
}

/// `Σ_x p_x Tr(E_x ρ_x)`.
pub fn success_probability<T: Real>(xi: &QEnsemble<T>, povm: &Povm<T>) -> Result<T> {
    if povm.len() != xi.len() || povm.dim() != xi.members()[0].1.dim() {
        return Err(Error::dims(format!(
            "{} effects of dimension {} for {} members of dimension {}",
            povm.len(),
            povm.dim(),
            xi.len(),
            xi.members()[0].1.dim()
        )));
    }
    Ok(weighted_overlap(xi, povm.effects()))
}

fn weighted_overlap<T: Real>(xi: &QEnsemble<T>, effects: &[ComplexMatrix<T>]) -> T {
    xi.members()
        .iter()
        .zip(effects)
        .map(|((p, rho), e)| *p * rho.matrix().matmul(e).trace().re)
        .sum()
}

const FIXED_POINT_ITERS: usize = 5000;

/// `E_x ↦ Λ^{-1/2} p_xρ_x E_x p_xρ_x Λ^{-1/2}` with `Λ` the sum of the middle
/// factors, i.e. normalized Gram blocks `B_x = E_x^{1/2} p_xρ_x`.
fn fixed_point_step<T: Real>(xi: &QEnsemble<T>, povm: &Povm<T>) -> Result<Povm<T>> {
    let blocks: Vec<ComplexMatrix<T>> = xi
        .members()
        .iter()
        .zip(povm.effects())
        .map(|((p, rho), e)| {
            let root = crate::linalg::eig_hermitian(&e.hermitian_part())?.reconstruct_with(|l| l.max(T::zero()).sqrt());
            Ok(root.matmul(&rho.matrix().scale(*p)))
        })
        .collect::<Result<_>>()?;
    general_povm_from_blocks(&blocks)
}

/// `½(1 + ‖p_0ρ_0 − p_1ρ_1‖_1)`.
pub fn helstrom<T: Real>(xi: &QEnsemble<T>) -> Result<T> {
    let [(p0, r0), (p1, r1)] = xi.members() else {
        return Err(Error::InvalidDistribution(format!("Helstrom needs two members, got {}", xi.len())));
    };
    let diff = &r0.matrix().scale(*p0) - &r1.matrix().scale(*p1);
    Ok(T::lit(0.5) * (T::one() + trace_norm_hermitian(&diff.hermitian_part())?))
}

/// Maximizes `Σ_x p_x Tr(E_x ρ_x)` over POVMs with one outcome per member.
///
/// The search runs over normalized Gram blocks; the trivial measurement that
/// always guesses the likeliest member is kept if it does better.
pub fn p_success<T: Real>(xi: &QEnsemble<T>, config: &OptimizerConfig) -> Result<DiscriminationResult<T>> {
    if xi.len() < 2 {
        return Err(Error::SingletonEnsemble);
    }
    let n = xi.len();
    let d = xi.members()[0].1.dim();
    let objective = |params: &[f64]| -> f64 {
        match general_povm_from_blocks::<T>(&blocks_from_params(params, n, d)) {
            Ok(povm) => weighted_overlap(xi, povm.effects()).as_f64(),
            Err(_) => 0.0,
        }
    };
    let report = optimize_scalar(objective, 2 * n * d * d, Direction::Maximize, config)?;
    let mut povm = general_povm_from_blocks::<T>(&blocks_from_params(&report.best_params, n, d))?;
    let mut value = weighted_overlap(xi, povm.effects());
    for _ in 0..FIXED_POINT_ITERS {
        let Ok(next) = fixed_point_step(xi, &povm) else { break };
        let v = weighted_overlap(xi, next.effects());
        if !(v > value) {
            break;
        }
        let gain = v - value;
        povm = next;
        value = v;
        if gain.as_f64() < 1e-15 {
            break;
        }
    }

    let probs = xi.probabilities();
    let likeliest = (0..n).fold(0, |best, x| if probs[x] > probs[best] { x } else { best });
    if probs[likeliest] > value {
        let effects = (0..n)
            .map(|x| if x == likeliest { ComplexMatrix::identity(d) } else { ComplexMatrix::zeros(d, d) })
            .collect();
        povm = Povm::new(effects)?;
        value = probs[likeliest];
    }
    let helstrom_value = if n == 2 { Some(helstrom(xi)?) } else { None };
    Ok(DiscriminationResult { p_success: value, optimal_povm: povm, opt_report: report, helstrom_value })
}

/// `(S_{1/2}(Σ_x p_x ρ_x), −log2 P_suc, difference)`.
pub fn check_psuc_bound<T: Real>(xi: &QEnsemble<T>, config: &OptimizerConfig) -> Result<(T, T, T)> {
    let s_half = renyi_quantum(&xi.average(), half());
    let neg_log = -p_success(xi, config)?.p_success.log2();
    Ok((s_half, neg_log, s_half - neg_log))
}

/// `(C_{1/2}(ρ_AE), −log2 P_suc − E_f^{1/2}(ρ_AB), difference)` for a pure
/// state on A ⊗ B ⊗ E, where `P_suc` discriminates the ensemble on A left by
/// the optimal `C_{1/2}` measurement on E.
pub fn check_single_copy_capacity_bound<T: Real>(psi_abe: &PureState<T>, config: &OptimizerConfig) -> Result<(T, T, T)> {
    if psi_abe.dims().len() != 3 {
        return Err(Error::dims(format!("expected subsystems A, B, E, got {:?}", psi_abe.dims())));
    }
    let rho_ae = psi_abe.reduced(&[0, 2])?;
    let rho_ab = psi_abe.reduced(&[0, 1])?;
    let c: CorrelationValue<T> = c_alpha(&rho_ae, Side::B, half(), config)?;
    let povm = c.povm().expect("c_alpha returns a measurement");
    let (ensemble, _) = crate::measurements::measure_local(&rho_ae, Side::B, povm)?;
    let ensemble = merge_coincident(&ensemble);
    let neg_log_psuc = if ensemble.len() < 2 { T::zero() } else { -p_success(&ensemble, config)?.p_success.log2() };
    let eof = eof_alpha(&rho_ab, half(), config)?.value;
    let rhs = neg_log_psuc - eof;
    Ok((c.value, rhs, c.value - rhs))
}

/// Pools members whose states agree to `MERGE_TOL`. Pooling such outcomes
/// leaves every QJSD unchanged, so this picks the coarsest witness.
fn merge_coincident<T: Real>(xi: &QEnsemble<T>) -> QEnsemble<T> {
    let tol = T::tol(MERGE_TOL);
    let mut pooled: Vec<(T, DensityMatrix<T>)> = Vec::new();
    for (p, rho) in xi.members() {
        match pooled.iter_mut().find(|(_, r)| r.matrix().max_abs_diff(rho.matrix()) <= tol) {
            Some(slot) => slot.0 += *p,
            None => pooled.push((*p, rho.clone())),
        }
    }
    QEnsemble::new_unchecked(pooled)
}

const MERGE_TOL: f64 = 1e-7;
