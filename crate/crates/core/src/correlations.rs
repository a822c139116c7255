//! Measurement-induced classical correlations `C_α`, the α-entanglement of
//! formation, mutual information and discord, and the tripartite identity
//! check tying them together.

use num_complex::Complex;
use num_traits::Zero;

use crate::channel::KrausChannel;
use crate::entropy::{
    denoised_spectrum, qjsd_unchecked, renyi_classical, renyi_conditional, renyi_from_spectrum,
    renyi_quantum, von_neumann, AlphaParam, JointDistribution, ProbabilityVector,
};
use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::measurements::{effects_from_isometry, isometry_from_angles, measure_local, IsometryParams, Povm, Side};
use crate::optimize::{optimize_scalar, Direction, OptReport, OptimizerConfig};
use crate::steering::{search_rank1, Steering};
use crate::scalar::{tol, Real};
use crate::state::{purify, DensityMatrix, PureState};

/// Optimal measurement or decomposition found by a search.
#[derive(Debug, Clone, PartialEq)]
pub enum Witness<T> {
    Povm(Povm<T>),
    /// Pure-state decomposition `{(q_x, ψ_x)}` of the input state.
    Ensemble(Vec<(T, PureState<T>)>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationValue<T> {
    pub value: T,
    pub witness: Witness<T>,
    pub opt_report: OptReport,
}

impl<T: Real> CorrelationValue<T> {
    pub fn povm(&self) -> Option<&Povm<T>> {
        match &self.witness {
            Witness::Povm(p) => Some(p),
            Witness::Ensemble(_) => None,
        }
    }

    pub fn ensemble(&self) -> Option<&[(T, PureState<T>)]> {
        match &self.witness {
            Witness::Ensemble(e) => Some(e),
            Witness::Povm(_) => None,
        }
    }
}

fn bipartite(rho: &DensityMatrix<impl Real>) -> Result<(usize, usize)> {
    match rho.dims() {
        [a, b] => Ok((*a, *b)),
        d => Err(Error::dims(format!("expected a bipartite state, got subsystems {d:?}"))),
    }
}

/// `I(A:B) = S(ρ_A) + S(ρ_B) − S(ρ_AB)`.
pub fn mutual_information<T: Real>(rho_ab: &DensityMatrix<T>) -> Result<T> {
    bipartite(rho_ab)?;
    let a = rho_ab.partial_trace(&[0])?;
    let b = rho_ab.partial_trace(&[1])?;
    Ok(von_neumann(&a) + von_neumann(&b) - von_neumann(rho_ab))
}

/// `Q_α` of the ensemble left on the other side after measuring `side` with `povm`.
pub fn qjsd_for_povm<T: Real>(rho_ab: &DensityMatrix<T>, side: Side, alpha: AlphaParam<T>, povm: &Povm<T>) -> Result<T> {
    let alpha = alpha.as_correlation()?;
    let (xi, _) = measure_local(rho_ab, side, povm)?;
    Ok(qjsd_unchecked(&xi, alpha))
}

/// `C_α` with `d²` rank-1 outcomes on the measured side.
pub fn c_alpha<T: Real>(
    rho_ab: &DensityMatrix<T>,
    side: Side,
    alpha: AlphaParam<T>,
    config: &OptimizerConfig,
) -> Result<CorrelationValue<T>> {
    let (da, db) = bipartite(rho_ab)?;
    let d = if side == Side::A { da } else { db };
    c_alpha_with_outcomes(rho_ab, side, alpha, d * d, config)
}

/// Maximizes `Q_α` over rank-1 POVMs with `n_outcomes` effects on `side`.
pub fn c_alpha_with_outcomes<T: Real>(
    rho_ab: &DensityMatrix<T>,
    side: Side,
    alpha: AlphaParam<T>,
    n_outcomes: usize,
    config: &OptimizerConfig,
) -> Result<CorrelationValue<T>> {
    let alpha = alpha.as_correlation()?;
    let steer = Steering::of_state(rho_ab, side)?;
    let (v, report) = search_rank1(&steer, n_outcomes, |spec| renyi_from_spectrum(spec, alpha), config)?;
    let povm = Povm::new_unchecked(effects_from_isometry(&v), true);
    let value = qjsd_for_povm(rho_ab, side, alpha, &povm)?;
    Ok(CorrelationValue { value, witness: Witness::Povm(povm), opt_report: report })
}

/// `J(A|side) = S(ρ_other) − min Σ_x p_x S(ρ_other^x)` over rank-1 POVMs,
/// evaluated through Kraus maps `I ⊗ <v_x|` rather than the ensemble
/// machinery behind [`c_alpha`].
pub fn classical_correlation_j<T: Real>(
    rho_ab: &DensityMatrix<T>,
    side: Side,
    config: &OptimizerConfig,
) -> Result<CorrelationValue<T>> {
    let (da, db) = bipartite(rho_ab)?;
    let (d, other, keep) = match side {
        Side::B => (db, da, 0),
        Side::A => (da, db, 1),
    };
    let n = d * d;
    let s_other = von_neumann(&rho_ab.partial_trace(&[keep])?);
    let m = rho_ab.matrix();
    let conditional_entropy = |params: &[f64]| -> T {
        let v = isometry_from_angles::<T>(n, d, params);
        let mut total = T::zero();
        for x in 0..n {
            // Kraus map I ⊗ <v_x| with <v_x| = row x of V
            let bra = ComplexMatrix::from_fn(1, d, |_, j| v[(x, j)]);
            let k = match side {
                Side::B => ComplexMatrix::identity(other).kron(&bra),
                Side::A => bra.kron(&ComplexMatrix::identity(other)),
            };
            let op = k.matmul(m).matmul(&k.adjoint());
            let p = op.trace().re;
            if p >= T::lit(tol::PRUNE) {
                total += p * von_neumann(&DensityMatrix::from_unnormalized(op, vec![other]));
            }
        }
        total
    };
    let report = optimize_scalar(
        |params| conditional_entropy(params).as_f64(),
        IsometryParams::param_count(n, d),
        Direction::Minimize,
        config,
    )?;
    let v = isometry_from_angles::<T>(n, d, &report.best_params);
    let value = s_other - conditional_entropy(&report.best_params);
    let povm = Povm::new_unchecked(effects_from_isometry(&v), true);
    Ok(CorrelationValue { value, witness: Witness::Povm(povm), opt_report: report })
}

/// `D = I(A:B) − J`, with `J` from [`c_alpha`] at α = 1.
pub fn quantum_discord<T: Real>(rho_ab: &DensityMatrix<T>, side: Side, config: &OptimizerConfig) -> Result<(T, CorrelationValue<T>)> {
    let j = c_alpha(rho_ab, side, AlphaParam::correlation(T::one())?, config)?;
    Ok((mutual_information(rho_ab)? - j.value, j))
}

/// Decomposition `{(q_x, ψ_x)}` of `ρ` obtained by measuring the purifying
/// system of `psi` (last subsystem) with the rank-1 POVM `E_x = V†|x><x|V`.
/// Members with `q_x < 1e-12` are dropped.
fn steered_ensemble<T: Real>(psi: &PureState<T>, v: &ComplexMatrix<T>) -> Vec<(T, PureState<T>)> {
    let dims = psi.dims();
    let e = *dims.last().unwrap();
    let sys_dims = dims[..dims.len() - 1].to_vec();
    let n_sys = psi.dim() / e;
    let amps = psi.amplitudes();
    let mut out = Vec::with_capacity(v.rows());
    for x in 0..v.rows() {
        let row = v.row(x);
        let phi: Vec<Complex<T>> = (0..n_sys)
            .map(|i| {
                let mut acc = Complex::zero();
                for (k, r) in row.iter().enumerate() {
                    acc += *r * amps[i * e + k];
                }
                acc
            })
            .collect();
        let q: T = phi.iter().map(|z| z.norm_sqr()).sum();
        if q >= T::lit(tol::PRUNE) {
            let s = T::one() / q.sqrt();
            let phi = phi.into_iter().map(|z| z * s).collect();
            out.push((q, PureState::new_unchecked(phi, sys_dims.clone())));
        }
    }
    let total: T = out.iter().map(|(q, _)| *q).sum();
    for m in &mut out {
        m.0 /= total;
    }
    out
}

/// `Σ_x q_x f(ψ_x)` for a pure-state decomposition.
pub fn roof_value<T: Real>(ensemble: &[(T, PureState<T>)], member: impl Fn(&PureState<T>) -> T) -> T {
    ensemble.iter().map(|(q, psi)| *q * member(psi)).sum()
}

/// `Σ_x q_x |ψ_x><ψ_x|`.
pub fn ensemble_average<T: Real>(ensemble: &[(T, PureState<T>)]) -> Result<DensityMatrix<T>> {
    let first = ensemble.first().ok_or_else(|| Error::InvalidDistribution("empty decomposition".into()))?;
    let d = first.1.dim();
    let mut m = ComplexMatrix::zeros(d, d);
    for (q, psi) in ensemble {
        let a = psi.amplitudes();
        m = &m + &ComplexMatrix::outer(a, a).scale(*q);
    }
    DensityMatrix::new(m, first.1.dims().to_vec())
}

/// Convex roof `min Σ_x q_x f(λ(Tr_B ψ_x))` over decompositions with up to
/// `n_outcomes` members, generated by rank-1 measurements on a purification.
/// `member` receives the spectrum of the member's reduced state on A.
pub fn convex_roof<T: Real, F>(
    rho_ab: &DensityMatrix<T>,
    n_outcomes: usize,
    member: F,
    config: &OptimizerConfig,
) -> Result<CorrelationValue<T>>
where
    F: Fn(&[T]) -> T + Sync,
{
    bipartite(rho_ab)?;
    let psi = purify(rho_ab);
    let (v, report) = search_rank1(&Steering::of_purification(&psi), n_outcomes, &member, config)?;
    let ensemble = steered_ensemble(&psi, &v);
    let value = roof_value(&ensemble, |p| member(&reduced_spectrum(p)));
    Ok(CorrelationValue { value, witness: Witness::Ensemble(ensemble), opt_report: report })
}

/// Spectrum of `Tr_B |ψ><ψ|` with the entropy noise floor applied.
pub fn reduced_spectrum<T: Real>(psi: &PureState<T>) -> Vec<T> {
    denoised_spectrum(&psi.reduced(&[0]).expect("bipartite member"))
}

/// `E_f^α` with decompositions of up to `rank²` members.
pub fn eof_alpha<T: Real>(rho_ab: &DensityMatrix<T>, alpha: AlphaParam<T>, config: &OptimizerConfig) -> Result<CorrelationValue<T>> {
    bipartite(rho_ab)?;
    let r = rho_ab.rank(T::lit(tol::RANK)).max(1);
    eof_alpha_with_outcomes(rho_ab, alpha, r * r, config)
}

pub fn eof_alpha_with_outcomes<T: Real>(
    rho_ab: &DensityMatrix<T>,
    alpha: AlphaParam<T>,
    n_outcomes: usize,
    config: &OptimizerConfig,
) -> Result<CorrelationValue<T>> {
    let alpha = alpha.as_correlation()?;
    bipartite(rho_ab)?;
    convex_roof(rho_ab, n_outcomes, |spec| renyi_from_spectrum(spec, alpha), config)
}

/// `S_α(Tr_B |ψ><ψ|)`.
pub fn reduced_entropy<T: Real>(psi: &PureState<T>, alpha: AlphaParam<T>) -> T {
    renyi_quantum(&psi.reduced(&[0]).expect("bipartite member"), alpha)
}

#[derive(Debug, Clone, PartialEq)]
pub struct KwReport<T> {
    pub alpha: T,
    pub c_alpha_ae: T,
    pub s_alpha_a: T,
    pub eof_alpha_ab: T,
    /// `c_alpha_ae − (s_alpha_a − eof_alpha_ab)`.
    pub gap: T,
    pub c_alpha_report: OptReport,
    pub eof_report: OptReport,
}

impl<T: Real> KwReport<T> {
    pub fn recompute_gap(&self) -> T {
        self.c_alpha_ae - (self.s_alpha_a - self.eof_alpha_ab)
    }
}

/// Computes `C_α(ρ_AE)` (measuring E), `S_α(ρ_A)` and `E_f^α(ρ_AB)`
/// separately for a pure tripartite state and reports the gap between
/// `C_α(ρ_AE)` and `S_α(ρ_A) − E_f^α(ρ_AB)`.
pub fn kw_verify<T: Real>(psi_abe: &PureState<T>, alpha: AlphaParam<T>, config: &OptimizerConfig) -> Result<KwReport<T>> {
    let alpha = alpha.as_correlation()?;
    if psi_abe.dims().len() != 3 {
        return Err(Error::dims(format!("expected subsystems A, B, E, got {:?}", psi_abe.dims())));
    }
    let rho_ae = psi_abe.reduced(&[0, 2])?;
    let rho_ab = psi_abe.reduced(&[0, 1])?;
    let rho_a = psi_abe.reduced(&[0])?;
    let c = c_alpha(&rho_ae, Side::B, alpha, config)?;
    let s = renyi_quantum(&rho_a, alpha);
    let eof = eof_alpha(&rho_ab, alpha, config)?;
    let gap = c.value - (s - eof.value);
    Ok(KwReport {
        alpha: alpha.value(),
        c_alpha_ae: c.value,
        s_alpha_a: s,
        eof_alpha_ab: eof.value,
        gap,
        c_alpha_report: c.opt_report,
        eof_report: eof.opt_report,
    })
}

/// `C_α` before and after local channels `Φ_A ⊗ Φ_B`.
pub fn check_monotonicity<T: Real>(
    rho_ab: &DensityMatrix<T>,
    side: Side,
    alpha: AlphaParam<T>,
    channel_a: &KrausChannel<T>,
    channel_b: &KrausChannel<T>,
    config: &OptimizerConfig,
) -> Result<(T, T)> {
    let after_state = KrausChannel::apply_local(channel_a, channel_b, rho_ab)?;
    let before = c_alpha(rho_ab, side, alpha, config)?.value;
    let after = c_alpha(&after_state, side, alpha, config)?.value;
    Ok((before, after))
}

/// `Σ_{x,y} p(x,y) |x><x| ⊗ |y><y|` in computational bases.
pub fn classically_correlated_state<T: Real>(joint: &JointDistribution<T>) -> DensityMatrix<T> {
    let table = joint.table();
    let (nx, ny) = (table.len(), table[0].len());
    let diag: Vec<T> = joint.flattened();
    DensityMatrix::new_unchecked(ComplexMatrix::from_real_diagonal(&diag), vec![nx, ny])
}

/// Competing closed-form readings of `C_α` for a classically correlated state,
/// next to the optimized value.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalReadings<T> {
    pub optimized: T,
    /// `Q_α` of the ensemble produced by measuring B in its eigenbasis.
    pub eigenbasis: T,
    /// `H_α(X) − H_α(X|Y)`.
    pub marginal_minus_conditional: T,
    /// `H_α(X,Y) − H_α(X|Y)`.
    pub joint_minus_conditional: T,
    pub opt_report: OptReport,
}

pub fn classically_correlated_readings<T: Real>(
    joint: &JointDistribution<T>,
    alpha: AlphaParam<T>,
    config: &OptimizerConfig,
) -> Result<ClassicalReadings<T>> {
    let alpha = alpha.as_correlation()?;
    let rho = classically_correlated_state(joint);
    let ny = rho.dims()[1];
    let eigenbasis = qjsd_for_povm(&rho, Side::B, alpha, &Povm::computational(ny))?;
    let opt = c_alpha(&rho, Side::B, alpha, config)?;
    let hx = renyi_classical(&ProbabilityVector::new(joint.marginal_x())?, alpha);
    let hxy = renyi_classical(&ProbabilityVector::new(joint.flattened())?, alpha);
    let hx_given_y = renyi_conditional(joint, alpha);
    Ok(ClassicalReadings {
        optimized: opt.value,
        eigenbasis,
        marginal_minus_conditional: hx - hx_given_y,
        joint_minus_conditional: hxy - hx_given_y,
        opt_report: opt.opt_report,
    })
}
