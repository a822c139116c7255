//! α-Rényi entropies and correlation measures for finite-dimensional quantum
//! states.
//!
//! Everything numeric is generic over [`Real`] (`f32` or `f64`); the aliases
//! at the crate root fix the scalar to `f64`.

pub mod channel;
pub mod correlations;
pub mod entropy;
pub mod error;
pub mod linalg;
pub mod measurements;
pub mod optimize;
pub mod random;
pub mod robustness;
pub mod scalar;
pub mod state;
mod colgen;
mod steering;

pub use channel::{apply_channel, KrausChannel};
pub use correlations::{
    c_alpha, c_alpha_with_outcomes, check_monotonicity, classical_correlation_j, convex_roof, eof_alpha,
    eof_alpha_with_outcomes, kw_verify, mutual_information, quantum_discord, CorrelationValue, KwReport, Witness,
};
pub use entropy::{
    qjsd, renyi_classical, renyi_conditional, renyi_from_spectrum, renyi_quantum, schatten_norm, shannon, von_neumann,
    AlphaParam, JointDistribution, ProbabilityVector, QEnsemble,
};
pub use error::{Error, Result};
pub use linalg::{eig_hermitian, ComplexMatrix, HermitianEigen};
pub use measurements::{
    general_povm_from_blocks, measure_local, povm_from_isometry, qc_state, IsometryParams, MeasurementRecord, Povm,
    Side,
};
pub use optimize::{optimize_scalar, Direction, OptReport, OptimizerConfig};
pub use random::{random_state, RandomState, StateKind};
pub use robustness::{
    check_half_lemma, check_psuc_bound, check_single_copy_capacity_bound, eof_half_roof_check, helstrom, p_success,
    robustness_pure, success_probability, DiscriminationResult, RobustnessValue,
};
pub use scalar::Real;
pub use state::{purify, schmidt, DensityMatrix, PureState, SchmidtDecomposition};

pub type Complex64 = num_complex::Complex<f64>;
pub type ComplexMatrix64 = ComplexMatrix<f64>;
pub type DensityMatrix64 = DensityMatrix<f64>;
pub type DensityMatrix32 = DensityMatrix<f32>;
pub type PureState64 = PureState<f64>;
pub type QEnsemble64 = QEnsemble<f64>;
pub type Povm64 = Povm<f64>;
pub type KrausChannel64 = KrausChannel<f64>;
