//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};

/// Real floating-point scalar the library is generic over (`f32` or `f64`).
///
/// Tolerances throughout the crate are written for `f64`. [`Real::tol`] widens
/// them for lower-precision types so that invariant checks stay meaningful.
pub trait Real:
    Float + FloatConst + FromPrimitive + NumAssign + Sum + Default + Debug + Display + Send + Sync + 'static
{
    /// Machine precision floor used when widening tolerances.
    const TOL_FLOOR: f64;

    /// Converts an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("finite literal")
    }

    /// A tolerance stated for `f64`, widened to this precision.
    #[inline]
    fn tol(f64_tol: f64) -> Self {
        Self::lit(f64_tol.max(Self::TOL_FLOOR))
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("representable as f64")
    }
}

impl Real for f64 {
    const TOL_FLOOR: f64 = 0.0;
}

impl Real for f32 {
    // ~32 ulp at 1.0
    const TOL_FLOOR: f64 = 4.0e-6;
}

/// Named tolerances, all stated in `f64` terms.
pub mod tol {
    /// Maximum Hermiticity deviation of a density matrix.
    pub const HERMITIAN: f64 = 1e-10;
    /// Hermiticity deviation above which the eigensolver refuses its input.
    pub const EIG_HERMITIAN: f64 = 1e-8;
    /// Eigenvalues in `[-NEG_EIGENVALUE, 0)` are clipped to zero.
    pub const NEG_EIGENVALUE: f64 = 1e-8;
    /// Trace deviation of a density matrix, norm deviation of a pure state.
    pub const TRACE: f64 = 1e-10;
    /// Completeness of Kraus channels and POVMs, effect positivity.
    pub const COMPLETENESS: f64 = 1e-9;
    /// Numerical rank threshold used for purification.
    pub const RANK: f64 = 1e-12;
    /// Outcomes with smaller probability are dropped from measured ensembles.
    pub const PRUNE: f64 = 1e-12;
    /// Smallest admissible eigenvalue of a POVM normalizer.
    pub const SINGULAR: f64 = 1e-12;
    /// `|alpha - 1|` below this selects the von Neumann/Shannon branch.
    pub const ALPHA_ONE: f64 = 1e-6;
    /// Probability vectors must sum to one within this.
    pub const PROBABILITY: f64 = 1e-10;
}
