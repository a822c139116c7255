//! JSON wire formats for states, ensembles and POVMs.
//!
//! Operators are `{"dims":[..],"matrix":[[[re,im],..],..]}`, pure states
//! `{"dims":[..],"vector":[[re,im],..]}`, both row-major. Ensembles are
//! `{"members":[{"p":..,"state":{..}},..]}` and POVMs `{"effects":[..]}`.
//! Unknown fields are ignored on input, so reports that embed a state still
//! parse as that state.

use renyikw_core::{Complex64, ComplexMatrix64, DensityMatrix64, Povm64, PureState64, QEnsemble64};
use serde::{Deserialize, Serialize};

/// `[re, im]`
pub type Pair = [f64; 2];

fn pair(z: &Complex64) -> Pair {
    [z.re, z.im]
}

fn complex(p: &Pair) -> Complex64 {
    Complex64::new(p[0], p[1])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub dims: Vec<usize>,
    pub matrix: Vec<Vec<Pair>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VectorJson {
    pub dims: Vec<usize>,
    pub vector: Vec<Pair>,
}

/// Either state format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StateJson {
    Vector(VectorJson),
    Matrix(MatrixJson),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemberJson {
    pub p: f64,
    pub state: StateJson,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleJson {
    pub members: Vec<MemberJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PovmJson {
    pub effects: Vec<MatrixJson>,
}

pub fn matrix_json(m: &ComplexMatrix64, dims: Vec<usize>) -> MatrixJson {
    MatrixJson { dims, matrix: (0..m.rows()).map(|i| m.row(i).iter().map(pair).collect()).collect() }
}

pub fn density_json(rho: &DensityMatrix64) -> MatrixJson {
    matrix_json(rho.matrix(), rho.dims().to_vec())
}

pub fn pure_json(psi: &PureState64) -> VectorJson {
    VectorJson { dims: psi.dims().to_vec(), vector: psi.amplitudes().iter().map(pair).collect() }
}

pub fn povm_json(povm: &Povm64) -> PovmJson {
    PovmJson { effects: povm.effects().iter().map(|e| matrix_json(e, vec![e.rows()])).collect() }
}

/// A parsed state, kept pure when given as a vector.
#[derive(Debug, Clone)]
pub enum State {
    Pure(PureState64),
    Mixed(DensityMatrix64),
}

impl State {
    pub fn density(&self) -> DensityMatrix64 {
        match self {
            State::Pure(p) => p.density(),
            State::Mixed(r) => r.clone(),
        }
    }

    pub fn dims(&self) -> &[usize] {
        match self {
            State::Pure(p) => p.dims(),
            State::Mixed(r) => r.dims(),
        }
    }

    pub fn to_json(&self) -> StateJson {
        match self {
            State::Pure(p) => StateJson::Vector(pure_json(p)),
            State::Mixed(r) => StateJson::Matrix(density_json(r)),
        }
    }
}

pub fn state_from_json(j: &StateJson) -> Result<State, renyikw_core::Error> {
    match j {
        StateJson::Vector(v) => PureState64::new(v.vector.iter().map(complex).collect(), v.dims.clone()).map(State::Pure),
        StateJson::Matrix(m) => {
            let rows: Vec<Vec<Complex64>> = m.matrix.iter().map(|r| r.iter().map(complex).collect()).collect();
            DensityMatrix64::new(ComplexMatrix64::from_rows(&rows)?, m.dims.clone()).map(State::Mixed)
        }
    }
}

pub fn ensemble_from_json(j: &EnsembleJson) -> Result<QEnsemble64, renyikw_core::Error> {
    let members = j
        .members
        .iter()
        .map(|m| Ok((m.p, state_from_json(&m.state)?.density())))
        .collect::<Result<Vec<_>, renyikw_core::Error>>()?;
    QEnsemble64::new(members)
}

#[cfg(test)]
mod tests {
    use super::*;

fn ensemble_json(xi: &QEnsemble64) -> EnsembleJson {
    EnsembleJson {
        members: xi.members().iter().map(|(p, r)| MemberJson { p: *p, state: StateJson::Matrix(density_json(r)) }).collect(),
    }
}

    #[test]
    fn parses_both_state_formats() {
        let v: StateJson = serde_json::from_str(r#"{"dims":[2],"vector":[[0.6,0.0],[0.0,0.8]]}"#).unwrap();
        let State::Pure(psi) = state_from_json(&v).unwrap() else { panic!("expected a vector") };
        assert_eq!(psi.amplitudes()[1], Complex64::new(0.0, 0.8));

        let m: StateJson =
            serde_json::from_str(r#"{"dims":[2],"matrix":[[[0.5,0],[0,0]],[[0,0],[0.5,0]]],"note":"ignored"}"#).unwrap();
        let State::Mixed(rho) = state_from_json(&m).unwrap() else { panic!("expected a matrix") };
        assert_eq!(rho.matrix()[(1, 1)], Complex64::new(0.5, 0.0));
    }

    #[test]
    fn emitted_ensembles_reparse_bit_identically() {
        let third = 1.0 / 3.0;
        let rho = DensityMatrix64::new(ComplexMatrix64::from_real_diagonal(&[third, 1.0 - third]), vec![2]).unwrap();
        let xi = QEnsemble64::new(vec![(0.1, rho.clone()), (0.9, rho)]).unwrap();
        let text = serde_json::to_string(&ensemble_json(&xi)).unwrap();
        let back = ensemble_from_json(&serde_json::from_str(&text).unwrap()).unwrap();
        assert_eq!(back, xi);
    }

    #[test]
    fn rejects_ragged_and_invalid_input() {
        let ragged: StateJson = serde_json::from_str(r#"{"dims":[2],"matrix":[[[1,0],[0,0]],[[0,0]]]}"#).unwrap();
        assert!(state_from_json(&ragged).is_err());
        let unnormalized: StateJson = serde_json::from_str(r#"{"dims":[2],"vector":[[1,0],[1,0]]}"#).unwrap();
        assert!(matches!(state_from_json(&unnormalized), Err(renyikw_core::Error::InvalidNorm { .. })));
    }
}
