//! JSON state input.
//!
//! A state file holds exactly one of
//!
//! ```json
//! {"matrix": [[0.5, 0.0], [0.0, 0.0], ...]}
//! {"amplitudes": [[0.7071067811865476, 0.0], [0.0, 0.0], ...]}
//! {"family": "bell-mixture", "params": {"p": 0.1}}
//! ```
//!
//! Matrix entries are `[re, im]` pairs in row-major order; the dimension is
//! the square root of the entry count and must be 2, 4 or 8.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qlin::{Complex, DensityMatrix, PureState};
use crate::states::{sample_spec, FamilySpec, SampledState};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StateFile {
    Matrix { matrix: Vec<[f64; 2]> },
    Amplitudes { amplitudes: Vec<[f64; 2]> },
    Family(FamilySpec),
}

fn check_dim(d: usize) -> Result<()> {
    if matches!(d, 2 | 4 | 8) {
        Ok(())
    } else {
        Err(Error::InvalidDimension(d))
    }
}

fn complex(pairs: &[[f64; 2]]) -> Result<Vec<Complex>> {
    pairs
        .iter()
        .map(|&[re, im]| {
            if re.is_finite() && im.is_finite() {
                Ok(Complex::new(re, im))
            } else {
                Err(Error::InvalidSpec("non-finite entry in state file".into()))
            }
        })
        .collect()
}

impl StateFile {
    pub fn from_matrix(rho: &DensityMatrix) -> Self {
        let m = rho.matrix();
        let d = m.nrows();
        let matrix = (0..d * d).map(|k| {
            let z = m[(k / d, k % d)];
            [z.re, z.im]
        });
        StateFile::Matrix {
            matrix: matrix.collect(),
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn resolve(&self) -> Result<SampledState> {
        match self {
            StateFile::Matrix { matrix } => {
                let d = (matrix.len() as f64).sqrt().round() as usize;
                if d * d != matrix.len() {
                    return Err(Error::InvalidSpec(format!(
                        "{} matrix entries is not a square count",
                        matrix.len()
                    )));
                }
                check_dim(d)?;
                let m = DMatrix::from_row_slice(d, d, &complex(matrix)?);
                Ok(SampledState::Mixed(DensityMatrix::new(m)?))
            }
            StateFile::Amplitudes { amplitudes } => {
                check_dim(amplitudes.len())?;
                let v = DVector::from_vec(complex(amplitudes)?);
                Ok(SampledState::Pure(PureState::new(v)?))
            }
            StateFile::Family(spec) => sample_spec(spec),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{bell_mixture, phi_plus, Family};

    #[test]
    fn matrix_round_trip() {
        let rho = bell_mixture(0.3).unwrap();
        let text = serde_json::to_string(&StateFile::from_matrix(&rho)).unwrap();
        let back = StateFile::parse(&text).unwrap().resolve().unwrap().density();
        assert_eq!(back, rho);
    }

    #[test]
    fn amplitudes_and_family() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let text = format!(r#"{{"amplitudes": [[{s}, 0], [0, 0], [0, 0], [{s}, 0]]}}"#);
        let psi = StateFile::parse(&text).unwrap().resolve().unwrap();
        assert_eq!(psi.as_pure().unwrap(), &phi_plus());

        let f = StateFile::parse(r#"{"family": "werner", "params": {"p": 0.4}}"#).unwrap();
        assert_eq!(
            f,
            StateFile::Family(FamilySpec {
                family: Family::Werner { p: 0.4 },
                seed: 0
            })
        );
        let g = StateFile::parse(r#"{"family": "ghz-class", "seed": 5}"#).unwrap();
        assert!(g.resolve().unwrap().as_pure().is_some());
    }

    #[test]
    fn rejects_bad_input() {
        for text in [
            r#"{"matrix": [[1, 0], [0, 0], [0, 0]]}"#,
            r#"{"matrix": [[0.5, 0], [0.5, 0], [0, 0], [0.5, 0]]}"#,
            r#"{"matrix": [[0.3333333333333333, 0], [0, 0], [0, 0], [0, 0], [0.3333333333333333, 0], [0, 0], [0, 0], [0, 0], [0.3333333333333334, 0]]}"#,
            r#"{"amplitudes": [[1, 0], [1, 0]]}"#,
            r#"{"family": "werner", "params": {"p": 1.5}}"#,
            r#"{"states": []}"#,
        ] {
            let parsed = StateFile::parse(text).and_then(|f| f.resolve());
            assert!(parsed.is_err(), "{text}");
        }
    }
}
