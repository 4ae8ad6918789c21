//! Conditional ensembles produced by a projective measurement on one qubit
//! of a two-qubit state.
//!
//! Measuring `a·σ` on A with outcome `±` leaves B in the state with Bloch
//! vector `(r_B ± Tᵀa)/(1 ± a·r_A)`, reached with probability
//! `(1 ± a·r_A)/2`. [`condition`] computes this from the density matrix,
//! [`condition_bloch`] from the correlation decomposition.

use nalgebra::{DMatrix, Matrix2};

use crate::coherence::MeasurementAxis;
use crate::error::{Error, Result};
use crate::qlin::{bloch_to_matrix, swap_gate, BlochVector, Complex, CorrDecomp, DensityMatrix};

/// Outcome probabilities at or below this are treated as impossible.
pub const ZERO_PROBABILITY: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Party {
    A,
    B,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleMember {
    pub probability: f64,
    pub state: DensityMatrix,
}

/// Probability-weighted conditional qubit states, outcome `+` first.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    pub members: Vec<EnsembleMember>,
}

impl Ensemble {
    /// `Σ p_k ρ_k`.
    pub fn average(&self) -> DensityMatrix {
        let mut acc = DMatrix::<Complex>::zeros(2, 2);
        for m in &self.members {
            acc += m.state.matrix() * Complex::new(m.probability, 0.0);
        }
        DensityMatrix::from_trusted(acc)
    }
}

/// Bloch-form ensemble member; zero-probability outcomes carry the zero vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochMember {
    pub probability: f64,
    pub bloch: BlochVector,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlochEnsemble {
    pub members: [BlochMember; 2],
}

fn projector(axis: &MeasurementAxis, sign: f64) -> Matrix2<Complex> {
    bloch_to_matrix(&(axis.unit_vector() * sign))
}

/// Measures `axis·σ` on `party` and returns the ensemble left on the other
/// qubit. An impossible outcome yields probability 0 and the maximally mixed
/// state.
pub fn condition(rho: &DensityMatrix, party: Party, axis: &MeasurementAxis) -> Result<Ensemble> {
    if rho.dim() != 4 {
        return Err(Error::InvalidDimension(rho.dim()));
    }
    let id = DMatrix::<Complex>::identity(2, 2);
    let mut members = Vec::with_capacity(2);
    for sign in [1.0, -1.0] {
        let p = projector(axis, sign);
        let p = DMatrix::from_fn(2, 2, |i, j| p[(i, j)]);
        let (op, keep) = match party {
            Party::A => (p.kronecker(&id), 1),
            Party::B => (id.kronecker(&p), 0),
        };
        let sandwiched = DensityMatrix::from_trusted(&op * rho.matrix() * &op);
        let unnormalized = sandwiched.partial_trace(&[keep])?;
        let prob = unnormalized.matrix().trace().re;
        let member = if prob > ZERO_PROBABILITY {
            EnsembleMember {
                probability: prob,
                state: DensityMatrix::from_trusted(
                    unnormalized.into_matrix() * Complex::new(1.0 / prob, 0.0),
                ),
            }
        } else {
            EnsembleMember {
                probability: 0.0,
                state: DensityMatrix::maximally_mixed(2)?,
            }
        };
        members.push(member);
    }
    Ok(Ensemble { members })
}

/// Same ensemble as [`condition`] with `party = A`, computed from `(r_A, r_B, T)`.
pub fn condition_bloch(corr: &CorrDecomp, axis: &MeasurementAxis) -> BlochEnsemble {
    let a = axis.unit_vector();
    let bias = a.dot(&corr.r_a);
    let steer = corr.t.transpose() * a;
    let member = |sign: f64| {
        let weight = 1.0 + sign * bias;
        let probability = 0.5 * weight;
        if probability > ZERO_PROBABILITY {
            BlochMember {
                probability,
                bloch: (corr.r_b + steer * sign) / weight,
            }
        } else {
            BlochMember {
                probability: 0.0,
                bloch: BlochVector::zeros(),
            }
        }
    };
    BlochEnsemble {
        members: [member(1.0), member(-1.0)],
    }
}

/// `SWAP ρ SWAP`.
pub fn swap_parties(rho: &DensityMatrix) -> Result<DensityMatrix> {
    if rho.dim() != 4 {
        return Err(Error::InvalidDimension(rho.dim()));
    }
    let s = swap_gate();
    Ok(DensityMatrix::from_trusted(&s * rho.matrix() * &s))
}
