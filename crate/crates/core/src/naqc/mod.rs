//! Standard and generalized NAQC functionals.
//!
//! For a two-qubit state with decomposition `(r_A, r_B, T)`, measuring axis
//! `a` on A and measuring the coherence of B along `m` contributes
//!
//! ```text
//! Σ_± p_± C_m(ρ_{B|±}) = ½ [ C_m(r_B + Tᵀa) + C_m(r_B - Tᵀa) ]
//! ```
//!
//! because `C_m` is homogeneous in the (unnormalised) Bloch vector. The
//! functionals maximise the sum of three such terms over Alice's three
//! measurement axes, a coherence triad, and the assignment of measurements to
//! coherence bases. The standard functional restricts Alice's axes to an
//! orthonormal frame (a mutually unbiased triad); the generalized functional
//! leaves them free.

mod search;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::coherence::{l1_coherence, perp_norm, BasisTriad, MeasurementAxis, MubFamily};
use crate::error::{Error, Result};
use crate::qlin::{to_corr, CorrDecomp, DensityMatrix, PureState};
use crate::steering::{condition, swap_parties, Party};
use crate::COMPLEMENTARITY_BOUND;

pub use search::{frame_from_euler, frame_to_euler};

/// Which party measures and which party's coherence is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    /// A measures, coherence is evaluated on B.
    #[serde(rename = "A->B")]
    AToB,
    /// B measures, coherence is evaluated on A.
    #[serde(rename = "B->A")]
    BToA,
}

impl std::fmt::Display for Direction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Direction::AToB => "A->B",
            Direction::BToA => "B->A",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Functional {
    Standard,
    Generalized,
}

impl std::fmt::Display for Functional {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Functional::Standard => "standard",
            Functional::Generalized => "generalized",
        })
    }
}

impl std::str::FromStr for Functional {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "standard" => Ok(Self::Standard),
            "generalized" => Ok(Self::Generalized),
            other => Err(Error::InvalidSpec(format!("unknown functional `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairingMode {
    /// Every assignment of measurements to coherence bases is tried.
    Optimized,
    /// Measurement `i` is always paired with coherence basis `i`.
    FixedIdentity,
}

/// Measurement `i` is scored against coherence basis `self.0[i]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Pairing(pub [usize; 3]);

impl Pairing {
    pub const IDENTITY: Pairing = Pairing([0, 1, 2]);

    pub const ALL: [Pairing; 6] = [
        Pairing([0, 1, 2]),
        Pairing([0, 2, 1]),
        Pairing([1, 0, 2]),
        Pairing([1, 2, 0]),
        Pairing([2, 0, 1]),
        Pairing([2, 1, 0]),
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NaqcOptions {
    /// Quasi-random starts, in addition to the deterministic seeds.
    pub restarts: usize,
    /// Simplex-size and value tolerance; also the margin of the verdict.
    pub tol: f64,
    pub max_iters: usize,
    pub mub_family: MubFamily,
    pub pairing: PairingMode,
    pub seed: u64,
}

impl Default for NaqcOptions {
    fn default() -> Self {
        Self {
            restarts: 24,
            tol: 1e-6,
            max_iters: 2000,
            mub_family: MubFamily::Full,
            pairing: PairingMode::Optimized,
            seed: 0,
        }
    }
}

impl NaqcOptions {
    pub fn validate(&self) -> Result<()> {
        if self.restarts < 1 {
            return Err(Error::InvalidSpec("restarts must be at least 1".into()));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::InvalidSpec(format!("tol must be positive, got {}", self.tol)));
        }
        if self.max_iters < 1 {
            return Err(Error::InvalidSpec("max_iters must be at least 1".into()));
        }
        Ok(())
    }
}

/// Optimiser bookkeeping for one functional evaluation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub starts: usize,
    pub converged_starts: usize,
    pub iterations: usize,
    pub evaluations: usize,
    /// True when the state has no local or correlated Bloch components on the
    /// coherence side and the value 0 was returned without optimising.
    pub short_circuit: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NaqcResult {
    pub value: f64,
    pub alice_axes: [MeasurementAxis; 3],
    pub coherence_triad: BasisTriad,
    pub pairing: Pairing,
    pub exhibits: bool,
    /// Starts that ended within 1e-5 of the reported value.
    pub restarts_agreeing: usize,
    pub functional: Functional,
    pub direction: Direction,
    pub diagnostics: Diagnostics,
}

/// The detection verdict: strictly above the bound by more than `tol`.
pub fn exhibits_naqc(value: f64, tol: f64) -> bool {
    value > COMPLEMENTARITY_BOUND + tol
}

/// Per-pair contributions `w[i][j]` of Alice axis `i` scored in coherence
/// basis `j`.
#[inline]
pub(crate) fn contribution_table(
    r_b: &Vector3<f64>,
    t_tr: &nalgebra::Matrix3<f64>,
    alice: &[Vector3<f64>; 3],
    coherence: &[Vector3<f64>; 3],
) -> [[f64; 3]; 3] {
    let mut w = [[0.0; 3]; 3];
    for (i, a) in alice.iter().enumerate() {
        let steer = t_tr * a;
        let plus = r_b + steer;
        let minus = r_b - steer;
        for (j, m) in coherence.iter().enumerate() {
            w[i][j] = 0.5 * (perp_norm(&plus, m) + perp_norm(&minus, m));
        }
    }
    w
}

#[inline]
pub(crate) fn pairing_value(w: &[[f64; 3]; 3], p: Pairing) -> f64 {
    w[0][p.0[0]] + w[1][p.0[1]] + w[2][p.0[2]]
}

#[inline]
pub(crate) fn best_pairing(w: &[[f64; 3]; 3], mode: PairingMode) -> (f64, Pairing) {
    match mode {
        PairingMode::FixedIdentity => (pairing_value(w, Pairing::IDENTITY), Pairing::IDENTITY),
        PairingMode::Optimized => Pairing::ALL
            .iter()
            .map(|&p| (pairing_value(w, p), p))
            .fold((f64::NEG_INFINITY, Pairing::IDENTITY), |best, cur| {
                if cur.0 > best.0 {
                    cur
                } else {
                    best
                }
            }),
    }
}

/// Sum of average coherences for Alice measuring on A and Bob's coherence
/// on B, using the Bloch-vector path.
pub fn objective(
    corr: &CorrDecomp,
    alice_axes: &[MeasurementAxis; 3],
    triad: &BasisTriad,
    pairing: Pairing,
) -> f64 {
    let alice = alice_axes.map(|a| a.unit_vector());
    let w = contribution_table(&corr.r_b, &corr.t.transpose(), &alice, &triad.axes());
    pairing_value(&w, pairing)
}

/// [`objective`] evaluated from explicit conditional density matrices and
/// explicit basis kets.
pub fn objective_matrix_path(
    rho: &DensityMatrix,
    alice_axes: &[MeasurementAxis; 3],
    triad: &BasisTriad,
    pairing: Pairing,
) -> Result<f64> {
    let bases = triad.bases();
    let mut total = 0.0;
    for (i, axis) in alice_axes.iter().enumerate() {
        let ensemble = condition(rho, Party::A, axis)?;
        for member in &ensemble.members {
            if member.probability > 0.0 {
                total += member.probability * l1_coherence(&member.state, &bases[pairing.0[i]])?;
            }
        }
    }
    Ok(total)
}

fn oriented_corr(rho: &DensityMatrix, direction: Direction) -> Result<CorrDecomp> {
    let corr = to_corr(rho)?;
    Ok(match direction {
        Direction::AToB => corr,
        Direction::BToA => corr.swapped(),
    })
}

/// Orients the state so that the measuring party is A.
pub fn oriented_state(rho: &DensityMatrix, direction: Direction) -> Result<DensityMatrix> {
    match direction {
        Direction::AToB => Ok(rho.clone()),
        Direction::BToA => swap_parties(rho),
    }
}

/// Standard functional: Alice's three axes form an orthonormal frame.
pub fn naqc_standard(rho: &DensityMatrix, direction: Direction, opts: &NaqcOptions) -> Result<NaqcResult> {
    opts.validate()?;
    let corr = oriented_corr(rho, direction)?;
    Ok(search::standard(&corr, direction, opts))
}

/// Generalized functional: Alice's three axes are arbitrary. The standard
/// optimum seeds the search, so the result never falls below it.
pub fn naqc_generalized(rho: &DensityMatrix, direction: Direction, opts: &NaqcOptions) -> Result<NaqcResult> {
    opts.validate()?;
    let corr = oriented_corr(rho, direction)?;
    Ok(search::generalized(&corr, direction, opts))
}

pub fn naqc(
    rho: &DensityMatrix,
    functional: Functional,
    direction: Direction,
    opts: &NaqcOptions,
) -> Result<NaqcResult> {
    match functional {
        Functional::Standard => naqc_standard(rho, direction, opts),
        Functional::Generalized => naqc_generalized(rho, direction, opts),
    }
}

/// Functional evaluated directly on a correlation decomposition oriented so
/// that A measures.
pub fn naqc_corr(corr: &CorrDecomp, functional: Functional, opts: &NaqcOptions) -> Result<NaqcResult> {
    opts.validate()?;
    Ok(match functional {
        Functional::Standard => search::standard(corr, Direction::AToB, opts),
        Functional::Generalized => search::generalized(corr, Direction::AToB, opts),
    })
}

/// `√6 |r|` of the marginal on the coherence side.
pub fn naqc_lower_bound(rho: &DensityMatrix, direction: Direction) -> Result<f64> {
    let corr = oriented_corr(rho, direction)?;
    Ok(COMPLEMENTARITY_BOUND * corr.r_b.norm())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MonogamyMode {
    /// Coherence always on A; B, then C, measures.
    FixedCoherence,
    /// A always measures; coherence on B, then C.
    FixedMeasurement,
}

impl std::fmt::Display for MonogamyMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            MonogamyMode::FixedCoherence => "fixed-coherence",
            MonogamyMode::FixedMeasurement => "fixed-measurement",
        })
    }
}

impl std::str::FromStr for MonogamyMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fixed-coherence" => Ok(Self::FixedCoherence),
            "fixed-measurement" => Ok(Self::FixedMeasurement),
            other => Err(Error::InvalidSpec(format!("unknown monogamy mode `{other}`"))),
        }
    }
}

impl MonogamyMode {
    pub fn direction(self) -> Direction {
        match self {
            MonogamyMode::FixedCoherence => Direction::BToA,
            MonogamyMode::FixedMeasurement => Direction::AToB,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonogamyRecord {
    pub n_ab: f64,
    pub n_ac: f64,
    pub sum: f64,
}

/// NAQC of the AB and AC marginals of a three-qubit pure state.
pub fn monogamy_sum(
    psi: &PureState,
    mode: MonogamyMode,
    functional: Functional,
    opts: &NaqcOptions,
) -> Result<MonogamyRecord> {
    if psi.dim() != 8 {
        return Err(Error::InvalidDimension(psi.dim()));
    }
    let rho = psi.density();
    let ab = rho.partial_trace(&[0, 1])?;
    let ac = rho.partial_trace(&[0, 2])?;
    let direction = mode.direction();
    let n_ab = naqc(&ab, functional, direction, opts)?.value;
    let n_ac = naqc(&ac, functional, direction, opts)?.value;
    Ok(MonogamyRecord {
        n_ab,
        n_ac,
        sum: n_ab + n_ac,
    })
}
