//! State families and seeded samplers.

use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qlin::{haar_unitary, Complex, DensityMatrix, PureState};

/// Tangle above which a Haar sample is accepted as GHZ-class.
pub const GHZ_TANGLE_THRESHOLD: f64 = 1e-6;
pub const MAX_REJECTION_ATTEMPTS: usize = 10_000;

fn c(re: f64) -> Complex {
    Complex::new(re, 0.0)
}

fn pure(amps: &[(usize, Complex)], dim: usize) -> PureState {
    let mut v = DVector::zeros(dim);
    for &(i, a) in amps {
        v[i] = a;
    }
    PureState::new(v).expect("hand-built state is normalised")
}

/// `(|00⟩ + |11⟩)/√2`.
pub fn phi_plus() -> PureState {
    pure(&[(0, c(FRAC_1_SQRT_2)), (3, c(FRAC_1_SQRT_2))], 4)
}

/// `(|01⟩ + |10⟩)/√2`.
pub fn psi_plus() -> PureState {
    pure(&[(1, c(FRAC_1_SQRT_2)), (2, c(FRAC_1_SQRT_2))], 4)
}

/// `(|000⟩ + |111⟩)/√2`.
pub fn ghz() -> PureState {
    pure(&[(0, c(FRAC_1_SQRT_2)), (7, c(FRAC_1_SQRT_2))], 8)
}

/// `(|001⟩ + |010⟩ + |100⟩)/√3`.
pub fn w_state() -> PureState {
    let a = c(1.0 / 3f64.sqrt());
    pure(&[(1, a), (2, a), (4, a)], 8)
}

fn check_probability(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::OutOfRange {
            name: "p",
            value: p,
            range: "[0, 1]",
        });
    }
    Ok(())
}

/// `p |φ⁺⟩⟨φ⁺| + (1 - p) |ψ⁺⟩⟨ψ⁺|`, with `T = diag(1, 1 - 2p, 2p - 1)`.
pub fn bell_mixture(p: f64) -> Result<DensityMatrix> {
    check_probability(p)?;
    let m = phi_plus().density().into_matrix() * c(p) + psi_plus().density().into_matrix() * c(1.0 - p);
    Ok(DensityMatrix::from_trusted(m))
}

/// `p |φ⁺⟩⟨φ⁺| + (1 - p) I/4`, with `T = diag(p, -p, p)`.
pub fn werner(p: f64) -> Result<DensityMatrix> {
    check_probability(p)?;
    let m = phi_plus().density().into_matrix() * c(p)
        + DMatrix::identity(4, 4) * c((1.0 - p) / 4.0);
    Ok(DensityMatrix::from_trusted(m))
}

/// Coefficients of the five-term canonical form
/// `λ₀|000⟩ + λ₁e^{iβ}|100⟩ + λ₂|101⟩ + λ₃|110⟩ + λ₄|111⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CanonicalThreeQubitParams {
    pub lambda: [f64; 5],
    pub beta: f64,
}

impl CanonicalThreeQubitParams {
    pub fn validate(&self) -> Result<()> {
        if let Some(&l) = self.lambda.iter().find(|l| !(**l >= 0.0)) {
            return Err(Error::OutOfRange {
                name: "lambda",
                value: l,
                range: "[0, ∞)",
            });
        }
        if !(0.0..=std::f64::consts::PI).contains(&self.beta) {
            return Err(Error::OutOfRange {
                name: "beta",
                value: self.beta,
                range: "[0, π]",
            });
        }
        let norm2: f64 = self.lambda.iter().map(|l| l * l).sum();
        if (norm2 - 1.0).abs() > 1e-12 {
            return Err(Error::NotNormalized(norm2.sqrt()));
        }
        Ok(())
    }
}

/// Three-qubit state in canonical form; amplitudes sit at indices 0, 4, 5, 6, 7.
pub fn canonical_three_qubit(params: &CanonicalThreeQubitParams) -> Result<PureState> {
    params.validate()?;
    let l = params.lambda;
    let mut v = DVector::zeros(8);
    v[0b000] = c(l[0]);
    v[0b100] = Complex::from_polar(l[1], params.beta);
    v[0b101] = c(l[2]);
    v[0b110] = c(l[3]);
    v[0b111] = c(l[4]);
    PureState::new(v)
}

/// `4 |d₁ - 2d₂ + 4d₃|` from the Cayley hyperdeterminant of the amplitude
/// tensor `a_{ijk}`.
pub fn three_tangle(psi: &PureState) -> Result<f64> {
    if psi.dim() != 8 {
        return Err(Error::InvalidDimension(psi.dim()));
    }
    let a = |i: usize, j: usize, k: usize| psi.amplitudes()[4 * i + 2 * j + k];
    let sq = |z: Complex| z * z;
    let d1 = sq(a(0, 0, 0)) * sq(a(1, 1, 1))
        + sq(a(0, 0, 1)) * sq(a(1, 1, 0))
        + sq(a(0, 1, 0)) * sq(a(1, 0, 1))
        + sq(a(1, 0, 0)) * sq(a(0, 1, 1));
    let d2 = a(0, 0, 0) * a(1, 1, 1) * a(0, 1, 1) * a(1, 0, 0)
        + a(0, 0, 0) * a(1, 1, 1) * a(1, 0, 1) * a(0, 1, 0)
        + a(0, 0, 0) * a(1, 1, 1) * a(1, 1, 0) * a(0, 0, 1)
        + a(0, 1, 1) * a(1, 0, 0) * a(1, 0, 1) * a(0, 1, 0)
        + a(0, 1, 1) * a(1, 0, 0) * a(1, 1, 0) * a(0, 0, 1)
        + a(1, 0, 1) * a(0, 1, 0) * a(1, 1, 0) * a(0, 0, 1);
    let d3 = a(0, 0, 0) * a(1, 1, 0) * a(1, 0, 1) * a(0, 1, 1)
        + a(1, 1, 1) * a(0, 0, 1) * a(0, 1, 0) * a(1, 0, 0);
    Ok(4.0 * (d1 - d2 * 2.0 + d3 * 4.0).norm())
}

/// First column of a Haar unitary.
pub fn haar_pure<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<PureState> {
    let u = haar_unitary(dim, rng)?;
    PureState::normalized(u.column(0).into_owned())
}

/// Haar three-qubit state with nonvanishing three-tangle.
pub fn ghz_class<R: Rng + ?Sized>(rng: &mut R) -> Result<PureState> {
    for _ in 0..MAX_REJECTION_ATTEMPTS {
        let psi = haar_pure(8, rng)?;
        if three_tangle(&psi)? > GHZ_TANGLE_THRESHOLD {
            return Ok(psi);
        }
    }
    Err(Error::SamplingFailed("ghz-class", MAX_REJECTION_ATTEMPTS))
}

/// Canonical form with `λ₄ = 0`, `β = 0` and `(λ₀, …, λ₃)` uniform on the
/// positive orthant of the unit 3-sphere.
pub fn w_class<R: Rng + ?Sized>(rng: &mut R) -> Result<PureState> {
    for _ in 0..MAX_REJECTION_ATTEMPTS {
        let g: [f64; 4] = std::array::from_fn(|_| rng.sample::<f64, _>(StandardNormal).abs());
        let n = g.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-12 {
            let l = g.map(|x| x / n);
            let params = CanonicalThreeQubitParams {
                lambda: [l[0], l[1], l[2], l[3], 0.0],
                beta: 0.0,
            };
            return canonical_three_qubit(&params);
        }
    }
    Err(Error::SamplingFailed("w-class", MAX_REJECTION_ATTEMPTS))
}

/// Mixture of 1 to 4 Haar product states with flat Dirichlet weights.
pub fn separable<R: Rng + ?Sized>(rng: &mut R) -> Result<DensityMatrix> {
    let k = rng.random_range(1..=4usize);
    let weights: Vec<f64> = (0..k).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let total: f64 = weights.iter().sum();
    let mut m = DMatrix::<Complex>::zeros(4, 4);
    for w in weights {
        let a = haar_pure(2, rng)?;
        let b = haar_pure(2, rng)?;
        m += a.kron(&b)?.density().into_matrix() * c(w / total);
    }
    Ok(DensityMatrix::from_trusted(m))
}

/// Haar two-qubit pure state on AB times a Haar qubit on C.
pub fn biseparable<R: Rng + ?Sized>(rng: &mut R) -> Result<PureState> {
    haar_pure(4, rng)?.kron(&haar_pure(2, rng)?)
}

/// Random mixed state of random rank `1..=dim` (Ginibre-induced measure):
/// `G G† / Tr(G G†)` for a `dim × rank` complex Gaussian `G`.
pub fn random_mixed<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<DensityMatrix> {
    DensityMatrix::maximally_mixed(dim)?;
    let rank = rng.random_range(1..=dim);
    let g = DMatrix::from_fn(dim, rank, |_, _| {
        Complex::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let m = &g * g.adjoint();
    let tr = m.trace().re;
    Ok(DensityMatrix::from_trusted(m * c(1.0 / tr)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "params", rename_all = "kebab-case")]
pub enum Family {
    BellMixture { p: f64 },
    Werner { p: f64 },
    Canonical(CanonicalThreeQubitParams),
    HaarPure { dim: usize },
    GhzClass,
    WClass,
    Separable,
    Biseparable,
    RandomMixed { dim: usize },
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::BellMixture { .. } => "bell-mixture",
            Family::Werner { .. } => "werner",
            Family::Canonical(_) => "canonical",
            Family::HaarPure { .. } => "haar-pure",
            Family::GhzClass => "ghz-class",
            Family::WClass => "w-class",
            Family::Separable => "separable",
            Family::Biseparable => "biseparable",
            Family::RandomMixed { .. } => "random-mixed",
        }
    }
}

/// A family together with the seed of its random stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilySpec {
    #[serde(flatten)]
    pub family: Family,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SampledState {
    Pure(PureState),
    Mixed(DensityMatrix),
}

impl SampledState {
    pub fn density(&self) -> DensityMatrix {
        match self {
            SampledState::Pure(psi) => psi.density(),
            SampledState::Mixed(rho) => rho.clone(),
        }
    }

    pub fn as_pure(&self) -> Option<&PureState> {
        match self {
            SampledState::Pure(psi) => Some(psi),
            SampledState::Mixed(_) => None,
        }
    }
}

/// Random stream `index` of `seed`; independent of how work is scheduled.
pub fn substream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

pub fn sample<R: Rng + ?Sized>(family: &Family, rng: &mut R) -> Result<SampledState> {
    Ok(match family {
        Family::BellMixture { p } => SampledState::Mixed(bell_mixture(*p)?),
        Family::Werner { p } => SampledState::Mixed(werner(*p)?),
        Family::Canonical(params) => SampledState::Pure(canonical_three_qubit(params)?),
        Family::HaarPure { dim } => SampledState::Pure(haar_pure(*dim, rng)?),
        Family::GhzClass => SampledState::Pure(ghz_class(rng)?),
        Family::WClass => SampledState::Pure(w_class(rng)?),
        Family::Separable => SampledState::Mixed(separable(rng)?),
        Family::Biseparable => SampledState::Pure(biseparable(rng)?),
        Family::RandomMixed { dim } => SampledState::Mixed(random_mixed(*dim, rng)?),
    })
}

pub fn sample_spec(spec: &FamilySpec) -> Result<SampledState> {
    sample(&spec.family, &mut ChaCha8Rng::seed_from_u64(spec.seed))
}
