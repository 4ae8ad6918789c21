//! l1-norm coherence of a qubit and triads of mutually unbiased bases.
//!
//! A qubit basis is the eigenbasis of `n·σ` for some Bloch axis `n`, and its
//! l1-coherence only depends on the axis: `C = |r - (n·r) n|`. Three bases are
//! mutually unbiased exactly when their axes form an orthonormal frame.

use std::f64::consts::PI;

use nalgebra::{Vector2, Vector3};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optim::{self, NelderMeadOptions, StartSequence};
use crate::qlin::{BlochVector, Complex, DensityMatrix};
use crate::COMPLEMENTARITY_BOUND;

const ORTHONORMAL_TOL: f64 = 1e-12;

/// Unit Bloch axis in spherical angles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasurementAxis {
    pub theta: f64,
    pub phi: f64,
}

impl MeasurementAxis {
    pub fn new(theta: f64, phi: f64) -> Self {
        Self { theta, phi }
    }

    /// Angles of a nonzero vector, with `theta ∈ [0, π]`, `phi ∈ [0, 2π)`.
    pub fn from_vector(v: &Vector3<f64>) -> Self {
        let n = v.normalize();
        let theta = n.z.clamp(-1.0, 1.0).acos();
        let mut phi = n.y.atan2(n.x);
        if phi < 0.0 {
            phi += 2.0 * PI;
        }
        if phi >= 2.0 * PI {
            phi = 0.0;
        }
        Self { theta, phi }
    }

    pub fn x() -> Self {
        Self::new(PI / 2.0, 0.0)
    }

    pub fn y() -> Self {
        Self::new(PI / 2.0, PI / 2.0)
    }

    pub fn z() -> Self {
        Self::new(0.0, 0.0)
    }

    pub fn unit_vector(&self) -> Vector3<f64> {
        spherical(self.theta, self.phi)
    }
}

#[inline]
pub(crate) fn spherical(theta: f64, phi: f64) -> Vector3<f64> {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    Vector3::new(st * cp, st * sp, ct)
}

/// Orthonormal qubit basis `{|b₀⟩, |b₁⟩}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitBasis {
    kets: [Vector2<Complex>; 2],
}

impl QubitBasis {
    pub fn new(b0: Vector2<Complex>, b1: Vector2<Complex>) -> Result<Self> {
        let dev = [
            (b0.norm_squared() - 1.0).abs(),
            (b1.norm_squared() - 1.0).abs(),
            b0.dotc(&b1).norm(),
        ]
        .into_iter()
        .fold(0.0, f64::max);
        if !(dev <= ORTHONORMAL_TOL) {
            return Err(Error::NotOrthonormal(dev));
        }
        Ok(Self { kets: [b0, b1] })
    }

    /// Eigenbasis of `n·σ`, `+1` eigenvector first.
    pub fn from_axis(axis: &MeasurementAxis) -> Self {
        let (u, w) = axis_kets(axis.theta, axis.phi);
        Self { kets: [u, w] }
    }

    pub fn kets(&self) -> &[Vector2<Complex>; 2] {
        &self.kets
    }

    /// Bloch axis of the first basis vector.
    pub fn axis(&self) -> Vector3<f64> {
        let k = &self.kets[0];
        let off = k[0].conj() * k[1];
        Vector3::new(2.0 * off.re, 2.0 * off.im, k[0].norm_sqr() - k[1].norm_sqr())
    }
}

/// Basis kets of `n(θ, φ)·σ`: `cos(θ/2)|0⟩ + e^{iφ} sin(θ/2)|1⟩` and
/// `sin(θ/2)|0⟩ - e^{iφ} cos(θ/2)|1⟩`.
fn axis_kets(theta: f64, phi: f64) -> (Vector2<Complex>, Vector2<Complex>) {
    let (s, c) = (0.5 * theta).sin_cos();
    let e = Complex::from_polar(1.0, phi);
    (
        Vector2::new(Complex::new(c, 0.0), e * s),
        Vector2::new(Complex::new(s, 0.0), -e * c),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MubFamily {
    /// `M₁` along `n(θ, φ)`, `M₂ = (M₁⁺ ± M₁⁻)/√2`, `M₃ = (M₁⁺ ± iM₁⁻)/√2`.
    Paper,
    /// `Paper` with `M₂`, `M₃` additionally rotated by `χ` about `M₁`;
    /// covers every orthonormal Bloch frame.
    Full,
}

impl MubFamily {
    /// Number of continuous angles that parameterise a triad.
    pub fn num_params(self) -> usize {
        match self {
            MubFamily::Paper => 2,
            MubFamily::Full => 3,
        }
    }
}

impl std::str::FromStr for MubFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper" => Ok(Self::Paper),
            "full" => Ok(Self::Full),
            other => Err(Error::InvalidSpec(format!("unknown MUB family `{other}`"))),
        }
    }
}

/// Three mutually unbiased qubit bases.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BasisTriad {
    pub theta: f64,
    pub phi: f64,
    /// Ignored for [`MubFamily::Paper`].
    pub chi: f64,
    pub family: MubFamily,
}

impl BasisTriad {
    pub fn paper(theta: f64, phi: f64) -> Self {
        Self {
            theta,
            phi,
            chi: 0.0,
            family: MubFamily::Paper,
        }
    }

    pub fn full(theta: f64, phi: f64, chi: f64) -> Self {
        Self {
            theta,
            phi,
            chi,
            family: MubFamily::Full,
        }
    }

    /// Builds a triad from continuous parameters `[θ, φ]` or `[θ, φ, χ]`.
    pub fn from_params(family: MubFamily, p: &[f64]) -> Self {
        match family {
            MubFamily::Paper => Self::paper(p[0], p[1]),
            MubFamily::Full => Self::full(p[0], p[1], p[2]),
        }
    }

    pub fn params(&self) -> Vec<f64> {
        match self.family {
            MubFamily::Paper => vec![self.theta, self.phi],
            MubFamily::Full => vec![self.theta, self.phi, self.chi],
        }
    }

    /// Full-family triad whose axes are (up to sign) the columns of `frame`.
    pub fn from_frame(frame: &[Vector3<f64>; 3]) -> Self {
        let first = MeasurementAxis::from_vector(&frame[0]);
        let [_, e2, e3] = triad_axes(first.theta, first.phi, 0.0);
        let chi = frame[1].dot(&e3).atan2(frame[1].dot(&e2));
        Self::full(first.theta, first.phi, chi)
    }

    fn chi(&self) -> f64 {
        match self.family {
            MubFamily::Paper => 0.0,
            MubFamily::Full => self.chi,
        }
    }

    /// Bloch axes of `M₁`, `M₂`, `M₃`; an orthonormal frame.
    pub fn axes(&self) -> [Vector3<f64>; 3] {
        triad_axes(self.theta, self.phi, self.chi())
    }

    /// Explicit kets of the three bases.
    pub fn bases(&self) -> [QubitBasis; 3] {
        let (u, w) = axis_kets(self.theta, self.phi);
        let r = Complex::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let ph = Complex::from_polar(1.0, self.chi());
        let i = Complex::new(0.0, 1.0);
        let mk = |g: Complex| QubitBasis {
            kets: [(u + w * g) * r, (u - w * g) * r],
        };
        [QubitBasis { kets: [u, w] }, mk(ph), mk(i * ph)]
    }
}

/// Axes of the triad. With `c = cos θ`, `s = sin θ`, the two-parameter axes are
/// `n(θ, φ)`, `(-c cos φ, -c sin φ, s)` and `(sin φ, -cos φ, 0)`; `χ` rotates
/// the last two about the first.
#[inline]
pub(crate) fn triad_axes(theta: f64, phi: f64, chi: f64) -> [Vector3<f64>; 3] {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    let n = Vector3::new(st * cp, st * sp, ct);
    let e2 = Vector3::new(-ct * cp, -ct * sp, st);
    let e3 = Vector3::new(sp, -cp, 0.0);
    if chi == 0.0 {
        return [n, e2, e3];
    }
    let (sx, cx) = chi.sin_cos();
    [n, e2 * cx + e3 * sx, e3 * cx - e2 * sx]
}

/// l1-coherences in the three bases of a triad.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoherenceTriple {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
}

impl CoherenceTriple {
    pub fn sum(&self) -> f64 {
        self.c1 + self.c2 + self.c3
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.c1, self.c2, self.c3]
    }
}

fn require_qubit(rho: &DensityMatrix) -> Result<()> {
    if rho.dim() != 2 {
        return Err(Error::InvalidDimension(rho.dim()));
    }
    Ok(())
}

/// `C = 2|⟨b₀|ρ|b₁⟩|`, the sum of off-diagonal magnitudes in the basis.
pub fn l1_coherence(rho: &DensityMatrix, basis: &QubitBasis) -> Result<f64> {
    require_qubit(rho)?;
    let [b0, b1] = basis.kets();
    let m = rho.matrix();
    let mut off = Complex::new(0.0, 0.0);
    for i in 0..2 {
        for j in 0..2 {
            off += b0[i].conj() * m[(i, j)] * b1[j];
        }
    }
    Ok(2.0 * off.norm())
}

/// Closed forms for the coherences in the [`MubFamily::Paper`] triad at `(θ, φ)`,
/// written in the matrix elements `ρ_ij = ⟨i|ρ|j⟩`.
pub fn appendix_a_coherences(rho: &DensityMatrix, theta: f64, phi: f64) -> Result<CoherenceTriple> {
    require_qubit(rho)?;
    let m = rho.matrix();
    let (r00, r01, r10, r11) = (m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
    let e = Complex::from_polar(1.0, phi);
    let ec = e.conj();
    let i = Complex::new(0.0, 1.0);
    let (st, ct) = theta.sin_cos();
    let (sh, ch) = (0.5 * theta).sin_cos();
    let c1 = 2.0 * (r00 * (0.5 * st) - r11 * (0.5 * st) - e * r01 * (ch * ch) + ec * r10 * (sh * sh)).norm();
    let c2 = (r00 * ct - r11 * ct + e * r01 * (1.0 + st) - ec * r10 * (1.0 - st)).norm();
    let c3 = (r00 - r11 + i * e * r01 + i * ec * r10).norm();
    Ok(CoherenceTriple { c1, c2, c3 })
}

/// Coherence of the qubit with Bloch vector `r` in the basis along `axis`:
/// `√(|r|² - (n·r)²)`. Homogeneous of degree one in `r`.
pub fn bloch_coherence(r: &BlochVector, axis: &MeasurementAxis) -> f64 {
    perp_norm(r, &axis.unit_vector())
}

/// Length of the component of `v` orthogonal to the unit vector `n`.
#[inline]
pub fn perp_norm(v: &Vector3<f64>, n: &Vector3<f64>) -> f64 {
    let along = v.dot(n);
    (v.norm_squared() - along * along).max(0.0).sqrt()
}

/// `Σᵢ C_{Mᵢ}(ρ)` for the state with Bloch vector `r`.
pub fn coherence_sum(r: &BlochVector, triad: &BasisTriad) -> f64 {
    triad.axes().iter().map(|m| perp_norm(r, m)).sum()
}

/// Maximum of `Σᵢ C_{Mᵢ}` over all triads, `√6 |r|`, attained by a frame
/// whose axes all make angle `acos(1/√3)` with `r`.
pub fn max_coherence_sum(rho: &DensityMatrix) -> Result<f64> {
    Ok(COMPLEMENTARITY_BOUND * rho.bloch_vector()?.norm())
}

/// Triad whose axes are all at `acos(1/√3)` to `r`, saturating
/// [`max_coherence_sum`]. For `r = 0` any frame works; the coordinate-balanced
/// frame is returned.
pub fn balanced_frame(r: &Vector3<f64>) -> [Vector3<f64>; 3] {
    let diag = Vector3::new(1.0, 1.0, 1.0).normalize();
    let target = if r.norm() > 0.0 { r.normalize() } else { diag };
    // Rotation taking `diag` to `target` (Rodrigues), applied to the coordinate axes.
    let k = diag.cross(&target);
    let s = k.norm();
    let c = diag.dot(&target);
    let rotate = |v: Vector3<f64>| -> Vector3<f64> {
        if s < 1e-15 {
            return if c > 0.0 { v } else { -v };
        }
        let k = k / s;
        v * c + k.cross(&v) * s + k * (k.dot(&v) * (1.0 - c))
    };
    [rotate(Vector3::x()), rotate(Vector3::y()), rotate(Vector3::z())]
}

/// Multi-start Nelder–Mead maximisation of `Σᵢ C_{Mᵢ}` over the chosen
/// family. Independent of the closed form in [`max_coherence_sum`].
pub fn max_coherence_sum_numeric(
    rho: &DensityMatrix,
    family: MubFamily,
    restarts: usize,
    seed: u64,
) -> Result<f64> {
    let r = rho.bloch_vector()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ranges = match family {
        MubFamily::Paper => vec![(0.0, PI), (0.0, 2.0 * PI)],
        MubFamily::Full => vec![(0.0, PI), (0.0, 2.0 * PI), (0.0, 2.0 * PI)],
    };
    let starts = StartSequence::new(ranges, &mut rng);
    let opts = NelderMeadOptions {
        tol: 1e-10,
        max_iters: 4000,
        initial_step: 0.5,
    };
    let neg = |p: &[f64]| -coherence_sum(&r, &BasisTriad::from_params(family, p));
    let best = (0..restarts.max(1))
        .map(|k| -optim::polish(neg, &starts.point(k), &opts, 3).value)
        .fold(0.0, f64::max);
    Ok(best)
}

/// Checks `|⟨e_i^a|e_j^b⟩|² = 1/2` for all pairs of distinct bases.
pub fn mutual_unbiasedness_deviation(bases: &[QubitBasis; 3]) -> f64 {
    let mut dev: f64 = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            if i == j {
                continue;
            }
            for a in bases[i].kets() {
                for b in bases[j].kets() {
                    dev = dev.max((a.dotc(b).norm_sqr() - 0.5).abs());
                }
            }
        }
    }
    dev
}
