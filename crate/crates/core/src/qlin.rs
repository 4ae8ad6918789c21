//! Dense complex linear algebra for one-, two- and three-qubit systems.
//!
//! Subsystems are ordered A, B, C with A on the most significant bit of the
//! computational-basis index, so `|abc⟩` lives at index `4a + 2b + c`.

use nalgebra::{DMatrix, DVector, Matrix2, Matrix3, SymmetricEigen, Vector3};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub type Complex = Complex64;

/// Bloch vector of a qubit, `ρ = (I + r·σ)/2`.
pub type BlochVector = Vector3<f64>;

pub const HERMITIAN_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-12;
pub const PSD_FLOOR: f64 = -1e-10;
pub const NORM_TOL: f64 = 1e-12;
pub const UNITARY_TOL: f64 = 1e-12;

const MAX_DIM: usize = 8;

fn c(re: f64, im: f64) -> Complex {
    Complex::new(re, im)
}

/// Pauli matrix `σ_x`, `σ_y` or `σ_z` for `axis` 0, 1, 2.
pub fn pauli(axis: usize) -> Matrix2<Complex> {
    let (o, z) = (c(1.0, 0.0), c(0.0, 0.0));
    match axis {
        0 => Matrix2::new(z, o, o, z),
        1 => Matrix2::new(z, c(0.0, -1.0), c(0.0, 1.0), z),
        2 => Matrix2::new(o, z, z, -o),
        _ => panic!("pauli axis {axis} out of range"),
    }
}

fn check_dim(dim: usize) -> Result<()> {
    match dim {
        2 | 4 | 8 => Ok(()),
        d => Err(Error::InvalidDimension(d)),
    }
}

fn qubits(dim: usize) -> usize {
    dim.trailing_zeros() as usize
}

fn to_dmatrix2(m: &Matrix2<Complex>) -> DMatrix<Complex> {
    DMatrix::from_fn(2, 2, |i, j| m[(i, j)])
}

fn max_abs(m: &DMatrix<Complex>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn hermitian_deviation(m: &DMatrix<Complex>) -> f64 {
    max_abs(&(m - m.adjoint()))
}

/// Largest entrywise deviation of `U†U` from the identity.
pub fn unitarity_deviation(u: &DMatrix<Complex>) -> f64 {
    let n = u.nrows();
    max_abs(&(u.adjoint() * u - DMatrix::<Complex>::identity(n, n)))
}

/// Sorted (ascending) eigenvalues of a Hermitian matrix.
pub fn hermitian_eigenvalues(m: &DMatrix<Complex>) -> Vec<f64> {
    let sym = (m + m.adjoint()) * c(0.5, 0.0);
    let mut vals: Vec<f64> = if sym.nrows() == 2 {
        // closed form: mean ± sqrt(half-difference² + |offdiag|²)
        let a = sym[(0, 0)].re;
        let d = sym[(1, 1)].re;
        let b = sym[(0, 1)].norm();
        let mean = 0.5 * (a + d);
        let rad = (0.25 * (a - d) * (a - d) + b * b).sqrt();
        vec![mean - rad, mean + rad]
    } else {
        SymmetricEigen::new(sym).eigenvalues.iter().copied().collect()
    };
    vals.sort_by(f64::total_cmp);
    vals
}

/// A validated density matrix of dimension 2, 4 or 8.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: DMatrix<Complex>,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(matrix: DMatrix<Complex>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::InvalidDimension(matrix.nrows()));
        }
        check_dim(matrix.nrows())?;
        if matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidSpec("non-finite matrix entry".into()));
        }
        let herm = hermitian_deviation(&matrix);
        if herm > HERMITIAN_TOL {
            return Err(Error::NotHermitian(herm));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::TraceNotOne(tr.re));
        }
        let min = hermitian_eigenvalues(&matrix)[0];
        if min < PSD_FLOOR {
            return Err(Error::NotPositive(min));
        }
        Ok(Self::from_trusted(matrix))
    }

    /// Wraps a matrix produced by a state-preserving operation, restoring
    /// exact Hermiticity.
    pub(crate) fn from_trusted(matrix: DMatrix<Complex>) -> Self {
        let matrix = (&matrix + matrix.adjoint()) * c(0.5, 0.0);
        Self { matrix }
    }

    pub fn from_pure(psi: &PureState) -> Self {
        let a = psi.amplitudes();
        Self::from_trusted(a * a.adjoint())
    }

    pub fn maximally_mixed(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(Self::from_trusted(
            DMatrix::identity(dim, dim) * c(1.0 / dim as f64, 0.0),
        ))
    }

    /// Qubit state `(I + r·σ)/2`; requires `|r| ≤ 1 + 1e-10`.
    pub fn from_bloch(r: &BlochVector) -> Result<Self> {
        let n = r.norm();
        if n > 1.0 + 1e-10 {
            return Err(Error::OutOfRange {
                name: "|r|",
                value: n,
                range: "[0, 1]",
            });
        }
        Ok(Self::from_trusted(to_dmatrix2(&bloch_to_matrix(r))))
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn num_qubits(&self) -> usize {
        qubits(self.dim())
    }

    pub fn matrix(&self) -> &DMatrix<Complex> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<Complex> {
        self.matrix
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.matrix)
    }

    /// Bloch vector of a single-qubit state.
    pub fn bloch_vector(&self) -> Result<BlochVector> {
        if self.dim() != 2 {
            return Err(Error::InvalidDimension(self.dim()));
        }
        let m = &self.matrix;
        Ok(Vector3::new(
            2.0 * m[(0, 1)].re,
            -2.0 * m[(0, 1)].im,
            (m[(0, 0)] - m[(1, 1)]).re,
        ))
    }

    pub fn kron(&self, other: &Self) -> Result<Self> {
        let d = self.dim() * other.dim();
        if d > MAX_DIM {
            return Err(Error::DimensionOverflow(self.dim(), other.dim()));
        }
        Ok(Self::from_trusted(self.matrix.kronecker(&other.matrix)))
    }

    /// Reduced state on the subsystems in `keep` (indices into A, B, C...),
    /// kept subsystems appear in ascending order.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<Self> {
        let n = self.num_qubits();
        let bad = || Error::InvalidSubsystems {
            keep: keep.to_vec(),
            qubits: n,
        };
        let mut kept = keep.to_vec();
        kept.sort_unstable();
        kept.dedup();
        if kept.is_empty() || kept.len() != keep.len() || kept.iter().any(|&s| s >= n) {
            return Err(bad());
        }
        let traced: Vec<usize> = (0..n).filter(|s| !kept.contains(s)).collect();
        let k = kept.len();
        let t = traced.len();
        let compose = |kept_bits: usize, traced_bits: usize| -> usize {
            let mut idx = 0;
            for (pos, &s) in kept.iter().enumerate() {
                idx |= ((kept_bits >> (k - 1 - pos)) & 1) << (n - 1 - s);
            }
            for (pos, &s) in traced.iter().enumerate() {
                idx |= ((traced_bits >> (t - 1 - pos)) & 1) << (n - 1 - s);
            }
            idx
        };
        let out_dim = 1 << k;
        let mut out = DMatrix::<Complex>::zeros(out_dim, out_dim);
        for i in 0..out_dim {
            for j in 0..out_dim {
                let mut acc = c(0.0, 0.0);
                for e in 0..(1 << t) {
                    acc += self.matrix[(compose(i, e), compose(j, e))];
                }
                out[(i, j)] = acc;
            }
        }
        Ok(Self::from_trusted(out))
    }

    /// Partial transpose on one subsystem. The result is Hermitian with unit
    /// trace but not necessarily positive, so it is returned as a raw matrix.
    pub fn partial_transpose(&self, subsystem: usize) -> Result<DMatrix<Complex>> {
        let n = self.num_qubits();
        if subsystem >= n {
            return Err(Error::InvalidSubsystems {
                keep: vec![subsystem],
                qubits: n,
            });
        }
        let bit = 1 << (n - 1 - subsystem);
        let d = self.dim();
        Ok(DMatrix::from_fn(d, d, |i, j| {
            let (bi, bj) = (i & bit, j & bit);
            let i2 = (i & !bit) | bj;
            let j2 = (j & !bit) | bi;
            self.matrix[(i2, j2)]
        }))
    }

    /// Smallest eigenvalue of the partial transpose on the last subsystem.
    pub fn min_partial_transpose_eigenvalue(&self) -> Result<f64> {
        let pt = self.partial_transpose(self.num_qubits() - 1)?;
        Ok(hermitian_eigenvalues(&pt)[0])
    }
}

/// A normalised state vector of dimension 2, 4 or 8.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: DVector<Complex>,
}

impl PureState {
    pub fn new(amplitudes: DVector<Complex>) -> Result<Self> {
        check_dim(amplitudes.len())?;
        let norm = amplitudes.norm();
        if !norm.is_finite() || (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(norm));
        }
        Ok(Self { amplitudes })
    }

    /// Rescales a nonzero vector to unit norm.
    pub fn normalized(amplitudes: DVector<Complex>) -> Result<Self> {
        let norm = amplitudes.norm();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::NotNormalized(norm));
        }
        Self::new(amplitudes / c(norm, 0.0))
    }

    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        check_dim(dim)?;
        if index >= dim {
            return Err(Error::InvalidDimension(index));
        }
        let mut v = DVector::zeros(dim);
        v[index] = c(1.0, 0.0);
        Ok(Self { amplitudes: v })
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &DVector<Complex> {
        &self.amplitudes
    }

    pub fn kron(&self, other: &Self) -> Result<Self> {
        let d = self.dim() * other.dim();
        if d > MAX_DIM {
            return Err(Error::DimensionOverflow(self.dim(), other.dim()));
        }
        Ok(Self {
            amplitudes: self.amplitudes.kronecker(&other.amplitudes),
        })
    }

    pub fn density(&self) -> DensityMatrix {
        DensityMatrix::from_pure(self)
    }
}

/// `(I + r·σ)/2` without validation.
pub fn bloch_to_matrix(r: &BlochVector) -> Matrix2<Complex> {
    Matrix2::new(
        c(0.5 * (1.0 + r.z), 0.0),
        c(0.5 * r.x, -0.5 * r.y),
        c(0.5 * r.x, 0.5 * r.y),
        c(0.5 * (1.0 - r.z), 0.0),
    )
}

/// Pauli decomposition of a two-qubit state:
/// `ρ = (I⊗I + r_A·σ⊗I + I⊗r_B·σ + Σ T_ij σ_i⊗σ_j)/4`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrDecomp {
    pub r_a: BlochVector,
    pub r_b: BlochVector,
    pub t: Matrix3<f64>,
}

impl CorrDecomp {
    /// Decomposition of the state with the parties exchanged: `(r_B, r_A, Tᵀ)`.
    pub fn swapped(&self) -> Self {
        Self {
            r_a: self.r_b,
            r_b: self.r_a,
            t: self.t.transpose(),
        }
    }

    /// `T = 0` and both local vectors zero.
    pub fn is_trivial(&self, tol: f64) -> bool {
        self.r_a.norm() <= tol && self.r_b.norm() <= tol && self.t.abs().max() <= tol
    }

    /// Reassembles the 4×4 matrix; validated as a density matrix.
    pub fn to_density(&self) -> Result<DensityMatrix> {
        DensityMatrix::new(self.to_matrix())
    }

    pub fn to_matrix(&self) -> DMatrix<Complex> {
        let id = Matrix2::<Complex>::identity();
        let mut m = to_dmatrix2(&id).kronecker(&to_dmatrix2(&id));
        for i in 0..3 {
            let p = to_dmatrix2(&pauli(i));
            m += to_dmatrix2(&id).kronecker(&p) * c(self.r_b[i], 0.0);
            m += p.kronecker(&to_dmatrix2(&id)) * c(self.r_a[i], 0.0);
            for j in 0..3 {
                m += p.kronecker(&to_dmatrix2(&pauli(j))) * c(self.t[(i, j)], 0.0);
            }
        }
        m * c(0.25, 0.0)
    }
}

/// Exact Pauli decomposition of a two-qubit state.
pub fn to_corr(rho: &DensityMatrix) -> Result<CorrDecomp> {
    if rho.dim() != 4 {
        return Err(Error::InvalidDimension(rho.dim()));
    }
    let m = rho.matrix();
    let id = to_dmatrix2(&Matrix2::identity());
    let expect = |op: DMatrix<Complex>| (m * op).trace().re;
    let paulis: Vec<DMatrix<Complex>> = (0..3).map(|i| to_dmatrix2(&pauli(i))).collect();
    let r_a = Vector3::from_fn(|i, _| expect(paulis[i].kronecker(&id)));
    let r_b = Vector3::from_fn(|i, _| expect(id.kronecker(&paulis[i])));
    let t = Matrix3::from_fn(|i, j| expect(paulis[i].kronecker(&paulis[j])));
    Ok(CorrDecomp { r_a, r_b, t })
}

pub fn is_unitary(u: &DMatrix<Complex>, tol: f64) -> bool {
    u.is_square() && unitarity_deviation(u) <= tol
}

/// `(U ⊗ V) ρ (U† ⊗ V†)` for a two-qubit state.
pub fn apply_local_unitary(
    rho: &DensityMatrix,
    u: &Matrix2<Complex>,
    v: &Matrix2<Complex>,
) -> Result<DensityMatrix> {
    if rho.dim() != 4 {
        return Err(Error::InvalidDimension(rho.dim()));
    }
    for w in [u, v] {
        let dev = unitarity_deviation(&to_dmatrix2(w));
        if dev > UNITARY_TOL {
            return Err(Error::NotUnitary(dev));
        }
    }
    let uv = to_dmatrix2(u).kronecker(&to_dmatrix2(v));
    Ok(DensityMatrix::from_trusted(&uv * rho.matrix() * uv.adjoint()))
}

/// SO(3) rotation induced on Bloch vectors by a qubit unitary:
/// `R_ij = ½ Tr[σ_i U σ_j U†]`.
pub fn bloch_rotation(u: &Matrix2<Complex>) -> Matrix3<f64> {
    let ud = u.adjoint();
    Matrix3::from_fn(|i, j| 0.5 * (pauli(i) * u * pauli(j) * ud).trace().re)
}

/// Haar-random unitary via QR of a complex Ginibre matrix with the phases of
/// `R`'s diagonal absorbed into `Q`.
pub fn haar_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<DMatrix<Complex>> {
    check_dim(dim)?;
    let g = DMatrix::from_fn(dim, dim, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c(re, im) * std::f64::consts::FRAC_1_SQRT_2
    });
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..dim {
        let d = r[(j, j)];
        let n = d.norm();
        let phase = if n > 0.0 { d / n } else { c(1.0, 0.0) };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    Ok(q)
}

/// Haar-random 2×2 unitary as a fixed-size matrix.
pub fn haar_unitary2<R: Rng + ?Sized>(rng: &mut R) -> Matrix2<Complex> {
    let u = haar_unitary(2, rng).expect("dimension 2 is supported");
    Matrix2::from_fn(|i, j| u[(i, j)])
}

/// SWAP gate on two qubits.
pub fn swap_gate() -> DMatrix<Complex> {
    let mut s = DMatrix::<Complex>::zeros(4, 4);
    for (i, j) in [(0, 0), (1, 2), (2, 1), (3, 3)] {
        s[(i, j)] = c(1.0, 0.0);
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn phi_plus() -> PureState {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        PureState::new(DVector::from_vec(vec![
            c(s, 0.0),
            c(0.0, 0.0),
            c(0.0, 0.0),
            c(s, 0.0),
        ]))
        .unwrap()
    }

    fn random_state<R: Rng>(dim: usize, rng: &mut R) -> DensityMatrix {
        // mixture of a Haar pure state with a random-weight identity
        let u = haar_unitary(dim, rng).unwrap();
        let psi = PureState::new(u.column(0).into_owned()).unwrap();
        let w: f64 = rng.random();
        let mixed = psi.density().into_matrix() * c(w, 0.0)
            + DMatrix::identity(dim, dim) * c((1.0 - w) / dim as f64, 0.0);
        DensityMatrix::new(mixed).unwrap()
    }

    fn max_diff(a: &DMatrix<Complex>, b: &DMatrix<Complex>) -> f64 {
        max_abs(&(a - b))
    }

    #[test]
    fn kron_basis_states() {
        let z = PureState::basis(2, 0).unwrap();
        let zz = z.kron(&z).unwrap();
        assert_eq!(zz.amplitudes()[0], c(1.0, 0.0));
        assert!(zz.amplitudes().iter().skip(1).all(|a| a.norm() == 0.0));
    }

    #[test]
    fn kron_maximally_mixed() {
        let m = DensityMatrix::maximally_mixed(2).unwrap();
        let mm = m.kron(&m).unwrap();
        let expected = DensityMatrix::maximally_mixed(4).unwrap();
        assert!(max_diff(mm.matrix(), expected.matrix()) < 1e-15);
    }

    #[test]
    fn bell_projector_entries() {
        let rho = phi_plus().density();
        for i in 0..4 {
            for j in 0..4 {
                let expected = if [0, 3].contains(&i) && [0, 3].contains(&j) {
                    0.5
                } else {
                    0.0
                };
                assert!((rho.matrix()[(i, j)] - c(expected, 0.0)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn kron_overflow() {
        let m4 = DensityMatrix::maximally_mixed(4).unwrap();
        assert!(matches!(m4.kron(&m4), Err(Error::DimensionOverflow(4, 4))));
    }

    #[test]
    fn partial_trace_of_bell_is_maximally_mixed() {
        let rho = phi_plus().density();
        let half = DensityMatrix::maximally_mixed(2).unwrap();
        for keep in [[0], [1]] {
            let red = rho.partial_trace(&keep).unwrap();
            assert!(max_diff(red.matrix(), half.matrix()) < 1e-15);
        }
    }

    #[test]
    fn partial_trace_of_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_state(2, &mut rng);
        let b = random_state(2, &mut rng);
        let ab = a.kron(&b).unwrap();
        assert!(max_diff(ab.partial_trace(&[0]).unwrap().matrix(), a.matrix()) < 1e-14);
        assert!(max_diff(ab.partial_trace(&[1]).unwrap().matrix(), b.matrix()) < 1e-14);
    }

    #[test]
    fn partial_trace_ghz() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mut amps = DVector::zeros(8);
        amps[0] = c(s, 0.0);
        amps[7] = c(s, 0.0);
        let ghz = PureState::new(amps).unwrap().density();
        let ab = ghz.partial_trace(&[0, 1]).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let e = if i == j && (i == 0 || i == 3) { 0.5 } else { 0.0 };
                assert!((ab.matrix()[(i, j)] - c(e, 0.0)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn partial_trace_rejects_bad_sets() {
        let rho = DensityMatrix::maximally_mixed(8).unwrap();
        for keep in [&[][..], &[3][..], &[1, 1][..]] {
            assert!(matches!(
                rho.partial_trace(keep),
                Err(Error::InvalidSubsystems { .. })
            ));
        }
    }

    #[test]
    fn partial_trace_keeps_middle_and_last() {
        // |0⟩|1⟩|+⟩ → Tr_A gives |1⟩⟨1| ⊗ |+⟩⟨+|
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let plus = PureState::new(DVector::from_vec(vec![c(s, 0.0), c(s, 0.0)])).unwrap();
        let one = PureState::basis(2, 1).unwrap();
        let zero = PureState::basis(2, 0).unwrap();
        let abc = zero.kron(&one).unwrap().kron(&plus).unwrap().density();
        let bc = abc.partial_trace(&[1, 2]).unwrap();
        let expected = one.kron(&plus).unwrap().density();
        assert!(max_diff(bc.matrix(), expected.matrix()) < 1e-15);
        let ac = abc.partial_trace(&[0, 2]).unwrap();
        let expected = zero.kron(&plus).unwrap().density();
        assert!(max_diff(ac.matrix(), expected.matrix()) < 1e-15);
    }

    #[test]
    fn corr_of_bell_state() {
        let corr = to_corr(&phi_plus().density()).unwrap();
        assert!(corr.r_a.norm() < 1e-15 && corr.r_b.norm() < 1e-15);
        let expected = Matrix3::from_diagonal(&Vector3::new(1.0, -1.0, 1.0));
        assert!((corr.t - expected).abs().max() < 1e-15);
    }

    #[test]
    fn corr_round_trip_and_swap() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let rho = random_state(4, &mut rng);
            let corr = to_corr(&rho).unwrap();
            assert!(max_diff(&corr.to_matrix(), rho.matrix()) < 1e-12);
            let s = swap_gate();
            let swapped = DensityMatrix::new(&s * rho.matrix() * &s).unwrap();
            let sc = to_corr(&swapped).unwrap();
            let expect = corr.swapped();
            assert!((sc.r_a - expect.r_a).norm() < 1e-12);
            assert!((sc.r_b - expect.r_b).norm() < 1e-12);
            assert!((sc.t - expect.t).abs().max() < 1e-12);
        }
    }

    #[test]
    fn local_unitary_identity_and_flip() {
        let rho = phi_plus().density();
        let id = Matrix2::identity();
        let same = apply_local_unitary(&rho, &id, &id).unwrap();
        assert!(max_diff(same.matrix(), rho.matrix()) < 1e-15);
        let x = pauli(0);
        let flipped = apply_local_unitary(&rho, &x, &x).unwrap();
        assert!(max_diff(flipped.matrix(), rho.matrix()) < 1e-15);
    }

    #[test]
    fn local_unitary_rotates_correlations() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let rho = random_state(4, &mut rng);
            let u = haar_unitary2(&mut rng);
            let v = haar_unitary2(&mut rng);
            let before = to_corr(&rho).unwrap();
            let after = to_corr(&apply_local_unitary(&rho, &u, &v).unwrap()).unwrap();
            let (ru, rv) = (bloch_rotation(&u), bloch_rotation(&v));
            assert!((after.t - ru * before.t * rv.transpose()).abs().max() < 1e-12);
            assert!((after.r_a - ru * before.r_a).norm() < 1e-12);
            assert!((after.r_b - rv * before.r_b).norm() < 1e-12);
            let (e0, e1) = (rho.eigenvalues(), apply_local_unitary(&rho, &u, &v).unwrap().eigenvalues());
            for (a, b) in e0.iter().zip(&e1) {
                assert!((a - b).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn local_unitary_rejects_non_unitary() {
        let rho = DensityMatrix::maximally_mixed(4).unwrap();
        let bad = Matrix2::identity() * c(2.0, 0.0);
        assert!(matches!(
            apply_local_unitary(&rho, &bad, &Matrix2::identity()),
            Err(Error::NotUnitary(_))
        ));
    }

    #[test]
    fn haar_unitary_is_unitary_and_deterministic() {
        for dim in [2, 4, 8] {
            let a = haar_unitary(dim, &mut ChaCha8Rng::seed_from_u64(42)).unwrap();
            let b = haar_unitary(dim, &mut ChaCha8Rng::seed_from_u64(42)).unwrap();
            assert!(unitarity_deviation(&a) < 1e-10);
            assert_eq!(a, b);
        }
        assert!(haar_unitary(3, &mut ChaCha8Rng::seed_from_u64(0)).is_err());
    }

    #[test]
    fn haar_second_moment() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let n = 10_000;
        let mean = (0..n)
            .map(|_| haar_unitary(2, &mut rng).unwrap()[(0, 0)].norm_sqr())
            .sum::<f64>()
            / n as f64;
        assert!((mean - 0.5).abs() < 0.02, "mean {mean}");
    }

    #[test]
    fn validation_errors() {
        let mut m = DMatrix::<Complex>::identity(4, 4) * c(0.25, 0.0);
        m[(0, 1)] = c(0.1, 0.0);
        assert!(matches!(DensityMatrix::new(m), Err(Error::NotHermitian(_))));
        let m = DMatrix::<Complex>::identity(4, 4) * c(0.5, 0.0);
        assert!(matches!(DensityMatrix::new(m), Err(Error::TraceNotOne(_))));
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![c(1.5, 0.0), c(-0.5, 0.0)]));
        assert!(matches!(DensityMatrix::new(m), Err(Error::NotPositive(_))));
        let m = DMatrix::<Complex>::identity(3, 3) * c(1.0 / 3.0, 0.0);
        assert!(matches!(DensityMatrix::new(m), Err(Error::InvalidDimension(3))));
        let v = DVector::from_vec(vec![c(1.0, 0.0), c(1.0, 0.0)]);
        assert!(matches!(PureState::new(v), Err(Error::NotNormalized(_))));
    }

    #[test]
    fn random_operations_preserve_validity() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..1000 {
            let rho = random_state(8, &mut rng);
            for keep in [&[0, 1][..], &[0, 2][..], &[2][..]] {
                let red = rho.partial_trace(keep).unwrap();
                assert!((red.matrix().trace().re - 1.0).abs() < 1e-12);
                assert!(red.eigenvalues()[0] >= PSD_FLOOR);
            }
        }
        for _ in 0..100 {
            let a = random_state(2, &mut rng);
            let b = random_state(4, &mut rng);
            DensityMatrix::new(a.kron(&b).unwrap().into_matrix()).unwrap();
        }
    }

    #[test]
    fn qubit_bloch_round_trip() {
        let r = Vector3::new(0.3, -0.2, 0.5);
        let rho = DensityMatrix::from_bloch(&r).unwrap();
        assert!((rho.bloch_vector().unwrap() - r).norm() < 1e-15);
        assert!(DensityMatrix::from_bloch(&Vector3::new(1.0, 1.0, 0.0)).is_err());
    }
}
