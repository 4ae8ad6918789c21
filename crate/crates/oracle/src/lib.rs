//! Reference computations written independently of `naqc-core`'s search
//! and basis code: a dense grid over Alice's frame and the coherence frame
//! followed by zoomed local grids, and qubit coherences in hand-built bases.
//! Only the `Complex` type and input matrices are shared.

use nalgebra::{DMatrix, Matrix3, Vector2, Vector3};
use naqc_core::qlin::{Complex, DensityMatrix};

const TAU: f64 = std::f64::consts::TAU;
const PI: f64 = std::f64::consts::PI;

const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];

fn paulis() -> [DMatrix<Complex>; 4] {
    let o = Complex::new(0.0, 0.0);
    let l = Complex::new(1.0, 0.0);
    let i = Complex::new(0.0, 1.0);
    [
        DMatrix::from_row_slice(2, 2, &[l, o, o, l]),
        DMatrix::from_row_slice(2, 2, &[o, l, l, o]),
        DMatrix::from_row_slice(2, 2, &[o, -i, i, o]),
        DMatrix::from_row_slice(2, 2, &[l, o, o, -l]),
    ]
}

/// `(r_B, T)` with `r_B_j = Tr ρ (1 ⊗ σ_j)` and `T_ij = Tr ρ (σ_i ⊗ σ_j)`.
pub fn bloch_data(rho: &DMatrix<Complex>) -> (Vector3<f64>, Matrix3<f64>) {
    let s = paulis();
    let ev = |a: usize, b: usize| (rho * s[a].kronecker(&s[b])).trace().re;
    let rb = Vector3::new(ev(0, 1), ev(0, 2), ev(0, 3));
    let t = Matrix3::from_fn(|i, j| ev(i + 1, j + 1));
    (rb, t)
}

/// Rotation `Rz(a) Ry(b) Rx(c)`; its columns form the frame.
fn tait_bryan(a: f64, b: f64, c: f64) -> Matrix3<f64> {
    let (sa, ca) = a.sin_cos();
    let (sb, cb) = b.sin_cos();
    let (sc, cc) = c.sin_cos();
    let rz = Matrix3::new(ca, -sa, 0.0, sa, ca, 0.0, 0.0, 0.0, 1.0);
    let ry = Matrix3::new(cb, 0.0, sb, 0.0, 1.0, 0.0, -sb, 0.0, cb);
    let rx = Matrix3::new(1.0, 0.0, 0.0, 0.0, cc, -sc, 0.0, sc, cc);
    rz * ry * rx
}

/// Standard objective at six angles, best over pairings.
fn objective(rb: &Vector3<f64>, t: &Matrix3<f64>, x: &[f64; 6]) -> f64 {
    let alice = tait_bryan(x[0], x[1], x[2]);
    let coh = tait_bryan(x[3], x[4], x[5]);
    let mut w = [[0.0; 3]; 3];
    for i in 0..3 {
        let steer = t.transpose() * alice.column(i);
        for (j, row) in w[i].iter_mut().enumerate() {
            let m = coh.column(j).into_owned();
            *row = 0.5 * ((rb + steer).cross(&m).norm() + (rb - steer).cross(&m).norm());
        }
    }
    PERMS
        .iter()
        .map(|p| w[0][p[0]] + w[1][p[1]] + w[2][p[2]])
        .fold(0.0, f64::max)
}

/// Maximum of the standard functional by a `points⁶` grid over
/// `[0,2π)×[-π/2,π/2]×[0,2π)` for each frame, then `rounds` of 5⁶ local
/// grids around the best `keep` grid points with the span halved each round.
pub fn grid_standard(rho: &DMatrix<Complex>, points: usize, keep: usize, rounds: usize) -> f64 {
    let (rb, t) = bloch_data(rho);
    let lo = [0.0, -PI / 2.0, 0.0, 0.0, -PI / 2.0, 0.0];
    let span = [TAU, PI, TAU, TAU, PI, TAU];
    let coord = |d: usize, k: usize| lo[d] + span[d] * (k as f64 + 0.5) / points as f64;

    let mut best: Vec<(f64, [f64; 6])> = Vec::new();
    let total = points.pow(6);
    for n in 0..total {
        let mut idx = n;
        let mut x = [0.0; 6];
        for (d, xd) in x.iter_mut().enumerate() {
            *xd = coord(d, idx % points);
            idx /= points;
        }
        let v = objective(&rb, &t, &x);
        if best.len() < keep || v > best[best.len() - 1].0 {
            best.push((v, x));
            best.sort_by(|a, b| b.0.total_cmp(&a.0));
            best.truncate(keep);
        }
    }

    let mut overall: f64 = best[0].0;
    for (mut v, mut x) in best {
        let mut h: Vec<f64> = span.iter().map(|s| s / points as f64).collect();
        for _ in 0..rounds {
            let centre = x;
            for n in 0..5usize.pow(6) {
                let mut idx = n;
                let mut y = centre;
                for (d, yd) in y.iter_mut().enumerate() {
                    *yd += h[d] * ((idx % 5) as f64 - 2.0) / 2.0;
                    idx /= 5;
                }
                let vy = objective(&rb, &t, &y);
                if vy > v {
                    v = vy;
                    x = y;
                }
            }
            h.iter_mut().for_each(|s| *s *= 0.5);
        }
        overall = overall.max(v);
    }
    overall
}

/// l1 coherences `2|⟨b₀|ρ|b₁⟩|` in the three bases built from the axis
/// kets `u = (cos θ/2, e^{iφ} sin θ/2)`, `w = (sin θ/2, -e^{iφ} cos θ/2)`:
/// `{u, w}`, `{(u ± w)/√2}` and `{(u ± i w)/√2}`.
pub fn explicit_coherences(rho: &DensityMatrix, theta: f64, phi: f64) -> [f64; 3] {
    let m = rho.matrix();
    let e = Complex::from_polar(1.0, phi);
    let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    let u = Vector2::new(Complex::new(c, 0.0), e * s);
    let w = Vector2::new(Complex::new(s, 0.0), -e * c);
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let i = Complex::new(0.0, 1.0);
    let pairs = [
        (u, w),
        ((u + w) * Complex::from(h), (u - w) * Complex::from(h)),
        ((u + w * i) * Complex::from(h), (u - w * i) * Complex::from(h)),
    ];
    pairs.map(|(a, b)| {
        let mut off = Complex::new(0.0, 0.0);
        for r in 0..2 {
            for q in 0..2 {
                off += a[r].conj() * m[(r, q)] * b[q];
            }
        }
        2.0 * off.norm()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use naqc_core::states::{phi_plus, werner};

    #[test]
    fn coarse_grid_on_known_states() {
        let bell = grid_standard(phi_plus().density().matrix(), 4, 4, 16);
        assert!((bell - 3.0).abs() < 1e-3, "{bell}");
        let w = grid_standard(werner(0.5).unwrap().matrix(), 4, 4, 16);
        assert!((w - 1.5).abs() < 1e-3, "{w}");
    }

    #[test]
    fn hand_built_bases_on_basis_state() {
        let zero = DensityMatrix::from_bloch(&Vector3::z()).unwrap();
        let c = explicit_coherences(&zero, 0.0, 0.0);
        assert!(c[0].abs() < 1e-15 && (c[1] - 1.0).abs() < 1e-15 && (c[2] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn bloch_data_of_bell_state() {
        let (rb, t) = bloch_data(phi_plus().density().matrix());
        assert!(rb.norm() < 1e-15);
        assert!((t - Matrix3::from_diagonal(&Vector3::new(1.0, -1.0, 1.0))).amax() < 1e-15);
    }
}
