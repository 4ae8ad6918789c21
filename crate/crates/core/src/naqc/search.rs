//! Multi-start Nelder–Mead search behind the NAQC functionals.
//!
//! Parameter layouts:
//!
//! * standard: `[α, β, γ, θ, φ, (χ)]`, zyz Euler angles of Alice's frame
//!   followed by the coherence triad;
//! * generalized: `[θ₁, φ₁, θ₂, φ₂, θ₃, φ₃, θ, φ, (χ)]`, three free Alice axes
//!   followed by the coherence triad.
//!
//! Every start runs a polished simplex search on the maximum over pairings.
//! Deterministic seeds come first (coordinate and singular-vector frames,
//! and a coherence frame balanced around the local Bloch vector so the search
//! starts at or above the lower bound), then a shifted Halton sequence.

use std::f64::consts::PI;

use nalgebra::{Matrix3, Vector3};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{
    best_pairing, contribution_table, exhibits_naqc, Diagnostics, Direction, Functional,
    NaqcOptions, NaqcResult, Pairing,
};
use crate::coherence::{balanced_frame, spherical, triad_axes, BasisTriad, MeasurementAxis, MubFamily};
use crate::optim::{self, NelderMeadOptions, StartSequence};
use crate::qlin::CorrDecomp;

const AGREE_TOL: f64 = 1e-5;
const POLISH_RESTARTS: usize = 3;
const INITIAL_STEP: f64 = 0.4;
const TRIVIAL_TOL: f64 = 1e-14;

/// Columns of `Rz(α) Ry(β) Rz(γ)`.
pub fn frame_from_euler(alpha: f64, beta: f64, gamma: f64) -> [Vector3<f64>; 3] {
    let (sa, ca) = alpha.sin_cos();
    let (sb, cb) = beta.sin_cos();
    let (sg, cg) = gamma.sin_cos();
    [
        Vector3::new(ca * cb * cg - sa * sg, sa * cb * cg + ca * sg, -sb * cg),
        Vector3::new(-ca * cb * sg - sa * cg, -sa * cb * sg + ca * cg, sb * sg),
        Vector3::new(ca * sb, sa * sb, cb),
    ]
}

/// zyz Euler angles of an orthonormal frame. A left-handed frame has its
/// last axis flipped first, which leaves every coherence unchanged.
pub fn frame_to_euler(frame: &[Vector3<f64>; 3]) -> [f64; 3] {
    let mut f = *frame;
    if f[0].cross(&f[1]).dot(&f[2]) < 0.0 {
        f[2] = -f[2];
    }
    let r = |i: usize, j: usize| f[j][i];
    let beta = r(2, 2).clamp(-1.0, 1.0).acos();
    if beta.sin() > 1e-12 {
        [r(1, 2).atan2(r(0, 2)), beta, r(2, 1).atan2(-r(2, 0))]
    } else {
        [(-r(0, 1)).atan2(r(1, 1)), beta, 0.0]
    }
}

struct Problem {
    r_b: Vector3<f64>,
    t_tr: Matrix3<f64>,
    family: MubFamily,
    opts: NaqcOptions,
}

impl Problem {
    fn new(corr: &CorrDecomp, opts: &NaqcOptions) -> Self {
        Self {
            r_b: corr.r_b,
            t_tr: corr.t.transpose(),
            family: opts.mub_family,
            opts: *opts,
        }
    }

    fn triad_frame(&self, p: &[f64]) -> [Vector3<f64>; 3] {
        match self.family {
            MubFamily::Paper => triad_axes(p[0], p[1], 0.0),
            MubFamily::Full => triad_axes(p[0], p[1], p[2]),
        }
    }

    fn standard(&self, x: &[f64]) -> (f64, Pairing) {
        let alice = frame_from_euler(x[0], x[1], x[2]);
        let coherence = self.triad_frame(&x[3..]);
        let w = contribution_table(&self.r_b, &self.t_tr, &alice, &coherence);
        best_pairing(&w, self.opts.pairing)
    }

    fn generalized(&self, x: &[f64]) -> (f64, Pairing) {
        let alice = [
            spherical(x[0], x[1]),
            spherical(x[2], x[3]),
            spherical(x[4], x[5]),
        ];
        let coherence = self.triad_frame(&x[6..]);
        let w = contribution_table(&self.r_b, &self.t_tr, &alice, &coherence);
        best_pairing(&w, self.opts.pairing)
    }

    fn triad_ranges(&self) -> Vec<(f64, f64)> {
        let mut r = vec![(0.0, PI), (0.0, 2.0 * PI)];
        if self.family == MubFamily::Full {
            r.push((0.0, 2.0 * PI));
        }
        r
    }

    fn triad_params(&self, frame: &[Vector3<f64>; 3]) -> Vec<f64> {
        let mut p = BasisTriad::from_frame(frame).params();
        p.truncate(self.family.num_params());
        p
    }

    fn nm_options(&self) -> NelderMeadOptions {
        NelderMeadOptions {
            tol: self.opts.tol,
            max_iters: self.opts.max_iters,
            initial_step: INITIAL_STEP,
        }
    }
}

/// Deterministic `(Alice frame, coherence frame)` pairs.
fn seed_frames(corr: &CorrDecomp) -> Vec<([Vector3<f64>; 3], [Vector3<f64>; 3])> {
    let identity = [Vector3::x(), Vector3::y(), Vector3::z()];
    let cyclic = [Vector3::y(), Vector3::z(), Vector3::x()];
    let (left, right) = singular_frames(&corr.t);
    let balanced = balanced_frame(&corr.r_b);
    vec![
        (identity, cyclic),
        (left, [right[1], right[2], right[0]]),
        (left, balanced),
        (identity, balanced),
    ]
}

/// Left and right singular vectors of `T`, so `Tᵀ u_i = s_i v_i`, with
/// singular values in decreasing order.
fn singular_frames(t: &Matrix3<f64>) -> ([Vector3<f64>; 3], [Vector3<f64>; 3]) {
    let svd = t.svd(true, true);
    let u = svd.u.expect("requested U");
    let v = svd.v_t.expect("requested Vᵀ").transpose();
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let left = order.map(|k| u.column(k).into_owned());
    let right = order.map(|k| v.column(k).into_owned());
    (left, right)
}

struct SearchOutcome {
    x: Vec<f64>,
    value: f64,
    pairing: Pairing,
    agreeing: usize,
    diagnostics: Diagnostics,
}

fn run_starts<F>(eval: F, starts: &[Vec<f64>], nm: &NelderMeadOptions) -> SearchOutcome
where
    F: Fn(&[f64]) -> (f64, Pairing),
{
    let mut diagnostics = Diagnostics::default();
    let mut outcomes = Vec::with_capacity(starts.len());
    for start in starts {
        let out = optim::polish(|x| -eval(x).0, start, nm, POLISH_RESTARTS);
        diagnostics.starts += 1;
        diagnostics.iterations += out.iterations;
        diagnostics.evaluations += out.evaluations;
        if out.converged {
            diagnostics.converged_starts += 1;
        }
        outcomes.push(out);
    }
    let best = outcomes
        .iter()
        .min_by(|a, b| a.value.total_cmp(&b.value))
        .expect("at least one start");
    let value = -best.value;
    let agreeing = outcomes
        .iter()
        .filter(|o| -o.value >= value - AGREE_TOL)
        .count();
    let (_, pairing) = eval(&best.x);
    SearchOutcome {
        x: best.x.clone(),
        value,
        pairing,
        agreeing,
        diagnostics,
    }
}

fn rng_for(opts: &NaqcOptions, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    rng.set_stream(stream);
    rng
}

fn reported_triad(family: MubFamily, p: &[f64]) -> BasisTriad {
    match family {
        MubFamily::Full => {
            let triad = BasisTriad::from_params(family, p);
            BasisTriad::from_frame(&triad.axes())
        }
        MubFamily::Paper => BasisTriad::paper(p[0].rem_euclid(2.0 * PI), p[1].rem_euclid(2.0 * PI)),
    }
}

fn trivial_result(functional: Functional, direction: Direction, opts: &NaqcOptions) -> NaqcResult {
    NaqcResult {
        value: 0.0,
        alice_axes: [MeasurementAxis::x(), MeasurementAxis::y(), MeasurementAxis::z()],
        coherence_triad: BasisTriad::from_params(opts.mub_family, &[0.0, 0.0, 0.0]),
        pairing: Pairing::IDENTITY,
        exhibits: false,
        restarts_agreeing: 0,
        functional,
        direction,
        diagnostics: Diagnostics {
            short_circuit: true,
            ..Diagnostics::default()
        },
    }
}

fn is_trivial(corr: &CorrDecomp) -> bool {
    corr.r_b.norm() <= TRIVIAL_TOL && corr.t.abs().max() <= TRIVIAL_TOL
}

fn finish(
    functional: Functional,
    direction: Direction,
    opts: &NaqcOptions,
    out: SearchOutcome,
    alice: [Vector3<f64>; 3],
    triad_params: &[f64],
) -> NaqcResult {
    let value = out.value.clamp(0.0, 3.0);
    NaqcResult {
        value,
        alice_axes: alice.map(|a| MeasurementAxis::from_vector(&a)),
        coherence_triad: reported_triad(opts.mub_family, triad_params),
        pairing: out.pairing,
        exhibits: exhibits_naqc(value, opts.tol),
        restarts_agreeing: out.agreeing,
        functional,
        direction,
        diagnostics: out.diagnostics,
    }
}

pub(super) fn standard(corr: &CorrDecomp, direction: Direction, opts: &NaqcOptions) -> NaqcResult {
    if is_trivial(corr) {
        return trivial_result(Functional::Standard, direction, opts);
    }
    let problem = Problem::new(corr, opts);
    let mut starts: Vec<Vec<f64>> = seed_frames(corr)
        .iter()
        .map(|(alice, coherence)| {
            let mut x = frame_to_euler(alice).to_vec();
            x.extend(problem.triad_params(coherence));
            x
        })
        .collect();
    let mut ranges = vec![(0.0, 2.0 * PI), (0.0, PI), (0.0, 2.0 * PI)];
    ranges.extend(problem.triad_ranges());
    let seq = StartSequence::new(ranges, &mut rng_for(opts, 0));
    starts.extend((0..opts.restarts).map(|k| seq.point(k)));

    let out = run_starts(|x| problem.standard(x), &starts, &problem.nm_options());
    let alice = frame_from_euler(out.x[0], out.x[1], out.x[2]);
    let triad = out.x[3..].to_vec();
    finish(Functional::Standard, direction, opts, out, alice, &triad)
}

fn axis_angles(v: &Vector3<f64>) -> [f64; 2] {
    let a = MeasurementAxis::from_vector(v);
    [a.theta, a.phi]
}

pub(super) fn generalized(corr: &CorrDecomp, direction: Direction, opts: &NaqcOptions) -> NaqcResult {
    if is_trivial(corr) {
        return trivial_result(Functional::Generalized, direction, opts);
    }
    let problem = Problem::new(corr, opts);
    let std_best = standard(corr, direction, opts);

    let from_frames = |alice: &[Vector3<f64>; 3], coherence_params: Vec<f64>| {
        let mut x: Vec<f64> = alice.iter().flat_map(axis_angles).collect();
        x.extend(coherence_params);
        x
    };

    let mut starts = Vec::new();
    let std_alice = std_best.alice_axes.map(|a| a.unit_vector());
    let mut std_triad = std_best.coherence_triad.params();
    std_triad.truncate(opts.mub_family.num_params());
    starts.push(from_frames(&std_alice, std_triad));

    // all three measurements along the dominant steering direction
    let (left, right) = singular_frames(&corr.t);
    let aligned = [left[0]; 3];
    starts.push(from_frames(
        &aligned,
        problem.triad_params(&balanced_frame(&(corr.r_b + right[0]))),
    ));
    for (alice, coherence) in seed_frames(corr) {
        starts.push(from_frames(&alice, problem.triad_params(&coherence)));
    }

    let mut ranges = Vec::new();
    for _ in 0..3 {
        ranges.push((0.0, PI));
        ranges.push((0.0, 2.0 * PI));
    }
    ranges.extend(problem.triad_ranges());
    let seq = StartSequence::new(ranges, &mut rng_for(opts, 1));
    starts.extend((0..opts.restarts).map(|k| seq.point(k)));

    let out = run_starts(|x| problem.generalized(x), &starts, &problem.nm_options());
    let alice = [
        spherical(out.x[0], out.x[1]),
        spherical(out.x[2], out.x[3]),
        spherical(out.x[4], out.x[5]),
    ];
    let mut diagnostics = out.diagnostics;
    diagnostics.starts += std_best.diagnostics.starts;
    diagnostics.converged_starts += std_best.diagnostics.converged_starts;
    diagnostics.iterations += std_best.diagnostics.iterations;
    diagnostics.evaluations += std_best.diagnostics.evaluations;
    let triad = out.x[6..].to_vec();
    finish(
        Functional::Generalized,
        direction,
        opts,
        SearchOutcome { diagnostics, ..out },
        alice,
        &triad,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn euler_round_trip() {
        for (a, b, g) in [(0.3, 1.1, -2.0), (2.0, 0.0, 0.0), (1.0, PI, 0.0), (5.0, 2.9, 4.0)] {
            let f = frame_from_euler(a, b, g);
            let back = frame_from_euler(
                frame_to_euler(&f)[0],
                frame_to_euler(&f)[1],
                frame_to_euler(&f)[2],
            );
            for (u, v) in f.iter().zip(&back) {
                assert!((u - v).norm() < 1e-12, "{u:?} vs {v:?}");
            }
        }
    }

    #[test]
    fn left_handed_frame_maps_to_same_axes() {
        let f = [Vector3::y(), Vector3::x(), Vector3::z()];
        let e = frame_to_euler(&f);
        let back = frame_from_euler(e[0], e[1], e[2]);
        for (u, v) in f.iter().zip(&back) {
            assert!((u.dot(v).abs() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn euler_frames_are_orthonormal() {
        let f = frame_from_euler(0.7, 2.2, 4.1);
        for i in 0..3 {
            for j in 0..3 {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((f[i].dot(&f[j]) - e).abs() < 1e-14);
            }
        }
        assert!((f[0].cross(&f[1]) - f[2]).norm() < 1e-14);
    }

    #[test]
    fn singular_frames_diagonalise() {
        let t = Matrix3::new(0.2, -0.5, 0.1, 0.4, 0.3, -0.2, 0.0, 0.1, 0.6);
        let (u, v) = singular_frames(&t);
        let s: Vec<f64> = (0..3).map(|i| (t.transpose() * u[i]).norm()).collect();
        for i in 0..3 {
            assert!(((t.transpose() * u[i]) - v[i] * s[i]).norm() < 1e-12);
        }
        assert!(s[0] >= s[1] && s[1] >= s[2]);
    }
}
