//! Experiment drivers: parameter sweeps, threshold bisection, tripartite
//! monogamy scans and property verification suites, plus table emission.
//!
//! Every work item draws its randomness from `substream(seed, index)`, and
//! results are collected in input order, so the worker count never changes
//! the output.

use std::f64::consts::PI;
use std::io::Write;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coherence::{
    appendix_a_coherences, coherence_sum, l1_coherence, BasisTriad, MeasurementAxis,
};
use crate::error::{Error, Result};
use crate::naqc::{
    monogamy_sum, naqc, naqc_lower_bound, objective, objective_matrix_path,
    Direction, Functional, MonogamyMode, NaqcOptions, NaqcResult, Pairing,
};
use crate::qlin::{apply_local_unitary, haar_unitary2, to_corr, DensityMatrix, PureState};
use crate::statefile::StateFile;
use crate::states::{self, bell_mixture, phi_plus, substream, werner};
use crate::COMPLEMENTARITY_BOUND;

/// Slack allowed between optimised functional values in the ordering,
/// local-unitary and separable-bound suites.
pub const OPTIMIZER_SLACK: f64 = 5e-4;
/// Bisection stops once the bracket is this narrow.
pub const THRESHOLD_RESOLUTION: f64 = 1e-4;
/// Scan sums above `2√6` plus this margin count as violations.
pub const SCAN_MARGIN: f64 = 1e-3;
const MAX_COUNTEREXAMPLES: usize = 10;

fn pool(jobs: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::InvalidSpec(format!("worker pool: {e}")))
}

/// Maps `f` over `0..n` on `jobs` workers (0 = one per core), in index order.
fn par_map<T, F>(n: usize, jobs: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    pool(jobs)?.install(|| (0..n).into_par_iter().map(&f).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepFamily {
    BellMixture,
    Werner,
}

impl SweepFamily {
    pub fn state(self, p: f64) -> Result<DensityMatrix> {
        match self {
            SweepFamily::BellMixture => bell_mixture(p),
            SweepFamily::Werner => werner(p),
        }
    }

    /// Bracket on which the verdict changes exactly once.
    pub fn default_bracket(self) -> (f64, f64) {
        match self {
            SweepFamily::BellMixture => (0.0, 0.5),
            SweepFamily::Werner => (0.0, 1.0),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SweepFamily::BellMixture => "bell-mixture",
            SweepFamily::Werner => "werner",
        }
    }
}

impl std::fmt::Display for SweepFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for SweepFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bell-mixture" => Ok(SweepFamily::BellMixture),
            "werner" => Ok(SweepFamily::Werner),
            other => Err(Error::InvalidSpec(format!("unknown family {other:?}"))),
        }
    }
}

/// Parses `start:stop:step` into an inclusive grid.
pub fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let bad = || Error::InvalidSpec(format!("grid must be start:stop:step, got {text:?}"));
    let parts: Vec<f64> = text
        .split(':')
        .map(|s| s.trim().parse::<f64>().map_err(|_| bad()))
        .collect::<Result<_>>()?;
    let [start, stop, step] = parts[..] else {
        return Err(bad());
    };
    if !(step > 0.0) || !(stop >= start) || !start.is_finite() || !stop.is_finite() {
        return Err(bad());
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    // Rounding to 12 decimals strips the accumulated `k * step` error.
    let point = |k: usize| ((start + k as f64 * step) * 1e12).round() / 1e12;
    Ok((0..=n).map(point).map(|p| p.min(stop)).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub family: SweepFamily,
    pub p_grid: Vec<f64>,
    pub functionals: Vec<Functional>,
    pub opts: NaqcOptions,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        self.opts.validate()?;
        if self.p_grid.is_empty() || self.functionals.is_empty() {
            return Err(Error::InvalidSpec("empty grid or functional list".into()));
        }
        for &p in &self.p_grid {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::OutOfRange {
                    name: "p",
                    value: p,
                    range: "[0, 1]",
                });
            }
        }
        if self.p_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidSpec("grid must be strictly increasing".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub family: SweepFamily,
    pub p: f64,
    pub functional: Functional,
    pub value: f64,
    pub exhibits: bool,
    pub lower_bound: f64,
    pub restarts_agreeing: usize,
    pub starts: usize,
    pub converged_starts: usize,
    pub evaluations: usize,
}

/// One record per grid point and functional, grid-major.
pub fn run_sweep(spec: &SweepSpec, jobs: usize) -> Result<Vec<SweepRecord>> {
    spec.validate()?;
    let nf = spec.functionals.len();
    par_map(spec.p_grid.len() * nf, jobs, |k| {
        let p = spec.p_grid[k / nf];
        let functional = spec.functionals[k % nf];
        let rho = spec.family.state(p)?;
        let r = naqc(&rho, functional, Direction::AToB, &spec.opts)?;
        Ok(SweepRecord {
            family: spec.family,
            p,
            functional,
            value: r.value,
            exhibits: r.exhibits,
            lower_bound: naqc_lower_bound(&rho, Direction::AToB)?,
            restarts_agreeing: r.restarts_agreeing,
            starts: r.diagnostics.starts,
            converged_starts: r.diagnostics.converged_starts,
            evaluations: r.diagnostics.evaluations,
        })
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdRecord {
    pub family: SweepFamily,
    pub functional: Functional,
    pub p_star: f64,
    pub lo: f64,
    pub hi: f64,
    pub steps: usize,
    /// Value of the functional at `p_star`.
    pub value: f64,
}

/// Bisects the NAQC verdict on `[lo, hi]` until the bracket is narrower than
/// [`THRESHOLD_RESOLUTION`].
pub fn find_threshold(
    family: SweepFamily,
    functional: Functional,
    opts: &NaqcOptions,
    bracket: Option<(f64, f64)>,
) -> Result<ThresholdRecord> {
    opts.validate()?;
    let (mut lo, mut hi) = bracket.unwrap_or_else(|| family.default_bracket());
    if !(0.0..=1.0).contains(&lo) || !(0.0..=1.0).contains(&hi) || lo >= hi {
        return Err(Error::InvalidSpec(format!("bad bracket [{lo}, {hi}]")));
    }
    let verdict = |p: f64| -> Result<bool> {
        Ok(naqc(&family.state(p)?, functional, Direction::AToB, opts)?.exhibits)
    };
    let at_lo = verdict(lo)?;
    if at_lo == verdict(hi)? {
        return Err(Error::NoSignChange { lo, hi });
    }
    let mut steps = 0;
    while hi - lo > THRESHOLD_RESOLUTION {
        let mid = 0.5 * (lo + hi);
        if verdict(mid)? == at_lo {
            lo = mid;
        } else {
            hi = mid;
        }
        steps += 1;
    }
    let p_star = 0.5 * (lo + hi);
    let value = naqc(&family.state(p_star)?, functional, Direction::AToB, opts)?.value;
    Ok(ThresholdRecord {
        family,
        functional,
        p_star,
        lo,
        hi,
        steps,
        value,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScanClass {
    GhzClass,
    WClass,
}

impl ScanClass {
    fn index(self) -> u64 {
        match self {
            ScanClass::GhzClass => 0,
            ScanClass::WClass => 1,
        }
    }

    pub fn sample<R: Rng + ?Sized>(self, rng: &mut R) -> Result<PureState> {
        match self {
            ScanClass::GhzClass => states::ghz_class(rng),
            ScanClass::WClass => states::w_class(rng),
        }
    }
}

impl std::fmt::Display for ScanClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ScanClass::GhzClass => "ghz-class",
            ScanClass::WClass => "w-class",
        })
    }
}

impl std::str::FromStr for ScanClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ghz-class" | "ghz" => Ok(ScanClass::GhzClass),
            "w-class" | "w" => Ok(ScanClass::WClass),
            other => Err(Error::InvalidSpec(format!("unknown class {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanSpec {
    pub mode: MonogamyMode,
    pub classes: Vec<ScanClass>,
    /// Samples per class.
    pub n_samples: usize,
    pub functional: Functional,
    pub opts: NaqcOptions,
    pub seed: u64,
}

impl ScanSpec {
    pub fn validate(&self) -> Result<()> {
        self.opts.validate()?;
        if self.n_samples < 1 || self.classes.is_empty() {
            return Err(Error::InvalidSpec("scan needs at least one class and sample".into()));
        }
        Ok(())
    }
}

/// Random stream of sample `index` within `class`.
pub fn scan_stream(class: ScanClass, index: usize) -> u64 {
    (class.index() << 32) | index as u64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRecord {
    pub class: ScanClass,
    pub index: usize,
    pub seed: u64,
    pub stream: u64,
    pub three_tangle: f64,
    pub n_ab: f64,
    pub n_ac: f64,
    pub sum: f64,
    pub violation: bool,
    /// Empty unless the sample could not be evaluated.
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanSummary {
    pub mode: MonogamyMode,
    pub functional: Functional,
    pub samples: usize,
    pub failures: usize,
    pub max_sum: f64,
    pub max_sum_class: Option<ScanClass>,
    pub bound: f64,
    pub margin: f64,
    pub violations: usize,
}

pub fn run_monogamy_scan(spec: &ScanSpec, jobs: usize) -> Result<(Vec<ScanRecord>, ScanSummary)> {
    spec.validate()?;
    let n = spec.n_samples;
    let bound = 2.0 * COMPLEMENTARITY_BOUND;
    let records = par_map(n * spec.classes.len(), jobs, |k| {
        let class = spec.classes[k / n];
        let index = k % n;
        let stream = scan_stream(class, index);
        let attempt = || -> Result<(f64, crate::naqc::MonogamyRecord)> {
            let psi = class.sample(&mut substream(spec.seed, stream))?;
            let tangle = states::three_tangle(&psi)?;
            Ok((tangle, monogamy_sum(&psi, spec.mode, spec.functional, &spec.opts)?))
        };
        let base = ScanRecord {
            class,
            index,
            seed: spec.seed,
            stream,
            three_tangle: 0.0,
            n_ab: 0.0,
            n_ac: 0.0,
            sum: 0.0,
            violation: false,
            error: String::new(),
        };
        Ok(match attempt() {
            Ok((three_tangle, m)) => ScanRecord {
                three_tangle,
                n_ab: m.n_ab,
                n_ac: m.n_ac,
                sum: m.sum,
                violation: m.sum > bound + SCAN_MARGIN,
                ..base
            },
            Err(e) => ScanRecord {
                error: e.to_string(),
                ..base
            },
        })
    })?;
    let ok = records.iter().filter(|r| r.error.is_empty());
    let best = ok
        .clone()
        .max_by(|a, b| a.sum.total_cmp(&b.sum));
    let summary = ScanSummary {
        mode: spec.mode,
        functional: spec.functional,
        samples: records.len(),
        failures: records.iter().filter(|r| !r.error.is_empty()).count(),
        max_sum: best.map_or(0.0, |r| r.sum),
        max_sum_class: best.map(|r| r.class),
        bound,
        margin: SCAN_MARGIN,
        violations: ok.filter(|r| r.violation).count(),
    };
    Ok((records, summary))
}

/// Fixed-measurement sums of `|φ⁺⟩_AB ⊗ |0⟩_C`.
pub fn biseparable_probe(functional: Functional, opts: &NaqcOptions) -> Result<crate::naqc::MonogamyRecord> {
    let psi = phi_plus().kron(&PureState::basis(2, 0)?)?;
    monogamy_sum(&psi, MonogamyMode::FixedMeasurement, functional, opts)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Ordering,
    LuInvariance,
    SeparableBound,
    Lemma1,
    AppendixA,
    BlochPath,
    Complementarity,
}

impl Suite {
    pub const ALL: [Suite; 7] = [
        Suite::Ordering,
        Suite::LuInvariance,
        Suite::SeparableBound,
        Suite::Lemma1,
        Suite::AppendixA,
        Suite::BlochPath,
        Suite::Complementarity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Ordering => "ordering",
            Suite::LuInvariance => "lu-invariance",
            Suite::SeparableBound => "separable-bound",
            Suite::Lemma1 => "lemma1",
            Suite::AppendixA => "appendix-a",
            Suite::BlochPath => "bloch-path",
            Suite::Complementarity => "complementarity",
        }
    }

    pub fn default_trials(self) -> usize {
        match self {
            Suite::Ordering => 500,
            Suite::LuInvariance => 100,
            Suite::SeparableBound => 500,
            Suite::Lemma1 | Suite::AppendixA | Suite::BlochPath => 1000,
            Suite::Complementarity => 10_000,
        }
    }

    /// Allowed excess for the suite's inequality or discrepancy.
    pub fn tolerance(self, opts: &NaqcOptions) -> f64 {
        match self {
            Suite::Ordering | Suite::LuInvariance | Suite::SeparableBound => OPTIMIZER_SLACK,
            Suite::Lemma1 => opts.tol,
            Suite::AppendixA | Suite::Complementarity => 1e-12,
            Suite::BlochPath => 1e-10,
        }
    }

    fn stream(self) -> u64 {
        Suite::ALL.iter().position(|&s| s == self).unwrap_or(0) as u64
    }
}

impl std::fmt::Display for Suite {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|suite| suite.name() == s)
            .ok_or_else(|| Error::InvalidSpec(format!("unknown suite {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Counterexample {
    pub trial: usize,
    pub excess: f64,
    pub detail: String,
    pub state: StateFile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub trials: usize,
    pub tolerance: f64,
    pub violations: usize,
    /// Largest excess over the tolerated quantity, across all trials.
    pub max_excess: f64,
    pub passed: bool,
    pub counterexamples: Vec<Counterexample>,
}

/// Outcome of one trial: the amount by which the property is exceeded (a
/// violation when above the tolerance), with context for the dump.
struct Trial {
    excess: f64,
    detail: String,
    state: DensityMatrix,
}

fn random_axis<R: Rng + ?Sized>(rng: &mut R) -> MeasurementAxis {
    MeasurementAxis::new(rng.random_range(0.0..PI), rng.random_range(0.0..2.0 * PI))
}

fn random_triad<R: Rng + ?Sized>(rng: &mut R) -> BasisTriad {
    BasisTriad::full(
        rng.random_range(0.0..PI),
        rng.random_range(0.0..2.0 * PI),
        rng.random_range(0.0..2.0 * PI),
    )
}

fn value(rho: &DensityMatrix, f: Functional, opts: &NaqcOptions) -> Result<NaqcResult> {
    naqc(rho, f, Direction::AToB, opts)
}

fn run_trial(suite: Suite, seed: u64, index: usize, opts: &NaqcOptions) -> Result<Trial> {
    let mut rng = substream(seed ^ (suite.stream() << 56), index as u64);
    let rng = &mut rng;
    Ok(match suite {
        Suite::Ordering => {
            let rho = states::random_mixed(4, rng)?;
            let lower = naqc_lower_bound(&rho, Direction::AToB)?;
            let std = value(&rho, Functional::Standard, opts)?.value;
            let gen = value(&rho, Functional::Generalized, opts)?.value;
            let excess = (lower - std).max(std - gen).max(gen - 3.0);
            Trial {
                excess,
                detail: format!("lower={lower} standard={std} generalized={gen}"),
                state: rho,
            }
        }
        Suite::LuInvariance => {
            let rho = states::random_mixed(4, rng)?;
            let (u, v) = (haar_unitary2(rng), haar_unitary2(rng));
            let moved = apply_local_unitary(&rho, &u, &v)?;
            let mut excess: f64 = 0.0;
            let mut detail = String::new();
            for f in [Functional::Standard, Functional::Generalized] {
                let a = value(&rho, f, opts)?.value;
                let b = value(&moved, f, opts)?.value;
                excess = excess.max((a - b).abs());
                detail.push_str(&format!("{f}: {a} vs {b}; "));
            }
            Trial {
                excess,
                detail: format!("{detail}u={u:?} v={v:?}"),
                state: rho,
            }
        }
        Suite::SeparableBound => {
            let rho = states::separable(rng)?;
            let gen = value(&rho, Functional::Generalized, opts)?.value;
            Trial {
                excess: gen - COMPLEMENTARITY_BOUND,
                detail: format!("generalized={gen}"),
                state: rho,
            }
        }
        Suite::Lemma1 => {
            let rho = states::random_mixed(4, rng)?;
            let lower = naqc_lower_bound(&rho, Direction::AToB)?;
            let std = value(&rho, Functional::Standard, opts)?.value;
            Trial {
                excess: lower - std,
                detail: format!("lower={lower} standard={std}"),
                state: rho,
            }
        }
        Suite::AppendixA => {
            let rho = states::random_mixed(2, rng)?;
            let (theta, phi) = (rng.random_range(0.0..PI), rng.random_range(0.0..2.0 * PI));
            let closed = appendix_a_coherences(&rho, theta, phi)?.as_array();
            let bases = BasisTriad::paper(theta, phi).bases();
            let mut excess: f64 = 0.0;
            for (c, b) in closed.iter().zip(&bases) {
                excess = excess.max((c - l1_coherence(&rho, b)?).abs());
            }
            Trial {
                excess,
                detail: format!("theta={theta} phi={phi} closed={closed:?}"),
                state: rho,
            }
        }
        Suite::BlochPath => {
            let rho = states::random_mixed(4, rng)?;
            let axes = [random_axis(rng), random_axis(rng), random_axis(rng)];
            let triad = random_triad(rng);
            let pairing = Pairing::ALL[rng.random_range(0..6)];
            let fast = objective(&to_corr(&rho)?, &axes, &triad, pairing);
            let slow = objective_matrix_path(&rho, &axes, &triad, pairing)?;
            Trial {
                excess: (fast - slow).abs(),
                detail: format!("bloch={fast} matrix={slow} axes={axes:?} triad={triad:?}"),
                state: rho,
            }
        }
        Suite::Complementarity => {
            let rho = states::random_mixed(2, rng)?;
            let triad = random_triad(rng);
            let sum = coherence_sum(&rho.bloch_vector()?, &triad);
            Trial {
                excess: sum - COMPLEMENTARITY_BOUND,
                detail: format!("sum={sum} triad={triad:?}"),
                state: rho,
            }
        }
    })
}

pub fn run_verify(
    suite: Suite,
    trials: Option<usize>,
    opts: &NaqcOptions,
    jobs: usize,
) -> Result<SuiteReport> {
    opts.validate()?;
    let trials = trials.unwrap_or_else(|| suite.default_trials());
    let tolerance = suite.tolerance(opts);
    let outcomes = par_map(trials, jobs, |i| run_trial(suite, opts.seed, i, opts))?;
    let mut violations = 0;
    let mut max_excess = f64::NEG_INFINITY;
    let mut counterexamples = Vec::new();
    for (trial, t) in outcomes.into_iter().enumerate() {
        max_excess = max_excess.max(t.excess);
        if t.excess > tolerance || t.excess.is_nan() {
            violations += 1;
            if counterexamples.len() < MAX_COUNTEREXAMPLES {
                counterexamples.push(Counterexample {
                    trial,
                    excess: t.excess,
                    detail: t.detail,
                    state: StateFile::from_matrix(&t.state),
                });
            }
        }
    }
    Ok(SuiteReport {
        suite,
        trials,
        tolerance,
        violations,
        max_excess,
        passed: violations == 0,
        counterexamples,
    })
}

/// Flat table row of a single-state evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComputeRecord {
    pub functional: Functional,
    pub direction: Direction,
    pub value: f64,
    pub exhibits: bool,
    pub lower_bound: f64,
    pub restarts_agreeing: usize,
    pub starts: usize,
    pub pairing: String,
    pub a1_theta: f64,
    pub a1_phi: f64,
    pub a2_theta: f64,
    pub a2_phi: f64,
    pub a3_theta: f64,
    pub a3_phi: f64,
    pub triad_theta: f64,
    pub triad_phi: f64,
    pub triad_chi: f64,
}

pub fn compute_record(rho: &DensityMatrix, r: &NaqcResult) -> Result<ComputeRecord> {
    let a = r.alice_axes;
    let p = r.pairing.0;
    Ok(ComputeRecord {
        functional: r.functional,
        direction: r.direction,
        value: r.value,
        exhibits: r.exhibits,
        lower_bound: naqc_lower_bound(rho, r.direction)?,
        restarts_agreeing: r.restarts_agreeing,
        starts: r.diagnostics.starts,
        pairing: format!("{}{}{}", p[0], p[1], p[2]),
        a1_theta: a[0].theta,
        a1_phi: a[0].phi,
        a2_theta: a[1].theta,
        a2_phi: a[1].phi,
        a3_theta: a[2].theta,
        a3_phi: a[2].phi,
        triad_theta: r.coherence_triad.theta,
        triad_phi: r.coherence_triad.phi,
        triad_chi: r.coherence_triad.chi,
    })
}

/// Both functionals in both directions for a two-qubit state.
pub fn compute_all(rho: &DensityMatrix, opts: &NaqcOptions) -> Result<Vec<ComputeRecord>> {
    let mut out = Vec::with_capacity(4);
    for direction in [Direction::AToB, Direction::BToA] {
        for f in [Functional::Standard, Functional::Generalized] {
            out.push(compute_record(rho, &naqc(rho, f, direction, opts)?)?);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Jsonl,
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "jsonl" => Ok(Format::Jsonl),
            other => Err(Error::InvalidSpec(format!("unknown format {other:?}"))),
        }
    }
}

/// Writes `rows` as CSV with a header row, or as one JSON object per line.
/// Floats use the shortest representation that round-trips.
pub fn write_table<T: Serialize, W: Write>(rows: &[T], format: Format, out: W) -> Result<()> {
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            for row in rows {
                w.serialize(row)?;
            }
            w.flush()?;
        }
        Format::Jsonl => {
            let mut out = std::io::BufWriter::new(out);
            for row in rows {
                serde_json::to_writer(&mut out, row)?;
                out.write_all(b"\n")?;
            }
            out.flush()?;
        }
    }
    Ok(())
}

/// Path of the summary sidecar for a table written to `out`.
pub fn summary_path(out: &std::path::Path) -> std::path::PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".summary.json");
    name.into()
}

pub fn write_summary<T: Serialize, W: Write>(summary: &T, mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, summary)?;
    out.write_all(b"\n")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::naqc::exhibits_naqc;

    fn opts() -> NaqcOptions {
        NaqcOptions::default()
    }

    #[test]
    fn grid_parsing() {
        let g = parse_grid("0:1:0.01").unwrap();
        assert_eq!(g.len(), 101);
        assert_eq!(g[0], 0.0);
        assert_eq!(*g.last().unwrap(), 1.0);
        assert_eq!(parse_grid("0:0.5:0.05").unwrap().len(), 11);
        assert_eq!(parse_grid("0.3:0.3:0.1").unwrap(), vec![0.3]);
        assert_eq!(parse_grid("0.8:0.85:0.01").unwrap()[2], 0.82);
        for bad in ["0:1", "1:0:0.1", "0:1:0", "a:b:c", "0:1:-1"] {
            assert!(parse_grid(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn sweep_examples() {
        let spec = SweepSpec {
            family: SweepFamily::BellMixture,
            p_grid: vec![0.0, 0.5],
            functionals: vec![Functional::Standard, Functional::Generalized],
            opts: opts(),
        };
        let rows = run_sweep(&spec, 2).unwrap();
        assert_eq!(rows.len(), 4);
        assert!((rows[0].value - 3.0).abs() < 1e-3);
        assert_eq!(rows[3].functional, Functional::Generalized);
        assert!((rows[3].value - COMPLEMENTARITY_BOUND).abs() < 1e-3 && !rows[3].exhibits);
        for r in &rows {
            assert_eq!(r.exhibits, exhibits_naqc(r.value, spec.opts.tol));
        }

        let spec = SweepSpec {
            family: SweepFamily::Werner,
            p_grid: vec![0.9],
            ..spec
        };
        for r in run_sweep(&spec, 1).unwrap() {
            assert!((r.value - 2.7).abs() < 1e-3);
        }
    }

    #[test]
    fn sweep_rejects_bad_grid() {
        let mut spec = SweepSpec {
            family: SweepFamily::Werner,
            p_grid: vec![0.2, 0.1],
            functionals: vec![Functional::Standard],
            opts: opts(),
        };
        assert!(run_sweep(&spec, 1).is_err());
        spec.p_grid = vec![0.5, 1.5];
        assert!(run_sweep(&spec, 1).is_err());
        spec.p_grid = vec![];
        assert!(run_sweep(&spec, 1).is_err());
    }

    #[test]
    fn werner_threshold() {
        let t = find_threshold(SweepFamily::Werner, Functional::Standard, &opts(), None).unwrap();
        assert!((t.p_star - 6f64.sqrt() / 3.0).abs() < 2e-3, "{t:?}");
        assert!(t.hi - t.lo <= THRESHOLD_RESOLUTION);
    }

    #[test]
    fn threshold_without_sign_change() {
        let err = find_threshold(SweepFamily::Werner, Functional::Standard, &opts(), Some((0.0, 0.5)));
        assert!(matches!(err, Err(Error::NoSignChange { .. })));
    }

    #[test]
    fn scan_is_deterministic_and_schedule_independent() {
        let spec = ScanSpec {
            mode: MonogamyMode::FixedCoherence,
            classes: vec![ScanClass::GhzClass, ScanClass::WClass],
            n_samples: 3,
            functional: Functional::Generalized,
            opts: NaqcOptions { restarts: 4, ..opts() },
            seed: 11,
        };
        let (a, sa) = run_monogamy_scan(&spec, 1).unwrap();
        let (b, sb) = run_monogamy_scan(&spec, 3).unwrap();
        assert_eq!(a, b);
        assert_eq!(sa, sb);
        assert_eq!(a.len(), 6);
        assert_eq!(sa.failures, 0);
        assert!(a[..3].iter().all(|r| r.three_tangle > states::GHZ_TANGLE_THRESHOLD));
    }

    #[test]
    fn probe_value() {
        let r = biseparable_probe(Functional::Generalized, &opts()).unwrap();
        assert!((r.sum - (3.0 + COMPLEMENTARITY_BOUND)).abs() < 2e-3);
    }

    #[test]
    fn quick_suites_pass() {
        for suite in [Suite::AppendixA, Suite::BlochPath, Suite::Complementarity, Suite::Lemma1] {
            let r = run_verify(suite, Some(50), &opts(), 0).unwrap();
            assert!(r.passed, "{suite}: {r:?}");
            assert_eq!(r.trials, 50);
        }
    }

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!("nope".parse::<Suite>().is_err());
    }

    #[test]
    fn tables_round_trip_floats() {
        let rows = vec![SweepRecord {
            family: SweepFamily::Werner,
            p: 0.1 + 0.2,
            functional: Functional::Standard,
            value: 1.0 / 3.0,
            exhibits: false,
            lower_bound: 0.0,
            restarts_agreeing: 1,
            starts: 2,
            converged_starts: 2,
            evaluations: 3,
        }];
        let mut buf = Vec::new();
        write_table(&rows, Format::Csv, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut rd = csv::Reader::from_reader(text.as_bytes());
        let back: Vec<SweepRecord> = rd.deserialize().collect::<std::result::Result<_, _>>().unwrap();
        assert_eq!(back, rows);
        assert!(text.starts_with("family,p,functional,value,exhibits"));

        let mut buf = Vec::new();
        write_table(&rows, Format::Jsonl, &mut buf).unwrap();
        let line = String::from_utf8(buf).unwrap();
        let back: SweepRecord = serde_json::from_str(line.trim_end()).unwrap();
        assert_eq!(back, rows[0]);
    }
}
