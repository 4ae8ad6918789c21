use std::fs::File;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use naqc_core::coherence::MubFamily;
use naqc_core::experiment::{
    biseparable_probe, compute_all, find_threshold, parse_grid, run_monogamy_scan, run_sweep,
    run_verify, summary_path, write_summary, write_table, Format, ScanClass, ScanSpec, Suite,
    SweepFamily, SweepSpec,
};
use naqc_core::naqc::{monogamy_sum, Functional, MonogamyMode, NaqcOptions};
use naqc_core::statefile::StateFile;
use naqc_core::states::{FamilySpec, Family, SampledState};

#[derive(Parser)]
#[command(name = "naqc", version, about = "Nonlocal advantage of quantum coherence for qubit states")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Seed of every random stream.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Quasi-random optimiser starts per functional evaluation.
    #[arg(long, global = true, default_value_t = 24)]
    restarts: usize,
    /// Optimiser tolerance and verdict margin.
    #[arg(long, global = true, default_value_t = 1e-6)]
    tol: f64,
    /// Coherence-basis triads searched: `paper` (θ, φ) or `full` (θ, φ, χ).
    #[arg(long, global = true, default_value = "full")]
    mub_family: MubFamily,
    /// Output table path; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, default_value = "csv")]
    format: Format,
    /// Worker threads, 0 for one per core.
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
}

impl Common {
    fn opts(&self) -> NaqcOptions {
        NaqcOptions {
            restarts: self.restarts,
            tol: self.tol,
            mub_family: self.mub_family,
            seed: self.seed,
            ..NaqcOptions::default()
        }
    }
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum FunctionalArg {
    Standard,
    Generalized,
    Both,
}

impl FunctionalArg {
    fn list(self) -> Vec<Functional> {
        match self {
            FunctionalArg::Standard => vec![Functional::Standard],
            FunctionalArg::Generalized => vec![Functional::Generalized],
            FunctionalArg::Both => vec![Functional::Standard, Functional::Generalized],
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one state given inline or as a JSON state file.
    Compute {
        /// JSON state file (matrix, amplitudes, or family and params).
        #[arg(long, conflicts_with_all = ["family", "p"])]
        state: Option<PathBuf>,
        #[arg(long, requires = "p")]
        family: Option<SweepFamily>,
        #[arg(long)]
        p: Option<f64>,
    },
    /// Evaluate a state family over a grid of mixing parameters.
    Sweep {
        #[arg(long)]
        family: SweepFamily,
        /// start:stop:step, inclusive.
        #[arg(long, default_value = "0:1:0.01")]
        grid: String,
        #[arg(long, value_enum, default_value = "both")]
        functional: FunctionalArg,
    },
    /// Bisect the mixing parameter at which the verdict changes.
    Threshold {
        #[arg(long)]
        family: SweepFamily,
        #[arg(long, value_enum, default_value = "both")]
        functional: FunctionalArg,
        /// lo:hi, defaults to the family's natural bracket.
        #[arg(long)]
        bracket: Option<String>,
    },
    /// Scan three-qubit pure states for the monogamy sum.
    Monogamy {
        #[arg(long)]
        mode: MonogamyMode,
        /// Comma-separated list of ghz-class, w-class.
        #[arg(long, value_delimiter = ',', default_value = "ghz-class,w-class")]
        classes: Vec<ScanClass>,
        /// Samples per class.
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, value_enum, default_value = "generalized")]
        functional: FunctionalArg,
        /// Evaluate the biseparable Bell ⊗ |0⟩ probe instead of scanning.
        #[arg(long)]
        probe: bool,
    },
    /// Run property verification suites; exit status 1 on any failure.
    Verify {
        /// Suite name or `all`.
        #[arg(long, default_value = "all")]
        suite: String,
        /// Trials per suite, overriding the suite default.
        #[arg(long)]
        trials: Option<usize>,
    },
}

/// A failed run: bad input (exit 2) or a property that did not hold (exit 1).
enum Failure {
    Usage(anyhow::Error),
    Verification,
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Usage(e.into())
    }
}

struct Output<'a> {
    common: &'a Common,
}

impl Output<'_> {
    fn table<T: Serialize>(&self, rows: &[T]) -> anyhow::Result<()> {
        match &self.common.out {
            Some(path) => {
                let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
                write_table(rows, self.common.format, f)?;
            }
            None => write_table(rows, self.common.format, std::io::stdout().lock())?,
        }
        Ok(())
    }

    fn summary<T: Serialize>(&self, summary: &T) -> anyhow::Result<()> {
        match &self.common.out {
            Some(path) => {
                let p = summary_path(path);
                let f = File::create(&p).with_context(|| format!("creating {}", p.display()))?;
                write_summary(summary, f)?;
            }
            None => write_summary(summary, std::io::stderr().lock())?,
        }
        Ok(())
    }
}

fn single_functional(f: FunctionalArg) -> anyhow::Result<Functional> {
    match f.list()[..] {
        [one] => Ok(one),
        _ => bail!("monogamy needs a single functional"),
    }
}

fn parse_bracket(text: &str) -> anyhow::Result<(f64, f64)> {
    let (lo, hi) = text.split_once(':').context("bracket must be lo:hi")?;
    Ok((lo.trim().parse()?, hi.trim().parse()?))
}

#[derive(Serialize)]
struct MonogamyRow {
    mode: MonogamyMode,
    functional: Functional,
    n_ab: f64,
    n_ac: f64,
    sum: f64,
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let common = &cli.common;
    let out = Output { common };
    let opts = common.opts();
    opts.validate()?;
    match &cli.command {
        Command::Compute { state, family, p } => {
            let sampled = match (state, family, p) {
                (Some(path), _, _) => StateFile::load(path)
                    .with_context(|| format!("reading {}", path.display()))?
                    .resolve()?,
                (None, Some(family), Some(p)) => {
                    let family = match family {
                        SweepFamily::BellMixture => Family::BellMixture { p: *p },
                        SweepFamily::Werner => Family::Werner { p: *p },
                    };
                    naqc_core::states::sample_spec(&FamilySpec {
                        family,
                        seed: common.seed,
                    })?
                }
                _ => return Err(anyhow::anyhow!("compute needs --state FILE or --family and --p").into()),
            };
            match &sampled {
                SampledState::Pure(psi) if psi.dim() == 8 => {
                    let mut rows = Vec::new();
                    for mode in [MonogamyMode::FixedCoherence, MonogamyMode::FixedMeasurement] {
                        for functional in [Functional::Standard, Functional::Generalized] {
                            let m = monogamy_sum(psi, mode, functional, &opts)?;
                            rows.push(MonogamyRow {
                                mode,
                                functional,
                                n_ab: m.n_ab,
                                n_ac: m.n_ac,
                                sum: m.sum,
                            });
                        }
                    }
                    out.table(&rows)?;
                }
                other => {
                    let rho = other.density();
                    out.table(&compute_all(&rho, &opts)?)?;
                }
            }
        }
        Command::Sweep {
            family,
            grid,
            functional,
        } => {
            let spec = SweepSpec {
                family: *family,
                p_grid: parse_grid(grid)?,
                functionals: functional.list(),
                opts,
            };
            out.table(&run_sweep(&spec, common.jobs)?)?;
        }
        Command::Threshold {
            family,
            functional,
            bracket,
        } => {
            let bracket = bracket.as_deref().map(parse_bracket).transpose()?;
            let rows = functional
                .list()
                .into_iter()
                .map(|f| find_threshold(*family, f, &opts, bracket))
                .collect::<Result<Vec<_>, _>>()?;
            out.table(&rows)?;
        }
        Command::Monogamy {
            mode,
            classes,
            samples,
            functional,
            probe,
        } => {
            let functional = single_functional(*functional)?;
            if *probe {
                let m = biseparable_probe(functional, &opts)?;
                out.table(&[MonogamyRow {
                    mode: MonogamyMode::FixedMeasurement,
                    functional,
                    n_ab: m.n_ab,
                    n_ac: m.n_ac,
                    sum: m.sum,
                }])?;
            } else {
                let spec = ScanSpec {
                    mode: *mode,
                    classes: classes.clone(),
                    n_samples: *samples,
                    functional,
                    opts,
                    seed: common.seed,
                };
                let (rows, summary) = run_monogamy_scan(&spec, common.jobs)?;
                out.table(&rows)?;
                out.summary(&summary)?;
            }
        }
        Command::Verify { suite, trials } => {
            let suites = if suite == "all" {
                Suite::ALL.to_vec()
            } else {
                vec![suite.parse::<Suite>()?]
            };
            let mut reports = Vec::new();
            for s in suites {
                let r = run_verify(s, *trials, &opts, common.jobs)?;
                eprintln!(
                    "{} {}: {} trials, {} violations, max excess {:e}",
                    if r.passed { "PASS" } else { "FAIL" },
                    r.suite,
                    r.trials,
                    r.violations,
                    r.max_excess
                );
                reports.push(r);
            }
            #[derive(Serialize)]
            struct Row {
                suite: Suite,
                trials: usize,
                tolerance: f64,
                violations: usize,
                max_excess: f64,
                passed: bool,
            }
            let rows: Vec<Row> = reports
                .iter()
                .map(|r| Row {
                    suite: r.suite,
                    trials: r.trials,
                    tolerance: r.tolerance,
                    violations: r.violations,
                    max_excess: r.max_excess,
                    passed: r.passed,
                })
                .collect();
            out.table(&rows)?;
            out.summary(&reports)?;
            if reports.iter().any(|r| !r.passed) {
                return Err(Failure::Verification);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification) => ExitCode::from(1),
        Err(Failure::Usage(e)) => {
            let _ = writeln!(std::io::stderr(), "error: {e:#}");
            ExitCode::from(2)
        }
    }
}
