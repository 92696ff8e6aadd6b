//! Simulated searches, experiment grids and report files.
//!
//! A search repeats: select a display, stop if it hits the target set,
//! otherwise let the simulated user pick and fold the pick into the engine.
//! Experiments run many searches against uniformly drawn targets; every run
//! derives its generator from `(master_seed, run_index)` alone, so reports
//! are reproducible and partial reports can be merged.

use std::fmt;
use std::io::Write;
use std::ops::Range;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dataset::{euclidean, generate_synthetic, load_dataset, resolve_target_set, DataFormat, Dataset, TargetSpec};
use crate::engine::{Algorithm, Engine, EngineParams};
use crate::error::{Error, Result};
use crate::partition::DisplaySet;
use crate::scalar::Scalar;
use crate::user_model::{simulate_choice, ChoiceOutcome, UserParams};

pub const DEFAULT_MAX_ITERATIONS: usize = 1000;
pub const DEFAULT_CURVE_LEN: usize = 50;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DatasetSource {
    File(PathBuf),
    Synthetic { n: usize, dim: usize, seed: u64 },
}

impl DatasetSource {
    pub fn load<F: Scalar>(&self) -> Result<Dataset<F>> {
        match self {
            DatasetSource::File(path) => load_dataset(path, DataFormat::from_path(path)),
            DatasetSource::Synthetic { n, dim, seed } => generate_synthetic(*n, *dim, *seed),
        }
    }
}

impl fmt::Display for DatasetSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DatasetSource::File(p) => write!(f, "{}", p.display()),
            DatasetSource::Synthetic { n, dim, seed } => write!(f, "synthetic:{n}:{dim}:{seed}"),
        }
    }
}

impl FromStr for DatasetSource {
    type Err = Error;

    /// `synthetic:N:DIM:SEED` or a file path.
    fn from_str(s: &str) -> Result<Self> {
        let Some(rest) = s.strip_prefix("synthetic:") else {
            return Ok(DatasetSource::File(PathBuf::from(s)));
        };
        let parts: Vec<&str> = rest.split(':').collect();
        let parse = |x: &str| {
            x.parse::<u64>()
                .map_err(|_| Error::validation(format!("bad synthetic dataset spec {s:?}")))
        };
        match parts.as_slice() {
            [n, dim, seed] => Ok(DatasetSource::Synthetic {
                n: parse(n)? as usize,
                dim: parse(dim)? as usize,
                seed: parse(seed)?,
            }),
            _ => Err(Error::validation(format!(
                "expected synthetic:N:DIM:SEED, got {s:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig<F> {
    pub algorithm: Algorithm,
    pub k: usize,
    pub target_set_size: usize,
    pub runs: usize,
    pub max_iterations: usize,
    /// Length of the reported distance curve, capped by `max_iterations`.
    pub curve_len: usize,
    pub dataset: DatasetSource,
    pub master_seed: u64,
    pub engine: EngineParams<F>,
    pub user: UserParams<F>,
}

impl<F: Scalar> Default for ExperimentConfig<F> {
    fn default() -> Self {
        ExperimentConfig {
            algorithm: Algorithm::BetaExperts,
            k: 10,
            target_set_size: 1,
            runs: 200,
            max_iterations: DEFAULT_MAX_ITERATIONS,
            curve_len: DEFAULT_CURVE_LEN,
            dataset: DatasetSource::Synthetic {
                n: 2000,
                dim: 10,
                seed: 7,
            },
            master_seed: 1,
            engine: EngineParams::default(),
            user: UserParams::default(),
        }
    }
}

impl<F: Scalar> ExperimentConfig<F> {
    pub fn validate(&self, n: usize) -> Result<()> {
        if self.runs == 0 {
            return Err(Error::validation("runs must be >= 1"));
        }
        if self.k < 2 || self.k > n {
            return Err(Error::InvalidDisplaySize { k: self.k, n });
        }
        if self.max_iterations == 0 {
            return Err(Error::validation("max_iterations must be >= 1"));
        }
        if self.curve_len == 0 {
            return Err(Error::validation("curve_len must be >= 1"));
        }
        if self.target_set_size == 0 || self.target_set_size > n {
            return Err(Error::validation(format!(
                "target set size {} must be in 1..={n}",
                self.target_set_size
            )));
        }
        self.user.validate()
    }

    pub fn effective_curve_len(&self) -> usize {
        self.curve_len.min(self.max_iterations)
    }

    /// Sets one `key = value` option, as used by config files and CLI flags.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        let bad = |e: &dyn fmt::Display| Error::validation(format!("{key} = {value:?}: {e}"));
        let int = || value.parse::<usize>().map_err(|e| bad(&e));
        let real = || value.parse::<F>().map_err(|e| bad(&e));
        match key.trim().replace('-', "_").as_str() {
            "algo" | "algorithm" => self.algorithm = value.parse()?,
            "k" => self.k = int()?,
            "target_size" | "target_set_size" => self.target_set_size = int()?,
            "runs" => self.runs = int()?,
            "max_iterations" => self.max_iterations = int()?,
            "curve_len" => self.curve_len = int()?,
            "dataset" => self.dataset = value.parse()?,
            "seed" | "master_seed" => self.master_seed = value.parse().map_err(|e| bad(&e))?,
            "a0" => self.engine.a0 = real()?,
            "b0" => self.engine.b0 = real()?,
            "sweeps" => self.engine.gibbs.sweeps = int()?,
            "thin" => {
                self.engine.gibbs.thin = match value {
                    "" | "none" | "off" => None,
                    _ => Some(int()?),
                }
            }
            "beta" | "al_discount" => self.engine.al_discount = real()?,
            "sigma" => self.engine.sigma = real()?,
            "tau" => self.engine.tau = real()?,
            "sharpness" => self.user.sharpness = real()?,
            "noise" | "lambda" => self.user.noise = real()?,
            "epsilon" => self.user.epsilon = real()?,
            other => return Err(Error::validation(format!("unknown config key {other:?}"))),
        }
        Ok(())
    }

    /// Applies `key=value` lines; blank lines and `#` comments are skipped.
    pub fn apply_kv_text(&mut self, text: &str) -> Result<()> {
        for (row, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                row,
                message: format!("expected key=value, found {line:?}"),
            })?;
            self.set(key, value)?;
        }
        Ok(())
    }

    /// Key/value pairs describing this configuration, in a fixed order.
    pub fn echo(&self) -> Vec<(String, String)> {
        let e = &self.engine;
        let u = &self.user;
        let thin = e.gibbs.thin.map_or("none".to_string(), |t| t.to_string());
        [
            ("algorithm", self.algorithm.to_string()),
            ("k", self.k.to_string()),
            ("target_size", self.target_set_size.to_string()),
            ("runs", self.runs.to_string()),
            ("max_iterations", self.max_iterations.to_string()),
            ("curve_len", self.curve_len.to_string()),
            ("dataset", self.dataset.to_string()),
            ("seed", self.master_seed.to_string()),
            ("a0", e.a0.to_string()),
            ("b0", e.b0.to_string()),
            ("sweeps", e.gibbs.sweeps.to_string()),
            ("thin", thin),
            ("beta", e.al_discount.to_string()),
            ("sigma", e.sigma.to_string()),
            ("tau", e.tau.to_string()),
            ("sharpness", u.sharpness.to_string()),
            ("noise", u.noise.to_string()),
            ("epsilon", u.epsilon.to_string()),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundTrace<F> {
    pub display: DisplaySet,
    pub outcome: ChoiceOutcome,
    /// Mean distance from the displayed items to the target vector.
    pub mean_distance: F,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchStatus {
    Success { round: usize },
    Cutoff,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchTrace<F> {
    pub rounds: Vec<RoundTrace<F>>,
    pub status: SearchStatus,
}

impl<F> SearchTrace<F> {
    /// Rounds charged to this search: the success round, or every round run.
    pub fn iterations(&self) -> usize {
        match self.status {
            SearchStatus::Success { round } => round,
            SearchStatus::Cutoff => self.rounds.len(),
        }
    }
}

/// Seed of run `run_index` under `master_seed` (SplitMix64 finaliser).
pub fn derive_run_seed(master_seed: u64, run_index: u64) -> u64 {
    let mut z = master_seed
        .wrapping_add(run_index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn target_rng(run_seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(run_seed);
    rng.set_stream(1);
    rng
}

/// Runs one simulated search for `target`, seeded by `run_seed`.
pub fn run_search<F: Scalar>(
    config: &ExperimentConfig<F>,
    dataset: &Dataset<F>,
    target: TargetSpec,
    run_seed: u64,
) -> Result<SearchTrace<F>> {
    config.validate(dataset.len())?;
    let target_set = resolve_target_set(dataset, target)?;
    let t = dataset.vector(target.target_index);
    let mut rng = ChaCha8Rng::seed_from_u64(run_seed);
    let mut engine = Engine::new(config.algorithm, dataset.len(), config.engine)?;
    let k_f = F::from_usize(config.k).unwrap();
    let mut rounds = Vec::new();
    for round in 1..=config.max_iterations {
        let display = engine.select(config.k, &mut rng)?;
        let mean_distance = display
            .indices()
            .iter()
            .map(|&i| euclidean(dataset.vector(i), t))
            .sum::<F>()
            / k_f;
        let outcome = simulate_choice(&display, &target_set, t, dataset, &config.user, &mut rng)?;
        if let ChoiceOutcome::Chose(position) = outcome {
            engine.observe(dataset, &display, position)?;
        }
        rounds.push(RoundTrace {
            display,
            outcome,
            mean_distance,
        });
        if outcome == ChoiceOutcome::Success {
            return Ok(SearchTrace {
                rounds,
                status: SearchStatus::Success { round },
            });
        }
    }
    Ok(SearchTrace {
        rounds,
        status: SearchStatus::Cutoff,
    })
}

/// What one run contributes to a report.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary<F> {
    pub run_index: u64,
    pub seed: u64,
    pub target: usize,
    pub iterations: usize,
    pub success: bool,
    /// Displayed-set mean distance per iteration; after a search ends, its
    /// last value is carried forward.
    pub curve: Vec<F>,
}

impl<F: Scalar> RunSummary<F> {
    pub fn from_trace(run_index: u64, seed: u64, target: usize, trace: &SearchTrace<F>, curve_len: usize) -> Self {
        let last = trace.rounds.last().map_or(F::zero(), |r| r.mean_distance);
        let curve = (0..curve_len)
            .map(|i| trace.rounds.get(i).map_or(last, |r| r.mean_distance))
            .collect();
        RunSummary {
            run_index,
            seed,
            target,
            iterations: trace.iterations(),
            success: matches!(trace.status, SearchStatus::Success { .. }),
            curve,
        }
    }
}

/// Runs `run_index in runs`: each draws a uniform target and searches for it.
pub fn run_experiment_range<F: Scalar>(
    config: &ExperimentConfig<F>,
    dataset: &Dataset<F>,
    runs: Range<u64>,
) -> Result<ExperimentReport<F>> {
    config.validate(dataset.len())?;
    let curve_len = config.effective_curve_len();
    let summaries = runs
        .into_par_iter()
        .map(|run_index| {
            let seed = derive_run_seed(config.master_seed, run_index);
            let target = target_rng(seed).random_range(0..dataset.len());
            let spec = TargetSpec::new(target, config.target_set_size);
            let trace = run_search(config, dataset, spec, seed)?;
            Ok(RunSummary::from_trace(run_index, seed, target, &trace, curve_len))
        })
        .collect::<Result<Vec<_>>>()?;
    ExperimentReport::from_runs(config.echo(), summaries)
}

pub fn run_experiment<F: Scalar>(config: &ExperimentConfig<F>, dataset: &Dataset<F>) -> Result<ExperimentReport<F>> {
    run_experiment_range(config, dataset, 0..config.runs as u64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport<F> {
    pub config: Vec<(String, String)>,
    pub runs: Vec<RunSummary<F>>,
    /// Cutoff runs count with `max_iterations`.
    pub mean_iterations: F,
    pub success_rate: F,
    pub distance_curve: Vec<F>,
}

impl<F: Scalar> ExperimentReport<F> {
    /// Aggregates runs in increasing run-index order, so the result does not
    /// depend on the order runs finished in.
    pub fn from_runs(config: Vec<(String, String)>, mut runs: Vec<RunSummary<F>>) -> Result<Self> {
        if runs.is_empty() {
            return Err(Error::validation("a report needs at least one run"));
        }
        runs.sort_by_key(|r| r.run_index);
        if runs.windows(2).any(|w| w[0].run_index == w[1].run_index) {
            return Err(Error::validation("duplicate run index"));
        }
        let curve_len = runs[0].curve.len();
        if runs.iter().any(|r| r.curve.len() != curve_len) {
            return Err(Error::validation("runs have different curve lengths"));
        }
        let count = F::from_usize(runs.len()).unwrap();
        let mean_iterations = runs
            .iter()
            .map(|r| F::from_usize(r.iterations).unwrap())
            .sum::<F>()
            / count;
        let success_rate = F::from_usize(runs.iter().filter(|r| r.success).count()).unwrap() / count;
        let distance_curve = (0..curve_len)
            .map(|i| runs.iter().map(|r| r.curve[i]).sum::<F>() / count)
            .collect();
        Ok(ExperimentReport {
            config,
            runs,
            mean_iterations,
            success_rate,
            distance_curve,
        })
    }

    /// Combines reports over disjoint run ranges of the same configuration.
    pub fn merge(self, other: ExperimentReport<F>) -> Result<Self> {
        let strip = |c: &[(String, String)]| -> Vec<(String, String)> {
            c.iter().filter(|(k, _)| k != "runs").cloned().collect()
        };
        if strip(&self.config) != strip(&other.config) {
            return Err(Error::validation("cannot merge reports with different configurations"));
        }
        let mut config = self.config;
        let mut runs = self.runs;
        runs.extend(other.runs);
        for (k, v) in config.iter_mut() {
            if k == "runs" {
                *v = runs.len().to_string();
            }
        }
        Self::from_runs(config, runs)
    }

    /// Standard error of `mean_iterations` over runs.
    pub fn iterations_std_error(&self) -> F {
        let xs: Vec<F> = self.runs.iter().map(|r| F::from_usize(r.iterations).unwrap()).collect();
        std_error(&xs)
    }

    /// Per-run curve values averaged over `iterations` (1-based, inclusive).
    pub fn window_means(&self, iterations: std::ops::RangeInclusive<usize>) -> Vec<F> {
        let (lo, hi) = (*iterations.start(), *iterations.end());
        let width = F::from_usize(hi - lo + 1).unwrap();
        self.runs
            .iter()
            .map(|r| r.curve[lo - 1..hi].iter().copied().sum::<F>() / width)
            .collect()
    }

    /// Writes the report CSV: `# key,value` config lines, the per-iteration
    /// curve, then a summary row.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for (k, v) in &self.config {
            writeln!(out, "# {k},{v}")?;
        }
        writeln!(out, "iteration,mean_distance")?;
        for (i, d) in self.distance_curve.iter().enumerate() {
            writeln!(out, "{},{d}", i + 1)?;
        }
        writeln!(out, "mean_iterations,success_rate")?;
        writeln!(out, "{},{}", self.mean_iterations, self.success_rate)
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("report CSV is UTF-8")
    }
}

pub fn std_error<F: Scalar>(xs: &[F]) -> F {
    let n = F::from_usize(xs.len()).unwrap();
    if xs.len() < 2 {
        return F::zero();
    }
    let mean = xs.iter().copied().sum::<F>() / n;
    let var = xs.iter().map(|&x| (x - mean) * (x - mean)).sum::<F>() / (n - F::one());
    (var / n).sqrt()
}

pub fn export_report<F: Scalar>(report: &ExperimentReport<F>, path: &Path) -> Result<()> {
    std::fs::write(path, report.to_csv_string()).map_err(|e| Error::io(path, e))
}

/// The numbers recovered from a report CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportCsv<F> {
    pub config: Vec<(String, String)>,
    pub distance_curve: Vec<F>,
    pub mean_iterations: F,
    pub success_rate: F,
}

pub fn parse_report_csv<F: Scalar>(text: &str) -> Result<ReportCsv<F>> {
    let mut config = Vec::new();
    let mut curve = Vec::new();
    let mut summary = None;
    let mut section = 0;
    for (row, line) in text.lines().enumerate() {
        let err = |m: String| Error::Parse { row, message: m };
        let num = |s: &str| s.parse::<F>().map_err(|e| err(format!("{s:?}: {e}")));
        if let Some(c) = line.strip_prefix("# ") {
            let (k, v) = c.split_once(',').ok_or_else(|| err(format!("bad config line {line:?}")))?;
            config.push((k.to_string(), v.to_string()));
            continue;
        }
        match line {
            "iteration,mean_distance" => section = 1,
            "mean_iterations,success_rate" => section = 2,
            _ => {
                let (a, b) = line.split_once(',').ok_or_else(|| err(format!("bad row {line:?}")))?;
                match section {
                    1 => {
                        let i: usize = a.parse().map_err(|_| err(format!("bad iteration {a:?}")))?;
                        if i != curve.len() + 1 {
                            return Err(err(format!("iteration {i} out of order")));
                        }
                        curve.push(num(b)?);
                    }
                    2 => summary = Some((num(a)?, num(b)?)),
                    _ => return Err(err(format!("unexpected row {line:?}"))),
                }
            }
        }
    }
    let (mean_iterations, success_rate) = summary.ok_or_else(|| Error::Parse {
        row: text.lines().count(),
        message: "missing summary row".into(),
    })?;
    Ok(ReportCsv {
        config,
        distance_curve: curve,
        mean_iterations,
        success_rate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_config(algorithm: Algorithm) -> ExperimentConfig<f64> {
        ExperimentConfig {
            algorithm,
            k: 5,
            runs: 6,
            max_iterations: 60,
            dataset: DatasetSource::Synthetic { n: 80, dim: 2, seed: 3 },
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn whole_dataset_target_succeeds_immediately() {
        let cfg = ExperimentConfig { target_set_size: 80, ..small_config(Algorithm::Al) };
        let d = cfg.dataset.load::<f64>().unwrap();
        let trace = run_search(&cfg, &d, TargetSpec::new(4, 80), 9).unwrap();
        assert_eq!(trace.status, SearchStatus::Success { round: 1 });

        let cfg = ExperimentConfig { k: 80, ..small_config(Algorithm::BetaExperts) };
        let trace = run_search(&cfg, &d, TargetSpec::new(4, 1), 9).unwrap();
        assert_eq!(trace.status, SearchStatus::Success { round: 1 });
        assert_eq!(trace.iterations(), 1);
    }

    #[test]
    fn search_is_deterministic_per_seed() {
        let cfg = ExperimentConfig {
            k: 10,
            dataset: DatasetSource::Synthetic { n: 50, dim: 2, seed: 1 },
            ..small_config(Algorithm::BetaExperts)
        };
        let d = cfg.dataset.load::<f64>().unwrap();
        let a = run_search(&cfg, &d, TargetSpec::new(7, 1), 123).unwrap();
        let b = run_search(&cfg, &d, TargetSpec::new(7, 1), 123).unwrap();
        assert_eq!(a, b);
        assert!(a.rounds.len() <= cfg.max_iterations);
        if let SearchStatus::Success { round } = a.status {
            assert!(a.rounds[round - 1].display.contains(7));
        }
    }

    #[test]
    fn cutoff_counts_max_iterations() {
        let cfg = ExperimentConfig { max_iterations: 1, k: 2, ..small_config(Algorithm::PicHunter) };
        let d = cfg.dataset.load::<f64>().unwrap();
        let r = run_experiment(&cfg, &d).unwrap();
        assert!(r.mean_iterations <= 1.0);
        assert_eq!(r.distance_curve.len(), 1);
        for run in &r.runs {
            assert_eq!(run.iterations, 1);
        }
    }

    #[test]
    fn single_run_report_is_its_trace() {
        let cfg = ExperimentConfig { runs: 1, ..small_config(Algorithm::BetaExperts) };
        let d = cfg.dataset.load::<f64>().unwrap();
        let report = run_experiment(&cfg, &d).unwrap();
        let seed = derive_run_seed(cfg.master_seed, 0);
        let target = target_rng(seed).random_range(0..d.len());
        let trace = run_search(&cfg, &d, TargetSpec::new(target, 1), seed).unwrap();
        assert_eq!(report.mean_iterations, trace.iterations() as f64);
        assert_eq!(report.distance_curve[0], trace.rounds[0].mean_distance);
        let success = matches!(trace.status, SearchStatus::Success { .. });
        assert_eq!(report.success_rate, if success { 1.0 } else { 0.0 });
    }

    #[test]
    fn split_runs_merge_to_the_same_report() {
        let cfg = ExperimentConfig { runs: 20, ..small_config(Algorithm::Al) };
        let d = cfg.dataset.load::<f64>().unwrap();
        let whole = run_experiment(&cfg, &d).unwrap();
        let first = run_experiment_range(&cfg, &d, 0..10).unwrap();
        let second = run_experiment_range(&cfg, &d, 10..20).unwrap();
        let merged = second.merge(first).unwrap();
        assert_eq!(merged, whole);
        assert_eq!(merged.to_csv_string(), whole.to_csv_string());
    }

    #[test]
    fn report_csv_round_trips() {
        let cfg = small_config(Algorithm::DirichletVb);
        let d = cfg.dataset.load::<f64>().unwrap();
        let report = run_experiment(&cfg, &d).unwrap();
        let text = report.to_csv_string();
        assert_eq!(text, report.to_csv_string());
        let parsed = parse_report_csv::<f64>(&text).unwrap();
        assert_eq!(parsed.config, report.config);
        assert_eq!(parsed.distance_curve.len(), 50);
        for (a, b) in parsed.distance_curve.iter().zip(&report.distance_curve) {
            assert!((a - b).abs() <= 1e-12);
        }
        assert!((parsed.mean_iterations - report.mean_iterations).abs() <= 1e-12);
        assert!((parsed.success_rate - report.success_rate).abs() <= 1e-12);

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.csv");
        export_report(&report, &path).unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), text);
        let missing = dir.path().join("nope").join("r.csv");
        let err = export_report(&report, &missing).unwrap_err().to_string();
        assert!(err.contains("nope"), "{err}");
    }

    #[test]
    fn config_keys_apply() {
        let mut cfg = ExperimentConfig::<f64>::default();
        cfg.apply_kv_text(
            "# comment\nalgo = ds_gibbs\nk=5\ntarget-size=10\nruns=3\nseed=99\n\
             dataset=synthetic:100:3:2\nsweeps=20\nthin=5\nbeta=0.25\nsigma=0.5\nnoise=0\n",
        )
        .unwrap();
        assert_eq!(cfg.algorithm, Algorithm::DirichletGibbs);
        assert_eq!((cfg.k, cfg.target_set_size, cfg.runs, cfg.master_seed), (5, 10, 3, 99));
        assert_eq!(cfg.dataset, DatasetSource::Synthetic { n: 100, dim: 3, seed: 2 });
        assert_eq!(cfg.engine.gibbs.sweeps, 20);
        assert_eq!(cfg.engine.gibbs.thin, Some(5));
        assert_eq!(cfg.engine.al_discount, 0.25);
        assert_eq!(cfg.user.noise, 0.0);
        assert!(cfg.set("bogus", "1").is_err());
        assert!(cfg.apply_kv_text("k").is_err());
    }

    #[test]
    fn run_seeds_are_distinct_and_stable() {
        let seeds: Vec<u64> = (0..100).map(|i| derive_run_seed(5, i)).collect();
        let mut sorted = seeds.clone();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(sorted.len(), 100);
        assert_eq!(derive_run_seed(5, 3), seeds[3]);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let d = generate_synthetic::<f64>(10, 2, 0).unwrap();
        for cfg in [
            ExperimentConfig { runs: 0, ..small_config(Algorithm::Al) },
            ExperimentConfig { k: 1, ..small_config(Algorithm::Al) },
            ExperimentConfig { k: 11, ..small_config(Algorithm::Al) },
            ExperimentConfig { max_iterations: 0, ..small_config(Algorithm::Al) },
            ExperimentConfig { target_set_size: 11, ..small_config(Algorithm::Al) },
        ] {
            assert!(run_experiment(&cfg, &d).is_err());
        }
    }
}
