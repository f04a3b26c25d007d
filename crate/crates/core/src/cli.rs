//! Command-line workbench: configuration, dispatch and CSV emission.
//!
//! A run is described by a [`RunConfig`], read from a JSON file and then
//! overridden by flags. Every file the CLI writes starts with `#` lines
//! holding the full configuration, so each row can be regenerated from the
//! file alone.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::bounds::{to_decimal, BoundReport, BoundTable};
use crate::combinatorics::int;
use crate::datamodel::{write_dataset, ModelParams, TrainingRow, TrainingSet};
use crate::evaluator::{run_experiment, run_learned_trial, sample_trial, ExperimentResult, FeatureKind, SimilaritySpec};
use crate::graphkernel::kstar;
use crate::neuralnet::{config_for, NetworkConfig};
use crate::oracle::{
    exact_avg_moment, kstar_direct, verify_beautiful, verify_kernel_marginal, verify_structure_counts,
    MonteCarloKernel, TinyUniverse,
};
use crate::{Error, Result};

/// Environment fallback for `--threads`.
pub const THREADS_ENV: &str = "LONGTAIL_LAB_THREADS";

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    #[default]
    Bound,
    Experiment,
    TrainNn,
    Oracle,
    GenData,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Bound => "bound",
            Mode::Experiment => "experiment",
            Mode::TrainNn => "train-nn",
            Mode::Oracle => "oracle",
            Mode::GenData => "gen-data",
        }
    }
}

/// Training hyperparameters that may be changed from the config file. The
/// network shape follows the model parameters.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkOverrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_hidden1: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_embed: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_hidden2: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lr: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub batch: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub loss_target: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_epochs: Option<usize>,
}

impl NetworkOverrides {
    pub fn apply(&self, params: &ModelParams) -> Result<NetworkConfig> {
        let mut cfg = NetworkConfig::for_params(params);
        if let Some(v) = self.d_hidden1 {
            cfg.d_hidden1 = v;
        }
        if let Some(v) = self.d_embed {
            cfg.d_embed = v;
        }
        if let Some(v) = self.d_hidden2 {
            cfg.d_hidden2 = v;
        }
        if let Some(v) = self.lr {
            cfg.lr = v;
        }
        if let Some(v) = self.batch {
            cfg.batch = v;
        }
        if let Some(v) = self.loss_target {
            cfg.loss_target = v;
        }
        if let Some(v) = self.max_epochs {
            cfg.max_epochs = v;
        }
        config_for(params, Some(cfg))
    }
}

/// One run of the workbench.
///
/// `n_star` lists the columns to sweep; an empty list means the single
/// value in `params`. Each column keeps the number of familiar samples per
/// category fixed, `n_spl - n*` of `params`, and adds `n*` unfamiliar ones.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub mode: Mode,
    #[serde(default = "ModelParams::headline")]
    pub params: ModelParams,
    #[serde(default)]
    pub features: Vec<FeatureKind>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_tests")]
    pub tests_per_category: usize,
    #[serde(default)]
    pub ell: Option<usize>,
    #[serde(default)]
    pub n_star: Vec<usize>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub network: NetworkOverrides,
    /// Monte Carlo trials per oracle check.
    #[serde(default = "default_oracle_trials")]
    pub oracle_trials: u64,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub threads: Option<usize>,
}

fn default_trials() -> usize {
    20
}
fn default_tests() -> usize {
    1
}
fn default_oracle_trials() -> u64 {
    100_000
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            mode: Mode::Bound,
            params: ModelParams::headline(),
            features: Vec::new(),
            trials: default_trials(),
            tests_per_category: default_tests(),
            ell: None,
            n_star: Vec::new(),
            seed: 0,
            network: NetworkOverrides::default(),
            oracle_trials: default_oracle_trials(),
            out: None,
            threads: None,
        }
    }
}

impl RunConfig {
    /// Defaults for `mode`, with the features of the nearest-neighbour rows
    /// filled in for experiments.
    pub fn for_mode(mode: Mode) -> Self {
        let features = match mode {
            Mode::Experiment => vec![FeatureKind::OneHotPerturbed, FeatureKind::OptimalPerturbed],
            _ => Vec::new(),
        };
        RunConfig {
            mode,
            features,
            ..RunConfig::default()
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        RunConfig::from_json(&text)
    }

    /// The swept `n*` values.
    pub fn n_star_values(&self) -> Vec<usize> {
        if self.n_star.is_empty() {
            vec![self.params.n_star()]
        } else {
            self.n_star.clone()
        }
    }

    /// Parameters of the column with `n_star` unfamiliar samples.
    pub fn column_params(&self, n_star: usize) -> Result<ModelParams> {
        let familiar = self.params.n_samples() - self.params.n_star();
        self.params.with_n_star(n_star, familiar + n_star)
    }

    pub fn network_config(&self, params: &ModelParams) -> Result<NetworkConfig> {
        self.network.apply(params)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.threads == Some(0) {
            return bad("threads must be positive".into());
        }
        if let Some(ell) = self.ell {
            if ell > self.params.length() {
                return bad(format!("ell = {ell} exceeds L = {}", self.params.length()));
            }
        }
        let columns = self.n_star_values();
        for &n in &columns {
            if n == 0 {
                return bad("n_star values must be positive".into());
            }
            self.column_params(n).map_err(|e| Error::Config(e.to_string()))?;
        }
        match self.mode {
            Mode::Experiment | Mode::TrainNn | Mode::GenData => {
                if self.trials == 0 || self.tests_per_category == 0 {
                    return bad("trials and tests_per_category must be positive".into());
                }
            }
            Mode::Oracle => {
                if self.oracle_trials == 0 {
                    return bad("oracle_trials must be positive".into());
                }
            }
            Mode::Bound => {}
        }
        if self.mode == Mode::Experiment && self.features.is_empty() {
            return bad("experiment mode needs a non-empty `features` list".into());
        }
        let needs_net = self.mode == Mode::TrainNn || self.features.contains(&FeatureKind::Learned);
        if needs_net {
            for &n in &columns {
                let p = self.column_params(n)?;
                self.network_config(&p).map_err(|e| Error::Config(e.to_string()))?;
            }
        }
        Ok(())
    }
}

/// Command-line flags. Flags override the config file.
#[derive(Debug, Parser)]
#[command(name = "longtail-lab", version, about = "Bounds and experiments for rare sentence structures")]
pub struct Cli {
    #[arg(value_enum)]
    pub mode: Mode,
    /// JSON run configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads (falls back to LONGTAIL_LAB_THREADS, then all cores).
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub ell: Option<usize>,
    #[arg(long = "n-star")]
    pub n_star: Option<usize>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub tests_per_category: Option<usize>,
    /// Comma-separated feature kinds for experiment mode.
    #[arg(long, value_delimiter = ',')]
    pub features: Option<Vec<String>>,
    /// Print the merged configuration as JSON and exit.
    #[arg(long)]
    pub dump_config: bool,
}

impl Cli {
    /// The file config (or mode defaults) with flags applied.
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::for_mode(self.mode),
        };
        cfg.mode = self.mode;
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = self.threads {
            cfg.threads = Some(v);
        }
        if let Some(v) = &self.out {
            cfg.out = Some(v.clone());
        }
        if let Some(v) = self.ell {
            cfg.ell = Some(v);
        }
        if let Some(v) = self.n_star {
            cfg.n_star = vec![v];
        }
        if let Some(v) = self.trials {
            cfg.trials = v;
        }
        if let Some(v) = self.tests_per_category {
            cfg.tests_per_category = v;
        }
        if let Some(names) = &self.features {
            cfg.features = names
                .iter()
                .map(|s| s.parse().map_err(|e: Error| Error::Config(e.to_string())))
                .collect::<Result<_>>()?;
        }
        if cfg.threads.is_none() {
            if let Ok(v) = std::env::var(THREADS_ENV) {
                let n = v
                    .trim()
                    .parse()
                    .map_err(|_| Error::Config(format!("{THREADS_ENV} = {v:?} is not a thread count")))?;
                cfg.threads = Some(n);
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// One CSV row: a method evaluated at one `n*` column.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TableRow {
    pub method: String,
    pub n_star: usize,
    pub n_spl: usize,
    pub trials: Option<usize>,
    pub tests: Option<usize>,
    pub success_rate: Option<f64>,
    pub std_error: Option<f64>,
    /// Upper bound on the success rate, 15 significant digits.
    pub bound: Option<String>,
    pub seed: u64,
    pub wall_time_s: f64,
}

impl TableRow {
    pub fn from_experiment(method: &str, params: &ModelParams, r: &ExperimentResult, seed: u64, secs: f64) -> Self {
        TableRow {
            method: method.to_string(),
            n_star: params.n_star(),
            n_spl: params.n_samples(),
            trials: Some(r.trials),
            tests: Some(r.tests_total),
            success_rate: Some(r.success_rate),
            std_error: Some(r.std_error),
            bound: None,
            seed,
            wall_time_s: secs,
        }
    }

    pub fn from_bound(r: &BoundReport, seed: u64, secs: f64) -> Self {
        TableRow {
            method: "bound".to_string(),
            n_star: r.n_star,
            n_spl: r.params.n_samples(),
            trials: None,
            tests: None,
            success_rate: None,
            std_error: None,
            bound: Some(to_decimal(&r.success_upper, 15)),
            seed,
            wall_time_s: secs,
        }
    }
}

pub const TABLE_HEADER: &str = "method,n_star,n_spl,trials,tests,success_rate,std_error,bound,seed,wall_time_s";

fn opt<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map(T::to_string).unwrap_or_default()
}

/// Renders rows as CSV under `#` lines carrying the configuration and seed.
pub fn format_table(rows: &[TableRow], config: &RunConfig) -> String {
    let mut out = String::new();
    let compact = serde_json::to_string(config).expect("config serializes");
    let _ = writeln!(out, "# config: {compact}");
    let _ = writeln!(out, "# seed: {}", config.seed);
    out.push_str(TABLE_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{:.3}",
            r.method,
            r.n_star,
            r.n_spl,
            opt(&r.trials),
            opt(&r.tests),
            opt(&r.success_rate),
            opt(&r.std_error),
            opt(&r.bound),
            r.seed,
            r.wall_time_s
        );
    }
    out
}

/// Writes [`format_table`] to `path`.
pub fn emit_table(rows: &[TableRow], config: &RunConfig, path: &Path) -> Result<()> {
    fs::write(path, format_table(rows, config)).map_err(|e| Error::io(path, e))
}

/// Reads the configuration back out of an emitted file.
pub fn config_from_table(text: &str) -> Result<RunConfig> {
    let line = text
        .lines()
        .find_map(|l| l.strip_prefix("# config: "))
        .ok_or_else(|| Error::Format("no `# config:` line".into()))?;
    RunConfig::from_json(line)
}

/// Result of one oracle check.
#[derive(Clone, Debug, Serialize)]
pub struct OracleCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// What a run produced.
#[derive(Clone, Debug, Default)]
pub struct RunOutput {
    pub rows: Vec<TableRow>,
    pub checks: Vec<OracleCheck>,
    pub files: Vec<PathBuf>,
    /// Human-readable summary lines.
    pub lines: Vec<String>,
}

impl RunOutput {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Executes a validated config inside a pool of `config.threads` workers.
pub fn run(config: &RunConfig) -> Result<RunOutput> {
    config.validate()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = config.threads {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::Resource(format!("thread pool: {e}")))?;
    let mut output = pool.install(|| match config.mode {
        Mode::Bound => run_bound(config),
        Mode::Experiment => run_experiments(config),
        Mode::TrainNn => run_train(config),
        Mode::Oracle => run_oracle(config),
        Mode::GenData => run_gen_data(config),
    })?;
    if config.mode != Mode::GenData {
        if let Some(path) = &config.out {
            if config.mode == Mode::Oracle {
                let body = serde_json::to_string_pretty(&output.checks).expect("checks serialize");
                let text = format!("# config: {}\n{body}\n", serde_json::to_string(config).expect("config serializes"));
                fs::write(path, text).map_err(|e| Error::io(path, e))?;
            } else {
                emit_table(&output.rows, config, path)?;
            }
            output.files.push(path.clone());
        }
    }
    Ok(output)
}

fn bound_for(table: &BoundTable, ell: Option<usize>, n_star: usize) -> Result<BoundReport> {
    match ell {
        Some(ell) => table.error_lower_bound(ell, n_star),
        None => table.best_ell(n_star),
    }
}

fn run_bound(config: &RunConfig) -> Result<RunOutput> {
    let mut out = RunOutput::default();
    let start = Instant::now();
    let table = BoundTable::new(&config.params)?;
    for n in config.n_star_values() {
        let params = config.column_params(n)?;
        let report = bound_for(&table, config.ell, n)?;
        let report = BoundReport { params, ..report };
        let s = report.summary();
        out.lines.push(format!(
            "n* = {n}: ell = {}, error >= {}, success <= {} (|S_ell| = {})",
            s.ell, s.error_lower, s.success_upper, s.signature_count
        ));
        out.rows
            .push(TableRow::from_bound(&report, config.seed, start.elapsed().as_secs_f64()));
    }
    Ok(out)
}

fn run_experiments(config: &RunConfig) -> Result<RunOutput> {
    let mut out = RunOutput::default();
    let table = BoundTable::new(&config.params)?;
    for n in config.n_star_values() {
        let params = config.column_params(n)?;
        let bound = bound_for(&table, config.ell, n)?;
        for &kind in &config.features {
            let start = Instant::now();
            let mut sim = SimilaritySpec::new(kind).with_seed(config.seed);
            if kind == FeatureKind::Learned {
                sim.network = Some(config.network_config(&params)?);
            }
            let r = run_experiment(&params, &sim, config.trials, config.tests_per_category, config.seed)?;
            let secs = start.elapsed().as_secs_f64();
            out.lines.push(format!(
                "n* = {n}, n_spl = {}: nn on {kind}: {:.4} ± {:.4} ({} tests, {secs:.1} s)",
                params.n_samples(),
                r.success_rate,
                r.std_error,
                r.tests_total
            ));
            let mut row = TableRow::from_experiment(&format!("nn-{kind}"), &params, &r, config.seed, secs);
            row.bound = Some(to_decimal(&bound.success_upper, 15));
            out.rows.push(row);
        }
    }
    Ok(out)
}

fn run_train(config: &RunConfig) -> Result<RunOutput> {
    let mut out = RunOutput::default();
    for n in config.n_star_values() {
        let params = config.column_params(n)?;
        let cfg = config.network_config(&params)?;
        let start = Instant::now();
        let mut net_counts = Vec::new();
        let mut nn_counts = Vec::new();
        for t in 0..config.trials as u64 {
            let r = run_learned_trial(&params, Some(cfg), config.tests_per_category, config.seed, t)?;
            out.lines.push(format!(
                "n* = {n}, trial {t}: {} epochs, loss {:.3e}{}, net {:.4}, nn on features {:.4}, train {:.4}",
                r.log.epochs,
                r.log.final_loss(),
                if r.log.converged { "" } else { " (not converged)" },
                r.net_accuracy,
                r.nn_accuracy,
                r.train_accuracy
            ));
            let net_successes = (r.net_accuracy * r.tests as f64).round() as usize;
            net_counts.push((net_successes, r.tests));
            nn_counts.push((r.nn_successes, r.tests));
        }
        let secs = start.elapsed().as_secs_f64();
        for (method, counts) in [("network", &net_counts), ("nn-learned", &nn_counts)] {
            let r = ExperimentResult::from_counts(counts);
            out.rows
                .push(TableRow::from_experiment(method, &params, &r, config.seed, secs));
        }
    }
    Ok(out)
}

fn check(out: &mut RunOutput, name: impl Into<String>, passed: bool, detail: String) {
    let name = name.into();
    out.lines.push(format!("{} {name}: {detail}", if passed { "PASS" } else { "FAIL" }));
    out.checks.push(OracleCheck { name, passed, detail });
}

fn run_oracle(config: &RunConfig) -> Result<RunOutput> {
    let mut out = RunOutput::default();
    let tiny = TinyUniverse::new(2, 4, 2)?;
    let p = *tiny.params();

    let n = tiny.sentences().len();
    let mut mismatches = 0usize;
    let mut bad_rows = 0usize;
    for x in tiny.sentences() {
        let mut row_sum = int(0);
        for y in tiny.sentences() {
            let fast = kstar(x, y, &p)?;
            if fast != kstar_direct(x, y, &tiny)? {
                mismatches += 1;
            }
            row_sum += fast;
        }
        if row_sum != int(1) {
            bad_rows += 1;
        }
    }
    check(
        &mut out,
        "kstar-vs-direct",
        mismatches == 0 && bad_rows == 0,
        format!("{} pairs, {mismatches} mismatches, {bad_rows} rows not summing to 1", n * n),
    );

    for t in [1u32, 3, 7] {
        let r = verify_beautiful(&tiny, t, config.oracle_trials, config.seed, MonteCarloKernel::PerturbedOptimal)?;
        check(
            &mut out,
            format!("beautiful-t{t}"),
            r.passed,
            format!("mc {:.5} vs exact {:.5} (z = {:.2})", r.estimate, r.exact_value, r.z),
        );
    }
    let r = verify_beautiful(&tiny, 3, config.oracle_trials, config.seed, MonteCarloKernel::RandomSymmetric)?;
    check(
        &mut out,
        "random-kernel-below-moment",
        r.passed,
        format!("mc {:.5} vs exact {:.5} (z = {:.2})", r.estimate, r.exact_value, r.z),
    );

    let table = BoundTable::new(&p)?;
    let mut sound = true;
    for t in [1u32, 3, 7, 1999] {
        let avg = exact_avg_moment(&tiny, t)?;
        for ell in 0..=p.length() {
            sound &= avg.exact <= table.moment_bound(t as u64, ell)?;
        }
    }
    check(&mut out, "moment-bound-soundness", sound, "t in {1, 3, 7, 1999}, every ell".into());

    for (len, n_w) in [(2, 4), (3, 6)] {
        let u = TinyUniverse::new(len, n_w, 2)?;
        let r = verify_structure_counts(&u)?;
        check(
            &mut out,
            format!("structure-counts-L{len}-nw{n_w}"),
            r.passed(),
            format!(
                "{} graphs, {} signatures, {} mismatches",
                r.graphs_checked,
                r.signatures_checked,
                r.mismatches.len()
            ),
        );
    }

    let r = verify_kernel_marginal(&tiny, config.oracle_trials, config.seed)?;
    check(
        &mut out,
        "kernel-marginal",
        r.passed,
        format!("{} cells, max |z| = {:.2}", r.cells, r.max_abs_z),
    );
    Ok(out)
}

fn test_rows(tests: &[crate::datamodel::TestPoint]) -> TrainingSet {
    TrainingSet {
        rows: tests
            .iter()
            .enumerate()
            .map(|(i, t)| TrainingRow {
                category: t.category,
                slot: i + 1,
                unfamiliar: true,
                sentence: t.sentence.clone(),
            })
            .collect(),
    }
}

/// Writes the training set of every trial to `<out>/train-<t>.txt` and its
/// unfamiliar tests to `<out>/tests-<t>.txt`; without `out`, trial 0's
/// training set goes to stdout.
fn run_gen_data(config: &RunConfig) -> Result<RunOutput> {
    let mut out = RunOutput::default();
    let params = config.column_params(config.n_star_values()[0])?;
    let header = format!(
        "# config: {}\n",
        serde_json::to_string(config).expect("config serializes")
    );
    let Some(dir) = &config.out else {
        let (_, train, _) = sample_trial(&params, config.tests_per_category, config.seed, 0);
        let mut stdout = io::stdout().lock();
        stdout
            .write_all(header.as_bytes())
            .and_then(|_| write_dataset(&mut stdout, &train))
            .map_err(|e| Error::io("<stdout>", e))?;
        return Ok(out);
    };
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for t in 0..config.trials as u64 {
        let (_, train, tests) = sample_trial(&params, config.tests_per_category, config.seed, t);
        for (stem, set) in [("train", train), ("tests", test_rows(&tests))] {
            let path = dir.join(format!("{stem}-{t}.txt"));
            let mut buf = header.clone().into_bytes();
            write_dataset(&mut buf, &set).map_err(|e| Error::io(&path, e))?;
            fs::write(&path, buf).map_err(|e| Error::io(&path, e))?;
            out.files.push(path);
        }
    }
    out.lines
        .push(format!("wrote {} files to {}", out.files.len(), dir.display()));
    Ok(out)
}

/// Parses `args`, runs, prints a summary and maps failures to exit codes:
/// 0 ok, 1 runtime failure, 2 usage.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let config = match cli.resolve() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("longtail-lab: {e}");
            return ExitCode::from(2);
        }
    };
    if cli.dump_config {
        println!("{}", config.to_json());
        return ExitCode::SUCCESS;
    }
    match run(&config) {
        Ok(output) => {
            for line in &output.lines {
                println!("{line}");
            }
            for f in &output.files {
                println!("wrote {}", f.display());
            }
            if output.passed() {
                ExitCode::SUCCESS
            } else {
                eprintln!("longtail-lab: some oracle checks failed");
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("longtail-lab: {e}");
            ExitCode::from(1)
        }
    }
}
