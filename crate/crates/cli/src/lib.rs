//! Experiment runner behind the `phaselab` binary.
//!
//! Every experiment turns a [`RunConfig`] into [`ResultRow`]s. Rows are
//! rendered with frozen columns:
//!
//! | column       | meaning                                              |
//! |--------------|------------------------------------------------------|
//! | `experiment` | dotted experiment id, e.g. `joint.average`           |
//! | `d`, `n`     | local dimension and number of channel copies         |
//! | `samples`    | Monte Carlo samples or sampled instances (0 if none) |
//! | `seed`       | root seed of the run                                 |
//! | `value`      | measured value                                       |
//! | `stderr`     | standard error, empty/null when not applicable       |
//! | `bound`      | reference value the row is checked against           |
//! | `pass`       | outcome of the documented check                      |
//! | `note`       | free text, empty when there is nothing to add        |
//!
//! CSV output starts with a `# schema_version=N` line; JSON output is
//! `{"schema_version": N, "rows": [...]}`.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use phaselab::ensembles::{clifford_group, haar_unitary, is_two_design, two_design_deviation, RandomStream};
use phaselab::info::{avg_holevo, avg_output_entropy, standard_families, SamplerConfig, STAT_K};
use phaselab::phasechannel::{sample_channel, ChannelSampler, MAX_DIM};
use phaselab::protocols::{
    backassisted_classical, backassisted_entanglement, fig2_reversal, joint_coherent_info, nonadditivity_report,
    BACKASSISTED_MAX_D,
};
use phaselab::qstate::{PureState, SubsystemLayout};
use phaselab::schur::{expected_purity_exact, lemma1_bounds, MAX_EXACT_COPIES};
use phaselab::LabError;
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;
pub const SEED_ENV: &str = "PHASELAB_SEED";
pub const DEFAULT_SEED: u64 = 20_240_601;
pub const MAX_SAMPLES: usize = 1_000_000;

/// Purity/entropy checks are exact up to this slack.
pub const EXACT_TOL: f64 = 1e-9;
/// Joint coherent information is compared at this tolerance.
pub const CI_TOL: f64 = 1e-6;
/// Monte Carlo agreement of purity estimates, in standard errors.
pub const PURITY_K: f64 = 4.0;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Lab(LabError),
    Io(std::io::Error),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Lab(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<LabError> for CliError {
    fn from(e: LabError) -> Self {
        CliError::Lab(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Experiment {
    Lemma1,
    Joint,
    Holevo,
    Backassist,
    Design,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Lemma1 => "lemma1",
            Experiment::Joint => "joint",
            Experiment::Holevo => "holevo",
            Experiment::Backassist => "backassist",
            Experiment::Design => "design",
        }
    }

    /// `(d, n, samples)` used when neither flags nor config set them.
    pub fn defaults(self) -> (usize, usize, usize) {
        match self {
            Experiment::Lemma1 => (9, 1, 500),
            Experiment::Joint => (4, 1, 20),
            Experiment::Holevo => (9, 1, 200),
            Experiment::Backassist => (2, 1, 20),
            Experiment::Design => (3, 1, 10),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnsembleKind {
    #[default]
    Haar,
    Clifford,
}

impl FromStr for EnsembleKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "haar" => Ok(Self::Haar),
            "clifford" => Ok(Self::Clifford),
            _ => Err(format!("unknown ensemble '{s}' (haar | clifford)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            _ => Err(format!("unknown format '{s}' (csv | json)")),
        }
    }
}

/// Optional settings from one source (config file or flags).
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    pub d: Option<usize>,
    pub n: Option<usize>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub ensemble: Option<EnsembleKind>,
    pub format: Option<Format>,
    pub output: Option<PathBuf>,
    pub threads: Option<usize>,
}

impl Overrides {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| usage(format!("config file: {e}")))
    }

    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    fn or(self, lower: Overrides) -> Overrides {
        Overrides {
            d: self.d.or(lower.d),
            n: self.n.or(lower.n),
            samples: self.samples.or(lower.samples),
            seed: self.seed.or(lower.seed),
            ensemble: self.ensemble.or(lower.ensemble),
            format: self.format.or(lower.format),
            output: self.output.or(lower.output),
            threads: self.threads.or(lower.threads),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub d: usize,
    pub n: usize,
    pub samples: usize,
    pub seed: u64,
    pub ensemble: EnsembleKind,
    pub format: Format,
    pub output: Option<PathBuf>,
    /// Worker threads; `None` uses the rayon default.
    pub threads: Option<usize>,
}

impl RunConfig {
    /// Precedence, highest first: flags, seed environment variable (seed
    /// only), config file, experiment defaults.
    pub fn resolve(
        experiment: Experiment,
        flags: Overrides,
        file: Overrides,
        env_seed: Option<&str>,
    ) -> Result<Self, CliError> {
        let env = Overrides {
            seed: env_seed
                .map(|s| s.trim().parse::<u64>().map_err(|_| usage(format!("{SEED_ENV}='{s}' is not a u64"))))
                .transpose()?,
            ..Overrides::default()
        };
        let merged = flags.or(env).or(file);
        let (d, n, samples) = experiment.defaults();
        let cfg = RunConfig {
            experiment,
            d: merged.d.unwrap_or(d),
            n: merged.n.unwrap_or(n),
            samples: merged.samples.unwrap_or(samples),
            seed: merged.seed.unwrap_or(DEFAULT_SEED),
            ensemble: merged.ensemble.unwrap_or_default(),
            format: merged.format.unwrap_or_default(),
            output: merged.output,
            threads: merged.threads,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.d < 2 || self.d > MAX_DIM {
            return Err(usage(format!("d must be in 2..={MAX_DIM}, got {}", self.d)));
        }
        if self.samples == 0 || self.samples > MAX_SAMPLES {
            return Err(usage(format!("samples must be in 1..={MAX_SAMPLES}, got {}", self.samples)));
        }
        if self.threads == Some(0) {
            return Err(usage("threads must be at least 1"));
        }
        let n_max = match self.experiment {
            Experiment::Lemma1 => MAX_EXACT_COPIES,
            _ => 1,
        };
        if self.n == 0 || self.n > n_max {
            return Err(usage(format!("{} supports n in 1..={n_max}, got {}", self.experiment.name(), self.n)));
        }
        match self.experiment {
            Experiment::Backassist if self.d > BACKASSISTED_MAX_D => {
                Err(usage(format!("backassist supports d in 2..={BACKASSISTED_MAX_D}, got {}", self.d)))
            }
            Experiment::Design if clifford_group(self.d).is_err() => {
                Err(usage(format!("design needs a prime d <= 5, got {}", self.d)))
            }
            _ if self.ensemble == EnsembleKind::Clifford && clifford_group(self.d).is_err() => {
                Err(usage(format!("clifford ensemble needs a prime d <= 5, got {}", self.d)))
            }
            _ => Ok(()),
        }
    }

    fn sampler(&self) -> Result<ChannelSampler, CliError> {
        Ok(match self.ensemble {
            EnsembleKind::Haar => ChannelSampler::haar(self.d)?,
            EnsembleKind::Clifford => ChannelSampler::clifford(self.d)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub experiment: String,
    pub d: usize,
    pub n: usize,
    pub samples: usize,
    pub seed: u64,
    pub value: f64,
    pub stderr: Option<f64>,
    pub bound: f64,
    pub pass: bool,
    pub note: String,
}

struct RowBuilder<'a> {
    cfg: &'a RunConfig,
}

impl RowBuilder<'_> {
    fn row(&self, id: &str, samples: usize, value: f64, stderr: Option<f64>, bound: f64, pass: bool) -> ResultRow {
        ResultRow {
            experiment: format!("{}.{id}", self.cfg.experiment.name()),
            d: self.cfg.d,
            n: self.cfg.n,
            samples,
            seed: self.cfg.seed,
            value,
            stderr: stderr.filter(|s| s.is_finite()),
            bound,
            pass,
            note: String::new(),
        }
    }
}

trait WithNote {
    fn note(self, note: &str) -> Self;
}

impl WithNote for ResultRow {
    fn note(mut self, note: &str) -> Self {
        self.note = note.to_string();
        self
    }
}

/// Runs the configured experiment, inside a dedicated pool when a thread
/// count is given.
pub fn run(cfg: &RunConfig) -> Result<Vec<ResultRow>, CliError> {
    cfg.validate()?;
    let go = || match cfg.experiment {
        Experiment::Lemma1 => run_lemma1(cfg),
        Experiment::Joint => run_joint(cfg),
        Experiment::Holevo => run_holevo(cfg),
        Experiment::Backassist => run_backassist(cfg),
        Experiment::Design => run_design(cfg),
    };
    match cfg.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| usage(format!("cannot start {t} workers: {e}")))?
            .install(go),
        None => go(),
    }
}

/// Expected purity and entropy of the output for input `|0…0⟩`.
pub fn run_lemma1(cfg: &RunConfig) -> Result<Vec<ResultRow>, CliError> {
    let b = RowBuilder { cfg };
    let (d, n) = (cfg.d, cfg.n);
    let psi = PureState::basis(SubsystemLayout::uniform(d, 2 * n)?, 0)?;
    let report = lemma1_bounds(d, n)?.with_expected_purity(expected_purity_exact(&psi, d, n)?);
    let exact = report.expected_purity.expect("set above");
    let vacuous = if report.bound_nontrivial { "" } else { "bound vacuous (d<6)" };

    let sampler = SamplerConfig { sampler: cfg.sampler()?, samples: cfg.samples, stream: RandomStream::new(cfg.seed) };
    let est = avg_output_entropy(&psi, &sampler)?;
    let mut rows = vec![
        b.row(
            "expected_purity_exact",
            0,
            exact,
            None,
            report.purity_upper_bound,
            exact <= report.purity_upper_bound + EXACT_TOL,
        )
        .note(vacuous),
        b.row(
            "expected_purity_mc",
            cfg.samples,
            est.purity.mean,
            Some(est.purity.stderr),
            exact,
            est.purity.agrees_with(exact, PURITY_K) || (est.purity.mean - exact).abs() <= EXACT_TOL,
        ),
        b.row(
            "entropy_mean",
            cfg.samples,
            est.entropy.mean,
            Some(est.entropy.stderr),
            report.lemma_bound,
            est.entropy.mean >= report.lemma_bound,
        )
        .note(vacuous),
    ];
    let collision = -est.purity.mean.log2();
    rows.push(
        b.row("entropy_chain", cfg.samples, est.entropy.mean, None, collision, est.chain_holds())
            .note("bound is -log2(mean purity)"),
    );
    Ok(rows)
}

/// Joint coherent information over `samples` sampled instances.
pub fn run_joint(cfg: &RunConfig) -> Result<Vec<ResultRow>, CliError> {
    let b = RowBuilder { cfg };
    let d = cfg.d;
    let insts = instances(cfg, cfg.samples)?;
    let results = insts.iter().map(|inst| joint_coherent_info(d, inst)).collect::<Result<Vec<_>, _>>()?;
    let report = nonadditivity_report(d, &insts[0])?;
    let log_d = (d as f64).log2();

    let summarize = |id: &str, values: Vec<f64>, target: f64, tol: f64| {
        let est = phaselab::stats::EstimateCI::from_samples(&values, cfg.seed, 0);
        let pass = values.iter().all(|v| (v - target).abs() <= tol);
        b.row(id, values.len(), est.mean, Some(est.stderr), target, pass)
    };
    let ratios: Vec<f64> = results.iter().map(|r| r.average / report.log2_input_dimension).collect();
    Ok(vec![
        summarize("nonerased", results.iter().map(|r| r.nonerased).collect(), log_d, CI_TOL),
        summarize("erased", results.iter().map(|r| r.erased).collect(), 0.0, EXACT_TOL),
        summarize("average", results.iter().map(|r| r.average).collect(), log_d / 2.0, CI_TOL),
        summarize("violation_ratio", ratios, 0.25, CI_TOL).note(&report.notes.join("; ")),
    ])
}

/// Holevo information of the standard input families, bound 2.
pub fn run_holevo(cfg: &RunConfig) -> Result<Vec<ResultRow>, CliError> {
    let b = RowBuilder { cfg };
    let root = RandomStream::new(cfg.seed);
    let families = standard_families(cfg.d, &root.substream(0))?;
    let mut rows = Vec::with_capacity(families.len());
    for (k, (name, ens)) in families.iter().enumerate() {
        let sampler =
            SamplerConfig { sampler: cfg.sampler()?, samples: cfg.samples, stream: root.substream(1 + k as u64) };
        let est = avg_holevo(ens, &sampler)?;
        let upper = est.upper(STAT_K);
        rows.push(
            b.row(name, cfg.samples, est.mean, Some(est.stderr), 2.0, upper <= 2.0)
                .note(&format!("members={}; mean+3se={upper:.6}", ens.len())),
        );
    }
    Ok(rows)
}

/// Reversal, entanglement and the three-use classical protocol.
pub fn run_backassist(cfg: &RunConfig) -> Result<Vec<ResultRow>, CliError> {
    let b = RowBuilder { cfg };
    let d = cfg.d;
    let root = RandomStream::new(cfg.seed);
    let layout = SubsystemLayout::new(vec![d])?;

    let insts = instances(cfg, cfg.samples)?;
    let mut reversal = Vec::with_capacity(insts.len());
    let mut ebit = Vec::with_capacity(insts.len());
    for (k, inst) in insts.iter().enumerate() {
        let psi = phaselab::info::random_pure_state(&layout, &root.with_id(2).substream(k as u64))?;
        reversal.push(fig2_reversal(d, inst, &psi)?.0);
        ebit.push(backassisted_entanglement(d, inst)?.0);
    }
    let worst = |v: &[f64]| v.iter().fold(1.0f64, |m, &x| m.min(x));
    let mut rows = vec![
        b.row(
            "reversal_fidelity",
            insts.len(),
            worst(&reversal),
            None,
            1.0,
            (worst(&reversal) - 1.0).abs() <= EXACT_TOL,
        )
        .note("minimum over instances"),
        b.row("entanglement_fidelity", insts.len(), worst(&ebit), None, 1.0, (worst(&ebit) - 1.0).abs() <= EXACT_TOL)
            .note("minimum over instances"),
    ];

    let mut decoded = 0;
    let mut rate = 0.0;
    for a in 0..d {
        for c in 0..d {
            let run = backassisted_classical(d, (a, c), &root.with_id(3).substream((a * d + c) as u64))?;
            rate = run.rate;
            let ok = run.decoded == (a, c);
            decoded += ok as usize;
            rows.push(b.row(&format!("message_{a}_{c}"), 1, run.confidence, None, 1.0, ok));
        }
    }
    let expected_rate = 2.0 * (d as f64).log2() / 3.0;
    rows.push(b.row("decoded", d * d, decoded as f64, None, (d * d) as f64, decoded == d * d));
    rows.push(
        b.row("rate", d * d, rate, None, 2.0, rate == expected_rate)
            .note("bits per channel use; bound is the unassisted classical capacity bound"),
    );
    Ok(rows)
}

/// Clifford group order and twirl agreement with the exact twirl.
pub fn run_design(cfg: &RunConfig) -> Result<Vec<ResultRow>, CliError> {
    let b = RowBuilder { cfg };
    let d = cfg.d;
    let group = clifford_group(d)?;
    let order = group.members().map_or(0, <[_]>::len);
    let expected = d.pow(3) * (d * d - 1);
    let root = RandomStream::new(cfg.seed);
    let tests = (0..cfg.samples)
        .map(|k| haar_unitary(d * d, &root.substream(k as u64)).map(|u| u.into_matrix()))
        .collect::<Result<Vec<_>, _>>()?;
    let random = two_design_deviation(&group, &tests, EXACT_TOL)?;
    let units = is_two_design(&group, EXACT_TOL)?;
    Ok(vec![
        b.row("group_order", 0, order as f64, None, expected as f64, order == expected).note("modulo global phase"),
        b.row("twirl_random", cfg.samples, random.max_deviation, None, EXACT_TOL, random.pass)
            .note("max entrywise deviation on random test matrices"),
        b.row("twirl_matrix_units", units.test_matrices, units.max_deviation, None, EXACT_TOL, units.pass),
    ])
}

fn instances(cfg: &RunConfig, count: usize) -> Result<Vec<phaselab::phasechannel::ChannelInstance>, CliError> {
    let sampler = cfg.sampler()?;
    let root = RandomStream::new(cfg.seed).with_id(1);
    (0..count).map(|k| Ok(sample_channel(&sampler, 1, &root.substream(k as u64))?.remove(0))).collect()
}

trait StreamId {
    fn with_id(&self, id: u64) -> RandomStream;
}

impl StreamId for RandomStream {
    fn with_id(&self, id: u64) -> RandomStream {
        RandomStream::with_stream(self.seed, id)
    }
}

#[derive(Serialize)]
struct JsonDoc<'a> {
    schema_version: u32,
    rows: &'a [ResultRow],
}

pub fn render(rows: &[ResultRow], format: Format) -> Result<String, CliError> {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&JsonDoc { schema_version: SCHEMA_VERSION, rows })
                .map_err(|e| usage(format!("json: {e}")))?;
            s.push('\n');
            Ok(s)
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(format!("# schema_version={SCHEMA_VERSION}\n").into_bytes());
            for r in rows {
                w.serialize(r).map_err(|e| usage(format!("csv: {e}")))?;
            }
            let bytes = w.into_inner().map_err(|e| usage(format!("csv: {e}")))?;
            Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
        }
    }
}

/// Ids of failing rows.
pub fn failures(rows: &[ResultRow]) -> Vec<&str> {
    rows.iter().filter(|r| !r.pass).map(|r| r.experiment.as_str()).collect()
}
