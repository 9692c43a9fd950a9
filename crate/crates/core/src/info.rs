//! Entropic quantities over sampled channel instances.
//!
//! Information quantities of the channel are evaluated per instance and
//! averaged, the classical label `(U, V)` being known to the receiver.
//! Each Monte Carlo sample `i` draws its instances from
//! `stream.substream(i)` and per-sample values are reduced in index order,
//! so estimates are identical for any rayon pool size.

use rayon::prelude::*;

use crate::ensembles::{complex_gaussian, haar_unitary_with, RandomStream};
use crate::error::{LabError, Result};
use crate::phasechannel::{apply_copies_pure, sample_channel, ChannelSampler};
use crate::qstate::{
    fourier_matrix, purity, von_neumann_entropy, CMatrix, CVector, DensityMatrix, PureState, SubsystemLayout,
    UnitaryMatrix,
};
use crate::stats::EstimateCI;

pub const MAX_ENSEMBLE_SIZE: usize = 256;

/// Standard errors of slack allowed in statistical bound checks.
pub const STAT_K: f64 = 3.0;

/// Slack for the chain `S ≥ −log₂ Tr ρ²` evaluated on floating-point data.
pub const CHAIN_SLACK: f64 = 1e-12;

/// Input ensemble `{p_i, φ_i}` of pure states sharing one layout.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    members: Vec<(f64, PureState)>,
}

impl Ensemble {
    pub fn new(members: Vec<(f64, PureState)>) -> Result<Self> {
        let first = members.first().ok_or_else(|| LabError::InvalidProbabilities("empty ensemble".into()))?;
        if members.len() > MAX_ENSEMBLE_SIZE {
            return Err(LabError::InvalidArgument(format!(
                "ensemble has {} members, limit is {MAX_ENSEMBLE_SIZE}",
                members.len()
            )));
        }
        let layout = first.1.layout().clone();
        if members.iter().any(|(_, s)| s.layout() != &layout) {
            return Err(LabError::InvalidLayout("ensemble members differ in layout".into()));
        }
        let probs: Vec<f64> = members.iter().map(|(p, _)| *p).collect();
        check_probabilities(&probs, members.len())?;
        if probs.iter().any(|&p| p <= 0.0) {
            return Err(LabError::InvalidProbabilities("ensemble weights must be positive".into()));
        }
        Ok(Self { members })
    }

    pub fn uniform(states: Vec<PureState>) -> Result<Self> {
        let p = 1.0 / states.len().max(1) as f64;
        Self::new(states.into_iter().map(|s| (p, s)).collect())
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn layout(&self) -> &SubsystemLayout {
        self.members[0].1.layout()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.members.iter().map(|(p, _)| *p).collect()
    }

    pub fn members(&self) -> &[(f64, PureState)] {
        &self.members
    }
}

fn check_probabilities(probs: &[f64], count: usize) -> Result<()> {
    if probs.len() != count {
        return Err(LabError::InvalidProbabilities(format!("{} probabilities for {count} states", probs.len())));
    }
    if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
        return Err(LabError::InvalidProbabilities("negative or non-finite weight".into()));
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > 1e-10 {
        return Err(LabError::InvalidProbabilities(format!("weights sum to {total}")));
    }
    Ok(())
}

/// `χ = S(Σ p_i ρ_i) − Σ p_i S(ρ_i)` in bits.
pub fn holevo_chi(outputs: &[DensityMatrix], probs: &[f64]) -> Result<f64> {
    check_probabilities(probs, outputs.len())?;
    let weighted: Vec<(f64, &DensityMatrix)> = probs.iter().copied().zip(outputs).collect();
    let average = DensityMatrix::mixture(&weighted)?;
    let mut conditional = 0.0;
    for (p, rho) in &weighted {
        conditional += p * von_neumann_entropy(rho)?;
    }
    Ok(von_neumann_entropy(&average)? - conditional)
}

/// `S(B) − S(RB)` where `reference` lists the `R` subsystems and the rest form `B`.
pub fn coherent_information(rho: &DensityMatrix, reference: &[usize]) -> Result<f64> {
    let layout = rho.layout();
    layout.check_indices(reference)?;
    if reference.is_empty() || reference.len() == layout.len() {
        return Err(LabError::InvalidArgument("coherent information needs a reference/output split".into()));
    }
    let output = layout.complement(reference);
    Ok(von_neumann_entropy(&rho.partial_trace(&output)?)? - von_neumann_entropy(rho)?)
}

/// Instance distribution, sample budget and root stream of an estimate.
#[derive(Debug, Clone)]
pub struct SamplerConfig {
    pub sampler: ChannelSampler,
    pub samples: usize,
    pub stream: RandomStream,
}

impl SamplerConfig {
    pub fn haar(d: usize, samples: usize, seed: u64) -> Result<Self> {
        Ok(Self { sampler: ChannelSampler::haar(d)?, samples, stream: RandomStream::new(seed) })
    }

    fn estimate(&self, values: &[f64]) -> EstimateCI {
        EstimateCI::from_samples(values, self.stream.seed, self.stream.stream_id)
    }
}

fn copies_of(layout: &SubsystemLayout, d: usize, max: usize) -> Result<usize> {
    let dims = layout.dims();
    if !dims.len().is_multiple_of(2) || dims.iter().any(|&x| x != d) {
        return Err(LabError::InvalidLayout(format!("expected (A1, A2) pairs of dimension {d}, got {dims:?}")));
    }
    let n = dims.len() / 2;
    if n > max {
        return Err(LabError::InvalidArgument(format!("at most {max} copies supported here, got {n}")));
    }
    Ok(n)
}

/// Per-sample Holevo information of the instance outputs, averaged.
pub fn avg_holevo(ensemble: &Ensemble, config: &SamplerConfig) -> Result<EstimateCI> {
    let n = copies_of(ensemble.layout(), config.sampler.dim(), 2)?;
    let probs = ensemble.probabilities();
    if ensemble.len() == 1 {
        return Ok(EstimateCI::exact(0.0, config.samples, config.stream.seed, config.stream.stream_id));
    }
    let values: Vec<f64> = (0..config.samples)
        .into_par_iter()
        .map(|i| {
            let insts = sample_channel(&config.sampler, n, &config.stream.substream(i as u64))?;
            let outputs: Vec<DensityMatrix> =
                ensemble.members().iter().map(|(_, s)| apply_copies_pure(&insts, s)).collect::<Result<_>>()?;
            holevo_chi(&outputs, &probs)
        })
        .collect::<Result<_>>()?;
    Ok(config.estimate(&values))
}

/// Entropy and purity statistics of the channel output for one input.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutputEntropyEstimate {
    pub entropy: EstimateCI,
    pub purity: EstimateCI,
    /// Sample mean of `−log₂ Tr ρ²`.
    pub renyi2: EstimateCI,
}

impl OutputEntropyEstimate {
    /// `mean S ≥ mean(−log₂ Tr ρ²) ≥ −log₂(mean Tr ρ²)`.
    pub fn chain_holds(&self) -> bool {
        self.entropy.mean >= self.renyi2.mean - CHAIN_SLACK
            && self.renyi2.mean >= -self.purity.mean.log2() - CHAIN_SLACK
    }
}

/// Samples `S(ρ)` and `Tr ρ²` for `ρ` the output of `n ≤ 3` sampled
/// instances on pure input `psi` laid out as `(A₁, A₂)` pairs.
pub fn avg_output_entropy(psi: &PureState, config: &SamplerConfig) -> Result<OutputEntropyEstimate> {
    let n = copies_of(psi.layout(), config.sampler.dim(), crate::phasechannel::MAX_COPIES)?;
    let pairs: Vec<(f64, f64)> = (0..config.samples)
        .into_par_iter()
        .map(|i| {
            let insts = sample_channel(&config.sampler, n, &config.stream.substream(i as u64))?;
            let rho = apply_copies_pure(&insts, psi)?;
            Ok((von_neumann_entropy(&rho)?, purity(&rho)))
        })
        .collect::<Result<_>>()?;
    let entropies: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let purities: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let renyi: Vec<f64> = purities.iter().map(|p| -p.log2()).collect();
    Ok(OutputEntropyEstimate {
        entropy: config.estimate(&entropies),
        purity: config.estimate(&purities),
        renyi2: config.estimate(&renyi),
    })
}

/// Uniform on the unit sphere: a normalized complex Gaussian vector.
fn random_unit_vector(d: usize, rng: &mut rand_chacha::ChaCha20Rng) -> CVector {
    let v = CVector::from_fn(d, |_, _| complex_gaussian(rng));
    let norm = v.norm();
    v.unscale(norm)
}

/// Random product state over `layout`, one Haar vector per subsystem.
pub fn random_product_state(layout: &SubsystemLayout, stream: &RandomStream) -> Result<PureState> {
    let mut rng = stream.rng();
    let mut amps = CVector::from_element(1, num_complex::Complex64::new(1.0, 0.0));
    for &d in layout.dims() {
        amps = amps.kronecker(&random_unit_vector(d, &mut rng));
    }
    PureState::normalized(amps, layout.clone())
}

/// Haar-random pure state on `layout`.
pub fn random_pure_state(layout: &SubsystemLayout, stream: &RandomStream) -> Result<PureState> {
    PureState::normalized(random_unit_vector(layout.total(), &mut stream.rng()), layout.clone())
}

#[derive(Debug, Clone)]
pub struct ProbeResult {
    pub best_input: PureState,
    pub estimate: EstimateCI,
    /// Best mean entropy after each iteration, starting with the seed input.
    pub trajectory: Vec<f64>,
}

/// Random-restart search over product inputs for a low mean output entropy.
///
/// Every candidate is scored on the same instance draws, so candidates are
/// compared under common random numbers. The search starts from `|0…0⟩`.
pub fn min_entropy_probe(
    d: usize,
    n: usize,
    iterations: usize,
    samples: usize,
    stream: &RandomStream,
) -> Result<ProbeResult> {
    let layout = SubsystemLayout::uniform(d, 2 * n)?;
    let config = SamplerConfig { sampler: ChannelSampler::haar(d)?, samples, stream: stream.substream(0) };
    let mut best_input = PureState::basis(layout.clone(), 0)?;
    let mut estimate = avg_output_entropy(&best_input, &config)?.entropy;
    let mut trajectory = vec![estimate.mean];
    for k in 0..iterations {
        let candidate = random_product_state(&layout, &stream.substream(k as u64 + 1))?;
        let score = avg_output_entropy(&candidate, &config)?.entropy;
        if score.mean < estimate.mean {
            best_input = candidate;
            estimate = score;
        }
        trajectory.push(estimate.mean);
    }
    Ok(ProbeResult { best_input, estimate, trajectory })
}

fn basis_from_unitary(u: &CMatrix, layout: &SubsystemLayout) -> Result<Vec<PureState>> {
    (0..u.ncols()).map(|k| PureState::normalized(u.column(k).into_owned(), layout.clone())).collect()
}

/// Single-copy input ensembles used as Holevo evidence: the computational
/// basis, five random pure ensembles, and four rotated bases of `A₁A₂`.
pub fn standard_families(d: usize, stream: &RandomStream) -> Result<Vec<(String, Ensemble)>> {
    let layout = SubsystemLayout::uniform(d, 2)?;
    let dd = d * d;
    let mut out = Vec::new();
    out.push((
        "computational".to_string(),
        Ensemble::uniform(basis_from_unitary(&CMatrix::identity(dd, dd), &layout)?)?,
    ));
    for (k, size) in [2usize, d, dd, 2, d].into_iter().enumerate() {
        let root = stream.substream(100 + k as u64);
        let states =
            (0..size).map(|i| random_pure_state(&layout, &root.substream(i as u64))).collect::<Result<Vec<_>>>()?;
        out.push((format!("random{k}_size{size}"), Ensemble::uniform(states)?));
    }
    let f = fourier_matrix(d);
    let id = UnitaryMatrix::identity(d);
    let mut rng = stream.substream(200).rng();
    let (r1, r2) = (haar_unitary_with(d, &mut rng), haar_unitary_with(d, &mut rng));
    let global = haar_unitary_with(dd, &mut rng);
    let rotations = [
        ("fourier_product", f.tensor(&f)),
        ("computational_fourier", id.tensor(&f)),
        ("haar_product", r1.tensor(&r2)),
        ("haar_global", global),
    ];
    for (name, u) in rotations {
        out.push((name.to_string(), Ensemble::uniform(basis_from_unitary(u.matrix(), &layout)?)?));
    }
    Ok(out)
}
