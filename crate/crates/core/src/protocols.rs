//! End-to-end protocol simulations on top of single channel instances.
//!
//! Correction order, pinned for transcripts:
//!
//! * reversal (receiver holds `B`, `B′`): `conj(V)` on `B′`, measure `B′`
//!   in the computational basis giving `j`, then `Z^{−j}` and `U†` on `B`;
//! * back-assisted entanglement (sender holds `C₁`, `C₂`): `conj(V)` on
//!   `C₂`, measure `C₂` giving `j`, then `conj(U)` and `Z^{−j}` on `C₁`.
//!
//! `conj(V) = (Vᵀ)†` undoes the `Vᵀ` that the transpose identity moves onto
//! the partner of `A₂`. Measurements are simulated branch by branch with
//! exact weights rather than sampled.

use std::fmt::Write as _;

use crate::ensembles::RandomStream;
use crate::error::{LabError, Result};
use crate::info::coherent_information;
use crate::phasechannel::{
    apply_erasure, apply_instance, apply_isometry_pure, sample_channel, BranchLabel, ChannelInstance, ChannelSampler,
    ErasureChannel,
};
use crate::qstate::{generalized_paulis, max_entangled_state, DensityMatrix, PureState, UnitaryMatrix};

pub const TRANSCRIPT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolStep {
    pub index: usize,
    pub label: String,
    pub systems: Vec<String>,
    pub outcome: String,
}

/// Step-by-step record of a protocol run.
#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolTranscript {
    pub protocol: String,
    pub steps: Vec<ProtocolStep>,
    pub fidelity: Option<f64>,
    pub decoded: Option<(usize, usize)>,
    pub channel_uses: usize,
    pub ebits_consumed: usize,
    pub payload_bits: f64,
}

impl ProtocolTranscript {
    fn new(protocol: &str) -> Self {
        Self {
            protocol: protocol.to_string(),
            steps: Vec::new(),
            fidelity: None,
            decoded: None,
            channel_uses: 0,
            ebits_consumed: 0,
            payload_bits: 0.0,
        }
    }

    fn push(&mut self, label: &str, systems: &[&str], outcome: impl Into<String>) {
        self.steps.push(ProtocolStep {
            index: self.steps.len(),
            label: label.to_string(),
            systems: systems.iter().map(|s| s.to_string()).collect(),
            outcome: outcome.into(),
        });
    }

    /// Payload bits per channel use.
    pub fn rate(&self) -> f64 {
        if self.channel_uses == 0 {
            0.0
        } else {
            self.payload_bits / self.channel_uses as f64
        }
    }

    /// Line-oriented form: a version header, a field header, one
    /// tab-separated `step, label, systems, outcome` line per step, and
    /// `#`-prefixed summary lines.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# transcript v{TRANSCRIPT_VERSION} protocol={}", self.protocol);
        let _ = writeln!(out, "# step\tlabel\tsystems\toutcome");
        for s in &self.steps {
            let _ = writeln!(out, "{}\t{}\t{}\t{}", s.index, s.label, s.systems.join(","), s.outcome);
        }
        let _ = writeln!(out, "# channel_uses={}", self.channel_uses);
        let _ = writeln!(out, "# ebits_consumed={}", self.ebits_consumed);
        let _ = writeln!(out, "# payload_bits={}", self.payload_bits);
        let _ = writeln!(out, "# rate={}", self.rate());
        if let Some(f) = self.fidelity {
            let _ = writeln!(out, "# fidelity={f}");
        }
        if let Some((a, b)) = self.decoded {
            let _ = writeln!(out, "# decoded={a},{b}");
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let bad = |msg: &str| LabError::InvalidArgument(format!("transcript: {msg}"));
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| bad("empty"))?;
        let protocol = header
            .strip_prefix(&format!("# transcript v{TRANSCRIPT_VERSION} protocol="))
            .ok_or_else(|| bad("unsupported header"))?;
        let mut t = Self::new(protocol);
        for line in lines {
            if let Some(meta) = line.strip_prefix("# ") {
                let Some((key, value)) = meta.split_once('=') else { continue };
                let num = |v: &str| v.parse::<f64>().map_err(|_| bad("bad number"));
                match key {
                    "channel_uses" => t.channel_uses = value.parse().map_err(|_| bad("bad count"))?,
                    "ebits_consumed" => t.ebits_consumed = value.parse().map_err(|_| bad("bad count"))?,
                    "payload_bits" => t.payload_bits = num(value)?,
                    "fidelity" => t.fidelity = Some(num(value)?),
                    "decoded" => {
                        let (a, b) = value.split_once(',').ok_or_else(|| bad("bad message"))?;
                        t.decoded = Some((
                            a.parse().map_err(|_| bad("bad message"))?,
                            b.parse().map_err(|_| bad("bad message"))?,
                        ));
                    }
                    _ => {}
                }
                continue;
            }
            let fields: Vec<&str> = line.splitn(4, '\t').collect();
            if fields.len() != 4 {
                return Err(bad("step line needs four fields"));
            }
            t.steps.push(ProtocolStep {
                index: fields[0].parse().map_err(|_| bad("bad step index"))?,
                label: fields[1].to_string(),
                systems: if fields[2].is_empty() { vec![] } else { fields[2].split(',').map(str::to_string).collect() },
                outcome: fields[3].to_string(),
            });
        }
        Ok(t)
    }
}

fn check_protocol_dim(d: usize, inst: &ChannelInstance) -> Result<()> {
    if d < 2 {
        return Err(LabError::UnsupportedDimension { dim: d, reason: "protocols need d >= 2" });
    }
    if inst.d != d {
        return Err(LabError::DimensionMismatch { expected: d, got: inst.d });
    }
    Ok(())
}

fn format_probs(probs: &[f64]) -> String {
    probs.iter().map(|p| format!("{p:.6}")).collect::<Vec<_>>().join(";")
}

/// Measures `target` in the computational basis and applies the
/// outcome-dependent correction to each branch, returning the recombined
/// (trace-one) state and the outcome probabilities.
fn measure_and_correct<F>(
    rho: &DensityMatrix,
    target: usize,
    d: usize,
    mut correct: F,
) -> Result<(DensityMatrix, Vec<f64>)>
where
    F: FnMut(usize, DensityMatrix) -> Result<DensityMatrix>,
{
    let mut probs = Vec::with_capacity(d);
    let mut acc: Option<DensityMatrix> = None;
    for j in 0..d {
        let branch = rho.project(target, j)?;
        probs.push(branch.trace());
        let fixed = correct(j, branch)?;
        acc = Some(match acc {
            None => fixed,
            Some(prev) => DensityMatrix::mixture(&[(1.0, &prev), (1.0, &fixed)])?,
        });
    }
    Ok((acc.expect("d >= 2 branches"), probs))
}

/// Which corrections a protocol run applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Corrections {
    Full,
    /// Negative control: skip everything that depends on the entangled partner.
    Skipped,
}

/// Sends `psi` (on `A₁`) through one instance with half of `φ_d` in `A₂`;
/// the receiver undoes the channel using `B′`. Returns the fidelity of the
/// recovered `B` with `psi`.
pub fn fig2_reversal(d: usize, inst: &ChannelInstance, psi: &PureState) -> Result<(f64, ProtocolTranscript)> {
    fig2_reversal_with(d, inst, psi, Corrections::Full)
}

pub fn fig2_reversal_with(
    d: usize,
    inst: &ChannelInstance,
    psi: &PureState,
    corrections: Corrections,
) -> Result<(f64, ProtocolTranscript)> {
    check_protocol_dim(d, inst)?;
    if psi.dim() != d || psi.layout().len() != 1 {
        return Err(LabError::DimensionMismatch { expected: d, got: psi.dim() });
    }
    let mut t = ProtocolTranscript::new("fig2_reversal");
    let (_, z) = generalized_paulis(d)?;
    // [A₁, A₂, B′] → [B, E, B′]
    let input = psi.tensor(&max_entangled_state(d)?);
    t.push("prepare", &["A1", "A2", "B'"], "phi_d on A2,B'");
    let after = apply_isometry_pure(inst, &input, 0, 1)?;
    t.push("channel", &["A1", "A2"], "W=P(U(x)V); A2 discarded as E");
    let u_dag = inst.u.adjoint();
    let fidelity = match corrections {
        Corrections::Full => {
            let rotated = after.apply_unitary(&inst.v.conjugate(), &[2])?;
            t.push("undo_vT", &["B'"], "conj(V)");
            let mut probs = Vec::with_capacity(d);
            let mut total = 0.0;
            for j in 0..d {
                let branch = rotated.project(2, j)?;
                probs.push(branch.amplitudes().norm_squared());
                let fixed = branch.apply_unitary(&z.pow((d - j) % d), &[0])?.apply_unitary(&u_dag, &[0])?;
                total += fixed.reduced(&[0])?.fidelity_with(psi)?;
            }
            t.push("measure", &["B'"], format!("p={}", format_probs(&probs)));
            t.push("correct", &["B"], "Z^-j then U^dag");
            total
        }
        Corrections::Skipped => {
            t.push("correct", &["B"], "U^dag only");
            after.apply_unitary(&u_dag, &[0])?.reduced(&[0])?.fidelity_with(psi)?
        }
    }
    .clamp(0.0, 1.0);
    t.channel_uses = 1;
    t.ebits_consumed = 1;
    t.payload_bits = (d as f64).log2();
    t.fidelity = Some(fidelity);
    Ok((fidelity, t))
}

/// Core of the reversal: `message` (one system) goes into `A₁`, the first
/// system of `ebit` into `A₂`, its second system stays with the receiver
/// as `B′`. Any extra systems of `message` ride along untouched.
/// Returns the state on `[B, message extras…]` after correction.
fn reverse_through_channel(
    inst: &ChannelInstance,
    message: &DensityMatrix,
    ebit: &DensityMatrix,
    corrections: Corrections,
    t: &mut ProtocolTranscript,
) -> Result<DensityMatrix> {
    let d = inst.d;
    let (_, z) = generalized_paulis(d)?;
    let extras = message.layout().len() - 1;
    // [A₁, extras…, A₂, B′]
    let joint = message.tensor(ebit);
    let (a2, bp) = (extras + 1, extras + 2);
    t.push("prepare", &["A1", "A2", "B'"], "phi_d on A2,B'");
    let after = apply_instance(inst, &joint, 0, a2)?;
    let bp = bp - 1;
    t.push("channel", &["A1", "A2"], "W=P(U(x)V); A2 discarded as E");
    let corrected = match corrections {
        Corrections::Full => {
            let undo_v = inst.v.conjugate();
            let rotated = after.apply_unitary(&undo_v, &[bp])?;
            t.push("undo_vT", &["B'"], "conj(V)");
            let u_dag = inst.u.adjoint();
            let (fixed, probs) = measure_and_correct(&rotated, bp, d, |j, branch| {
                let zinv = z.pow((d - j) % d);
                branch.apply_unitary(&zinv, &[0])?.apply_unitary(&u_dag, &[0])
            })?;
            t.push("measure", &["B'"], format!("p={}", format_probs(&probs)));
            t.push("correct", &["B"], "Z^-j then U^dag");
            fixed
        }
        Corrections::Skipped => {
            t.push("correct", &["B"], "U^dag only");
            after.apply_unitary(&inst.u.adjoint(), &[0])?
        }
    };
    let keep: Vec<usize> = (0..bp).collect();
    corrected.partial_trace(&keep)
}

/// Establishes `φ_d` between the sender's `C₁` and the receiver's `B` from
/// one instance, the receiver having announced `(U, V)`.
pub fn backassisted_entanglement(d: usize, inst: &ChannelInstance) -> Result<(f64, ProtocolTranscript)> {
    backassisted_entanglement_with(d, inst, Corrections::Full).map(|(f, t, _)| (f, t))
}

/// Also returns the final `[C₁, B]` state.
pub fn backassisted_entanglement_with(
    d: usize,
    inst: &ChannelInstance,
    corrections: Corrections,
) -> Result<(f64, ProtocolTranscript, DensityMatrix)> {
    check_protocol_dim(d, inst)?;
    let (_, z) = generalized_paulis(d)?;
    let phi = max_entangled_state(d)?;
    let mut t = ProtocolTranscript::new("backassisted_entanglement");
    // [C₁, A₁, C₂, A₂]
    let input = phi.tensor(&phi);
    t.push("prepare", &["C1", "A1", "C2", "A2"], "phi_d on C1,A1 and C2,A2");
    // → [C₁, B, C₂, E]
    let after = apply_isometry_pure(inst, &input, 1, 3)?;
    t.push("channel", &["A1", "A2"], "W=P(U(x)V); A2 discarded as E");
    t.push("announce", &["U", "V"], "receiver sends (U,V) back");
    let pair = match corrections {
        Corrections::Full => {
            let rotated = after.apply_unitary(&inst.v.conjugate(), &[2])?;
            t.push("undo_vT", &["C2"], "conj(V)");
            let undo_u = inst.u.conjugate();
            let mut probs = Vec::with_capacity(d);
            let mut branches = Vec::with_capacity(d);
            for j in 0..d {
                let branch = rotated.project(2, j)?;
                probs.push(branch.amplitudes().norm_squared());
                let fixed = branch.apply_unitary(&undo_u, &[0])?.apply_unitary(&z.pow((d - j) % d), &[0])?;
                branches.push(fixed.reduced(&[0, 1])?);
            }
            t.push("measure", &["C2"], format!("p={}", format_probs(&probs)));
            t.push("correct", &["C1"], "conj(U) then Z^-j");
            let weighted: Vec<(f64, &DensityMatrix)> = branches.iter().map(|b| (1.0, b)).collect();
            DensityMatrix::mixture(&weighted)?
        }
        Corrections::Skipped => {
            t.push("correct", &["C1"], "none");
            after.reduced(&[0, 1])?
        }
    };
    let fidelity = pair.fidelity_with(&phi)?.clamp(0.0, 1.0);
    t.channel_uses = 1;
    t.payload_bits = (d as f64).log2();
    t.fidelity = Some(fidelity);
    Ok((fidelity, t, pair))
}

/// Generalized Bell state `(X^a Z^b ⊗ I)|φ_d⟩`.
pub fn bell_state(d: usize, a: usize, b: usize) -> Result<PureState> {
    let (x, z) = generalized_paulis(d)?;
    max_entangled_state(d)?.apply_unitary(&x.pow(a).mul(&z.pow(b)), &[0])
}

/// Number of channel uses consumed by [`backassisted_classical`].
pub const BACKASSISTED_CHANNEL_USES: usize = 3;

/// Largest `d` for the full back-assisted classical simulation.
pub const BACKASSISTED_MAX_D: usize = 3;

#[derive(Debug, Clone)]
pub struct ClassicalRun {
    pub decoded: (usize, usize),
    /// Probability the Bell measurement assigns to the decoded message.
    pub confidence: f64,
    pub rate: f64,
    pub transcript: ProtocolTranscript,
}

/// Sends `(a, b) ∈ Z_d × Z_d` with three sampled instances: two establish
/// ebits by back-assistance, the third carries the superdense-coded qudit
/// through a reversal that consumes the first ebit.
pub fn backassisted_classical(d: usize, message: (usize, usize), stream: &RandomStream) -> Result<ClassicalRun> {
    let insts = sample_channel(&ChannelSampler::haar(d)?, BACKASSISTED_CHANNEL_USES, stream)?;
    backassisted_classical_with(d, message, &insts)
}

pub fn backassisted_classical_with(
    d: usize,
    message: (usize, usize),
    insts: &[ChannelInstance],
) -> Result<ClassicalRun> {
    if !(2..=BACKASSISTED_MAX_D).contains(&d) {
        return Err(LabError::UnsupportedDimension {
            dim: d,
            reason: "back-assisted classical protocol runs for d in {2, 3}",
        });
    }
    if insts.len() != BACKASSISTED_CHANNEL_USES {
        return Err(LabError::InvalidArgument(format!(
            "need {BACKASSISTED_CHANNEL_USES} instances, got {}",
            insts.len()
        )));
    }
    let (a, b) = message;
    if a >= d || b >= d {
        return Err(LabError::InvalidArgument(format!("message ({a},{b}) outside Z_{d} x Z_{d}")));
    }
    for inst in insts {
        check_protocol_dim(d, inst)?;
    }
    let mut t = ProtocolTranscript::new("backassisted_classical");
    let (f1, _, ebit1) = backassisted_entanglement_with(d, &insts[0], Corrections::Full)?;
    t.push("establish_ebit", &["C1", "B1"], format!("fidelity={f1:.12}"));
    let (f2, _, ebit2) = backassisted_entanglement_with(d, &insts[1], Corrections::Full)?;
    t.push("establish_ebit", &["C2", "B2"], format!("fidelity={f2:.12}"));

    let (x, z) = generalized_paulis(d)?;
    let encode: UnitaryMatrix = x.pow(a).mul(&z.pow(b));
    // [M = C₂, B₂]
    let encoded = ebit2.apply_unitary(&encode, &[0])?;
    t.push("encode", &["C2"], format!("X^{a} Z^{b}"));

    let mut sub = ProtocolTranscript::new("reversal");
    // message M with extra B₂, ebit [C₁, B₁] → [B, B₂]
    let received = reverse_through_channel(&insts[2], &encoded, &ebit1, Corrections::Full, &mut sub)?;
    for step in &sub.steps {
        let systems: Vec<&str> = step.systems.iter().map(String::as_str).collect();
        t.push(&format!("transmit_{}", step.label), &systems, step.outcome.clone());
    }

    let mut best = ((0, 0), f64::NEG_INFINITY);
    let mut probs = Vec::with_capacity(d * d);
    for a2 in 0..d {
        for b2 in 0..d {
            let p = received.fidelity_with(&bell_state(d, a2, b2)?)?;
            probs.push(p);
            if p > best.1 {
                best = ((a2, b2), p);
            }
        }
    }
    t.push("bell_measure", &["B", "B2"], format!("p={}", format_probs(&probs)));
    t.channel_uses = BACKASSISTED_CHANNEL_USES;
    t.ebits_consumed = 2;
    t.payload_bits = 2.0 * (d as f64).log2();
    t.decoded = Some(best.0);
    let rate = t.rate();
    Ok(ClassicalRun { decoded: best.0, confidence: best.1, rate, transcript: t })
}

/// Per-branch coherent information of `R_d ⊗ A_d^e` on
/// `|φ_d⟩_{AA₁}|φ_d⟩_{B′A₂}`, with `B′` sent through the erasure channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointCIResult {
    pub d: usize,
    pub nonerased: f64,
    pub erased: f64,
    pub average: f64,
}

fn joint_output(d: usize, inst: &ChannelInstance) -> Result<DensityMatrix> {
    check_protocol_dim(d, inst)?;
    let phi = max_entangled_state(d)?;
    // [A, A₁, B′, A₂] → [A, B, B′, E]
    apply_isometry_pure(inst, &phi.tensor(&phi), 1, 3)?.reduced(&[0, 1, 2])
}

pub fn joint_coherent_info(d: usize, inst: &ChannelInstance) -> Result<JointCIResult> {
    let out = joint_output(d, inst)?;
    let branches = apply_erasure(&ErasureChannel::new(d)?, &out, 2)?;
    let ci = |label| -> Result<(f64, f64)> {
        let b = branches.branch(label).expect("both branches present");
        Ok((b.probability, coherent_information(&b.state, &[0])?))
    };
    let (p_kept, nonerased) = ci(BranchLabel::Kept)?;
    let (p_erased, erased) = ci(BranchLabel::Erased)?;
    Ok(JointCIResult { d, nonerased, erased, average: p_kept * nonerased + p_erased * erased })
}

/// Probe mode: `B′` delivered intact instead of through the erasure channel.
pub fn joint_coherent_info_unerased(d: usize, inst: &ChannelInstance) -> Result<f64> {
    coherent_information(&joint_output(d, inst)?, &[0])
}

#[derive(Debug, Clone, PartialEq)]
pub struct NonadditivityReport {
    pub d: usize,
    pub joint: JointCIResult,
    /// Input dimension `D = d²` of the phase coupling channel.
    pub input_dimension: usize,
    pub log2_input_dimension: f64,
    /// `joint.average / log₂ D`.
    pub violation_ratio: f64,
    /// Upper bound 2 on the classical (hence private) capacity of the phase
    /// coupling channel; supported numerically by the Holevo suite.
    pub classical_capacity_bound: f64,
    /// Private capacity of the erasure channel, a cited value.
    pub erasure_private_capacity: f64,
    pub notes: Vec<String>,
}

pub const QUARTER_TOL: f64 = 1e-6;

impl NonadditivityReport {
    pub fn ratio_is_quarter(&self) -> bool {
        (self.violation_ratio - 0.25).abs() <= QUARTER_TOL
    }
}

pub fn nonadditivity_report(d: usize, inst: &ChannelInstance) -> Result<NonadditivityReport> {
    let joint = joint_coherent_info(d, inst)?;
    let input_dimension = d * d;
    let log2_input_dimension = (input_dimension as f64).log2();
    Ok(NonadditivityReport {
        d,
        joint,
        input_dimension,
        log2_input_dimension,
        violation_ratio: joint.average / log2_input_dimension,
        classical_capacity_bound: 2.0,
        erasure_private_capacity: 0.0,
        notes: vec![
            "C(R_d)<=2: analytic bound, supported by sampled Holevo evidence".to_string(),
            "P(A_d^e)=0: cited result, not verified".to_string(),
        ],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::haar_unitary;
    use crate::info::random_pure_state;
    use crate::qstate::SubsystemLayout;
    use approx::assert_abs_diff_eq;

    fn random_instance(d: usize, seed: u64) -> ChannelInstance {
        sample_channel(&ChannelSampler::haar(d).unwrap(), 1, &RandomStream::new(seed)).unwrap().remove(0)
    }

    #[test]
    fn reversal_identity_instance() {
        let psi = PureState::basis(SubsystemLayout::new(vec![2]).unwrap(), 0).unwrap();
        let (f, t) = fig2_reversal(2, &ChannelInstance::identity(2), &psi).unwrap();
        assert_abs_diff_eq!(f, 1.0, epsilon = 1e-12);
        assert_eq!(t.rate(), 1.0);
    }

    #[test]
    fn reversal_random_instances() {
        for d in 2..=5 {
            for k in 0..5 {
                let inst = random_instance(d, 100 * d as u64 + k);
                let psi = random_pure_state(&SubsystemLayout::new(vec![d]).unwrap(), &RandomStream::new(k)).unwrap();
                let (f, _) = fig2_reversal(d, &inst, &psi).unwrap();
                assert!((f - 1.0).abs() < 1e-9, "d={d} f={f}");
            }
        }
    }

    #[test]
    fn reversal_negative_control_matches_dephased_overlap() {
        let d = 3;
        for k in 0..5 {
            let inst = random_instance(d, 40 + k);
            let psi = random_pure_state(&SubsystemLayout::new(vec![d]).unwrap(), &RandomStream::new(k)).unwrap();
            let (f, _) = fig2_reversal_with(d, &inst, &psi, Corrections::Skipped).unwrap();
            let upsi = inst.u.matrix() * psi.amplitudes();
            let oracle: f64 = upsi.iter().map(|z| z.norm_sqr().powi(2)).sum();
            assert_abs_diff_eq!(f, oracle, epsilon = 1e-10);
        }
    }

    #[test]
    fn reversal_vector_and_density_paths_agree() {
        let d = 3;
        let layout = SubsystemLayout::new(vec![d]).unwrap();
        for k in 0..3 {
            let inst = random_instance(d, 500 + k);
            let psi = random_pure_state(&layout, &RandomStream::new(k)).unwrap();
            let ebit = max_entangled_state(d).unwrap().density();
            for mode in [Corrections::Full, Corrections::Skipped] {
                let mut t = ProtocolTranscript::new("check");
                let b = reverse_through_channel(&inst, &psi.density(), &ebit, mode, &mut t).unwrap();
                let (f, transcript) = fig2_reversal_with(d, &inst, &psi, mode).unwrap();
                assert_abs_diff_eq!(b.fidelity_with(&psi).unwrap(), f, epsilon = 1e-10);
                assert_eq!(transcript.steps, t.steps);
            }
        }
    }

    #[test]
    fn entanglement_establishment() {
        let (f, _) = backassisted_entanglement(3, &ChannelInstance::identity(3)).unwrap();
        assert_abs_diff_eq!(f, 1.0, epsilon = 1e-12);
        for d in 2..=4 {
            for k in 0..5 {
                let (f, t) = backassisted_entanglement(d, &random_instance(d, 7 * k + d as u64)).unwrap();
                assert!((f - 1.0).abs() < 1e-9);
                assert_eq!(t.fidelity, Some(f));
            }
        }
    }

    #[test]
    fn entanglement_negative_control_oracle() {
        let d = 3;
        let inst = random_instance(d, 3);
        let (f, _, _) = backassisted_entanglement_with(d, &inst, Corrections::Skipped).unwrap();
        let (_, z) = generalized_paulis(d).unwrap();
        let oracle: f64 =
            (0..d).map(|j| (z.pow(j).matrix() * inst.u.matrix()).trace().norm_sqr() / (d * d) as f64).sum::<f64>()
                / d as f64;
        assert_abs_diff_eq!(f, oracle, epsilon = 1e-10);
    }

    #[test]
    fn classical_trivial_instance() {
        let insts = vec![ChannelInstance::identity(2); 3];
        let run = backassisted_classical_with(2, (0, 0), &insts).unwrap();
        assert_eq!(run.decoded, (0, 0));
        assert_abs_diff_eq!(run.confidence, 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(run.rate, 2.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn classical_rejects_bad_inputs() {
        let s = RandomStream::new(1);
        assert!(backassisted_classical(4, (0, 0), &s).is_err());
        assert!(backassisted_classical(2, (2, 0), &s).is_err());
        assert!(backassisted_classical_with(2, (0, 0), &[ChannelInstance::identity(2)]).is_err());
    }

    #[test]
    fn joint_ci_values() {
        for d in [2, 3, 5] {
            let r = joint_coherent_info(d, &random_instance(d, d as u64)).unwrap();
            let l = (d as f64).log2();
            assert_abs_diff_eq!(r.nonerased, l, epsilon = 1e-6);
            assert_abs_diff_eq!(r.erased, 0.0, epsilon = 1e-9);
            assert_abs_diff_eq!(r.average, l / 2.0, epsilon = 1e-6);
        }
        let probe = joint_coherent_info_unerased(2, &random_instance(2, 4)).unwrap();
        assert_abs_diff_eq!(probe, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn joint_ci_matches_flattened_output() {
        let d = 3;
        let inst = random_instance(d, 77);
        let out = joint_output(d, &inst).unwrap();
        let flat = apply_erasure(&ErasureChannel::new(d).unwrap(), &out, 2).unwrap().flatten().unwrap();
        let r = joint_coherent_info(d, &inst).unwrap();
        assert_abs_diff_eq!(coherent_information(&flat, &[0]).unwrap(), r.average, epsilon = 1e-9);
    }

    #[test]
    fn report_ratio() {
        let r = nonadditivity_report(9, &random_instance(9, 2)).unwrap();
        assert_abs_diff_eq!(r.joint.average, 9f64.log2() / 2.0, epsilon = 1e-6);
        assert_abs_diff_eq!(r.log2_input_dimension, 81f64.log2(), epsilon = 1e-12);
        assert!(r.ratio_is_quarter());
        assert!(r.notes.iter().any(|n| n.starts_with("P(A_d^e)=0")));
    }

    #[test]
    fn transcript_round_trip() {
        let inst = ChannelInstance::new(
            haar_unitary(2, &RandomStream::new(1)).unwrap(),
            haar_unitary(2, &RandomStream::new(2)).unwrap(),
        )
        .unwrap();
        let run = backassisted_classical_with(2, (1, 1), &[inst.clone(), inst.clone(), inst]).unwrap();
        let text = run.transcript.to_text();
        assert!(text.starts_with("# transcript v1 protocol=backassisted_classical\n"));
        let parsed = ProtocolTranscript::from_text(&text).unwrap();
        assert_eq!(parsed.steps, run.transcript.steps);
        assert_eq!(parsed.decoded, Some((1, 1)));
        assert_eq!(parsed.rate(), run.rate);
        assert!(ProtocolTranscript::from_text("garbage").is_err());
    }
}
