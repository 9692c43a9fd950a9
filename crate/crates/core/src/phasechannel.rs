//! The random phase coupling channel and the 50% erasure channel.
//!
//! A channel instance is a fixed pair `(U, V)`; the channel itself is the
//! distribution over instances, with `(U, V)` handed to the receiver as a
//! classical label. Everything here works per instance.

use num_complex::Complex64;

use crate::ensembles::{clifford_group, RandomStream, UnitaryEnsemble};
use crate::error::{LabError, Result};
use crate::qstate::{root_of_unity, CMatrix, DensityMatrix, PureState, SubsystemLayout, UnitaryMatrix};

/// Largest local dimension for full-state simulation.
pub const MAX_DIM: usize = 16;
/// Largest number of channel copies for full-state simulation.
pub const MAX_COPIES: usize = 3;

/// Diagonal gate `Σ ω^{ij} |i⟩⟨i| ⊗ |j⟩⟨j|` on `d ⊗ d`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseGate {
    pub d: usize,
    pub matrix: UnitaryMatrix,
}

pub fn controlled_phase(d: usize) -> Result<PhaseGate> {
    if d == 0 {
        return Err(LabError::UnsupportedDimension { dim: d, reason: "dimension must be positive" });
    }
    let diag: Vec<Complex64> = (0..d * d).map(|k| root_of_unity(d, ((k / d) * (k % d)) as i64)).collect();
    let matrix = UnitaryMatrix::new_unchecked(CMatrix::from_diagonal(&nalgebra::DVector::from_vec(diag)));
    Ok(PhaseGate { d, matrix })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Explicit,
    Sampled { seed: u64, stream_id: u64, copy: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelInstance {
    pub d: usize,
    pub u: UnitaryMatrix,
    pub v: UnitaryMatrix,
    pub provenance: Provenance,
}

impl ChannelInstance {
    pub fn new(u: UnitaryMatrix, v: UnitaryMatrix) -> Result<Self> {
        let d = u.dim();
        if v.dim() != d {
            return Err(LabError::DimensionMismatch { expected: d, got: v.dim() });
        }
        if d == 0 {
            return Err(LabError::UnsupportedDimension { dim: d, reason: "dimension must be positive" });
        }
        Ok(Self { d, u, v, provenance: Provenance::Explicit })
    }

    pub fn identity(d: usize) -> Self {
        Self { d, u: UnitaryMatrix::identity(d), v: UnitaryMatrix::identity(d), provenance: Provenance::Explicit }
    }
}

/// `W = P (U ⊗ V)`, mapping `A₁A₂` to `BE`.
pub fn channel_isometry(inst: &ChannelInstance) -> UnitaryMatrix {
    let d = inst.d;
    let mut w = inst.u.tensor(&inst.v).into_matrix();
    for (k, mut row) in w.row_iter_mut().enumerate() {
        row *= root_of_unity(d, ((k / d) * (k % d)) as i64);
    }
    UnitaryMatrix::new_unchecked(w)
}

fn check_pair(layout: &SubsystemLayout, d: usize, a1: usize, a2: usize) -> Result<()> {
    layout.check_indices(&[a1, a2])?;
    for k in [a1, a2] {
        if layout.dims()[k] != d {
            return Err(LabError::DimensionMismatch { expected: d, got: layout.dims()[k] });
        }
    }
    Ok(())
}

/// Applies `W` to subsystems `(a1, a2)` of a pure state; nothing is traced.
/// Subsystem `a1` then holds `B` and `a2` holds `E`.
pub fn apply_isometry_pure(inst: &ChannelInstance, input: &PureState, a1: usize, a2: usize) -> Result<PureState> {
    check_pair(input.layout(), inst.d, a1, a2)?;
    input.apply_unitary(&channel_isometry(inst), &[a1, a2])
}

/// `R_{UV}` on subsystems `(a1, a2)`: applies `W`, traces out `a2`. The
/// output keeps every other subsystem in its original order, with `B` in
/// the slot `a1` occupied.
pub fn apply_instance(inst: &ChannelInstance, input: &DensityMatrix, a1: usize, a2: usize) -> Result<DensityMatrix> {
    check_pair(input.layout(), inst.d, a1, a2)?;
    let after = input.apply_unitary(&channel_isometry(inst), &[a1, a2])?;
    let keep: Vec<usize> = (0..input.layout().len()).filter(|&k| k != a2).collect();
    after.partial_trace(&keep)
}

/// Output on `B₁…B_n` of `n` instances fed a pure input laid out
/// `[A₁⁽¹⁾, A₂⁽¹⁾, …, A₁⁽ⁿ⁾, A₂⁽ⁿ⁾]`.
pub fn apply_copies_pure(insts: &[ChannelInstance], input: &PureState) -> Result<DensityMatrix> {
    let n = insts.len();
    let dims = input.layout().dims();
    if n == 0 || dims.len() != 2 * n {
        return Err(LabError::InvalidLayout(format!("{n} instances need {} subsystems, got {}", 2 * n, dims.len())));
    }
    let mut state = input.clone();
    for (l, inst) in insts.iter().enumerate() {
        state = apply_isometry_pure(inst, &state, 2 * l, 2 * l + 1)?;
    }
    let outputs: Vec<usize> = (0..n).map(|l| 2 * l).collect();
    state.reduced(&outputs)
}

/// Density-matrix version of [`apply_copies_pure`].
pub fn apply_copies(insts: &[ChannelInstance], input: &DensityMatrix) -> Result<DensityMatrix> {
    let n = insts.len();
    if n == 0 || input.layout().len() != 2 * n {
        return Err(LabError::InvalidLayout(format!(
            "{n} instances need {} subsystems, got {}",
            2 * n,
            input.layout().len()
        )));
    }
    let mut state = input.clone();
    for (l, inst) in insts.iter().enumerate() {
        check_pair(state.layout(), inst.d, 2 * l, 2 * l + 1)?;
        state = state.apply_unitary(&channel_isometry(inst), &[2 * l, 2 * l + 1])?;
    }
    let outputs: Vec<usize> = (0..n).map(|l| 2 * l).collect();
    state.partial_trace(&outputs)
}

pub const ERASURE_PROBABILITY: f64 = 0.5;

/// The 50% erasure channel on a `d`-dimensional system. Erasure replaces the
/// system by the flag `|d⟩` of a `(d+1)`-dimensional output space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ErasureChannel {
    pub d: usize,
}

impl ErasureChannel {
    pub fn new(d: usize) -> Result<Self> {
        if d == 0 {
            return Err(LabError::UnsupportedDimension { dim: d, reason: "dimension must be positive" });
        }
        Ok(Self { d })
    }

    pub fn probability(&self) -> f64 {
        ERASURE_PROBABILITY
    }

    pub fn flag_state(&self) -> DensityMatrix {
        let mut m = CMatrix::zeros(self.d + 1, self.d + 1);
        m[(self.d, self.d)] = Complex64::new(1.0, 0.0);
        DensityMatrix::new_unchecked(m, SubsystemLayout::new(vec![self.d + 1]).expect("positive"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BranchLabel {
    Kept,
    Erased,
}

impl BranchLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Kept => "kept",
            Self::Erased => "erased",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub probability: f64,
    pub label: BranchLabel,
    pub state: DensityMatrix,
}

/// Classically flagged output branches of the erasure channel. The kept
/// branch carries the input unchanged; the erased branch has the target
/// slot replaced by the `(d+1)`-dimensional flag.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchedOutput {
    pub target: usize,
    pub d: usize,
    pub branches: Vec<Branch>,
}

impl BranchedOutput {
    pub fn branch(&self, label: BranchLabel) -> Option<&Branch> {
        self.branches.iter().find(|b| b.label == label)
    }

    pub fn total_probability(&self) -> f64 {
        self.branches.iter().map(|b| b.probability).sum()
    }

    /// Single state on the `(d+1)`-dimensional output, kept branches embedded
    /// in the first `d` levels.
    pub fn flatten(&self) -> Result<DensityMatrix> {
        let mut acc: Option<DensityMatrix> = None;
        for b in &self.branches {
            let embedded = match b.label {
                BranchLabel::Erased => b.state.clone(),
                BranchLabel::Kept => embed_level(&b.state, self.target, self.d)?,
            };
            acc = Some(match acc {
                None => embedded.scaled(b.probability),
                Some(prev) => DensityMatrix::mixture(&[(1.0, &prev), (b.probability, &embedded)])?,
            });
        }
        acc.ok_or_else(|| LabError::InvalidProbabilities("no branches".into()))
    }
}

/// Embeds subsystem `target` (dimension `d`) into dimension `d + 1`.
fn embed_level(rho: &DensityMatrix, target: usize, d: usize) -> Result<DensityMatrix> {
    let iso =
        CMatrix::from_fn(d + 1, d, |r, c| if r == c { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) });
    let mut dims = rho.layout().dims().to_vec();
    dims[target] = d + 1;
    let layout = SubsystemLayout::new(dims)?;
    let mut full = CMatrix::identity(1, 1);
    for (k, &dk) in rho.layout().dims().iter().enumerate() {
        full = if k == target { full.kronecker(&iso) } else { full.kronecker(&CMatrix::identity(dk, dk)) };
    }
    Ok(DensityMatrix::new_unchecked(&full * rho.matrix() * full.adjoint(), layout))
}

pub fn apply_erasure(chan: &ErasureChannel, input: &DensityMatrix, target: usize) -> Result<BranchedOutput> {
    let layout = input.layout();
    layout.check_indices(&[target])?;
    if layout.dims()[target] != chan.d {
        return Err(LabError::DimensionMismatch { expected: chan.d, got: layout.dims()[target] });
    }
    let rest: Vec<usize> = layout.complement(&[target]);
    let erased = if rest.is_empty() {
        chan.flag_state()
    } else {
        // flag appended last, then moved back into the target slot
        let reduced = input.partial_trace(&rest)?.tensor(&chan.flag_state());
        let mut order: Vec<usize> = (0..rest.len()).collect();
        order.insert(target, rest.len());
        reduced.permute(&order)?
    };
    let p = chan.probability();
    Ok(BranchedOutput {
        target,
        d: chan.d,
        branches: vec![
            Branch { probability: 1.0 - p, label: BranchLabel::Kept, state: input.clone() },
            Branch { probability: p, label: BranchLabel::Erased, state: erased },
        ],
    })
}

/// Independent distributions for `U` and `V`.
#[derive(Debug, Clone)]
pub struct ChannelSampler {
    pub u: UnitaryEnsemble,
    pub v: UnitaryEnsemble,
}

impl ChannelSampler {
    pub fn haar(d: usize) -> Result<Self> {
        Ok(Self { u: UnitaryEnsemble::haar(d)?, v: UnitaryEnsemble::haar(d)? })
    }

    pub fn clifford(d: usize) -> Result<Self> {
        let g = clifford_group(d)?;
        Ok(Self { u: g.clone(), v: g })
    }

    pub fn new(u: UnitaryEnsemble, v: UnitaryEnsemble) -> Result<Self> {
        if u.dim() != v.dim() {
            return Err(LabError::DimensionMismatch { expected: u.dim(), got: v.dim() });
        }
        Ok(Self { u, v })
    }

    pub fn dim(&self) -> usize {
        self.u.dim()
    }
}

/// `n` independent instances; copy `l` draws `U` then `V` from
/// `stream.substream(l)`.
pub fn sample_channel(sampler: &ChannelSampler, n: usize, stream: &RandomStream) -> Result<Vec<ChannelInstance>> {
    let d = sampler.dim();
    if n == 0 || n > MAX_COPIES {
        return Err(LabError::InvalidArgument(format!("copies must be in 1..={MAX_COPIES}, got {n}")));
    }
    if d > MAX_DIM {
        return Err(LabError::UnsupportedDimension { dim: d, reason: "full-state simulation limited to d <= 16" });
    }
    Ok((0..n)
        .map(|copy| {
            let sub = stream.substream(copy as u64);
            let mut rng = sub.rng();
            let u = sampler.u.draw(&mut rng);
            let v = sampler.v.draw(&mut rng);
            ChannelInstance {
                d,
                u,
                v,
                provenance: Provenance::Sampled { seed: sub.seed, stream_id: sub.stream_id, copy },
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::haar_unitary;
    use crate::qstate::{max_entangled_state, purity, unitarity_deviation, von_neumann_entropy};
    use approx::assert_abs_diff_eq;

    fn maxdiff(a: &CMatrix, b: &CMatrix) -> f64 {
        (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn random_instance(d: usize, seed: u64) -> ChannelInstance {
        let s = RandomStream::new(seed);
        ChannelInstance::new(haar_unitary(d, &s.substream(0)).unwrap(), haar_unitary(d, &s.substream(1)).unwrap())
            .unwrap()
    }

    #[test]
    fn phase_gate_examples() {
        assert_eq!(controlled_phase(1).unwrap().matrix.matrix()[(0, 0)], c(1.0));
        let p2 = controlled_phase(2).unwrap();
        let expect = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(1.0), c(1.0), c(1.0), c(-1.0)]));
        assert!(maxdiff(p2.matrix.matrix(), &expect) < 1e-15);
        let p3 = controlled_phase(3).unwrap();
        let w = p3.matrix.matrix()[(4, 4)];
        assert!((w - root_of_unity(3, 1)).norm() < 1e-15);
    }

    #[test]
    fn isometry_examples() {
        let w = channel_isometry(&ChannelInstance::identity(2));
        assert!(maxdiff(w.matrix(), controlled_phase(2).unwrap().matrix.matrix()) < 1e-15);
        assert_eq!(w.matrix()[(0, 0)], c(1.0));
        for d in 2..=9 {
            let inst = random_instance(d, d as u64);
            let w = channel_isometry(&inst);
            assert!(unitarity_deviation(w.matrix()) < 1e-12);
            let product = controlled_phase(d).unwrap().matrix.mul(&inst.u.tensor(&inst.v));
            assert!(maxdiff(w.matrix(), product.matrix()) < 1e-13);
        }
    }

    #[test]
    fn identity_instance_on_basis_inputs() {
        let d = 3;
        let layout = SubsystemLayout::uniform(d, 2).unwrap();
        for i in 0..d {
            for j in 0..d {
                let input = PureState::basis_digits(layout.clone(), &[i, j]).unwrap().density();
                let out = apply_instance(&ChannelInstance::identity(d), &input, 0, 1).unwrap();
                let mut expect = CMatrix::zeros(d, d);
                expect[(i, i)] = c(1.0);
                assert!(maxdiff(out.matrix(), &expect) < 1e-12);
            }
        }
    }

    #[test]
    fn superposition_is_dephased_by_mixed_partner() {
        // oracle: (1/2) Σ_j Z^j |+⟩⟨+| Z^{-j} = diag(1/2, 1/2)
        let plus = PureState::normalized(
            nalgebra::DVector::from_vec(vec![c(1.0), c(1.0)]),
            SubsystemLayout::new(vec![2]).unwrap(),
        )
        .unwrap();
        let mixed = DensityMatrix::maximally_mixed(SubsystemLayout::new(vec![2]).unwrap());
        let input = plus.density().tensor(&mixed);
        let out = apply_instance(&ChannelInstance::identity(2), &input, 0, 1).unwrap();
        let expect = CMatrix::identity(2, 2).scale(0.5);
        assert!(maxdiff(out.matrix(), &expect) < 1e-12);
    }

    #[test]
    fn reference_systems_and_unitality() {
        let d = 3;
        let inst = random_instance(d, 5);
        // A₁ maximally mixed, A₂ half of φ_d with reference B′
        let input = DensityMatrix::maximally_mixed(SubsystemLayout::new(vec![d]).unwrap())
            .tensor(&max_entangled_state(d).unwrap().density());
        let out = apply_instance(&inst, &input, 0, 1).unwrap();
        assert_eq!(out.layout().dims(), &[d, d]);
        assert_abs_diff_eq!(out.trace(), 1.0, epsilon = 1e-10);
        let b = out.partial_trace(&[0]).unwrap();
        assert!(maxdiff(b.matrix(), &CMatrix::identity(d, d).unscale(d as f64)) < 1e-12);
        // reference untouched
        let r = out.partial_trace(&[1]).unwrap();
        assert!(maxdiff(r.matrix(), &CMatrix::identity(d, d).unscale(d as f64)) < 1e-12);
    }

    #[test]
    fn layout_mismatch_rejected() {
        let inst = ChannelInstance::identity(2);
        let input = DensityMatrix::maximally_mixed(SubsystemLayout::new(vec![2, 3]).unwrap());
        assert!(apply_instance(&inst, &input, 0, 1).is_err());
        let input = DensityMatrix::maximally_mixed(SubsystemLayout::new(vec![2, 2]).unwrap());
        assert!(apply_instance(&inst, &input, 0, 0).is_err());
        assert!(apply_instance(&inst, &input, 0, 2).is_err());
    }

    #[test]
    fn diagonal_covariance() {
        let d = 3;
        let inst = random_instance(d, 9);
        let g = UnitaryMatrix::new(CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            root_of_unity(7, 1),
            root_of_unity(7, 3),
            root_of_unity(7, 6),
        ])))
        .unwrap();
        let psi = PureState::normalized(
            nalgebra::DVector::from_fn(d * d, |i, _| Complex64::new(1.0 + i as f64, 0.5 * i as f64)),
            SubsystemLayout::uniform(d, 2).unwrap(),
        )
        .unwrap()
        .density();
        let shifted = ChannelInstance::new(g.mul(&inst.u), inst.v.clone()).unwrap();
        let lhs = apply_instance(&shifted, &psi, 0, 1).unwrap();
        let rhs = apply_instance(&inst, &psi, 0, 1).unwrap().apply_unitary(&g, &[0]).unwrap();
        assert!(maxdiff(lhs.matrix(), rhs.matrix()) < 1e-12);
    }

    #[test]
    fn mixed_partner_dephases_completely() {
        let d = 4;
        let inst = random_instance(d, 13);
        let psi = PureState::normalized(
            nalgebra::DVector::from_fn(d, |i, _| Complex64::new(1.0, i as f64)),
            SubsystemLayout::new(vec![d]).unwrap(),
        )
        .unwrap();
        let input = psi.density().tensor(&DensityMatrix::maximally_mixed(SubsystemLayout::new(vec![d]).unwrap()));
        let out = apply_instance(&inst, &input, 0, 1).unwrap();
        for r in 0..d {
            for col in 0..d {
                if r != col {
                    assert!(out.matrix()[(r, col)].norm() < 1e-10);
                }
            }
        }
        // diagonal equals |U ψ|² in the computational basis
        let upsi = inst.u.matrix() * psi.amplitudes();
        for r in 0..d {
            assert_abs_diff_eq!(out.matrix()[(r, r)].re, upsi[r].norm_sqr(), epsilon = 1e-12);
        }
    }

    #[test]
    fn pure_and_mixed_paths_agree() {
        let d = 3;
        let insts = sample_channel(&ChannelSampler::haar(d).unwrap(), 2, &RandomStream::new(21)).unwrap();
        let psi = PureState::normalized(
            nalgebra::DVector::from_fn(d.pow(4), |i, _| Complex64::new((i as f64).sin(), (i as f64).cos())),
            SubsystemLayout::uniform(d, 4).unwrap(),
        )
        .unwrap();
        let a = apply_copies_pure(&insts, &psi).unwrap();
        let b = apply_copies(&insts, &psi.density()).unwrap();
        assert!(maxdiff(a.matrix(), b.matrix()) < 1e-12);
        assert_abs_diff_eq!(a.trace(), 1.0, epsilon = 1e-10);
        assert!(von_neumann_entropy(&a).unwrap() >= -purity(&a).log2() - 1e-10);
    }

    #[test]
    fn erasure_branches() {
        let d = 3;
        let chan = ErasureChannel::new(d).unwrap();
        let mixed = DensityMatrix::maximally_mixed(SubsystemLayout::new(vec![d]).unwrap());
        let out = apply_erasure(&chan, &mixed, 0).unwrap();
        assert_eq!(out.branches.iter().map(|b| b.probability).collect::<Vec<_>>(), vec![0.5, 0.5]);
        assert_eq!(out.branch(BranchLabel::Kept).unwrap().state, mixed);
        assert_eq!(out.branch(BranchLabel::Erased).unwrap().state, chan.flag_state());
        let flat = out.flatten().unwrap();
        assert_abs_diff_eq!(flat.trace(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(flat.matrix()[(d, d)].re, 0.5, epsilon = 1e-12);

        // half of φ_d: kept branch keeps log d of entanglement, erased branch
        // leaves the reference maximally mixed next to the flag
        let phi = max_entangled_state(d).unwrap().density();
        let out = apply_erasure(&chan, &phi, 1).unwrap();
        let kept = &out.branch(BranchLabel::Kept).unwrap().state;
        let s_ref = von_neumann_entropy(&kept.partial_trace(&[0]).unwrap()).unwrap();
        assert_abs_diff_eq!(s_ref, (d as f64).log2(), epsilon = 1e-10);
        assert_abs_diff_eq!(von_neumann_entropy(kept).unwrap(), 0.0, epsilon = 1e-10);
        let erased = &out.branch(BranchLabel::Erased).unwrap().state;
        assert_eq!(erased.layout().dims(), &[d, d + 1]);
        let expect = CMatrix::identity(d, d).unscale(d as f64).kronecker(chan.flag_state().matrix());
        assert!(maxdiff(erased.matrix(), &expect) < 1e-12);
        assert_abs_diff_eq!(out.flatten().unwrap().trace(), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn erasure_flag_stays_in_slot() {
        let chan = ErasureChannel::new(2).unwrap();
        let rho = DensityMatrix::maximally_mixed(SubsystemLayout::new(vec![3, 2, 5]).unwrap());
        let out = apply_erasure(&chan, &rho, 1).unwrap();
        assert_eq!(out.branch(BranchLabel::Erased).unwrap().state.layout().dims(), &[3, 3, 5]);
        assert!(apply_erasure(&chan, &rho, 0).is_err());
    }

    #[test]
    fn sampling_contract() {
        let sampler = ChannelSampler::haar(3).unwrap();
        let s = RandomStream::new(77);
        let a = sample_channel(&sampler, 1, &s).unwrap();
        let b = sample_channel(&sampler, 1, &s).unwrap();
        assert_eq!(a, b);
        let two = sample_channel(&sampler, 2, &s).unwrap();
        assert_eq!(two[0], a[0]);
        assert!(maxdiff(two[0].u.matrix(), two[1].u.matrix()) > 1e-3);
        assert!(sample_channel(&sampler, 0, &s).is_err());
        assert!(sample_channel(&sampler, 4, &s).is_err());

        let cliff = ChannelSampler::clifford(2).unwrap();
        let group = clifford_group(2).unwrap();
        for inst in sample_channel(&cliff, 3, &s).unwrap() {
            assert!(group.index_of(&inst.u).is_some());
            assert!(group.index_of(&inst.v).is_some());
        }
    }
}
