//! Random and structured unitary sources.
//!
//! All randomness flows through [`RandomStream`], a `(seed, stream id)` pair
//! that selects an independent ChaCha20 keystream. Monte Carlo drivers give
//! each sample its own [`RandomStream::substream`], so results never depend
//! on how samples are spread over worker threads.

use std::collections::{HashMap, VecDeque};
use std::sync::{Arc, OnceLock};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::error::{LabError, Result};
use crate::qstate::{
    conjugate_subsystems, fourier_matrix, generalized_paulis, root_of_unity, CMatrix, DensityMatrix, SubsystemLayout,
    UnitaryMatrix,
};
use crate::schur::sector_projectors;

pub const STREAM_ALGORITHM: &str = "chacha20";

/// Tolerance used to identify unitaries that differ by a global phase.
pub const PHASE_DEDUP_TOL: f64 = 1e-8;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RandomStream {
    pub seed: u64,
    pub stream_id: u64,
}

impl RandomStream {
    pub fn new(seed: u64) -> Self {
        Self { seed, stream_id: 0 }
    }

    pub fn with_stream(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }

    /// Child stream for draw `index`; a pure function of `(seed, stream_id, index)`.
    pub fn substream(&self, index: u64) -> Self {
        let id = splitmix64(splitmix64(self.stream_id ^ 0x005E_ED0F_57EA) ^ index);
        Self { seed: self.seed, stream_id: id }
    }

    pub fn rng(&self) -> ChaCha20Rng {
        let mut rng = ChaCha20Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }

    pub fn algorithm(&self) -> &'static str {
        STREAM_ALGORITHM
    }
}

pub(crate) fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Haar-random unitary: QR of a complex Ginibre matrix with the phases of
/// `diag(R)` folded back into `Q`.
pub fn haar_unitary_with<R: Rng + ?Sized>(d: usize, rng: &mut R) -> UnitaryMatrix {
    let g = CMatrix::from_fn(d, d, |_, _| complex_gaussian(rng));
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for k in 0..d {
        let diag = r[(k, k)];
        let norm = diag.norm();
        let phase = if norm > 0.0 { diag / norm } else { Complex64::new(1.0, 0.0) };
        for i in 0..d {
            q[(i, k)] *= phase;
        }
    }
    UnitaryMatrix::new_unchecked(q)
}

pub fn haar_unitary(d: usize, stream: &RandomStream) -> Result<UnitaryMatrix> {
    if d == 0 {
        return Err(LabError::UnsupportedDimension { dim: d, reason: "dimension must be positive" });
    }
    Ok(haar_unitary_with(d, &mut stream.rng()))
}

pub fn is_prime(n: usize) -> bool {
    n >= 2 && (2..n).take_while(|k| k * k <= n).all(|k| !n.is_multiple_of(k))
}

/// Multiplies by the phase that makes the first entry (row-major) with
/// modulus above the dedup tolerance real and positive.
pub fn canonical_phase(m: &CMatrix) -> CMatrix {
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            let z = m[(r, c)];
            if z.norm() > PHASE_DEDUP_TOL {
                return m * (z.conj() / z.norm());
            }
        }
    }
    m.clone()
}

fn phase_key(m: &CMatrix) -> Vec<(i64, i64)> {
    let scale = 1e6;
    let mut key = Vec::with_capacity(m.len());
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            let z = m[(r, c)];
            key.push(((z.re * scale).round() as i64, (z.im * scale).round() as i64));
        }
    }
    key
}

fn equal_up_to_phase(a: &CMatrix, b: &CMatrix) -> bool {
    (canonical_phase(a) - canonical_phase(b)).iter().all(|z| z.norm() <= PHASE_DEDUP_TOL)
}

/// Lookup table of phase classes for a finite set of unitaries.
#[derive(Debug, Clone)]
pub struct PhaseClassIndex {
    elements: Vec<UnitaryMatrix>,
    lookup: HashMap<Vec<(i64, i64)>, Vec<usize>>,
}

impl PhaseClassIndex {
    fn new() -> Self {
        Self { elements: Vec::new(), lookup: HashMap::new() }
    }

    pub fn find(&self, m: &CMatrix) -> Option<usize> {
        let canon = canonical_phase(m);
        let candidates = self.lookup.get(&phase_key(&canon))?;
        candidates
            .iter()
            .copied()
            .find(|&i| (self.elements[i].matrix() - &canon).iter().all(|z| z.norm() <= PHASE_DEDUP_TOL))
    }

    /// Inserts the canonical representative unless its class is present.
    fn insert(&mut self, m: CMatrix) -> Option<usize> {
        if self.find(&m).is_some() {
            return None;
        }
        let canon = canonical_phase(&m);
        let idx = self.elements.len();
        self.lookup.entry(phase_key(&canon)).or_default().push(idx);
        self.elements.push(UnitaryMatrix::new_unchecked(canon));
        Some(idx)
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[UnitaryMatrix] {
        &self.elements
    }
}

/// Quadratic phase gate: `diag(1, i)` for `d = 2`, and
/// `diag(ω^{j(j+1)/2 mod d})` for odd prime `d`.
pub fn quadratic_phase_gate(d: usize) -> UnitaryMatrix {
    let diag: Vec<Complex64> = if d == 2 {
        vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)]
    } else {
        (0..d).map(|j| root_of_unity(d, (j * (j + 1) / 2) as i64)).collect()
    };
    UnitaryMatrix::new_unchecked(CMatrix::from_diagonal(&nalgebra::DVector::from_vec(diag)))
}

fn build_clifford(d: usize) -> PhaseClassIndex {
    let (x, z) = generalized_paulis(d).expect("prime d >= 2");
    let generators = [fourier_matrix(d), quadratic_phase_gate(d), x, z];
    let mut index = PhaseClassIndex::new();
    index.insert(CMatrix::identity(d, d));
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        let current = index.elements[i].matrix().clone();
        for g in &generators {
            if let Some(new) = index.insert(g.matrix() * &current) {
                queue.push_back(new);
            }
        }
    }
    index
}

const CLIFFORD_MAX_D: usize = 5;

fn clifford_index(d: usize) -> Result<Arc<PhaseClassIndex>> {
    if !is_prime(d) {
        return Err(LabError::NotPrime(d));
    }
    if d > CLIFFORD_MAX_D {
        return Err(LabError::UnsupportedDimension { dim: d, reason: "Clifford enumeration limited to d <= 5" });
    }
    static CACHE: [OnceLock<Arc<PhaseClassIndex>>; CLIFFORD_MAX_D + 1] =
        [const { OnceLock::new() }; CLIFFORD_MAX_D + 1];
    Ok(CACHE[d].get_or_init(|| Arc::new(build_clifford(d))).clone())
}

#[derive(Debug, Clone)]
pub enum UnitaryEnsemble {
    Haar { d: usize },
    CliffordPrime { d: usize, group: Arc<PhaseClassIndex> },
    Explicit { d: usize, members: Arc<Vec<UnitaryMatrix>> },
}

impl UnitaryEnsemble {
    pub fn haar(d: usize) -> Result<Self> {
        if d == 0 {
            return Err(LabError::UnsupportedDimension { dim: d, reason: "dimension must be positive" });
        }
        Ok(Self::Haar { d })
    }

    pub fn explicit(members: Vec<UnitaryMatrix>) -> Result<Self> {
        let d = members
            .first()
            .map(UnitaryMatrix::dim)
            .ok_or_else(|| LabError::InvalidArgument("explicit ensemble is empty".into()))?;
        for m in &members {
            if m.dim() != d {
                return Err(LabError::DimensionMismatch { expected: d, got: m.dim() });
            }
            UnitaryMatrix::new(m.matrix().clone())?;
        }
        Ok(Self::Explicit { d, members: Arc::new(members) })
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Haar { d } | Self::CliffordPrime { d, .. } | Self::Explicit { d, .. } => *d,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Haar { .. } => "haar",
            Self::CliffordPrime { .. } => "clifford",
            Self::Explicit { .. } => "explicit",
        }
    }

    /// Members of a finite ensemble; `None` for Haar.
    pub fn members(&self) -> Option<&[UnitaryMatrix]> {
        match self {
            Self::Haar { .. } => None,
            Self::CliffordPrime { group, .. } => Some(group.elements()),
            Self::Explicit { members, .. } => Some(members),
        }
    }

    /// Position of `u`'s phase class in a finite ensemble.
    pub fn index_of(&self, u: &UnitaryMatrix) -> Option<usize> {
        match self {
            Self::Haar { .. } => None,
            Self::CliffordPrime { group, .. } => group.find(u.matrix()),
            Self::Explicit { members, .. } => members.iter().position(|m| equal_up_to_phase(m.matrix(), u.matrix())),
        }
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> UnitaryMatrix {
        match self {
            Self::Haar { d } => haar_unitary_with(*d, rng),
            _ => {
                let members = self.members().expect("finite ensemble");
                members[rng.random_range(0..members.len())].clone()
            }
        }
    }
}

/// Full single-qudit Clifford group modulo global phase, by breadth-first
/// closure over the Fourier gate, the quadratic phase gate and the Paulis.
pub fn clifford_group(d: usize) -> Result<UnitaryEnsemble> {
    Ok(UnitaryEnsemble::CliffordPrime { d, group: clifford_index(d)? })
}

pub fn sample_from(ensemble: &UnitaryEnsemble, stream: &RandomStream) -> UnitaryMatrix {
    ensemble.draw(&mut stream.rng())
}

/// Exact `U⊗U` twirl of an arbitrary operator on `d ⊗ d`:
/// `Σ_s Tr(Π_s M) Π_s / rank(Π_s)`.
pub fn twirl_exact_matrix(m: &CMatrix, d: usize) -> Result<CMatrix> {
    if m.nrows() != d * d || m.ncols() != d * d {
        return Err(LabError::DimensionMismatch { expected: d * d, got: m.nrows() });
    }
    if d == 1 {
        return Ok(m.clone());
    }
    let sectors = sector_projectors(d)?;
    let mut out = CMatrix::zeros(d * d, d * d);
    for (proj, rank) in
        [(&sectors.symmetric, sectors.symmetric_rank), (&sectors.antisymmetric, sectors.antisymmetric_rank)]
    {
        let weight = (proj * m).trace() / rank as f64;
        out += proj * weight;
    }
    Ok(out)
}

pub fn twirl_exact(rho: &DensityMatrix) -> Result<DensityMatrix> {
    let dims = rho.layout().dims();
    if dims.len() != 2 || dims[0] != dims[1] {
        return Err(LabError::InvalidLayout(format!("twirl needs two equal subsystems, got {dims:?}")));
    }
    let out = twirl_exact_matrix(rho.matrix(), dims[0])?;
    Ok(DensityMatrix::new_unchecked(out, rho.layout().clone()))
}

/// `(U⊗U) M (U⊗U)†` on `d ⊗ d`.
pub fn conjugate_pair(m: &CMatrix, u: &UnitaryMatrix) -> CMatrix {
    let d = u.dim();
    let layout = SubsystemLayout::uniform(d, 2).expect("d >= 1");
    let once = conjugate_subsystems(m, &layout, u.matrix(), &[0]).expect("shape checked");
    conjugate_subsystems(&once, &layout, u.matrix(), &[1]).expect("shape checked")
}

/// Uniform average of `(U⊗U) M (U⊗U)†` over a finite ensemble.
pub fn group_twirl(ensemble: &UnitaryEnsemble, m: &CMatrix) -> Result<CMatrix> {
    let members = ensemble.members().ok_or(LabError::InfiniteEnsemble)?;
    let d = ensemble.dim();
    if m.nrows() != d * d || m.ncols() != d * d {
        return Err(LabError::DimensionMismatch { expected: d * d, got: m.nrows() });
    }
    let mut acc = CMatrix::zeros(d * d, d * d);
    for u in members {
        acc += conjugate_pair(m, u);
    }
    Ok(acc.unscale(members.len() as f64))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignReport {
    pub d: usize,
    pub members: usize,
    pub test_matrices: usize,
    pub max_deviation: f64,
    pub tol: f64,
    pub pass: bool,
}

/// Compares the ensemble twirl with the exact twirl on the given operators.
pub fn two_design_deviation(ensemble: &UnitaryEnsemble, tests: &[CMatrix], tol: f64) -> Result<DesignReport> {
    let d = ensemble.dim();
    let mut worst = 0.0f64;
    for m in tests {
        let diff = group_twirl(ensemble, m)? - twirl_exact_matrix(m, d)?;
        worst = diff.iter().map(|z| z.norm()).fold(worst, f64::max);
    }
    Ok(DesignReport {
        d,
        members: ensemble.members().map_or(0, <[_]>::len),
        test_matrices: tests.len(),
        max_deviation: worst,
        tol,
        pass: worst <= tol,
    })
}

/// 2-design check over all `d⁴` matrix units of `d ⊗ d`.
pub fn is_two_design(ensemble: &UnitaryEnsemble, tol: f64) -> Result<DesignReport> {
    let n = ensemble.dim() * ensemble.dim();
    let tests: Vec<CMatrix> = (0..n * n)
        .map(|k| {
            let mut m = CMatrix::zeros(n, n);
            m[(k / n, k % n)] = Complex64::new(1.0, 0.0);
            m
        })
        .collect();
    two_design_deviation(ensemble, &tests, tol)
}
