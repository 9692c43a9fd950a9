//! Symmetric/antisymmetric sector analysis of the two-copy purity.
//!
//! The expected output purity of `n` channel copies is evaluated without
//! forming any operator on the doubled output space. For a pure input `ψ`
//! laid out as `(A₁, A₂)` per copy, the sector weights are
//!
//! ```text
//! α(s_b, s_e) = ⟨ψ⊗ψ| ⊗_l Π_{s_b,l} ⊗ Π_{s_e,l} |ψ⊗ψ⟩
//!             = 4^{-n} Σ_{S ⊆ systems} Π_{k∈S} σ_k · Tr ψ_S²
//! ```
//!
//! with `Π_s = (I + (−1)^s F)/2`, `σ_k` the sign attached to system `k`, and
//! `Tr ψ_S²` the purity of the reduced state on `S` (swap trick applied to
//! each subset of swapped systems). The expected purity is then
//! `Σ α · Π_l T(s_b,l, s_e,l) / (rank_B · rank_E)`.

use num_complex::Complex64;

use crate::error::{LabError, Result};
use crate::qstate::{root_of_unity, swap_operator, CMatrix, PureState};

/// Largest copy count for exact sector weights.
pub const MAX_EXACT_COPIES: usize = 2;

#[derive(Debug, Clone)]
pub struct SectorProjectors {
    pub symmetric: CMatrix,
    pub antisymmetric: CMatrix,
    pub symmetric_rank: usize,
    pub antisymmetric_rank: usize,
}

/// `Π₀ = (I+F)/2`, `Π₁ = (I−F)/2` on `d ⊗ d`, with ranks `d(d±1)/2`.
pub fn sector_projectors(d: usize) -> Result<SectorProjectors> {
    if d < 2 {
        return Err(LabError::UnsupportedDimension { dim: d, reason: "sector projectors need d >= 2" });
    }
    let f = swap_operator(d)?.into_matrix();
    let id = CMatrix::identity(d * d, d * d);
    Ok(SectorProjectors {
        symmetric: (&id + &f).scale(0.5),
        antisymmetric: (&id - &f).scale(0.5),
        symmetric_rank: d * (d + 1) / 2,
        antisymmetric_rank: d * (d - 1) / 2,
    })
}

fn sector_rank(d: usize, antisymmetric: bool) -> usize {
    if antisymmetric {
        d * (d - 1) / 2
    } else {
        d * (d + 1) / 2
    }
}

fn sign(bit: bool) -> f64 {
    if bit {
        -1.0
    } else {
        1.0
    }
}

fn check_dim(d: usize) -> Result<()> {
    if d < 2 {
        return Err(LabError::UnsupportedDimension { dim: d, reason: "need d >= 2" });
    }
    Ok(())
}

/// Closed form `(−1)^{s_e}/4 · (d² + (−1)^{s_b}d³ + (−1)^{s_e}d³ + (−1)^{s_b+s_e}d³)`.
pub fn per_copy_trace_term(d: usize, s_b: bool, s_e: bool) -> Result<f64> {
    check_dim(d)?;
    let (df, b, e) = (d as f64, sign(s_b), sign(s_e));
    let d3 = df * df * df;
    Ok(e / 4.0 * (df * df + b * d3 + e * d3 + b * e * d3))
}

/// The quadruple sum
/// `(−1)^{s_e}/4 Σ ω^{(i−i′)(j−j′)} (δ_{ii′} + (−1)^{s_b})(δ_{jj′} + (−1)^{s_e})`,
/// evaluated term by term. The result is real up to rounding.
pub fn per_copy_trace_term_bruteforce(d: usize, s_b: bool, s_e: bool) -> Result<Complex64> {
    check_dim(d)?;
    let (b, e) = (sign(s_b), sign(s_e));
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..d {
        for ip in 0..d {
            let fb = if i == ip { 1.0 } else { 0.0 } + b;
            if fb == 0.0 {
                continue;
            }
            for j in 0..d {
                for jp in 0..d {
                    let fe = if j == jp { 1.0 } else { 0.0 } + e;
                    let phase = root_of_unity(d, (i as i64 - ip as i64) * (j as i64 - jp as i64));
                    acc += phase * (fb * fe);
                }
            }
        }
    }
    Ok(acc * (e / 4.0))
}

/// Largest `d` for [`per_copy_trace_term_explicit`].
pub const EXPLICIT_MAX_D: usize = 4;

/// `Tr(Π_{s_b}^{BB′} ⊗ Π_{s_e}^{EE′} · (P⊗P)(F_{BB′} ⊗ I)(P⊗P)†)` assembled from
/// explicit `d⁴`-dimensional matrices, systems ordered `(B, B′, E, E′)`.
pub fn per_copy_trace_term_explicit(d: usize, s_b: bool, s_e: bool) -> Result<f64> {
    check_dim(d)?;
    if d > EXPLICIT_MAX_D {
        return Err(LabError::UnsupportedDimension { dim: d, reason: "explicit construction limited to d <= 4" });
    }
    let sectors = sector_projectors(d)?;
    let pick = |anti: bool| if anti { &sectors.antisymmetric } else { &sectors.symmetric };
    let proj = pick(s_b).kronecker(pick(s_e));
    let n = d * d * d * d;
    let digits = |x: usize| (x / (d * d * d), (x / (d * d)) % d, (x / d) % d, x % d);
    // P_BE ⊗ P_B′E′ is diagonal with phase ω^{i j + i′ j′} on |i, i′, j, j′⟩
    let pp = CMatrix::from_fn(n, n, |r, c| {
        if r != c {
            return Complex64::new(0.0, 0.0);
        }
        let (i, ip, j, jp) = digits(r);
        root_of_unity(d, (i * j + ip * jp) as i64)
    });
    let swap_b = swap_operator(d)?.into_matrix().kronecker(&CMatrix::identity(d * d, d * d));
    let x = &pp * swap_b * pp.adjoint();
    let t = (proj * x).trace();
    Ok(t.re)
}

/// Per-copy sector bits; bit `l` is copy `l` (0 = symmetric, 1 = antisymmetric).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SectorLabel {
    pub n: usize,
    pub s_b: u32,
    pub s_e: u32,
}

impl SectorLabel {
    pub fn b_bit(&self, copy: usize) -> bool {
        self.s_b >> copy & 1 == 1
    }

    pub fn e_bit(&self, copy: usize) -> bool {
        self.s_e >> copy & 1 == 1
    }

    pub fn all(n: usize) -> impl Iterator<Item = SectorLabel> {
        let count = 1u32 << n;
        (0..count).flat_map(move |s_b| (0..count).map(move |s_e| SectorLabel { n, s_b, s_e }))
    }

    /// `Π_l rank(Π_{s_b,l})` for the B sector.
    pub fn b_rank(&self, d: usize) -> f64 {
        (0..self.n).map(|l| sector_rank(d, self.b_bit(l)) as f64).product()
    }

    pub fn e_rank(&self, d: usize) -> f64 {
        (0..self.n).map(|l| sector_rank(d, self.e_bit(l)) as f64).product()
    }

    /// `Π_l T(d, s_b,l, s_e,l)`.
    pub fn trace_term(&self, d: usize) -> Result<f64> {
        (0..self.n).map(|l| per_copy_trace_term(d, self.b_bit(l), self.e_bit(l))).product()
    }
}

impl std::fmt::Display for SectorLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let bits = |v: u32| (0..self.n).map(|l| if v >> l & 1 == 1 { '1' } else { '0' }).collect::<String>();
        write!(f, "b{}e{}", bits(self.s_b), bits(self.s_e))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwirlDecomposition {
    pub d: usize,
    pub n: usize,
    pub alphas: Vec<(SectorLabel, f64)>,
}

impl TwirlDecomposition {
    pub fn get(&self, label: SectorLabel) -> Option<f64> {
        self.alphas.iter().find(|(l, _)| *l == label).map(|(_, a)| *a)
    }

    pub fn total(&self) -> f64 {
        self.alphas.iter().map(|(_, a)| a).sum()
    }

    /// The twirled two-copy state `Σ α Π_{s_b}/d_B ⊗ Π_{s_e}/d_E`, systems
    /// ordered `(B₁B₁′ E₁E₁′)(B₂B₂′ E₂E₂′)…`. Only sensible for tiny `d^{4n}`.
    pub fn twirled_state(&self) -> Result<CMatrix> {
        let sectors = sector_projectors(self.d)?;
        let pick = |anti: bool| if anti { &sectors.antisymmetric } else { &sectors.symmetric };
        let dim = self.d.pow(4 * self.n as u32);
        let mut out = CMatrix::zeros(dim, dim);
        for (label, alpha) in &self.alphas {
            let mut term = CMatrix::identity(1, 1);
            for l in 0..self.n {
                term = term.kronecker(&pick(label.b_bit(l)).kronecker(pick(label.e_bit(l))));
            }
            out += term.scale(alpha / (label.b_rank(self.d) * label.e_rank(self.d)));
        }
        Ok(out)
    }
}

fn check_copy_layout(psi: &PureState, d: usize, n: usize) -> Result<()> {
    check_dim(d)?;
    if n == 0 || n > MAX_EXACT_COPIES {
        return Err(LabError::InvalidArgument(format!(
            "exact sector weights need 1 <= n <= {MAX_EXACT_COPIES}, got {n}"
        )));
    }
    if psi.layout().dims() != vec![d; 2 * n].as_slice() {
        return Err(LabError::InvalidLayout(format!(
            "expected (A1, A2) pairs of dimension {d} for {n} copies, got {:?}",
            psi.layout().dims()
        )));
    }
    Ok(())
}

/// Sector weights of the Haar-twirled two-copy input.
///
/// `ψ` is laid out `[A₁⁽¹⁾, A₂⁽¹⁾, A₁⁽²⁾, A₂⁽²⁾, …]`; the B sector of copy `l`
/// pairs `A₁⁽ˡ⁾` with its duplicate, the E sector pairs `A₂⁽ˡ⁾`.
pub fn alpha_coefficients(psi: &PureState, d: usize, n: usize) -> Result<TwirlDecomposition> {
    check_copy_layout(psi, d, n)?;
    let systems = 2 * n;
    let subset_purity: Vec<f64> = (0..1usize << systems)
        .map(|mask| {
            let subset: Vec<usize> = (0..systems).filter(|k| mask >> k & 1 == 1).collect();
            psi.reduced_purity(&subset)
        })
        .collect::<Result<_>>()?;
    let norm = 1.0 / (1u64 << systems) as f64;
    let alphas = SectorLabel::all(n)
        .map(|label| {
            let signs: Vec<f64> = (0..systems)
                .map(|k| if k % 2 == 0 { sign(label.b_bit(k / 2)) } else { sign(label.e_bit(k / 2)) })
                .collect();
            let raw: f64 = subset_purity
                .iter()
                .enumerate()
                .map(|(mask, p)| {
                    let s: f64 = (0..systems).filter(|k| mask >> k & 1 == 1).map(|k| signs[k]).product();
                    s * p
                })
                .sum::<f64>()
                * norm;
            (label, if (-1e-12..0.0).contains(&raw) { 0.0 } else { raw.max(0.0) })
        })
        .collect();
    Ok(TwirlDecomposition { d, n, alphas })
}

/// Exact `E_{U,V} Tr ρ²` of the channel output for pure input `ψ`.
pub fn expected_purity_from(decomposition: &TwirlDecomposition) -> Result<f64> {
    let d = decomposition.d;
    decomposition
        .alphas
        .iter()
        .map(|(label, alpha)| Ok(alpha * label.trace_term(d)? / (label.b_rank(d) * label.e_rank(d))))
        .sum()
}

pub fn expected_purity_exact(psi: &PureState, d: usize, n: usize) -> Result<f64> {
    expected_purity_from(&alpha_coefficients(psi, d, n)?)
}

/// `((3d+1)/(d−1)²)^n`.
pub fn purity_upper_bound(d: usize, n: usize) -> Result<f64> {
    check_dim(d)?;
    let df = d as f64;
    Ok(((3.0 * df + 1.0) / ((df - 1.0) * (df - 1.0))).powi(n as i32))
}

/// `(d−1)²/(3d+1) ≥ d/4`, the condition under which the entropy bound
/// dominates `n(log₂ d − 2)`.
pub fn lemma_regime(d: usize) -> bool {
    let df = d as f64;
    4.0 * (df - 1.0) * (df - 1.0) >= df * (3.0 * df + 1.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub d: usize,
    pub n: usize,
    /// Exact expected purity for a specific input, when one was supplied.
    pub expected_purity: Option<f64>,
    pub purity_upper_bound: f64,
    /// `−log₂(purity_upper_bound) = n·log₂((d−1)²/(3d+1))`.
    pub entropy_lower_bound: f64,
    /// `n(log₂ d − 2)`.
    pub lemma_bound: f64,
    /// The purity bound is below 1 (only for `d ≥ 6`).
    pub bound_nontrivial: bool,
    pub lemma_regime: bool,
}

impl BoundReport {
    pub fn with_expected_purity(mut self, purity: f64) -> Self {
        self.expected_purity = Some(purity);
        self
    }
}

pub fn lemma1_bounds(d: usize, n: usize) -> Result<BoundReport> {
    let bound = purity_upper_bound(d, n)?;
    Ok(BoundReport {
        d,
        n,
        expected_purity: None,
        purity_upper_bound: bound,
        entropy_lower_bound: -bound.log2(),
        lemma_bound: n as f64 * ((d as f64).log2() - 2.0),
        bound_nontrivial: bound < 1.0,
        lemma_regime: lemma_regime(d),
    })
}
