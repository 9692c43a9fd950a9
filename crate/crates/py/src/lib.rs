//! Python bindings: the `phaselab_py` module.
//!
//! Matrices cross the boundary as lists of rows of Python `complex`.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use phaselab::ensembles::{clifford_group, haar_unitary, RandomStream};
use phaselab::info::{avg_holevo, standard_families, SamplerConfig};
use phaselab::phasechannel::{sample_channel, ChannelInstance, ChannelSampler};
use phaselab::protocols::{backassisted_classical, backassisted_entanglement, fig2_reversal, joint_coherent_info};
use phaselab::qstate::{von_neumann_entropy, CVector, DensityMatrix, PureState, SubsystemLayout, UnitaryMatrix};
use phaselab::schur::{expected_purity_exact, lemma1_bounds};
use phaselab::LabError;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

pub type Rows = Vec<Vec<Complex64>>;

fn lab_err(e: LabError) -> PyErr {
    PyValueError::new_err(e.to_string())
}

pub fn matrix_to_rows(m: &DMatrix<Complex64>) -> Rows {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

pub fn rows_to_matrix(rows: &Rows) -> Result<DMatrix<Complex64>, String> {
    let n = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != m) {
        return Err("ragged matrix rows".into());
    }
    Ok(DMatrix::from_fn(n, m, |i, j| rows[i][j]))
}

fn uniform_state(amplitudes: Vec<Complex64>, d: usize, systems: usize) -> PyResult<PureState> {
    let layout = SubsystemLayout::uniform(d, systems).map_err(lab_err)?;
    PureState::new(CVector::from_vec(amplitudes), layout).map_err(lab_err)
}

/// One sampled instance `(U, V)` of the random phase coupling channel.
#[pyclass(name = "ChannelInstance", module = "phaselab_py", from_py_object)]
#[derive(Clone)]
pub struct PyChannelInstance {
    inner: ChannelInstance,
}

#[pymethods]
impl PyChannelInstance {
    /// Haar-sampled instance from `seed`.
    #[staticmethod]
    fn sample(d: usize, seed: u64) -> PyResult<Self> {
        let sampler = ChannelSampler::haar(d).map_err(lab_err)?;
        let inner = sample_channel(&sampler, 1, &RandomStream::new(seed)).map_err(lab_err)?.remove(0);
        Ok(Self { inner })
    }

    #[new]
    fn new(u: Rows, v: Rows) -> PyResult<Self> {
        let u = UnitaryMatrix::new(rows_to_matrix(&u).map_err(PyValueError::new_err)?).map_err(lab_err)?;
        let v = UnitaryMatrix::new(rows_to_matrix(&v).map_err(PyValueError::new_err)?).map_err(lab_err)?;
        Ok(Self { inner: ChannelInstance::new(u, v).map_err(lab_err)? })
    }

    #[getter]
    fn d(&self) -> usize {
        self.inner.d
    }

    #[getter]
    fn u(&self) -> Rows {
        matrix_to_rows(self.inner.u.matrix())
    }

    #[getter]
    fn v(&self) -> Rows {
        matrix_to_rows(self.inner.v.matrix())
    }

    /// Per-branch coherent information with the erasure channel on `B′`.
    fn joint_coherent_info(&self) -> PyResult<BTreeMap<&'static str, f64>> {
        let r = joint_coherent_info(self.inner.d, &self.inner).map_err(lab_err)?;
        Ok(BTreeMap::from([("nonerased", r.nonerased), ("erased", r.erased), ("average", r.average)]))
    }

    /// Fidelity of the receiver-side reversal for input amplitudes `psi`.
    fn reversal_fidelity(&self, psi: Vec<Complex64>) -> PyResult<f64> {
        let psi = uniform_state(psi, self.inner.d, 1)?;
        Ok(fig2_reversal(self.inner.d, &self.inner, &psi).map_err(lab_err)?.0)
    }

    fn entanglement_fidelity(&self) -> PyResult<f64> {
        Ok(backassisted_entanglement(self.inner.d, &self.inner).map_err(lab_err)?.0)
    }

    fn __repr__(&self) -> String {
        format!("ChannelInstance(d={})", self.inner.d)
    }
}

#[pyfunction]
fn per_copy_trace_term(d: usize, s_b: bool, s_e: bool) -> PyResult<f64> {
    phaselab::schur::per_copy_trace_term(d, s_b, s_e).map_err(lab_err)
}

/// Exact `E Tr ρ²` for amplitudes on `[A₁, A₂] × n`, each of dimension `d`.
#[pyfunction]
fn expected_purity(amplitudes: Vec<Complex64>, d: usize, n: usize) -> PyResult<f64> {
    let psi = uniform_state(amplitudes, d, 2 * n)?;
    expected_purity_exact(&psi, d, n).map_err(lab_err)
}

#[pyfunction(name = "lemma1_bounds")]
fn py_lemma1_bounds(d: usize, n: usize) -> PyResult<BTreeMap<&'static str, f64>> {
    let r = lemma1_bounds(d, n).map_err(lab_err)?;
    Ok(BTreeMap::from([
        ("purity_upper_bound", r.purity_upper_bound),
        ("entropy_lower_bound", r.entropy_lower_bound),
        ("lemma_bound", r.lemma_bound),
    ]))
}

#[pyfunction(name = "haar_unitary")]
fn py_haar_unitary(d: usize, seed: u64) -> PyResult<Rows> {
    Ok(matrix_to_rows(haar_unitary(d, &RandomStream::new(seed)).map_err(lab_err)?.matrix()))
}

/// Number of Clifford elements modulo phase for prime `d ≤ 5`.
#[pyfunction]
fn clifford_group_order(d: usize) -> PyResult<usize> {
    Ok(clifford_group(d).map_err(lab_err)?.members().map_or(0, <[_]>::len))
}

/// Entropy in bits of a single-system density matrix.
#[pyfunction]
fn entropy(rows: Rows) -> PyResult<f64> {
    let m = rows_to_matrix(&rows).map_err(PyValueError::new_err)?;
    let layout = SubsystemLayout::new(vec![m.nrows()]).map_err(lab_err)?;
    von_neumann_entropy(&DensityMatrix::new(m, layout).map_err(lab_err)?).map_err(lab_err)
}

/// `{"decoded": (a, b), "confidence", "rate", "transcript"}`.
#[pyfunction(name = "backassisted_classical")]
fn py_backassisted_classical(py: Python<'_>, d: usize, a: usize, b: usize, seed: u64) -> PyResult<Py<PyAny>> {
    let run = backassisted_classical(d, (a, b), &RandomStream::new(seed)).map_err(lab_err)?;
    let out = pyo3::types::PyDict::new(py);
    out.set_item("decoded", run.decoded)?;
    out.set_item("confidence", run.confidence)?;
    out.set_item("rate", run.rate)?;
    out.set_item("transcript", run.transcript.to_text())?;
    Ok(out.into_any().unbind())
}

/// `[(family, mean, stderr)]` of sampled Holevo information, single copy.
#[pyfunction]
fn holevo_families(d: usize, samples: usize, seed: u64) -> PyResult<Vec<(String, f64, f64)>> {
    let root = RandomStream::new(seed);
    let families = standard_families(d, &root.substream(0)).map_err(lab_err)?;
    families
        .into_iter()
        .enumerate()
        .map(|(k, (name, ens))| {
            let cfg = SamplerConfig {
                sampler: ChannelSampler::haar(d).map_err(lab_err)?,
                samples,
                stream: root.substream(1 + k as u64),
            };
            let est = avg_holevo(&ens, &cfg).map_err(lab_err)?;
            Ok((name, est.mean, est.stderr))
        })
        .collect()
}

#[pymodule]
fn phaselab_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyChannelInstance>()?;
    m.add_function(wrap_pyfunction!(per_copy_trace_term, m)?)?;
    m.add_function(wrap_pyfunction!(expected_purity, m)?)?;
    m.add_function(wrap_pyfunction!(py_lemma1_bounds, m)?)?;
    m.add_function(wrap_pyfunction!(py_haar_unitary, m)?)?;
    m.add_function(wrap_pyfunction!(clifford_group_order, m)?)?;
    m.add_function(wrap_pyfunction!(entropy, m)?)?;
    m.add_function(wrap_pyfunction!(py_backassisted_classical, m)?)?;
    m.add_function(wrap_pyfunction!(holevo_families, m)?)?;
    Ok(())
}
