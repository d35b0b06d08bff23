//! Python module `geopep`.

use std::path::PathBuf;

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};
use serde_json::Value;

use geopep_core::dataset::{label_interface, FeatureEncoding, FeatureScheme, LabeledPair, DEFAULT_CUTOFF};
use geopep_core::geometry::{convex_hull_volume, sphere_sasa as core_sphere_sasa};
use geopep_core::loss::{distance_field, total_loss as core_total_loss, StructMode};
use geopep_core::metrics::{roc_auc as core_roc_auc, tpvr as core_tpvr, wilcoxon_signed_rank as core_wilcoxon, Alternative};
use geopep_core::model::{bspline_basis as core_bspline_basis, load_checkpoint, save_checkpoint, KanStack, Mode, SplineGrid, StackConfig};
use geopep_core::structio::{parse_pdb, Complex};
use geopep_core::train::{gradient_check as core_gradient_check, random_instance, train_model, LossMode, TrainConfig, TrainInstance};
use geopep_core::Vec3;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_py<'py>(py: Python<'py>, v: &Value) -> PyResult<Bound<'py, PyAny>> {
    Ok(match v {
        Value::Null => py.None().into_bound(py),
        Value::Bool(b) => b.into_pyobject(py)?.to_owned().into_any(),
        Value::Number(n) => match n.as_i64() {
            Some(i) => i.into_pyobject(py)?.into_any(),
            None => n.as_f64().unwrap_or(f64::NAN).into_pyobject(py)?.into_any(),
        },
        Value::String(s) => s.into_pyobject(py)?.into_any(),
        Value::Array(a) => {
            let items = a.iter().map(|x| to_py(py, x)).collect::<PyResult<Vec<_>>>()?;
            PyList::new(py, items)?.into_any()
        }
        Value::Object(m) => {
            let d = PyDict::new(py);
            for (k, x) in m {
                d.set_item(k, to_py(py, x)?)?;
            }
            d.into_any()
        }
    })
}

fn serde_to_py<'py>(py: Python<'py>, x: &impl serde::Serialize) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &serde_json::to_value(x).map_err(value_err)?)
}

fn one_char(s: &str, what: &str) -> PyResult<char> {
    let mut it = s.chars();
    match (it.next(), it.next()) {
        (Some(c), None) => Ok(c),
        _ => Err(PyValueError::new_err(format!("{what} must be a single character, got {s:?}"))),
    }
}

/// Parsed PDB entry.
#[pyclass(frozen)]
pub struct Structure {
    inner: Complex,
}

#[pymethods]
impl Structure {
    #[staticmethod]
    fn from_pdb(text: &str) -> PyResult<Self> {
        Ok(Structure { inner: parse_pdb(text).map_err(value_err)? })
    }

    #[staticmethod]
    fn from_file(path: PathBuf) -> PyResult<Self> {
        let text = std::fs::read_to_string(&path).map_err(|e| PyIOError::new_err(format!("{}: {e}", path.display())))?;
        Self::from_pdb(&text)
    }

    #[getter]
    fn pdb_id(&self) -> String {
        self.inner.pdb_id.clone()
    }

    #[getter]
    fn resolution(&self) -> Option<f64> {
        self.inner.resolution
    }

    #[getter]
    fn chains(&self) -> Vec<String> {
        self.inner.chains.iter().map(|c| c.id.to_string()).collect()
    }

    fn sequence(&self, chain: &str) -> PyResult<String> {
        let id = one_char(chain, "chain")?;
        self.inner
            .chain(id)
            .map(|c| c.sequence.clone())
            .ok_or_else(|| PyValueError::new_err(format!("no chain {id:?}")))
    }

    #[pyo3(signature = (peptide_chain, protein_chain, cutoff = DEFAULT_CUTOFF))]
    fn label_interface(&self, peptide_chain: &str, protein_chain: &str, cutoff: f64) -> PyResult<Pair> {
        let pep = one_char(peptide_chain, "peptide_chain")?;
        let prot = one_char(protein_chain, "protein_chain")?;
        Ok(Pair { inner: label_interface(&self.inner, pep, prot, cutoff).map_err(value_err)? })
    }

    fn __repr__(&self) -> String {
        format!("Structure({:?}, chains={:?})", self.inner.pdb_id, self.chains())
    }
}

/// Labeled protein chain of one peptide-protein pair.
#[pyclass(frozen)]
pub struct Pair {
    inner: LabeledPair,
}

#[pymethods]
impl Pair {
    #[getter]
    fn instance_id(&self) -> String {
        self.inner.instance_id()
    }

    #[getter]
    fn protein_sequence(&self) -> String {
        self.inner.protein_seq.clone()
    }

    #[getter]
    fn peptide_sequence(&self) -> String {
        self.inner.peptide_seq.clone()
    }

    /// Binding labels of the real residues.
    #[getter]
    fn labels(&self) -> Vec<u8> {
        self.inner.labels[..self.inner.len()].to_vec()
    }

    #[getter]
    fn centers(&self) -> Vec<Vec3> {
        self.inner.centers[..self.inner.len()].to_vec()
    }

    fn interface_count(&self) -> usize {
        self.inner.interface_count()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!("Pair({:?}, residues={}, interface={})", self.instance_id(), self.inner.len(), self.interface_count())
    }
}

fn encoding(scheme: FeatureScheme) -> PyResult<FeatureEncoding<'static>> {
    match scheme {
        FeatureScheme::Onehot => Ok(FeatureEncoding::Onehot),
        FeatureScheme::Physchem => Ok(FeatureEncoding::Physchem),
        FeatureScheme::External => Err(PyValueError::new_err("external embeddings are not available from Python")),
    }
}

fn instances(pairs: &[PyRef<'_, Pair>], scheme: FeatureScheme) -> PyResult<Vec<TrainInstance>> {
    let enc = encoding(scheme)?;
    pairs
        .iter()
        .map(|p| TrainInstance::from_pair(&p.inner, enc).map_err(value_err))
        .collect()
}

/// KAN (or MLP) predictor over one-hot or physico-chemical features.
#[pyclass]
pub struct Model {
    stack: KanStack,
}

#[pymethods]
impl Model {
    #[new]
    #[pyo3(signature = (scheme = "onehot", mode = "kan", hidden = vec![64, 64], grid_size = 8, degree = 3, seed = 0))]
    fn new(scheme: &str, mode: &str, hidden: Vec<usize>, grid_size: usize, degree: usize, seed: u64) -> PyResult<Self> {
        let scheme = FeatureScheme::parse(scheme).ok_or_else(|| value_err(format!("unknown scheme {scheme:?}")))?;
        let dim = encoding(scheme)?.dim();
        let mut config = StackConfig::new(scheme, dim);
        config.hidden = hidden;
        config.grid_size = grid_size;
        config.degree = degree;
        let config = match Mode::parse(mode) {
            Some(Mode::Kan) => config,
            Some(Mode::Mlp) => config.matched_mlp(),
            None => return Err(value_err(format!("unknown mode {mode:?}"))),
        };
        let mut stack = KanStack::new(config).map_err(value_err)?;
        stack.init_params(seed);
        Ok(Model { stack })
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        Ok(Model { stack: load_checkpoint(&path).map_err(value_err)? })
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        save_checkpoint(&self.stack, &path).map_err(value_err)
    }

    #[getter]
    fn mode(&self) -> &'static str {
        self.stack.config.mode.as_str()
    }

    #[getter]
    fn param_count(&self) -> usize {
        self.stack.param_count()
    }

    /// Trains from the model's configuration with Adam and keeps the best
    /// epoch. Returns the per-epoch log.
    #[pyo3(signature = (train, val = Vec::new(), epochs = 100, lr = 1e-3, lambda_ = 0.5, batch_size = 1, patience = 20, seed = 0, loss = "composite"))]
    #[allow(clippy::too_many_arguments)]
    fn fit<'py>(
        &mut self,
        py: Python<'py>,
        train: Vec<PyRef<'py, Pair>>,
        val: Vec<PyRef<'py, Pair>>,
        epochs: usize,
        lr: f64,
        lambda_: f64,
        batch_size: usize,
        patience: usize,
        seed: u64,
        loss: &str,
    ) -> PyResult<Bound<'py, PyAny>> {
        let scheme = self.stack.config.scheme;
        let train = instances(&train, scheme)?;
        let val = instances(&val, scheme)?;
        let config = TrainConfig {
            epochs,
            lr,
            lambda: lambda_,
            batch_size,
            patience,
            seed,
            loss_mode: LossMode::parse(loss).ok_or_else(|| value_err(format!("unknown loss {loss:?}")))?,
            ..TrainConfig::default()
        };
        let outcome = train_model(&self.stack.config, &train, &val, &config).map_err(value_err)?;
        self.stack = outcome.best;
        serde_to_py(py, &outcome.log)
    }

    /// Binding probabilities for the real residues of `pair`.
    fn predict(&self, pair: PyRef<'_, Pair>) -> PyResult<Vec<f64>> {
        let inst = TrainInstance::from_pair(&pair.inner, encoding(self.stack.config.scheme)?).map_err(value_err)?;
        let p = self.stack.predict(&inst.features, &inst.mask).map_err(value_err)?;
        Ok(p[..pair.inner.len()].to_vec())
    }

    fn __repr__(&self) -> String {
        format!("Model(mode={:?}, hidden={:?}, params={})", self.mode(), self.stack.config.hidden, self.param_count())
    }
}

/// Volume of the convex hull; 0 for fewer than 4 or coplanar points.
#[pyfunction]
fn hull_volume(points: Vec<Vec3>) -> f64 {
    convex_hull_volume(&points).volume
}

/// Hull volume of the true positives over that of the predicted positives.
#[pyfunction]
fn tpvr(predicted: Vec<Vec3>, true_positive: Vec<Vec3>) -> PyResult<Option<f64>> {
    core_tpvr(&predicted, &true_positive).map_err(value_err)
}

/// Exposed area of each sphere (or of `targets`).
#[pyfunction]
#[pyo3(signature = (centers, radii, probe = 1.4, n_points = 960, targets = None))]
fn sphere_sasa(centers: Vec<Vec3>, radii: Vec<f64>, probe: f64, n_points: usize, targets: Option<Vec<usize>>) -> PyResult<Vec<f64>> {
    core_sphere_sasa(&centers, &radii, probe, n_points, targets.as_deref()).map_err(value_err)
}

#[pyfunction]
fn roc_auc(scores: Vec<f64>, labels: Vec<u8>) -> PyResult<f64> {
    let mask = vec![1; scores.len()];
    core_roc_auc(&scores, &labels, &mask).map_err(value_err)
}

/// Signed-rank test of the differences; `alternative` is less, greater or two-sided.
#[pyfunction]
#[pyo3(signature = (differences, alternative = "less"))]
fn wilcoxon<'py>(py: Python<'py>, differences: Vec<f64>, alternative: &str) -> PyResult<Bound<'py, PyAny>> {
    let alt = match alternative {
        "less" => Alternative::Less,
        "greater" => Alternative::Greater,
        "two-sided" => Alternative::TwoSided,
        a => return Err(value_err(format!("unknown alternative {a:?}"))),
    };
    serde_to_py(py, &core_wilcoxon(&differences, alt).map_err(value_err)?)
}

#[pyfunction]
#[pyo3(signature = (x, lo = -1.0, hi = 1.0, grid_size = 8, degree = 3))]
fn bspline_basis(x: f64, lo: f64, hi: f64, grid_size: usize, degree: usize) -> PyResult<Vec<f64>> {
    let grid = SplineGrid::uniform(lo, hi, grid_size, degree).map_err(value_err)?;
    Ok(core_bspline_basis(x, &grid))
}

/// Composite loss of probabilities `p` for residues with heavy atoms `atoms`.
#[pyfunction]
#[pyo3(signature = (p, labels, atoms, lambda_ = 0.5))]
fn total_loss<'py>(py: Python<'py>, p: Vec<f64>, labels: Vec<u8>, atoms: Vec<Vec<Vec3>>, lambda_: f64) -> PyResult<Bound<'py, PyAny>> {
    let mask = vec![1; p.len()];
    let field = if labels.contains(&1) { Some(distance_field(&atoms, &labels).map_err(value_err)?) } else { None };
    let (b, _) = core_total_loss(&p, &labels, field.as_ref(), lambda_, &mask, StructMode::Continuous).map_err(value_err)?;
    serde_to_py(py, &b)
}

/// Finite-difference check of one randomly initialized model on a random instance.
#[pyfunction]
#[pyo3(signature = (mode = "kan", seed = 0, residues = 12, dim = 3, hidden = vec![4, 4], grid_size = 5, lambda_ = 0.5, tolerance = 1e-5))]
#[allow(clippy::too_many_arguments)]
fn gradient_check<'py>(
    py: Python<'py>,
    mode: &str,
    seed: u64,
    residues: usize,
    dim: usize,
    hidden: Vec<usize>,
    grid_size: usize,
    lambda_: f64,
    tolerance: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let mut config = StackConfig::new(FeatureScheme::External, dim);
    config.hidden = hidden;
    config.grid_size = grid_size;
    let config = match Mode::parse(mode) {
        Some(Mode::Kan) => config,
        Some(Mode::Mlp) => config.matched_mlp(),
        None => return Err(value_err(format!("unknown mode {mode:?}"))),
    };
    let mut stack = KanStack::new(config).map_err(value_err)?;
    stack.init_params(seed);
    let inst = random_instance(seed, residues, dim);
    serde_to_py(py, &core_gradient_check(&stack, &inst, lambda_, tolerance).map_err(value_err)?)
}

#[pymodule]
fn geopep(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Structure>()?;
    m.add_class::<Pair>()?;
    m.add_class::<Model>()?;
    m.add_function(wrap_pyfunction!(hull_volume, m)?)?;
    m.add_function(wrap_pyfunction!(tpvr, m)?)?;
    m.add_function(wrap_pyfunction!(sphere_sasa, m)?)?;
    m.add_function(wrap_pyfunction!(roc_auc, m)?)?;
    m.add_function(wrap_pyfunction!(wilcoxon, m)?)?;
    m.add_function(wrap_pyfunction!(bspline_basis, m)?)?;
    m.add_function(wrap_pyfunction!(total_loss, m)?)?;
    m.add_function(wrap_pyfunction!(gradient_check, m)?)?;
    Ok(())
}
