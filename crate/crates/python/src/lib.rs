//! Python bindings: sparse ratings, the three randomized SVD drivers and the
//! collaborative-filtering pipeline. Matrices cross the boundary as nested
//! lists (row-major); singular vectors come back as `(U, s, V)` with `U` and
//! `V` holding the vectors as columns.

use adaptive_cf::cf::{self, AutoLatentConfig, LatentFactors, RatingSample};
use adaptive_cf::data::{self, CsvSchema, RatingsDataset, SplitSpec};
use adaptive_cf::rsvd::{self, TerminationCriterion, DEFAULT_BLOCK, DEFAULT_PASSES};
use adaptive_cf::{DenseMat, Error, SparseRatings, SvdTriplet};
use pyo3::create_exception;
use pyo3::exceptions::{PyIOError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

create_exception!(adaptive_cf, NumericalError, PyRuntimeError, "Numerical failure (rank deficiency, exhaustion, non-finite values).");

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Io(io) => PyIOError::new_err(io.to_string()),
        e if e.is_numerical() => NumericalError::new_err(e.to_string()),
        e => PyValueError::new_err(e.to_string()),
    }
}

type Rows = Vec<Vec<f64>>;
type Svd = (Rows, Vec<f64>, Rows);

fn rows(m: &DenseMat) -> Rows {
    (0..m.rows()).map(|i| (0..m.cols()).map(|j| m.get(i, j)).collect()).collect()
}

fn svd_out(svd: SvdTriplet) -> Svd {
    (rows(&svd.u), svd.s, rows(&svd.v))
}

fn samples(triplets: Vec<(usize, usize, f64)>) -> Vec<RatingSample> {
    triplets.into_iter().map(|(u, i, r)| RatingSample::new(u, i, r)).collect()
}

fn triplets(samples: &[RatingSample]) -> Vec<(usize, usize, f64)> {
    samples.iter().map(|s| (s.user, s.item, s.rating)).collect()
}

/// Sparse `users × items` ratings matrix.
#[pyclass(name = "SparseRatings", module = "adaptive_cf", frozen)]
pub struct PySparse(SparseRatings);

#[pymethods]
impl PySparse {
    /// Builds from `(row, col, value)` triplets. Without `rating_range` the
    /// observed min/max is used.
    #[staticmethod]
    #[pyo3(signature = (rows, cols, triplets, rating_range=None))]
    fn from_triplets(
        rows: usize,
        cols: usize,
        triplets: Vec<(usize, usize, f64)>,
        rating_range: Option<(f64, f64)>,
    ) -> PyResult<Self> {
        let a = match rating_range {
            Some(r) => SparseRatings::from_triplets(rows, cols, &triplets, r),
            None => SparseRatings::from_triplets_observed(rows, cols, &triplets),
        };
        a.map(PySparse).map_err(to_py)
    }

    #[staticmethod]
    fn from_dense(rows: Rows) -> PyResult<Self> {
        let d = DenseMat::from_rows(&rows).map_err(to_py)?;
        SparseRatings::from_dense(&d).map(PySparse).map_err(to_py)
    }

    /// Reads a `coordinate real general` Matrix Market file.
    #[staticmethod]
    fn load_mtx(path: std::path::PathBuf) -> PyResult<Self> {
        data::load_matrix_market(path).map(PySparse).map_err(to_py)
    }

    fn save_mtx(&self, path: std::path::PathBuf) -> PyResult<()> {
        data::write_matrix_market(path, &self.0).map_err(to_py)
    }

    #[getter]
    fn shape(&self) -> (usize, usize) {
        (self.0.rows(), self.0.cols())
    }

    #[getter]
    fn nnz(&self) -> usize {
        self.0.nnz()
    }

    #[getter]
    fn rating_range(&self) -> (f64, f64) {
        self.0.rating_range()
    }

    fn get(&self, i: usize, j: usize) -> Option<f64> {
        self.0.get(i, j)
    }

    fn triplets(&self) -> Vec<(usize, usize, f64)> {
        self.0.iter().collect()
    }

    fn to_dense(&self) -> Rows {
        rows(&self.0.to_dense())
    }

    fn transpose(&self) -> Self {
        PySparse(self.0.transpose())
    }

    fn __repr__(&self) -> String {
        format!("SparseRatings({}x{}, nnz={})", self.0.rows(), self.0.cols(), self.0.nnz())
    }
}

/// Ratings with raw user/item ids mapped to contiguous indices.
#[pyclass(name = "RatingsDataset", module = "adaptive_cf", frozen)]
pub struct PyDataset(RatingsDataset);

#[pymethods]
impl PyDataset {
    /// Reads a delimited ratings file; extra columns are ignored.
    #[staticmethod]
    #[pyo3(signature = (path, delimiter=",", header=false, columns=(0, 1, 2), rating_range=None))]
    fn load_csv(
        path: std::path::PathBuf,
        delimiter: &str,
        header: bool,
        columns: (usize, usize, usize),
        rating_range: Option<(f64, f64)>,
    ) -> PyResult<Self> {
        let delimiter = match delimiter.as_bytes() {
            [d] => *d,
            _ if delimiter == "tab" => b'\t',
            _ => return Err(PyValueError::new_err(format!("bad delimiter {delimiter:?}"))),
        };
        let schema = CsvSchema {
            delimiter,
            user_col: columns.0,
            item_col: columns.1,
            rating_col: columns.2,
            has_header: header,
            rating_range,
        };
        data::load_ratings_csv(path, &schema).map(PyDataset).map_err(to_py)
    }

    #[staticmethod]
    #[pyo3(signature = (records, rating_range=None))]
    fn from_records(records: Vec<(String, String, f64)>, rating_range: Option<(f64, f64)>) -> PyResult<Self> {
        RatingsDataset::from_records(records, rating_range).map(PyDataset).map_err(to_py)
    }

    #[getter]
    fn users(&self) -> usize {
        self.0.users()
    }

    #[getter]
    fn items(&self) -> usize {
        self.0.items()
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    #[getter]
    fn user_ids(&self) -> Vec<String> {
        self.0.user_ids().to_vec()
    }

    #[getter]
    fn item_ids(&self) -> Vec<String> {
        self.0.item_ids().to_vec()
    }

    fn to_sparse(&self) -> PyResult<PySparse> {
        self.0.to_sparse().map(PySparse).map_err(to_py)
    }

    /// Drops users and items with fewer than `min_count` ratings, repeatedly.
    fn prune(&self, min_count: usize) -> PyResult<Self> {
        data::prune_min_degree(&self.0, min_count).map(PyDataset).map_err(to_py)
    }

    /// Seeded shuffle split; returns `(train, validation, test)` with the held
    /// out parts as `(user, item, rating)` lists.
    #[pyo3(signature = (train=0.9, validation=0.05, test=0.05, seed=0))]
    fn split(
        &self,
        train: f64,
        validation: f64,
        test: f64,
        seed: u64,
    ) -> PyResult<(PySparse, Vec<(usize, usize, f64)>, Vec<(usize, usize, f64)>)> {
        let spec = SplitSpec::new(train, validation, test, seed).map_err(to_py)?;
        let s = data::split(&self.0, &spec).map_err(to_py)?;
        Ok((PySparse(s.train), triplets(&s.validation), triplets(&s.test)))
    }
}

/// Item latent factors `T` (k × items).
#[pyclass(name = "LatentFactors", module = "adaptive_cf", frozen)]
pub struct PyLatent(LatentFactors);

#[pymethods]
impl PyLatent {
    #[new]
    fn new(t: Rows) -> PyResult<Self> {
        let t = DenseMat::from_rows(&t).map_err(to_py)?;
        LatentFactors::new(t).map(PyLatent).map_err(to_py)
    }

    #[getter]
    fn k(&self) -> usize {
        self.0.k()
    }

    #[getter]
    fn items(&self) -> usize {
        self.0.items()
    }

    fn t(&self) -> Rows {
        rows(self.0.t())
    }

    fn truncated(&self, k: usize) -> PyResult<Self> {
        self.0.truncated(k).map(PyLatent).map_err(to_py)
    }

    /// Predicted ratings for `(user, item, ...)` samples.
    fn predict_many(&self, train: &PySparse, samples: Vec<(usize, usize, f64)>) -> PyResult<Vec<f64>> {
        let samples = self::samples(samples);
        let preds = cf::Predictor::new(&train.0).predict_all(&self.0, &samples).map_err(to_py)?;
        Ok(preds.iter().map(|p| p.value).collect())
    }

    /// Mean absolute error over `(user, item, rating)` samples.
    fn mae(&self, train: &PySparse, samples: Vec<(usize, usize, f64)>) -> PyResult<f64> {
        cf::Predictor::new(&train.0).mae(&self.0, &self::samples(samples)).map_err(to_py)
    }
}

/// Basic randomized SVD truncated to rank `k`.
#[pyfunction]
#[pyo3(signature = (a, k, power=1, oversample=10, seed=0))]
fn basic_rsvd(a: &PySparse, k: usize, power: usize, oversample: usize, seed: u64) -> PyResult<Svd> {
    rsvd::basic_rsvd(&a.0, k, power, oversample, seed).map(svd_out).map_err(to_py)
}

/// Fixed-precision blocked QB; returns the SVD of the final `QB`.
#[pyfunction]
#[pyo3(signature = (a, tol, block=DEFAULT_BLOCK, power=4, seed=0))]
fn fixed_precision_qb(a: &PySparse, tol: f64, block: usize, power: usize, seed: u64) -> PyResult<Svd> {
    let state = rsvd::fixed_precision_qb(&a.0, tol, block, power, seed).map_err(to_py)?;
    rsvd::svd_from_qb(&state, state.rank(), state.rank()).map(svd_out).map_err(to_py)
}

/// Fast adaptive PCA at a fixed `rank` or relative Frobenius `tol`.
#[pyfunction]
#[pyo3(signature = (a, rank=None, tol=None, block=DEFAULT_BLOCK, passes=DEFAULT_PASSES, seed=0))]
fn adaptive_pca(
    a: &PySparse,
    rank: Option<usize>,
    tol: Option<f64>,
    block: usize,
    passes: usize,
    seed: u64,
) -> PyResult<Svd> {
    let criterion = match (rank, tol) {
        (Some(k), None) => TerminationCriterion::FixedRank(k),
        (None, Some(e)) => TerminationCriterion::FrobTolerance(e),
        _ => return Err(PyValueError::new_err("give exactly one of rank and tol")),
    };
    rsvd::adaptive_pca(&a.0, block, passes, criterion, seed).map(svd_out).map_err(to_py)
}

/// Grows the latent dimension block by block until the validation MAE stops
/// improving. Returns `(factors, validation_mae, trace)` where `trace` lists
/// `(k, validation_mae)` per block.
#[pyfunction]
#[pyo3(signature = (
    train, validation, block=DEFAULT_BLOCK, passes=DEFAULT_PASSES,
    patience=cf::DEFAULT_PATIENCE, min_improvement=cf::DEFAULT_MIN_IMPROVEMENT, seed=0
))]
fn auto_latent_factors(
    train: &PySparse,
    validation: Vec<(usize, usize, f64)>,
    block: usize,
    passes: usize,
    patience: usize,
    min_improvement: f64,
    seed: u64,
) -> PyResult<(PyLatent, f64, Vec<(usize, f64)>)> {
    let config = AutoLatentConfig {
        block_size: block,
        passes,
        patience,
        min_improvement,
        seed,
    };
    let r = cf::auto_latent_factors(&train.0, &samples(validation), &config).map_err(to_py)?;
    let trace = r.trace.iter().map(|p| (p.k, p.validation_mae)).collect();
    Ok((PyLatent(r.factors), r.validation_mae, trace))
}

/// Cosine-weighted prediction of `train[user, item]`.
#[pyfunction]
fn predict_rating(train: &PySparse, factors: &PyLatent, user: usize, item: usize) -> PyResult<f64> {
    cf::predict_rating(&train.0, &factors.0, user, item)
        .map(|p| p.value)
        .map_err(to_py)
}

#[pyfunction]
fn mae(predictions: Vec<f64>, truths: Vec<f64>) -> PyResult<f64> {
    cf::mae(&predictions, &truths).map_err(to_py)
}

#[pymodule]
#[pyo3(name = "adaptive_cf")]
fn adaptive_cf_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySparse>()?;
    m.add_class::<PyDataset>()?;
    m.add_class::<PyLatent>()?;
    m.add_function(wrap_pyfunction!(basic_rsvd, m)?)?;
    m.add_function(wrap_pyfunction!(fixed_precision_qb, m)?)?;
    m.add_function(wrap_pyfunction!(adaptive_pca, m)?)?;
    m.add_function(wrap_pyfunction!(auto_latent_factors, m)?)?;
    m.add_function(wrap_pyfunction!(predict_rating, m)?)?;
    m.add_function(wrap_pyfunction!(mae, m)?)?;
    m.add("NumericalError", m.py().get_type::<NumericalError>())?;
    Ok(())
}
