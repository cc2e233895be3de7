//! Python bindings: lattices, composite schemes, distance analysis and SER
//! simulation.

use std::sync::Arc;

use noma_core as core;
use noma_core::constellation::SchemeMode;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn err(e: core::NomaError) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Rotated `Z^n` lattice; `Lattice(p)` builds the cyclotomic one.
#[pyclass(frozen, name = "Lattice", module = "noma_lab")]
struct Lattice {
    inner: Arc<core::RotatedLattice>,
}

#[pymethods]
impl Lattice {
    #[new]
    fn new(p: u32) -> PyResult<Self> {
        Ok(Self {
            inner: Arc::new(core::cyclotomic_lattice(p).map_err(err)?),
        })
    }

    /// Unrotated `Z^n`.
    #[staticmethod]
    fn identity(n: usize) -> Self {
        Self {
            inner: Arc::new(core::RotatedLattice::identity(n)),
        }
    }

    #[getter]
    fn p(&self) -> Option<u32> {
        self.inner.field().map(|f| f.p())
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn dpmin(&self) -> f64 {
        self.inner.dpmin()
    }

    fn generator(&self) -> Vec<Vec<f64>> {
        let g = self.inner.generator();
        (0..g.dim()).map(|i| g.row(i).to_vec()).collect()
    }

    fn orthogonality_residual(&self) -> f64 {
        self.inner.generator().orthogonality_residual()
    }

    fn determinant(&self) -> f64 {
        self.inner.generator().determinant()
    }

    /// Lattice point `b * G`.
    fn point(&self, b: Vec<f64>) -> PyResult<Vec<f64>> {
        if b.len() != self.inner.dim() {
            return Err(PyValueError::new_err(format!(
                "expected {} coordinates, got {}",
                self.inner.dim(),
                b.len()
            )));
        }
        Ok(self.inner.point(&b))
    }

    fn __repr__(&self) -> String {
        format!("Lattice({})", self.inner.describe())
    }
}

/// Two-user composite constellation.
#[pyclass(frozen, name = "Scheme", module = "noma_lab")]
struct Scheme {
    inner: core::CompositeScheme,
}

#[pymethods]
impl Scheme {
    /// General superposition with power fraction `alpha` for user 1.
    #[staticmethod]
    fn superimpose(lattice: &Lattice, m1: u32, m2: u32, alpha: f64) -> PyResult<Self> {
        let c1 = core::coset_leaders(lattice.inner.clone(), m1).map_err(err)?;
        let c2 = core::coset_leaders(lattice.inner.clone(), m2).map_err(err)?;
        Ok(Self {
            inner: core::superimpose(&c1, &c2, alpha).map_err(err)?,
        })
    }

    #[staticmethod]
    fn lattice_partition(lattice: &Lattice, m1: u32, m2: u32) -> PyResult<Self> {
        Ok(Self {
            inner: core::lattice_partition_scheme(lattice.inner.clone(), m1, m2).map_err(err)?,
        })
    }

    #[getter]
    fn alpha(&self) -> f64 {
        self.inner.alpha()
    }

    #[getter]
    fn eta(&self) -> f64 {
        self.inner.eta()
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn mode(&self) -> &'static str {
        match self.inner.mode() {
            SchemeMode::General => "general",
            SchemeMode::LatticePartition => "lattice_partition",
        }
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn points(&self) -> Vec<Vec<f64>> {
        self.inner
            .points()
            .chunks_exact(self.inner.dim())
            .map(<[f64]>::to_vec)
            .collect()
    }

    /// `(label1, label2)` of composite point `index`.
    fn labels(&self, index: usize) -> PyResult<(usize, usize)> {
        if index >= self.inner.len() {
            return Err(PyValueError::new_err("index out of range"));
        }
        Ok(self.inner.labels(index))
    }

    fn average_power(&self) -> f64 {
        self.inner.average_power()
    }

    fn __repr__(&self) -> String {
        format!("Scheme({})", self.inner.describe())
    }
}

/// Exact minimum product distance and the label pairs achieving it.
#[pyfunction]
#[allow(clippy::type_complexity)]
fn dpmin_bruteforce(
    py: Python<'_>,
    scheme: &Scheme,
) -> PyResult<(f64, Option<core::analysis::LabelPair>)> {
    py.detach(|| core::dpmin_bruteforce(&scheme.inner))
        .map_err(err)
}

#[pyfunction]
fn demin_bruteforce(py: Python<'_>, scheme: &Scheme) -> PyResult<f64> {
    py.detach(|| core::demin_bruteforce(&scheme.inner))
        .map_err(err)
}

fn band(name: &str) -> PyResult<core::BandVariant> {
    match name {
        "printed" => Ok(core::BandVariant::Printed),
        "squared" => Ok(core::BandVariant::Squared),
        _ => Err(PyValueError::new_err("band must be 'printed' or 'squared'")),
    }
}

#[pyfunction]
#[pyo3(signature = (m1, m2, n, p, alpha, band = "printed"))]
fn dpmin_upper_bound(m1: u32, m2: u32, n: usize, p: u32, alpha: f64, band: &str) -> PyResult<f64> {
    core::dpmin_upper_bound_with(m1, m2, n, p, alpha, self::band(band)?).map_err(err)
}

#[pyfunction]
fn dpmin_lattice_partition(m1: u32, m2: u32, n: usize, p: u32) -> f64 {
    core::dpmin_lattice_partition(m1, m2, n, p)
}

#[pyfunction]
#[pyo3(signature = (scheme, mt = 2, tau = 1.0, unit_complex_power = true))]
fn min_determinant(
    scheme: &Scheme,
    mt: usize,
    tau: f64,
    unit_complex_power: bool,
) -> PyResult<f64> {
    let scaling = core::StbcScaling {
        tau,
        unit_complex_power,
    };
    core::min_determinant(&scheme.inner, mt, scaling).map_err(err)
}

/// Monte Carlo SER. Returns a dict with per-user lists of
/// `{snr_db, trials, errors, ser}` plus run metadata.
#[pyfunction]
#[pyo3(signature = (
    scheme, snr_db, decoder = "single_user", trials = 100_000, seed = 1,
    channel = "siso", snr_gap_db = 0.0, target_errors = 0, max_trials = None
))]
#[allow(clippy::too_many_arguments)]
fn simulate_ser<'py>(
    py: Python<'py>,
    scheme: &Scheme,
    snr_db: Vec<f64>,
    decoder: &str,
    trials: u64,
    seed: u64,
    channel: &str,
    snr_gap_db: f64,
    target_errors: u64,
    max_trials: Option<u64>,
) -> PyResult<Bound<'py, PyDict>> {
    let decoder = core::Decoder::from_tag(decoder)
        .ok_or_else(|| PyValueError::new_err("decoder must be single_user, genie_sic or sic"))?;
    let channel = match channel {
        "siso" => core::ChannelConfig {
            snr_gap_db,
            ..core::ChannelConfig::siso(snr_db)
        },
        "alamouti" => core::ChannelConfig::alamouti(snr_db, snr_gap_db),
        _ => {
            return Err(PyValueError::new_err(
                "channel must be 'siso' or 'alamouti'",
            ))
        }
    };
    let opts = core::SimOptions {
        target_errors,
        max_trials: max_trials.unwrap_or(trials),
        ..core::SimOptions::new(seed, trials)
    };
    let curve = py
        .detach(|| core::simulate_ser(&scheme.inner, &channel, decoder, &opts))
        .map_err(err)?;
    let out = PyDict::new(py);
    for user in 1..=2 {
        let points = curve
            .user(user)
            .iter()
            .map(|p| {
                let d = PyDict::new(py);
                d.set_item("snr_db", p.snr_db)?;
                d.set_item("trials", p.trials)?;
                d.set_item("errors", p.errors)?;
                d.set_item("ser", p.ser)?;
                Ok(d)
            })
            .collect::<PyResult<Vec<_>>>()?;
        out.set_item(format!("user{user}"), points)?;
    }
    out.set_item("decoder", curve.decoder.tag())?;
    out.set_item("seed", curve.seed)?;
    out.set_item("scheme", curve.scheme.clone())?;
    out.set_item("rng", curve.rng)?;
    Ok(out)
}

/// Least-squares slope of `log10(SER)` against `-SNR_dB / 10`.
#[pyfunction]
fn diversity_slope(points: Vec<(f64, f64)>) -> PyResult<f64> {
    if points.len() < 3 || points.iter().any(|p| p.1 <= 0.0) {
        return Err(PyValueError::new_err("need at least 3 points with SER > 0"));
    }
    Ok(core::sim::diversity_slope(&points))
}

#[pymodule]
fn noma_lab(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Lattice>()?;
    m.add_class::<Scheme>()?;
    m.add_function(wrap_pyfunction!(dpmin_bruteforce, m)?)?;
    m.add_function(wrap_pyfunction!(demin_bruteforce, m)?)?;
    m.add_function(wrap_pyfunction!(dpmin_upper_bound, m)?)?;
    m.add_function(wrap_pyfunction!(dpmin_lattice_partition, m)?)?;
    m.add_function(wrap_pyfunction!(min_determinant, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_ser, m)?)?;
    m.add_function(wrap_pyfunction!(diversity_slope, m)?)?;
    Ok(())
}
