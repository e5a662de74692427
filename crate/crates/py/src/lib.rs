//! Python bindings for the measure-inversion toolkit.
//!
//! The module mirrors the core API: `Group` and `Measure` model atomic
//! measures on abelian groups, `transform`/`refine_until`/`spectral_min`
//! tabulate and certify the spectral floor, the three `*_invert` functions
//! compute convolution inverses with evidence, `bound_report_json` renders
//! the per-theorem norm-bound report, and `greatest_atom_certificate`
//! checks the two-path dominant-atom certificate on exponent-two groups.
//!
//! Every library error surfaces as a `ValueError` carrying the original
//! message.

use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use minv_core::bounds;
use minv_core::dyadic;
use minv_core::format;
use minv_core::group::GroupSpec;
use minv_core::inversion::{self, InversionResult};
use minv_core::measure::DiscreteMeasure;
use minv_core::spectra::{self, SpectrumProfile};

fn value_error(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// An ambient abelian group: a finite product of cyclic groups or the
/// integer lattice.
#[pyclass(frozen, module = "minv", skip_from_py_object)]
#[derive(Clone)]
struct Group {
    inner: GroupSpec,
}

#[pymethods]
impl Group {
    /// Parses the grammar used everywhere else: "Z8", "Z2^4", "Z6xZ4",
    /// "Z", "Z^2".
    #[new]
    fn new(spec: &str) -> PyResult<Self> {
        Ok(Group {
            inner: format::parse_group_spec(spec).map_err(value_error)?,
        })
    }

    #[staticmethod]
    fn cyclic(n: u64) -> PyResult<Self> {
        Ok(Group {
            inner: GroupSpec::cyclic(n).map_err(value_error)?,
        })
    }

    #[staticmethod]
    fn finite(moduli: Vec<u64>) -> PyResult<Self> {
        Ok(Group {
            inner: GroupSpec::finite(&moduli).map_err(value_error)?,
        })
    }

    #[staticmethod]
    fn lattice(rank: usize) -> PyResult<Self> {
        Ok(Group {
            inner: GroupSpec::lattice(rank).map_err(value_error)?,
        })
    }

    /// Number of elements, or `None` for the lattice.
    fn order(&self) -> Option<u64> {
        self.inner.order()
    }

    /// Coordinates per element.
    fn dims(&self) -> usize {
        self.inner.dims()
    }

    fn is_finite(&self) -> bool {
        matches!(self.inner, GroupSpec::Finite { .. })
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Group(\"{}\")", self.inner)
    }

    fn __eq__(&self, other: &Group) -> bool {
        self.inner == other.inner
    }
}

/// A finitely supported complex measure on its group.
#[pyclass(frozen, module = "minv", skip_from_py_object)]
#[derive(Clone)]
struct Measure {
    inner: DiscreteMeasure,
}

#[pymethods]
impl Measure {
    /// Builds a measure from `(coords, amplitude)` pairs; amplitudes at
    /// repeated coordinates accumulate.
    #[new]
    fn new(group: &Group, atoms: Vec<(Vec<i64>, Complex64)>) -> PyResult<Self> {
        Ok(Measure {
            inner: DiscreteMeasure::from_atoms(&group.inner, atoms).map_err(value_error)?,
        })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Measure {
            inner: format::measure_from_json(text).map_err(value_error)?,
        })
    }

    fn to_json(&self) -> String {
        format::measure_to_json(&self.inner)
    }

    fn group(&self) -> Group {
        Group {
            inner: self.inner.group().clone(),
        }
    }

    /// Total variation norm `Σ |a_x|`.
    fn tv_norm(&self) -> f64 {
        self.inner.tv_norm()
    }

    fn num_atoms(&self) -> usize {
        self.inner.num_atoms()
    }

    fn is_real(&self) -> bool {
        self.inner.is_real()
    }

    /// Support and amplitudes as `(coords, amplitude)` pairs in group
    /// enumeration order.
    fn atoms(&self) -> Vec<(Vec<i64>, Complex64)> {
        self.inner
            .atoms()
            .map(|(x, a)| (x.coords().to_vec(), a))
            .collect()
    }

    /// The largest atom (deterministic tie-breaking), or `None` when empty.
    fn dominant_atom(&self) -> Option<(Vec<i64>, Complex64)> {
        self.inner
            .dominant_atom()
            .map(|(x, a)| (x.coords().to_vec(), a))
    }

    fn convolve(&self, other: &Measure) -> PyResult<Measure> {
        Ok(Measure {
            inner: self.inner.convolve(&other.inner).map_err(value_error)?,
        })
    }

    /// The involution `μ̃(E) = conj(μ(−E))`.
    fn involute(&self) -> Measure {
        Measure {
            inner: self.inner.involute(),
        }
    }

    /// `phase · (μ ∗ δ_{−shift})`: moves the atom at `shift` to the origin
    /// and rotates all amplitudes by the unimodular `phase`.
    #[pyo3(signature = (shift, phase = Complex64::new(1.0, 0.0)))]
    fn translate(&self, shift: Vec<i64>, phase: Complex64) -> PyResult<Measure> {
        let tau = self.inner.group().element(&shift).map_err(value_error)?;
        Ok(Measure {
            inner: self.inner.translate(&tau, phase).map_err(value_error)?,
        })
    }

    fn scaled(&self, factor: Complex64) -> Measure {
        Measure {
            inner: self.inner.scaled(factor),
        }
    }

    fn __repr__(&self) -> String {
        format!(
            "Measure(group=\"{}\", atoms={}, tv={})",
            self.inner.group(),
            self.inner.num_atoms(),
            self.inner.tv_norm()
        )
    }
}

/// Tabulated transform values plus what they certify about the floor.
#[pyclass(frozen, module = "minv")]
struct Spectrum {
    inner: SpectrumProfile,
}

#[pymethods]
impl Spectrum {
    /// `(dual point coordinates, value)` pairs.
    fn values(&self) -> Vec<(Vec<f64>, Complex64)> {
        self.inner
            .values()
            .iter()
            .map(|(gamma, v)| (gamma.coords_f64(), *v))
            .collect()
    }

    #[getter]
    fn exact(&self) -> bool {
        self.inner.exact()
    }

    #[getter]
    fn mesh(&self) -> Option<usize> {
        self.inner.mesh()
    }

    #[getter]
    fn certified_min(&self) -> f64 {
        self.inner.certified_min()
    }

    #[getter]
    fn certified_max_gap(&self) -> f64 {
        self.inner.certified_max_gap()
    }

    #[getter]
    fn observed_min(&self) -> f64 {
        self.inner.observed_min()
    }

    fn __repr__(&self) -> String {
        format!(
            "Spectrum(points={}, exact={}, certified_min={})",
            self.inner.values().len(),
            self.inner.exact(),
            self.inner.certified_min()
        )
    }
}

/// A computed inverse with its evidence.
#[pyclass(frozen, module = "minv")]
struct Inversion {
    inner: InversionResult,
}

#[pymethods]
impl Inversion {
    #[getter]
    fn method(&self) -> &'static str {
        self.inner.method.as_str()
    }

    #[getter]
    fn inverse_norm(&self) -> f64 {
        self.inner.inverse_norm
    }

    /// Honestly re-convolved `‖μ ∗ inverse − δ₀‖`.
    #[getter]
    fn residual(&self) -> f64 {
        self.inner.residual
    }

    #[getter]
    fn truncated(&self) -> bool {
        self.inner.truncated
    }

    /// The applicable theorem bound, when one exists.
    #[getter]
    fn guarantee(&self) -> Option<f64> {
        self.inner.guarantee
    }

    fn inverse(&self) -> Measure {
        Measure {
            inner: self.inner.inverse.clone(),
        }
    }

    fn to_json(&self) -> String {
        format::inversion_to_json(&self.inner)
    }

    fn __repr__(&self) -> String {
        format!(
            "Inversion(method=\"{}\", norm={}, residual={:e})",
            self.inner.method.as_str(),
            self.inner.inverse_norm,
            self.inner.residual
        )
    }
}

/// Full transform over the dual of a finite group.
#[pyfunction]
fn transform(mu: &Measure) -> PyResult<Spectrum> {
    Ok(Spectrum {
        inner: spectra::transform(&mu.inner).map_err(value_error)?,
    })
}

/// Exact spectral floor `min |μ̂|` over a finite dual.
#[pyfunction]
fn spectral_min(mu: &Measure) -> PyResult<f64> {
    spectra::spectral_min(&mu.inner).map_err(value_error)
}

/// Grid refinement on a lattice until the certified gap reaches
/// `target_gap`, with at most `max_mesh` points per axis.
#[pyfunction]
fn refine_until(mu: &Measure, target_gap: f64, max_mesh: usize) -> PyResult<Spectrum> {
    Ok(Spectrum {
        inner: spectra::refine_until(&mu.inner, target_gap, max_mesh).map_err(value_error)?,
    })
}

/// Dense two-path inversion oracle on finite groups.
#[pyfunction]
fn dense_invert(mu: &Measure) -> PyResult<Inversion> {
    Ok(Inversion {
        inner: inversion::dense_invert(&mu.inner).map_err(value_error)?,
    })
}

/// Geometric-series inversion around the dominant atom.
#[pyfunction]
#[pyo3(signature = (mu, tol = 1e-9))]
fn neumann_invert(mu: &Measure, tol: f64) -> PyResult<Inversion> {
    Ok(Inversion {
        inner: inversion::neumann_invert(&mu.inner, tol).map_err(value_error)?,
    })
}

/// Hermitian-factorization inversion, valid for floors above `1/sqrt(2)`.
#[pyfunction]
#[pyo3(signature = (mu, delta, tol = 1e-9))]
fn nikolski_invert(mu: &Measure, delta: f64, tol: f64) -> PyResult<Inversion> {
    Ok(Inversion {
        inner: inversion::nikolski_invert(&mu.inner, delta, tol).map_err(value_error)?,
    })
}

/// Renders the per-theorem norm-bound report as JSON. The floor defaults
/// to the exact spectral minimum (finite groups only); pass `delta` to
/// supply a certified lower bound instead, with `delta_exact=False`.
#[pyfunction]
#[pyo3(signature = (mu, delta = None, delta_exact = true, observed = None))]
fn bound_report_json(
    mu: &Measure,
    delta: Option<f64>,
    delta_exact: bool,
    observed: Option<f64>,
) -> PyResult<String> {
    let (floor, exact) = match delta {
        Some(d) => (d, delta_exact),
        None => (spectra::spectral_min(&mu.inner).map_err(value_error)?, true),
    };
    let report =
        bounds::build_report(&mu.inner, floor, exact, observed).map_err(value_error)?;
    Ok(report.to_json())
}

/// Two-path greatest-atom certificate on exponent-two groups: returns
/// `(max_atom, holds, paths_agree)`.
#[pyfunction]
fn greatest_atom_certificate(mu: &Measure, delta: f64) -> PyResult<(f64, bool, bool)> {
    let cert = dyadic::greatest_atom_certificate_for(&mu.inner, delta).map_err(value_error)?;
    Ok((cert.max_atom, cert.holds, cert.paths_agree()))
}

#[pymodule]
fn minv(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Group>()?;
    m.add_class::<Measure>()?;
    m.add_class::<Spectrum>()?;
    m.add_class::<Inversion>()?;
    m.add_function(wrap_pyfunction!(transform, m)?)?;
    m.add_function(wrap_pyfunction!(spectral_min, m)?)?;
    m.add_function(wrap_pyfunction!(refine_until, m)?)?;
    m.add_function(wrap_pyfunction!(dense_invert, m)?)?;
    m.add_function(wrap_pyfunction!(neumann_invert, m)?)?;
    m.add_function(wrap_pyfunction!(nikolski_invert, m)?)?;
    m.add_function(wrap_pyfunction!(bound_report_json, m)?)?;
    m.add_function(wrap_pyfunction!(greatest_atom_certificate, m)?)?;
    Ok(())
}
