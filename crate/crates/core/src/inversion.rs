//! Computing convolution inverses: `ν` with `μ ∗ ν = δ₀`.
//!
//! Three routes are provided.
//!
//! * [`dense_invert`] — the brute-force oracle on finite groups. It runs
//!   two independent computations (a pivoted linear solve of the
//!   convolution operator, and pointwise division on the dual followed by
//!   the inverse transform) and refuses to answer unless they agree.
//! * [`neumann_invert`] — the dominant-atom route: translate the largest
//!   atom to the origin, expand a geometric series in the remainder, and
//!   translate back. Works on any group, including lattices, and carries
//!   the `1/(2|a₁|−1)` norm guarantee when the head exceeds half the mass
//!   budget.
//! * [`nikolski_invert`] — the factorization route `μ⁻¹ = (μ∗μ̃)⁻¹ ∗ μ̃`.
//!   The self-convolution is hermitian with mass `Σ|a_x|² ≥ δ²` at the
//!   origin, so for `δ > 1/√2` the series route applies to it even when it
//!   does not apply to `μ` itself; the resulting guarantee is
//!   `1/(2δ²−1)`.

use num_complex::Complex64;
use thiserror::Error;

use crate::measure::{DiscreteMeasure, MeasureError};
use crate::spectra::{self, DensePlan, SpectraError};
use crate::tol;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum InversionMethod {
    DenseSolve,
    Neumann,
    Nikolski,
}

impl InversionMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            InversionMethod::DenseSolve => "dense",
            InversionMethod::Neumann => "neumann",
            InversionMethod::Nikolski => "nikolski",
        }
    }
}

/// A computed inverse together with the evidence: its norm, the honestly
/// re-convolved residual `‖μ ∗ inverse − δ₀‖`, whether the result is a
/// truncated series, and the applicable theorem bound when one exists.
#[derive(Clone, Debug)]
pub struct InversionResult {
    pub inverse: DiscreteMeasure,
    pub method: InversionMethod,
    pub inverse_norm: f64,
    pub residual: f64,
    pub truncated: bool,
    pub guarantee: Option<f64>,
}

#[derive(Debug, Error, PartialEq)]
pub enum InversionError {
    #[error("transform reaches modulus {min_modulus:e}, below the invertibility floor {floor:e}")]
    Singular { min_modulus: f64, floor: f64 },
    #[error("method hypothesis fails: {0}")]
    NotApplicable(String),
    #[error("internal inversion paths disagree by {difference:e} (limit {limit:e})")]
    PathDisagreement { difference: f64, limit: f64 },
    #[error("tolerance {0} must be positive and finite")]
    BadTolerance(f64),
    #[error(transparent)]
    Spectra(#[from] SpectraError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Group(#[from] crate::group::GroupError),
}

fn check_tolerance(tol_param: f64) -> Result<(), InversionError> {
    if !(tol_param.is_finite() && tol_param > 0.0) {
        return Err(InversionError::BadTolerance(tol_param));
    }
    Ok(())
}

fn finish(
    mu: &DiscreteMeasure,
    inverse: DiscreteMeasure,
    method: InversionMethod,
    truncated: bool,
    guarantee: Option<f64>,
) -> Result<InversionResult, InversionError> {
    let identity = DiscreteMeasure::dirac(mu.group(), &vec![0; mu.group().dims()])?;
    let residual = mu.convolve(&inverse)?.minus(&identity)?.tv_norm();
    Ok(InversionResult {
        inverse_norm: inverse.tv_norm(),
        inverse,
        method,
        residual,
        truncated,
        guarantee,
    })
}

/// Solves the dense `|G| × |G|` linear system `μ ∗ ν = δ₀` by Gaussian
/// elimination with partial pivoting. Row `z`, column `y` of the
/// convolution operator holds `μ({z − y})`.
fn solve_convolution_system(
    mu: &DiscreteMeasure,
    min_modulus: f64,
) -> Result<Vec<Complex64>, InversionError> {
    let group = mu.group();
    let n = group.order().expect("caller checked finiteness") as usize;
    let mut a = vec![Complex64::ZERO; n * n];
    for (x, v) in mu.atoms() {
        // μ({x}) contributes to every (z, y) with z − y = x, i.e. z = y + x.
        for y in 0..n {
            let z = group.index_of(&group.add(&group.element_at(y)?, x)?)?;
            a[z * n + y] = v;
        }
    }
    let mut rhs = vec![Complex64::ZERO; n];
    rhs[0] = Complex64::ONE;

    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&r, &s| a[r * n + col].norm().total_cmp(&a[s * n + col].norm()))
            .expect("non-empty range");
        if a[pivot_row * n + col].norm() < tol::SINGULAR_FLOOR {
            return Err(InversionError::Singular {
                min_modulus,
                floor: tol::SINGULAR_FLOOR,
            });
        }
        if pivot_row != col {
            for k in 0..n {
                a.swap(col * n + k, pivot_row * n + k);
            }
            rhs.swap(col, pivot_row);
        }
        let pivot = a[col * n + col];
        for row in col + 1..n {
            let factor = a[row * n + col] / pivot;
            if factor == Complex64::ZERO {
                continue;
            }
            for k in col..n {
                let sub = factor * a[col * n + k];
                a[row * n + k] -= sub;
            }
            let sub = factor * rhs[col];
            rhs[row] -= sub;
        }
    }
    for col in (0..n).rev() {
        let mut acc = rhs[col];
        for k in col + 1..n {
            acc -= a[col * n + k] * rhs[k];
        }
        rhs[col] = acc / a[col * n + col];
    }
    Ok(rhs)
}

/// Brute-force inverse on a finite group, cross-checked two ways.
///
/// The transform is computed over the full dual; if any value drops below
/// [`tol::SINGULAR_FLOOR`] the measure is declared singular. Otherwise the
/// inverse is obtained by pointwise dual division and, independently, by
/// the dense linear solve; the two must agree in total variation within
/// [`tol::NORM_SLACK`].
pub fn dense_invert(mu: &DiscreteMeasure) -> Result<InversionResult, InversionError> {
    let group = mu.group();
    let plan = DensePlan::for_group(group)?;
    let mut dual = mu.dense_amplitudes()?;
    plan.forward(&mut dual);
    let min_modulus = dual
        .iter()
        .fold(f64::INFINITY, |acc, v| acc.min(v.norm()));
    if min_modulus < tol::SINGULAR_FLOOR {
        return Err(InversionError::Singular {
            min_modulus,
            floor: tol::SINGULAR_FLOOR,
        });
    }

    let mut divided_amps: Vec<Complex64> = dual.iter().map(|v| v.inv()).collect();
    plan.inverse(&mut divided_amps);
    let divided = DiscreteMeasure::from_dense(group, &divided_amps)?;

    let solved = solve_convolution_system(mu, min_modulus)?;
    let difference: f64 = divided_amps
        .iter()
        .zip(&solved)
        .map(|(p, q)| (p - q).norm())
        .sum();
    if difference > tol::NORM_SLACK {
        return Err(InversionError::PathDisagreement {
            difference,
            limit: tol::NORM_SLACK,
        });
    }

    finish(mu, divided, InversionMethod::DenseSolve, false, None)
}

/// Inverts via the geometric series around the dominant atom.
///
/// With the largest atom `(τ₁, λ)` translated to the origin the measure
/// reads `λδ₀ + ν`; when `r = ‖ν‖/|λ| < 1` the inverse is
/// `λ⁻¹ Σ_k (−ν/λ)^k`, truncated at the first `K` whose geometric tail
/// `r^{K+1} / ((1−r)·|λ|)` drops to `tol`, then translated back. The
/// truncation keeps the support finite on infinite groups.
///
/// Requires `‖μ‖ ≤ 1`; emits the guarantee `1/(2|λ|−1)` when `|λ| > ½`.
pub fn neumann_invert(mu: &DiscreteMeasure, tol_param: f64) -> Result<InversionResult, InversionError> {
    check_tolerance(tol_param)?;
    let tv = mu.tv_norm();
    if tv > 1.0 + tol::INEQ_SLACK {
        return Err(InversionError::NotApplicable(format!(
            "total variation {tv} exceeds the unit mass budget"
        )));
    }
    let (tau, lambda) = match mu.dominant_atom() {
        Some((x, a)) => (x.clone(), a),
        None => {
            return Err(InversionError::NotApplicable(
                "the measure has no atoms".to_string(),
            ))
        }
    };
    let head = lambda.norm();
    let omega = mu.translate(&tau, Complex64::ONE)?;
    let nu = omega.without_atom(&mu.group().zero());
    let r = nu.tv_norm() / head;
    if r >= 1.0 {
        return Err(InversionError::NotApplicable(format!(
            "dominant atom carries ratio r = {r} ≥ 1 of the head mass"
        )));
    }

    let group = mu.group().clone();
    let identity = DiscreteMeasure::dirac(&group, &vec![0; group.dims()])?;
    let mut series = identity.clone();
    let mut truncated = false;
    if r > 0.0 {
        truncated = true;
        let mut steps = 0usize;
        let mut tail = r / ((1.0 - r) * head);
        while tail > tol_param {
            steps += 1;
            tail *= r;
        }
        // Horner form: Σ_{k ≤ K} q^k = δ₀ + q ∗ (δ₀ + q ∗ (…)).
        let q = nu.scaled(-lambda.inv());
        for _ in 0..steps {
            series = q.convolve(&series)?.plus(&identity)?;
        }
    }
    let inverse = series.scaled(lambda.inv()).translate(&tau, Complex64::ONE)?;
    let guarantee = (head > 0.5).then(|| 1.0 / (2.0 * head - 1.0));
    finish(mu, inverse, InversionMethod::Neumann, truncated, guarantee)
}

/// Inverts via the factorization `μ⁻¹ = (μ ∗ μ̃)⁻¹ ∗ μ̃`.
///
/// `δ` must be a certified lower bound on `inf |μ̂|` (exact on finite
/// groups, Lipschitz-certified on lattices — never a bare grid minimum).
/// The route applies for `δ > 1/√2`: the self-convolution `μ ∗ μ̃` then
/// carries mass `Σ|a_x|² ≥ δ² > ½` at the origin, the series route
/// inverts it, and the guarantee is `1/(2δ²−1)`.
pub fn nikolski_invert(
    mu: &DiscreteMeasure,
    delta: f64,
    tol_param: f64,
) -> Result<InversionResult, InversionError> {
    check_tolerance(tol_param)?;
    let tv = mu.tv_norm();
    if tv > 1.0 + tol::INEQ_SLACK {
        return Err(InversionError::NotApplicable(format!(
            "total variation {tv} exceeds the unit mass budget"
        )));
    }
    if delta <= std::f64::consts::FRAC_1_SQRT_2 {
        return Err(InversionError::NotApplicable(format!(
            "spectral floor {delta} does not exceed 1/sqrt(2)"
        )));
    }
    let reflected = mu.involute();
    let sigma = mu.convolve(&reflected)?;
    let inner = neumann_invert(&sigma, tol_param / 2.0)?;
    let inverse = inner.inverse.convolve(&reflected)?;
    let guarantee = Some(1.0 / (2.0 * delta * delta - 1.0));
    finish(
        mu,
        inverse,
        InversionMethod::Nikolski,
        inner.truncated,
        guarantee,
    )
}

/// The exact spectral floor of a finite-group measure, for feeding
/// [`nikolski_invert`] and the report builders.
pub fn exact_floor(mu: &DiscreteMeasure) -> Result<f64, InversionError> {
    Ok(spectra::spectral_min(mu)?)
}
