//! Transforms and spectral floors.
//!
//! The transform of a measure `μ = Σ a_x δ_x` at a dual point `γ` is
//! `μ̂(γ) = Σ a_x γ(x)`, with the positive sign convention
//! `γ(x) = exp(+2πi Σ x_j y_j / n_j)` on finite products and
//! `γ(x) = exp(+i θ·x)` on lattices.
//!
//! On a finite group the full dual is enumerated and the spectral floor
//! `min |μ̂|` is exact. On a lattice the dual torus is sampled on a uniform
//! grid; a Lipschitz bound on the transform converts the observed minimum
//! into a certified lower bound over the *whole* torus:
//!
//! `|μ̂(θ) − μ̂(θ')| ≤ L·‖θ − θ'‖_∞` with `L = Σ |a_x|·‖x‖₁`,
//!
//! and a mesh of `m` points per axis puts every torus point within
//! `π/m` of a sample, so `min |μ̂| ≥ observed − L·π/m`.

use std::f64::consts::TAU;
use std::fmt::Write as _;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};
use thiserror::Error;

use crate::dyadic::fwht;
use crate::group::{DualPoint, GroupError, GroupSpec};
use crate::measure::{DiscreteMeasure, MeasureError};
use crate::tol;

#[derive(Debug, Error, PartialEq)]
pub enum SpectraError {
    #[error("group {0} is infinite; the full dual cannot be enumerated")]
    InfiniteGroup(String),
    #[error("group order {order} exceeds the dense-transform cap {cap}")]
    GroupTooLarge { order: u64, cap: usize },
    #[error("group {0} is finite; grid sampling applies to lattice measures")]
    NotLattice(String),
    #[error("mesh {0} is too small; at least two points per axis are required")]
    MeshTooSmall(usize),
    #[error("grid of {points} points exceeds the cap {cap}")]
    GridTooLarge { points: u128, cap: u64 },
    #[error(
        "no mesh up to {max_mesh} certifies a gap of {required_gap:e} (best achieved {achieved:e})"
    )]
    BudgetExceeded {
        required_gap: f64,
        max_mesh: usize,
        achieved: f64,
        best: Box<SpectrumProfile>,
    },
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Group(#[from] GroupError),
}

/// Transform values together with what they prove about the spectral floor.
///
/// For an exact profile (finite group, full dual) `certified_min` is the
/// minimum modulus itself and `certified_max_gap` is zero. For a sampled
/// profile `certified_min` is the Lipschitz-corrected lower bound
/// `max(0, observed − gap)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumProfile {
    values: Vec<(DualPoint, Complex64)>,
    exact: bool,
    mesh: Option<usize>,
    certified_min: f64,
    certified_max_gap: f64,
}

impl SpectrumProfile {
    pub fn values(&self) -> &[(DualPoint, Complex64)] {
        &self.values
    }

    /// True when the profile enumerates the complete dual group.
    pub fn exact(&self) -> bool {
        self.exact
    }

    /// Grid points per axis for sampled profiles; `None` for exact ones.
    pub fn mesh(&self) -> Option<usize> {
        self.mesh
    }

    /// Lower bound on `min |μ̂|` over the whole dual, valid even between
    /// samples.
    pub fn certified_min(&self) -> f64 {
        self.certified_min
    }

    /// Worst-case deviation between the transform anywhere on the dual and
    /// the nearest tabulated value. Zero for exact profiles.
    pub fn certified_max_gap(&self) -> f64 {
        self.certified_max_gap
    }

    /// Smallest tabulated modulus.
    pub fn observed_min(&self) -> f64 {
        self.values
            .iter()
            .fold(f64::INFINITY, |acc, (_, v)| acc.min(v.norm()))
    }

    /// Largest tabulated modulus.
    pub fn observed_max(&self) -> f64 {
        self.values
            .iter()
            .fold(0.0f64, |acc, (_, v)| acc.max(v.norm()))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Renders the profile as CSV: a `#`-prefixed summary line carrying the
    /// certification, a header row, then one row per dual point.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "# exact={},certified_min={},certified_max_gap={}",
            self.exact, self.certified_min, self.certified_max_gap
        );
        let dims = self
            .values
            .first()
            .map_or(0, |(gamma, _)| gamma.coords_f64().len());
        for j in 0..dims {
            let _ = write!(out, "gamma{j},");
        }
        out.push_str("re,im,modulus\n");
        for (gamma, v) in &self.values {
            for c in gamma.coords_f64() {
                let _ = write!(out, "{c},");
            }
            let _ = writeln!(out, "{},{},{}", v.re, v.im, v.norm());
        }
        out
    }
}

/// Per-axis FFT plan over a finite product group, shared by the transform,
/// the dense inverter, and the search loop. The forward direction uses the
/// positive sign convention; `inverse` undoes it including the `1/|G|`
/// normalization.
pub(crate) struct DensePlan {
    dims: Vec<usize>,
    forward: Vec<Arc<dyn Fft<f64>>>,
    backward: Vec<Arc<dyn Fft<f64>>>,
}

impl DensePlan {
    pub(crate) fn for_group(group: &GroupSpec) -> Result<DensePlan, SpectraError> {
        let order = group
            .order()
            .ok_or_else(|| SpectraError::InfiniteGroup(group.to_string()))?;
        if order > tol::DENSE_CAP as u64 {
            return Err(SpectraError::GroupTooLarge {
                order,
                cap: tol::DENSE_CAP,
            });
        }
        let dims: Vec<usize> = match group {
            GroupSpec::Finite { moduli } => moduli.iter().map(|&n| n as usize).collect(),
            GroupSpec::Lattice { .. } => unreachable!("order() returned Some"),
        };
        Ok(DensePlan::for_dims(dims))
    }

    pub(crate) fn for_dims(dims: Vec<usize>) -> DensePlan {
        let mut planner = FftPlanner::new();
        // The positive-exponent transform is what FFT libraries call the
        // inverse direction.
        let forward = dims
            .iter()
            .map(|&n| planner.plan_fft(n, FftDirection::Inverse))
            .collect();
        let backward = dims
            .iter()
            .map(|&n| planner.plan_fft(n, FftDirection::Forward))
            .collect();
        DensePlan {
            dims,
            forward,
            backward,
        }
    }

    pub(crate) fn len(&self) -> usize {
        self.dims.iter().product()
    }

    fn apply(&self, data: &mut [Complex64], ffts: &[Arc<dyn Fft<f64>>]) {
        debug_assert_eq!(data.len(), self.len());
        let total = data.len();
        let mut stride = 1usize;
        for (axis, fft) in ffts.iter().enumerate() {
            let n = self.dims[axis];
            if stride == 1 {
                // Axis 0 is contiguous: process all rows in one call.
                fft.process(data);
            } else {
                let mut scratch = vec![Complex64::ZERO; n];
                let block = stride * n;
                for base in (0..total).step_by(block) {
                    for off in 0..stride {
                        for (k, s) in scratch.iter_mut().enumerate() {
                            *s = data[base + off + k * stride];
                        }
                        fft.process(&mut scratch);
                        for (k, s) in scratch.iter().enumerate() {
                            data[base + off + k * stride] = *s;
                        }
                    }
                }
            }
            stride *= n;
        }
    }

    /// Amplitudes (element-indexed) to transform values (dual-indexed),
    /// in place.
    pub(crate) fn forward(&self, data: &mut [Complex64]) {
        self.apply(data, &self.forward);
    }

    /// Transform values back to amplitudes, in place.
    pub(crate) fn inverse(&self, data: &mut [Complex64]) {
        self.apply(data, &self.backward);
        let scale = 1.0 / self.len() as f64;
        for v in data {
            *v *= scale;
        }
    }
}

/// Recovers a measure from its transform values over the full dual of a
/// finite group, tabulated in enumeration order.
pub fn measure_from_dual(
    group: &GroupSpec,
    dual_values: &[Complex64],
) -> Result<DiscreteMeasure, SpectraError> {
    let plan = DensePlan::for_group(group)?;
    let mut buf = dual_values.to_vec();
    plan.inverse(&mut buf);
    Ok(DiscreteMeasure::from_dense(group, &buf)?)
}

/// Forward transform over the full dual of a finite group, without the
/// per-point bookkeeping of [`transform`]. Dual-indexed by enumeration
/// order.
pub(crate) fn dense_transform_values(mu: &DiscreteMeasure) -> Result<Vec<Complex64>, SpectraError> {
    let plan = DensePlan::for_group(mu.group())?;
    let mut buf = mu.dense_amplitudes()?;
    plan.forward(&mut buf);
    Ok(buf)
}

/// Evaluates the transform at one dual point by direct summation.
pub fn transform_at(mu: &DiscreteMeasure, gamma: &DualPoint) -> Result<Complex64, SpectraError> {
    let group = mu.group();
    let mut acc = Complex64::ZERO;
    for (x, a) in mu.atoms() {
        acc += a * group.character(gamma, x)?;
    }
    Ok(acc)
}

const SPOT_POINTS: usize = 8;

/// Full transform over the dual of a finite group. Exponent-two groups run
/// through the real Walsh–Hadamard butterfly, everything else through
/// per-axis FFTs; either way a handful of points are re-evaluated by direct
/// character summation and must agree to within [`tol::SPOT_CHECK`].
pub fn transform(mu: &DiscreteMeasure) -> Result<SpectrumProfile, SpectraError> {
    let group = mu.group();
    let order = group
        .order()
        .ok_or_else(|| SpectraError::InfiniteGroup(group.to_string()))?;
    if order > tol::DENSE_CAP as u64 {
        return Err(SpectraError::GroupTooLarge {
            order,
            cap: tol::DENSE_CAP,
        });
    }
    let values = if group.is_exponent_two() {
        let mut buf = mu.dense_amplitudes()?;
        fwht(&mut buf);
        buf
    } else {
        dense_transform_values(mu)?
    };

    let scale = tol::SPOT_CHECK * mu.tv_norm().max(1.0);
    let n = values.len();
    for i in 0..SPOT_POINTS.min(n) {
        let idx = i * n / SPOT_POINTS.min(n);
        let gamma = DualPoint::Finite(group.element_at(idx)?);
        let direct = transform_at(mu, &gamma)?;
        assert!(
            (direct - values[idx]).norm() <= scale,
            "fast transform disagrees with direct character sum at dual index {idx}: \
             {} vs {direct}",
            values[idx],
        );
    }

    let tagged: Vec<(DualPoint, Complex64)> = values
        .into_iter()
        .enumerate()
        .map(|(idx, v)| {
            Ok((
                DualPoint::Finite(group.element_at(idx)?),
                v,
            ))
        })
        .collect::<Result<_, GroupError>>()?;
    let observed = tagged
        .iter()
        .fold(f64::INFINITY, |acc, (_, v)| acc.min(v.norm()));
    Ok(SpectrumProfile {
        certified_min: if tagged.is_empty() { 0.0 } else { observed },
        certified_max_gap: 0.0,
        exact: true,
        mesh: None,
        values: tagged,
    })
}

/// Exact spectral floor `min |μ̂|` over the full dual of a finite group.
pub fn spectral_min(mu: &DiscreteMeasure) -> Result<f64, SpectraError> {
    Ok(transform(mu)?.certified_min())
}

/// Lipschitz constant of the transform on the dual torus: `Σ |a_x|·‖x‖₁`
/// with respect to the `‖·‖_∞` metric on angles.
fn lipschitz_constant(mu: &DiscreteMeasure) -> f64 {
    mu.atoms()
        .map(|(x, a)| a.norm() * x.coords().iter().map(|&c| (c as f64).abs()).sum::<f64>())
        .sum()
}

/// Samples the transform of a lattice measure on the uniform grid with
/// `mesh` points per torus axis and certifies a lower bound on the floor
/// over the entire dual.
///
/// The grid values are computed exactly (up to round-off) by folding the
/// atom coordinates modulo the mesh and running the finite transform, so
/// arbitrarily large coordinates cost no precision.
pub fn transform_grid(mu: &DiscreteMeasure, mesh: usize) -> Result<SpectrumProfile, SpectraError> {
    let group = mu.group();
    let rank = match group {
        GroupSpec::Lattice { rank } => *rank,
        GroupSpec::Finite { .. } => return Err(SpectraError::NotLattice(group.to_string())),
    };
    if mesh < 2 {
        return Err(SpectraError::MeshTooSmall(mesh));
    }
    let points = (mesh as u128).checked_pow(rank as u32).unwrap_or(u128::MAX);
    if points > tol::MAX_GRID_POINTS as u128 {
        return Err(SpectraError::GridTooLarge {
            points,
            cap: tol::MAX_GRID_POINTS,
        });
    }
    let total = points as usize;

    // Fold atoms modulo the mesh: the samples of the lattice transform at
    // angles 2πk/mesh coincide with the finite transform of the folded
    // measure on (Z_mesh)^rank.
    let mut dense = vec![Complex64::ZERO; total];
    for (x, a) in mu.atoms() {
        let mut idx = 0usize;
        for &c in x.coords().iter().rev() {
            idx = idx * mesh + c.rem_euclid(mesh as i64) as usize;
        }
        dense[idx] += a;
    }
    let plan = DensePlan::for_dims(vec![mesh; rank]);
    plan.forward(&mut dense);

    // Spot-check a few grid points against a direct sum with exact integer
    // phase reduction.
    let scale = tol::SPOT_CHECK * mu.tv_norm().max(1.0);
    for i in 0..SPOT_POINTS.min(total) {
        let idx = i * total / SPOT_POINTS.min(total);
        let k = grid_coords(idx, mesh, rank);
        let mut direct = Complex64::ZERO;
        for (x, a) in mu.atoms() {
            let mut phase = 0i128;
            for (&c, &kj) in x.coords().iter().zip(&k) {
                phase = (phase + (c as i128 * kj as i128)).rem_euclid(mesh as i128);
            }
            direct += a * Complex64::from_polar(1.0, TAU * phase as f64 / mesh as f64);
        }
        assert!(
            (direct - dense[idx]).norm() <= scale,
            "grid transform disagrees with direct summation at index {idx}: {} vs {direct}",
            dense[idx],
        );
    }

    let gap = lipschitz_constant(mu) * std::f64::consts::PI / mesh as f64;
    let values: Vec<(DualPoint, Complex64)> = dense
        .into_iter()
        .enumerate()
        .map(|(idx, v)| {
            let angles = grid_coords(idx, mesh, rank)
                .into_iter()
                .map(|kj| TAU * kj as f64 / mesh as f64)
                .collect();
            (DualPoint::Torus(angles), v)
        })
        .collect();
    let observed = values
        .iter()
        .fold(f64::INFINITY, |acc, (_, v)| acc.min(v.norm()));
    Ok(SpectrumProfile {
        certified_min: (observed - gap).max(0.0),
        certified_max_gap: gap,
        exact: false,
        mesh: Some(mesh),
        values,
    })
}

/// Grid index to per-axis indices, first axis fastest — the same
/// little-endian convention as the finite-group element enumeration.
fn grid_coords(idx: usize, mesh: usize, rank: usize) -> Vec<usize> {
    let mut k = Vec::with_capacity(rank);
    let mut rest = idx;
    for _ in 0..rank {
        k.push(rest % mesh);
        rest /= mesh;
    }
    k
}

/// Doubles the grid resolution until the certified gap drops to
/// `target_gap`, starting from two points per axis and never exceeding
/// `max_mesh` (which is itself tried last if the doubling sequence skips
/// over it).
pub fn refine_until(
    mu: &DiscreteMeasure,
    target_gap: f64,
    max_mesh: usize,
) -> Result<SpectrumProfile, SpectraError> {
    let mut mesh = 2;
    loop {
        let profile = transform_grid(mu, mesh)?;
        if profile.certified_max_gap() <= target_gap {
            return Ok(profile);
        }
        if mesh >= max_mesh {
            return Err(SpectraError::BudgetExceeded {
                required_gap: target_gap,
                max_mesh,
                achieved: profile.certified_max_gap(),
                best: Box::new(profile),
            });
        }
        mesh = (mesh * 2).min(max_mesh);
    }
}
