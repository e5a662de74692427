//! The convolution algebra of finitely supported measures.
//!
//! A measure is a finite sum `μ = Σ a_x δ_x` with complex amplitudes over a
//! fixed group. The algebra operations are convolution
//! `(μ ∗ ν)({z}) = Σ_{x+y=z} μ({x}) ν({y})`, the involution
//! `μ̃({x}) = conj(μ({−x}))`, and translation with a unimodular phase. The
//! norm is total variation, `‖μ‖ = Σ |a_x|`, which is submultiplicative
//! under convolution and invariant under involution and translation.
//!
//! Amplitudes are stored in a sorted map keyed by canonical coordinates, so
//! every iteration order (and hence every serialization and every floating
//! sum) is deterministic. Convolution drops result amplitudes below
//! [`tol::CONV_PRUNE`]; nothing else is ever pruned implicitly.

use num_complex::Complex64;
use std::collections::BTreeMap;
use thiserror::Error;

use crate::group::{GroupElement, GroupError, GroupSpec};
use crate::tol;

#[derive(Debug, Error, PartialEq)]
pub enum MeasureError {
    #[error("measures live on different groups")]
    GroupMismatch,
    #[error("translation phase has modulus {0}, must be unimodular")]
    PhaseNotUnimodular(f64),
    #[error(transparent)]
    Group(#[from] GroupError),
}

/// A finitely supported complex measure on a [`GroupSpec`].
#[derive(Clone, PartialEq, Debug)]
pub struct DiscreteMeasure {
    group: GroupSpec,
    atoms: BTreeMap<GroupElement, Complex64>,
}

impl DiscreteMeasure {
    pub fn zero(group: &GroupSpec) -> DiscreteMeasure {
        DiscreteMeasure {
            group: group.clone(),
            atoms: BTreeMap::new(),
        }
    }

    /// The unit point mass at `x`.
    pub fn dirac(group: &GroupSpec, coords: &[i64]) -> Result<DiscreteMeasure, MeasureError> {
        DiscreteMeasure::from_atoms(group, [(coords.to_vec(), Complex64::new(1.0, 0.0))])
    }

    /// Builds a measure from `(coordinates, amplitude)` pairs. Coordinates
    /// are canonicalized, duplicate support points are summed, and exact
    /// zero amplitudes are dropped.
    pub fn from_atoms<I>(group: &GroupSpec, atoms: I) -> Result<DiscreteMeasure, MeasureError>
    where
        I: IntoIterator<Item = (Vec<i64>, Complex64)>,
    {
        let mut map: BTreeMap<GroupElement, Complex64> = BTreeMap::new();
        for (coords, amp) in atoms {
            let x = group.element(&coords)?;
            *map.entry(x).or_insert(Complex64::ZERO) += amp;
        }
        Ok(DiscreteMeasure::from_map(group.clone(), map))
    }

    pub(crate) fn from_map(
        group: GroupSpec,
        mut atoms: BTreeMap<GroupElement, Complex64>,
    ) -> DiscreteMeasure {
        atoms.retain(|_, a| *a != Complex64::ZERO);
        DiscreteMeasure { group, atoms }
    }

    /// Reads a dense amplitude vector in enumeration order (finite groups).
    pub fn from_dense(group: &GroupSpec, amps: &[Complex64]) -> Result<DiscreteMeasure, MeasureError> {
        let mut map = BTreeMap::new();
        for (idx, &a) in amps.iter().enumerate() {
            if a != Complex64::ZERO {
                map.insert(group.element_at(idx)?, a);
            }
        }
        Ok(DiscreteMeasure::from_map(group.clone(), map))
    }

    pub fn group(&self) -> &GroupSpec {
        &self.group
    }

    pub fn atoms(&self) -> impl Iterator<Item = (&GroupElement, Complex64)> {
        self.atoms.iter().map(|(x, &a)| (x, a))
    }

    pub fn num_atoms(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Amplitude at `x` (zero off the support).
    pub fn amplitude(&self, x: &GroupElement) -> Complex64 {
        self.atoms.get(x).copied().unwrap_or(Complex64::ZERO)
    }

    /// Total variation norm `Σ |a_x|`. The explicit `0.0` seed keeps the
    /// empty sum at positive zero (`Sum for f64` folds from `-0.0`).
    pub fn tv_norm(&self) -> f64 {
        self.atoms.values().fold(0.0, |acc, a| acc + a.norm())
    }

    /// True when every amplitude is real up to [`tol::REALNESS`].
    pub fn is_real(&self) -> bool {
        self.atoms.values().all(|a| a.im.abs() <= tol::REALNESS)
    }

    /// The largest atom with deterministic tie-breaking: maximal modulus,
    /// then lexicographically smallest coordinates.
    pub fn dominant_atom(&self) -> Option<(&GroupElement, Complex64)> {
        self.atoms().reduce(|best, cur| {
            match cur.1.norm().total_cmp(&best.1.norm()) {
                std::cmp::Ordering::Greater => cur,
                std::cmp::Ordering::Less => best,
                std::cmp::Ordering::Equal => {
                    if cur.0 < best.0 {
                        cur
                    } else {
                        best
                    }
                }
            }
        })
    }

    /// Atoms sorted by decreasing modulus, ties broken by coordinate order.
    pub fn sorted_atoms(&self) -> AtomList {
        let mut entries: Vec<(GroupElement, Complex64)> = self
            .atoms
            .iter()
            .map(|(x, &a)| (x.clone(), a))
            .collect();
        entries.sort_by(|(xa, aa), (xb, ab)| {
            ab.norm().total_cmp(&aa.norm()).then_with(|| xa.cmp(xb))
        });
        AtomList(entries)
    }

    /// Convolution `μ ∗ ν`; results with modulus below
    /// [`tol::CONV_PRUNE`] are dropped after full accumulation.
    pub fn convolve(&self, other: &DiscreteMeasure) -> Result<DiscreteMeasure, MeasureError> {
        if self.group != other.group {
            return Err(MeasureError::GroupMismatch);
        }
        let mut acc: BTreeMap<GroupElement, Complex64> = BTreeMap::new();
        for (x, a) in self.atoms() {
            for (y, b) in other.atoms() {
                let z = self.group.add(x, y)?;
                *acc.entry(z).or_insert(Complex64::ZERO) += a * b;
            }
        }
        acc.retain(|_, v| v.norm() >= tol::CONV_PRUNE);
        Ok(DiscreteMeasure {
            group: self.group.clone(),
            atoms: acc,
        })
    }

    /// The involution `μ̃({x}) = conj(μ({−x}))`. Satisfies
    /// `μ ∗ μ̃ ({0}) = Σ |a_x|²` and preserves total variation.
    pub fn involute(&self) -> DiscreteMeasure {
        let mut map = BTreeMap::new();
        for (x, a) in self.atoms() {
            map.insert(self.group.neg(x).expect("atom has valid dims"), a.conj());
        }
        DiscreteMeasure {
            group: self.group.clone(),
            atoms: map,
        }
    }

    /// `c · (μ ∗ δ_{−τ})`: moves the atom at `τ` to the origin and rotates
    /// all amplitudes by the unimodular phase `c`.
    pub fn translate(
        &self,
        tau: &GroupElement,
        c: Complex64,
    ) -> Result<DiscreteMeasure, MeasureError> {
        if (c.norm() - 1.0).abs() > tol::UNIMODULAR {
            return Err(MeasureError::PhaseNotUnimodular(c.norm()));
        }
        let mut map = BTreeMap::new();
        for (x, a) in self.atoms() {
            map.insert(self.group.sub(x, tau)?, c * a);
        }
        Ok(DiscreteMeasure {
            group: self.group.clone(),
            atoms: map,
        })
    }

    /// `μ ∗ μ̃` evaluated at the origin, i.e. `Σ |a_x|²`, computed directly.
    pub fn self_convolution_mass_at_zero(&self) -> f64 {
        self.atoms.values().map(|a| a.norm_sqr()).sum()
    }

    pub fn scaled(&self, c: Complex64) -> DiscreteMeasure {
        let map = self
            .atoms
            .iter()
            .map(|(x, &a)| (x.clone(), c * a))
            .collect();
        DiscreteMeasure::from_map(self.group.clone(), map)
    }

    pub fn plus(&self, other: &DiscreteMeasure) -> Result<DiscreteMeasure, MeasureError> {
        if self.group != other.group {
            return Err(MeasureError::GroupMismatch);
        }
        let mut map = self.atoms.clone();
        for (x, a) in other.atoms() {
            *map.entry(x.clone()).or_insert(Complex64::ZERO) += a;
        }
        Ok(DiscreteMeasure::from_map(self.group.clone(), map))
    }

    pub fn minus(&self, other: &DiscreteMeasure) -> Result<DiscreteMeasure, MeasureError> {
        self.plus(&other.scaled(Complex64::new(-1.0, 0.0)))
    }

    /// The measure with the atom at `x` removed.
    pub fn without_atom(&self, x: &GroupElement) -> DiscreteMeasure {
        let mut map = self.atoms.clone();
        map.remove(x);
        DiscreteMeasure {
            group: self.group.clone(),
            atoms: map,
        }
    }

    /// Dense amplitude vector in enumeration order (finite groups only).
    pub fn dense_amplitudes(&self) -> Result<Vec<Complex64>, MeasureError> {
        let order = self.group.order().ok_or(GroupError::NotFinite)? as usize;
        let mut buf = vec![Complex64::ZERO; order];
        for (x, a) in self.atoms() {
            buf[self.group.index_of(x)?] = a;
        }
        Ok(buf)
    }
}

/// Atoms in decreasing order of modulus (deterministic tie-break).
#[derive(Clone, Debug)]
pub struct AtomList(Vec<(GroupElement, Complex64)>);

impl AtomList {
    pub fn entries(&self) -> &[(GroupElement, Complex64)] {
        &self.0
    }

    pub fn head(&self) -> Option<&(GroupElement, Complex64)> {
        self.0.first()
    }

    /// Modulus of the `i`-th largest atom, zero past the end. Convenient
    /// for the `|a_1|`, `|a_2|` inequalities where missing atoms count as
    /// zero mass.
    pub fn modulus(&self, i: usize) -> f64 {
        self.0.get(i).map(|(_, a)| a.norm()).unwrap_or(0.0)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}
