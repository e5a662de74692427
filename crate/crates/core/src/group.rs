//! Group arithmetic for the two group families the crate works on:
//! finite products `Z_{n_1} x … x Z_{n_k}` and integer lattices `Z^d`.
//!
//! Elements are coordinate vectors; finite coordinates are kept in the
//! canonical range `0..n_j`. The dual of a finite product is the same
//! product (characters are indexed by elements), while the dual of `Z^d` is
//! the `d`-torus, represented by angle vectors in `[0, 2π)`. Characters are
//! evaluated with the `+i` sign convention:
//! `γ_y(x) = exp(+2πi Σ x_j y_j / n_j)` and `γ_θ(x) = exp(+i θ·x)`.
//!
//! Rational independence of lattice points is decided exactly (fraction-free
//! Gaussian elimination over the integers), never through floating-point
//! rank estimates; the same test backs the simultaneous phase solver
//! [`GroupSpec::kronecker_solve`].

use num_complex::Complex64;
use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

use crate::tol;

#[derive(Debug, Error, PartialEq)]
pub enum GroupError {
    #[error("cyclic factor must have order at least 2, got {0}")]
    InvalidModulus(u64),
    #[error("a finite product needs at least one factor")]
    EmptyProduct,
    #[error("a lattice needs rank at least 1")]
    ZeroRank,
    #[error("group order overflows a 64-bit integer")]
    OrderTooLarge,
    #[error("element has {found} coordinates, group needs {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("cannot parse group spec {0:?}")]
    Parse(String),
    #[error("operation requires a finite group")]
    NotFinite,
    #[error("operation requires a lattice group")]
    NotLattice,
    #[error("dual point does not belong to the dual of this group")]
    DualMismatch,
    #[error("lattice coordinates overflow the exact integer arithmetic")]
    CoordinateOverflow,
    #[error("points are rationally dependent")]
    DependentPoints,
    #[error("need exactly one target per point, got {points} points and {targets} targets")]
    TargetCountMismatch { points: usize, targets: usize },
    #[error("target {index} has modulus {modulus} but must be unimodular")]
    TargetNotUnimodular { index: usize, modulus: f64 },
    #[error("phase solve verification exceeded tolerance (worst error {0:e})")]
    SolveFailed(f64),
}

/// An element of a group, as a canonical coordinate vector.
///
/// For finite products every coordinate lies in `0..n_j`; lattice
/// coordinates are arbitrary `i64`. Construct through
/// [`GroupSpec::element`] so the canonical form is enforced.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct GroupElement(Vec<i64>);

impl GroupElement {
    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// The order of a group element: the least `k ≥ 1` with `k·x = 0`.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ElementOrder {
    Finite(u64),
    Infinite,
}

impl ElementOrder {
    pub fn is_infinite(&self) -> bool {
        matches!(self, ElementOrder::Infinite)
    }
}

/// The closure of the value set `{γ(x) : γ in the dual}` for a fixed `x`.
///
/// An element of finite order `m` sees exactly the `m`-th roots of unity;
/// an element of infinite order sees a dense subset of the whole circle.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum CharacterValueSet {
    RootsOfUnity(u64),
    FullCircle,
}

/// A point of the dual group: an element index for finite products, an
/// angle vector in `[0, 2π)^d` for lattices.
#[derive(Clone, PartialEq, Debug)]
pub enum DualPoint {
    Finite(GroupElement),
    Torus(Vec<f64>),
}

impl DualPoint {
    /// Builds a torus point, reducing each angle into `[0, 2π)`.
    pub fn torus(angles: Vec<f64>) -> DualPoint {
        DualPoint::Torus(angles.into_iter().map(|a| a.rem_euclid(TAU)).collect())
    }

    /// Coordinates as floats, for uniform tabular output.
    pub fn coords_f64(&self) -> Vec<f64> {
        match self {
            DualPoint::Finite(e) => e.coords().iter().map(|&c| c as f64).collect(),
            DualPoint::Torus(a) => a.clone(),
        }
    }
}

/// One of the supported groups: a finite product of cyclic groups or an
/// integer lattice.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum GroupSpec {
    Finite { moduli: Vec<u64> },
    Lattice { rank: usize },
}

impl GroupSpec {
    pub fn finite(moduli: &[u64]) -> Result<GroupSpec, GroupError> {
        if moduli.is_empty() {
            return Err(GroupError::EmptyProduct);
        }
        let mut order = 1u64;
        for &n in moduli {
            if n < 2 || n > i64::MAX as u64 {
                return Err(GroupError::InvalidModulus(n));
            }
            order = order.checked_mul(n).ok_or(GroupError::OrderTooLarge)?;
        }
        Ok(GroupSpec::Finite {
            moduli: moduli.to_vec(),
        })
    }

    pub fn cyclic(n: u64) -> Result<GroupSpec, GroupError> {
        GroupSpec::finite(&[n])
    }

    pub fn lattice(rank: usize) -> Result<GroupSpec, GroupError> {
        if rank == 0 {
            return Err(GroupError::ZeroRank);
        }
        Ok(GroupSpec::Lattice { rank })
    }

    /// Number of coordinates an element carries.
    pub fn dims(&self) -> usize {
        match self {
            GroupSpec::Finite { moduli } => moduli.len(),
            GroupSpec::Lattice { rank } => *rank,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, GroupSpec::Finite { .. })
    }

    /// True when every element satisfies `x + x = 0`, i.e. every cyclic
    /// factor has order two.
    pub fn is_exponent_two(&self) -> bool {
        match self {
            GroupSpec::Finite { moduli } => moduli.iter().all(|&n| n == 2),
            GroupSpec::Lattice { .. } => false,
        }
    }

    /// Group order; `None` for lattices.
    pub fn order(&self) -> Option<u64> {
        match self {
            GroupSpec::Finite { moduli } => Some(moduli.iter().product()),
            GroupSpec::Lattice { .. } => None,
        }
    }

    pub fn zero(&self) -> GroupElement {
        GroupElement(vec![0; self.dims()])
    }

    /// Canonicalizes a coordinate vector into a group element.
    pub fn element(&self, coords: &[i64]) -> Result<GroupElement, GroupError> {
        self.check_dims(coords.len())?;
        match self {
            GroupSpec::Finite { moduli } => Ok(GroupElement(
                coords
                    .iter()
                    .zip(moduli)
                    .map(|(&c, &n)| c.rem_euclid(n as i64))
                    .collect(),
            )),
            GroupSpec::Lattice { .. } => Ok(GroupElement(coords.to_vec())),
        }
    }

    fn check_dims(&self, found: usize) -> Result<(), GroupError> {
        let expected = self.dims();
        if found != expected {
            return Err(GroupError::DimensionMismatch { expected, found });
        }
        Ok(())
    }

    pub fn add(&self, x: &GroupElement, y: &GroupElement) -> Result<GroupElement, GroupError> {
        self.check_dims(x.0.len())?;
        self.check_dims(y.0.len())?;
        match self {
            GroupSpec::Finite { moduli } => Ok(GroupElement(
                x.0.iter()
                    .zip(&y.0)
                    .zip(moduli)
                    .map(|((&a, &b), &n)| ((a as i128 + b as i128).rem_euclid(n as i128)) as i64)
                    .collect(),
            )),
            GroupSpec::Lattice { .. } => {
                let mut out = Vec::with_capacity(x.0.len());
                for (&a, &b) in x.0.iter().zip(&y.0) {
                    out.push(a.checked_add(b).ok_or(GroupError::CoordinateOverflow)?);
                }
                Ok(GroupElement(out))
            }
        }
    }

    pub fn neg(&self, x: &GroupElement) -> Result<GroupElement, GroupError> {
        self.check_dims(x.0.len())?;
        match self {
            GroupSpec::Finite { moduli } => Ok(GroupElement(
                x.0.iter()
                    .zip(moduli)
                    .map(|(&a, &n)| (-a).rem_euclid(n as i64))
                    .collect(),
            )),
            GroupSpec::Lattice { .. } => {
                let mut out = Vec::with_capacity(x.0.len());
                for &a in &x.0 {
                    out.push(a.checked_neg().ok_or(GroupError::CoordinateOverflow)?);
                }
                Ok(GroupElement(out))
            }
        }
    }

    pub fn sub(&self, x: &GroupElement, y: &GroupElement) -> Result<GroupElement, GroupError> {
        let ny = self.neg(y)?;
        self.add(x, &ny)
    }

    /// Least `k ≥ 1` with `k·x = 0`. The identity has order one.
    pub fn order_of(&self, x: &GroupElement) -> Result<ElementOrder, GroupError> {
        self.check_dims(x.0.len())?;
        match self {
            GroupSpec::Finite { moduli } => {
                let mut ord = 1u64;
                for (&c, &n) in x.0.iter().zip(moduli) {
                    let fac = n / gcd(c.rem_euclid(n as i64) as u64, n);
                    // lcm of factor orders divides the group order, so the
                    // u128 intermediate always fits back into u64.
                    ord = ((ord as u128 * fac as u128) / gcd(ord, fac) as u128) as u64;
                }
                Ok(ElementOrder::Finite(ord))
            }
            GroupSpec::Lattice { .. } => {
                if x.is_zero() {
                    Ok(ElementOrder::Finite(1))
                } else {
                    Ok(ElementOrder::Infinite)
                }
            }
        }
    }

    /// Evaluates the character `γ` at `x`. The result is unimodular up to
    /// round-off in `cos`/`sin`.
    pub fn character(&self, gamma: &DualPoint, x: &GroupElement) -> Result<Complex64, GroupError> {
        self.check_dims(x.0.len())?;
        match (self, gamma) {
            (GroupSpec::Finite { moduli }, DualPoint::Finite(y)) => {
                self.check_dims(y.0.len())?;
                let mut phase = 0.0f64;
                for ((&c, &d), &n) in x.0.iter().zip(&y.0).zip(moduli) {
                    // Reduce the product exactly before going to floats so
                    // large coordinates cost no precision.
                    let t = (c as i128 * d as i128).rem_euclid(n as i128);
                    phase += t as f64 / n as f64;
                }
                Ok(Complex64::from_polar(1.0, TAU * phase))
            }
            (GroupSpec::Lattice { .. }, DualPoint::Torus(angles)) => {
                self.check_dims(angles.len())?;
                let phase: f64 = x.0.iter().zip(angles).map(|(&c, &a)| a * c as f64).sum();
                Ok(Complex64::from_polar(1.0, phase))
            }
            _ => Err(GroupError::DualMismatch),
        }
    }

    /// The closure of `{γ(x)}` over all characters `γ`.
    pub fn character_value_set(&self, x: &GroupElement) -> Result<CharacterValueSet, GroupError> {
        match self.order_of(x)? {
            ElementOrder::Finite(m) => Ok(CharacterValueSet::RootsOfUnity(m)),
            ElementOrder::Infinite => Ok(CharacterValueSet::FullCircle),
        }
    }

    /// Element with the given enumeration index (finite groups only).
    ///
    /// Enumeration is mixed-radix with the first coordinate varying
    /// fastest, so for exponent-two groups the index reads the coordinate
    /// string as a binary number with the last coordinate most significant
    /// — the colexicographic order used by the dyadic machinery.
    pub fn element_at(&self, index: usize) -> Result<GroupElement, GroupError> {
        match self {
            GroupSpec::Finite { moduli } => {
                let mut idx = index;
                let mut coords = Vec::with_capacity(moduli.len());
                for &n in moduli {
                    coords.push((idx % n as usize) as i64);
                    idx /= n as usize;
                }
                Ok(GroupElement(coords))
            }
            GroupSpec::Lattice { .. } => Err(GroupError::NotFinite),
        }
    }

    /// Inverse of [`GroupSpec::element_at`].
    pub fn index_of(&self, x: &GroupElement) -> Result<usize, GroupError> {
        self.check_dims(x.0.len())?;
        match self {
            GroupSpec::Finite { moduli } => {
                let mut idx = 0usize;
                let mut stride = 1usize;
                for (&c, &n) in x.0.iter().zip(moduli) {
                    idx += c as usize * stride;
                    stride *= n as usize;
                }
                Ok(idx)
            }
            GroupSpec::Lattice { .. } => Err(GroupError::NotFinite),
        }
    }

    /// Iterates over all elements of a finite group in enumeration order.
    pub fn elements(&self) -> Result<impl Iterator<Item = GroupElement> + '_, GroupError> {
        match self {
            GroupSpec::Finite { .. } => {
                let order = self.order().unwrap() as usize;
                Ok((0..order).map(move |i| self.element_at(i).unwrap()))
            }
            GroupSpec::Lattice { .. } => Err(GroupError::NotFinite),
        }
    }

    /// Exact rational-independence test for lattice points: true when the
    /// only integer combination summing to zero is the trivial one.
    pub fn rationally_independent(&self, points: &[GroupElement]) -> Result<bool, GroupError> {
        if !matches!(self, GroupSpec::Lattice { .. }) {
            return Err(GroupError::NotLattice);
        }
        for p in points {
            self.check_dims(p.0.len())?;
        }
        let mat: Vec<Vec<i128>> = points
            .iter()
            .map(|p| p.0.iter().map(|&c| c as i128).collect())
            .collect();
        Ok(integer_rank(mat)? == points.len())
    }

    /// Finds a torus point whose character hits the prescribed unimodular
    /// targets exactly: `γ_θ(x_k) = t_k` for all `k`.
    ///
    /// The points must be rationally independent (verified exactly), which
    /// makes the linear system solvable with no residue; the computed point
    /// is verified to reproduce every target within `1e-9`.
    pub fn kronecker_solve(
        &self,
        points: &[GroupElement],
        targets: &[Complex64],
    ) -> Result<DualPoint, GroupError> {
        let rank = match self {
            GroupSpec::Lattice { rank } => *rank,
            GroupSpec::Finite { .. } => return Err(GroupError::NotLattice),
        };
        if points.len() != targets.len() {
            return Err(GroupError::TargetCountMismatch {
                points: points.len(),
                targets: targets.len(),
            });
        }
        for (i, t) in targets.iter().enumerate() {
            if (t.norm() - 1.0).abs() > tol::UNIMODULAR {
                return Err(GroupError::TargetNotUnimodular {
                    index: i,
                    modulus: t.norm(),
                });
            }
        }
        if !self.rationally_independent(points)? {
            return Err(GroupError::DependentPoints);
        }

        // Solve the (full row rank, underdetermined) system  points · θ = arg
        // by column-pivoted elimination, setting free angles to zero.
        let k = points.len();
        let mut a: Vec<Vec<f64>> = points
            .iter()
            .map(|p| p.0.iter().map(|&c| c as f64).collect())
            .collect();
        let mut b: Vec<f64> = targets.iter().map(|t| t.arg()).collect();
        let mut pivot_cols: Vec<usize> = Vec::with_capacity(k);
        for step in 0..k {
            let mut best = (step, 0usize, 0.0f64);
            for (i, row) in a.iter().enumerate().skip(step) {
                for (j, &v) in row.iter().enumerate() {
                    if !pivot_cols.contains(&j) && v.abs() > best.2 {
                        best = (i, j, v.abs());
                    }
                }
            }
            debug_assert!(best.2 > 0.0, "rank test admitted a dependent system");
            a.swap(step, best.0);
            b.swap(step, best.0);
            let pc = best.1;
            pivot_cols.push(pc);
            for i in step + 1..k {
                let f = a[i][pc] / a[step][pc];
                if f != 0.0 {
                    for j in 0..rank {
                        a[i][j] -= f * a[step][j];
                    }
                    b[i] -= f * b[step];
                }
            }
        }
        let mut theta = vec![0.0f64; rank];
        for step in (0..k).rev() {
            let pc = pivot_cols[step];
            let mut acc = b[step];
            for &qc in &pivot_cols[step + 1..] {
                acc -= a[step][qc] * theta[qc];
            }
            theta[pc] = acc / a[step][pc];
        }

        let point = DualPoint::torus(theta);
        let mut worst = 0.0f64;
        for (p, t) in points.iter().zip(targets) {
            let err = (self.character(&point, p)? - t).norm();
            worst = worst.max(err);
        }
        if worst > tol::UNIMODULAR {
            return Err(GroupError::SolveFailed(worst));
        }
        Ok(point)
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Rank of an integer matrix, computed exactly by fraction-free (Bareiss)
/// elimination with full pivoting. Overflow of the 128-bit intermediates is
/// reported rather than silently wrapped.
fn integer_rank(mut mat: Vec<Vec<i128>>) -> Result<usize, GroupError> {
    let rows = mat.len();
    if rows == 0 {
        return Ok(0);
    }
    let cols = mat[0].len();
    let mut prev = 1i128;
    let mut rank = 0usize;
    for t in 0..rows.min(cols) {
        // Any nonzero entry works as a pivot; exactness does not depend on
        // its size, only overflow risk does, so take the smallest.
        let mut pivot: Option<(usize, usize)> = None;
        for i in t..rows {
            for j in t..cols {
                if mat[i][j] != 0
                    && pivot.is_none_or(|(pi, pj)| mat[i][j].abs() < mat[pi][pj].abs())
                {
                    pivot = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = pivot else { break };
        mat.swap(t, pi);
        for row in mat.iter_mut() {
            row.swap(t, pj);
        }
        for i in t + 1..rows {
            for j in t + 1..cols {
                let lhs = mat[t][t]
                    .checked_mul(mat[i][j])
                    .ok_or(GroupError::CoordinateOverflow)?;
                let rhs = mat[i][t]
                    .checked_mul(mat[t][j])
                    .ok_or(GroupError::CoordinateOverflow)?;
                let num = lhs.checked_sub(rhs).ok_or(GroupError::CoordinateOverflow)?;
                mat[i][j] = num / prev; // exact by the Bareiss identity
            }
        }
        prev = mat[t][t];
        rank += 1;
    }
    Ok(rank)
}

impl fmt::Display for GroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupSpec::Lattice { rank: 1 } => write!(f, "Z"),
            GroupSpec::Lattice { rank } => write!(f, "Z^{rank}"),
            GroupSpec::Finite { moduli } => {
                let mut i = 0;
                let mut first = true;
                while i < moduli.len() {
                    let mut j = i;
                    while j < moduli.len() && moduli[j] == moduli[i] {
                        j += 1;
                    }
                    if !first {
                        write!(f, "x")?;
                    }
                    first = false;
                    if j - i == 1 {
                        write!(f, "Z{}", moduli[i])?;
                    } else {
                        write!(f, "Z{}^{}", moduli[i], j - i)?;
                    }
                    i = j;
                }
                Ok(())
            }
        }
    }
}

impl FromStr for GroupSpec {
    type Err = GroupError;

    /// Parses the group grammar: `Z` or `Z^d` for lattices, products of
    /// `Z<n>` factors with optional `^<count>` repetition for finite
    /// groups, e.g. `Z2^4`, `Z6xZ4`, `Z2^2xZ3`.
    fn from_str(s: &str) -> Result<GroupSpec, GroupError> {
        let s = s.trim();
        let parse_err = || GroupError::Parse(s.to_string());
        if s == "Z" {
            return GroupSpec::lattice(1);
        }
        if let Some(rest) = s.strip_prefix("Z^") {
            let rank: usize = rest.parse().map_err(|_| parse_err())?;
            return GroupSpec::lattice(rank);
        }
        let mut moduli = Vec::new();
        for factor in s.split('x') {
            let body = factor.strip_prefix('Z').ok_or_else(parse_err)?;
            let (mod_str, count) = match body.split_once('^') {
                Some((m, c)) => (m, c.parse::<usize>().map_err(|_| parse_err())?),
                None => (body, 1),
            };
            if count == 0 {
                return Err(parse_err());
            }
            let modulus: u64 = mod_str.parse().map_err(|_| parse_err())?;
            for _ in 0..count {
                moduli.push(modulus);
            }
        }
        GroupSpec::finite(&moduli)
    }
}
