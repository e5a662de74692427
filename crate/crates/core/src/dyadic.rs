//! The exponent-two specialization: real measures on `Z_2^n`.
//!
//! Amplitudes are stored densely in colexicographic order — the enumeration
//! index reads the coordinate string as a binary number whose *last*
//! coordinate is the most significant bit (the same convention as
//! [`GroupSpec::element_at`]). Under that ordering the second half of the
//! index range consists exactly of the strings ending in `1`, so splitting
//! off the last coordinate is a single halving of the array:
//!
//! `b_k = a_k + a_{k+2^{n-1}}`, `c_k = a_k − a_{k+2^{n-1}}`.
//!
//! The transforms of `b` and `c` are precisely the two halves of the
//! transform of the original measure (characters with last dual coordinate
//! `0` and `1`), which drives the recursive greatest-atom certificate: when
//! `‖μ‖ ≤ 1` and `min |μ̂| ≥ δ > 1/2`, the measure must carry a single atom
//! of modulus at least `δ`, and the recursion locates it by splitting,
//! certifying both halves, and matching the two certified positions.

use std::ops::{Add, Sub};

use num_complex::Complex64;
use thiserror::Error;

use crate::group::GroupSpec;
use crate::measure::{DiscreteMeasure, MeasureError};
use crate::tol;

#[derive(Debug, Error, PartialEq)]
pub enum DyadicError {
    #[error("group {0} is not a finite product of Z2 factors")]
    NotDyadicGroup(String),
    #[error("amplitude at {coords} has imaginary part {im:e}; dyadic measures must be real")]
    NotReal { coords: String, im: f64 },
    #[error("amplitude vector has length {found}, need 2^{n} = {expected}")]
    LengthMismatch { n: u32, expected: usize, found: usize },
    #[error("cannot split a measure on a single Z2 factor")]
    SplitAtBase,
    #[error("total variation {0} exceeds 1")]
    NormExceedsOne(f64),
    #[error("delta {0} is not above 1/2")]
    DeltaNotAboveHalf(f64),
    #[error("transform floor {observed} falls below delta {delta}")]
    SpectralFloorBelowDelta { observed: f64, delta: f64 },
    #[error("recursive certificate failed: {0}; the preconditions cannot all hold")]
    CertificateFailed(String),
    #[error(transparent)]
    Measure(#[from] MeasureError),
}

/// In-place Walsh–Hadamard butterfly: replaces `data` by
/// `F[y] = Σ_x (−1)^{popcount(x & y)} data[x]` in `n·2^n` additions.
/// Unnormalized, so applying it twice multiplies by the length.
pub fn fwht<T>(data: &mut [T])
where
    T: Copy + Add<Output = T> + Sub<Output = T>,
{
    let n = data.len();
    assert!(n.is_power_of_two(), "fwht needs a power-of-two length");
    let mut h = 1;
    while h < n {
        for base in (0..n).step_by(h * 2) {
            for i in base..base + h {
                let (a, b) = (data[i], data[i + h]);
                data[i] = a + b;
                data[i + h] = a - b;
            }
        }
        h *= 2;
    }
}

/// A real measure on `Z_2^n`, stored densely in colexicographic order.
#[derive(Clone, PartialEq, Debug)]
pub struct DyadicMeasure {
    n: u32,
    amps: Vec<f64>,
}

impl DyadicMeasure {
    pub fn new(n: u32, amps: Vec<f64>) -> Result<DyadicMeasure, DyadicError> {
        let expected = 1usize << n;
        if n == 0 || amps.len() != expected {
            return Err(DyadicError::LengthMismatch {
                n,
                expected,
                found: amps.len(),
            });
        }
        Ok(DyadicMeasure { n, amps })
    }

    /// Converts a general measure; the group must be `Z_2^n` and every
    /// amplitude real within [`tol::REALNESS`].
    pub fn from_measure(mu: &DiscreteMeasure) -> Result<DyadicMeasure, DyadicError> {
        let group = mu.group();
        if !group.is_exponent_two() {
            return Err(DyadicError::NotDyadicGroup(group.to_string()));
        }
        let n = group.dims() as u32;
        let mut amps = vec![0.0; 1usize << n];
        for (x, a) in mu.atoms() {
            if a.im.abs() > tol::REALNESS {
                return Err(DyadicError::NotReal {
                    coords: x.to_string(),
                    im: a.im,
                });
            }
            amps[group.index_of(x).map_err(MeasureError::from)?] = a.re;
        }
        Ok(DyadicMeasure { n, amps })
    }

    pub fn to_measure(&self) -> DiscreteMeasure {
        let group = GroupSpec::finite(&vec![2; self.n as usize]).expect("valid dyadic group");
        let dense: Vec<Complex64> = self.amps.iter().map(|&a| Complex64::new(a, 0.0)).collect();
        DiscreteMeasure::from_dense(&group, &dense).expect("lengths match by construction")
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amps
    }

    pub fn tv_norm(&self) -> f64 {
        self.amps.iter().map(|a| a.abs()).sum()
    }

    /// The transform values over the dual, in the same colexicographic
    /// order. Real measures on exponent-two groups have real transforms.
    pub fn wht(&self) -> Vec<f64> {
        let mut buf = self.amps.clone();
        fwht(&mut buf);
        buf
    }

    /// Largest atom as `(index, modulus)`; ties resolve to the smallest
    /// index.
    pub fn max_atom(&self) -> (usize, f64) {
        let mut best = (0usize, f64::NEG_INFINITY);
        for (i, &a) in self.amps.iter().enumerate() {
            if a.abs() > best.1 {
                best = (i, a.abs());
            }
        }
        best
    }

    /// Splits off the last coordinate: returns `(b, c)` on `Z_2^{n-1}` with
    /// `b_k = a_k + a_{k+H}` and `c_k = a_k − a_{k+H}` where `H = 2^{n-1}`.
    /// The transforms of `b` and `c` are the first and second halves of the
    /// transform of `self`.
    pub fn split(&self) -> Result<(DyadicMeasure, DyadicMeasure), DyadicError> {
        if self.n < 2 {
            return Err(DyadicError::SplitAtBase);
        }
        let h = self.amps.len() / 2;
        let (lo, hi) = self.amps.split_at(h);
        let b: Vec<f64> = lo.iter().zip(hi).map(|(&a, &s)| a + s).collect();
        let c: Vec<f64> = lo.iter().zip(hi).map(|(&a, &s)| a - s).collect();
        Ok((
            DyadicMeasure { n: self.n - 1, amps: b },
            DyadicMeasure { n: self.n - 1, amps: c },
        ))
    }
}

/// Outcome of the greatest-atom check: the direct maximum and the atom
/// located by the recursive splitting proof, which must coincide whenever
/// the preconditions hold.
#[derive(Clone, Debug)]
pub struct AtomCertificate {
    pub max_atom: f64,
    pub max_index: usize,
    pub recursive_atom: f64,
    pub recursive_index: usize,
    /// `max_atom ≥ δ` within inequality slack.
    pub holds: bool,
}

impl AtomCertificate {
    /// True when the recursive proof landed on the same atom the direct
    /// scan found.
    pub fn paths_agree(&self) -> bool {
        self.max_index == self.recursive_index
    }
}

/// Verifies that a real measure with `‖μ‖ ≤ 1` and transform floor
/// `min |μ̂| ≥ δ > 1/2` carries an atom of modulus at least `δ`.
///
/// Both routes run: the direct scan for the maximal amplitude, and the
/// recursive split-certify-match argument. The recursion inherits its
/// hypotheses from the parent (each half's transform is half of the
/// parent's), so no re-checks are needed on the way down.
pub fn greatest_atom_certificate(
    m: &DyadicMeasure,
    delta: f64,
) -> Result<AtomCertificate, DyadicError> {
    let tv = m.tv_norm();
    if tv > 1.0 + tol::INEQ_SLACK {
        return Err(DyadicError::NormExceedsOne(tv));
    }
    if delta <= 0.5 {
        return Err(DyadicError::DeltaNotAboveHalf(delta));
    }
    let transform = m.wht();
    let observed = transform
        .iter()
        .fold(f64::INFINITY, |acc, v| acc.min(v.abs()));
    if observed < delta - tol::INEQ_SLACK {
        return Err(DyadicError::SpectralFloorBelowDelta { observed, delta });
    }

    let (max_index, max_atom) = m.max_atom();
    let recursive_index = certified_index(&m.amps, delta).map_err(DyadicError::CertificateFailed)?;
    Ok(AtomCertificate {
        max_atom,
        max_index,
        recursive_atom: m.amps[recursive_index].abs(),
        recursive_index,
        holds: max_atom >= delta - tol::INEQ_SLACK,
    })
}

/// Measure-level wrapper: converts first, so non-dyadic groups and complex
/// amplitudes are reported as precondition failures.
pub fn greatest_atom_certificate_for(
    mu: &DiscreteMeasure,
    delta: f64,
) -> Result<AtomCertificate, DyadicError> {
    greatest_atom_certificate(&DyadicMeasure::from_measure(mu)?, delta)
}

/// The recursive proof path. Returns the index of an atom certified to
/// have modulus ≥ δ (up to slack), assuming the caller's hypotheses.
fn certified_index(amps: &[f64], delta: f64) -> Result<usize, String> {
    let slack = tol::INEQ_SLACK;
    if amps.len() == 2 {
        // Base case: |a_0 + a_1| ≥ δ and |a_0 − a_1| ≥ δ force
        // max(|a_0|, |a_1|) = (|a_0+a_1| + |a_0−a_1|)/2 ≥ δ.
        let idx = if amps[0].abs() >= amps[1].abs() { 0 } else { 1 };
        if amps[idx].abs() < delta - slack {
            return Err(format!(
                "base pair ({}, {}) has no atom of size {delta}",
                amps[0], amps[1]
            ));
        }
        return Ok(idx);
    }
    let h = amps.len() / 2;
    let (lo, hi) = amps.split_at(h);
    let b: Vec<f64> = lo.iter().zip(hi).map(|(&a, &s)| a + s).collect();
    let c: Vec<f64> = lo.iter().zip(hi).map(|(&a, &s)| a - s).collect();
    let k1 = certified_index(&b, delta)?;
    let k2 = certified_index(&c, delta)?;
    if k1 != k2 {
        // |b_{k1}| + |c_{k2}| ≤ ‖μ‖ ≤ 1 < 2δ rules this out.
        return Err(format!(
            "certified positions diverge ({k1} vs {k2}) at width {}",
            amps.len()
        ));
    }
    // |a_{k1} ± a_{k1+h}| ≥ δ, so the larger of the pair is ≥ δ.
    let idx = if amps[k1].abs() >= amps[k1 + h].abs() {
        k1
    } else {
        k1 + h
    };
    if amps[idx].abs() < delta - slack {
        return Err(format!(
            "matched pair ({}, {}) has no atom of size {delta}",
            amps[k1],
            amps[k1 + h]
        ));
    }
    Ok(idx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn colex_indexing_reads_last_coordinate_as_most_significant() {
        let g = GroupSpec::finite(&[2, 2]).unwrap();
        let mu = DiscreteMeasure::from_atoms(
            &g,
            [
                (vec![0, 0], c(0.7, 0.0)),
                (vec![1, 0], c(0.1, 0.0)),
                (vec![0, 1], c(0.15, 0.0)),
                (vec![1, 1], c(0.05, 0.0)),
            ],
        )
        .unwrap();
        let d = DyadicMeasure::from_measure(&mu).unwrap();
        assert_eq!(d.amplitudes(), &[0.7, 0.1, 0.15, 0.05]);
        assert_eq!(d.to_measure(), mu);
    }

    #[test]
    fn wht_of_a_pair_is_sum_and_difference() {
        let d = DyadicMeasure::new(1, vec![0.8, 0.2]).unwrap();
        assert_eq!(d.wht(), vec![1.0, 0.6000000000000001]);
    }

    #[test]
    fn wht_twice_rescales_by_length() {
        let d = DyadicMeasure::new(3, vec![0.5, -0.25, 0.0, 0.125, 0.3, 0.0, -0.5, 1.0]).unwrap();
        let mut twice = d.wht();
        fwht(&mut twice);
        for (orig, back) in d.amplitudes().iter().zip(&twice) {
            assert!((orig * 8.0 - back).abs() <= 1e-12);
        }
    }

    #[test]
    fn wht_matches_the_character_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in 1..=5u32 {
            let len = 1usize << n;
            let amps: Vec<f64> = (0..len).map(|_| rng.random_range(-1.0..1.0)).collect();
            let d = DyadicMeasure::new(n, amps).unwrap();
            let mu = d.to_measure();
            let g = mu.group().clone();
            let fast = d.wht();
            for (idx, fast_v) in fast.iter().enumerate() {
                let gamma = crate::group::DualPoint::Finite(g.element_at(idx).unwrap());
                let naive: Complex64 = mu
                    .atoms()
                    .map(|(x, a)| a * g.character(&gamma, x).unwrap())
                    .sum();
                assert!((naive.re - fast_v).abs() <= 1e-10, "n={n} idx={idx}");
                assert!(naive.im.abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn split_forms_sums_and_differences_across_the_last_coordinate() {
        let d = DyadicMeasure::new(2, vec![0.7, 0.1, 0.1, 0.1]).unwrap();
        let (b, c) = d.split().unwrap();
        assert_eq!(b.amplitudes(), &[0.7 + 0.1, 0.1 + 0.1]);
        assert_eq!(c.amplitudes(), &[0.7 - 0.1, 0.0]);
    }

    #[test]
    fn split_halves_cover_the_transform() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 2..=6u32 {
            let len = 1usize << n;
            let amps: Vec<f64> = (0..len).map(|_| rng.random_range(-1.0..1.0)).collect();
            let d = DyadicMeasure::new(n, amps).unwrap();
            let (b, c) = d.split().unwrap();
            let full = d.wht();
            let half = len / 2;
            // The two computations associate the butterfly sums differently,
            // so agreement is up to round-off, not bit-exact.
            for (lhs, rhs) in full[..half].iter().zip(b.wht()) {
                assert!((lhs - rhs).abs() <= 1e-12);
            }
            for (lhs, rhs) in full[half..].iter().zip(c.wht()) {
                assert!((lhs - rhs).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn split_at_a_single_factor_is_refused() {
        let d = DyadicMeasure::new(1, vec![0.9, 0.1]).unwrap();
        assert_eq!(d.split().unwrap_err(), DyadicError::SplitAtBase);
    }

    #[test]
    fn certificate_finds_the_dominant_atom() {
        let d = DyadicMeasure::new(2, vec![0.7, 0.1, 0.1, 0.1]).unwrap();
        // Transform values: 1.0 at the trivial character, 0.6 elsewhere.
        let cert = greatest_atom_certificate(&d, 0.6).unwrap();
        assert!(cert.holds);
        assert!(cert.paths_agree());
        assert_eq!(cert.max_index, 0);
        assert_eq!(cert.max_atom, 0.7);
        assert_eq!(cert.recursive_atom, 0.7);
    }

    #[test]
    fn certificate_rejects_complex_amplitudes() {
        let g = GroupSpec::cyclic(2).unwrap();
        let mu = DiscreteMeasure::from_atoms(
            &g,
            [(vec![0], c(0.5, 0.0)), (vec![1], c(0.0, 0.5))],
        )
        .unwrap();
        assert!(matches!(
            greatest_atom_certificate_for(&mu, 0.7).unwrap_err(),
            DyadicError::NotReal { .. }
        ));
    }

    #[test]
    fn certificate_rejects_non_dyadic_groups() {
        let g = GroupSpec::cyclic(3).unwrap();
        let mu = DiscreteMeasure::dirac(&g, &[0]).unwrap();
        assert!(matches!(
            greatest_atom_certificate_for(&mu, 0.7).unwrap_err(),
            DyadicError::NotDyadicGroup(_)
        ));
    }

    #[test]
    fn certificate_precondition_failures_name_the_hypothesis() {
        let d = DyadicMeasure::new(1, vec![0.5, 0.5]).unwrap();
        // Transform (1, 0): the floor is 0.
        assert_eq!(
            greatest_atom_certificate(&d, 0.6).unwrap_err(),
            DyadicError::SpectralFloorBelowDelta {
                observed: 0.0,
                delta: 0.6
            }
        );
        let big = DyadicMeasure::new(1, vec![0.9, 0.3]).unwrap();
        assert!(matches!(
            greatest_atom_certificate(&big, 0.6).unwrap_err(),
            DyadicError::NormExceedsOne(_)
        ));
        let ok = DyadicMeasure::new(1, vec![0.9, 0.1]).unwrap();
        assert_eq!(
            greatest_atom_certificate(&ok, 0.5).unwrap_err(),
            DyadicError::DeltaNotAboveHalf(0.5)
        );
    }

    #[test]
    fn randomized_admissible_measures_always_certify() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..500 {
            let n = rng.random_range(1..=6u32);
            let len = 1usize << n;
            let head = rng.random_range(0..len);
            let head_mass: f64 = rng.random_range(0.55..0.95);
            let budget = (1.0 - head_mass).min(head_mass - 0.51);
            let mut amps = vec![0.0; len];
            amps[head] = if rng.random_bool(0.5) { head_mass } else { -head_mass };
            let mut tail = budget * rng.random_range(0.0..1.0);
            while tail > 1e-3 {
                let idx = rng.random_range(0..len);
                if idx == head {
                    continue;
                }
                let chunk = (tail * rng.random_range(0.1..1.0)).min(tail);
                amps[idx] += if rng.random_bool(0.5) { chunk } else { -chunk };
                tail -= chunk;
            }
            let d = DyadicMeasure::new(n, amps).unwrap();
            let floor = d
                .wht()
                .iter()
                .fold(f64::INFINITY, |acc, v| acc.min(v.abs()));
            assert!(floor > 0.5, "construction keeps the floor above 1/2");
            let cert = greatest_atom_certificate(&d, floor).unwrap();
            assert!(cert.holds);
            assert!(cert.paths_agree());
            assert_eq!(cert.recursive_atom, cert.max_atom);
        }
    }
}
