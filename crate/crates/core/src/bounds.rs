//! Closed-form inverse-norm bounds, atom-mass estimates, and the report
//! that certifies which of them apply to a concrete measure.
//!
//! Everything here takes a *certified* spectral floor `δ` — an exact
//! minimum over a finite dual, or a Lipschitz-corrected grid bound — and
//! never a bare observed sample minimum. An unsound certificate is the one
//! unrecoverable failure mode of this module.
//!
//! The quantitative theorems, in report order:
//!
//! * dominant atom — `‖μ⁻¹‖ ≤ 1/(2|a₁|−1)` when `‖μ‖ ≤ 1` and `|a₁| > ½`;
//! * factorization — `‖μ⁻¹‖ ≤ 1/(2δ²−1)` when `δ > 1/√2`;
//! * infinite-order gap — when the difference of the two largest atom
//!   locations has infinite order, `|a₁| ≥ (1−δ+√(17δ²+6δ−7))/4` and the
//!   refined norm bound holds for `δ > (√33−1)/8 ≈ 0.593`;
//! * finite-order gap — when that difference has finite order `n`,
//!   `|a₁| ≥ f(δ,n) = δ − (1−δ)/(2(1−sin(π/2n)))` with bound `1/(2f−1)`;
//! * independent support — on a lattice with a rationally independent
//!   translated support tail, `‖μ⁻¹‖ ≤ 1/(2δ−1)` and the refinement
//!   `1/(2(‖μ‖+δ−|a₁|)−1)`;
//! * exponent-two real — real measures on `Z₂`-products: `‖μ⁻¹‖ ≤ 1/(2δ−1)`.
//!
//! Alongside these sit the sequence lemmas (`x₁ ≥ δ²`, `x₁+x₂ ≥ δ`, and the
//! sign-sum domination `x₁ ≥ δ + Σ_{n≥2} x_n`) and the qualitative
//! invertibility test `δ > ½`.

use serde::Serialize;
use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt::Write as _;
use thiserror::Error;

use crate::group::{ElementOrder, GroupError};
use crate::measure::{DiscreteMeasure, MeasureError};
use crate::tol;

#[derive(Debug, Error, PartialEq)]
pub enum BoundsError {
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("discriminant 17d^2+6d-7 = {0} is negative")]
    DomainError(f64),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Group(#[from] GroupError),
}

/// Outcome of the head-of-sequence check: the lower bounds the sequence
/// must satisfy and whether it does.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SequenceHeadCheck {
    /// Lower bound for the first entry: `δ²`.
    pub x1_min: f64,
    /// Lower bound for the sum of the first two entries: `δ`.
    pub pair_min: f64,
    pub holds: bool,
}

fn validate_sequence(x: &[f64]) -> Result<(), BoundsError> {
    for (i, w) in x.windows(2).enumerate() {
        if w[1] > w[0] + tol::INEQ_SLACK {
            return Err(BoundsError::PreconditionViolated(format!(
                "sequence increases at position {i}: {} < {}",
                w[0], w[1]
            )));
        }
    }
    if let Some((i, &v)) = x.iter().enumerate().find(|(_, &v)| v < -tol::INEQ_SLACK) {
        return Err(BoundsError::PreconditionViolated(format!(
            "sequence entry {i} is negative: {v}"
        )));
    }
    Ok(())
}

/// Checks the head inequalities `x₁ ≥ δ²` and `x₁ + x₂ ≥ δ` for a
/// nonincreasing nonnegative sequence with `Σx ≤ 1` and `Σx² ≥ δ²`,
/// `½ < δ ≤ 1`.
///
/// Under those hypotheses the inequalities are a theorem: a `holds = false`
/// return on validated input is a defect, and the test suites treat it as
/// such.
pub fn check_sequence_head(x: &[f64], delta: f64) -> Result<SequenceHeadCheck, BoundsError> {
    validate_sequence(x)?;
    if !(delta > 0.5 && delta <= 1.0 + tol::INEQ_SLACK) {
        return Err(BoundsError::PreconditionViolated(format!(
            "delta {delta} is outside (1/2, 1]"
        )));
    }
    let sum: f64 = x.iter().sum();
    if sum > 1.0 + tol::INEQ_SLACK {
        return Err(BoundsError::PreconditionViolated(format!(
            "sequence sums to {sum} > 1"
        )));
    }
    let sq: f64 = x.iter().map(|v| v * v).sum();
    if sq < delta * delta - tol::INEQ_SLACK {
        return Err(BoundsError::PreconditionViolated(format!(
            "sum of squares {sq} falls below delta^2 = {}",
            delta * delta
        )));
    }
    let x1 = x.first().copied().unwrap_or(0.0);
    let x2 = x.get(1).copied().unwrap_or(0.0);
    Ok(SequenceHeadCheck {
        x1_min: delta * delta,
        pair_min: delta,
        holds: x1 >= delta * delta - tol::INEQ_SLACK && x1 + x2 >= delta - tol::INEQ_SLACK,
    })
}

/// The measure-level form of [`check_sequence_head`]: `|a₁| ≥ δ²` and
/// `|a₁| + |a₂| ≥ δ` for the two largest atoms of a measure with `‖μ‖ ≤ 1`
/// and certified floor `δ > ½`.
pub fn check_atom_head(mu: &DiscreteMeasure, delta: f64) -> Result<bool, BoundsError> {
    let tv = mu.tv_norm();
    if tv > 1.0 + tol::INEQ_SLACK {
        return Err(BoundsError::PreconditionViolated(format!(
            "total variation {tv} exceeds 1"
        )));
    }
    if !(delta > 0.5 && delta <= 1.0 + tol::INEQ_SLACK) {
        return Err(BoundsError::PreconditionViolated(format!(
            "delta {delta} is outside (1/2, 1]"
        )));
    }
    let sorted = mu.sorted_atoms();
    let a1 = sorted.modulus(0);
    let a2 = sorted.modulus(1);
    Ok(a1 >= delta * delta - tol::INEQ_SLACK && a1 + a2 >= delta - tol::INEQ_SLACK)
}

/// Atom-mass and norm bounds under the infinite-order gap hypothesis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GapBound {
    /// `(1−δ+√(17δ²+6δ−7))/4`, the sharp head-atom lower bound.
    pub a1_min: f64,
    /// The weaker linear form `(3/2)δ − ½`.
    pub a1_min_linear: f64,
    /// `1/(3δ−2)`, available for `δ > 2/3`.
    pub norm_bound_linear: Option<f64>,
    /// `2/(−(1+δ)+√(17δ²+6δ−7))`, available above
    /// [`refined_gap_threshold`]. This equals `1/(2·a1_min − 1)` exactly,
    /// and is evaluated in that form: near the threshold the direct
    /// denominator cancels catastrophically, while the reciprocal form
    /// keeps the published identity between the two fields bit-true.
    pub norm_bound_refined: Option<f64>,
}

/// The `δ` above which the refined infinite-order-gap bound is finite:
/// `(√33 − 1)/8 ≈ 0.593070`.
pub fn refined_gap_threshold() -> f64 {
    (33.0f64.sqrt() - 1.0) / 8.0
}

/// Evaluates the infinite-order-gap formulas at a floor `δ > ½`.
pub fn infinite_order_gap_bound(delta: f64) -> Result<GapBound, BoundsError> {
    if !(delta > 0.5) {
        return Err(BoundsError::PreconditionViolated(format!(
            "delta {delta} is not above 1/2"
        )));
    }
    let disc = 17.0 * delta * delta + 6.0 * delta - 7.0;
    if disc < 0.0 {
        return Err(BoundsError::DomainError(disc));
    }
    let root = disc.sqrt();
    let a1_min = (1.0 - delta + root) / 4.0;
    Ok(GapBound {
        a1_min,
        a1_min_linear: 1.5 * delta - 0.5,
        norm_bound_linear: (delta > 2.0 / 3.0).then(|| 1.0 / (3.0 * delta - 2.0)),
        norm_bound_refined: (delta > refined_gap_threshold())
            .then(|| 1.0 / (2.0 * a1_min - 1.0)),
    })
}

/// The finite-order analogue: head-atom bound `f(δ,n)` and, when `f > ½`,
/// the norm bound `1/(2f−1)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FiniteOrderBound {
    /// `f(δ, n) = δ − (1−δ) / (2(1 − sin(π/2n)))`.
    pub f: f64,
    /// `1/(2f−1)`, emitted exactly when `f > ½`. The gate is the computed
    /// value of `f` itself, which is sound by construction.
    pub norm_bound: Option<f64>,
}

/// Evaluates the finite-order-gap formulas. The order `n` is that of the
/// difference of the two largest atom locations; `n ≥ 2` and
/// `δ ∈ (½, 1]` are contract violations, not runtime conditions.
pub fn finite_order_gap_bound(delta: f64, n: u64) -> FiniteOrderBound {
    assert!(n >= 2, "the gap element has order at least 2");
    assert!(
        delta > 0.5 && delta <= 1.0 + tol::INEQ_SLACK,
        "delta {delta} is outside (1/2, 1]"
    );
    let s = (std::f64::consts::PI / (2.0 * n as f64)).sin();
    let f = delta - (1.0 - delta) / (2.0 * (1.0 - s));
    FiniteOrderBound {
        f,
        norm_bound: (f > 0.5).then(|| 1.0 / (2.0 * f - 1.0)),
    }
}

/// Checks the sign-sum domination conclusion `x₁ ≥ δ + Σ_{n≥2} x_n` for a
/// nonincreasing nonnegative sequence with `Σx ≤ 1`, `δ > ½`, whose
/// alternating sum and head-minus-tail sum both reach `δ` in modulus.
pub fn check_sign_sum_domination(x: &[f64], delta: f64) -> Result<bool, BoundsError> {
    validate_sequence(x)?;
    if !(delta > 0.5) {
        return Err(BoundsError::PreconditionViolated(format!(
            "delta {delta} is not above 1/2"
        )));
    }
    let sum: f64 = x.iter().sum();
    if sum > 1.0 + tol::INEQ_SLACK {
        return Err(BoundsError::PreconditionViolated(format!(
            "sequence sums to {sum} > 1"
        )));
    }
    let alternating: f64 = x
        .iter()
        .enumerate()
        .map(|(i, &v)| if i % 2 == 0 { v } else { -v })
        .sum();
    if alternating.abs() < delta - tol::INEQ_SLACK {
        return Err(BoundsError::PreconditionViolated(format!(
            "alternating sum {alternating} has modulus below delta = {delta}"
        )));
    }
    let x1 = x.first().copied().unwrap_or(0.0);
    let rest = sum - x1;
    if (x1 - rest).abs() < delta - tol::INEQ_SLACK {
        return Err(BoundsError::PreconditionViolated(format!(
            "head minus tail {} has modulus below delta = {delta}",
            x1 - rest
        )));
    }
    Ok(x1 >= delta + rest - tol::INEQ_SLACK)
}

/// Verdict of the independent-support certifier.
#[derive(Clone, Debug, PartialEq)]
pub struct IndependentSupportCertificate {
    pub applies: bool,
    /// `1/(2δ−1)` when the theorem applies.
    pub bound: Option<f64>,
    /// The sharper `1/(2(‖μ‖+δ−|a₁|)−1)` when the theorem applies.
    pub refined: Option<f64>,
}

/// Certifies the independent-support theorem on a lattice measure: the
/// support minus the translated head (`{y_k − y₁ : k ≥ 2}`, which is what
/// the head-at-origin reduction actually uses) must be rationally
/// independent. Independence is decided in exact integer arithmetic.
pub fn independent_support_bound(
    mu: &DiscreteMeasure,
    delta: f64,
) -> Result<IndependentSupportCertificate, BoundsError> {
    let group = mu.group();
    if group.is_finite() {
        return Err(BoundsError::PreconditionViolated(format!(
            "group {group} has no elements of infinite order"
        )));
    }
    let tv = mu.tv_norm();
    if tv > 1.0 + tol::INEQ_SLACK {
        return Err(BoundsError::PreconditionViolated(format!(
            "total variation {tv} exceeds 1"
        )));
    }
    if !(delta > 0.5) {
        return Err(BoundsError::PreconditionViolated(format!(
            "delta {delta} is not above 1/2"
        )));
    }
    let sorted = mu.sorted_atoms();
    let (head, head_amp) = sorted
        .head()
        .ok_or_else(|| BoundsError::PreconditionViolated("measure has no atoms".to_string()))?;
    let tail: Vec<_> = sorted.entries()[1..]
        .iter()
        .map(|(x, _)| group.sub(x, head))
        .collect::<Result<_, _>>()?;
    let applies = group.rationally_independent(&tail)?;
    let a1 = head_amp.norm();
    Ok(IndependentSupportCertificate {
        applies,
        bound: applies.then(|| 1.0 / (2.0 * delta - 1.0)),
        refined: applies.then(|| 1.0 / (2.0 * (tv + delta - a1) - 1.0)),
    })
}

/// The qualitative invertibility criterion: a measure with `‖μ‖ ≤ 1` is
/// invertible whenever its certified floor exceeds `½` — strictly.
pub fn qualitative_invertible(mu: &DiscreteMeasure, delta: f64) -> Result<bool, BoundsError> {
    let tv = mu.tv_norm();
    if tv > 1.0 + tol::INEQ_SLACK {
        return Err(BoundsError::PreconditionViolated(format!(
            "total variation {tv} exceeds 1"
        )));
    }
    Ok(delta > 0.5)
}

/// The theorems a [`BoundReport`] rules on.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TheoremId {
    DominantAtom,
    NikolskiFactorization,
    InfiniteOrderGap,
    FiniteOrderGap,
    IndependentSupport,
    ExponentTwoReal,
}

impl TheoremId {
    pub fn as_str(&self) -> &'static str {
        match self {
            TheoremId::DominantAtom => "dominant_atom",
            TheoremId::NikolskiFactorization => "nikolski_factorization",
            TheoremId::InfiniteOrderGap => "infinite_order_gap",
            TheoremId::FiniteOrderGap => "finite_order_gap",
            TheoremId::IndependentSupport => "independent_support",
            TheoremId::ExponentTwoReal => "exponent_two_real",
        }
    }

    pub fn all() -> [TheoremId; 6] {
        [
            TheoremId::DominantAtom,
            TheoremId::NikolskiFactorization,
            TheoremId::InfiniteOrderGap,
            TheoremId::FiniteOrderGap,
            TheoremId::IndependentSupport,
            TheoremId::ExponentTwoReal,
        ]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "status", content = "reason", rename_all = "snake_case")]
pub enum Applicability {
    Applies,
    FailsHypothesis(String),
}

impl Applicability {
    pub fn applies(&self) -> bool {
        matches!(self, Applicability::Applies)
    }
}

/// One theorem's row in a report. `predicted` is present exactly when the
/// theorem applies.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TheoremVerdict {
    pub theorem: TheoremId,
    pub applicability: Applicability,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub predicted: Option<f64>,
}

/// Per-theorem applicability verdicts and predicted bounds for one
/// measure, under one certified floor.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundReport {
    /// The certified spectral floor the verdicts are based on.
    pub delta: f64,
    /// Whether `delta` is an exact full-dual minimum (as opposed to a
    /// grid-certified lower bound).
    pub delta_exact: bool,
    pub tv: f64,
    pub head_modulus: f64,
    pub second_modulus: f64,
    /// The qualitative criterion `δ > ½` (no norm bound attached).
    pub qualitative_applies: bool,
    pub qualitative_reason: String,
    pub verdicts: Vec<TheoremVerdict>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub observed_inverse_norm: Option<f64>,
}

fn verdict(theorem: TheoremId, outcome: Result<f64, String>) -> TheoremVerdict {
    match outcome {
        Ok(predicted) => TheoremVerdict {
            theorem,
            applicability: Applicability::Applies,
            predicted: Some(predicted),
        },
        Err(reason) => TheoremVerdict {
            theorem,
            applicability: Applicability::FailsHypothesis(reason),
            predicted: None,
        },
    }
}

/// Builds the full report. `delta` must be a certified floor in `(0, 1]`;
/// `observed_inverse_norm`, when available, lets [`BoundReport::violations`]
/// confront every applicable prediction with reality.
pub fn build_report(
    mu: &DiscreteMeasure,
    delta: f64,
    delta_exact: bool,
    observed_inverse_norm: Option<f64>,
) -> Result<BoundReport, BoundsError> {
    if !(delta.is_finite() && delta > 0.0 && delta <= 1.0 + tol::INEQ_SLACK) {
        return Err(BoundsError::PreconditionViolated(format!(
            "certified floor {delta} is outside (0, 1]"
        )));
    }
    let group = mu.group();
    let tv = mu.tv_norm();
    let sorted = mu.sorted_atoms();
    let a1 = sorted.modulus(0);
    let a2 = sorted.modulus(1);
    let mass_ok = tv <= 1.0 + tol::INEQ_SLACK;

    let (qualitative_applies, qualitative_reason) = if !mass_ok {
        (false, format!("total variation {tv} exceeds 1"))
    } else if delta > 0.5 {
        (true, format!("spectral floor {delta} exceeds 1/2"))
    } else {
        (false, format!("spectral floor {delta} is not above 1/2"))
    };

    let mass_check = || -> Result<(), String> {
        if mass_ok {
            Ok(())
        } else {
            Err(format!("total variation {tv} exceeds 1"))
        }
    };
    let floor_above_half = || -> Result<(), String> {
        if delta > 0.5 {
            Ok(())
        } else {
            Err(format!("spectral floor {delta} is not above 1/2"))
        }
    };
    // Order of the difference of the two largest atom locations — the gap
    // theorems' dividing hypothesis.
    let gap_order = || -> Result<ElementOrder, String> {
        if mu.num_atoms() < 2 {
            return Err("fewer than two atoms".to_string());
        }
        let entries = sorted.entries();
        let diff = group
            .sub(&entries[1].0, &entries[0].0)
            .map_err(|e| e.to_string())?;
        group.order_of(&diff).map_err(|e| e.to_string())
    };

    let dominant = mass_check().and_then(|()| {
        if a1 > 0.5 {
            Ok(1.0 / (2.0 * a1 - 1.0))
        } else {
            Err(format!("largest atom {a1} is not above 1/2"))
        }
    });

    let factorization = mass_check().and_then(|()| {
        if delta > FRAC_1_SQRT_2 {
            Ok(1.0 / (2.0 * delta * delta - 1.0))
        } else {
            Err(format!("spectral floor {delta} does not exceed 1/sqrt(2)"))
        }
    });

    let infinite_gap = mass_check()
        .and_then(|()| floor_above_half())
        .and_then(|()| match gap_order()? {
            ElementOrder::Infinite => {
                let gap = infinite_order_gap_bound(delta).map_err(|e| e.to_string())?;
                gap.norm_bound_refined.ok_or_else(|| {
                    format!(
                        "spectral floor {delta} is at or below the refined-bound threshold {}",
                        refined_gap_threshold()
                    )
                })
            }
            ElementOrder::Finite(n) => {
                Err(format!("difference of the top atom locations has finite order {n}"))
            }
        });

    let finite_gap = mass_check()
        .and_then(|()| floor_above_half())
        .and_then(|()| match gap_order()? {
            ElementOrder::Finite(n) => {
                let bound = finite_order_gap_bound(delta, n);
                bound.norm_bound.ok_or_else(|| {
                    format!("gap function value {} is not above 1/2", bound.f)
                })
            }
            ElementOrder::Infinite => {
                Err("difference of the top atom locations has infinite order".to_string())
            }
        });

    let independent = mass_check()
        .and_then(|()| floor_above_half())
        .and_then(|()| {
            if group.is_finite() {
                return Err(format!("group {group} has no elements of infinite order"));
            }
            let cert = independent_support_bound(mu, delta).map_err(|e| e.to_string())?;
            match cert.bound {
                Some(bound) => Ok(bound),
                None => Err("translated support tail is rationally dependent".to_string()),
            }
        });

    let exponent_two = mass_check()
        .and_then(|()| floor_above_half())
        .and_then(|()| {
            if !group.is_exponent_two() {
                return Err(format!("group {group} is not of exponent two"));
            }
            if !mu.is_real() {
                return Err("measure has imaginary amplitude components".to_string());
            }
            Ok(1.0 / (2.0 * delta - 1.0))
        });

    Ok(BoundReport {
        delta,
        delta_exact,
        tv,
        head_modulus: a1,
        second_modulus: a2,
        qualitative_applies,
        qualitative_reason,
        verdicts: vec![
            verdict(TheoremId::DominantAtom, dominant),
            verdict(TheoremId::NikolskiFactorization, factorization),
            verdict(TheoremId::InfiniteOrderGap, infinite_gap),
            verdict(TheoremId::FiniteOrderGap, finite_gap),
            verdict(TheoremId::IndependentSupport, independent),
            verdict(TheoremId::ExponentTwoReal, exponent_two),
        ],
        observed_inverse_norm,
    })
}

impl BoundReport {
    /// Internal-consistency and soundness violations; empty means the
    /// report is coherent and every applicable prediction dominates the
    /// observed norm.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        for v in &self.verdicts {
            if v.applicability.applies() != v.predicted.is_some() {
                out.push(format!(
                    "{}: predicted value must be present exactly when the theorem applies",
                    v.theorem.as_str()
                ));
            }
            if let (Some(observed), Some(predicted)) = (self.observed_inverse_norm, v.predicted) {
                if observed > predicted + tol::NORM_SLACK {
                    out.push(format!(
                        "{}: observed inverse norm {observed} exceeds predicted {predicted}",
                        v.theorem.as_str()
                    ));
                }
            }
        }
        if self.qualitative_applies && !(self.delta > 0.5) {
            out.push("qualitative verdict applies without the floor exceeding 1/2".to_string());
        }
        out
    }

    /// Rows that apply, with their predictions.
    pub fn applicable(&self) -> impl Iterator<Item = (&TheoremVerdict, f64)> {
        self.verdicts
            .iter()
            .filter_map(|v| v.predicted.map(|p| (v, p)))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }

    /// Plain-text rendering: one summary block, one line per theorem.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let kind = if self.delta_exact {
            "exact over the full dual"
        } else {
            "grid-certified lower bound"
        };
        let _ = writeln!(out, "spectral floor delta = {} ({kind})", self.delta);
        let _ = writeln!(out, "total variation = {}", self.tv);
        let _ = writeln!(
            out,
            "largest atoms: |a1| = {}, |a2| = {}",
            self.head_modulus, self.second_modulus
        );
        let q = if self.qualitative_applies { "applies" } else { "fails" };
        let _ = writeln!(
            out,
            "qualitative invertibility: {q} — {}",
            self.qualitative_reason
        );
        for v in &self.verdicts {
            match (&v.applicability, v.predicted) {
                (Applicability::Applies, Some(p)) => {
                    let _ = writeln!(out, "{}: applies — predicted norm bound {p}", v.theorem.as_str());
                }
                (Applicability::FailsHypothesis(reason), _) => {
                    let _ = writeln!(out, "{}: fails — {reason}", v.theorem.as_str());
                }
                (Applicability::Applies, None) => {
                    let _ = writeln!(out, "{}: applies — (missing prediction)", v.theorem.as_str());
                }
            }
        }
        if let Some(observed) = self.observed_inverse_norm {
            let _ = writeln!(out, "observed inverse norm = {observed}");
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::GroupSpec;
    use crate::inversion::dense_invert;
    use crate::spectra::spectral_min;
    use num_complex::Complex64;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn measure(group: &GroupSpec, atoms: &[(&[i64], Complex64)]) -> DiscreteMeasure {
        DiscreteMeasure::from_atoms(group, atoms.iter().map(|(x, a)| (x.to_vec(), *a))).unwrap()
    }

    #[test]
    fn half_half_sequence_attains_the_square_bound() {
        let check = check_sequence_head(&[0.5, 0.5], FRAC_1_SQRT_2).unwrap();
        assert!(check.holds);
        assert!((check.x1_min - 0.5).abs() <= 1e-12);
        assert!((0.5f64 - check.x1_min).abs() <= 1e-12);
        assert_eq!(check.pair_min, FRAC_1_SQRT_2);
    }

    #[test]
    fn single_entry_sequence_holds() {
        assert!(check_sequence_head(&[1.0], 0.9).unwrap().holds);
    }

    #[test]
    fn three_entry_sequence_holds() {
        // Σx² = 0.44 ≥ 0.66² = 0.4356.
        assert!(check_sequence_head(&[0.6, 0.2, 0.2], 0.66).unwrap().holds);
    }

    #[test]
    fn sequence_preconditions_are_named() {
        match check_sequence_head(&[0.4, 0.35], 0.7).unwrap_err() {
            BoundsError::PreconditionViolated(reason) => {
                assert!(reason.contains("sum of squares"), "{reason}");
            }
            other => panic!("unexpected error {other:?}"),
        }
        assert!(check_sequence_head(&[0.2, 0.4], 0.6).is_err());
        assert!(check_sequence_head(&[0.8, -0.1], 0.6).is_err());
        assert!(check_sequence_head(&[0.9, 0.2], 0.8).is_err());
        assert!(check_sequence_head(&[0.9], 0.5).is_err());
    }

    #[test]
    fn atom_head_check_accepts_the_rotated_pair_with_equality() {
        let g = GroupSpec::cyclic(2).unwrap();
        let mu = measure(&g, &[(&[0], c(0.5, 0.0)), (&[1], c(0.0, 0.5))]);
        let delta = spectral_min(&mu).unwrap();
        assert_eq!(delta, FRAC_1_SQRT_2);
        assert!(check_atom_head(&mu, delta).unwrap());
        // The head sits exactly at δ²: the inequality is tight here.
        assert!((mu.sorted_atoms().modulus(0) - delta * delta).abs() <= 1e-12);
    }

    #[test]
    fn atom_head_check_accepts_dirac_and_dominant_pair() {
        let g = GroupSpec::cyclic(2).unwrap();
        let dirac = DiscreteMeasure::dirac(&g, &[0]).unwrap();
        assert!(check_atom_head(&dirac, 1.0).unwrap());
        let mu = measure(&g, &[(&[0], c(0.8, 0.0)), (&[1], c(0.2, 0.0))]);
        assert!(check_atom_head(&mu, 0.6).unwrap());
    }

    #[test]
    fn gap_bound_at_point_seven_matches_the_frozen_values() {
        let gap = infinite_order_gap_bound(0.7).unwrap();
        assert!((gap.a1_min - 0.6628988008152424).abs() <= 1e-15);
        assert!((gap.a1_min_linear - 0.55).abs() <= 1e-15);
        let linear = gap.norm_bound_linear.unwrap();
        assert!((linear - 10.0).abs() <= 1e-12);
        let refined = gap.norm_bound_refined.unwrap();
        assert!((refined - 3.0694).abs() <= 1e-4);
        assert!((refined - 1.0 / (2.0 * gap.a1_min - 1.0)).abs() <= 1e-12);
        // Cross-check against the direct closed form, which at this δ is
        // far enough from the threshold to be numerically benign.
        let disc: f64 = 17.0 * 0.49 + 4.2 - 7.0;
        let direct = 2.0 / (-1.7 + disc.sqrt());
        assert!((refined - direct).abs() <= 1e-10 * refined);
    }

    #[test]
    fn gap_bound_degenerates_exactly_at_the_threshold() {
        let t = refined_gap_threshold();
        assert!((t - 0.593070331).abs() <= 1e-9);
        let at = infinite_order_gap_bound(t).unwrap();
        assert!((at.a1_min - 0.5).abs() <= 1e-6);
        assert_eq!(at.norm_bound_refined, None);
        assert_eq!(at.norm_bound_linear, None);
        let above = infinite_order_gap_bound(t + 1e-9).unwrap();
        assert!(above.norm_bound_refined.unwrap() > 1e6);
    }

    #[test]
    fn gap_bound_is_exact_for_a_unimodular_floor() {
        let gap = infinite_order_gap_bound(1.0).unwrap();
        assert_eq!(gap.a1_min, 1.0);
        assert_eq!(gap.norm_bound_linear, Some(1.0));
        assert_eq!(gap.norm_bound_refined, Some(1.0));
    }

    #[test]
    fn gap_bound_requires_a_floor_above_half() {
        assert!(matches!(
            infinite_order_gap_bound(0.5).unwrap_err(),
            BoundsError::PreconditionViolated(_)
        ));
    }

    #[test]
    fn finite_order_bound_matches_the_frozen_values() {
        let b = finite_order_gap_bound(0.95, 2);
        assert!((b.f - 0.8646446609406726).abs() <= 1e-15);
        let bound = b.norm_bound.unwrap();
        assert!((bound - 1.3712).abs() <= 1e-4);
        assert!((bound - 1.0 / (2.0 * b.f - 1.0)).abs() <= 1e-12);

        let unimodular = finite_order_gap_bound(1.0, 7);
        assert_eq!(unimodular.f, 1.0);
        assert_eq!(unimodular.norm_bound, Some(1.0));

        let low = finite_order_gap_bound(0.6, 2);
        assert!((low.f - -0.0828).abs() <= 1e-4);
        assert_eq!(low.norm_bound, None);
    }

    #[test]
    fn finite_order_bound_approaches_the_linear_gap_limit() {
        for delta in [0.55, 0.7, 0.9] {
            let limit = 1.5 * delta - 0.5;
            let huge = finite_order_gap_bound(delta, 1 << 40);
            assert!((huge.f - limit).abs() <= 1e-9);
            for n in [2, 3, 5, 16, 256] {
                assert!(finite_order_gap_bound(delta, n).f <= limit + 1e-15);
            }
        }
    }

    #[test]
    fn finite_order_bound_is_monotone() {
        // f grows with δ at fixed order, and grows with the order at fixed
        // δ — so the emitted norm bound shrinks in both directions.
        let mut prev = f64::NEG_INFINITY;
        for k in 1..=40 {
            let delta = 0.5 + 0.0125 * k as f64;
            let f = finite_order_gap_bound(delta.min(1.0), 3).f;
            assert!(f > prev);
            prev = f;
        }
        // At δ = 0.8 the order-2 case stays below 1/2 (f ≈ 0.4586), so no
        // bound is emitted there; from order 3 on, f clears 1/2 and the
        // bound tightens monotonically.
        assert_eq!(finite_order_gap_bound(0.8, 2).norm_bound, None);
        let mut prev = finite_order_gap_bound(0.8, 2).f;
        let mut prev_bound = f64::INFINITY;
        for n in [3u64, 4, 6, 10, 100, 10_000] {
            let b = finite_order_gap_bound(0.8, n);
            assert!(b.f > prev);
            prev = b.f;
            let bound = b.norm_bound.expect("f(0.8, n) exceeds 1/2 for all n ≥ 3");
            assert!(bound <= prev_bound);
            prev_bound = bound;
        }
    }

    #[test]
    fn sign_sum_domination_examples() {
        // Equality witness: 0.8 = 0.6 + 0.2.
        assert!(check_sign_sum_domination(&[0.8, 0.1, 0.1], 0.6).unwrap());
        assert!(check_sign_sum_domination(&[1.0], 0.9).unwrap());
        assert!(check_sign_sum_domination(&[0.7, 0.1], 0.6).unwrap());
    }

    #[test]
    fn sign_sum_domination_preconditions_are_named() {
        match check_sign_sum_domination(&[0.6, 0.3], 0.6).unwrap_err() {
            BoundsError::PreconditionViolated(reason) => {
                assert!(reason.contains("alternating"), "{reason}");
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    fn plane_showcase() -> DiscreteMeasure {
        let g = GroupSpec::lattice(2).unwrap();
        measure(
            &g,
            &[
                (&[0, 0], c(0.8, 0.0)),
                (&[1, 0], c(0.1, 0.0)),
                (&[0, 1], c(0.1, 0.0)),
            ],
        )
    }

    #[test]
    fn independent_support_certifies_the_plane_showcase() {
        let cert = independent_support_bound(&plane_showcase(), 0.6).unwrap();
        assert!(cert.applies);
        assert!((cert.bound.unwrap() - 5.0).abs() <= 1e-12);
        assert!((cert.refined.unwrap() - 1.0 / 0.6).abs() <= 1e-12);
        assert!(cert.refined.unwrap() <= cert.bound.unwrap());
    }

    #[test]
    fn independent_support_handles_a_lone_dirac() {
        let g = GroupSpec::lattice(1).unwrap();
        let mu = DiscreteMeasure::dirac(&g, &[0]).unwrap();
        let cert = independent_support_bound(&mu, 1.0).unwrap();
        assert!(cert.applies);
        assert_eq!(cert.bound, Some(1.0));
        assert_eq!(cert.refined, Some(1.0));
    }

    #[test]
    fn independent_support_rejects_a_dependent_tail() {
        let g = GroupSpec::lattice(1).unwrap();
        // Head at the origin; translated tail {1, 2} satisfies 2·1 − 2 = 0.
        let mu = measure(
            &g,
            &[
                (&[0], c(0.8, 0.0)),
                (&[1], c(0.1, 0.0)),
                (&[2], c(0.1, 0.0)),
            ],
        );
        let cert = independent_support_bound(&mu, 0.6).unwrap();
        assert!(!cert.applies);
        assert_eq!(cert.bound, None);
        assert_eq!(cert.refined, None);
    }

    #[test]
    fn independent_support_translates_the_head_before_testing() {
        let g = GroupSpec::lattice(1).unwrap();
        // Support {1, 2} is dependent as a set, but the head at 1 leaves
        // the translated tail {1}, which is independent — exactly what the
        // head-at-origin reduction consumes.
        let mu = measure(&g, &[(&[1], c(0.8, 0.0)), (&[2], c(0.2, 0.0))]);
        let cert = independent_support_bound(&mu, 0.6).unwrap();
        assert!(cert.applies);
    }

    #[test]
    fn independent_support_requires_a_lattice() {
        let g = GroupSpec::cyclic(4).unwrap();
        let mu = DiscreteMeasure::dirac(&g, &[0]).unwrap();
        assert!(matches!(
            independent_support_bound(&mu, 0.9).unwrap_err(),
            BoundsError::PreconditionViolated(_)
        ));
    }

    #[test]
    fn qualitative_criterion_is_strict_at_one_half() {
        let g = GroupSpec::cyclic(2).unwrap();
        let rotated = measure(&g, &[(&[0], c(0.5, 0.0)), (&[1], c(0.0, 0.5))]);
        assert!(qualitative_invertible(&rotated, FRAC_1_SQRT_2).unwrap());
        assert!(!qualitative_invertible(&rotated, 0.5).unwrap());
        let pair = measure(&g, &[(&[0], c(0.8, 0.0)), (&[1], c(0.2, 0.0))]);
        assert!(qualitative_invertible(&pair, 0.6).unwrap());
        let heavy = measure(&g, &[(&[0], c(0.9, 0.0)), (&[1], c(0.2, 0.0))]);
        assert!(qualitative_invertible(&heavy, 0.6).is_err());
    }

    #[test]
    fn report_on_the_rotated_pair_grants_only_the_qualitative_verdict() {
        let g = GroupSpec::cyclic(2).unwrap();
        let mu = measure(&g, &[(&[0], c(0.5, 0.0)), (&[1], c(0.0, 0.5))]);
        let delta = spectral_min(&mu).unwrap();
        let observed = dense_invert(&mu).unwrap().inverse_norm;
        let report = build_report(&mu, delta, true, Some(observed)).unwrap();
        assert!(report.qualitative_applies);
        assert!((report.tv - 1.0).abs() <= 1e-15);
        assert_eq!(report.head_modulus, 0.5);
        for v in &report.verdicts {
            assert!(
                !v.applicability.applies(),
                "{} should fail on the rotated pair",
                v.theorem.as_str()
            );
        }
        assert!(report.violations().is_empty());
        // Every threshold is witnessed as sharp: the head misses 1/2, the
        // floor misses 1/sqrt(2), the gap value misses 1/2, and realness
        // fails — each by the narrowest of margins.
        let text = report.render_text();
        assert!(text.contains("qualitative invertibility: applies"));
        assert!(text.contains("nikolski_factorization: fails"));
    }

    #[test]
    fn report_on_a_dirac_grants_every_applicable_bound_at_one() {
        let g = GroupSpec::finite(&[2, 2]).unwrap();
        let mu = DiscreteMeasure::dirac(&g, &[0, 0]).unwrap();
        let observed = dense_invert(&mu).unwrap().inverse_norm;
        let report = build_report(&mu, 1.0, true, Some(observed)).unwrap();
        assert!(report.qualitative_applies);
        let applicable: Vec<_> = report.applicable().collect();
        assert_eq!(applicable.len(), 3);
        for (v, predicted) in applicable {
            assert!(
                (predicted - 1.0).abs() <= 1e-12,
                "{} should predict 1",
                v.theorem.as_str()
            );
        }
        assert!(report.violations().is_empty());
    }

    #[test]
    fn report_on_the_dominant_pair_is_sound_against_the_oracle() {
        let g = GroupSpec::cyclic(2).unwrap();
        let mu = measure(&g, &[(&[0], c(0.8, 0.0)), (&[1], c(0.2, 0.0))]);
        let delta = spectral_min(&mu).unwrap();
        let observed = dense_invert(&mu).unwrap().inverse_norm;
        let report = build_report(&mu, delta, true, Some(observed)).unwrap();
        let dominant = &report.verdicts[0];
        assert_eq!(dominant.theorem, TheoremId::DominantAtom);
        assert!(dominant.applicability.applies());
        // The bound is attained: predicted 1/(2·0.8−1) = observed 5/3.
        assert!((dominant.predicted.unwrap() - observed).abs() <= 1e-9);
        // Z₂ is exponent-two and the measure is real.
        let exp2 = &report.verdicts[5];
        assert_eq!(exp2.theorem, TheoremId::ExponentTwoReal);
        assert!(exp2.applicability.applies());
        assert!(report.violations().is_empty());
    }

    #[test]
    fn report_rows_split_by_gap_order() {
        // On Z₉ with atoms at 0 and 3 the gap has order 3.
        let g = GroupSpec::cyclic(9).unwrap();
        let mu = measure(&g, &[(&[0], c(0.93, 0.0)), (&[3], c(0.05, 0.0))]);
        let delta = spectral_min(&mu).unwrap();
        let report = build_report(&mu, delta, true, None).unwrap();
        let finite = &report.verdicts[3];
        assert_eq!(finite.theorem, TheoremId::FiniteOrderGap);
        assert!(finite.applicability.applies(), "{finite:?}");
        let infinite = &report.verdicts[2];
        assert!(matches!(
            &infinite.applicability,
            Applicability::FailsHypothesis(r) if r.contains("finite order 3")
        ));

        // On the lattice the same shape flips the two rows.
        let z = GroupSpec::lattice(1).unwrap();
        let nu = measure(&z, &[(&[0], c(0.93, 0.0)), (&[3], c(0.05, 0.0))]);
        let report = build_report(&nu, 0.88, false, None).unwrap();
        assert!(report.verdicts[2].applicability.applies());
        assert!(matches!(
            &report.verdicts[3].applicability,
            Applicability::FailsHypothesis(r) if r.contains("infinite order")
        ));
        assert!(!report.delta_exact);
    }

    #[test]
    fn report_json_names_theorems_in_snake_case() {
        let g = GroupSpec::cyclic(2).unwrap();
        let mu = DiscreteMeasure::dirac(&g, &[0]).unwrap();
        let json = build_report(&mu, 1.0, true, None).unwrap().to_json();
        assert!(json.contains("\"dominant_atom\""));
        assert!(json.contains("\"fails_hypothesis\""));
        assert!(json.contains("\"status\": \"applies\""));
        assert!(!json.contains("observed_inverse_norm"));
    }

    #[test]
    fn report_detects_unsound_observations() {
        let g = GroupSpec::cyclic(2).unwrap();
        let mu = measure(&g, &[(&[0], c(0.8, 0.0)), (&[1], c(0.2, 0.0))]);
        let report = build_report(&mu, 0.6, true, Some(100.0)).unwrap();
        let violations = report.violations();
        assert!(!violations.is_empty());
        assert!(violations[0].contains("exceeds predicted"));
    }

    fn arb_admissible_sequence() -> impl Strategy<Value = (Vec<f64>, f64)> {
        (
            0.51..1.0f64,
            proptest::collection::vec(0.01..1.0f64, 0..5),
            0.0..1.0f64,
        )
            .prop_map(|(head, raw, pick)| {
                let budget = 1.0 - head;
                let weight: f64 = raw.iter().sum::<f64>().max(1.0);
                let mut xs = vec![head];
                for w in &raw {
                    xs.push((w / weight * budget).min(head));
                }
                xs.sort_by(|a, b| b.total_cmp(a));
                let sq: f64 = xs.iter().map(|v| v * v).sum();
                let hi = sq.sqrt().min(1.0);
                let delta = 0.5 + (hi - 0.5).max(0.0) * pick.max(1e-6);
                (xs, delta)
            })
            .prop_filter("need delta in (1/2, sqrt(sum of squares)]", |(xs, delta)| {
                let sq: f64 = xs.iter().map(|v| v * v).sum();
                *delta > 0.5 && delta * delta <= sq
            })
    }

    proptest! {
        #[test]
        fn admissible_sequences_always_pass_the_head_check((xs, delta) in arb_admissible_sequence()) {
            let check = check_sequence_head(&xs, delta).unwrap();
            prop_assert!(check.holds, "x = {:?}, delta = {}", xs, delta);
        }

        #[test]
        fn gap_formulas_stay_internally_consistent(delta in 0.5000001..1.0f64) {
            let gap = infinite_order_gap_bound(delta).unwrap();
            prop_assert!(gap.a1_min >= gap.a1_min_linear - 1e-12);
            if let Some(refined) = gap.norm_bound_refined {
                prop_assert!((refined - 1.0 / (2.0 * gap.a1_min - 1.0)).abs() <= 1e-12);
                prop_assert!(refined > 0.0);
                // Independent evaluation through the rationalized
                // denominator 2(4δ²+δ−2), which avoids the cancellation of
                // the direct form; agreement is relative.
                let stable = ((17.0 * delta * delta + 6.0 * delta - 7.0).sqrt() + 1.0 + delta)
                    / (2.0 * (4.0 * delta * delta + delta - 2.0));
                prop_assert!((refined - stable).abs() <= 1e-9 * stable.max(1.0));
            }
            if let (Some(linear), Some(refined)) = (gap.norm_bound_linear, gap.norm_bound_refined) {
                prop_assert!(refined <= linear + 1e-12);
            }
            prop_assert_eq!(gap.norm_bound_refined.is_some(), delta > refined_gap_threshold());
            prop_assert_eq!(gap.norm_bound_linear.is_some(), delta > 2.0 / 3.0);
        }

        #[test]
        fn sign_sum_domination_follows_from_its_hypotheses(
            head in 0.51..0.95f64,
            raw in proptest::collection::vec(0.005..1.0f64, 0..5),
            pick in 0.0..1.0f64,
        ) {
            let budget = (1.0 - head).min(0.4);
            let weight: f64 = raw.iter().sum::<f64>().max(1.0);
            let mut xs = vec![head];
            for w in &raw {
                xs.push(w / weight * budget);
            }
            xs.sort_by(|a, b| b.total_cmp(a));
            prop_assume!(xs[0] == head);
            let rest: f64 = xs[1..].iter().sum();
            let alternating: f64 = xs
                .iter()
                .enumerate()
                .map(|(i, &v)| if i % 2 == 0 { v } else { -v })
                .sum();
            let cap = alternating.abs().min((head - rest).abs());
            prop_assume!(cap > 0.5);
            let delta = 0.5 + (cap - 0.5) * pick.max(1e-6);
            prop_assert!(check_sign_sum_domination(&xs, delta).unwrap());
        }
    }
}
