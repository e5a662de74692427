//! Seeded stochastic search for extremal measures: maximize the inverse
//! norm subject to `‖μ‖ ≤ 1` and a spectral-floor constraint, and
//! adversarially probe the atom-mass theorems for counterexamples.
//!
//! Everything is deterministic given the configuration: restart `r` owns
//! the stream seeded by `seed XOR r`, restarts never share state, and the
//! merge scans results in restart order, so outcomes are bit-identical
//! across reruns and across worker counts.
//!
//! The proposal loop trusts nothing it found: the winning state is
//! re-verified from scratch with the exact full-dual transform and the
//! dual-path dense inverter before anything is reported.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt::Write as _;
use thiserror::Error;

use crate::bounds::{self, BoundsError};
use crate::dyadic::{self, DyadicMeasure};
use crate::group::GroupSpec;
use crate::inversion::{self, InversionError};
use crate::measure::{DiscreteMeasure, MeasureError};
use crate::spectra::{self, DensePlan, SpectraError};
use crate::tol;

#[derive(Debug, Error, PartialEq)]
pub enum SearchError {
    #[error("invalid search configuration: {0}")]
    BadConfig(String),
    #[error("no feasible starting point: {0}")]
    Infeasible(String),
    #[error(transparent)]
    Spectra(#[from] SpectraError),
    #[error(transparent)]
    Inversion(#[from] InversionError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Bounds(#[from] BoundsError),
}

/// Configuration for one search run. The proposal scale starts at
/// `init_scale`, shrinks by `decay` each step, and doubles as the
/// annealing temperature.
#[derive(Clone, Debug)]
pub struct SearchConfig {
    pub group: GroupSpec,
    pub delta_target: f64,
    pub real_only: bool,
    pub restarts: u32,
    pub steps: u32,
    pub init_scale: f64,
    pub decay: f64,
    pub seed: u64,
    pub workers: usize,
}

impl SearchConfig {
    fn validate(&self) -> Result<(), SearchError> {
        if !(self.delta_target.is_finite() && self.delta_target > 0.0) {
            return Err(SearchError::BadConfig(format!(
                "floor target {} must be a positive real",
                self.delta_target
            )));
        }
        if self.restarts < 1 || self.steps < 1 {
            return Err(SearchError::BadConfig(
                "restarts and steps must be at least 1".to_string(),
            ));
        }
        if !(self.init_scale.is_finite() && self.init_scale > 0.0) {
            return Err(SearchError::BadConfig(format!(
                "proposal scale {} must be a positive real",
                self.init_scale
            )));
        }
        if !(self.decay > 0.0 && self.decay < 1.0) {
            return Err(SearchError::BadConfig(format!(
                "decay {} must lie in (0, 1)",
                self.decay
            )));
        }
        if self.workers < 1 {
            return Err(SearchError::BadConfig("workers must be at least 1".to_string()));
        }
        Ok(())
    }
}

/// Result of a norm-maximization run. The floor and the norm come from the
/// exact re-verification, not from the proposal loop.
#[derive(Clone, Debug)]
pub struct SearchOutcome {
    pub best: DiscreteMeasure,
    /// Exact spectral floor of `best` over the full dual.
    pub delta_achieved: f64,
    /// ℓ¹ norm of the dense inverse of `best`.
    pub inverse_norm: f64,
    /// `1/(2δ−1)` at the achieved floor, when it exceeds ½.
    pub dominant_atom_bound: Option<f64>,
    /// `1/(2δ²−1)` at the achieved floor, when it exceeds 1/√2.
    pub factorization_bound: Option<f64>,
    /// Best score per restart, in restart order (NaN for a restart that
    /// never found a feasible point).
    pub per_restart_best: Vec<f64>,
}

/// The theorem claims the adversarial mode attacks.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AdversarialClaim {
    /// Head-atom inequalities `|a₁| ≥ δ²` and `|a₁|+|a₂| ≥ δ`.
    AtomHead,
    /// Sign-sum domination `x₁ ≥ δ + Σ_{n≥2} x_n` for sequences meeting
    /// the alternating-sum hypotheses.
    SignSumDomination,
    /// Greatest-atom certificate for real measures on exponent-two
    /// groups, including agreement of its two proof paths.
    GreatestAtomReal,
}

/// Outcome of an adversarial run. `violation_found` may only be `true`
/// after the candidate survived exact re-verification; for sound theorems
/// it never is, and a `true` here indicts the implementation.
#[derive(Clone, Debug)]
pub struct AdversarialOutcome {
    pub violation_found: bool,
    pub witness: Option<DiscreteMeasure>,
    /// The re-verified margin (claimed bound minus achieved quantity) of
    /// the worst state found; anything above 1e−6 counts as a violation.
    pub worst_margin: f64,
}

/// One row of a floor sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub delta: f64,
    /// `None` when no feasible point existed at this floor.
    pub best_norm: Option<f64>,
    pub dominant_atom_bound: f64,
    /// `None` below the factorization threshold `1/√2`.
    pub factorization_bound: Option<f64>,
}

fn l1(state: &[Complex64]) -> f64 {
    state.iter().map(|c| c.norm()).sum()
}

/// Projects onto the unit ℓ¹ ball by rescaling, preserving support and
/// phases.
fn project(state: &mut [Complex64]) {
    let tv = l1(state);
    if tv > 1.0 {
        let inv = 1.0 / tv;
        for c in state.iter_mut() {
            *c *= inv;
        }
    }
}

/// What the annealer maximizes. `eval` returns the score for feasible
/// states and `None` otherwise, so every accepted state is a valid
/// witness by construction.
enum Goal<'a> {
    /// Feasibility: `min|μ̂| ≥ δ`. Score: ℓ¹ norm of the dense inverse.
    InverseNorm { plan: &'a DensePlan, delta: f64 },
    /// Feasibility: the claim's hypotheses. Score: violation margin.
    Claim {
        plan: &'a DensePlan,
        delta: f64,
        claim: AdversarialClaim,
        exponent: u32,
    },
}

impl Goal<'_> {
    fn eval(&self, state: &[Complex64], buf: &mut Vec<Complex64>) -> Option<f64> {
        match *self {
            Goal::InverseNorm { plan, delta } => {
                buf.clear();
                buf.extend_from_slice(state);
                plan.forward(buf);
                let floor = buf.iter().fold(f64::INFINITY, |m, v| m.min(v.norm()));
                if floor < delta {
                    return None;
                }
                for v in buf.iter_mut() {
                    *v = v.inv();
                }
                plan.inverse(buf);
                Some(l1(buf))
            }
            Goal::Claim {
                plan,
                delta,
                claim,
                exponent,
            } => {
                if l1(state) > 1.0 + tol::INEQ_SLACK {
                    return None;
                }
                match claim {
                    AdversarialClaim::AtomHead => {
                        buf.clear();
                        buf.extend_from_slice(state);
                        plan.forward(buf);
                        let floor = buf.iter().fold(f64::INFINITY, |m, v| m.min(v.norm()));
                        if floor < delta {
                            return None;
                        }
                        let (a1, a2) = top_two_moduli(state);
                        Some((delta * delta - a1).max(delta - (a1 + a2)))
                    }
                    AdversarialClaim::SignSumDomination => {
                        let mut xs: Vec<f64> = state.iter().map(|c| c.norm()).collect();
                        xs.sort_by(|a, b| b.total_cmp(a));
                        let alternating: f64 = xs
                            .iter()
                            .enumerate()
                            .map(|(i, &v)| if i % 2 == 0 { v } else { -v })
                            .sum();
                        let x1 = xs[0];
                        let rest: f64 = xs[1..].iter().sum();
                        if alternating.abs() < delta || (x1 - rest).abs() < delta {
                            return None;
                        }
                        Some((delta + rest) - x1)
                    }
                    AdversarialClaim::GreatestAtomReal => {
                        buf.clear();
                        buf.extend_from_slice(state);
                        plan.forward(buf);
                        let floor = buf.iter().fold(f64::INFINITY, |m, v| m.min(v.norm()));
                        if floor < delta {
                            return None;
                        }
                        let reals: Vec<f64> = state.iter().map(|c| c.re).collect();
                        let dm = match DyadicMeasure::new(exponent, reals) {
                            Ok(dm) => dm,
                            Err(_) => return Some(1.0),
                        };
                        match dyadic::greatest_atom_certificate(&dm, delta) {
                            // A failed or self-disagreeing certificate on a
                            // feasible state is itself the finding.
                            Err(_) => Some(1.0),
                            Ok(cert) if !cert.paths_agree() => Some(1.0),
                            Ok(cert) => Some(delta - cert.max_atom),
                        }
                    }
                }
            }
        }
    }
}

fn top_two_moduli(state: &[Complex64]) -> (f64, f64) {
    let mut a1 = 0.0f64;
    let mut a2 = 0.0f64;
    for c in state {
        let m = c.norm();
        if m > a1 {
            a2 = a1;
            a1 = m;
        } else if m > a2 {
            a2 = m;
        }
    }
    (a1, a2)
}

/// One restart of the annealer. Returns the best feasible state and its
/// score, or `None` when not even a starting point was feasible.
fn run_restart(
    cfg: &SearchConfig,
    goal: &Goal<'_>,
    n: usize,
    restart: u32,
) -> Option<(Vec<Complex64>, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ u64::from(restart));
    let normal = Normal::new(0.0, 1.0).expect("unit normal is well-defined");
    let mut buf: Vec<Complex64> = Vec::with_capacity(n);

    let mut state = vec![Complex64::ZERO; n];
    let mut cur_score = None;
    for _attempt in 0..64 {
        let mut cand = vec![Complex64::ZERO; n];
        cand[0] = Complex64::ONE;
        for v in cand.iter_mut() {
            v.re += 0.5 * cfg.init_scale * normal.sample(&mut rng);
            if !cfg.real_only {
                v.im += 0.5 * cfg.init_scale * normal.sample(&mut rng);
            }
        }
        project(&mut cand);
        if let Some(s) = goal.eval(&cand, &mut buf) {
            state = cand;
            cur_score = Some(s);
            break;
        }
    }
    let mut cur_score = match cur_score {
        Some(s) => s,
        None => {
            // Random starts all missed; the unit point mass is feasible
            // whenever anything is.
            state.fill(Complex64::ZERO);
            state[0] = Complex64::ONE;
            goal.eval(&state, &mut buf)?
        }
    };

    let mut best = state.clone();
    let mut best_score = cur_score;
    let mut scale = cfg.init_scale;
    let mut proposal = state.clone();
    for _step in 0..cfg.steps {
        proposal.copy_from_slice(&state);
        let site = rng.random_range(0..n);
        proposal[site].re += scale * normal.sample(&mut rng);
        if !cfg.real_only {
            proposal[site].im += scale * normal.sample(&mut rng);
        }
        project(&mut proposal);
        if let Some(s) = goal.eval(&proposal, &mut buf) {
            if s > best_score {
                best_score = s;
                best.copy_from_slice(&proposal);
            }
            let accept = s >= cur_score || {
                let temp = scale.max(f64::MIN_POSITIVE);
                rng.random::<f64>() < ((s - cur_score) / temp).exp()
            };
            if accept {
                state.copy_from_slice(&proposal);
                cur_score = s;
            }
        }
        scale *= cfg.decay;
    }
    Some((best, best_score))
}

/// Runs every restart (on `cfg.workers` threads when more than one) and
/// merges in restart order, so the outcome is independent of scheduling.
fn run_all_restarts(
    cfg: &SearchConfig,
    goal: &Goal<'_>,
    n: usize,
) -> Result<(Vec<Complex64>, Vec<f64>), SearchError> {
    let results: Vec<Option<(Vec<Complex64>, f64)>> = if cfg.workers > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.workers)
            .build()
            .map_err(|e| SearchError::BadConfig(format!("worker pool: {e}")))?;
        pool.install(|| {
            (0..cfg.restarts)
                .into_par_iter()
                .map(|r| run_restart(cfg, goal, n, r))
                .collect()
        })
    } else {
        (0..cfg.restarts).map(|r| run_restart(cfg, goal, n, r)).collect()
    };

    let mut per_restart = Vec::with_capacity(results.len());
    let mut best: Option<(Vec<Complex64>, f64)> = None;
    for r in results {
        match r {
            Some((amps, score)) => {
                per_restart.push(score);
                if best.as_ref().is_none_or(|(_, b)| score > *b) {
                    best = Some((amps, score));
                }
            }
            None => per_restart.push(f64::NAN),
        }
    }
    let (amps, _) = best.ok_or_else(|| {
        SearchError::Infeasible(format!(
            "no state with floor at least {} and mass at most 1 was found",
            cfg.delta_target
        ))
    })?;
    Ok((amps, per_restart))
}

/// Maximizes `‖μ⁻¹‖` over `‖μ‖ ≤ 1`, `min|μ̂| ≥ δ_target`. The returned
/// verdict is re-verified exactly: full-dual transform for the floor,
/// dual-path dense inversion for the norm.
pub fn search_max_inverse_norm(cfg: &SearchConfig) -> Result<SearchOutcome, SearchError> {
    cfg.validate()?;
    let plan = DensePlan::for_group(&cfg.group)?;
    let n = plan.len();
    let goal = Goal::InverseNorm {
        plan: &plan,
        delta: cfg.delta_target,
    };
    let (amps, per_restart_best) = run_all_restarts(cfg, &goal, n)?;

    let best = DiscreteMeasure::from_dense(&cfg.group, &amps)?;
    let profile = spectra::transform(&best)?;
    let delta_achieved = profile.certified_min();
    let inverse_norm = inversion::dense_invert(&best)?.inverse_norm;
    assert!(
        best.tv_norm() <= 1.0 + tol::NORM_SLACK,
        "search emitted a state outside the unit ball"
    );
    assert!(
        delta_achieved >= cfg.delta_target - tol::NORM_SLACK,
        "search emitted a state below the floor target"
    );
    Ok(SearchOutcome {
        best,
        delta_achieved,
        inverse_norm,
        dominant_atom_bound: (delta_achieved > 0.5)
            .then(|| 1.0 / (2.0 * delta_achieved - 1.0)),
        factorization_bound: (delta_achieved > FRAC_1_SQRT_2)
            .then(|| 1.0 / (2.0 * delta_achieved * delta_achieved - 1.0)),
        per_restart_best,
    })
}

/// Searches for a state that violates `claim` — maximizing the claimed
/// bound minus the achieved quantity over the claim's feasible set — and
/// re-verifies the worst state exactly before ruling.
pub fn adversarial_atom_test(
    cfg: &SearchConfig,
    claim: AdversarialClaim,
) -> Result<AdversarialOutcome, SearchError> {
    cfg.validate()?;
    if cfg.delta_target <= 0.5 {
        return Err(SearchError::Infeasible(format!(
            "the claim's hypotheses need a floor above 1/2, got {}",
            cfg.delta_target
        )));
    }
    let exponent = match claim {
        AdversarialClaim::GreatestAtomReal => {
            if !cfg.group.is_exponent_two() {
                return Err(SearchError::BadConfig(format!(
                    "greatest-atom claim needs an exponent-two group, got {}",
                    cfg.group
                )));
            }
            if !cfg.real_only {
                return Err(SearchError::BadConfig(
                    "greatest-atom claim needs real_only search".to_string(),
                ));
            }
            cfg.group.dims() as u32
        }
        _ => 0,
    };
    let plan = DensePlan::for_group(&cfg.group)?;
    let n = plan.len();
    let goal = Goal::Claim {
        plan: &plan,
        delta: cfg.delta_target,
        claim,
        exponent,
    };
    let (amps, _) = run_all_restarts(cfg, &goal, n)?;
    let candidate = DiscreteMeasure::from_dense(&cfg.group, &amps)?;
    let delta = cfg.delta_target;

    // Exact re-verification of the worst state, using the theorem
    // implementations themselves as the oracle.
    let (margin, hypotheses_hold) = match claim {
        AdversarialClaim::AtomHead => {
            let floor = spectra::transform(&candidate)?.certified_min();
            let sorted = candidate.sorted_atoms();
            let (a1, a2) = (sorted.modulus(0), sorted.modulus(1));
            let margin = (delta * delta - a1).max(delta - (a1 + a2));
            (margin, floor >= delta - tol::NORM_SLACK)
        }
        AdversarialClaim::SignSumDomination => {
            let mut xs: Vec<f64> = candidate.atoms().map(|(_, a)| a.norm()).collect();
            xs.sort_by(|a, b| b.total_cmp(a));
            let x1 = xs.first().copied().unwrap_or(0.0);
            let rest: f64 = xs[1..].iter().sum();
            let margin = (delta + rest) - x1;
            (margin, bounds::check_sign_sum_domination(&xs, delta).is_ok())
        }
        AdversarialClaim::GreatestAtomReal => {
            let floor = spectra::transform(&candidate)?.certified_min();
            match dyadic::greatest_atom_certificate_for(&candidate, delta) {
                Err(e) => {
                    // Hypotheses verified feasible yet the certificate
                    // refused: report it as a violation with the witness.
                    let _ = e;
                    (1.0, floor >= delta - tol::NORM_SLACK)
                }
                Ok(cert) => {
                    let margin = if cert.paths_agree() {
                        delta - cert.max_atom
                    } else {
                        1.0
                    };
                    (margin, floor >= delta - tol::NORM_SLACK)
                }
            }
        }
    };

    let violation_found = hypotheses_hold && margin > 1e-6;
    Ok(AdversarialOutcome {
        violation_found,
        witness: violation_found.then_some(candidate),
        worst_margin: margin,
    })
}

/// Runs [`search_max_inverse_norm`] at each floor in `grid`, recording the
/// best norm found next to the two closed-form curves.
pub fn gap_sweep(
    group: &GroupSpec,
    grid: &[f64],
    base: &SearchConfig,
) -> Result<Vec<SweepRow>, SearchError> {
    let mut rows = Vec::with_capacity(grid.len());
    for &delta in grid {
        if !(delta > 0.5 && delta <= 1.0 + tol::INEQ_SLACK) {
            return Err(SearchError::BadConfig(format!(
                "sweep floor {delta} is outside (1/2, 1]"
            )));
        }
        let mut cfg = base.clone();
        cfg.group = group.clone();
        cfg.delta_target = delta;
        let best_norm = match search_max_inverse_norm(&cfg) {
            Ok(outcome) => Some(outcome.inverse_norm),
            Err(SearchError::Infeasible(_)) => None,
            Err(e) => return Err(e),
        };
        rows.push(SweepRow {
            delta,
            best_norm,
            dominant_atom_bound: 1.0 / (2.0 * delta - 1.0),
            factorization_bound: (delta > FRAC_1_SQRT_2)
                .then(|| 1.0 / (2.0 * delta * delta - 1.0)),
        });
    }
    Ok(rows)
}

/// Renders sweep rows as CSV with the fixed header
/// `delta,best_norm,latw_bound,nikolski_bound,seed,restarts`. Markers:
/// `infeasible` for a floor with no feasible point, `inf` for the
/// factorization curve below its threshold.
pub fn sweep_to_csv(rows: &[SweepRow], seed: u64, restarts: u32) -> String {
    let mut out = String::from("delta,best_norm,latw_bound,nikolski_bound,seed,restarts\n");
    for row in rows {
        let best = row
            .best_norm
            .map_or_else(|| "infeasible".to_string(), |v| v.to_string());
        let nik = row
            .factorization_bound
            .map_or_else(|| "inf".to_string(), |v| v.to_string());
        let _ = writeln!(
            out,
            "{},{best},{},{nik},{seed},{restarts}",
            row.delta, row.dominant_atom_bound
        );
    }
    out
}
