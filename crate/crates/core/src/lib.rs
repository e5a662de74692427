//! Finitely supported measures on abelian groups, their Fourier–Stieltjes
//! transforms, and norm-controlled inversion in the convolution algebra.
//!
//! A measure `μ = Σ a_x δ_x` with finite support acts on the group by
//! convolution; it is invertible exactly when a measure `ν` with
//! `μ ∗ ν = δ_0` exists. On a finite group this is ordinary linear algebra
//! (the convolution operator is a generalized circulant), but the total
//! variation norm of the inverse can be large even when the transform
//! `μ̂` stays far from zero. This crate computes transforms with certified
//! lower bounds on `inf |μ̂|`, inverts measures by dense solves, Neumann
//! series, and a self-adjoint factorization route, evaluates the classical
//! explicit norm bounds that apply once `inf |μ̂| > 1/2`, and searches for
//! extremal measures that stress those bounds.
//!
//! Module map:
//!
//! * [`group`] — group arithmetic on `Z_{n_1} x … x Z_{n_k}` and `Z^d`,
//!   characters, element orders, exact rational-independence tests, and
//!   simultaneous phase targeting (Kronecker approximation).
//! * [`measure`] — the measure algebra itself: total variation, convolution,
//!   involution, translation, atom ordering.
//! * [`spectra`] — fast transforms on finite groups, certified grid
//!   evaluation on the torus for lattice measures, mesh refinement.
//! * [`inversion`] — dense two-path inversion, truncated Neumann series with
//!   an a-priori tail rule, and the factorization route through `μ ∗ μ̃`.
//! * [`bounds`] — explicit invertibility bounds and atom-size certificates,
//!   aggregated into a per-measure report.
//! * [`dyadic`] — the exponent-two specialization: Walsh–Hadamard transform,
//!   half-splitting, and the recursive greatest-atom certificate.
//! * [`search`] — seeded annealing searches for measures of maximal inverse
//!   norm and adversarial probes of the atom-size claims.
//! * [`format`] — the on-disk measure document and inversion-result export.

pub mod bounds;
pub mod dyadic;
pub mod format;
pub mod group;
pub mod inversion;
pub mod measure;
pub mod search;
pub mod spectra;

/// Numeric budgets shared across the crate.
///
/// Every tolerance used in a contract lives here so the slack applied to an
/// inequality is visible and consistent. The guiding split: `1e-12` of slack
/// for pointwise inequalities between quantities of order one, `1e-9` for
/// norm-level comparisons that accumulate over many atoms, and `1e-15` for
/// dropping convolution dust just above `f64` round-off.
pub mod tol {
    /// Amplitudes below this are dropped after a convolution. Keeps supports
    /// finite under repeated convolution on lattices without disturbing any
    /// quantity above the `1e-12` inequality slack.
    pub const CONV_PRUNE: f64 = 1e-15;

    /// Slack for pointwise inequality checks (atom sizes, power sums).
    pub const INEQ_SLACK: f64 = 1e-12;

    /// Slack for norm-level comparisons (inverse norms vs. guarantees).
    pub const NORM_SLACK: f64 = 1e-9;

    /// A dual value with modulus below this is treated as an exact zero of
    /// the transform: the measure is declared singular rather than inverted
    /// against catastrophic cancellation.
    pub const SINGULAR_FLOOR: f64 = 1e-12;

    /// Agreement required between the fast transform and the naive
    /// character sum at spot-check points.
    pub const SPOT_CHECK: f64 = 1e-10;

    /// How far a scalar may sit from the unit circle and still count as
    /// unimodular (translation phases, phase-targeting goals).
    pub const UNIMODULAR: f64 = 1e-9;

    /// Default residual tolerance for iterative inverses.
    pub const DEFAULT_TOL: f64 = 1e-9;

    /// Largest group order accepted by the dense inversion path.
    pub const DENSE_CAP: usize = 4096;

    /// Largest number of sample points a dual-torus grid may hold
    /// (`mesh^rank`); e.g. a rank-2 grid may use up to 2048 points per
    /// axis.
    pub const MAX_GRID_POINTS: u64 = 1 << 22;

    /// Largest imaginary part a measure may carry and still be treated as
    /// real by the exponent-two machinery.
    pub const REALNESS: f64 = 1e-15;
}
