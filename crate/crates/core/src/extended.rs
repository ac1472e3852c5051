//! Two-point compactification of the real line, trivial extension of fields,
//! and finite-sample certificates for the tail hypotheses (sign and
//! monotonicity toward an endpoint, limit estimation).

use alloc::vec::Vec;
use core::fmt;

use crate::numerics::{ScalarField, Tolerances};

#[allow(unused_imports)]
use num_traits::Float;

/// A coordinate on [-1, 1]; the endpoints encode ±∞.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CompactCoordinate(f64);

impl CompactCoordinate {
    /// Wrap a value already in [-1, 1].
    pub fn new(x: f64) -> Option<Self> {
        (x.abs() <= 1.0).then_some(Self(x))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_plus_infinity(self) -> bool {
        self.0 == 1.0
    }

    pub fn is_minus_infinity(self) -> bool {
        self.0 == -1.0
    }
}

/// Order-preserving homeomorphism from the extended line onto [-1, 1]:
/// x ↦ x/(1 + |x|), with ±∞ ↦ ±1.
pub fn phi(x: f64) -> CompactCoordinate {
    debug_assert!(!x.is_nan());
    if x == f64::INFINITY {
        CompactCoordinate(1.0)
    } else if x == f64::NEG_INFINITY {
        CompactCoordinate(-1.0)
    } else {
        CompactCoordinate(x / (1.0 + x.abs()))
    }
}

/// Inverse of [`phi`]: c ↦ c/(1 - |c|), with ±1 ↦ ±∞.
pub fn phi_inv(c: CompactCoordinate) -> f64 {
    let x = c.value();
    if x == 1.0 {
        f64::INFINITY
    } else if x == -1.0 {
        f64::NEG_INFINITY
    } else {
        x / (1.0 - x.abs())
    }
}

/// Which infinity a tail is taken toward.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Side {
    PlusInfinity,
    MinusInfinity,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::PlusInfinity => write!(f, "+inf"),
            Self::MinusInfinity => write!(f, "-inf"),
        }
    }
}

/// Aitken Δ² extrapolation of the last three samples; falls back to the last
/// sample when the sequence is already flat at machine scale.
pub(crate) fn aitken_limit(samples: &[f64]) -> Option<f64> {
    if samples.len() < 3 {
        return samples.last().copied();
    }
    let n = samples.len();
    let (x1, x2, x3) = (samples[n - 3], samples[n - 2], samples[n - 1]);
    let den = x3 - 2.0 * x2 + x1;
    let scale = x1.abs().max(x2.abs()).max(x3.abs()).max(f64::MIN_POSITIVE);
    if den.abs() < 1e-14 * scale {
        return Some(x3);
    }
    Some(x3 - (x3 - x2) * (x3 - x2) / den)
}

/// Whether the successive differences of a ladder contract clearly (each at
/// most 3/4 of the previous, or already negligibly small).
fn contracting(samples: &[f64]) -> bool {
    let diffs: Vec<f64> = samples.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    let scale = samples.iter().fold(0.0f64, |a, &v| a.max(v.abs())).max(1e-300);
    diffs.windows(2).all(|w| w[1] <= 0.75 * w[0] || w[1] < 1e-13 * scale)
}

/// Estimate `lim f` along one geometric ladder. `None` when samples are
/// non-finite or fail the contraction test.
fn ladder_limit(f: &ScalarField, radii: &[f64]) -> Option<f64> {
    let vals: Vec<f64> = radii.iter().map(|&r| f.eval_raw(r)).collect();
    if vals.iter().any(|v| !v.is_finite()) {
        return None;
    }
    if !contracting(&vals) {
        return None;
    }
    aitken_limit(&vals)
}

/// A field extended to the two-point compactification: zero outside the base
/// domain, extrapolated limits at ±∞ when the tails converge.
#[derive(Debug, Clone)]
pub struct ExtendedField {
    pub base: ScalarField,
    pub value_at_plus_inf: Option<f64>,
    pub value_at_minus_inf: Option<f64>,
    /// True when the corresponding tail failed the convergence test.
    pub oscillation_at_plus_inf: bool,
    pub oscillation_at_minus_inf: bool,
}

impl ExtendedField {
    /// Evaluate the extension: base value inside the domain, stored limits at
    /// ±∞, zero elsewhere.
    pub fn eval_extended(&self, r: f64) -> f64 {
        if r == f64::INFINITY {
            return self.value_at_plus_inf.unwrap_or(f64::NAN);
        }
        if r == f64::NEG_INFINITY {
            return self.value_at_minus_inf.unwrap_or(f64::NAN);
        }
        if self.base.domain().contains(r) {
            self.base.eval_raw(r)
        } else {
            0.0
        }
    }
}

/// Ladder radii used for limit estimation: two geometric ladders of ratio 10
/// from 1e3 to 1e6, the second offset by a factor 3.
fn ladders() -> ([f64; 4], [f64; 4]) {
    ([1e3, 1e4, 1e5, 1e6], [3e3, 3e4, 3e5, 3e6])
}

/// Trivially extend `f` to the compactified line, estimating the limits at
/// ±∞ by two-ladder extrapolation. A side whose two ladder estimates disagree
/// beyond `residual_tol` (or fail to contract) gets no value and an
/// oscillation verdict.
pub fn extend(f: &ScalarField, tol: &Tolerances) -> ExtendedField {
    let (l1, l2) = ladders();
    let unbounded_above = f.domain().intervals().iter().any(|iv| iv.hi == f64::INFINITY);
    let unbounded_below = f.domain().intervals().iter().any(|iv| iv.lo == f64::NEG_INFINITY);
    let resolve = |radii_a: [f64; 4], radii_b: [f64; 4]| -> (Option<f64>, bool) {
        let (a, b) = (ladder_limit(f, &radii_a), ladder_limit(f, &radii_b));
        match (a, b) {
            (Some(x), Some(y)) if (x - y).abs() <= tol.residual_tol * (1.0 + x.abs().max(y.abs())) => {
                (Some(0.5 * (x + y)), false)
            }
            _ => (None, true),
        }
    };
    let (value_at_plus_inf, osc_plus) = if unbounded_above {
        resolve(l1, l2)
    } else {
        (None, false)
    };
    let (value_at_minus_inf, osc_minus) = if unbounded_below {
        let neg = |l: [f64; 4]| [-l[0], -l[1], -l[2], -l[3]];
        resolve(neg(l1), neg(l2))
    } else {
        (None, false)
    };
    ExtendedField {
        base: f.clone(),
        value_at_plus_inf,
        value_at_minus_inf,
        oscillation_at_plus_inf: osc_plus,
        oscillation_at_minus_inf: osc_minus,
    }
}

/// Sign of a sampled tail.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum SignPattern {
    AllNonNegative,
    AllNonPositive,
    AllZero,
    Mixed,
}

/// Monotonicity of a sampled tail, in window order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum MonotonePattern {
    NonDecreasing,
    NonIncreasing,
    Constant,
    Neither,
}

/// Which tail hypothesis the sampled window satisfies: (c1) non-negative and
/// non-decreasing approaching the endpoint from the left, (c2) non-positive
/// and non-increasing leaving it to the right, or neither.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum LemmaCondition {
    C1,
    C2,
    Neither,
}

/// Finite-sample evidence about a tail: the measured sign and monotonicity
/// patterns are reported verbatim, never reinterpreted.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Certificate {
    pub side: Side,
    pub limit_estimate: Option<f64>,
    /// |limit| within residual tolerance of zero.
    pub limit_is_zero: bool,
    /// The window failed the convergence (contraction + agreement) test.
    pub oscillation: bool,
    pub sign_pattern: SignPattern,
    pub monotone_pattern: MonotonePattern,
    pub condition: LemmaCondition,
}

/// Certify the tail of `f` toward one endpoint over a sampled window (sorted
/// toward the chosen infinity, at least 8 points).
pub fn tail_certificate(
    f: &ScalarField,
    side: Side,
    window: &[f64],
    tol: &Tolerances,
) -> Certificate {
    debug_assert!(window.len() >= 8, "tail window needs at least 8 points");
    let vals: Vec<f64> = window.iter().map(|&r| f.eval_raw(r)).collect();
    let scale = vals.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
    let zero_tol = 1e-14 * scale.max(f64::MIN_POSITIVE);
    let nonneg = vals.iter().all(|&v| v >= -zero_tol);
    let nonpos = vals.iter().all(|&v| v <= zero_tol);
    let sign_pattern = match (nonneg, nonpos) {
        (true, true) => SignPattern::AllZero,
        (true, false) => SignPattern::AllNonNegative,
        (false, true) => SignPattern::AllNonPositive,
        (false, false) => SignPattern::Mixed,
    };
    let nondec = vals.windows(2).all(|w| w[1] >= w[0] - zero_tol);
    let noninc = vals.windows(2).all(|w| w[1] <= w[0] + zero_tol);
    let monotone_pattern = match (nondec, noninc) {
        (true, true) => MonotonePattern::Constant,
        (true, false) => MonotonePattern::NonDecreasing,
        (false, true) => MonotonePattern::NonIncreasing,
        (false, false) => MonotonePattern::Neither,
    };
    // c1 is a left-neighborhood condition (approach +∞ from below); c2 is a
    // right-neighborhood condition (leave -∞ upward).
    let condition = match side {
        Side::PlusInfinity if nonneg && nondec => LemmaCondition::C1,
        Side::MinusInfinity if nonpos && noninc => LemmaCondition::C2,
        _ => LemmaCondition::Neither,
    };
    let finite = vals.iter().all(|v| v.is_finite());
    let converged = finite && contracting(&vals);
    let limit_estimate = if converged { aitken_limit(&vals) } else { None };
    let limit_is_zero = matches!(limit_estimate, Some(l) if l.abs() <= tol.residual_tol);
    Certificate {
        side,
        limit_estimate,
        limit_is_zero,
        oscillation: !converged,
        sign_pattern,
        monotone_pattern,
        condition,
    }
}

/// Default certificate window toward +∞: `n` geometric points from 1e3 to 1e6.
pub fn default_tail_window(n: usize) -> Vec<f64> {
    let n = n.max(8);
    (0..n)
        .map(|k| 1e3 * 10f64.powf(3.0 * (k as f64) / (n as f64 - 1.0)))
        .collect()
}
