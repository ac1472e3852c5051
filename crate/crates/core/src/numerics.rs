//! Foundation numerics: domains with excluded points, evaluable scalar fields,
//! adaptive Gauss–Kronrod quadrature, Brent root bracketing, finite differences,
//! and grid sampling.

use alloc::collections::BinaryHeap;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

#[allow(unused_imports)]
use num_traits::Float;

/// Default cap applied when sampling unbounded intervals.
pub const DEFAULT_R_MAX: f64 = 1e6;

/// Maximum number of interval subdivisions before quadrature gives up.
const MAX_SUBDIVISIONS: usize = 4096;

/// Errors from the foundation numerics.
#[derive(Debug, Clone, PartialEq)]
pub enum NumericsError {
    /// The integrand or field produced a non-finite value.
    NonFiniteSample { at: f64 },
    /// Adaptive subdivision hit its limit before reaching the tolerance.
    NoConvergence { achieved: f64, target: f64 },
    /// Root bracketing requires a sign change over the bracket.
    NoSignChange { f_lo: f64, f_hi: f64 },
    /// The requested point is within the guard band of an excluded point or
    /// too close to a domain boundary for the stencil.
    TooCloseToSingularity { r: f64 },
    /// No usable points in the domain.
    EmptyDomain,
    /// The point lies outside the field's domain.
    OutsideDomain { r: f64 },
    /// The integration path leaves its interval or crosses an excluded point.
    PathCrossesExcluded { at: f64 },
    /// Malformed domain description.
    Domain(DomainError),
    /// Invalid argument (tolerances, counts, scales).
    BadArgument(&'static str),
}

impl fmt::Display for NumericsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::NonFiniteSample { at } => write!(f, "non-finite sample at r = {at}"),
            Self::NoConvergence { achieved, target } => {
                write!(f, "quadrature did not converge: error {achieved} > target {target}")
            }
            Self::NoSignChange { f_lo, f_hi } => {
                write!(f, "no sign change over bracket: f(lo) = {f_lo}, f(hi) = {f_hi}")
            }
            Self::TooCloseToSingularity { r } => {
                write!(f, "r = {r} is too close to an excluded point or boundary")
            }
            Self::EmptyDomain => write!(f, "domain contains no usable points"),
            Self::OutsideDomain { r } => write!(f, "r = {r} lies outside the domain"),
            Self::PathCrossesExcluded { at } => {
                write!(f, "integration path crosses excluded point at r = {at}")
            }
            Self::Domain(e) => write!(f, "invalid domain: {e}"),
            Self::BadArgument(msg) => write!(f, "bad argument: {msg}"),
        }
    }
}

impl core::error::Error for NumericsError {}

impl From<DomainError> for NumericsError {
    fn from(e: DomainError) -> Self {
        Self::Domain(e)
    }
}

/// Errors from domain construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DomainError {
    /// An interval has `lo >= hi`.
    EmptyInterval,
    /// Intervals are not sorted by `lo` or overlap.
    UnsortedOrOverlapping,
    /// An excluded point lies in no interval.
    ExcludedOutsideIntervals,
}

impl fmt::Display for DomainError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::EmptyInterval => write!(f, "interval with lo >= hi"),
            Self::UnsortedOrOverlapping => write!(f, "intervals unsorted or overlapping"),
            Self::ExcludedOutsideIntervals => write!(f, "excluded point outside every interval"),
        }
    }
}

impl core::error::Error for DomainError {}

/// An open interval `(lo, hi)`; `hi` may be `+∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn contains(&self, r: f64) -> bool {
        r > self.lo && r < self.hi
    }

    pub fn is_unbounded(&self) -> bool {
        self.hi.is_infinite()
    }
}

/// A union of disjoint open intervals with a finite list of interior points to
/// avoid (singular radii).
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Domain {
    intervals: Vec<Interval>,
    excluded: Vec<f64>,
}

impl Domain {
    /// Build a domain, validating the invariants: intervals pairwise disjoint
    /// and sorted by `lo`, `lo < hi`, every excluded point inside some interval.
    pub fn new(intervals: Vec<Interval>, mut excluded: Vec<f64>) -> Result<Self, DomainError> {
        for iv in &intervals {
            if !(iv.lo < iv.hi) {
                return Err(DomainError::EmptyInterval);
            }
        }
        for w in intervals.windows(2) {
            if !(w[0].hi <= w[1].lo) {
                return Err(DomainError::UnsortedOrOverlapping);
            }
        }
        excluded.sort_by(f64::total_cmp);
        for &x in &excluded {
            if !intervals.iter().any(|iv| iv.contains(x)) {
                return Err(DomainError::ExcludedOutsideIntervals);
            }
        }
        Ok(Self { intervals, excluded })
    }

    /// The open interval `(lo, hi)`.
    pub fn open(lo: f64, hi: f64) -> Self {
        Self { intervals: alloc::vec![Interval::new(lo, hi)], excluded: Vec::new() }
    }

    /// The unbounded interval `(lo, +∞)`.
    pub fn unbounded(lo: f64) -> Self {
        Self::open(lo, f64::INFINITY)
    }

    /// The whole real line.
    pub fn real_line() -> Self {
        Self::open(f64::NEG_INFINITY, f64::INFINITY)
    }

    pub fn with_excluded(self, excluded: Vec<f64>) -> Result<Self, DomainError> {
        Self::new(self.intervals, excluded)
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn excluded(&self) -> &[f64] {
        &self.excluded
    }

    pub fn contains(&self, r: f64) -> bool {
        self.intervals.iter().any(|iv| iv.contains(r))
    }

    pub fn interval_of(&self, r: f64) -> Option<Interval> {
        self.intervals.iter().copied().find(|iv| iv.contains(r))
    }

    /// True when `r` is farther than `guard * (1 + |x|)` from every excluded
    /// point `x`.
    pub fn clear_of_excluded(&self, r: f64, guard: f64) -> bool {
        self.excluded.iter().all(|&x| (r - x).abs() > guard * (1.0 + x.abs()))
    }

    /// The excluded point strictly between `a` and `b`, if any.
    pub fn excluded_between(&self, a: f64, b: f64) -> Option<f64> {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        self.excluded.iter().copied().find(|&x| x > lo && x < hi)
    }

    /// Whether `[a, b]` (or `[a, ∞)`) lies inside a single interval.
    pub fn spans_single_interval(&self, a: f64, b: f64) -> bool {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        self.intervals.iter().any(|iv| lo > iv.lo && (hi < iv.hi || (hi == iv.hi && iv.is_unbounded())))
    }
}

/// Numerical tolerances shared across the library.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Tolerances {
    /// Relative quadrature tolerance.
    pub quad_rel: f64,
    /// Absolute quadrature tolerance.
    pub quad_abs: f64,
    /// Root bracket width tolerance.
    pub root_tol: f64,
    /// Base finite-difference step; the actual step is `fd_step * max(1, |r|)`.
    pub fd_step: f64,
    /// Residual acceptance threshold for verification checks.
    pub residual_tol: f64,
    /// Relative guard band around excluded points.
    pub guard_band: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            quad_rel: 1e-10,
            quad_abs: 1e-12,
            root_tol: 1e-12,
            fd_step: 1e-6,
            residual_tol: 1e-7,
            guard_band: 1e-9,
        }
    }
}

impl Tolerances {
    /// All tolerances strictly positive and `quad_rel < 1`.
    pub fn validate(&self) -> Result<(), NumericsError> {
        let all = [
            self.quad_rel,
            self.quad_abs,
            self.root_tol,
            self.fd_step,
            self.residual_tol,
            self.guard_band,
        ];
        if all.iter().any(|&t| !(t > 0.0) || !t.is_finite()) {
            return Err(NumericsError::BadArgument("tolerances must be strictly positive"));
        }
        if self.quad_rel >= 1.0 {
            return Err(NumericsError::BadArgument("quad_rel must be < 1"));
        }
        Ok(())
    }
}

/// An evaluable real function of radius with a declared domain.
///
/// Fields are immutable and cheap to clone; they are the common currency for
/// p, ρ, M, h, and Λ₁ throughout the library.
#[derive(Clone)]
pub struct ScalarField {
    f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    domain: Domain,
    label: String,
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarField")
            .field("label", &self.label)
            .field("domain", &self.domain)
            .finish()
    }
}

impl ScalarField {
    pub fn new(
        label: impl Into<String>,
        domain: Domain,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self { f: Arc::new(f), domain, label: label.into() }
    }

    /// A constant field on the whole line.
    pub fn constant(label: impl Into<String>, value: f64) -> Self {
        Self::new(label, Domain::real_line(), move |_| value)
    }

    /// Evaluate with domain, guard-band, and finiteness checks.
    pub fn eval(&self, r: f64, tol: &Tolerances) -> Result<f64, NumericsError> {
        if !self.domain.contains(r) {
            return Err(NumericsError::OutsideDomain { r });
        }
        if !self.domain.clear_of_excluded(r, tol.guard_band) {
            return Err(NumericsError::TooCloseToSingularity { r });
        }
        let v = (self.f)(r);
        if !v.is_finite() {
            return Err(NumericsError::NonFiniteSample { at: r });
        }
        Ok(v)
    }

    /// Evaluate without checks. Callers are responsible for staying inside the
    /// domain; a non-finite return signals a violation.
    pub fn eval_raw(&self, r: f64) -> f64 {
        (self.f)(r)
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

// ---------------------------------------------------------------------------
// Gauss–Kronrod 7-15 panel
// ---------------------------------------------------------------------------

#[allow(clippy::excessive_precision)]
const XGK15: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];

#[allow(clippy::excessive_precision)]
const WG7: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

#[allow(clippy::excessive_precision)]
const WGK15: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];

/// One G7-K15 panel: returns (kronrod estimate, error estimate) or the first
/// non-finite sample location.
fn qk15(g: &dyn Fn(f64) -> f64, a: f64, b: f64) -> Result<(f64, f64), NumericsError> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = g(center);
    if !fc.is_finite() {
        return Err(NumericsError::NonFiniteSample { at: center });
    }
    let mut res_gauss = fc * WG7[3];
    let mut res_kron = fc * WGK15[7];
    let mut res_abs = res_kron.abs();
    let mut fv = [[0.0f64; 2]; 7];
    for j in 0..7 {
        let x = half * XGK15[j];
        let f1 = g(center - x);
        let f2 = g(center + x);
        if !f1.is_finite() {
            return Err(NumericsError::NonFiniteSample { at: center - x });
        }
        if !f2.is_finite() {
            return Err(NumericsError::NonFiniteSample { at: center + x });
        }
        fv[j] = [f1, f2];
        let sum = f1 + f2;
        res_kron += WGK15[j] * sum;
        res_abs += WGK15[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_gauss += WG7[j / 2] * sum;
        }
    }
    let mean = res_kron * 0.5;
    let mut res_asc = WGK15[7] * (fc - mean).abs();
    for j in 0..7 {
        res_asc += WGK15[j] * ((fv[j][0] - mean).abs() + (fv[j][1] - mean).abs());
    }
    let err = ((res_kron - res_gauss) * half).abs();
    let res_abs = res_abs * half.abs();
    let res_asc = res_asc * half.abs();
    // QUADPACK error rescaling.
    let mut scaled = err;
    if res_asc != 0.0 && scaled != 0.0 {
        let t = (200.0 * scaled / res_asc).powf(1.5);
        scaled = if t < 1.0 { res_asc * t } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        scaled = scaled.max(50.0 * f64::EPSILON * res_abs);
    }
    Ok((res_kron * half, scaled))
}

#[derive(Debug)]
struct Segment {
    err: f64,
    a: f64,
    b: f64,
    val: f64,
    seq: u64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err && self.seq == other.seq
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        // max-heap on error; sequence number breaks ties deterministically
        self.err.total_cmp(&other.err).then(self.seq.cmp(&other.seq).reverse())
    }
}

/// Globally adaptive quadrature of a closure over a finite interval.
pub(crate) fn integrate_closure(
    g: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    tol: &Tolerances,
) -> Result<f64, NumericsError> {
    if a == b {
        return Ok(0.0);
    }
    let (v, e) = qk15(g, a, b)?;
    let mut heap = BinaryHeap::new();
    heap.push(Segment { err: e, a, b, val: v, seq: 0 });
    let mut total_val = v;
    let mut total_err = e;
    let mut seq = 1u64;
    for _ in 0..MAX_SUBDIVISIONS {
        let target = tol.quad_abs.max(tol.quad_rel * total_val.abs());
        if total_err <= target {
            return Ok(total_val);
        }
        let worst = match heap.pop() {
            Some(s) => s,
            None => return Ok(total_val),
        };
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // interval exhausted at machine precision
            heap.push(worst);
            break;
        }
        let (v1, e1) = qk15(g, worst.a, mid)?;
        let (v2, e2) = qk15(g, mid, worst.b)?;
        total_val += v1 + v2 - worst.val;
        total_err += e1 + e2 - worst.err;
        heap.push(Segment { err: e1, a: worst.a, b: mid, val: v1, seq });
        heap.push(Segment { err: e2, a: mid, b: worst.b, val: v2, seq: seq + 1 });
        seq += 2;
    }
    let target = tol.quad_abs.max(tol.quad_rel * total_val.abs());
    if total_err <= target {
        Ok(total_val)
    } else {
        Err(NumericsError::NoConvergence { achieved: total_err, target })
    }
}

/// Adaptive quadrature of `f` over `[a, b]`.
///
/// `[a, b]` must lie inside one interval of the field's domain with no
/// excluded point between the endpoints. An infinite `b` is handled by the
/// substitution `r = a + t/(1-t)` mapping `[0,1)` onto `[a, ∞)`.
pub fn integrate(
    f: &ScalarField,
    a: f64,
    b: f64,
    tol: &Tolerances,
) -> Result<f64, NumericsError> {
    tol.validate()?;
    if a == b {
        return Ok(0.0);
    }
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    if !f.domain().spans_single_interval(lo, hi) {
        return Err(NumericsError::OutsideDomain { r: lo });
    }
    if let Some(x) = f.domain().excluded_between(lo, hi) {
        return Err(NumericsError::PathCrossesExcluded { at: x });
    }
    let sign = if a <= b { 1.0 } else { -1.0 };
    let val = if hi.is_infinite() {
        let base = lo;
        let g = move |t: f64| {
            if t >= 1.0 {
                return 0.0;
            }
            let w = 1.0 - t;
            f.eval_raw(base + t / w) / (w * w)
        };
        integrate_closure(&g, 0.0, 1.0, tol)?
    } else {
        let g = move |r: f64| f.eval_raw(r);
        integrate_closure(&g, lo, hi, tol)?
    };
    Ok(sign * val)
}

// ---------------------------------------------------------------------------
// Root finding
// ---------------------------------------------------------------------------

/// Brent's method on a closure; requires a sign change over `[a, b]`.
pub(crate) fn brent(
    g: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    xtol: f64,
    maxiter: usize,
) -> Result<f64, NumericsError> {
    let rtol = 4.0 * f64::EPSILON;
    let (mut xpre, mut xcur) = (a, b);
    let (mut fpre, mut fcur) = (g(xpre), g(xcur));
    if !fpre.is_finite() {
        return Err(NumericsError::NonFiniteSample { at: xpre });
    }
    if !fcur.is_finite() {
        return Err(NumericsError::NonFiniteSample { at: xcur });
    }
    if fpre == 0.0 {
        return Ok(xpre);
    }
    if fcur == 0.0 {
        return Ok(xcur);
    }
    if fpre.signum() == fcur.signum() {
        return Err(NumericsError::NoSignChange { f_lo: fpre, f_hi: fcur });
    }
    let (mut xblk, mut fblk) = (0.0f64, 0.0f64);
    let (mut spre, mut scur) = (0.0f64, 0.0f64);
    for _ in 0..maxiter {
        if fpre != 0.0 && fcur != 0.0 && fpre.signum() != fcur.signum() {
            xblk = xpre;
            fblk = fpre;
            spre = xcur - xpre;
            scur = spre;
        }
        if fblk.abs() < fcur.abs() {
            xpre = xcur;
            xcur = xblk;
            xblk = xpre;
            fpre = fcur;
            fcur = fblk;
            fblk = fpre;
        }
        let delta = 0.5 * (xtol + rtol * xcur.abs());
        let sbis = 0.5 * (xblk - xcur);
        if fcur == 0.0 || sbis.abs() < delta {
            return Ok(xcur);
        }
        if spre.abs() > delta && fcur.abs() < fpre.abs() {
            let stry = if xpre == xblk {
                -fcur * (xcur - xpre) / (fcur - fpre)
            } else {
                let dpre = (fpre - fcur) / (xpre - xcur);
                let dblk = (fblk - fcur) / (xblk - xcur);
                -fcur * (fblk * dblk - fpre * dpre) / (dblk * dpre * (fblk - fpre))
            };
            if 2.0 * stry.abs() < spre.abs().min(3.0 * sbis.abs() - delta) {
                spre = scur;
                scur = stry;
            } else {
                spre = sbis;
                scur = sbis;
            }
        } else {
            spre = sbis;
            scur = sbis;
        }
        xpre = xcur;
        fpre = fcur;
        if scur.abs() > delta {
            xcur += scur;
        } else {
            xcur += if sbis > 0.0 { delta } else { -delta };
        }
        fcur = g(xcur);
        if !fcur.is_finite() {
            return Err(NumericsError::NonFiniteSample { at: xcur });
        }
    }
    Ok(xcur)
}

/// Bracketing root finder with guaranteed convergence (Brent).
///
/// Requires `sign(f(lo)) != sign(f(hi))`; converges to a bracket of width
/// `root_tol`.
pub fn find_root(
    f: &ScalarField,
    lo: f64,
    hi: f64,
    tol: &Tolerances,
) -> Result<f64, NumericsError> {
    tol.validate()?;
    let g = move |r: f64| f.eval_raw(r);
    brent(&g, lo, hi, tol.root_tol, 200)
}

/// Scan `[lo, hi]` with `n` uniform samples and refine every sign-change
/// bracket of `g` by Brent. Returns roots in increasing order.
pub fn bracket_roots(
    g: &dyn Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    n: usize,
    xtol: f64,
) -> Vec<f64> {
    let mut roots = Vec::new();
    if !(hi > lo) || n < 2 {
        return roots;
    }
    let mut prev: Option<(f64, f64)> = None;
    for k in 0..=n {
        let x = lo + (hi - lo) * (k as f64) / (n as f64);
        let v = g(x);
        if !v.is_finite() {
            prev = None;
            continue;
        }
        if let Some((xp, vp)) = prev {
            if v == 0.0 {
                roots.push(x);
            } else if vp.signum() != v.signum() && vp != 0.0 {
                if let Ok(r) = brent(g, xp, x, xtol, 200) {
                    roots.push(r);
                }
            }
        }
        prev = Some((x, v));
    }
    roots.dedup_by(|a, b| (*a - *b).abs() <= xtol * (1.0 + a.abs()));
    roots
}

// ---------------------------------------------------------------------------
// Finite differences
// ---------------------------------------------------------------------------

/// Richardson-extrapolated central finite difference with step
/// `fd_step * max(1, |r|)`.
pub fn derivative(f: &ScalarField, r: f64, tol: &Tolerances) -> Result<f64, NumericsError> {
    tol.validate()?;
    let h = tol.fd_step * r.abs().max(1.0);
    let iv = f.domain().interval_of(r).ok_or(NumericsError::OutsideDomain { r })?;
    if r - 1.5 * h <= iv.lo || r + 1.5 * h >= iv.hi {
        return Err(NumericsError::TooCloseToSingularity { r });
    }
    for &x in f.domain().excluded() {
        if (r - x).abs() <= 2.0 * h {
            return Err(NumericsError::TooCloseToSingularity { r });
        }
    }
    let d = |step: f64| (f.eval_raw(r + step) - f.eval_raw(r - step)) / (2.0 * step);
    let d1 = d(h);
    let d2 = d(0.5 * h);
    let out = (4.0 * d2 - d1) / 3.0;
    if !out.is_finite() {
        return Err(NumericsError::NonFiniteSample { at: r });
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Grid sampling
// ---------------------------------------------------------------------------

/// Spacing rule for [`sample_grid`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum GridScale {
    Linear,
    Log,
}

/// `n` strictly interior points of `d`, none within the guard band of an
/// excluded point. Unbounded intervals are truncated at `r_max`.
pub fn sample_grid(
    d: &Domain,
    n: usize,
    scale: GridScale,
    r_max: f64,
    tol: &Tolerances,
) -> Result<Vec<f64>, NumericsError> {
    tol.validate()?;
    if n < 2 {
        return Err(NumericsError::BadArgument("grid needs n >= 2"));
    }
    let mut capped: Vec<Interval> = Vec::new();
    for iv in d.intervals() {
        let hi = iv.hi.min(r_max);
        if hi > iv.lo {
            capped.push(Interval::new(iv.lo, hi));
        }
    }
    if capped.is_empty() {
        return Err(NumericsError::EmptyDomain);
    }
    if scale == GridScale::Log && capped.iter().any(|iv| iv.lo <= 0.0) {
        return Err(NumericsError::BadArgument("log scale requires lo > 0"));
    }
    let weight = |iv: &Interval| match scale {
        GridScale::Linear => iv.hi - iv.lo,
        GridScale::Log => (iv.hi / iv.lo).ln(),
    };
    let total: f64 = capped.iter().map(weight).sum();
    let mut out = Vec::with_capacity(n);
    let mut assigned = 0usize;
    for (i, iv) in capped.iter().enumerate() {
        let m = if i + 1 == capped.len() {
            n - assigned
        } else {
            (((n as f64) * weight(iv) / total).round() as usize).min(n - assigned)
        };
        assigned += m;
        for k in 0..m {
            let t = (k as f64 + 1.0) / (m as f64 + 1.0);
            let mut x = match scale {
                GridScale::Linear => iv.lo + (iv.hi - iv.lo) * t,
                GridScale::Log => iv.lo * (iv.hi / iv.lo).powf(t),
            };
            // nudge off guard bands around excluded points
            for _ in 0..8 {
                if d.clear_of_excluded(x, tol.guard_band) {
                    break;
                }
                x += 3.0 * tol.guard_band * (1.0 + x.abs());
            }
            if iv.contains(x) && d.clear_of_excluded(x, tol.guard_band) {
                out.push(x);
            }
        }
    }
    if out.len() < 2 {
        return Err(NumericsError::EmptyDomain);
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Cumulative antiderivative cache (build-then-freeze)
// ---------------------------------------------------------------------------

/// Tabulated antiderivative `x ↦ ∫_base^x g` on a fixed bracket, interpolated
/// by cubic Hermite pieces. Immutable after construction; queries outside the
/// bracket fall back to direct quadrature from the nearest endpoint.
pub(crate) struct CumulativeIntegral {
    xs: Vec<f64>,
    vals: Vec<f64>,
    derivs: Vec<f64>,
}

impl fmt::Debug for CumulativeIntegral {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CumulativeIntegral")
            .field("nodes", &self.xs.len())
            .finish()
    }
}

impl CumulativeIntegral {
    /// Tabulate over `[lo, hi]` (which must contain `base`) with `cells`
    /// uniform cells, each integrated adaptively.
    pub fn build(
        g: &dyn Fn(f64) -> f64,
        lo: f64,
        hi: f64,
        base: f64,
        cells: usize,
        tol: &Tolerances,
    ) -> Result<Self, NumericsError> {
        if !(lo < hi) || base < lo || base > hi {
            return Err(NumericsError::BadArgument("cache bracket must contain base"));
        }
        let cells = cells.max(8);
        let mut xs = Vec::with_capacity(cells + 2);
        for k in 0..=cells {
            xs.push(lo + (hi - lo) * (k as f64) / (cells as f64));
        }
        // snap base into the node list
        let pos = xs.partition_point(|&x| x < base);
        if pos == xs.len() || (xs[pos] - base).abs() > 1e-12 * (1.0 + base.abs()) {
            xs.insert(pos, base);
        } else {
            xs[pos] = base;
        }
        let per_cell = Tolerances {
            quad_abs: tol.quad_abs / cells as f64,
            ..*tol
        };
        let n = xs.len();
        let mut vals = alloc::vec![0.0f64; n];
        let base_idx = xs.partition_point(|&x| x < base);
        for i in (0..base_idx).rev() {
            let inc = integrate_closure(g, xs[i], xs[i + 1], &per_cell)?;
            vals[i] = vals[i + 1] - inc;
        }
        for i in base_idx + 1..n {
            let inc = integrate_closure(g, xs[i - 1], xs[i], &per_cell)?;
            vals[i] = vals[i - 1] + inc;
        }
        let mut derivs = Vec::with_capacity(n);
        for &x in &xs {
            let v = g(x);
            if !v.is_finite() {
                return Err(NumericsError::NonFiniteSample { at: x });
            }
            derivs.push(v);
        }
        Ok(Self { xs, vals, derivs })
    }

    pub fn bracket(&self) -> (f64, f64) {
        (self.xs[0], *self.xs.last().unwrap())
    }

    /// Hermite-interpolated value of the antiderivative.
    pub fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x <= self.xs[0] {
            return self.vals[0] + self.derivs[0] * (x - self.xs[0]);
        }
        if x >= self.xs[n - 1] {
            return self.vals[n - 1] + self.derivs[n - 1] * (x - self.xs[n - 1]);
        }
        let i = self.xs.partition_point(|&t| t <= x).saturating_sub(1).min(n - 2);
        let (x0, x1) = (self.xs[i], self.xs[i + 1]);
        let hstep = x1 - x0;
        let t = (x - x0) / hstep;
        let (f0, f1) = (self.vals[i], self.vals[i + 1]);
        let (d0, d1) = (self.derivs[i] * hstep, self.derivs[i + 1] * hstep);
        let t2 = t * t;
        let t3 = t2 * t;
        (2.0 * t3 - 3.0 * t2 + 1.0) * f0
            + (t3 - 2.0 * t2 + t) * d0
            + (-2.0 * t3 + 3.0 * t2) * f1
            + (t3 - t2) * d1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn tols() -> Tolerances {
        Tolerances::default()
    }

    fn field(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> ScalarField {
        ScalarField::new("test", Domain::real_line(), f)
    }

    #[test]
    fn domain_invariants_enforced() {
        assert!(Domain::new(alloc::vec![Interval::new(1.0, 1.0)], alloc::vec![]).is_err());
        assert!(Domain::new(
            alloc::vec![Interval::new(0.0, 2.0), Interval::new(1.0, 3.0)],
            alloc::vec![]
        )
        .is_err());
        assert!(Domain::new(alloc::vec![Interval::new(0.0, 1.0)], alloc::vec![2.0]).is_err());
        let d = Domain::new(
            alloc::vec![Interval::new(0.0, 1.0), Interval::new(2.0, f64::INFINITY)],
            alloc::vec![0.5, 3.0],
        )
        .unwrap();
        assert!(d.contains(0.25));
        assert!(!d.contains(1.5));
        assert!(d.contains(1e9));
        assert!(!d.clear_of_excluded(0.5 + 1e-10, 1e-9));
        assert!(d.clear_of_excluded(0.6, 1e-9));
    }

    #[test]
    fn integrate_polynomial() {
        let f = field(|r| r * r);
        let v = integrate(&f, 0.0, 1.0, &tols()).unwrap();
        assert_abs_diff_eq!(v, 1.0 / 3.0, epsilon = 1e-13);
    }

    #[test]
    fn integrate_zero_integrand() {
        let f = field(|_| 0.0);
        assert_eq!(integrate(&f, -3.0, 7.0, &tols()).unwrap(), 0.0);
    }

    #[test]
    fn integrate_reversed_bounds_negates() {
        let f = field(|r| r.cos());
        let a = integrate(&f, 0.0, 2.0, &tols()).unwrap();
        let b = integrate(&f, 2.0, 0.0, &tols()).unwrap();
        assert_abs_diff_eq!(a, -b, epsilon = 1e-14);
    }

    #[test]
    fn integrate_to_infinity() {
        // frozen: ∫_0^∞ r² e^{-r} dr = 2, ∫_0^∞ dr/(1+r²) = π/2
        let f = field(|r| r * r * (-r).exp());
        assert_abs_diff_eq!(integrate(&f, 0.0, f64::INFINITY, &tols()).unwrap(), 2.0, epsilon = 1e-9);
        let g = field(|r| 1.0 / (1.0 + r * r));
        assert_abs_diff_eq!(
            integrate(&g, 0.0, f64::INFINITY, &tols()).unwrap(),
            1.5707963267948966,
            epsilon = 1e-9
        );
    }

    #[test]
    fn integrate_rejects_excluded_in_path() {
        let d = Domain::open(0.0, 10.0).with_excluded(alloc::vec![5.0]).unwrap();
        let f = ScalarField::new("f", d, |r| 1.0 / (r - 5.0));
        match integrate(&f, 1.0, 9.0, &tols()) {
            Err(NumericsError::PathCrossesExcluded { at }) => assert_eq!(at, 5.0),
            other => panic!("expected PathCrossesExcluded, got {other:?}"),
        }
        // but a path on one side is fine
        assert!(integrate(&f, 1.0, 4.0, &tols()).is_ok());
    }

    #[test]
    fn integrate_nonfinite_reported() {
        let f = field(|r| 1.0 / r);
        match integrate(&f, -1.0, 1.0, &tols()) {
            Err(NumericsError::NonFiniteSample { .. }) | Err(NumericsError::NoConvergence { .. }) => {}
            other => panic!("expected failure, got {other:?}"),
        }
    }

    #[test]
    fn find_root_quadratic() {
        // frozen oracle: sqrt(7/pi) = 1.4927053303604616
        let f = field(|r| core::f64::consts::PI * r * r - 7.0);
        let r = find_root(&f, 1.0, 2.0, &tols()).unwrap();
        assert_abs_diff_eq!(r, 1.4927053303604616, epsilon = 1e-11);
    }

    #[test]
    fn find_root_linear_through_zero() {
        let f = field(|r| r);
        let r = find_root(&f, -1.0, 1.0, &tols()).unwrap();
        assert_abs_diff_eq!(r, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn find_root_requires_sign_change() {
        let f = field(|r| r * r + 1.0);
        match find_root(&f, -1.0, 1.0, &tols()) {
            Err(NumericsError::NoSignChange { .. }) => {}
            other => panic!("expected NoSignChange, got {other:?}"),
        }
    }

    #[test]
    fn derivative_cubic() {
        let f = field(|r| r * r * r);
        let d = derivative(&f, 2.0, &tols()).unwrap();
        assert_abs_diff_eq!(d, 12.0, epsilon = 1e-8);
    }

    #[test]
    fn derivative_constant_is_zero() {
        let f = field(|_| 42.0);
        assert_abs_diff_eq!(derivative(&f, 3.0, &tols()).unwrap(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn derivative_guards_excluded() {
        let d = Domain::open(0.0, 10.0).with_excluded(alloc::vec![2.0]).unwrap();
        let f = ScalarField::new("f", d, |r| r);
        match derivative(&f, 2.0 + 1e-9, &tols()) {
            Err(NumericsError::TooCloseToSingularity { .. }) => {}
            other => panic!("expected TooCloseToSingularity, got {other:?}"),
        }
    }

    #[test]
    fn sample_grid_linear() {
        let d = Domain::open(0.0, 1.0);
        let g = sample_grid(&d, 3, GridScale::Linear, DEFAULT_R_MAX, &tols()).unwrap();
        assert_eq!(g.len(), 3);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
        assert!(g.iter().all(|&x| x > 0.0 && x < 1.0));
    }

    #[test]
    fn sample_grid_avoids_excluded() {
        let d = Domain::open(0.0, 1.0).with_excluded(alloc::vec![0.5]).unwrap();
        let g = sample_grid(&d, 99, GridScale::Linear, DEFAULT_R_MAX, &tols()).unwrap();
        assert!(g.iter().all(|&x| (x - 0.5).abs() > 1e-9 * 1.5));
    }

    #[test]
    fn sample_grid_log_caps_unbounded() {
        let d = Domain::unbounded(1.0);
        let g = sample_grid(&d, 5, GridScale::Log, DEFAULT_R_MAX, &tols()).unwrap();
        assert_eq!(g.len(), 5);
        assert!(g.iter().all(|&x| x > 1.0 && x < 1e6));
    }

    #[test]
    fn sample_grid_empty_after_cap() {
        // the whole domain sits above the cap
        let d = Domain::unbounded(1e7);
        match sample_grid(&d, 5, GridScale::Linear, DEFAULT_R_MAX, &tols()) {
            Err(NumericsError::EmptyDomain) => {}
            other => panic!("expected EmptyDomain, got {other:?}"),
        }
    }

    #[test]
    fn cumulative_integral_matches_antiderivative() {
        let g = |x: f64| x.cos();
        let cache = CumulativeIntegral::build(&g, 0.0, 3.0, 1.0, 256, &tols()).unwrap();
        for &x in &[0.1, 0.7, 1.0, 1.9, 2.99] {
            assert_abs_diff_eq!(cache.eval(x), x.sin() - 1.0f64.sin(), epsilon = 1e-10);
        }
    }

    #[test]
    fn fundamental_theorem_round_trip() {
        // derivative of the running antiderivative recovers the integrand
        let g = |x: f64| (x * 0.5).sin() + 0.3 * x;
        let cache = CumulativeIntegral::build(&g, 0.0, 4.0, 0.0, 512, &tols()).unwrap();
        let field = ScalarField::new("anti", Domain::open(0.0, 4.0), move |x| cache.eval(x));
        for &x in &[0.5, 1.5, 2.5, 3.5] {
            let d = derivative(&field, x, &tols()).unwrap();
            assert_abs_diff_eq!(d, g(x), epsilon = 1e-7);
        }
    }
}
