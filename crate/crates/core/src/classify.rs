//! Classification of catalog densities — cavities, singularities, matter type
//! per segment, realism flags — and critical-configuration scans over the
//! (c₁, c₂) parameter plane, including the dedicated row-1, row-2, and
//! cubic-denominator analyses.

use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;

use num_complex::Complex64;

use crate::catalog::{CatalogEntry, CatalogError, Params, RowId};
use crate::numerics::{brent, bracket_roots, derivative, Domain, NumericsError, Tolerances};

#[allow(unused_imports)]
use num_traits::Float;

/// Scan density per window used by [`classify`].
const SCAN_POINTS: usize = 1600;

/// Errors from classification and scanning.
#[derive(Debug, Clone, PartialEq)]
pub enum ClassifyError {
    /// A sign ambiguity could not be resolved by subdivision.
    UnresolvedRoot { lo: f64, hi: f64 },
    /// Bracket expansion for the row-2 singularity failed (pathological c₁).
    BracketExpansionFailed { c1: f64 },
    /// The supplied domain leaves the entry's admissible radii.
    DomainOutsideEntry { lo: f64 },
    BadArgument(&'static str),
    Catalog(CatalogError),
    Numerics(NumericsError),
}

impl fmt::Display for ClassifyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::UnresolvedRoot { lo, hi } => {
                write!(f, "unresolved sign structure in ({lo}, {hi})")
            }
            Self::BracketExpansionFailed { c1 } => {
                write!(f, "could not bracket the singularity for c1 = {c1}")
            }
            Self::DomainOutsideEntry { lo } => {
                write!(f, "domain extends below the entry's admissible radii (lo = {lo})")
            }
            Self::BadArgument(m) => write!(f, "bad argument: {m}"),
            Self::Catalog(e) => write!(f, "{e}"),
            Self::Numerics(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for ClassifyError {}

impl From<CatalogError> for ClassifyError {
    fn from(e: CatalogError) -> Self {
        Self::Catalog(e)
    }
}
impl From<NumericsError> for ClassifyError {
    fn from(e: NumericsError) -> Self {
        Self::Numerics(e)
    }
}

/// Sign of the density on a segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Matter {
    Ordinary,
    Exotic,
}

impl Matter {
    fn letter(self) -> char {
        match self {
            Self::Ordinary => 'O',
            Self::Exotic => 'X',
        }
    }
}

/// A maximal interval of constant matter type.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Segment {
    pub lo: f64,
    pub hi: f64,
    pub matter: Matter,
}

/// A zero of the density. Tangential cavities (|ρ| touching zero without a
/// sign change) are annotated.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Cavity {
    pub radius: f64,
    pub tangential: bool,
}

/// The classification flags.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Flags {
    pub without_cavities: bool,
    pub without_singularities: bool,
    pub smooth: bool,
    pub realistic: bool,
}

/// Full classification of one (entry, parameters, domain) triple.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ClassificationReport {
    pub row: RowId,
    pub params: Params,
    /// Divergence radii: the lower boundary when ρ blows up there, plus every
    /// interior zero of the h-denominator inside the domain.
    pub singularities: Vec<f64>,
    pub cavities: Vec<Cavity>,
    pub segments: Vec<Segment>,
    pub flags: Flags,
    pub domain_used: Domain,
    /// Segment letters joined by '|', e.g. "X|O|X".
    pub pattern: String,
}

/// The classification window used for scans and the CLI: the entry's
/// admissible radii capped at max(10, 2.5·outermost singularity).
pub fn standard_domain(e: &CatalogEntry, params: Params, tol: &Tolerances) -> Domain {
    let lo = e.domain_lo();
    let r_top = e.singular_radii(params, tol).last().copied().unwrap_or(lo);
    let hi = (2.5 * r_top).max(10.0);
    Domain::open(lo, hi)
}

/// Classify the density of `e` on `domain`: locate singularities (denominator
/// zeros refined by Brent), cavities (sign changes of ρ between them, plus
/// tangential zeros), and type each segment by the density's sign.
pub fn classify(
    e: &CatalogEntry,
    params: Params,
    domain: &Domain,
    tol: &Tolerances,
) -> Result<ClassificationReport, ClassifyError> {
    classify_with_density(e, params, domain, SCAN_POINTS, tol)
}

fn classify_with_density(
    e: &CatalogEntry,
    params: Params,
    domain: &Domain,
    scan_points: usize,
    tol: &Tolerances,
) -> Result<ClassificationReport, ClassifyError> {
    let entry_lo = e.domain_lo();
    let Some(first) = domain.intervals().first() else {
        return Err(ClassifyError::BadArgument("empty domain"));
    };
    if first.lo < entry_lo - 1e-12 {
        return Err(ClassifyError::DomainOutsideEntry { lo: first.lo });
    }
    let rho = e.density_field(params, tol);
    let all_sings = e.singular_radii(params, tol);

    let mut singularities = Vec::new();
    if e.origin_singular() && (first.lo - entry_lo).abs() <= 1e-12 {
        singularities.push(entry_lo);
    }
    let mut cavities: Vec<Cavity> = Vec::new();
    let mut segments: Vec<Segment> = Vec::new();
    let mut interior_sings = 0usize;

    // an unbounded interval is scanned up to the standard cap
    let hi_cap = standard_domain(e, params, tol).intervals()[0].hi;
    for iv in domain.intervals() {
        let iv_hi = if iv.hi.is_finite() { iv.hi } else { hi_cap.max(iv.lo + 1.0) };
        let mut marks = alloc::vec![iv.lo];
        for &s in &all_sings {
            if s > iv.lo && s < iv_hi {
                marks.push(s);
                singularities.push(s);
                interior_sings += 1;
            }
        }
        marks.push(iv_hi);
        for w in marks.windows(2) {
            let (mut lo, mut hi) = (w[0], w[1]);
            let pad = |x: f64| (1e-7f64).max(10.0 * tol.guard_band * (1.0 + x.abs()));
            lo += pad(lo);
            hi -= pad(hi);
            if hi <= lo {
                continue;
            }
            let (mut cavs, sub_segments) =
                scan_window(&rho, lo, hi, scan_points, tol)?;
            cavities.append(&mut cavs);
            segments.extend(sub_segments);
        }
    }
    cavities.sort_by(|a, b| a.radius.total_cmp(&b.radius));
    singularities.sort_by(f64::total_cmp);

    let without_cavities = cavities.is_empty();
    let single_interval = domain.intervals().len() == 1;
    let without_singularities =
        single_interval && interior_sings == 0 && first.lo.abs() <= 1e-12;
    // catalog densities are smooth wherever they are defined
    let smooth = without_singularities;
    let realistic = smooth
        && without_cavities
        && segments.iter().all(|s| s.matter == Matter::Ordinary);
    let pattern: String = {
        let mut s = String::new();
        for (i, seg) in segments.iter().enumerate() {
            if i > 0 {
                s.push('|');
            }
            s.push(seg.matter.letter());
        }
        s
    };
    Ok(ClassificationReport {
        row: e.row(),
        params,
        singularities,
        cavities,
        segments,
        flags: Flags { without_cavities, without_singularities, smooth, realistic },
        domain_used: domain.clone(),
        pattern,
    })
}

/// Scan one singularity-free window for cavities and type the sub-segments.
fn scan_window(
    rho: &crate::numerics::ScalarField,
    lo: f64,
    hi: f64,
    n: usize,
    tol: &Tolerances,
) -> Result<(Vec<Cavity>, Vec<Segment>), ClassifyError> {
    let g = |r: f64| rho.eval_raw(r);
    let mut vals = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let x = lo + (hi - lo) * (k as f64) / (n as f64);
        vals.push((x, g(x)));
    }
    // typical magnitude of ρ on the window: the median is robust against the
    // divergence next to singular endpoints
    let scale = {
        let mut mags: Vec<f64> = vals.iter().map(|&(_, v)| v.abs()).filter(|v| v.is_finite()).collect();
        mags.sort_by(f64::total_cmp);
        mags.get(mags.len() / 2).copied().unwrap_or(0.0)
    };
    let mut cavities = Vec::new();
    for k in 1..vals.len() {
        let (x0, v0) = vals[k - 1];
        let (x1, v1) = vals[k];
        if !v0.is_finite() || !v1.is_finite() {
            continue;
        }
        if v0 != 0.0 && v1 != 0.0 && v0.signum() != v1.signum() {
            let r = brent(&g, x0, x1, tol.root_tol, 200)
                .map_err(|_| ClassifyError::UnresolvedRoot { lo: x0, hi: x1 })?;
            cavities.push(Cavity { radius: r, tangential: false });
        }
    }
    // tangential zeros: local minima of |ρ| at negligible relative scale
    for k in 1..vals.len().saturating_sub(1) {
        let (x, v) = vals[k];
        let (_, vl) = vals[k - 1];
        let (_, vr) = vals[k + 1];
        if v.abs() < vl.abs()
            && v.abs() <= vr.abs()
            && v.abs() < 1e-10 * (1.0 + scale)
            && vl.signum() == vr.signum()
            && v != 0.0
        {
            if cavities.iter().all(|c: &Cavity| (c.radius - x).abs() > 1e-6 * (1.0 + x.abs())) {
                cavities.push(Cavity { radius: x, tangential: true });
            }
        }
    }
    cavities.sort_by(|a, b| a.radius.total_cmp(&b.radius));

    // type the sub-segments between cavities, probing three interior points
    let mut marks = alloc::vec![lo];
    marks.extend(cavities.iter().filter(|c| !c.tangential).map(|c| c.radius));
    marks.push(hi);
    let mut segments = Vec::new();
    for w in marks.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        let eps = 1e-3 * (b - a);
        let probes = [a + 0.25 * (b - a), a + 0.5 * (b - a), a + 0.75 * (b - a)];
        let signs: Vec<f64> = probes.iter().map(|&x| g(x).signum()).collect();
        let matter = if signs.iter().all(|&s| s == signs[0]) {
            if signs[0] < 0.0 {
                Matter::Exotic
            } else {
                Matter::Ordinary
            }
        } else {
            // disagreement: rescan this sub-window densely for a missed root
            let extra = bracket_roots(&g, a + eps, b - eps, 4 * SCAN_POINTS, tol.root_tol);
            if extra.is_empty() {
                return Err(ClassifyError::UnresolvedRoot { lo: a, hi: b });
            }
            // classify by the midpoint of the first stable piece
            let mid = a + 0.5 * (extra[0] - a);
            if g(mid) < 0.0 {
                Matter::Exotic
            } else {
                Matter::Ordinary
            }
        };
        segments.push(Segment { lo: a, hi: b, matter });
    }
    Ok((cavities, segments))
}

// ---------------------------------------------------------------------------
// Row-specific analyses
// ---------------------------------------------------------------------------

/// Direction of a one-sided divergence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum DivergenceSign {
    PlusInfinity,
    MinusInfinity,
}

/// Closed-form row-1 analysis: for c₁ > 0 the interior singularity sits at
/// r₀ = √(c₁/π) and the cavity at r₁ = √(c₁/(5π)).
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Row1Report {
    pub params: Params,
    pub singularity: Option<f64>,
    pub cavity: Option<f64>,
    /// r₀ and r₁ collide at the origin when c₁ = 0.
    pub degenerate_at_origin: bool,
    /// ρ'(r₁), measured by finite differences.
    pub rho_prime_at_cavity: Option<f64>,
    /// Measured one-sided behavior of ρ at r₀.
    pub limit_from_left: Option<DivergenceSign>,
    pub limit_from_right: Option<DivergenceSign>,
}

pub fn row1_analysis(params: Params, tol: &Tolerances) -> Row1Report {
    let entry = crate::catalog::entry(RowId::Table(1)).expect("row 1 exists");
    let mut report = Row1Report {
        params,
        singularity: None,
        cavity: None,
        degenerate_at_origin: false,
        rho_prime_at_cavity: None,
        limit_from_left: None,
        limit_from_right: None,
    };
    if params.c1 == 0.0 {
        report.degenerate_at_origin = true;
        report.singularity = Some(0.0);
        report.cavity = Some(0.0);
        return report;
    }
    if params.c1 < 0.0 {
        return report;
    }
    let r0 = (params.c1 / PI).sqrt();
    let r1 = (params.c1 / (5.0 * PI)).sqrt();
    report.singularity = Some(r0);
    report.cavity = Some(r1);
    let rho = entry.density_field(params, tol);
    report.rho_prime_at_cavity = derivative(&rho, r1, tol).ok();
    let side = |sign: f64| {
        let mut prev = 0.0f64;
        let mut verdict = None;
        for &delta in &[1e-4, 1e-5, 1e-6] {
            let v = rho.eval_raw(r0 * (1.0 + sign * delta));
            if !v.is_finite() {
                return None;
            }
            if prev != 0.0 && (v.abs() <= prev.abs() || v.signum() != prev.signum()) {
                return None;
            }
            prev = v;
            verdict = Some(if v > 0.0 {
                DivergenceSign::PlusInfinity
            } else {
                DivergenceSign::MinusInfinity
            });
        }
        verdict
    };
    report.limit_from_left = side(-1.0);
    report.limit_from_right = side(1.0);
    report
}

/// The unique singularity radius r* > 1 of the row-2 family:
/// the single zero of Y(r, c₁) = -c₁ + πr² + π log(r² - 1), unique because
/// ∂Y/∂r > 0 for r > 1 (asserted on sampled points).
pub fn row2_singularity(c1: f64, tol: &Tolerances) -> Result<f64, ClassifyError> {
    let y = move |r: f64| -c1 + PI * r * r + PI * (r * r - 1.0).ln();
    let mut lo = None;
    for k in 1..=15 {
        let t = 1.0 + 10f64.powi(-k);
        if y(t) < 0.0 {
            lo = Some(t);
            break;
        }
    }
    let lo = lo.ok_or(ClassifyError::BracketExpansionFailed { c1 })?;
    let mut hi = 2.0f64.max(lo + 1.0);
    let mut found = y(hi) > 0.0;
    for _ in 0..60 {
        if found {
            break;
        }
        hi *= 2.0;
        found = y(hi) > 0.0;
    }
    if !found {
        return Err(ClassifyError::BracketExpansionFailed { c1 });
    }
    // monotonicity of Y in r underwrites uniqueness; check it on the bracket
    for k in 1..=8 {
        let r = lo + (hi - lo) * (k as f64) / 9.0;
        let dy = (y(r * (1.0 + 1e-7)) - y(r * (1.0 - 1e-7))) / (2e-7 * r);
        if !(dy > 0.0) {
            return Err(ClassifyError::BracketExpansionFailed { c1 });
        }
    }
    brent(&y, lo, hi, tol.root_tol, 200).map_err(|_| ClassifyError::BracketExpansionFailed { c1 })
}

/// The three roots of the cubic denominator core π r³ - c₁ r + 1 (each of
/// multiplicity three in the full density denominator, next to the double
/// root at the origin), ordered like the printed analysis: r1 is the largest
/// real root (the single real one below the critical c₁), r2 and r3 the
/// remaining roots with r2 ≤ r3 when real, conjugates otherwise.
pub fn row7_roots(c1: f64) -> (Complex64, Complex64, Complex64) {
    // depressed cubic t³ + pt + q
    let p = -c1 / PI;
    let q = 1.0 / PI;
    let disc = (q / 2.0) * (q / 2.0) + (p / 3.0).powi(3);
    if disc <= 0.0 {
        // three real roots (trigonometric form)
        let m = 2.0 * (-p / 3.0).sqrt();
        let cos3 = (3.0 * q / (2.0 * p)) * (-3.0 / p).sqrt();
        let theta = cos3.clamp(-1.0, 1.0).acos() / 3.0;
        let mut roots = [
            m * theta.cos(),
            m * (theta - 2.0 * core::f64::consts::FRAC_PI_3).cos(),
            m * (theta - 4.0 * core::f64::consts::FRAC_PI_3).cos(),
        ];
        roots.sort_by(f64::total_cmp);
        (
            Complex64::new(roots[2], 0.0),
            Complex64::new(roots[0], 0.0),
            Complex64::new(roots[1], 0.0),
        )
    } else {
        // one real root; avoid cancellation by taking the larger cube root
        let s = disc.sqrt();
        let w = -q / 2.0 - q.signum() * s;
        let u = w.cbrt();
        let v = -p / (3.0 * u);
        let real = u + v;
        let re = -real / 2.0;
        let im = (3.0f64.sqrt() / 2.0) * (u - v);
        (
            Complex64::new(real, 0.0),
            Complex64::new(re, im),
            Complex64::new(re, -im),
        )
    }
}

// ---------------------------------------------------------------------------
// Critical-configuration scans
// ---------------------------------------------------------------------------

/// Which family constant a scan sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum SweepParameter {
    C1,
    C2,
}

impl SweepParameter {
    /// Build the parameter pair with `value` in this slot.
    pub fn apply(self, value: f64, fixed_other: f64) -> Params {
        match self {
            Self::C1 => Params::new(value, fixed_other),
            Self::C2 => Params::new(fixed_other, value),
        }
    }
}

/// One sweep sample: counts and pattern at a parameter value.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SweepPoint {
    pub value: f64,
    pub n_singular: usize,
    pub n_cavity: usize,
    pub pattern: String,
}

/// A detected topology change between two adjacent sweep values, refined by
/// bisection on the counting function.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ChangePoint {
    pub value_lo: f64,
    pub value_hi: f64,
    pub refined: f64,
}

/// Result of a parameter sweep.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CriticalScanResult {
    pub row: RowId,
    pub parameter: SweepParameter,
    pub fixed_other: f64,
    pub sweep: Vec<SweepPoint>,
    pub change_points: Vec<ChangePoint>,
}

/// The (n_singular, n_cavity, pattern) state a sweep compares between
/// neighboring parameter values.
pub fn sweep_state(
    e: &CatalogEntry,
    params: Params,
    domain: &Domain,
    tol: &Tolerances,
) -> Result<(usize, usize, String), ClassifyError> {
    let rep = classify(e, params, domain, tol)?;
    Ok((rep.singularities.len(), rep.cavities.len(), rep.pattern))
}

/// The fixed classification window a sweep over `range` uses: wide enough for
/// the singularity structure at both endpoints and the midpoint.
pub fn scan_domain(
    e: &CatalogEntry,
    parameter: SweepParameter,
    fixed_other: f64,
    range: (f64, f64),
    tol: &Tolerances,
) -> Domain {
    let probes = [range.0, 0.5 * (range.0 + range.1), range.1];
    let mut hi = 0.0f64;
    for &v in &probes {
        let d = standard_domain(e, parameter.apply(v, fixed_other), tol);
        hi = hi.max(d.intervals()[0].hi);
    }
    Domain::open(e.domain_lo(), hi)
}

/// Bisect a state change between two sweep values down to
/// `root_tol · (1 + |value|)`, comparing against the state at `lo`.
pub fn refine_change_point(
    e: &CatalogEntry,
    parameter: SweepParameter,
    fixed_other: f64,
    domain: &Domain,
    mut lo: f64,
    mut hi: f64,
    tol: &Tolerances,
) -> Result<f64, ClassifyError> {
    let state_lo = sweep_state(e, parameter.apply(lo, fixed_other), domain, tol)?;
    for _ in 0..64 {
        if hi - lo <= tol.root_tol * (1.0 + lo.abs()) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let st = sweep_state(e, parameter.apply(mid, fixed_other), domain, tol)?;
        if st == state_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Sweep one parameter over `range` with `steps` values (≥ 8), classifying on
/// a fixed standard domain, and refine every neighbor-to-neighbor change of
/// (n_singular, n_cavity, pattern) by bisection to `root_tol · (1 + |value|)`.
pub fn critical_scan(
    e: &CatalogEntry,
    parameter: SweepParameter,
    fixed_other: f64,
    range: (f64, f64),
    steps: usize,
    tol: &Tolerances,
) -> Result<CriticalScanResult, ClassifyError> {
    if steps < 8 {
        return Err(ClassifyError::BadArgument("scan needs at least 8 steps"));
    }
    if !(range.1 > range.0) {
        return Err(ClassifyError::BadArgument("scan range must be increasing"));
    }
    let domain = scan_domain(e, parameter, fixed_other, range, tol);
    let mut sweep = Vec::with_capacity(steps);
    for k in 0..steps {
        let value = range.0 + (range.1 - range.0) * (k as f64) / (steps as f64 - 1.0);
        let (n_singular, n_cavity, pattern) =
            sweep_state(e, parameter.apply(value, fixed_other), &domain, tol)?;
        sweep.push(SweepPoint { value, n_singular, n_cavity, pattern });
    }
    let mut change_points = Vec::new();
    for k in 1..sweep.len() {
        let (a, b) = (&sweep[k - 1], &sweep[k]);
        let same = a.n_singular == b.n_singular
            && a.n_cavity == b.n_cavity
            && a.pattern == b.pattern;
        if same {
            continue;
        }
        let refined =
            refine_change_point(e, parameter, fixed_other, &domain, a.value, b.value, tol)?;
        change_points.push(ChangePoint { value_lo: a.value, value_hi: b.value, refined });
    }
    Ok(CriticalScanResult {
        row: e.row(),
        parameter,
        fixed_other,
        sweep,
        change_points,
    })
}
