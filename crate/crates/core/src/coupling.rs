//! Integrability machinery: the coupling-function split Λ = Λ₀ + Λ₁, the
//! h-ODE F = 2πr³h² + r²h', mass reconstruction from h through the linear
//! part, and the explicit pressure solution of the modified Riccati equation.

use alloc::sync::Arc;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;

use crate::extended::aitken_limit;
use crate::numerics::{
    bracket_roots, derivative, integrate, CumulativeIntegral, Domain, NumericsError, ScalarField,
    Tolerances,
};
use crate::tov::{riccati_coefficients, MassModel, TovError};

#[allow(unused_imports)]
use num_traits::Float;

/// Errors from the coupling machinery.
#[derive(Debug, Clone, PartialEq)]
pub enum CouplingError {
    /// `h(r)` vanishes within the guard band.
    ZeroH { r: f64 },
    /// `C(r)` vanishes within the guard band.
    ZeroC { r: f64 },
    /// The pressure denominator `c₀ - ∫ C·E` vanishes (a pole of p).
    ZeroDenominator { r: f64 },
    /// The integration path crosses a singular radius.
    PathCrossesSingularity { at: f64 },
    Tov(TovError),
    Numerics(NumericsError),
}

impl fmt::Display for CouplingError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::ZeroH { r } => write!(f, "h vanishes within guard band at r = {r}"),
            Self::ZeroC { r } => write!(f, "C vanishes within guard band at r = {r}"),
            Self::ZeroDenominator { r } => {
                write!(f, "pressure denominator vanishes at r = {r} (pole)")
            }
            Self::PathCrossesSingularity { at } => {
                write!(f, "integration path crosses singular radius at r = {at}")
            }
            Self::Tov(e) => write!(f, "{e}"),
            Self::Numerics(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for CouplingError {}

impl From<TovError> for CouplingError {
    fn from(e: TovError) -> Self {
        Self::Tov(e)
    }
}

impl From<NumericsError> for CouplingError {
    fn from(e: NumericsError) -> Self {
        match e {
            NumericsError::PathCrossesExcluded { at } => Self::PathCrossesSingularity { at },
            other => Self::Numerics(other),
        }
    }
}

/// Integration constants of the integrability construction: `c0` from the
/// pressure solution, `c1` from the h family, `c2` from the linear-part mass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrabilityParams {
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
}

impl Default for IntegrabilityParams {
    fn default() -> Self {
        Self { c0: 1.0, c1: 0.0, c2: 1.0 }
    }
}

/// The maximal split of the order-1 coupling function:
/// Λ₀(M, M', r) = M' - (2h'/h - 1/r) M + 2πr²h + r h'/h (linear part) and
/// Λ₁(M, M', r) = M M' / (2πr³h) (nonlinear part).
#[derive(Debug, Clone)]
pub struct CouplingSplit {
    pub h: ScalarField,
    pub h_prime: ScalarField,
}

impl CouplingSplit {
    /// Order of the coupling equation generated by the split.
    pub const ORDER: u32 = 1;

    pub fn new(h: ScalarField, h_prime: ScalarField) -> Self {
        Self { h, h_prime }
    }

    /// Back `h'` by finite differences of `h`.
    pub fn with_fd_derivative(h: ScalarField, tol: Tolerances) -> Self {
        let inner = h.clone();
        let h_prime = ScalarField::new(
            alloc::format!("{}'", h.label()),
            h.domain().clone(),
            move |r| derivative(&inner, r, &tol).unwrap_or(f64::NAN),
        );
        Self { h, h_prime }
    }

    /// The linear part Λ₀ at `(M, M', r)`. Affine in `(M, M')` at fixed `r`.
    pub fn lambda0(&self, m: f64, m_prime: f64, r: f64, tol: &Tolerances) -> Result<f64, CouplingError> {
        let h = self.h.eval(r, tol)?;
        if h == 0.0 {
            return Err(CouplingError::ZeroH { r });
        }
        let hp = self.h_prime.eval(r, tol)?;
        let v = m_prime - (2.0 * hp / h - 1.0 / r) * m + 2.0 * PI * r * r * h + r * hp / h;
        if !v.is_finite() {
            return Err(CouplingError::ZeroH { r });
        }
        Ok(v)
    }

    /// The nonlinear part Λ₁ = M M' / (2πr³h).
    pub fn lambda1(&self, m: f64, m_prime: f64, r: f64, tol: &Tolerances) -> Result<f64, CouplingError> {
        let h = self.h.eval(r, tol)?;
        if h == 0.0 {
            return Err(CouplingError::ZeroH { r });
        }
        let v = m * m_prime / (2.0 * PI * r.powi(3) * h);
        if !v.is_finite() {
            return Err(CouplingError::ZeroH { r });
        }
        Ok(v)
    }
}

/// Raw residual of the h-ODE, F(r) - (2πr³h² + r²h'), with h' by finite
/// difference.
pub fn h_ode_residual(
    f: &ScalarField,
    h: &ScalarField,
    r: f64,
    tol: &Tolerances,
) -> Result<f64, CouplingError> {
    let fv = f.eval(r, tol)?;
    let hv = h.eval(r, tol)?;
    let hp = derivative(h, r, tol)?;
    Ok(fv - (2.0 * PI * r.powi(3) * hv * hv + r * r * hp))
}

/// Mass reconstructed from h through the linear part:
/// M(r) = (h(r)²/r) · (c₂ - ∫_base^r F/h³ ds).
///
/// The printed integrand of the linear-part solution, -s²(h' + 2πs h²)/h³,
/// equals -F/h³ by the h-ODE (F = s²h' + 2πs³h²); the simplified form is what
/// is integrated here.
pub fn mass_from_h(
    f: &ScalarField,
    h: &ScalarField,
    params: &IntegrabilityParams,
    r: f64,
    base: f64,
    tol: &Tolerances,
) -> Result<f64, CouplingError> {
    let hr = h.eval(r, tol)?;
    if hr == 0.0 {
        return Err(CouplingError::ZeroH { r });
    }
    if let Some(x) = h.domain().excluded_between(base, r) {
        return Err(CouplingError::PathCrossesSingularity { at: x });
    }
    let f = f.clone();
    let h2 = h.clone();
    let integrand = ScalarField::new(
        "F/h^3",
        h.domain().clone(),
        move |s| f.eval_raw(s) / h2.eval_raw(s).powi(3),
    );
    let g = integrate(&integrand, base, r, tol)?;
    Ok(hr * hr / r * (params.c2 - g))
}

/// The modified leading coefficient Ã(r) = h'/2 - B h/2 - C h²/4 (the A that
/// makes the explicit pressure an exact Riccati solution). With f = B² + 2gC
/// and g = h', the printed form [f - (B + Ch)²]/(4C) reduces to this; the B²
/// cancellation is done algebraically so f is never materialized.
pub fn modified_a(
    mass: &MassModel,
    h: &ScalarField,
    r: f64,
    tol: &Tolerances,
) -> Result<f64, CouplingError> {
    let k = riccati_coefficients(mass, r, tol)?;
    if k.c.abs() <= tol.guard_band {
        return Err(CouplingError::ZeroC { r });
    }
    let hv = h.eval(r, tol)?;
    let hp = derivative(h, r, tol)?;
    Ok(hp / 2.0 - k.b * hv / 2.0 - k.c * hv * hv / 4.0)
}

/// Raw residual of the linear part for a mass model:
/// M' - (2h'/h - 1/r) M + 2πr²h + r h'/h.
pub fn lambda0_residual(
    split: &CouplingSplit,
    mass: &MassModel,
    r: f64,
    tol: &Tolerances,
) -> Result<f64, CouplingError> {
    let (m, mp) = mass.eval(r, tol)?;
    split.lambda0(m, mp, r, tol)
}

/// Tail behavior of Λ₁ along an increasing radius ladder.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TailReport {
    /// (radius, Λ₁) samples in ladder order.
    pub samples: Vec<(f64, f64)>,
    /// Whether |Λ₁| is non-increasing over the sampled tail.
    pub abs_decreasing: bool,
    /// Extrapolated limit, when the tail converges.
    pub limit_estimate: Option<f64>,
    /// True when |Λ₁| decreases toward a limit of zero.
    pub passes: bool,
}

/// Sample Λ₁ along `r_tail` and report whether it decays to zero (the
/// pseudo-asymptotic boundary condition).
pub fn pseudo_limit_check(
    split: &CouplingSplit,
    mass: &MassModel,
    r_tail: &[f64],
    tol: &Tolerances,
) -> TailReport {
    let mut samples = Vec::with_capacity(r_tail.len());
    for &r in r_tail {
        let v = match mass.eval(r, tol) {
            Ok((m, mp)) => split.lambda1(m, mp, r, tol).unwrap_or(f64::NAN),
            Err(_) => f64::NAN,
        };
        samples.push((r, v));
    }
    let vals: Vec<f64> = samples.iter().map(|&(_, v)| v).collect();
    let finite = vals.iter().all(|v| v.is_finite());
    let abs_decreasing = finite
        && vals.windows(2).all(|w| w[1].abs() <= w[0].abs() * (1.0 + 1e-12) + f64::MIN_POSITIVE);
    let limit_estimate = if finite { aitken_limit(&vals) } else { None };
    let passes = abs_decreasing
        && matches!(limit_estimate, Some(l) if l.abs() <= tol.residual_tol);
    TailReport { samples, abs_decreasing, limit_estimate, passes }
}

// ---------------------------------------------------------------------------
// Explicit pressure solution (build-then-freeze caches)
// ---------------------------------------------------------------------------

/// The explicit solution of the modified Riccati equation,
/// p(r) = E(r) / (c₀ - ∫_base^r C·E ds) + h(r)/2 with
/// E(r) = exp(∫_base^r (B + C·h) ds).
///
/// Both antiderivatives are tabulated once over a bracket at construction and
/// interpolated by cubic Hermite pieces; the solver is immutable afterwards
/// and safe to share across threads.
pub struct PressureSolver {
    h: ScalarField,
    exponent: CumulativeIntegral,
    outer: CumulativeIntegral,
    c0: f64,
    base: f64,
    tol: Tolerances,
}

impl fmt::Debug for PressureSolver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PressureSolver")
            .field("c0", &self.c0)
            .field("base", &self.base)
            .field("bracket", &self.exponent.bracket())
            .finish()
    }
}

impl PressureSolver {
    /// Tabulate the two antiderivatives of the pressure formula over
    /// `[lo, hi]` (containing `base`) with `cells` cache cells.
    pub fn build(
        mass: &MassModel,
        h: &ScalarField,
        c0: f64,
        base: f64,
        lo: f64,
        hi: f64,
        cells: usize,
        tol: &Tolerances,
    ) -> Result<Self, CouplingError> {
        tol.validate()?;
        let mass_bc = mass.clone();
        let h_bc = h.clone();
        let tol_bc = *tol;
        let bc = move |r: f64| match riccati_coefficients(&mass_bc, r, &tol_bc) {
            Ok(k) => k.b + k.c * h_bc.eval_raw(r),
            Err(_) => f64::NAN,
        };
        let exponent = CumulativeIntegral::build(&bc, lo, hi, base, cells, tol)?;
        let mass_ce = mass.clone();
        let tol_ce = *tol;
        let ce = move |r: f64| match riccati_coefficients(&mass_ce, r, &tol_ce) {
            Ok(k) => k.c * exponent.eval(r).exp(),
            Err(_) => f64::NAN,
        };
        let outer = CumulativeIntegral::build(&ce, lo, hi, base, cells, tol)?;
        // rebuild the exponent cache: it was moved into `ce`
        let mass_bc2 = mass.clone();
        let h_bc2 = h.clone();
        let tol_bc2 = *tol;
        let bc2 = move |r: f64| match riccati_coefficients(&mass_bc2, r, &tol_bc2) {
            Ok(k) => k.b + k.c * h_bc2.eval_raw(r),
            Err(_) => f64::NAN,
        };
        let exponent = CumulativeIntegral::build(&bc2, lo, hi, base, cells, tol)?;
        Ok(Self { h: h.clone(), exponent, outer, c0, base, tol: *tol })
    }

    pub fn base(&self) -> f64 {
        self.base
    }

    /// The denominator c₀ - ∫_base^r C·E ds.
    pub fn denominator(&self, r: f64) -> f64 {
        self.c0 - self.outer.eval(r)
    }

    /// p(r), or `ZeroDenominator` at a pole of the solution.
    pub fn pressure(&self, r: f64) -> Result<f64, CouplingError> {
        let den = self.denominator(r);
        if den.abs() <= self.tol.guard_band * (1.0 + self.c0.abs()) {
            return Err(CouplingError::ZeroDenominator { r });
        }
        let e = self.exponent.eval(r).exp();
        Ok(e / den + self.h.eval_raw(r) / 2.0)
    }

    /// Radii in the bracket where the denominator vanishes (poles of p).
    pub fn poles(&self, scan_points: usize) -> Vec<f64> {
        let (lo, hi) = self.exponent.bracket();
        let den = |r: f64| self.denominator(r);
        bracket_roots(&den, lo, hi, scan_points.max(16), self.tol.root_tol)
    }

    /// The pressure as a field on the solver bracket, with poles excluded.
    pub fn pressure_field(self: Arc<Self>, label: &str) -> ScalarField {
        let (lo, hi) = self.exponent.bracket();
        let poles = self.poles(512);
        let domain = Domain::open(lo, hi)
            .with_excluded(poles)
            .unwrap_or_else(|_| Domain::open(lo, hi));
        let solver = Arc::clone(&self);
        ScalarField::new(label, domain, move |r| solver.pressure(r).unwrap_or(f64::NAN))
    }
}

/// One-shot evaluation of the explicit pressure solution at `r`.
pub fn pressure_solution(
    mass: &MassModel,
    h: &ScalarField,
    c0: f64,
    r: f64,
    base: f64,
    tol: &Tolerances,
) -> Result<f64, CouplingError> {
    let lo = r.min(base);
    let hi = r.max(base);
    let pad = 1e-6 * (1.0 + hi.abs());
    let solver = PressureSolver::build(mass, h, c0, base, lo - pad, hi + pad, 512, tol)?;
    solver.pressure(r)
}

// ---------------------------------------------------------------------------
// Mass reconstruction through the linear part
// ---------------------------------------------------------------------------

/// A mass function reconstructed from (F, h) via the linear part:
/// M(r) = (h²/r)(c₂_eff - ∫_base^r F/h³ ds), with the closed-form derivative
/// M'(r) = (2hh'/r - h²/r²)(c₂_eff - G) - (h²/r)·F/h³.
///
/// The integrand F/h³ is supplied in closed form because it stays smooth
/// across the zeros of 1/h where ρ and M themselves blow up.
#[derive(Debug, Clone)]
pub struct ReconstructedMass {
    h: ScalarField,
    h_prime: ScalarField,
    integrand: ScalarField,
    c2_eff: f64,
    base: f64,
    tol: Tolerances,
    /// Optional frozen antiderivative table plus the base-to-table offset.
    cache: Option<Arc<(CumulativeIntegral, f64)>>,
}

impl ReconstructedMass {
    pub fn new(
        h: ScalarField,
        h_prime: ScalarField,
        integrand: ScalarField,
        c2_eff: f64,
        base: f64,
        tol: Tolerances,
    ) -> Self {
        Self { h, h_prime, integrand, c2_eff, base, tol, cache: None }
    }

    /// Tabulate the antiderivative over `[lo, hi]` so pointwise mass queries
    /// inside the bracket stop paying for quadrature. The integrand F/h³ is
    /// smooth across singular radii of ρ, so the bracket may span them; a base
    /// outside the bracket is bridged by one direct integral.
    pub fn with_cache(mut self, lo: f64, hi: f64, cells: usize) -> Result<Self, CouplingError> {
        let snap = self.base.clamp(lo, hi);
        let offset = integrate(&self.integrand, self.base, snap, &self.tol)?;
        let f = self.integrand.clone();
        let g = move |r: f64| f.eval_raw(r);
        let table = CumulativeIntegral::build(&g, lo, hi, snap, cells, &self.tol)?;
        self.cache = Some(Arc::new((table, offset)));
        Ok(self)
    }

    pub fn c2_eff(&self) -> f64 {
        self.c2_eff
    }

    pub fn base(&self) -> f64 {
        self.base
    }

    /// G(r) = ∫_base^r F/h³ ds.
    pub fn g(&self, r: f64) -> Result<f64, CouplingError> {
        if let Some(cache) = &self.cache {
            let (lo, hi) = cache.0.bracket();
            if r >= lo && r <= hi {
                return Ok(cache.1 + cache.0.eval(r));
            }
        }
        Ok(integrate(&self.integrand, self.base, r, &self.tol)?)
    }

    fn mass_parts(&self, r: f64, g: f64) -> Result<(f64, f64), CouplingError> {
        let h = self.h.eval(r, &self.tol)?;
        let hp = self.h_prime.eval(r, &self.tol)?;
        let k = self.c2_eff - g;
        let m = h * h / r * k;
        let mp = (2.0 * h * hp / r - h * h / (r * r)) * k - h * h / r * self.integrand.eval_raw(r);
        Ok((m, mp))
    }

    pub fn mass_at(&self, r: f64) -> Result<f64, CouplingError> {
        let g = self.g(r)?;
        Ok(self.mass_parts(r, g)?.0)
    }

    pub fn mass_prime_at(&self, r: f64) -> Result<f64, CouplingError> {
        let g = self.g(r)?;
        Ok(self.mass_parts(r, g)?.1)
    }

    /// `(M, M')` on an ascending grid, accumulating the antiderivative
    /// incrementally so the whole grid costs one pass of segment integrals.
    pub fn on_sorted_grid(&self, radii: &[f64]) -> Result<Vec<(f64, f64)>, CouplingError> {
        if radii.windows(2).any(|w| w[0] > w[1]) {
            return Err(CouplingError::Numerics(NumericsError::BadArgument(
                "grid must be ascending",
            )));
        }
        let mut out = Vec::with_capacity(radii.len());
        let mut prev = self.base;
        let mut acc = 0.0f64;
        for &r in radii {
            acc += integrate(&self.integrand, prev, r, &self.tol)?;
            prev = r;
            out.push(self.mass_parts(r, acc)?);
        }
        Ok(out)
    }

    /// View as a [`MassModel`] (closed-form derivative; errors become NaN).
    pub fn mass_model(self: &Arc<Self>) -> MassModel {
        let me = Arc::clone(self);
        let m = ScalarField::new("M[reconstructed]", self.h.domain().clone(), move |r| {
            me.mass_at(r).unwrap_or(f64::NAN)
        });
        let me = Arc::clone(self);
        let mp = ScalarField::new("M'[reconstructed]", self.h.domain().clone(), move |r| {
            me.mass_prime_at(r).unwrap_or(f64::NAN)
        });
        MassModel::new(m, mp)
    }
}
