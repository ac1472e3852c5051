//! Riccati-form TOV model: coefficient evaluation from a mass function and
//! residuals for the TOV, continuity, Riccati, and coefficient-relation
//! identities (all with G = c = 1).

use core::f64::consts::PI;
use core::fmt;

use crate::numerics::{derivative, NumericsError, ScalarField, Tolerances};

#[allow(unused_imports)]
use num_traits::Float;

/// Errors from coefficient evaluation and residual checks.
#[derive(Debug, Clone, PartialEq)]
pub enum TovError {
    /// `r` is within the guard band of the origin.
    OriginSingularity { r: f64 },
    /// `1 - 2M(r)/r` is within the guard band of zero.
    HorizonSingularity { r: f64 },
    /// `M·M'` or `rM' + M` is within the guard band of zero.
    DegenerateDenominator { r: f64 },
    Numerics(NumericsError),
}

impl fmt::Display for TovError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::OriginSingularity { r } => write!(f, "r = {r} is within guard band of the origin"),
            Self::HorizonSingularity { r } => {
                write!(f, "1 - 2M/r vanishes within guard band at r = {r}")
            }
            Self::DegenerateDenominator { r } => {
                write!(f, "degenerate coefficient-relation denominator at r = {r}")
            }
            Self::Numerics(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for TovError {}

impl From<NumericsError> for TovError {
    fn from(e: NumericsError) -> Self {
        Self::Numerics(e)
    }
}

/// A mass function together with its derivative field.
///
/// `m_prime` is a closed form when available; otherwise back it by finite
/// differences via [`MassModel::with_fd_derivative`].
#[derive(Debug, Clone)]
pub struct MassModel {
    pub m: ScalarField,
    pub m_prime: ScalarField,
}

impl MassModel {
    pub fn new(m: ScalarField, m_prime: ScalarField) -> Self {
        Self { m, m_prime }
    }

    /// Back `m_prime` by finite differences of `m`.
    pub fn with_fd_derivative(m: ScalarField, tol: Tolerances) -> Self {
        let inner = m.clone();
        let m_prime = ScalarField::new(
            alloc::format!("{}'", m.label()),
            m.domain().clone(),
            move |r| derivative(&inner, r, &tol).unwrap_or(f64::NAN),
        );
        Self { m, m_prime }
    }

    /// `(M(r), M'(r))` with guard checks.
    pub fn eval(&self, r: f64, tol: &Tolerances) -> Result<(f64, f64), TovError> {
        Ok((self.m.eval(r, tol)?, self.m_prime.eval(r, tol)?))
    }
}

/// The Riccati coefficients (A, B, C) of the TOV equation at one radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiccatiCoefficients {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

/// A pressure/density pair with its mass model.
#[derive(Debug, Clone)]
pub struct StellarSystem {
    pub pressure: ScalarField,
    pub density: ScalarField,
    pub mass: MassModel,
}

/// Evaluate the Riccati coefficients
/// A = -M M' / (4π r⁴ (1 - 2M/r)),
/// B = -(M'/r + M/r²) / (1 - 2M/r),
/// C = -4π r / (1 - 2M/r).
pub fn riccati_coefficients(
    mass: &MassModel,
    r: f64,
    tol: &Tolerances,
) -> Result<RiccatiCoefficients, TovError> {
    if r.abs() <= tol.guard_band {
        return Err(TovError::OriginSingularity { r });
    }
    let (m, mp) = mass.eval(r, tol)?;
    let u = 1.0 - 2.0 * m / r;
    if u.abs() <= tol.guard_band {
        return Err(TovError::HorizonSingularity { r });
    }
    let a = -m * mp / (4.0 * PI * r.powi(4) * u);
    let b = -(mp / r + m / (r * r)) / u;
    let c = -4.0 * PI * r / u;
    Ok(RiccatiCoefficients { a, b, c })
}

/// Residuals of the coefficient relation
/// 4π r⁴ A / (M M') = r² B / (r M' + M) = C / (4π r),
/// returned as `(t1 - t3, t2 - t3)`. The relation is an identity: both vanish
/// for every valid mass model.
pub fn coefficient_relation_residual(
    mass: &MassModel,
    r: f64,
    tol: &Tolerances,
) -> Result<(f64, f64), TovError> {
    let coeffs = riccati_coefficients(mass, r, tol)?;
    let (m, mp) = mass.eval(r, tol)?;
    let d1 = m * mp;
    let d2 = r * mp + m;
    if d1.abs() <= tol.guard_band || d2.abs() <= tol.guard_band {
        return Err(TovError::DegenerateDenominator { r });
    }
    let t1 = 4.0 * PI * r.powi(4) * coeffs.a / d1;
    let t2 = r * r * coeffs.b / d2;
    let t3 = coeffs.c / (4.0 * PI * r);
    Ok((t1 - t3, t2 - t3))
}

/// Raw residual of the TOV equation,
/// p'(r) + (ρ + p)(M + 4π r³ p) / (r² (1 - 2M/r)),
/// with p' by finite difference of the pressure field.
pub fn tov_residual(s: &StellarSystem, r: f64, tol: &Tolerances) -> Result<f64, TovError> {
    if r.abs() <= tol.guard_band {
        return Err(TovError::OriginSingularity { r });
    }
    let p = s.pressure.eval(r, tol)?;
    let rho = s.density.eval(r, tol)?;
    let (m, _) = s.mass.eval(r, tol)?;
    let u = 1.0 - 2.0 * m / r;
    if u.abs() <= tol.guard_band {
        return Err(TovError::HorizonSingularity { r });
    }
    let p_prime = derivative(&s.pressure, r, tol)?;
    Ok(p_prime + (rho + p) * (m + 4.0 * PI * r.powi(3) * p) / (r * r * u))
}

/// Raw residual of the continuity equation, M'(r) - 4π r² ρ(r).
pub fn continuity_residual(s: &StellarSystem, r: f64, tol: &Tolerances) -> Result<f64, TovError> {
    let mp = s.mass.m_prime.eval(r, tol)?;
    let rho = s.density.eval(r, tol)?;
    Ok(mp - 4.0 * PI * r * r * rho)
}

/// Raw residual of the Riccati form, p'(r) - (A + B p + C p²), with the
/// coefficients supplied per radius.
pub fn riccati_residual(
    pressure: &ScalarField,
    coeffs_at: impl Fn(f64) -> Result<RiccatiCoefficients, TovError>,
    r: f64,
    tol: &Tolerances,
) -> Result<f64, TovError> {
    let p = pressure.eval(r, tol)?;
    let k = coeffs_at(r)?;
    let p_prime = derivative(pressure, r, tol)?;
    Ok(p_prime - (k.a + k.b * p + k.c * p * p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Domain;
    use approx::assert_abs_diff_eq;

    fn tols() -> Tolerances {
        Tolerances::default()
    }

    fn vacuum_mass() -> MassModel {
        MassModel::new(
            ScalarField::new("M", Domain::unbounded(0.0), |_| 0.0),
            ScalarField::new("M'", Domain::unbounded(0.0), |_| 0.0),
        )
    }

    /// Constant-density mass M = 4π c r³ / 3 with closed derivative.
    fn constant_density_mass(c: f64) -> MassModel {
        MassModel::new(
            ScalarField::new("M", Domain::unbounded(0.0), move |r| 4.0 * PI * c * r.powi(3) / 3.0),
            ScalarField::new("M'", Domain::unbounded(0.0), move |r| 4.0 * PI * c * r * r),
        )
    }

    #[test]
    fn vacuum_coefficients() {
        let k = riccati_coefficients(&vacuum_mass(), 1.0, &tols()).unwrap();
        assert_eq!(k.a, 0.0);
        assert_eq!(k.b, 0.0);
        assert_abs_diff_eq!(k.c, -4.0 * PI, epsilon = 1e-15);
    }

    #[test]
    fn constant_density_coefficients_match_substitution() {
        // direct substitution oracle at c = 1/(100π), r = 1
        let c = 1.0 / (100.0 * PI);
        let mass = constant_density_mass(c);
        let k = riccati_coefficients(&mass, 1.0, &tols()).unwrap();
        let m = 4.0 * PI * c / 3.0;
        let mp = 4.0 * PI * c;
        let u = 1.0 - 2.0 * m;
        assert_abs_diff_eq!(k.a, -m * mp / (4.0 * PI * u), epsilon = 1e-15);
        assert_abs_diff_eq!(k.b, -(mp + m) / u, epsilon = 1e-15);
        assert_abs_diff_eq!(k.c, -4.0 * PI / u, epsilon = 1e-15);
    }

    #[test]
    fn coefficients_all_negative_for_physical_mass() {
        // sign convention: M > 0, M' > 0, 0 < 2M/r < 1 ⇒ A, B, C < 0
        let mass = constant_density_mass(1e-3);
        for &r in &[0.5, 1.0, 3.0] {
            let k = riccati_coefficients(&mass, r, &tols()).unwrap();
            assert!(k.a < 0.0 && k.b < 0.0 && k.c < 0.0);
        }
    }

    #[test]
    fn horizon_detected() {
        // M = r/2 exactly at the horizon locus
        let mass = MassModel::new(
            ScalarField::new("M", Domain::unbounded(0.0), |r| 0.5 * r),
            ScalarField::new("M'", Domain::unbounded(0.0), |_| 0.5),
        );
        match riccati_coefficients(&mass, 1.0, &tols()) {
            Err(TovError::HorizonSingularity { .. }) => {}
            other => panic!("expected HorizonSingularity, got {other:?}"),
        }
    }

    #[test]
    fn coefficient_relation_is_identity() {
        let mass = constant_density_mass(2.5e-3);
        for &r in &[0.3, 1.0, 2.0, 5.0] {
            let (e1, e2) = coefficient_relation_residual(&mass, r, &tols()).unwrap();
            assert_abs_diff_eq!(e1, 0.0, epsilon = 1e-12);
            assert_abs_diff_eq!(e2, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn degenerate_denominator_detected() {
        match coefficient_relation_residual(&vacuum_mass(), 1.0, &tols()) {
            Err(TovError::DegenerateDenominator { .. }) => {}
            other => panic!("expected DegenerateDenominator, got {other:?}"),
        }
    }

    #[test]
    fn vacuum_tov_residual_is_zero() {
        let s = StellarSystem {
            pressure: ScalarField::new("p", Domain::unbounded(0.0), |_| 0.0),
            density: ScalarField::new("rho", Domain::unbounded(0.0), |_| 0.0),
            mass: vacuum_mass(),
        };
        assert_abs_diff_eq!(tov_residual(&s, 1.0, &tols()).unwrap(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn constant_density_interior_solution_satisfies_tov() {
        // closed-form interior oracle: p = c (y - y_R) / (3 y_R - y),
        // y = sqrt(1 - 8π c r²/3)
        let c = 1e-3;
        let big_r = 1.0;
        let y = move |r: f64| (1.0 - 8.0 * PI * c * r * r / 3.0).sqrt();
        let y_r = y(big_r);
        let s = StellarSystem {
            pressure: ScalarField::new("p", Domain::open(0.0, big_r), move |r| {
                c * (y(r) - y_r) / (3.0 * y_r - y(r))
            }),
            density: ScalarField::new("rho", Domain::unbounded(0.0), move |_| c),
            mass: constant_density_mass(c),
        };
        let res = tov_residual(&s, big_r / 2.0, &tols()).unwrap();
        assert!(res.abs() < 1e-7, "residual {res}");
    }

    #[test]
    fn continuity_exact_for_constant_density() {
        let c = 3.0;
        let s = StellarSystem {
            pressure: ScalarField::new("p", Domain::unbounded(0.0), |_| 0.0),
            density: ScalarField::new("rho", Domain::unbounded(0.0), move |_| c),
            mass: constant_density_mass(c),
        };
        for &r in &[0.5, 1.0, 7.0] {
            // zero up to multiply-ordering noise between M' and 4πr²ρ
            let res = continuity_residual(&s, r, &tols()).unwrap();
            assert_abs_diff_eq!(res, 0.0, epsilon = 1e-11 * (1.0 + r * r));
        }
    }

    #[test]
    fn continuity_linear_in_density_perturbation() {
        let c = 3.0;
        let s = StellarSystem {
            pressure: ScalarField::new("p", Domain::unbounded(0.0), |_| 0.0),
            density: ScalarField::new("rho", Domain::unbounded(0.0), move |_| c + 1.0),
            mass: constant_density_mass(c),
        };
        let r = 2.0;
        assert_abs_diff_eq!(
            continuity_residual(&s, r, &tols()).unwrap(),
            -4.0 * PI * r * r,
            epsilon = 1e-9
        );
    }

    #[test]
    fn riccati_residual_trivial_cases() {
        let p = ScalarField::new("p", Domain::real_line(), |_| 5.0);
        let zero = |_r: f64| Ok(RiccatiCoefficients { a: 0.0, b: 0.0, c: 0.0 });
        assert_abs_diff_eq!(
            riccati_residual(&p, zero, 1.0, &tols()).unwrap(),
            0.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn riccati_residual_matches_tov_residual_under_continuity() {
        // with continuity in force the Riccati form is the TOV equation
        let c = 1e-3;
        let big_r = 1.0;
        let y = move |r: f64| (1.0 - 8.0 * PI * c * r * r / 3.0).sqrt();
        let y_r = y(big_r);
        let pressure = ScalarField::new("p", Domain::open(0.0, big_r), move |r| {
            c * (y(r) - y_r) / (3.0 * y_r - y(r))
        });
        let mass = constant_density_mass(c);
        let tol = tols();
        let s = StellarSystem {
            pressure: pressure.clone(),
            density: ScalarField::new("rho", Domain::unbounded(0.0), move |_| c),
            mass: mass.clone(),
        };
        for &r in &[0.3, 0.5, 0.8] {
            let t = tov_residual(&s, r, &tol).unwrap();
            let q = riccati_residual(
                &pressure,
                |x| riccati_coefficients(&mass, x, &tol),
                r,
                &tol,
            )
            .unwrap();
            assert!((t - q).abs() < 2.0 * tol.residual_tol, "t = {t}, q = {q}");
        }
    }
}
