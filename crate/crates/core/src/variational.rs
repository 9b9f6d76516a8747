//! Critical magnetic number and critical frequencies.
//!
//! Each extremal quotient is rank-one in its interface term, so the extreme
//! eigenvalue of the discrete pencil is the root of a scalar secular equation
//! `g [rho] e^T (A + t B)^{-1} e = 1`, decreasing in `t`. Roots are located by
//! bisection with one factorization per step.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::forms::{
    assemble_h1_forms, assemble_hermite_mass, assemble_slope_and_curvature, HermiteSpace,
    LinearSpace, Tridiagonal,
};
use crate::params::{FluidParams, MagneticConfig};
use crate::roots::{bisect, expand_upward};

const ROOT_TOL: f64 = 1e-15;
const MAX_BISECTIONS: usize = 400;
const EXPANSION_CAP: f64 = 1e300;

/// `|B|_c`, `|xi|_vc` and `|xi|_hc` for one field strength.
#[derive(Debug, Clone, PartialEq)]
pub struct CriticalValues {
    pub b_critical: f64,
    /// `None` stands for `+infinity` (field at or above critical).
    pub xi_vc: Option<f64>,
    /// `None` stands for `0` (field at or above critical).
    pub xi_hc: Option<f64>,
    /// Piecewise-linear extremizer of the critical-number quotient, `psi(0) = 1`.
    pub extremizer: Option<DVector<f64>>,
}

fn interface_vector(n: usize, k: usize) -> DVector<f64> {
    let mut e = DVector::zeros(n);
    e[k] = 1.0;
    e
}

fn dense_interface_response(a: &DMatrix<f64>, k: usize) -> Option<f64> {
    let chol = a.clone().cholesky()?;
    let x = chol.solve(&interface_vector(a.nrows(), k));
    Some(x[k])
}

fn tridiagonal_interface_response(a: &Tridiagonal, k: usize) -> Option<f64> {
    Some(a.solve_spd(&interface_vector(a.len(), k))?[k])
}

/// Root `t > 0` of `response(t) = 1` for a positive decreasing `response`.
fn secular_root<F>(mut response: F) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    let hi = expand_upward(1.0, EXPANSION_CAP, |t| response(t) <= 1.0)
        .ok_or(Error::ConvergenceFailure { iterations: 0 })?;
    let bracket = bisect(0.0, hi, ROOT_TOL, MAX_BISECTIONS, |t| response(t) <= 1.0)?;
    Ok(bracket.mid())
}

/// `|B|_c = sqrt(sup g [rho] psi(0)^2 / int psi'^2)` over the piecewise-linear space.
///
/// The supremum is `g [rho] e^T K^{-1} e` for the stiffness `K` and the unit
/// vector `e` at the interface node.
pub fn critical_magnetic_number(params: &FluidParams, space: &LinearSpace) -> Result<f64> {
    Ok(critical_magnetic_number_with_extremizer(params, space)?.0)
}

/// `|B|_c` together with the extremizer normalized to `psi(0) = 1`.
pub fn critical_magnetic_number_with_extremizer(
    params: &FluidParams,
    space: &LinearSpace,
) -> Result<(f64, DVector<f64>)> {
    params.require_unstable_stratification()?;
    let forms = assemble_h1_forms(space);
    let k = forms.interface_dof;
    let x = forms
        .stiffness
        .solve_spd(&forms.interface_vector())
        .ok_or(Error::MassMatrix)?;
    let b2 = params.buoyancy() * x[k];
    let extremizer = &x / x[k];
    Ok((b2.sqrt(), extremizer))
}

/// `|B|_c` restricted to the Hermite space (the threshold seen by the
/// fourth-order forms on that mesh); never exceeds the continuous value.
pub fn critical_magnetic_number_hermite(params: &FluidParams, space: &HermiteSpace) -> Result<f64> {
    params.require_unstable_stratification()?;
    let (slope, _) = assemble_slope_and_curvature(space);
    let r = dense_interface_response(&slope, space.interface_dof()).ok_or(Error::MassMatrix)?;
    Ok((params.buoyancy() * r).sqrt())
}

fn check_field(params: &FluidParams, mag: &MagneticConfig, critical: f64) -> Result<()> {
    params.require_unstable_stratification()?;
    if mag.magnitude >= critical {
        return Err(Error::SupercriticalField {
            field: mag.magnitude,
            critical,
        });
    }
    Ok(())
}

/// `|xi|_vc`: square root of
/// `inf |B|^2 int psi''^2 / (g [rho] psi(0)^2 - |B|^2 int psi'^2)` over the
/// Hermite space, restricted to directions with a positive denominator.
///
/// The denominator form is a rank-one positive update of a negative definite
/// form, so it has at most one positive direction against `|B|^2 int psi''^2`;
/// the infimum is the reciprocal of that single positive eigenvalue.
pub fn critical_freq_vertical(
    params: &FluidParams,
    mag: &MagneticConfig,
    space: &HermiteSpace,
) -> Result<f64> {
    let critical = critical_magnetic_number_hermite(params, space)?;
    check_field(params, mag, critical)?;
    if mag.magnitude == 0.0 {
        return Ok(0.0);
    }
    let (slope, curvature) = assemble_slope_and_curvature(space);
    let b2 = mag.b2();
    let gr = params.buoyancy();
    let k = space.interface_dof();
    let mu = secular_root(|mu| {
        let a = (&slope + &curvature * mu) * b2;
        dense_interface_response(&a, k).map_or(0.0, |r| gr * r)
    })?;
    Ok(1.0 / mu.sqrt())
}

/// `|xi|_hc`: square root of
/// `sup (g [rho] psi(0)^2 - |B|^2 int psi'^2) / (|B|^2 int psi^2)` over the
/// piecewise-linear space.
pub fn critical_freq_horizontal(
    params: &FluidParams,
    mag: &MagneticConfig,
    space: &LinearSpace,
) -> Result<f64> {
    let critical = critical_magnetic_number(params, space)?;
    check_field(params, mag, critical)?;
    if mag.magnitude == 0.0 {
        return Ok(f64::INFINITY);
    }
    let forms = assemble_h1_forms(space);
    let b2 = mag.b2();
    let gr = params.buoyancy();
    let k = forms.interface_dof;
    let lambda = secular_root(|t| {
        let a = forms.stiffness.add_scaled(t, &forms.mass).scaled(b2);
        tridiagonal_interface_response(&a, k).map_or(0.0, |r| gr * r)
    })?;
    Ok(lambda.sqrt())
}

/// The horizontal critical frequency restricted to the Hermite space: the
/// exact onset seen by the fourth-order forms on that mesh.
pub fn critical_freq_horizontal_hermite(
    params: &FluidParams,
    mag: &MagneticConfig,
    space: &HermiteSpace,
) -> Result<f64> {
    let critical = critical_magnetic_number_hermite(params, space)?;
    check_field(params, mag, critical)?;
    if mag.magnitude == 0.0 {
        return Ok(f64::INFINITY);
    }
    let (slope, _) = assemble_slope_and_curvature(space);
    let mass = assemble_hermite_mass(space);
    let b2 = mag.b2();
    let gr = params.buoyancy();
    let k = space.interface_dof();
    let lambda = secular_root(|t| {
        let a = (&slope + &mass * t) * b2;
        dense_interface_response(&a, k).map_or(0.0, |r| gr * r)
    })?;
    Ok(lambda.sqrt())
}

/// `xi coth(xi)`, continuous at 0.
pub fn xi_coth(xi: f64) -> f64 {
    if xi.abs() < 1e-8 {
        1.0 + xi * xi / 3.0
    } else {
        xi / xi.tanh()
    }
}

/// Root `xi > 0` of `2 |B|^2 xi coth(xi) = g [rho]`, by bisection.
///
/// Independent of any discretization; the sinh-profile extremizer of the
/// horizontal quotient satisfies exactly this interface balance.
pub fn xi_hc_oracle(params: &FluidParams, mag: &MagneticConfig) -> Result<f64> {
    params.require_unstable_stratification()?;
    let gr = params.buoyancy();
    let critical = (gr / 2.0).sqrt();
    if mag.magnitude >= critical {
        return Err(Error::SupercriticalField {
            field: mag.magnitude,
            critical,
        });
    }
    if mag.magnitude == 0.0 {
        return Ok(f64::INFINITY);
    }
    let target = gr / (2.0 * mag.b2());
    // xi coth xi > xi, so the root lies below `target`
    let b = bisect(0.0, target, ROOT_TOL, MAX_BISECTIONS, |x| {
        xi_coth(x) >= target
    })?;
    Ok(b.mid())
}

/// Root `xi > 0` of `2 tanh(xi/2) / xi = 1 - |B|^2 / |B|_c^2`, by bisection.
///
/// The even extremizer of the vertical quotient solves `psi'''' = xi^2 psi''`
/// with clamped walls; its interface balance reduces to this scalar equation.
pub fn xi_vc_oracle(params: &FluidParams, mag: &MagneticConfig) -> Result<f64> {
    params.require_unstable_stratification()?;
    let critical2 = params.buoyancy() / 2.0;
    if mag.b2() >= critical2 {
        return Err(Error::SupercriticalField {
            field: mag.magnitude,
            critical: critical2.sqrt(),
        });
    }
    if mag.magnitude == 0.0 {
        return Ok(0.0);
    }
    let target = 1.0 - mag.b2() / critical2;
    let f = |x: f64| 2.0 * (0.5 * x).tanh() / x;
    // f falls from 1 to 0 and never exceeds 2 / x
    let hi = (2.0 / target).max(1.0);
    Ok(bisect(0.0, hi, ROOT_TOL, MAX_BISECTIONS, |x| f(x) <= target)?.mid())
}

/// All three critical quantities for `mag`'s strength, on the given spaces.
pub fn critical_values(
    params: &FluidParams,
    mag: &MagneticConfig,
    linear: &LinearSpace,
    hermite: &HermiteSpace,
) -> Result<CriticalValues> {
    let (b_critical, extremizer) = critical_magnetic_number_with_extremizer(params, linear)?;
    let vertical = mag.with_magnitude(mag.magnitude);
    let xi_vc = match critical_freq_vertical(params, &vertical, hermite) {
        Ok(v) => Some(v),
        Err(Error::SupercriticalField { .. }) => None,
        Err(e) => return Err(e),
    };
    let xi_hc = match critical_freq_horizontal(params, mag, linear) {
        Ok(v) => Some(v),
        Err(Error::SupercriticalField { .. }) => None,
        Err(e) => return Err(e),
    };
    Ok(CriticalValues {
        b_critical,
        xi_vc,
        xi_hc,
        extremizer: Some(extremizer),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigen::largest_eigenpair;
    use crate::mesh::build_mesh;

    fn unit_jump() -> FluidParams {
        FluidParams::new(2.0, 1.0, 0.1, 0.1, 1.0).unwrap()
    }

    fn linear(n: usize, grading: f64) -> LinearSpace {
        LinearSpace::new(build_mesh(n, grading).unwrap())
    }

    fn hermite(n: usize) -> HermiteSpace {
        HermiteSpace::new(build_mesh(n, 0.0).unwrap())
    }

    #[test]
    fn tent_critical_number() {
        let bc = critical_magnetic_number(&unit_jump(), &linear(16, 0.0)).unwrap();
        assert!((bc - 0.5f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn critical_number_scales_with_gravity() {
        let p = unit_jump();
        let q = FluidParams { g: 4.0, ..p };
        let s = linear(8, 0.3);
        let a = critical_magnetic_number(&p, &s).unwrap();
        let b = critical_magnetic_number(&q, &s).unwrap();
        assert!((b * b - 4.0 * a * a).abs() < 1e-13);
    }

    #[test]
    fn equal_densities_are_stable() {
        let p = FluidParams::new(1.0, 1.0, 0.0, 0.0, 1.0).unwrap();
        assert!(matches!(
            critical_magnetic_number(&p, &linear(8, 0.0)),
            Err(Error::StableConfiguration { .. })
        ));
    }

    #[test]
    fn extremizer_is_tent() {
        let s = linear(8, 0.0);
        let (_, ext) = critical_magnetic_number_with_extremizer(&unit_jump(), &s).unwrap();
        let tent = s.interpolate(|x| 1.0 - x.abs());
        assert!((ext - tent).amax() < 1e-14);
    }

    #[test]
    fn hermite_critical_number_below_continuous() {
        let p = unit_jump();
        let coarse = critical_magnetic_number_hermite(&p, &hermite(4)).unwrap();
        let fine = critical_magnetic_number_hermite(&p, &hermite(16)).unwrap();
        let exact = 0.5f64.sqrt();
        assert!(coarse < fine && fine < exact);
    }

    #[test]
    fn vertical_secular_matches_dense_pencil() {
        let p = unit_jump();
        let mag = MagneticConfig::vertical(0.5).unwrap();
        let space = hermite(6);
        let xi = critical_freq_vertical(&p, &mag, &space).unwrap();
        // largest eigenvalue of the denominator form against the numerator form
        let (slope, curvature) = assemble_slope_and_curvature(&space);
        let mut denom = &slope * (-mag.b2());
        let k = space.interface_dof();
        denom[(k, k)] += p.buoyancy();
        let (mu, _) = largest_eigenpair(&denom, &(&curvature * mag.b2())).unwrap();
        assert!((xi - 1.0 / mu.sqrt()).abs() < 1e-10 * xi);
    }

    #[test]
    fn horizontal_secular_matches_dense_pencil() {
        let p = unit_jump();
        let mag = MagneticConfig::horizontal(0.5).unwrap();
        let space = linear(10, 0.4);
        let xi = critical_freq_horizontal(&p, &mag, &space).unwrap();
        let f = assemble_h1_forms(&space);
        let mut num = f.stiffness.to_dense() * (-mag.b2());
        num[(f.interface_dof, f.interface_dof)] += p.buoyancy();
        let (lam, _) = largest_eigenpair(&num, &(f.mass.to_dense() * mag.b2())).unwrap();
        assert!((xi - lam.sqrt()).abs() < 1e-10 * xi);
    }

    #[test]
    fn supercritical_is_an_error() {
        let p = unit_jump();
        assert!(matches!(
            critical_freq_vertical(&p, &MagneticConfig::vertical(0.8).unwrap(), &hermite(8)),
            Err(Error::SupercriticalField { .. })
        ));
        assert!(matches!(
            critical_freq_horizontal(
                &p,
                &MagneticConfig::horizontal(0.8).unwrap(),
                &linear(8, 0.0)
            ),
            Err(Error::SupercriticalField { .. })
        ));
        assert!(matches!(
            xi_hc_oracle(&p, &MagneticConfig::horizontal(0.5f64.sqrt()).unwrap()),
            Err(Error::SupercriticalField { .. })
        ));
    }

    #[test]
    fn oracle_half_field() {
        let x = xi_hc_oracle(&unit_jump(), &MagneticConfig::horizontal(0.5).unwrap()).unwrap();
        assert!((xi_coth(x) - 2.0).abs() < 1e-13);
        assert!((x - 1.915).abs() < 1e-3);
    }

    #[test]
    fn oracle_weak_field_asymptotics() {
        let x = xi_hc_oracle(&unit_jump(), &MagneticConfig::horizontal(0.1).unwrap()).unwrap();
        // coth(50) - 1 is below 1e-40, so the root is 50 to round-off
        assert!((x - 50.0).abs() < 1e-12);
    }

    #[test]
    fn critical_values_bundle() {
        let p = unit_jump();
        let lin = linear(32, 0.5);
        let her = hermite(16);
        let sub = critical_values(&p, &MagneticConfig::vertical(0.4).unwrap(), &lin, &her).unwrap();
        assert!(sub.xi_vc.is_some() && sub.xi_hc.is_some());
        let sup = critical_values(&p, &MagneticConfig::vertical(0.9).unwrap(), &lin, &her).unwrap();
        assert_eq!((sup.xi_vc, sup.xi_hc), (None, None));
        assert!(sup.b_critical > 0.0);
    }
}
