//! Growth rates from the fixed point `s = sqrt(-alpha(s))`, dispersion sweeps,
//! the inviscid baseline and normal-mode reconstruction.

use nalgebra::DVector;

use crate::eigen::{ModalProblem, ModifiedEigenResult};
use crate::error::{Error, Result};
use crate::forms::{assemble_h1_weighted, HermiteSpace, LinearSpace, GAUSS_POINTS, GAUSS_WEIGHTS};
use crate::par::{self, Execution};
use crate::params::{FluidParams, Frequency, MagneticConfig, Orientation, Side};
use crate::roots::{bisect, expand_upward};

/// `alpha(0)` above `-STABILITY_FLOOR * alpha_scale` counts as stable.
pub const STABILITY_FLOOR: f64 = 1e-12;
/// Bisection cap for both `s*` and the fixed point.
pub const MAX_ITERATIONS: usize = 200;
/// `s*` is searched up to this multiple of the inviscid rate.
pub const WINDOW_CAP: f64 = 1e6;
const S_STAR_TOL: f64 = 1e-13;
const FIXED_POINT_TOL: f64 = 1e-15;
const POLISH_STEPS: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Stable,
    Unstable,
}

impl Status {
    pub fn name(self) -> &'static str {
        match self {
            Status::Stable => "stable",
            Status::Unstable => "unstable",
        }
    }
}

/// Growth-rate computation at one frequency.
#[derive(Debug, Clone)]
pub struct GrowthResult {
    pub xi: Frequency,
    pub status: Status,
    /// Growth rate; `Some` iff unstable.
    pub lambda: Option<f64>,
    /// Right end of the window `{s : alpha(s) < 0} = (0, s*)`; infinite for
    /// inviscid fluids, `None` when stable.
    pub s_star: Option<f64>,
    /// `alpha(0)`, the sign of which decides stability.
    pub alpha0: f64,
    /// `J`-normalized profile at the fixed point (unstable only).
    pub psi: Option<DVector<f64>>,
    /// `|Phi(lambda) - 1|` with `Phi(s) = s / sqrt(-alpha(s))`.
    pub phi_defect: Option<f64>,
    /// `||(lambda^2 J + lambda E1 + |xi|^2 E0) psi||` in the `J^{-1}` norm.
    pub pencil_residual: Option<f64>,
    /// Fixed-point bisection steps.
    pub iterations: usize,
}

impl GrowthResult {
    fn stable(xi: Frequency, alpha0: f64) -> Self {
        Self {
            xi,
            status: Status::Stable,
            lambda: None,
            s_star: None,
            alpha0,
            psi: None,
            phi_defect: None,
            pencil_residual: None,
            iterations: 0,
        }
    }

    pub fn is_unstable(&self) -> bool {
        self.status == Status::Unstable
    }

    /// `psi(0)` of the fixed-point profile.
    pub fn psi0(&self, space: &HermiteSpace) -> Option<f64> {
        self.psi.as_ref().map(|p| p[space.interface_dof()])
    }
}

/// Inviscid, field-free growth rate `sqrt(g [rho] |xi| tanh|xi| / (rho+ + rho-))`.
pub fn euler_lambda(params: &FluidParams, xi: &Frequency) -> Result<f64> {
    params.require_unstable_stratification()?;
    xi.require_nonzero()?;
    let k = xi.magnitude();
    Ok((params.buoyancy() * k * k.tanh() / (params.rho_plus + params.rho_minus)).sqrt())
}

/// Inviscid rate from the piecewise-linear Rayleigh quotient
/// `sup g [rho] |xi|^2 psi(0)^2 / int rho (|xi|^2 psi^2 + psi'^2)`.
pub fn euler_lambda_discrete(
    params: &FluidParams,
    xi: &Frequency,
    space: &LinearSpace,
) -> Result<f64> {
    params.require_unstable_stratification()?;
    xi.require_nonzero()?;
    let k2 = xi.magnitude_sq();
    let a = assemble_h1_weighted(space, |side| (params.rho(side) * k2, params.rho(side)));
    let mut e = DVector::zeros(space.dof_count());
    let k = space.interface_dof();
    e[k] = 1.0;
    let x = a.solve_spd(&e).ok_or(Error::MassMatrix)?;
    Ok((params.buoyancy() * k2 * x[k]).sqrt())
}

/// Magnitude scale for `alpha`: the squared inviscid rate, which bounds
/// `-alpha(s)` from above for every field and viscosity.
pub fn alpha_scale(params: &FluidParams, xi: &Frequency) -> f64 {
    let k = xi.magnitude();
    let jump = params.density_jump().abs().max(f64::MIN_POSITIVE);
    params.g * jump * k * k.tanh() / (params.rho_plus + params.rho_minus)
}

/// Upper bound `2 sqrt(g [rho]) / (|B| rho+^{1/4})` on vertical-field growth rates.
pub fn growth_bound(params: &FluidParams, mag: &MagneticConfig) -> Result<f64> {
    params.require_unstable_stratification()?;
    if mag.magnitude == 0.0 {
        return Err(Error::UnboundedRate);
    }
    Ok(2.0 * params.buoyancy().sqrt() / (mag.magnitude * params.rho_plus.powf(0.25)))
}

fn is_unstable(alpha0: f64, scale: f64) -> bool {
    alpha0 < -STABILITY_FLOOR * scale
}

/// `s*` for an assembled problem; `Ok(None)` if `alpha(0) >= 0`.
fn s_star_of(problem: &ModalProblem, params: &FluidParams, xi: &Frequency) -> Result<Option<f64>> {
    let scale = alpha_scale(params, xi);
    if !is_unstable(problem.alpha(0.0), scale) {
        return Ok(None);
    }
    let rate = scale.sqrt();
    let cap = WINDOW_CAP * rate;
    let hi = expand_upward(rate, cap, |s| problem.alpha(s) >= 0.0)
        .ok_or(Error::UnboundedWindow { s: cap })?;
    let b = bisect(0.0, hi, S_STAR_TOL, MAX_ITERATIONS, |s| {
        problem.alpha(s) >= 0.0
    })?;
    Ok(Some(b.hi))
}

/// Right end `s*` of the instability window, located by bisection on the
/// increasing function `alpha(s)`; `None` when `alpha(0) >= 0`.
pub fn find_s_star(
    params: &FluidParams,
    mag: &MagneticConfig,
    xi: &Frequency,
    space: &HermiteSpace,
) -> Result<Option<f64>> {
    params.require_unstable_stratification()?;
    let problem = ModalProblem::new(space, params, mag, xi)?;
    s_star_of(&problem, params, xi)
}

/// `Phi(s) = s / sqrt(-alpha(s))`, infinite where `alpha(s) >= 0`.
pub fn phi(problem: &ModalProblem, s: f64) -> f64 {
    let a = problem.alpha(s);
    if a < 0.0 {
        s / (-a).sqrt()
    } else {
        f64::INFINITY
    }
}

/// Newton steps on `s^2 + alpha(s) = 0` from a bisection estimate, using the
/// Rayleigh-quotient `alpha` and its slope `E1/J`.
///
/// The eigenvalue-only `alpha` used while bisecting carries absolute noise of
/// order `eps * ||E||`, which near the onset is comparable to `lambda^2`; the
/// quotient is accurate relative to the forms themselves. A step is kept
/// only if it reduces the defect.
fn polish(problem: &ModalProblem, start: f64) -> Result<(f64, ModifiedEigenResult)> {
    let mut s = start;
    let mut eig = problem.solve(s)?;
    let mut defect = s * s + eig.alpha;
    for _ in 0..POLISH_STEPS {
        let next = s - defect / (2.0 * s + eig.slope);
        if !(next > 0.0 && next.is_finite()) || next == s {
            break;
        }
        let trial = problem.solve(next)?;
        let trial_defect = next * next + trial.alpha;
        if trial_defect.abs() >= defect.abs() {
            break;
        }
        (s, eig, defect) = (next, trial, trial_defect);
    }
    Ok((s, eig))
}

/// Growth computation on an already assembled problem.
pub fn growth_from_problem(
    problem: &ModalProblem,
    params: &FluidParams,
    xi: &Frequency,
) -> Result<GrowthResult> {
    let scale = alpha_scale(params, xi);
    let alpha0 = problem.alpha(0.0);
    if !is_unstable(alpha0, scale) {
        return Ok(GrowthResult::stable(*xi, alpha0));
    }
    let s_star = match s_star_of(problem, params, xi) {
        Ok(s) => s,
        Err(Error::UnboundedWindow { .. }) => Some(f64::INFINITY),
        Err(e) => return Err(e),
    };
    // Phi(s) >= 1 exactly when s^2 + alpha(s) >= 0; alpha >= -scale, so the
    // fixed point lies below sqrt(scale).
    let above = |s: f64| s * s + problem.alpha(s) >= 0.0;
    let hi_start = scale.sqrt() * (1.0 + 1e-9);
    let hi_limit = s_star
        .unwrap_or(f64::INFINITY)
        .min(WINDOW_CAP * scale.sqrt());
    let hi = expand_upward(hi_start, hi_limit.max(hi_start), above)
        .ok_or(Error::UnboundedWindow { s: hi_limit })?;
    let b = bisect(0.0, hi, FIXED_POINT_TOL, MAX_ITERATIONS, above)?;
    let (lambda, eig) = polish(problem, b.mid())?;
    let phi_defect = if eig.alpha < 0.0 {
        (lambda / (-eig.alpha).sqrt() - 1.0).abs()
    } else {
        f64::INFINITY
    };
    let pencil_residual = problem.pencil_residual(lambda, &eig.psi);
    Ok(GrowthResult {
        xi: *xi,
        status: Status::Unstable,
        lambda: Some(lambda),
        s_star,
        alpha0,
        psi: Some(eig.psi),
        phi_defect: Some(phi_defect),
        pencil_residual: Some(pencil_residual),
        iterations: b.iterations,
    })
}

/// Growth rate at `xi`: the unique `s` in `(0, s*)` with `Phi(s) = 1`.
pub fn solve_growth_rate(
    params: &FluidParams,
    mag: &MagneticConfig,
    xi: &Frequency,
    space: &HermiteSpace,
) -> Result<GrowthResult> {
    params.require_unstable_stratification()?;
    let problem = ModalProblem::new(space, params, mag, xi)?;
    growth_from_problem(&problem, params, xi)
}

/// One grid point of a sweep.
#[derive(Debug, Clone)]
pub struct DispersionSample {
    pub xi: Frequency,
    pub outcome: std::result::Result<GrowthResult, Error>,
}

impl DispersionSample {
    pub fn result(&self) -> Option<&GrowthResult> {
        self.outcome.as_ref().ok()
    }

    pub fn lambda(&self) -> Option<f64> {
        self.result().and_then(|r| r.lambda)
    }
}

/// Growth rates over a frequency grid.
#[derive(Debug, Clone)]
pub struct DispersionCurve {
    pub samples: Vec<DispersionSample>,
    pub orientation: Orientation,
    pub params: FluidParams,
    pub mag: MagneticConfig,
}

impl DispersionCurve {
    /// Empirical fastest growth rate over the grid and its sample index.
    pub fn lambda_max(&self) -> Option<(usize, f64)> {
        self.samples
            .iter()
            .enumerate()
            .filter_map(|(i, s)| s.lambda().map(|l| (i, l)))
            .fold(None, |best, (i, l)| match best {
                Some((_, b)) if b >= l => best,
                _ => Some((i, l)),
            })
    }

    pub fn unstable(&self) -> impl Iterator<Item = &GrowthResult> {
        self.samples
            .iter()
            .filter_map(|s| s.result())
            .filter(|r| r.is_unstable())
    }

    pub fn failures(&self) -> usize {
        self.samples.iter().filter(|s| s.outcome.is_err()).count()
    }
}

/// Sweeps `grid` with the default (parallel when available) execution.
pub fn dispersion_sweep(
    params: &FluidParams,
    mag: &MagneticConfig,
    grid: &[Frequency],
    space: &HermiteSpace,
) -> Result<DispersionCurve> {
    dispersion_sweep_with(Execution::default(), params, mag, grid, space)
}

/// Sweeps `grid`; per-sample failures are kept and do not stop the sweep.
/// Output order follows the grid regardless of `exec`.
pub fn dispersion_sweep_with(
    exec: Execution,
    params: &FluidParams,
    mag: &MagneticConfig,
    grid: &[Frequency],
    space: &HermiteSpace,
) -> Result<DispersionCurve> {
    params.require_unstable_stratification()?;
    if grid.is_empty() {
        return Err(Error::InvalidParams("empty frequency grid".into()));
    }
    if let Some(bad) = grid.iter().find(|xi| xi.require_nonzero().is_err()) {
        return Err(Error::InvalidParams(format!(
            "grid frequency ({}, {}) has zero magnitude",
            bad.xi1, bad.xi2
        )));
    }
    let samples = par::map(exec, grid, |xi| DispersionSample {
        xi: *xi,
        outcome: solve_growth_rate(params, mag, xi, space),
    });
    Ok(DispersionCurve {
        samples,
        orientation: mag.orientation,
        params: *params,
        mag: *mag,
    })
}

/// Components `(phi, theta, psi, pi)` of a growing normal mode, sampled at the
/// Gauss points of every element, with consistency diagnostics.
#[derive(Debug, Clone)]
pub struct ModeShape {
    pub lambda: f64,
    pub xi: Frequency,
    pub x: Vec<f64>,
    pub psi: Vec<f64>,
    pub dpsi: Vec<f64>,
    pub phi: Vec<f64>,
    pub theta: Vec<f64>,
    pub pi: Vec<f64>,
    /// `max |xi1 phi + xi2 theta + psi'|` over the samples.
    pub divergence: f64,
    /// Horizontal momentum defect, projected on `xi`, relative to its largest term.
    pub momentum_residual: f64,
    /// Tangential-stress jump at `x = 0`, relative to its largest term.
    pub tangential_jump: f64,
    /// Normal-stress jump at `x = 0` (zero by construction of `pi`).
    pub normal_jump: f64,
}

/// `int_{x_e}^{x_e + t h} psi` on element `e`.
fn partial_integral(space: &HermiteSpace, c: &DVector<f64>, e: usize, t: f64) -> f64 {
    let h = space.mesh().element_len(e);
    let dofs = space.element_dofs(e);
    let (t2, t3, t4) = (t * t, t * t * t, t * t * t * t);
    let basis = [
        t - t3 + 0.5 * t4,
        h * (0.5 * t2 - 2.0 * t3 / 3.0 + 0.25 * t4),
        t3 - 0.5 * t4,
        h * (-t3 / 3.0 + 0.25 * t4),
    ];
    h * dofs
        .iter()
        .zip(basis.iter())
        .map(|(d, b)| d.map_or(0.0, |k| c[k]) * b)
        .sum::<f64>()
}

/// Rebuilds `phi`, `theta` from the divergence constraint and `pi` from the
/// vertical momentum equation.
///
/// On each side `pi` is integrated from the wall. The constant on the upper
/// side matches the side average of the pressure implied by the horizontal
/// momentum equations; the lower constant then follows from the normal-stress
/// jump `[[-2 mu lambda psi' + lambda pi - |B|^2 psi']] = g [rho] psi(0)`.
pub fn reconstruct_mode(
    result: &GrowthResult,
    params: &FluidParams,
    mag: &MagneticConfig,
    space: &HermiteSpace,
) -> Result<ModeShape> {
    let (Some(lambda), Some(c)) = (result.lambda, result.psi.as_ref()) else {
        return Err(Error::NoMode);
    };
    let xi = result.xi;
    let k2 = xi.magnitude_sq();
    let b2 = mag.b2();
    let mesh = space.mesh();
    let i0 = mesh.interface_index();
    let vertical = mag.orientation == Orientation::Vertical;
    // pi' = -a psi + b psi'' per side
    let coeffs = |side: Side| {
        let mu = params.mu(side);
        let rho = params.rho(side);
        if vertical {
            (lambda * rho + mu * k2, mu + b2 / lambda)
        } else {
            (lambda * rho + mu * k2 + b2 * xi.xi1 * xi.xi1 / lambda, mu)
        }
    };
    // lambda |xi|^2 pi implied by the horizontal momentum equations
    let implied = |side: Side, j: &crate::forms::Jet| {
        let mu = params.mu(side);
        let rho = params.rho(side);
        let field = if vertical {
            b2 * j.d3
        } else {
            -b2 * xi.xi1 * xi.xi1 * j.d1
        };
        -lambda * lambda * rho * j.d1 - mu * lambda * (k2 * j.d1 - j.d3) + field
    };

    // antiderivative of psi from the wall of each side, at element starts
    let ne = mesh.element_count();
    let mut start_integral = vec![0.0; ne];
    for e in 1..i0 {
        start_integral[e] = start_integral[e - 1] + partial_integral(space, c, e - 1, 1.0);
    }
    let mut acc = 0.0;
    for e in (i0..ne).rev() {
        acc -= partial_integral(space, c, e, 1.0);
        start_integral[e] = acc;
    }
    let antiderivative = |e: usize, t: f64| start_integral[e] + partial_integral(space, c, e, t);

    let mut x = Vec::with_capacity(4 * ne);
    let mut psi = Vec::with_capacity(4 * ne);
    let mut dpsi = Vec::with_capacity(4 * ne);
    let mut pi_part = Vec::with_capacity(4 * ne);
    let mut side_of = Vec::with_capacity(4 * ne);
    let mut jets = Vec::with_capacity(4 * ne);
    // int_0^1 of the particular pressure on the upper side
    let mut upper_mean = 0.0;
    for e in 0..ne {
        let (a, b) = mesh.element(e);
        let side = mesh.side(e);
        let (ca, cb) = coeffs(side);
        for (t, w) in GAUSS_POINTS.iter().zip(GAUSS_WEIGHTS.iter()) {
            let j = space.jet_on_element(c, e, *t);
            let p = -ca * antiderivative(e, *t) + cb * j.d1;
            if side == Side::Plus {
                upper_mean += w * (b - a) * p;
            }
            x.push(a + t * (b - a));
            psi.push(j.v);
            dpsi.push(j.d1);
            pi_part.push(p);
            side_of.push(side);
            jets.push(j);
        }
    }

    let top = space.interface_jet(c, Side::Plus);
    let bottom = space.interface_jet(c, Side::Minus);
    let wall = space.wall_jet(c, Side::Plus);
    // int_0^1 lambda |xi|^2 pi_implied, exact: int psi' = -psi(0), int psi''' = psi''(1) - psi''(0+)
    let mu_p = params.mu_plus;
    let field_integral = if vertical {
        b2 * (wall.d2 - top.d2)
    } else {
        b2 * xi.xi1 * xi.xi1 * top.v
    };
    let implied_integral = lambda * lambda * params.rho_plus * top.v
        + mu_p * lambda * k2 * top.v
        + mu_p * lambda * (wall.d2 - top.d2)
        + field_integral;
    let c_plus = implied_integral / (lambda * k2) - upper_mean;

    let (ca_p, cb_p) = coeffs(Side::Plus);
    let (ca_m, cb_m) = coeffs(Side::Minus);
    let pi_top = c_plus - ca_p * antiderivative(i0, 0.0) + cb_p * top.d1;
    let field_jump = if vertical {
        b2 * (top.d1 - bottom.d1)
    } else {
        0.0
    };
    let lambda_pi_bottom = lambda * pi_top - 2.0 * params.mu_plus * lambda * top.d1
        + 2.0 * params.mu_minus * lambda * bottom.d1
        - field_jump
        - params.buoyancy() * top.v;
    let pi_bottom_part = -ca_m * antiderivative(i0 - 1, 1.0) + cb_m * bottom.d1;
    let c_minus = lambda_pi_bottom / lambda - pi_bottom_part;

    let pi: Vec<f64> = pi_part
        .iter()
        .zip(&side_of)
        .map(|(p, s)| p + if *s == Side::Plus { c_plus } else { c_minus })
        .collect();
    let phi: Vec<f64> = dpsi.iter().map(|d| -xi.xi1 * d / k2).collect();
    let theta: Vec<f64> = dpsi.iter().map(|d| -xi.xi2 * d / k2).collect();
    let divergence = phi
        .iter()
        .zip(&theta)
        .zip(&dpsi)
        .map(|((p, t), d)| (xi.xi1 * p + xi.xi2 * t + d).abs())
        .fold(0.0, f64::max);

    let mut defect = 0.0f64;
    let mut scale = 0.0f64;
    for ((j, side), p) in jets.iter().zip(&side_of).zip(&pi) {
        let lhs = lambda * k2 * p;
        let rhs = implied(*side, j);
        defect = defect.max((lhs - rhs).abs());
        scale = scale.max(lhs.abs()).max(rhs.abs());
    }
    let momentum_residual = if scale > 0.0 { defect / scale } else { 0.0 };

    let tangential = |side: Side, j: &crate::forms::Jet| {
        let v = params.mu(side) * lambda * (k2 * j.v + j.d2);
        let m = if vertical { b2 * j.d2 } else { 0.0 };
        (v + m, v.abs().max(m.abs()))
    };
    let (tp, sp) = tangential(Side::Plus, &top);
    let (tm, sm) = tangential(Side::Minus, &bottom);
    let tangential_jump = if sp.max(sm) > 0.0 {
        (tp - tm).abs() / sp.max(sm)
    } else {
        0.0
    };

    let pi_bottom = c_minus + pi_bottom_part;
    let normal = |side: Side, j: &crate::forms::Jet, p: f64| {
        -2.0 * params.mu(side) * lambda * j.d1 + lambda * p - if vertical { b2 * j.d1 } else { 0.0 }
    };
    let normal_jump = (normal(Side::Plus, &top, pi_top)
        - normal(Side::Minus, &bottom, pi_bottom)
        - params.buoyancy() * top.v)
        .abs();

    Ok(ModeShape {
        lambda,
        xi,
        x,
        psi,
        dpsi,
        phi,
        theta,
        pi,
        divergence,
        momentum_residual,
        tangential_jump,
        normal_jump,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_mesh;
    use crate::variational::critical_freq_vertical;

    fn params() -> FluidParams {
        FluidParams::new(2.0, 1.0, 0.1, 0.1, 1.0).unwrap()
    }

    fn space(n: usize) -> HermiteSpace {
        HermiteSpace::new(build_mesh(n, 0.0).unwrap())
    }

    #[test]
    fn euler_closed_form() {
        let l = euler_lambda(&params(), &Frequency::planar(1.0)).unwrap();
        assert!((l - (1f64.tanh() / 3.0).sqrt()).abs() < 1e-15);
        assert!((l - 0.50384).abs() < 1e-5);
    }

    #[test]
    fn euler_limits() {
        let p = params();
        let small = euler_lambda(&p, &Frequency::planar(1e-4)).unwrap();
        assert!(small < 1e-3);
        let big = euler_lambda(&p, &Frequency::planar(400.0)).unwrap();
        assert!((big * big / (400.0 / 3.0) - 1.0).abs() < 1e-12);
        let stable = FluidParams::new(1.0, 2.0, 0.0, 0.0, 1.0).unwrap();
        assert!(matches!(
            euler_lambda(&stable, &Frequency::planar(1.0)),
            Err(Error::StableConfiguration { .. })
        ));
    }

    #[test]
    fn bound_formula() {
        let b = growth_bound(&params(), &MagneticConfig::vertical(0.5).unwrap()).unwrap();
        assert!((b - 2.0 / (0.5 * 2f64.powf(0.25))).abs() < 1e-14);
        assert!((b - 3.3636).abs() < 1e-4);
        let half = growth_bound(&params(), &MagneticConfig::vertical(1.0).unwrap()).unwrap();
        assert!((2.0 * half - b).abs() < 1e-14);
        assert_eq!(
            growth_bound(&params(), &MagneticConfig::vertical(0.0).unwrap()),
            Err(Error::UnboundedRate)
        );
    }

    #[test]
    fn supercritical_is_stable() {
        let r = solve_growth_rate(
            &params(),
            &MagneticConfig::vertical(1.0).unwrap(),
            &Frequency::planar(3.0),
            &space(12),
        )
        .unwrap();
        assert_eq!(r.status, Status::Stable);
        assert!(r.lambda.is_none());
        assert!(find_s_star(
            &params(),
            &MagneticConfig::vertical(1.0).unwrap(),
            &Frequency::planar(3.0),
            &space(12)
        )
        .unwrap()
        .is_none());
    }

    #[test]
    fn unstable_vertical_mode() {
        let p = params();
        let mag = MagneticConfig::vertical(0.5).unwrap();
        let sp = space(16);
        let xi_vc = critical_freq_vertical(&p, &mag, &sp).unwrap();
        let xi = Frequency::planar(2.0 * xi_vc);
        let r = solve_growth_rate(&p, &mag, &xi, &sp).unwrap();
        assert_eq!(r.status, Status::Unstable);
        let lambda = r.lambda.unwrap();
        assert!(lambda > 0.0 && lambda <= growth_bound(&p, &mag).unwrap());
        assert!(r.phi_defect.unwrap() <= 1e-10);
        assert!(r.pencil_residual.unwrap() <= 1e-8 * alpha_scale(&p, &xi));
        let s_star = r.s_star.unwrap();
        assert!(lambda < s_star);
        let prob = ModalProblem::new(&sp, &p, &mag, &xi).unwrap();
        let d = 1e-6 * s_star;
        assert!(prob.alpha(s_star - d) < 0.0 && prob.alpha(s_star + d) > 0.0);
    }

    #[test]
    fn inviscid_window_is_unbounded() {
        let p = params().with_viscosity(0.0, 0.0);
        let mag = MagneticConfig::vertical(0.3).unwrap();
        let r = solve_growth_rate(&p, &mag, &Frequency::planar(8.0), &space(12)).unwrap();
        assert_eq!(r.s_star, Some(f64::INFINITY));
        let l = r.lambda.unwrap();
        assert!((l * l + r.alpha0).abs() < 1e-12 * alpha_scale(&p, &Frequency::planar(8.0)));
    }

    #[test]
    fn empty_grid_rejected() {
        let r = dispersion_sweep(
            &params(),
            &MagneticConfig::vertical(0.5).unwrap(),
            &[],
            &space(8),
        );
        assert!(r.is_err());
    }

    #[test]
    fn stable_input_has_no_mode() {
        let r = GrowthResult::stable(Frequency::planar(1.0), 0.3);
        assert!(matches!(
            reconstruct_mode(
                &r,
                &params(),
                &MagneticConfig::vertical(0.2).unwrap(),
                &space(8)
            ),
            Err(Error::NoMode)
        ));
    }

    #[test]
    fn partial_integral_of_interpolated_polynomial() {
        let sp = space(4);
        // (1 - |x|)^2 (1 + 2|x|) is C^1 and cubic per side, so it is reproduced exactly
        let c = sp.interpolate(|x| {
            let a = x.abs();
            (
                (1.0 - a).powi(2) * (1.0 + 2.0 * a),
                -6.0 * a * (1.0 - a) * x.signum(),
            )
        });
        let total: f64 = (0..sp.mesh().element_count())
            .map(|e| partial_integral(&sp, &c, e, 1.0))
            .sum();
        // int_0^1 (1-a)^2 (1+2a) da = 1/2
        assert!((total - 1.0).abs() < 1e-14);
    }
}
