//! Time integration of `J a'' + E1 a' + |xi|^2 E0 a = 0` for a single Fourier mode.

use nalgebra::{DMatrix, DVector};

use crate::eigen::smallest_eigenpair;
use crate::error::{Error, Result};
use crate::forms::{assemble_gradient_form, FormSet, HermiteSpace};
use crate::params::{FluidParams, Frequency, MagneticConfig};

/// A sampled trajectory; index `n` of every series refers to `times[n]`.
#[derive(Debug, Clone)]
pub struct ModeTrajectory {
    pub times: Vec<f64>,
    pub displacement: Vec<DVector<f64>>,
    pub velocity: Vec<DVector<f64>>,
    /// `<a', J a'> + |xi|^2 <a, E0 a>`.
    pub energy: Vec<f64>,
    /// `<a', E1 a'>`; the energy decays at rate `2 D`.
    pub dissipation: Vec<f64>,
    /// `sqrt(<a, J a>)`.
    pub amplitude: Vec<f64>,
}

impl ModeTrajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Assembles the forms and integrates from `init = (a0, a0')` to `t_end`.
#[allow(clippy::too_many_arguments)]
pub fn evolve_mode(
    params: &FluidParams,
    mag: &MagneticConfig,
    xi: &Frequency,
    space: &HermiteSpace,
    init: (&DVector<f64>, &DVector<f64>),
    dt: f64,
    t_end: f64,
) -> Result<ModeTrajectory> {
    let forms = FormSet::assemble(space, params, mag, xi)?;
    evolve_with_forms(&forms, init, dt, t_end)
}

/// Average-acceleration (trapezoidal) integration on assembled forms.
///
/// Both `a` and `a'` follow the trapezoidal rule, so the discrete energy
/// obeys `E_{n+1} - E_n = -2 dt <v_mid, E1 v_mid>` exactly: conserved when
/// `E1 = 0` and nonincreasing whenever `E0` is positive semidefinite.
pub fn evolve_with_forms(
    forms: &FormSet,
    init: (&DVector<f64>, &DVector<f64>),
    dt: f64,
    t_end: f64,
) -> Result<ModeTrajectory> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidTimeStep(format!(
            "dt = {dt} must be positive"
        )));
    }
    if !(t_end >= dt && t_end.is_finite()) {
        return Err(Error::InvalidTimeStep(format!(
            "t_end = {t_end} must be at least dt = {dt}"
        )));
    }
    let n = forms.j.nrows();
    let (a0, v0) = init;
    if a0.len() != n || v0.len() != n {
        return Err(Error::InvalidParams(format!(
            "initial data has length ({}, {}), expected {n}",
            a0.len(),
            v0.len()
        )));
    }
    let j = &forms.j;
    let c = &forms.e1;
    let k = &forms.e0 * forms.xi.magnitude_sq();
    let h = 0.5 * dt;
    let system: DMatrix<f64> = j + c * h + &k * (h * h);
    let lu = system.lu();
    if !lu.is_invertible() {
        return Err(Error::SingularSystem);
    }

    let steps = (t_end / dt).round().max(1.0) as usize;
    let mut traj = ModeTrajectory {
        times: Vec::with_capacity(steps + 1),
        displacement: Vec::with_capacity(steps + 1),
        velocity: Vec::with_capacity(steps + 1),
        energy: Vec::with_capacity(steps + 1),
        dissipation: Vec::with_capacity(steps + 1),
        amplitude: Vec::with_capacity(steps + 1),
    };
    let record = |traj: &mut ModeTrajectory, t: f64, a: DVector<f64>, v: DVector<f64>| {
        let kin = v.dot(&(j * &v));
        traj.energy.push(kin + a.dot(&(&k * &a)));
        traj.dissipation.push(v.dot(&(c * &v)));
        traj.amplitude.push(a.dot(&(j * &a)).max(0.0).sqrt());
        traj.times.push(t);
        traj.displacement.push(a);
        traj.velocity.push(v);
    };

    let mut a = a0.clone();
    let mut v = v0.clone();
    record(&mut traj, 0.0, a.clone(), v.clone());
    for step in 1..=steps {
        // a1 = a0 + h (v0 + v1) and J (v1 - v0) = -dt (C v_mid + K a_mid)
        let rhs = j * &v - c * (&v * h) - &k * ((&a * 2.0 + &v * h) * h);
        let v1 = lu.solve(&rhs).ok_or(Error::SingularSystem)?;
        let a1 = &a + (&v + &v1) * h;
        a = a1;
        v = v1;
        record(&mut traj, step as f64 * dt, a.clone(), v.clone());
    }
    Ok(traj)
}

/// Largest discrete energy-identity defect
/// `|dE/dt + 2 D_mid| / (|E| + |D| dt + floor)` over all steps, with
/// `D_mid` the average of the endpoint dissipations.
pub fn energy_balance_residual(traj: &ModeTrajectory) -> Result<f64> {
    if traj.len() < 2 {
        return Err(Error::InvalidParams(
            "energy balance needs at least two samples".into(),
        ));
    }
    let mut worst = 0.0f64;
    for n in 0..traj.len() - 1 {
        let dt = traj.times[n + 1] - traj.times[n];
        let d_mid = 0.5 * (traj.dissipation[n] + traj.dissipation[n + 1]);
        let defect = ((traj.energy[n + 1] - traj.energy[n]) / dt + 2.0 * d_mid).abs();
        let scale = traj.energy[n].abs().max(traj.energy[n + 1].abs())
            + d_mid.abs() * dt
            + f64::MIN_POSITIVE;
        worst = worst.max(defect / scale);
    }
    Ok(worst)
}

/// Largest relative energy increase over one step, `max (E_{n+1} - E_n) / max|E|`;
/// zero or negative when the energy never grows.
pub fn max_energy_increase(traj: &ModeTrajectory) -> f64 {
    let scale = traj
        .energy
        .iter()
        .fold(0.0f64, |m, e| m.max(e.abs()))
        .max(f64::MIN_POSITIVE);
    traj.energy
        .windows(2)
        .map(|w| (w[1] - w[0]) / scale)
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Largest relative deviation `|E_n - E_0| / |E_0|`.
pub fn energy_drift(traj: &ModeTrajectory) -> f64 {
    let e0 = traj.energy.first().copied().unwrap_or(0.0);
    let scale = e0.abs().max(f64::MIN_POSITIVE);
    traj.energy
        .iter()
        .map(|e| (e - e0).abs() / scale)
        .fold(0.0, f64::max)
}

/// Exponent of `amplitude ~ exp(rate t)` by least squares on `ln amplitude`
/// over the trailing `fraction` of the samples.
pub fn fit_growth_exponent(traj: &ModeTrajectory, fraction: f64) -> Result<f64> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::InvalidParams(format!(
            "fit fraction {fraction} outside (0, 1]"
        )));
    }
    let count = ((traj.len() as f64) * fraction).ceil() as usize;
    let start = traj.len().saturating_sub(count);
    let pts: Vec<(f64, f64)> = traj.times[start..]
        .iter()
        .zip(&traj.amplitude[start..])
        .filter(|(_, a)| **a > 0.0)
        .map(|(t, a)| (*t, a.ln()))
        .collect();
    if pts.len() < 2 {
        return Err(Error::InvalidParams(
            "too few nonzero samples for a growth fit".into(),
        ));
    }
    let m = pts.len() as f64;
    let tm = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let ym = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let (sxy, sxx) = pts.iter().fold((0.0, 0.0), |(sxy, sxx), (t, y)| {
        (sxy + (t - tm) * (y - ym), sxx + (t - tm) * (t - tm))
    });
    Ok(sxy / sxx)
}

/// Smallest eigenvalue of `E0` relative to `1/2 int psi'^2`.
///
/// With `|psi(0)|^2 <= 1/2 int psi'^2` for clamped profiles, it is at least
/// `|B|^2 - |B|_c^2` for a vertical field and `|B|^2 xi1^2/|xi|^2 - |B|_c^2`
/// for a horizontal one.
pub fn coercivity_constant(forms: &FormSet, space: &HermiteSpace) -> Result<f64> {
    let g = assemble_gradient_form(space);
    smallest_eigenpair(&forms.e0, &g).map(|(v, _)| v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::growth::solve_growth_rate;
    use crate::mesh::build_mesh;

    fn setup(mu: f64, b: f64) -> (FluidParams, MagneticConfig, HermiteSpace) {
        (
            FluidParams::new(2.0, 1.0, mu, mu, 1.0).unwrap(),
            MagneticConfig::vertical(b).unwrap(),
            HermiteSpace::new(build_mesh(8, 0.0).unwrap()),
        )
    }

    fn bump(space: &HermiteSpace) -> DVector<f64> {
        space.interpolate(|x| ((1.0 - x * x).powi(2), -4.0 * x * (1.0 - x * x)))
    }

    #[test]
    fn bad_steps_rejected() {
        let (p, m, sp) = setup(0.1, 0.3);
        let a = bump(&sp);
        let z = DVector::zeros(a.len());
        let xi = Frequency::planar(1.0);
        assert!(evolve_mode(&p, &m, &xi, &sp, (&a, &z), 0.0, 1.0).is_err());
        assert!(evolve_mode(&p, &m, &xi, &sp, (&a, &z), 0.1, 0.05).is_err());
    }

    #[test]
    fn zero_data_stays_zero() {
        let (p, m, sp) = setup(0.1, 0.3);
        let z = DVector::zeros(sp.dof_count());
        let t = evolve_mode(&p, &m, &Frequency::planar(2.0), &sp, (&z, &z), 0.01, 0.1).unwrap();
        assert_eq!(t.len(), 11);
        assert_eq!(energy_balance_residual(&t).unwrap(), 0.0);
        assert!(t.energy.iter().all(|e| *e == 0.0));
    }

    #[test]
    fn undamped_energy_is_conserved() {
        let (p, m, sp) = setup(0.0, 0.9);
        let a = bump(&sp);
        let z = DVector::zeros(a.len());
        let t = evolve_mode(&p, &m, &Frequency::planar(3.0), &sp, (&a, &z), 0.01, 2.0).unwrap();
        assert!(energy_drift(&t) < 1e-12);
    }

    #[test]
    fn eigenmode_grows_at_its_rate() {
        let (p, m, sp) = setup(0.1, 0.3);
        let xi = Frequency::planar(3.0);
        let r = solve_growth_rate(&p, &m, &xi, &sp).unwrap();
        let lambda = r.lambda.unwrap();
        let psi = r.psi.unwrap();
        let v = &psi * lambda;
        let dt = 1.0 / (200.0 * lambda);
        let t = evolve_mode(&p, &m, &xi, &sp, (&psi, &v), dt, 5.0 / lambda).unwrap();
        let rate = fit_growth_exponent(&t, 0.6).unwrap();
        assert!((rate / lambda - 1.0).abs() < 1e-3, "{rate} vs {lambda}");
    }

    #[test]
    fn coercivity_lower_bound() {
        let (p, _, sp) = setup(0.1, 0.0);
        let bc2 = p.buoyancy() / 2.0;
        for b in [0.8, 1.0, 1.5] {
            let m = MagneticConfig::vertical(b).unwrap();
            let f = FormSet::assemble(&sp, &p, &m, &Frequency::planar(2.0)).unwrap();
            let c = coercivity_constant(&f, &sp).unwrap();
            assert!(c >= b * b - bc2 - 1e-12, "{c} < {}", b * b - bc2);
        }
    }

    #[test]
    fn exponent_fit_of_exact_exponential() {
        let times: Vec<f64> = (0..50).map(|i| i as f64 * 0.1).collect();
        let amplitude = times.iter().map(|t| (0.7 * t).exp() * 3.0).collect();
        let t = ModeTrajectory {
            energy: vec![0.0; times.len()],
            dissipation: vec![0.0; times.len()],
            displacement: Vec::new(),
            velocity: Vec::new(),
            amplitude,
            times,
        };
        assert!((fit_growth_exponent(&t, 0.6).unwrap() - 0.7).abs() < 1e-12);
    }
}
