use mhd_rt::eigen::ModalProblem;
use mhd_rt::error::Error;
use mhd_rt::evolve::{energy_balance_residual, evolve_mode};
use mhd_rt::growth::{
    dispersion_sweep, find_s_star, growth_bound, reconstruct_mode, solve_growth_rate, Status,
};
use mhd_rt::variational::{critical_freq_horizontal_hermite, critical_freq_vertical};
use mhd_rt::{build_mesh, FluidParams, Frequency, HermiteSpace, MagneticConfig};

fn params() -> FluidParams {
    FluidParams::new(2.0, 1.0, 0.1, 0.1, 1.0).unwrap()
}

fn space(n: usize) -> HermiteSpace {
    HermiteSpace::new(build_mesh(n, 0.3).unwrap())
}

#[test]
fn window_edge_changes_sign() {
    let p = params();
    let mag = MagneticConfig::vertical(0.5).unwrap();
    let sp = space(16);
    let xi = Frequency::planar(2.0 * critical_freq_vertical(&p, &mag, &sp).unwrap());
    let s_star = find_s_star(&p, &mag, &xi, &sp).unwrap().unwrap();
    let problem = ModalProblem::new(&sp, &p, &mag, &xi).unwrap();
    let d = 1e-6 * s_star;
    assert!(problem.alpha(s_star - d) < 0.0);
    assert!(problem.alpha(s_star + d) > 0.0);
}

#[test]
fn no_window_below_vertical_onset() {
    let p = params();
    let mag = MagneticConfig::vertical(0.5).unwrap();
    let sp = space(16);
    let onset = critical_freq_vertical(&p, &mag, &sp).unwrap();
    for f in [0.2, 0.6, 0.95] {
        let xi = Frequency::planar(f * onset);
        assert_eq!(find_s_star(&p, &mag, &xi, &sp).unwrap(), None);
        assert_eq!(
            solve_growth_rate(&p, &mag, &xi, &sp).unwrap().status,
            Status::Stable
        );
    }
}

#[test]
fn across_field_modes_are_never_stabilized() {
    let p = params();
    let sp = space(16);
    let mag = MagneticConfig::horizontal(1.2).unwrap();
    for xi2 in [0.5, 2.0, 6.0] {
        let r = solve_growth_rate(&p, &mag, &Frequency::new(0.0, xi2), &sp).unwrap();
        assert_eq!(r.status, Status::Unstable);
        let plain = solve_growth_rate(
            &p,
            &MagneticConfig::horizontal(0.0).unwrap(),
            &Frequency::planar(xi2),
            &sp,
        )
        .unwrap();
        assert_eq!(r.lambda, plain.lambda);
    }
    // the same field along the mode stabilizes it
    let r = solve_growth_rate(&p, &mag, &Frequency::new(2.0, 0.0), &sp).unwrap();
    assert_eq!(r.status, Status::Stable);
}

#[test]
fn vertical_sweep_respects_bound_and_onset() {
    let p = params();
    let mag = MagneticConfig::vertical(0.5).unwrap();
    let sp = space(16);
    let onset = critical_freq_vertical(&p, &mag, &sp).unwrap();
    let grid: Vec<Frequency> = (1..=12)
        .map(|i| Frequency::planar(0.5 * i as f64 * onset / 2.0))
        .collect();
    let curve = dispersion_sweep(&p, &mag, &grid, &sp).unwrap();
    let bound = growth_bound(&p, &mag).unwrap();
    assert_eq!(curve.failures(), 0);
    for r in curve.unstable() {
        assert!(r.xi.magnitude() > onset);
        assert!(r.lambda.unwrap() <= bound);
    }
    let (i, max) = curve.lambda_max().unwrap();
    assert_eq!(curve.samples[i].lambda(), Some(max));
    assert!(curve.unstable().all(|r| r.lambda.unwrap() <= max));
}

#[test]
fn horizontal_sweep_stays_below_onset() {
    let p = params();
    let mag = MagneticConfig::horizontal(0.4).unwrap();
    let sp = space(16);
    let onset = critical_freq_horizontal_hermite(&p, &mag, &sp).unwrap();
    let grid: Vec<Frequency> = (1..=10)
        .map(|i| Frequency::planar(0.15 * i as f64 * onset))
        .collect();
    let curve = dispersion_sweep(&p, &mag, &grid, &sp).unwrap();
    for s in &curve.samples {
        let r = s.result().unwrap();
        assert_eq!(
            r.is_unstable(),
            s.xi.magnitude() < onset,
            "xi = {}",
            s.xi.magnitude()
        );
    }
}

#[test]
fn zero_frequency_in_grid_is_rejected() {
    let r = dispersion_sweep(
        &params(),
        &MagneticConfig::vertical(0.3).unwrap(),
        &[Frequency::planar(1.0), Frequency::new(0.0, 0.0)],
        &space(8),
    );
    assert!(matches!(r, Err(Error::InvalidParams(_))));
}

#[test]
fn stable_stratification_is_reported() {
    let p = FluidParams::new(1.0, 1.0, 0.1, 0.1, 1.0).unwrap();
    let r = solve_growth_rate(
        &p,
        &MagneticConfig::vertical(0.1).unwrap(),
        &Frequency::planar(1.0),
        &space(8),
    );
    assert!(matches!(r, Err(Error::StableConfiguration { .. })));
}

#[test]
fn reconstructed_mode_converges() {
    let p = params();
    for mag in [
        MagneticConfig::vertical(0.3).unwrap(),
        MagneticConfig::horizontal(0.3).unwrap(),
    ] {
        let xi = Frequency::new(2.4, 1.8);
        let mut momentum = Vec::new();
        let mut tangential = Vec::new();
        for n in [8, 16, 32] {
            let sp = HermiteSpace::new(build_mesh(n, 0.0).unwrap());
            let r = solve_growth_rate(&p, &mag, &xi, &sp).unwrap();
            let mode = reconstruct_mode(&r, &p, &mag, &sp).unwrap();
            assert!(mode.divergence <= 1e-12);
            assert!(mode.normal_jump <= 1e-10);
            assert_eq!(mode.phi.len(), mode.x.len());
            momentum.push(mode.momentum_residual);
            tangential.push(mode.tangential_jump);
        }
        assert!(momentum.windows(2).all(|w| w[1] < w[0]), "{momentum:?}");
        assert!(tangential.windows(2).all(|w| w[1] < w[0]), "{tangential:?}");
    }
}

#[test]
fn energy_defect_is_second_order_in_time() {
    let p = params();
    let mag = MagneticConfig::vertical(0.3).unwrap();
    let sp = space(8);
    let xi = Frequency::planar(3.0);
    let a0 = sp.interpolate(|x| ((1.0 - x * x).powi(2), -4.0 * x * (1.0 - x * x)));
    let v0 = sp.interpolate(|x| {
        (
            x * (1.0 - x * x).powi(2),
            (1.0 - x * x) * (1.0 - 5.0 * x * x),
        )
    });
    let residual = |dt: f64| {
        let t = evolve_mode(&p, &mag, &xi, &sp, (&a0, &v0), dt, 0.4).unwrap();
        energy_balance_residual(&t).unwrap()
    };
    // stiff viscous modes keep coarser steps out of the asymptotic range
    let ratio = residual(0.001) / residual(0.0005);
    assert!((3.5..4.5).contains(&ratio), "ratio {ratio}");
}
