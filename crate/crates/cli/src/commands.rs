//! The four subcommands. Each computes everything first and writes its
//! files afterwards from a single thread.

use std::path::Path;

use mhd_rt::evolve::{energy_drift, evolve_mode, fit_growth_exponent, max_energy_increase};
use mhd_rt::growth::{dispersion_sweep_with, solve_growth_rate};
use mhd_rt::variational::{
    critical_freq_horizontal, critical_freq_horizontal_hermite, critical_freq_vertical,
    critical_magnetic_number, xi_hc_oracle, xi_vc_oracle,
};
use mhd_rt::verify::{run_criterion, SuiteConfig, CRITERION_COUNT};
use mhd_rt::{build_mesh, Error, Execution, HermiteSpace, LinearSpace, Orientation};
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{along, CommonArgs, GridSpec, OutputPaths, RunConfig, Spacing};
use crate::report::{
    build_report, dispersion_csv, trajectory_csv, write_report, CriticalRecord, Report,
};
use crate::svg::{Plot, Point, Scale};
use crate::{CliError, Command, EXIT_DOMAIN, EXIT_OK};

/// Initial data for `evolve`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Init {
    /// The fastest normal mode at this frequency, `(psi, lambda psi)`
    Eigenmode,
    /// Seeded uniform coefficients in `[-1, 1]`
    Random,
}

pub fn run(command: Command) -> Result<i32, CliError> {
    match command {
        Command::Critical { common } => critical(&common),
        Command::Dispersion {
            common,
            grid,
            csv,
            svg,
            json,
        } => {
            let outputs = OutputPaths {
                csv: Some(csv),
                svg: Some(svg),
                json,
            };
            dispersion(
                &RunConfig::new(&common, Some(GridSpec::from_args(&grid)), outputs)?,
                exec(&common),
            )
        }
        Command::Evolve {
            common,
            xi,
            angle,
            dt,
            t_end,
            init,
            csv,
            svg,
        } => {
            let outputs = OutputPaths {
                csv: Some(csv),
                svg: Some(svg),
                json: None,
            };
            let cfg = RunConfig::new(&common, None, outputs)?;
            if !(xi > 0.0 && xi.is_finite() && angle.is_finite()) {
                return Err(CliError::Config(format!("xi must be positive, got {xi}")));
            }
            evolve(&cfg, along(xi, angle), dt, t_end, init)
        }
        Command::Verify { common, criteria } => verify(
            &RunConfig::new(&common, None, OutputPaths::default())?,
            &criteria,
            exec(&common),
        ),
    }
}

fn exec(common: &CommonArgs) -> Execution {
    if common.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    }
}

fn spaces(cfg: &RunConfig) -> Result<(LinearSpace, HermiteSpace), CliError> {
    let mesh = build_mesh(cfg.mesh.n_per_side, cfg.mesh.grading)?;
    Ok((LinearSpace::new(mesh.clone()), HermiteSpace::new(mesh)))
}

/// `Ok(None)` for a supercritical field.
fn unless_supercritical(r: mhd_rt::Result<f64>) -> Result<Option<f64>, CliError> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(Error::SupercriticalField { .. }) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

fn finite(v: Option<f64>) -> Option<f64> {
    v.filter(|x| x.is_finite())
}

/// Critical field and the onset for the configured field on both spaces.
pub fn critical_record(
    cfg: &RunConfig,
    linear: &LinearSpace,
    hermite: &HermiteSpace,
) -> Result<CriticalRecord, CliError> {
    let (p, mag) = (&cfg.params, &cfg.mag);
    p.require_unstable_stratification()?;
    let b_critical = critical_magnetic_number(p, linear)?;
    let b_critical_exact = (p.buoyancy() / 2.0).sqrt();
    Ok(match mag.orientation {
        Orientation::Vertical => {
            let onset = unless_supercritical(critical_freq_vertical(p, mag, hermite))?;
            CriticalRecord {
                b_critical,
                b_critical_exact,
                supercritical: onset.is_none(),
                onset,
                onset_linear: None,
                onset_oracle: unless_supercritical(xi_vc_oracle(p, mag))?,
            }
        }
        Orientation::Horizontal => {
            let onset = unless_supercritical(critical_freq_horizontal_hermite(p, mag, hermite))?;
            let supercritical = onset.is_none();
            // a supercritical horizontal field stabilizes every mode along it
            let zero_if_super = |v: Option<f64>| if supercritical { Some(0.0) } else { finite(v) };
            CriticalRecord {
                b_critical,
                b_critical_exact,
                supercritical,
                onset: zero_if_super(onset),
                onset_linear: zero_if_super(unless_supercritical(critical_freq_horizontal(
                    p, mag, linear,
                ))?),
                onset_oracle: zero_if_super(unless_supercritical(xi_hc_oracle(p, mag))?),
            }
        }
    })
}

fn rel_diff(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        ((a - b) / b).abs()
    }
}

fn critical(common: &CommonArgs) -> Result<i32, CliError> {
    let cfg = RunConfig::new(common, None, OutputPaths::default())?;
    let (linear, hermite) = spaces(&cfg)?;
    let rec = critical_record(&cfg, &linear, &hermite)?;
    let tol = cfg.tolerances.cross_check;
    let mut worst = rel_diff(rec.b_critical, rec.b_critical_exact);
    println!(
        "|B|_c = {} (closed form {}, rel. diff {:.2e})",
        rec.b_critical,
        rec.b_critical_exact,
        rel_diff(rec.b_critical, rec.b_critical_exact)
    );
    if !cfg.field_given {
        println!("pass --B to compute the critical frequency for a field strength");
    } else {
        let b = cfg.mag.magnitude;
        match cfg.mag.orientation {
            Orientation::Vertical => match (rec.onset, rec.onset_oracle) {
                (Some(v), Some(o)) => {
                    worst = worst.max(rel_diff(v, o));
                    println!(
                        "|xi|_vc = {v} (oracle {o}, rel. diff {:.2e})",
                        rel_diff(v, o)
                    );
                    println!("vertical field |B| = {b}: modes with |xi| > |xi|_vc are unstable");
                }
                _ => println!("|B| = {b} >= |B|_c: every mode is stable under a vertical field"),
            },
            Orientation::Horizontal => {
                if rec.supercritical {
                    println!("|B| = {b} >= |B|_c: every mode along the field is stable");
                } else if b == 0.0 {
                    println!("|xi|_hc = inf: without a field every mode is unstable");
                } else {
                    let (v, o) = (
                        rec.onset_linear.unwrap_or(f64::NAN),
                        rec.onset_oracle.unwrap_or(f64::NAN),
                    );
                    worst = worst.max(rel_diff(v, o));
                    println!(
                        "|xi|_hc = {v} (oracle {o}, rel. diff {:.2e})",
                        rel_diff(v, o)
                    );
                    if let Some(h) = rec.onset {
                        println!("|xi|_hc on the fourth-order forms = {h}");
                    }
                    println!("horizontal field |B| = {b}: modes along the field with |xi| < |xi|_hc are unstable");
                }
            }
        }
    }
    if worst.is_nan() || worst > tol {
        return Err(CliError::Check(format!(
            "cross-check failed: rel. diff {worst:.2e} > {tol:.1e}; refine the mesh with --n"
        )));
    }
    println!("cross-check ok (tol {tol:.1e})");
    Ok(EXIT_OK)
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    std::fs::write(path, bytes).map_err(|e| CliError::Io(path.to_path_buf(), e))
}

pub fn dispersion_plot(report: &Report) -> Plot {
    let log = report
        .config
        .grid
        .is_some_and(|g| g.spacing == Spacing::Log);
    let points = report
        .samples
        .iter()
        .map(|s| Point {
            x: s.xi_mag,
            y: s.lambda.unwrap_or(0.0),
            class: if s.lambda.is_some() {
                "unstable"
            } else {
                "stable"
            },
        })
        .collect();
    let c = &report.config;
    Plot {
        title: format!("growth rate, {} field |B| = {}", c.orientation, c.field),
        x_label: "|xi|".into(),
        y_label: "lambda".into(),
        x_scale: if log { Scale::Log } else { Scale::Linear },
        y_scale: Scale::Linear,
        points,
        line_class: Some("unstable"),
        guide_x: finite(report.critical.onset)
            .filter(|o| *o > 0.0)
            .map(|o| (o, "onset".to_string())),
    }
}

fn dispersion(cfg: &RunConfig, exec: Execution) -> Result<i32, CliError> {
    let (linear, hermite) = spaces(cfg)?;
    let critical = critical_record(cfg, &linear, &hermite)?;
    let grid = cfg.grid.expect("dispersion has a grid");
    let curve = dispersion_sweep_with(exec, &cfg.params, &cfg.mag, &grid.frequencies(), &hermite)?;
    let report = build_report(cfg, critical, &curve, &hermite)?;
    let csv = dispersion_csv(&report.samples)?;
    let svg = dispersion_plot(&report).render();

    let out = &cfg.outputs;
    if let Some(p) = &out.csv {
        write_file(p, &csv)?;
    }
    if let Some(p) = &out.svg {
        write_file(p, svg.as_bytes())?;
    }
    if let Some(p) = &out.json {
        write_report(&report, p)?;
    }

    let unstable = report.samples.iter().filter(|s| s.lambda.is_some()).count();
    println!("{} samples, {unstable} unstable", report.samples.len());
    match (report.lambda_max, report.xi_at_lambda_max) {
        (Some(l), Some(x)) => println!("lambda_max = {l} at |xi| = {x}"),
        _ => println!("no unstable samples"),
    }
    for v in &report.verdicts {
        println!(
            "{} {}: {}",
            if v.passed { "PASS" } else { "FAIL" },
            v.name,
            v.detail
        );
    }
    for p in [&out.csv, &out.svg, &out.json].into_iter().flatten() {
        println!("wrote {}", p.display());
    }
    Ok(EXIT_OK)
}

fn evolve(
    cfg: &RunConfig,
    xi: mhd_rt::Frequency,
    dt: f64,
    t_end: f64,
    init: Init,
) -> Result<i32, CliError> {
    let (_, space) = spaces(cfg)?;
    let n = space.dof_count();
    let (a0, v0, lambda) = match init {
        Init::Eigenmode => {
            let r = solve_growth_rate(&cfg.params, &cfg.mag, &xi, &space)?;
            let (Some(psi), Some(l)) = (r.psi, r.lambda) else {
                return Err(Error::NoMode.into());
            };
            let v = &psi * l;
            (psi, v, Some(l))
        }
        Init::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            let a = DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
            let v = DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
            (a, v, None)
        }
    };
    let traj = evolve_mode(&cfg.params, &cfg.mag, &xi, &space, (&a0, &v0), dt, t_end)?;
    let csv = trajectory_csv(&traj, &space)?;
    let positive = traj.energy.iter().all(|e| *e > 0.0);
    let plot = Plot {
        title: format!("mode energy, |xi| = {}", xi.magnitude()),
        x_label: "t".into(),
        y_label: "energy".into(),
        x_scale: Scale::Linear,
        y_scale: if positive { Scale::Log } else { Scale::Linear },
        points: traj
            .times
            .iter()
            .zip(&traj.energy)
            .map(|(t, e)| Point {
                x: *t,
                y: *e,
                class: "energy",
            })
            .collect(),
        line_class: Some("energy"),
        guide_x: None,
    };
    if let Some(p) = &cfg.outputs.csv {
        write_file(p, &csv)?;
    }
    if let Some(p) = &cfg.outputs.svg {
        write_file(p, plot.render().as_bytes())?;
    }

    println!(
        "{} steps to t = {}",
        traj.len() - 1,
        traj.times.last().copied().unwrap_or(0.0)
    );
    println!(
        "energy {} -> {}",
        traj.energy.first().copied().unwrap_or(0.0),
        traj.energy.last().copied().unwrap_or(0.0)
    );
    println!(
        "max one-step energy rise {:.3e}, drift {:.3e}",
        max_energy_increase(&traj),
        energy_drift(&traj)
    );
    let fit = fit_growth_exponent(&traj, 0.5)?;
    match lambda {
        Some(l) => println!(
            "fitted growth exponent {fit} (eigensolver {l}, rel. diff {:.2e})",
            rel_diff(fit, l)
        ),
        None => println!("fitted growth exponent {fit}"),
    }
    for p in [&cfg.outputs.csv, &cfg.outputs.svg].into_iter().flatten() {
        println!("wrote {}", p.display());
    }
    Ok(EXIT_OK)
}

fn verify(cfg: &RunConfig, criteria: &[u8], exec: Execution) -> Result<i32, CliError> {
    cfg.params.require_unstable_stratification()?;
    let suite = SuiteConfig {
        params: cfg.params,
        seed: cfg.seed,
        elements: cfg.mesh.n_per_side,
        exec,
    };
    let ids: Vec<usize> = if criteria.is_empty() {
        (1..=CRITERION_COUNT).collect()
    } else {
        criteria.iter().map(|c| usize::from(*c)).collect()
    };
    let mut failed = 0;
    for id in &ids {
        let outcome = run_criterion(*id, &suite);
        println!("{outcome}");
        if !outcome.passed {
            failed += 1;
        }
    }
    println!("verify: {} passed, {failed} failed", ids.len() - failed);
    Ok(if failed == 0 { EXIT_OK } else { EXIT_DOMAIN })
}
