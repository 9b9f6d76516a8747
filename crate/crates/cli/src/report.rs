//! CSV tables and the JSON run report.
//!
//! JSON floats are written as `d.dddddddddddddddde±x` (17 significant
//! digits), which parses back to the identical `f64`. Non-finite values never
//! reach the serializer: unbounded quantities are stored as `None`.

use std::io::{self, Write};
use std::path::Path;

use mhd_rt::evolve::ModeTrajectory;
use mhd_rt::growth::{alpha_scale, growth_bound, DispersionCurve, GrowthResult};
use mhd_rt::{HermiteSpace, Orientation};
use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::config::{GridSpec, MeshSpec, RunConfig, Tolerances};
use crate::CliError;

pub const SCHEMA: &str = "mhd-rt/1";

pub const DISPERSION_HEADER: [&str; 8] = [
    "xi1",
    "xi2",
    "xi_mag",
    "status",
    "lambda",
    "s_star",
    "psi0",
    "iterations",
];

pub const TRAJECTORY_HEADER: [&str; 5] = ["t", "amplitude", "energy", "dissipation", "psi0"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    pub config: ConfigEcho,
    pub critical: CriticalRecord,
    pub samples: Vec<SampleRecord>,
    /// Largest growth rate over the samples; `None` if none is unstable.
    pub lambda_max: Option<f64>,
    pub xi_at_lambda_max: Option<f64>,
    pub bound_checks: BoundChecks,
    pub verdicts: Vec<Verdict>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub rho_plus: f64,
    pub rho_minus: f64,
    pub mu_plus: f64,
    pub mu_minus: f64,
    pub g: f64,
    pub orientation: String,
    pub field: f64,
    pub mesh: MeshSpec,
    pub grid: Option<GridSpec>,
    pub tolerances: Tolerances,
    pub seed: u64,
}

impl ConfigEcho {
    pub fn new(cfg: &RunConfig) -> Self {
        let p = &cfg.params;
        Self {
            rho_plus: p.rho_plus,
            rho_minus: p.rho_minus,
            mu_plus: p.mu_plus,
            mu_minus: p.mu_minus,
            g: p.g,
            orientation: cfg.mag.orientation.name().to_string(),
            field: cfg.mag.magnitude,
            mesh: cfg.mesh,
            grid: cfg.grid,
            tolerances: cfg.tolerances,
            seed: cfg.seed,
        }
    }
}

/// Critical values for the configured field.
///
/// `onset` is the critical frequency of the discrete forms used by the
/// sweep; `None` means no finite onset (every mode stable for a
/// supercritical vertical field, every mode unstable without a horizontal
/// field).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalRecord {
    pub b_critical: f64,
    pub b_critical_exact: f64,
    pub supercritical: bool,
    pub onset: Option<f64>,
    /// Piecewise-linear horizontal onset; vertical runs leave it empty.
    pub onset_linear: Option<f64>,
    pub onset_oracle: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub xi1: f64,
    pub xi2: f64,
    pub xi_mag: f64,
    pub status: String,
    pub lambda: Option<f64>,
    /// Right end of the instability window; `None` when stable or unbounded.
    pub s_star: Option<f64>,
    /// Set for unstable inviscid samples, whose window has no right end.
    pub window_unbounded: bool,
    pub psi0: Option<f64>,
    pub iterations: usize,
    pub alpha0: f64,
    pub phi_defect: Option<f64>,
    /// Pencil residual divided by the inviscid rate squared.
    pub relative_residual: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundChecks {
    /// `None` when no bound applies (horizontal field or `|B| = 0`).
    pub growth_bound: Option<f64>,
    pub checked: usize,
    pub violations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

impl SampleRecord {
    pub fn new(r: &GrowthResult, cfg: &RunConfig, space: &HermiteSpace) -> Self {
        let scale = alpha_scale(&cfg.params, &r.xi);
        Self {
            xi1: r.xi.xi1,
            xi2: r.xi.xi2,
            xi_mag: r.xi.magnitude(),
            status: r.status.name().to_string(),
            lambda: r.lambda,
            s_star: r.s_star.and_then(finite),
            window_unbounded: r.s_star == Some(f64::INFINITY),
            psi0: r.psi0(space),
            iterations: r.iterations,
            alpha0: r.alpha0,
            phi_defect: r.phi_defect,
            relative_residual: r.pencil_residual.map(|v| v / scale),
        }
    }
}

/// Assembles the report for a finished sweep.
pub fn build_report(
    cfg: &RunConfig,
    critical: CriticalRecord,
    curve: &DispersionCurve,
    space: &HermiteSpace,
) -> Result<Report, CliError> {
    let results: Vec<&GrowthResult> = curve
        .samples
        .iter()
        .map(|s| s.outcome.as_ref().map_err(|e| CliError::Domain(e.clone())))
        .collect::<Result<_, _>>()?;
    let samples: Vec<SampleRecord> = results
        .iter()
        .map(|r| SampleRecord::new(r, cfg, space))
        .collect();
    let (lambda_max, xi_at_lambda_max) = match curve.lambda_max() {
        Some((i, l)) => (Some(l), Some(samples[i].xi_mag)),
        None => (None, None),
    };

    let bound = match cfg.mag.orientation {
        Orientation::Vertical if cfg.mag.magnitude > 0.0 => {
            Some(growth_bound(&cfg.params, &cfg.mag)?)
        }
        _ => None,
    };
    let lambdas: Vec<f64> = samples.iter().filter_map(|s| s.lambda).collect();
    let bound_checks = BoundChecks {
        growth_bound: bound,
        checked: if bound.is_some() { lambdas.len() } else { 0 },
        violations: bound.map_or(0, |b| lambdas.iter().filter(|l| **l > b).count()),
    };

    let tol = cfg.tolerances;
    let worst =
        |f: fn(&SampleRecord) -> Option<f64>| samples.iter().filter_map(f).fold(0.0, f64::max);
    let worst_phi = worst(|s| s.phi_defect);
    let worst_res = worst(|s| s.relative_residual);
    let mut verdicts = vec![
        Verdict {
            name: "fixed-point".into(),
            passed: worst_phi <= tol.phi,
            detail: format!("max |Phi - 1| {worst_phi:.3e} (tol {:.1e})", tol.phi),
        },
        Verdict {
            name: "pencil-residual".into(),
            passed: worst_res <= tol.residual,
            detail: format!(
                "max residual / scale {worst_res:.3e} (tol {:.1e})",
                tol.residual
            ),
        },
        Verdict {
            name: "growth-bound".into(),
            passed: bound_checks.violations == 0,
            detail: match bound {
                Some(b) => format!(
                    "{} of {} rates above {b:.6}",
                    bound_checks.violations, bound_checks.checked
                ),
                None => "no bound for this field".into(),
            },
        },
    ];
    verdicts.push(onset_verdict(cfg, &critical, &samples));

    Ok(Report {
        schema: SCHEMA.to_string(),
        config: ConfigEcho::new(cfg),
        critical,
        samples,
        lambda_max,
        xi_at_lambda_max,
        bound_checks,
        verdicts,
    })
}

/// Samples must be unstable exactly on the unstable side of the onset.
/// Samples within `1e-6` of the onset are not judged.
fn onset_verdict(cfg: &RunConfig, critical: &CriticalRecord, samples: &[SampleRecord]) -> Verdict {
    let name = "onset".to_string();
    let along_x1 = samples.iter().all(|s| s.xi2 == 0.0);
    if cfg.mag.orientation == Orientation::Horizontal && !along_x1 {
        return Verdict {
            name,
            passed: true,
            detail: "oblique frequencies are not classified".into(),
        };
    }
    let expect_unstable = |xi: f64| -> Option<bool> {
        match (cfg.mag.orientation, critical.onset) {
            (_, Some(o)) if (xi / o - 1.0).abs() < 1e-6 => None,
            (Orientation::Vertical, Some(o)) => Some(xi > o),
            (Orientation::Vertical, None) => Some(false),
            (Orientation::Horizontal, Some(o)) => Some(xi < o),
            (Orientation::Horizontal, None) => Some(true),
        }
    };
    let mut judged = 0;
    let mut wrong = 0;
    for s in samples {
        if let Some(expected) = expect_unstable(s.xi_mag) {
            judged += 1;
            if expected != (s.lambda.is_some()) {
                wrong += 1;
            }
        }
    }
    Verdict {
        name,
        passed: wrong == 0,
        detail: format!("{wrong} of {judged} samples on the wrong side of the onset"),
    }
}

/// serde_json formatter: pretty layout, floats with 17 significant digits.
struct ExactFloats<'a>(PrettyFormatter<'a>);

impl Formatter for ExactFloats<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }

    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

pub fn report_to_string(report: &Report) -> Result<String, CliError> {
    if report.samples.is_empty() {
        return Err(CliError::EmptyReport);
    }
    let mut buf = Vec::new();
    let mut ser =
        serde_json::Serializer::with_formatter(&mut buf, ExactFloats(PrettyFormatter::new()));
    report.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
}

/// Writes `report` as JSON. Reports without samples are rejected.
pub fn write_report(report: &Report, path: &Path) -> Result<(), CliError> {
    let text = report_to_string(report)?;
    std::fs::write(path, text).map_err(|e| CliError::Io(path.to_path_buf(), e))
}

pub fn read_report(path: &Path) -> Result<Report, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(path.to_path_buf(), e))?;
    Ok(serde_json::from_str(&text)?)
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn dispersion_csv(samples: &[SampleRecord]) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(DISPERSION_HEADER)?;
    for s in samples {
        let s_star = if s.window_unbounded {
            "inf".to_string()
        } else {
            cell(s.s_star)
        };
        w.write_record([
            s.xi1.to_string(),
            s.xi2.to_string(),
            s.xi_mag.to_string(),
            s.status.clone(),
            cell(s.lambda),
            s_star,
            cell(s.psi0),
            s.iterations.to_string(),
        ])?;
    }
    w.into_inner()
        .map_err(|e| CliError::Csv(e.into_error().into()))
}

pub fn trajectory_csv(traj: &ModeTrajectory, space: &HermiteSpace) -> Result<Vec<u8>, CliError> {
    let k = space.interface_dof();
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(TRAJECTORY_HEADER)?;
    for i in 0..traj.len() {
        w.write_record([
            traj.times[i].to_string(),
            traj.amplitude[i].to_string(),
            traj.energy[i].to_string(),
            traj.dissipation[i].to_string(),
            traj.displacement[i][k].to_string(),
        ])?;
    }
    w.into_inner()
        .map_err(|e| CliError::Csv(e.into_error().into()))
}
