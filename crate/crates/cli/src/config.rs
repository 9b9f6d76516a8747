//! Run configuration: command-line flags merged over an optional flat
//! `key = value` file.

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::Args;
use mhd_rt::{FluidParams, Frequency, MagneticConfig, Orientation};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Flat key=value file; command-line flags take precedence
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Density of the upper fluid
    #[arg(long, default_value_t = 2.0)]
    pub rho_plus: f64,
    /// Density of the lower fluid
    #[arg(long, default_value_t = 1.0)]
    pub rho_minus: f64,
    /// Viscosity of the upper fluid
    #[arg(long, default_value_t = 0.1)]
    pub mu_plus: f64,
    /// Viscosity of the lower fluid
    #[arg(long, default_value_t = 0.1)]
    pub mu_minus: f64,
    /// Gravitational acceleration
    #[arg(long, default_value_t = 1.0)]
    pub g: f64,
    /// Field direction
    #[arg(long, default_value = "vertical")]
    pub orientation: Orientation,
    /// Field magnitude |B|
    #[arg(long = "B", visible_alias = "field", value_name = "B")]
    pub field: Option<f64>,
    /// Elements per side of the interface
    #[arg(long, default_value_t = 24)]
    pub n: usize,
    /// Mesh clustering toward the interface, 0 (uniform) to 1
    #[arg(long, default_value_t = 0.3)]
    pub grading: f64,
    /// Seed for randomized initial data and suite configurations
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    /// Tolerance on |Phi(lambda) - 1|
    #[arg(long, default_value_t = 1e-10)]
    pub phi_tol: f64,
    /// Tolerance on the pencil residual, relative to the inviscid rate squared
    #[arg(long, default_value_t = 1e-8)]
    pub residual_tol: f64,
    /// Relative tolerance of discrete critical values against closed forms
    #[arg(long, default_value_t = 1e-2)]
    pub cross_check_tol: f64,
    /// Evaluate sweep samples on one thread
    #[arg(long, num_args = 0..=1, default_missing_value = "true", default_value_t = false, action = clap::ArgAction::Set)]
    pub sequential: bool,
}

/// Wavenumber grid flags.
#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    #[arg(long, default_value_t = 0.1)]
    pub xi_min: f64,
    #[arg(long, default_value_t = 10.0)]
    pub xi_max: f64,
    #[arg(long, default_value_t = 40)]
    pub xi_count: usize,
    #[arg(long, default_value = "log")]
    pub xi_spacing: Spacing,
    /// Direction of xi in degrees from the x1 axis
    #[arg(long, default_value_t = 0.0)]
    pub angle: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeshSpec {
    pub n_per_side: usize,
    pub grading: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub min: f64,
    pub max: f64,
    pub count: usize,
    pub spacing: Spacing,
    pub angle_deg: f64,
}

impl GridSpec {
    pub fn from_args(args: &GridArgs) -> Self {
        Self {
            min: args.xi_min,
            max: args.xi_max,
            count: args.xi_count,
            spacing: args.xi_spacing,
            angle_deg: args.angle,
        }
    }

    fn validate(&self) -> Result<(), CliError> {
        if self.count < 2 {
            return Err(CliError::Config(format!(
                "xi-count must be at least 2, got {}",
                self.count
            )));
        }
        if !(self.min > 0.0 && self.max > self.min && self.max.is_finite()) {
            return Err(CliError::Config(format!(
                "xi grid needs 0 < xi-min < xi-max, got [{}, {}]",
                self.min, self.max
            )));
        }
        if !self.angle_deg.is_finite() {
            return Err(CliError::Config("angle must be finite".into()));
        }
        Ok(())
    }

    pub fn magnitudes(&self) -> Vec<f64> {
        let last = (self.count - 1) as f64;
        (0..self.count)
            .map(|i| {
                let t = i as f64 / last;
                match self.spacing {
                    Spacing::Linear => self.min + t * (self.max - self.min),
                    Spacing::Log => self.min * (self.max / self.min).powf(t),
                }
            })
            .collect()
    }

    pub fn frequencies(&self) -> Vec<Frequency> {
        self.magnitudes()
            .into_iter()
            .map(|m| along(m, self.angle_deg))
            .collect()
    }
}

/// `m (cos angle, sin angle)`.
pub fn along(magnitude: f64, angle_deg: f64) -> Frequency {
    let (s, c) = angle_deg.to_radians().sin_cos();
    Frequency::new(magnitude * c, magnitude * s)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub phi: f64,
    pub residual: f64,
    pub cross_check: f64,
}

impl Tolerances {
    fn validate(&self) -> Result<(), CliError> {
        for (name, v) in [
            ("phi-tol", self.phi),
            ("residual-tol", self.residual),
            ("cross-check-tol", self.cross_check),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(CliError::Config(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// Where a command writes; unused entries stay `None`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct OutputPaths {
    pub csv: Option<PathBuf>,
    pub svg: Option<PathBuf>,
    pub json: Option<PathBuf>,
}

/// Validated configuration of one run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub params: FluidParams,
    pub mag: MagneticConfig,
    /// Whether `|B|` was given explicitly.
    pub field_given: bool,
    pub mesh: MeshSpec,
    pub grid: Option<GridSpec>,
    pub tolerances: Tolerances,
    pub outputs: OutputPaths,
    pub seed: u64,
}

impl RunConfig {
    pub fn new(
        common: &CommonArgs,
        grid: Option<GridSpec>,
        outputs: OutputPaths,
    ) -> Result<Self, CliError> {
        let params = FluidParams::new(
            common.rho_plus,
            common.rho_minus,
            common.mu_plus,
            common.mu_minus,
            common.g,
        )?;
        let mag = MagneticConfig::new(common.orientation, common.field.unwrap_or(0.0))?;
        let tolerances = Tolerances {
            phi: common.phi_tol,
            residual: common.residual_tol,
            cross_check: common.cross_check_tol,
        };
        tolerances.validate()?;
        if let Some(g) = &grid {
            g.validate()?;
        }
        Ok(Self {
            params,
            mag,
            field_given: common.field.is_some(),
            mesh: MeshSpec {
                n_per_side: common.n,
                grading: common.grading,
            },
            grid,
            tolerances,
            outputs,
            seed: common.seed,
        })
    }
}

/// Parses a flat `key = value` file. Blank lines and `#` comments are
/// skipped; `_` in keys is read as `-`.
pub fn parse_config_file(text: &str) -> Result<Vec<(String, String)>, CliError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            CliError::Usage(format!(
                "config line {}: expected key=value, got {raw:?}",
                i + 1
            ))
        })?;
        let key = key.trim().replace('_', "-");
        let value = value.trim().trim_matches('"').to_string();
        if key.is_empty() {
            return Err(CliError::Usage(format!("config line {}: empty key", i + 1)));
        }
        out.push((key, value));
    }
    Ok(out)
}

/// Value of `--config` in `args`, if present.
fn config_path(args: &[OsString]) -> Option<PathBuf> {
    let mut it = args.iter();
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            return it.next().map(PathBuf::from);
        }
        if let Some(rest) = s.strip_prefix("--config=") {
            return Some(PathBuf::from(rest));
        }
    }
    None
}

/// Inserts the config file's entries as `--key=value` flags right after the
/// subcommand, so any later flag on the command line overrides them.
///
/// Keys that belong to a different subcommand are skipped, which lets one
/// file serve every command; keys unknown to all of them are rejected.
pub fn expand_config(
    args: Vec<OsString>,
    command: &clap::Command,
) -> Result<Vec<OsString>, CliError> {
    let Some(sub_name) = args.get(1).map(|s| s.to_string_lossy().into_owned()) else {
        return Ok(args);
    };
    let Some(sub) = command.find_subcommand(&sub_name) else {
        return Ok(args);
    };
    let Some(path) = config_path(&args[2..]) else {
        return Ok(args);
    };
    let entries = read_config(&path)?;
    let local = long_flags(sub);
    let all: BTreeSet<String> = command.get_subcommands().flat_map(long_flags).collect();
    let mut injected = Vec::new();
    for (key, value) in entries {
        if key == "config" {
            return Err(CliError::Usage(format!(
                "{}: nested config files are not supported",
                path.display()
            )));
        }
        if local.contains(&key) {
            injected.push(OsString::from(format!("--{key}={value}")));
        } else if !all.contains(&key) {
            return Err(CliError::Usage(format!(
                "{}: unknown key {key:?}",
                path.display()
            )));
        }
    }
    let mut out = Vec::with_capacity(args.len() + injected.len());
    out.extend(args[..2].iter().cloned());
    out.extend(injected);
    out.extend(args[2..].iter().cloned());
    Ok(out)
}

fn read_config(path: &Path) -> Result<Vec<(String, String)>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(path.to_path_buf(), e))?;
    parse_config_file(&text)
}

fn long_flags(cmd: &clap::Command) -> BTreeSet<String> {
    cmd.get_arguments()
        .flat_map(|a| {
            a.get_long()
                .into_iter()
                .chain(a.get_all_aliases().into_iter().flatten())
        })
        .map(str::to_string)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_syntax() {
        let parsed = parse_config_file(
            "# comment\nrho_plus = 3\n\n  B=0.4 # trailing\nout-csv = \"a b.csv\"\n",
        )
        .unwrap();
        assert_eq!(
            parsed,
            vec![
                ("rho-plus".to_string(), "3".to_string()),
                ("B".to_string(), "0.4".to_string()),
                ("out-csv".to_string(), "a b.csv".to_string()),
            ]
        );
        assert!(matches!(
            parse_config_file("novalue"),
            Err(CliError::Usage(_))
        ));
    }

    #[test]
    fn grid_endpoints() {
        for spacing in [Spacing::Linear, Spacing::Log] {
            let g = GridSpec {
                min: 0.5,
                max: 8.0,
                count: 5,
                spacing,
                angle_deg: 0.0,
            };
            let m = g.magnitudes();
            assert_eq!(m.len(), 5);
            assert_eq!(m[0], 0.5);
            assert!((m[4] / 8.0 - 1.0).abs() < 1e-15);
            assert!(m.windows(2).all(|w| w[1] > w[0]));
        }
    }

    #[test]
    fn angle_keeps_magnitude() {
        let xi = along(2.0, 30.0);
        assert!((xi.magnitude() - 2.0).abs() < 1e-15);
        assert!(xi.xi2 > 0.0);
    }
}
