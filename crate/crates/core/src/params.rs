//! Physical parameters, magnetic configuration and Fourier frequencies.

use crate::error::{Error, Result};

/// Densities, viscosities and gravity of the two fluids.
///
/// The `plus` fluid occupies `(0, 1)` (on top), the `minus` fluid `(-1, 0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluidParams {
    pub rho_plus: f64,
    pub rho_minus: f64,
    pub mu_plus: f64,
    pub mu_minus: f64,
    pub g: f64,
}

impl FluidParams {
    /// Validates positivity of densities and gravity and non-negativity of
    /// viscosities. The density ordering is checked separately by
    /// [`FluidParams::require_unstable_stratification`] so that stable
    /// configurations can still be represented and reported.
    pub fn new(rho_plus: f64, rho_minus: f64, mu_plus: f64, mu_minus: f64, g: f64) -> Result<Self> {
        let finite = [rho_plus, rho_minus, mu_plus, mu_minus, g]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidParams("non-finite parameter".into()));
        }
        if rho_plus <= 0.0 || rho_minus <= 0.0 {
            return Err(Error::InvalidParams("densities must be positive".into()));
        }
        if mu_plus < 0.0 || mu_minus < 0.0 {
            return Err(Error::InvalidParams(
                "viscosities must be non-negative".into(),
            ));
        }
        if g <= 0.0 {
            return Err(Error::InvalidParams("gravity must be positive".into()));
        }
        Ok(Self {
            rho_plus,
            rho_minus,
            mu_plus,
            mu_minus,
            g,
        })
    }

    /// `[rho] = rho_plus - rho_minus`.
    pub fn density_jump(&self) -> f64 {
        self.rho_plus - self.rho_minus
    }

    /// `g [rho]`, the destabilizing interface coefficient.
    pub fn buoyancy(&self) -> f64 {
        self.g * self.density_jump()
    }

    pub fn require_unstable_stratification(&self) -> Result<()> {
        let jump = self.density_jump();
        if jump > 0.0 {
            Ok(())
        } else {
            Err(Error::StableConfiguration { jump })
        }
    }

    pub fn rho(&self, side: Side) -> f64 {
        match side {
            Side::Minus => self.rho_minus,
            Side::Plus => self.rho_plus,
        }
    }

    pub fn mu(&self, side: Side) -> f64 {
        match side {
            Side::Minus => self.mu_minus,
            Side::Plus => self.mu_plus,
        }
    }

    /// Same copy with viscosities replaced.
    pub fn with_viscosity(&self, mu_plus: f64, mu_minus: f64) -> Self {
        Self {
            mu_plus,
            mu_minus,
            ..*self
        }
    }

    /// The configuration seen from the reflected slab `x -> -x`.
    pub fn swapped(&self) -> Self {
        Self {
            rho_plus: self.rho_minus,
            rho_minus: self.rho_plus,
            mu_plus: self.mu_minus,
            mu_minus: self.mu_plus,
            g: self.g,
        }
    }
}

/// Which fluid a point or element belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Minus,
    Plus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Orientation {
    Vertical,
    Horizontal,
}

impl Orientation {
    pub fn name(self) -> &'static str {
        match self {
            Orientation::Vertical => "vertical",
            Orientation::Horizontal => "horizontal",
        }
    }
}

impl std::str::FromStr for Orientation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "vertical" | "v" => Ok(Orientation::Vertical),
            "horizontal" | "h" => Ok(Orientation::Horizontal),
            other => Err(Error::InvalidParams(format!(
                "unknown orientation '{other}'"
            ))),
        }
    }
}

/// Equilibrium field: direction and strength `|B|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MagneticConfig {
    pub orientation: Orientation,
    pub magnitude: f64,
}

impl MagneticConfig {
    pub fn new(orientation: Orientation, magnitude: f64) -> Result<Self> {
        if !(magnitude.is_finite() && magnitude >= 0.0) {
            return Err(Error::InvalidParams(
                "field magnitude must be finite and >= 0".into(),
            ));
        }
        Ok(Self {
            orientation,
            magnitude,
        })
    }

    pub fn vertical(magnitude: f64) -> Result<Self> {
        Self::new(Orientation::Vertical, magnitude)
    }

    pub fn horizontal(magnitude: f64) -> Result<Self> {
        Self::new(Orientation::Horizontal, magnitude)
    }

    pub fn b2(&self) -> f64 {
        self.magnitude * self.magnitude
    }

    pub fn with_magnitude(&self, magnitude: f64) -> Self {
        Self { magnitude, ..*self }
    }
}

/// Horizontal wave vector `(xi1, xi2)`; `xi2 = 0` in two dimensions.
///
/// For a horizontal field the field points along `xi1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frequency {
    pub xi1: f64,
    pub xi2: f64,
}

impl Frequency {
    pub fn new(xi1: f64, xi2: f64) -> Self {
        Self { xi1, xi2 }
    }

    /// Planar frequency `(xi, 0)`.
    pub fn planar(xi: f64) -> Self {
        Self { xi1: xi, xi2: 0.0 }
    }

    pub fn magnitude_sq(&self) -> f64 {
        self.xi1 * self.xi1 + self.xi2 * self.xi2
    }

    pub fn magnitude(&self) -> f64 {
        self.xi1.hypot(self.xi2)
    }

    pub fn negated(&self) -> Self {
        Self {
            xi1: -self.xi1,
            xi2: -self.xi2,
        }
    }

    pub(crate) fn require_nonzero(&self) -> Result<()> {
        let m2 = self.magnitude_sq();
        if m2 > 0.0 && m2.is_finite() {
            Ok(())
        } else {
            Err(Error::DegenerateFrequency)
        }
    }

    /// `xi1^2 / |xi|^2`, the fraction of the mode aligned with a horizontal field.
    pub fn along_field_fraction(&self) -> f64 {
        self.xi1 * self.xi1 / self.magnitude_sq()
    }
}
