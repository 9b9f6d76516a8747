//! Finite element spaces on the interface mesh and the energy forms.
//!
//! Matrices returned here represent quadratic forms directly: for a
//! coefficient vector `x` of a discrete field `psi`, `x^T A x` is the value of
//! the form, `1/2` prefactors included.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::mesh::InterfaceMesh;
use crate::params::{FluidParams, Frequency, MagneticConfig, Orientation, Side};

/// 4-point Gauss-Legendre rule mapped to `[0, 1]`; exact to degree 7.
pub(crate) const GAUSS_POINTS: [f64; 4] = [
    0.069_431_844_202_973_71,
    0.330_009_478_207_571_9,
    0.669_990_521_792_428_1,
    0.930_568_155_797_026_3,
];
pub(crate) const GAUSS_WEIGHTS: [f64; 4] = [
    0.173_927_422_568_726_93,
    0.326_072_577_431_273_07,
    0.326_072_577_431_273_07,
    0.173_927_422_568_726_93,
];

/// Values and first three `x`-derivatives of the four cubic Hermite shape
/// functions on an element of length `h`, at local coordinate `t` in `[0, 1]`.
///
/// Local order: value at left node, slope at left node, value at right node,
/// slope at right node.
pub(crate) fn hermite_basis(t: f64, h: f64) -> [[f64; 4]; 4] {
    let t2 = t * t;
    let t3 = t2 * t;
    let val = [
        1.0 - 3.0 * t2 + 2.0 * t3,
        h * (t - 2.0 * t2 + t3),
        3.0 * t2 - 2.0 * t3,
        h * (-t2 + t3),
    ];
    let d1 = [
        (-6.0 * t + 6.0 * t2) / h,
        1.0 - 4.0 * t + 3.0 * t2,
        (6.0 * t - 6.0 * t2) / h,
        -2.0 * t + 3.0 * t2,
    ];
    let d2 = [
        (-6.0 + 12.0 * t) / (h * h),
        (-4.0 + 6.0 * t) / h,
        (6.0 - 12.0 * t) / (h * h),
        (-2.0 + 6.0 * t) / h,
    ];
    let d3 = [
        12.0 / (h * h * h),
        6.0 / (h * h),
        -12.0 / (h * h * h),
        6.0 / (h * h),
    ];
    // d[k][i]: k-th derivative of shape function i
    [val, d1, d2, d3]
}

/// Value and derivatives `(psi, psi', psi'', psi''')` at a point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Jet {
    pub v: f64,
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
}

/// Clamped, C^1 piecewise-cubic Hermite space: discrete `H_0^2(-1, 1)`.
///
/// Every interior node carries a value and a slope; both vanish at `±1`.
#[derive(Debug, Clone, PartialEq)]
pub struct HermiteSpace {
    mesh: InterfaceMesh,
}

impl HermiteSpace {
    pub fn new(mesh: InterfaceMesh) -> Self {
        Self { mesh }
    }

    pub fn mesh(&self) -> &InterfaceMesh {
        &self.mesh
    }

    pub fn dof_count(&self) -> usize {
        2 * (self.mesh.node_count() - 2)
    }

    /// Degree of freedom holding `psi(0)`.
    pub fn interface_dof(&self) -> usize {
        2 * (self.mesh.interface_index() - 1)
    }

    /// Global dof indices of element `e` (`None` for clamped boundary dofs).
    pub(crate) fn element_dofs(&self, e: usize) -> [Option<usize>; 4] {
        let last = self.mesh.node_count() - 1;
        let node = |i: usize, k: usize| {
            if i == 0 || i == last {
                None
            } else {
                Some(2 * (i - 1) + k)
            }
        };
        [node(e, 0), node(e, 1), node(e + 1, 0), node(e + 1, 1)]
    }

    fn local_coeffs(&self, c: &DVector<f64>, e: usize) -> [f64; 4] {
        self.element_dofs(e).map(|d| d.map_or(0.0, |k| c[k]))
    }

    /// Jet of the field on element `e` at local coordinate `t`.
    pub fn jet_on_element(&self, c: &DVector<f64>, e: usize, t: f64) -> Jet {
        let h = self.mesh.element_len(e);
        let b = hermite_basis(t, h);
        let lc = self.local_coeffs(c, e);
        let dot = |k: usize| (0..4).map(|i| b[k][i] * lc[i]).sum::<f64>();
        Jet {
            v: dot(0),
            d1: dot(1),
            d2: dot(2),
            d3: dot(3),
        }
    }

    /// Jet at `x`; at nodes the element on the right is used (left at `x = 1`).
    pub fn jet(&self, c: &DVector<f64>, x: f64) -> Option<Jet> {
        let e = self.mesh.locate(x)?;
        let (a, b) = self.mesh.element(e);
        Some(self.jet_on_element(c, e, (x - a) / (b - a)))
    }

    /// One-sided jet at the interface from the element adjacent on `side`.
    pub fn interface_jet(&self, c: &DVector<f64>, side: Side) -> Jet {
        let i0 = self.mesh.interface_index();
        match side {
            Side::Minus => self.jet_on_element(c, i0 - 1, 1.0),
            Side::Plus => self.jet_on_element(c, i0, 0.0),
        }
    }

    /// One-sided jet at a wall (`Minus` for `x = -1`).
    pub fn wall_jet(&self, c: &DVector<f64>, side: Side) -> Jet {
        match side {
            Side::Minus => self.jet_on_element(c, 0, 0.0),
            Side::Plus => self.jet_on_element(c, self.mesh.element_count() - 1, 1.0),
        }
    }

    /// Hermite interpolant of a function given as `x -> (f(x), f'(x))`.
    pub fn interpolate<F>(&self, f: F) -> DVector<f64>
    where
        F: Fn(f64) -> (f64, f64),
    {
        let nodes = self.mesh.nodes();
        let mut c = DVector::zeros(self.dof_count());
        for (i, &x) in nodes.iter().enumerate().skip(1).take(nodes.len() - 2) {
            let (v, d) = f(x);
            c[2 * (i - 1)] = v;
            c[2 * (i - 1) + 1] = d;
        }
        c
    }
}

/// Bilinear integrand `a(psi, phi)` given the jets of both arguments.
trait Integrand {
    fn eval(&self, side: Side, u: &[f64; 3], w: &[f64; 3]) -> f64;
}

impl<F: Fn(Side, &[f64; 3], &[f64; 3]) -> f64> Integrand for F {
    fn eval(&self, side: Side, u: &[f64; 3], w: &[f64; 3]) -> f64 {
        self(side, u, w)
    }
}

/// Assembles `int a(phi_i, phi_j)` over all elements with the 4-point rule.
fn assemble_hermite(space: &HermiteSpace, integrand: &dyn Integrand) -> DMatrix<f64> {
    let n = space.dof_count();
    let mesh = space.mesh();
    let mut a = DMatrix::zeros(n, n);
    for e in 0..mesh.element_count() {
        let h = mesh.element_len(e);
        let side = mesh.side(e);
        let dofs = space.element_dofs(e);
        let mut local = [[0.0f64; 4]; 4];
        for (t, w) in GAUSS_POINTS.iter().zip(GAUSS_WEIGHTS.iter()) {
            let b = hermite_basis(*t, h);
            let jets: [[f64; 3]; 4] = std::array::from_fn(|i| [b[0][i], b[1][i], b[2][i]]);
            for i in 0..4 {
                for j in i..4 {
                    local[i][j] += w * h * integrand.eval(side, &jets[i], &jets[j]);
                }
            }
        }
        for i in 0..4 {
            for j in i..4 {
                let (Some(gi), Some(gj)) = (dofs[i], dofs[j]) else {
                    continue;
                };
                a[(gi, gj)] += local[i][j];
                if gi != gj {
                    a[(gj, gi)] += local[i][j];
                }
            }
        }
    }
    a
}

/// Coefficients of `m psi phi + k psi' phi' + c psi'' phi'' + x (psi phi'' + psi'' phi)`.
#[derive(Debug, Clone, Copy, Default)]
struct Weights {
    mass: f64,
    grad: f64,
    curv: f64,
    cross: f64,
}

impl Weights {
    fn apply(&self, u: &[f64; 3], w: &[f64; 3]) -> f64 {
        self.mass * u[0] * w[0]
            + self.grad * u[1] * w[1]
            + self.curv * u[2] * w[2]
            + self.cross * (u[0] * w[2] + u[2] * w[0])
    }
}

fn assemble_weighted<F: Fn(Side) -> Weights>(space: &HermiteSpace, weights: F) -> DMatrix<f64> {
    let minus = weights(Side::Minus);
    let plus = weights(Side::Plus);
    let integrand = move |side: Side, u: &[f64; 3], w: &[f64; 3]| match side {
        Side::Minus => minus.apply(u, w),
        Side::Plus => plus.apply(u, w),
    };
    assemble_hermite(space, &integrand)
}

fn add_interface_term(space: &HermiteSpace, a: &mut DMatrix<f64>, coeff: f64) {
    let k = space.interface_dof();
    a[(k, k)] += coeff;
}

/// Kinetic form `J(psi) = 1/2 int rho (|xi|^2 psi^2 + psi'^2)`.
pub fn assemble_j(
    space: &HermiteSpace,
    params: &FluidParams,
    xi: &Frequency,
) -> Result<DMatrix<f64>> {
    xi.require_nonzero()?;
    let k2 = xi.magnitude_sq();
    Ok(assemble_weighted(space, |side| {
        let rho = params.rho(side);
        Weights {
            mass: 0.5 * rho * k2,
            grad: 0.5 * rho,
            ..Weights::default()
        }
    }))
}

/// Vertical-field form
/// `E0(psi) = 1/2 int |B|^2 (psi'^2 + psi''^2 / |xi|^2) - 1/2 g [rho] psi(0)^2`.
pub fn assemble_e0_vertical(
    space: &HermiteSpace,
    params: &FluidParams,
    mag: &MagneticConfig,
    xi: &Frequency,
) -> Result<DMatrix<f64>> {
    if mag.orientation != Orientation::Vertical {
        return Err(Error::OrientationMismatch {
            expected: Orientation::Vertical.name(),
            got: mag.orientation.name(),
        });
    }
    xi.require_nonzero()?;
    let b2 = mag.b2();
    let k2 = xi.magnitude_sq();
    let mut a = assemble_weighted(space, |_| Weights {
        grad: 0.5 * b2,
        curv: 0.5 * b2 / k2,
        ..Weights::default()
    });
    add_interface_term(space, &mut a, -0.5 * params.buoyancy());
    Ok(a)
}

/// Horizontal-field form
/// `(xi1^2/|xi|^2) 1/2 int |B|^2 (|xi|^2 psi^2 + psi'^2) - 1/2 g [rho] psi(0)^2`.
///
/// Modes with `xi1 = 0` see no magnetic stabilization at all.
pub fn assemble_e0_horizontal(
    space: &HermiteSpace,
    params: &FluidParams,
    mag: &MagneticConfig,
    xi: &Frequency,
) -> Result<DMatrix<f64>> {
    if mag.orientation != Orientation::Horizontal {
        return Err(Error::OrientationMismatch {
            expected: Orientation::Horizontal.name(),
            got: mag.orientation.name(),
        });
    }
    xi.require_nonzero()?;
    let k2 = xi.magnitude_sq();
    let scale = 0.5 * mag.b2() * xi.along_field_fraction();
    let mut a = assemble_weighted(space, |_| Weights {
        mass: scale * k2,
        grad: scale,
        ..Weights::default()
    });
    add_interface_term(space, &mut a, -0.5 * params.buoyancy());
    Ok(a)
}

/// `E0` for whichever orientation `mag` carries.
pub fn assemble_e0(
    space: &HermiteSpace,
    params: &FluidParams,
    mag: &MagneticConfig,
    xi: &Frequency,
) -> Result<DMatrix<f64>> {
    match mag.orientation {
        Orientation::Vertical => assemble_e0_vertical(space, params, mag, xi),
        Orientation::Horizontal => assemble_e0_horizontal(space, params, mag, xi),
    }
}

/// Viscous form `E1(psi) = 1/2 int mu (4|xi|^2 psi'^2 + (|xi|^2 psi + psi'')^2)`.
pub fn assemble_e1(
    space: &HermiteSpace,
    params: &FluidParams,
    xi: &Frequency,
) -> Result<DMatrix<f64>> {
    xi.require_nonzero()?;
    let k2 = xi.magnitude_sq();
    Ok(assemble_weighted(space, |side| {
        let mu = params.mu(side);
        Weights {
            mass: 0.5 * mu * k2 * k2,
            grad: 0.5 * mu * 4.0 * k2,
            curv: 0.5 * mu,
            cross: 0.5 * mu * k2,
        }
    }))
}

/// Modified energy `E` with viscosity `s mu`, assembled straight from its
/// integrand rather than from `|xi|^2 E0 + s E1`.
pub fn assemble_full_energy(
    space: &HermiteSpace,
    params: &FluidParams,
    mag: &MagneticConfig,
    xi: &Frequency,
    s: f64,
) -> Result<DMatrix<f64>> {
    xi.require_nonzero()?;
    let k2 = xi.magnitude_sq();
    let b2 = mag.b2();
    let x1sq = xi.xi1 * xi.xi1;
    let orientation = mag.orientation;
    let integrand = move |side: Side, u: &[f64; 3], w: &[f64; 3]| {
        let smu = s * params.mu(side);
        let viscous = smu * (4.0 * k2 * u[1] * w[1] + (k2 * u[0] + u[2]) * (k2 * w[0] + w[2]));
        let magnetic = match orientation {
            Orientation::Vertical => b2 * (k2 * u[1] * w[1] + u[2] * w[2]),
            Orientation::Horizontal => b2 * x1sq * (k2 * u[0] * w[0] + u[1] * w[1]),
        };
        0.5 * (viscous + magnetic)
    };
    let mut a = assemble_hermite(space, &integrand);
    add_interface_term(space, &mut a, -0.5 * k2 * params.buoyancy());
    Ok(a)
}

/// `1/2 int psi'^2` on the Hermite space, used for coercivity bounds.
pub fn assemble_gradient_form(space: &HermiteSpace) -> DMatrix<f64> {
    assemble_weighted(space, |_| Weights {
        grad: 0.5,
        ..Weights::default()
    })
}

/// `int psi'^2` and `int psi''^2` on the Hermite space (no `1/2`).
pub(crate) fn assemble_slope_and_curvature(space: &HermiteSpace) -> (DMatrix<f64>, DMatrix<f64>) {
    let k1 = assemble_weighted(space, |_| Weights {
        grad: 1.0,
        ..Weights::default()
    });
    let k2 = assemble_weighted(space, |_| Weights {
        curv: 1.0,
        ..Weights::default()
    });
    (k1, k2)
}

/// `int psi^2` on the Hermite space.
pub(crate) fn assemble_hermite_mass(space: &HermiteSpace) -> DMatrix<f64> {
    assemble_weighted(space, |_| Weights {
        mass: 1.0,
        ..Weights::default()
    })
}

/// The forms entering the modified eigenvalue problem at one `(xi, B)`.
#[derive(Debug, Clone)]
pub struct FormSet {
    pub j: DMatrix<f64>,
    pub e0: DMatrix<f64>,
    pub e1: DMatrix<f64>,
    pub params: FluidParams,
    pub mag: MagneticConfig,
    pub xi: Frequency,
}

impl FormSet {
    pub fn assemble(
        space: &HermiteSpace,
        params: &FluidParams,
        mag: &MagneticConfig,
        xi: &Frequency,
    ) -> Result<Self> {
        Ok(Self {
            j: assemble_j(space, params, xi)?,
            e0: assemble_e0(space, params, mag, xi)?,
            e1: assemble_e1(space, params, xi)?,
            params: *params,
            mag: *mag,
            xi: *xi,
        })
    }

    /// `|xi|^2 E0 + s E1`.
    pub fn energy(&self, s: f64) -> DMatrix<f64> {
        &self.e0 * self.xi.magnitude_sq() + &self.e1 * s
    }
}

/// `J`, `E0` and `E1` evaluated at one coefficient vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FormValues {
    pub j: f64,
    pub e0: f64,
    pub e1: f64,
}

impl FormValues {
    /// Rayleigh quotient `(|xi|^2 E0 + s E1) / J`.
    pub fn quotient(&self, k2: f64, s: f64) -> f64 {
        (k2 * self.e0 + s * self.e1) / self.j
    }
}

/// Form values at `c`, integrated from the pointwise jets of `c`.
///
/// Every integrand is a sum of squares, so rounding is relative to the size
/// of the forms themselves. `x^T A x` on the assembled matrices instead loses
/// `eps * ||A|| * |x|^2`, which is large on fine meshes.
pub fn form_values(
    space: &HermiteSpace,
    params: &FluidParams,
    mag: &MagneticConfig,
    xi: &Frequency,
    c: &DVector<f64>,
) -> Result<FormValues> {
    xi.require_nonzero()?;
    let k2 = xi.magnitude_sq();
    let b2 = mag.b2();
    let along = xi.along_field_fraction();
    let mesh = space.mesh();
    let (mut j, mut e0, mut e1) = (0.0, 0.0, 0.0);
    for e in 0..mesh.element_count() {
        let h = mesh.element_len(e);
        let side = mesh.side(e);
        let (rho, mu) = (params.rho(side), params.mu(side));
        for (t, w) in GAUSS_POINTS.iter().zip(GAUSS_WEIGHTS.iter()) {
            let p = space.jet_on_element(c, e, *t);
            let wh = 0.5 * w * h;
            j += wh * rho * (k2 * p.v * p.v + p.d1 * p.d1);
            e0 += wh
                * match mag.orientation {
                    Orientation::Vertical => b2 * (p.d1 * p.d1 + p.d2 * p.d2 / k2),
                    Orientation::Horizontal => b2 * along * (k2 * p.v * p.v + p.d1 * p.d1),
                };
            let bend = k2 * p.v + p.d2;
            e1 += wh * mu * (4.0 * k2 * p.d1 * p.d1 + bend * bend);
        }
    }
    let psi0 = c[space.interface_dof()];
    e0 -= 0.5 * params.buoyancy() * psi0 * psi0;
    Ok(FormValues { j, e0, e1 })
}

/// Quadratic form value `x^T A x`.
pub fn form_value(a: &DMatrix<f64>, x: &DVector<f64>) -> f64 {
    x.dot(&(a * x))
}

/// Entrywise asymmetry `max |A - A^T| / max |A|`.
pub fn relative_asymmetry(a: &DMatrix<f64>) -> f64 {
    let scale = a.amax();
    if scale == 0.0 {
        return 0.0;
    }
    (a - a.transpose()).amax() / scale
}

/// Continuous piecewise-linear space vanishing at `±1`: discrete `H_0^1(-1, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSpace {
    mesh: InterfaceMesh,
}

impl LinearSpace {
    pub fn new(mesh: InterfaceMesh) -> Self {
        Self { mesh }
    }

    pub fn mesh(&self) -> &InterfaceMesh {
        &self.mesh
    }

    pub fn dof_count(&self) -> usize {
        self.mesh.node_count() - 2
    }

    pub fn interface_dof(&self) -> usize {
        self.mesh.interface_index() - 1
    }

    pub fn interpolate<F: Fn(f64) -> f64>(&self, f: F) -> DVector<f64> {
        let nodes = self.mesh.nodes();
        DVector::from_iterator(
            self.dof_count(),
            nodes[1..nodes.len() - 1].iter().map(|&x| f(x)),
        )
    }

    pub fn value(&self, c: &DVector<f64>, x: f64) -> Option<f64> {
        let e = self.mesh.locate(x)?;
        let (a, b) = self.mesh.element(e);
        let nodal = |i: usize| {
            if i == 0 || i == self.mesh.node_count() - 1 {
                0.0
            } else {
                c[i - 1]
            }
        };
        let t = (x - a) / (b - a);
        Some((1.0 - t) * nodal(e) + t * nodal(e + 1))
    }
}

/// Symmetric tridiagonal matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl Tridiagonal {
    pub fn zeros(n: usize) -> Self {
        Self {
            diag: vec![0.0; n],
            off: vec![0.0; n.saturating_sub(1)],
        }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn mul_vec(&self, x: &DVector<f64>) -> DVector<f64> {
        let n = self.len();
        DVector::from_fn(n, |i, _| {
            let mut y = self.diag[i] * x[i];
            if i > 0 {
                y += self.off[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                y += self.off[i] * x[i + 1];
            }
            y
        })
    }

    pub fn quad(&self, x: &DVector<f64>) -> f64 {
        x.dot(&self.mul_vec(x))
    }

    /// `self + c * other`.
    pub fn add_scaled(&self, c: f64, other: &Tridiagonal) -> Tridiagonal {
        Tridiagonal {
            diag: self
                .diag
                .iter()
                .zip(&other.diag)
                .map(|(a, b)| a + c * b)
                .collect(),
            off: self
                .off
                .iter()
                .zip(&other.off)
                .map(|(a, b)| a + c * b)
                .collect(),
        }
    }

    pub fn scaled(&self, c: f64) -> Tridiagonal {
        Tridiagonal {
            diag: self.diag.iter().map(|a| c * a).collect(),
            off: self.off.iter().map(|a| c * a).collect(),
        }
    }

    /// Solves `A x = b` by elimination without pivoting; `None` on a zero or
    /// negative pivot, so success certifies positive definiteness.
    pub fn solve_spd(&self, b: &DVector<f64>) -> Option<DVector<f64>> {
        let n = self.len();
        let mut c = vec![0.0; n];
        let mut d = vec![0.0; n];
        let mut pivot = self.diag[0];
        if pivot.is_nan() || pivot <= 0.0 {
            return None;
        }
        c[0] = if n > 1 { self.off[0] / pivot } else { 0.0 };
        d[0] = b[0] / pivot;
        for i in 1..n {
            pivot = self.diag[i] - self.off[i - 1] * c[i - 1];
            if pivot.is_nan() || pivot <= 0.0 {
                return None;
            }
            if i + 1 < n {
                c[i] = self.off[i] / pivot;
            }
            d[i] = (b[i] - self.off[i - 1] * d[i - 1]) / pivot;
        }
        let mut x = DVector::zeros(n);
        x[n - 1] = d[n - 1];
        for i in (0..n - 1).rev() {
            x[i] = d[i] - c[i] * x[i + 1];
        }
        Some(x)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.len();
        let mut a = DMatrix::zeros(n, n);
        for i in 0..n {
            a[(i, i)] = self.diag[i];
            if i + 1 < n {
                a[(i, i + 1)] = self.off[i];
                a[(i + 1, i)] = self.off[i];
            }
        }
        a
    }
}

/// The three forms of the `H_0^1` variational problems.
#[derive(Debug, Clone)]
pub struct H1Forms {
    /// `int psi' phi'`
    pub stiffness: Tridiagonal,
    /// `int psi phi`
    pub mass: Tridiagonal,
    /// Dof index `k` of the rank-one form `psi(0) phi(0) = e_k e_k^T`.
    pub interface_dof: usize,
}

impl H1Forms {
    pub fn interface_value(&self, x: &DVector<f64>) -> f64 {
        x[self.interface_dof] * x[self.interface_dof]
    }

    /// Unit vector at the interface dof.
    pub fn interface_vector(&self) -> DVector<f64> {
        let mut e = DVector::zeros(self.stiffness.len());
        e[self.interface_dof] = 1.0;
        e
    }
}

/// `int w_m(x) psi phi + w_k(x) psi' phi'` on the piecewise-linear space,
/// with coefficients constant on each side of the interface.
pub fn assemble_h1_weighted<F>(space: &LinearSpace, weights: F) -> Tridiagonal
where
    F: Fn(Side) -> (f64, f64),
{
    let mesh = space.mesh();
    let mut a = Tridiagonal::zeros(space.dof_count());
    let last = mesh.node_count() - 1;
    for e in 0..mesh.element_count() {
        let h = mesh.element_len(e);
        let (wm, wk) = weights(mesh.side(e));
        let diag = wm * h / 3.0 + wk / h;
        let off = wm * h / 6.0 - wk / h;
        if e != 0 {
            a.diag[e - 1] += diag;
        }
        if e + 1 != last {
            a.diag[e] += diag;
        }
        if e != 0 && e + 1 != last {
            a.off[e - 1] += off;
        }
    }
    a
}

/// Stiffness, mass and interface forms on the piecewise-linear space.
pub fn assemble_h1_forms(space: &LinearSpace) -> H1Forms {
    H1Forms {
        stiffness: assemble_h1_weighted(space, |_| (0.0, 1.0)),
        mass: assemble_h1_weighted(space, |_| (1.0, 0.0)),
        interface_dof: space.interface_dof(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_mesh;

    fn params() -> FluidParams {
        FluidParams::new(2.0, 1.0, 0.1, 0.3, 1.0).unwrap()
    }

    fn space(n: usize) -> HermiteSpace {
        HermiteSpace::new(build_mesh(n, 0.0).unwrap())
    }

    #[test]
    fn gauss_rule_integrates_degree_seven() {
        for p in 0..=7 {
            let q: f64 = GAUSS_POINTS
                .iter()
                .zip(GAUSS_WEIGHTS.iter())
                .map(|(t, w)| w * t.powi(p))
                .sum();
            assert!((q - 1.0 / (p as f64 + 1.0)).abs() < 1e-15, "degree {p}");
        }
    }

    #[test]
    fn dof_counts() {
        let s = space(4);
        assert_eq!(s.dof_count(), 14);
        assert_eq!(s.interface_dof(), 6);
        let l = LinearSpace::new(build_mesh(4, 0.0).unwrap());
        assert_eq!(l.dof_count(), 7);
        assert_eq!(l.interface_dof(), 3);
    }

    #[test]
    fn zero_field_gives_zero() {
        let s = space(6);
        let p = params();
        let xi = Frequency::planar(1.3);
        let zero = DVector::zeros(s.dof_count());
        let fs = FormSet::assemble(&s, &p, &MagneticConfig::vertical(0.4).unwrap(), &xi).unwrap();
        assert_eq!(form_value(&fs.j, &zero), 0.0);
        assert_eq!(form_value(&fs.e0, &zero), 0.0);
        assert_eq!(form_value(&fs.e1, &zero), 0.0);
        let h =
            assemble_e0_horizontal(&s, &p, &MagneticConfig::horizontal(0.4).unwrap(), &xi).unwrap();
        assert_eq!(form_value(&h, &zero), 0.0);
        let l = LinearSpace::new(build_mesh(6, 0.0).unwrap());
        let h1 = assemble_h1_forms(&l);
        let z = DVector::zeros(l.dof_count());
        assert_eq!(h1.stiffness.quad(&z), 0.0);
        assert_eq!(h1.mass.quad(&z), 0.0);
        assert_eq!(h1.interface_value(&z), 0.0);
    }

    #[test]
    fn degenerate_frequency_rejected() {
        let s = space(4);
        let zero = Frequency::planar(0.0);
        assert_eq!(
            assemble_j(&s, &params(), &zero),
            Err(Error::DegenerateFrequency)
        );
        assert_eq!(
            assemble_e1(&s, &params(), &zero),
            Err(Error::DegenerateFrequency)
        );
    }

    #[test]
    fn orientation_checked() {
        let s = space(4);
        let xi = Frequency::planar(1.0);
        let v = MagneticConfig::vertical(0.5).unwrap();
        let h = MagneticConfig::horizontal(0.5).unwrap();
        assert!(matches!(
            assemble_e0_vertical(&s, &params(), &h, &xi),
            Err(Error::OrientationMismatch { .. })
        ));
        assert!(matches!(
            assemble_e0_horizontal(&s, &params(), &v, &xi),
            Err(Error::OrientationMismatch { .. })
        ));
    }

    #[test]
    fn interface_only_when_field_vanishes() {
        let s = space(8);
        let p = FluidParams::new(2.0, 1.0, 0.1, 0.1, 1.0).unwrap();
        let xi = Frequency::planar(2.0);
        let e0 =
            assemble_e0_vertical(&s, &p, &MagneticConfig::vertical(0.0).unwrap(), &xi).unwrap();
        // any field with psi(0) = 1
        let psi = s.interpolate(|x| {
            let b = 1.0 - x * x;
            (
                b * b * (1.0 + 0.3 * x),
                -4.0 * x * b * (1.0 + 0.3 * x) + 0.3 * b * b,
            )
        });
        assert!((form_value(&e0, &psi) + 0.5).abs() < 1e-14);
    }

    #[test]
    fn across_field_mode_has_no_magnetic_part() {
        let s = space(8);
        let p = params();
        let xi = Frequency::new(0.0, 1.7);
        let h =
            assemble_e0_horizontal(&s, &p, &MagneticConfig::horizontal(0.8).unwrap(), &xi).unwrap();
        let b0 =
            assemble_e0_vertical(&s, &p, &MagneticConfig::vertical(0.0).unwrap(), &xi).unwrap();
        assert_eq!(h, b0);
    }

    #[test]
    fn inviscid_e1_is_zero() {
        let s = space(5);
        let p = params().with_viscosity(0.0, 0.0);
        let e1 = assemble_e1(&s, &p, &Frequency::planar(1.0)).unwrap();
        assert_eq!(e1.amax(), 0.0);
    }

    #[test]
    fn tent_stiffness_is_two() {
        let l = LinearSpace::new(build_mesh(4, 0.0).unwrap());
        let tent = l.interpolate(|x| 1.0 - x.abs());
        let h1 = assemble_h1_forms(&l);
        assert!((h1.stiffness.quad(&tent) - 2.0).abs() < 1e-14);
        assert_eq!(h1.interface_value(&tent), 1.0);
        // int (1-|x|)^2 = 2/3, exact for the interpolant since it is linear per element
        assert!((h1.mass.quad(&tent) - 2.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn tridiagonal_solve_matches_dense() {
        let l = LinearSpace::new(build_mesh(7, 0.5).unwrap());
        let h1 = assemble_h1_forms(&l);
        let a = h1.stiffness.add_scaled(2.0, &h1.mass);
        let b = DVector::from_fn(a.len(), |i, _| (i as f64).sin());
        let x = a.solve_spd(&b).unwrap();
        let r = a.to_dense() * &x - &b;
        assert!(r.amax() < 1e-12);
        assert!(h1.stiffness.scaled(-1.0).solve_spd(&b).is_none());
    }

    #[test]
    fn matrices_symmetric() {
        let s = HermiteSpace::new(build_mesh(9, 0.6).unwrap());
        let p = params();
        let xi = Frequency::new(0.7, 1.1);
        for mag in [
            MagneticConfig::vertical(0.3).unwrap(),
            MagneticConfig::horizontal(0.3).unwrap(),
        ] {
            let fs = FormSet::assemble(&s, &p, &mag, &xi).unwrap();
            for m in [&fs.j, &fs.e0, &fs.e1] {
                assert!(relative_asymmetry(m) <= 1e-13);
            }
        }
    }

    #[test]
    fn jets_continuous_across_nodes() {
        let s = space(6);
        let c = DVector::from_fn(s.dof_count(), |i, _| ((i * 7 % 11) as f64) - 5.0);
        let l = s.interface_jet(&c, Side::Minus);
        let r = s.interface_jet(&c, Side::Plus);
        assert!((l.v - r.v).abs() < 1e-13);
        assert!((l.d1 - r.d1).abs() < 1e-12);
        let w = s.wall_jet(&c, Side::Plus);
        assert_eq!((w.v, w.d1), (0.0, 0.0));
    }
}
