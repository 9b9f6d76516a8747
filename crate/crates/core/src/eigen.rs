//! Modified eigenvalue problem `alpha(s) = min (|xi|^2 E0 + s E1) / J`.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};
use crate::forms::{form_values, FormSet, HermiteSpace};
use crate::params::{FluidParams, Frequency, MagneticConfig, Orientation, Side};

fn symmetrize(a: &mut DMatrix<f64>) {
    let n = a.nrows();
    for i in 0..n {
        for j in i + 1..n {
            let m = 0.5 * (a[(i, j)] + a[(j, i)]);
            a[(i, j)] = m;
            a[(j, i)] = m;
        }
    }
}

/// Cholesky-reduced form of a symmetric pencil `(K, M)` with `M = L L^T`.
struct Reduced {
    chol: Cholesky<f64, Dyn>,
}

impl Reduced {
    fn new(m: &DMatrix<f64>) -> Result<Self> {
        let chol = Cholesky::new(m.clone()).ok_or(Error::MassMatrix)?;
        Ok(Self { chol })
    }

    /// `L^{-1} K L^{-T}`, symmetrized.
    fn transform(&self, k: &DMatrix<f64>) -> DMatrix<f64> {
        let l = self.chol.l_dirty();
        let x = l
            .solve_lower_triangular(k)
            .expect("Cholesky factor has a positive diagonal");
        let mut c = l
            .solve_lower_triangular(&x.transpose())
            .expect("Cholesky factor has a positive diagonal");
        symmetrize(&mut c);
        c
    }

    /// Maps an eigenvector of the reduced problem back: `x = L^{-T} y`.
    fn back(&self, y: &DVector<f64>) -> DVector<f64> {
        self.chol
            .l_dirty()
            .tr_solve_lower_triangular(y)
            .expect("Cholesky factor has a positive diagonal")
    }

    /// `sqrt(r^T M^{-1} r)`.
    fn dual_norm(&self, r: &DVector<f64>) -> f64 {
        r.dot(&self.chol.solve(r)).max(0.0).sqrt()
    }
}

/// Sign convention for eigenvectors: the largest-magnitude entry is positive.
fn fix_sign(v: &mut DVector<f64>) {
    if let Some((i, _)) = v
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
    {
        if v[i] < 0.0 {
            v.neg_mut();
        }
    }
}

fn extreme_eigenpair(
    k: &DMatrix<f64>,
    m: &DMatrix<f64>,
    largest: bool,
) -> Result<(f64, DVector<f64>)> {
    let red = Reduced::new(m)?;
    let c = red.transform(k);
    let eig = c.symmetric_eigen();
    let pick = eig
        .eigenvalues
        .iter()
        .enumerate()
        .reduce(|a, b| {
            let better = if largest { b.1 > a.1 } else { b.1 < a.1 };
            if better {
                b
            } else {
                a
            }
        })
        .map(|(i, _)| i)
        .expect("non-empty pencil");
    let y = eig.eigenvectors.column(pick).into_owned();
    let mut x = red.back(&y);
    fix_sign(&mut x);
    Ok((eig.eigenvalues[pick], x))
}

/// Algebraically smallest eigenvalue of `K x = lambda M x` with an
/// `M`-normalized eigenvector.
///
/// `M` is Cholesky-factored, the pencil is reduced to the standard symmetric
/// problem `L^{-1} K L^{-T} y = lambda y`, solved densely and mapped back.
pub fn smallest_eigenpair(k: &DMatrix<f64>, m: &DMatrix<f64>) -> Result<(f64, DVector<f64>)> {
    extreme_eigenpair(k, m, false)
}

/// Largest eigenvalue of `K x = lambda M x`; see [`smallest_eigenpair`].
pub fn largest_eigenpair(k: &DMatrix<f64>, m: &DMatrix<f64>) -> Result<(f64, DVector<f64>)> {
    extreme_eigenpair(k, m, true)
}

/// Solution of the modified problem at one `(xi, s)`.
#[derive(Debug, Clone)]
pub struct ModifiedEigenResult {
    /// Smallest eigenvalue of `|xi|^2 E0 + s E1` against `J`; `lambda^2 = -alpha`.
    /// Taken as the Rayleigh quotient of `psi` with pointwise-integrated forms.
    pub alpha: f64,
    /// `d alpha / ds = E1(psi) / J(psi)`.
    pub slope: f64,
    /// Minimizer with `J(psi) = 1` and `psi(0) >= 0`.
    pub psi: DVector<f64>,
    pub s: f64,
    pub xi: Frequency,
    /// `||(K - alpha J) psi||` in the `J^{-1}` norm.
    pub residual: f64,
    /// Spectral norm of `K` relative to `J`, the scale for `residual`.
    pub operator_norm: f64,
}

/// The modified problem at fixed `xi`, reduced once so that `alpha(s)` costs
/// one dense symmetric eigensolve per `s`.
pub struct ModalProblem {
    forms: FormSet,
    reduced: Reduced,
    c0: DMatrix<f64>,
    c1: DMatrix<f64>,
    space: HermiteSpace,
}

impl ModalProblem {
    pub fn new(
        space: &HermiteSpace,
        params: &FluidParams,
        mag: &MagneticConfig,
        xi: &Frequency,
    ) -> Result<Self> {
        let forms = FormSet::assemble(space, params, mag, xi)?;
        let reduced = Reduced::new(&forms.j)?;
        let c0 = reduced.transform(&(&forms.e0 * xi.magnitude_sq()));
        let c1 = reduced.transform(&forms.e1);
        Ok(Self {
            forms,
            reduced,
            c0,
            c1,
            space: space.clone(),
        })
    }

    pub fn forms(&self) -> &FormSet {
        &self.forms
    }

    fn reduced_energy(&self, s: f64) -> DMatrix<f64> {
        &self.c0 + &self.c1 * s
    }

    /// `alpha(s)` only (no eigenvector).
    pub fn alpha(&self, s: f64) -> f64 {
        self.reduced_energy(s)
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// Smallest eigenvalue of `E1` against `J`: the best constant in `E1 >= C3 J`.
    pub fn viscous_floor(&self) -> f64 {
        self.c1
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// Full solve at `s`, with the eigenvector and its residual.
    pub fn solve(&self, s: f64) -> Result<ModifiedEigenResult> {
        if !(s.is_finite() && s >= 0.0) {
            return Err(Error::InvalidParams(format!(
                "modification parameter s = {s} must be >= 0"
            )));
        }
        let c = self.reduced_energy(s);
        let eig = c.clone().symmetric_eigen();
        let (pick, _) =
            eig.eigenvalues
                .iter()
                .copied()
                .enumerate()
                .fold(
                    (0, f64::INFINITY),
                    |acc, (i, v)| if v < acc.1 { (i, v) } else { acc },
                );
        let operator_norm = eig.eigenvalues.amax();
        let y = eig.eigenvectors.column(pick).into_owned();
        let mut psi = self.reduced.back(&y);
        let norm = psi.dot(&(&self.forms.j * &psi)).sqrt();
        psi /= norm;
        let k0 = psi[self.space.interface_dof()];
        if k0 < 0.0 || (k0 == 0.0 && psi.iter().find(|v| **v != 0.0).is_some_and(|v| *v < 0.0)) {
            psi.neg_mut();
        }
        let f = &self.forms;
        let values = form_values(&self.space, &f.params, &f.mag, &f.xi, &psi)?;
        let alpha = values.quotient(f.xi.magnitude_sq(), s);
        let r = f.energy(s) * &psi - &f.j * &psi * alpha;
        let residual = self.reduced.dual_norm(&r);
        Ok(ModifiedEigenResult {
            alpha,
            slope: values.e1 / values.j,
            psi,
            s,
            xi: self.forms.xi,
            residual,
            operator_norm,
        })
    }

    /// `||(lambda^2 J + lambda E1 + |xi|^2 E0) psi||` in the `J^{-1}` norm.
    pub fn pencil_residual(&self, lambda: f64, psi: &DVector<f64>) -> f64 {
        let f = &self.forms;
        let r = &f.j * psi * (lambda * lambda)
            + &f.e1 * psi * lambda
            + &f.e0 * psi * f.xi.magnitude_sq();
        self.reduced.dual_norm(&r)
    }

    /// `sqrt(r^T J^{-1} r)`.
    pub fn dual_norm(&self, r: &DVector<f64>) -> f64 {
        self.reduced.dual_norm(r)
    }
}

/// `alpha(s)` and its minimizer for the given configuration.
pub fn alpha_of_s(
    s: f64,
    params: &FluidParams,
    mag: &MagneticConfig,
    xi: &Frequency,
    space: &HermiteSpace,
) -> Result<ModifiedEigenResult> {
    ModalProblem::new(space, params, mag, xi)?.solve(s)
}

/// `psi'''(0)` from one side, extrapolated linearly from the midpoints of the
/// two elements next to the interface.
///
/// On cubic elements `psi'''` is constant and its one-sided trace is only
/// first-order accurate; at element midpoints it superconverges, so the
/// extrapolated trace is second order.
fn third_derivative_trace(space: &HermiteSpace, c: &DVector<f64>, side: Side) -> f64 {
    let mesh = space.mesh();
    let i0 = mesh.interface_index();
    let (near, far) = match side {
        Side::Plus => (i0, i0 + 1),
        Side::Minus => (i0 - 1, i0 - 2),
    };
    let mid = |e: usize| {
        let (a, b) = mesh.element(e);
        (0.5 * (a + b), space.jet_on_element(c, e, 0.5).d3)
    };
    let ((x1, v1), (x2, v2)) = (mid(near), mid(far));
    v1 - x1 * (v2 - v1) / (x2 - x1)
}

/// Normalized defects of the two natural interface conditions at `x = 0`.
///
/// `r1` measures the jump of `s mu (|xi|^2 psi + psi'') + |B|^2 psi''`
/// (vertical; no field term for a horizontal field). `r2` measures
/// `[[s mu (psi''' - 3|xi|^2 psi') + |B|^2 psi''']] - [[lambda^2 rho psi']] - g [rho] |xi|^2 psi(0)`
/// with `lambda^2 = -alpha`. Each is divided by the largest single term entering it.
/// Third derivatives are recovered traces (see `third_derivative_trace`).
pub fn jump_residuals(
    result: &ModifiedEigenResult,
    params: &FluidParams,
    mag: &MagneticConfig,
    space: &HermiteSpace,
) -> (f64, f64) {
    let k2 = result.xi.magnitude_sq();
    let s = result.s;
    let lambda2 = -result.alpha;
    let b2 = match mag.orientation {
        Orientation::Vertical => mag.b2(),
        Orientation::Horizontal => 0.0,
    };
    let jet = |side| {
        let mut j = space.interface_jet(&result.psi, side);
        j.d3 = third_derivative_trace(space, &result.psi, side);
        j
    };
    let (m, p) = (jet(Side::Minus), jet(Side::Plus));
    let smu = |side| s * params.mu(side);

    let first = |side: Side, j: &crate::forms::Jet| [smu(side) * (k2 * j.v + j.d2), b2 * j.d2];
    let (fm, fp) = (first(Side::Minus, &m), first(Side::Plus, &p));
    let r1_num = (fp[0] + fp[1]) - (fm[0] + fm[1]);
    let r1_scale = fm
        .iter()
        .chain(fp.iter())
        .fold(0.0f64, |a, v| a.max(v.abs()));

    let third = |side: Side, j: &crate::forms::Jet| {
        [
            smu(side) * (j.d3 - 3.0 * k2 * j.d1),
            b2 * j.d3,
            lambda2 * params.rho(side) * j.d1,
        ]
    };
    let (tm, tp) = (third(Side::Minus, &m), third(Side::Plus, &p));
    let interface = params.buoyancy() * k2 * 0.5 * (m.v + p.v);
    let r2_num = (tp[0] + tp[1] - tm[0] - tm[1]) - (tp[2] - tm[2]) - interface;
    let r2_scale = tm
        .iter()
        .chain(tp.iter())
        .fold(interface.abs(), |a, v| a.max(v.abs()));

    let ratio = |num: f64, scale: f64| if scale > 0.0 { num.abs() / scale } else { 0.0 };
    (ratio(r1_num, r1_scale), ratio(r2_num, r2_scale))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::form_value;
    use crate::mesh::build_mesh;

    #[test]
    fn identity_pencil() {
        let m = DMatrix::from_row_slice(3, 3, &[2.0, 0.5, 0.0, 0.5, 3.0, 0.1, 0.0, 0.1, 1.0]);
        let (v, x) = smallest_eigenpair(&m, &m).unwrap();
        assert!((v - 1.0).abs() < 1e-13);
        assert!((form_value(&m, &x) - 1.0).abs() < 1e-13);
    }

    #[test]
    fn diagonal_pencil() {
        let k = DMatrix::from_diagonal(&DVector::from_vec(vec![-2.0, 5.0]));
        let m = DMatrix::identity(2, 2);
        let (v, x) = smallest_eigenpair(&k, &m).unwrap();
        assert_eq!(v, -2.0);
        assert!((x[0] - 1.0).abs() < 1e-15 && x[1].abs() < 1e-15);
        let (w, _) = largest_eigenpair(&k, &m).unwrap();
        assert_eq!(w, 5.0);
    }

    #[test]
    fn indefinite_mass_rejected() {
        let k = DMatrix::identity(2, 2);
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, -1.0]));
        assert_eq!(smallest_eigenpair(&k, &m).unwrap_err(), Error::MassMatrix);
    }

    #[test]
    fn negative_s_rejected() {
        let space = HermiteSpace::new(build_mesh(4, 0.0).unwrap());
        let p = FluidParams::new(2.0, 1.0, 0.1, 0.1, 1.0).unwrap();
        let r = alpha_of_s(
            -1.0,
            &p,
            &MagneticConfig::vertical(0.3).unwrap(),
            &Frequency::planar(1.0),
            &space,
        );
        assert!(r.is_err());
    }

    #[test]
    fn zero_field_has_zero_jump_residuals() {
        let space = HermiteSpace::new(build_mesh(4, 0.0).unwrap());
        let p = FluidParams::new(2.0, 1.0, 0.1, 0.1, 1.0).unwrap();
        let res = ModifiedEigenResult {
            alpha: -0.3,
            slope: 0.0,
            psi: DVector::zeros(space.dof_count()),
            s: 0.2,
            xi: Frequency::planar(1.0),
            residual: 0.0,
            operator_norm: 1.0,
        };
        let (r1, r2) = jump_residuals(&res, &p, &MagneticConfig::vertical(0.3).unwrap(), &space);
        assert_eq!((r1, r2), (0.0, 0.0));
    }

    #[test]
    fn minimizer_is_j_normalized_with_small_residual() {
        let space = HermiteSpace::new(build_mesh(12, 0.0).unwrap());
        let p = FluidParams::new(2.0, 1.0, 0.1, 0.2, 1.0).unwrap();
        let mag = MagneticConfig::vertical(0.3).unwrap();
        let xi = Frequency::planar(3.0);
        let prob = ModalProblem::new(&space, &p, &mag, &xi).unwrap();
        let r = prob.solve(0.4).unwrap();
        assert!((form_value(&prob.forms().j, &r.psi) - 1.0).abs() < 1e-12);
        assert!(r.residual <= 1e-10 * r.operator_norm);
        assert!((r.alpha - prob.alpha(0.4)).abs() <= 1e-12 * r.operator_norm);
        assert!(r.psi[space.interface_dof()] >= 0.0);
    }
}
