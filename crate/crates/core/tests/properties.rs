use mhd_rt::eigen::ModalProblem;
use mhd_rt::forms::{form_value, relative_asymmetry, FormSet};
use mhd_rt::growth::solve_growth_rate;
use mhd_rt::{build_mesh, FluidParams, Frequency, HermiteSpace, MagneticConfig, Orientation};
use nalgebra::DVector;
use proptest::prelude::*;

fn orientation() -> impl Strategy<Value = Orientation> {
    prop_oneof![Just(Orientation::Vertical), Just(Orientation::Horizontal)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn mesh_has_interface_node(n in 4usize..40, grading in 0.0f64..=1.0) {
        let mesh = build_mesh(n, grading).unwrap();
        prop_assert_eq!(mesh.element_count(), 2 * n);
        prop_assert_eq!(mesh.nodes()[mesh.interface_index()], 0.0);
        prop_assert_eq!(mesh.nodes()[0], -1.0);
        prop_assert_eq!(*mesh.nodes().last().unwrap(), 1.0);
        prop_assert!(mesh.nodes().windows(2).all(|w| w[1] > w[0]));
        let reflected = mesh.reflected();
        prop_assert_eq!(reflected.nodes(), mesh.nodes());
    }

    #[test]
    fn forms_are_symmetric_and_vanish_at_zero(
        n in 4usize..10,
        o in orientation(),
        b in 0.0f64..1.5,
        xi1 in -6.0f64..6.0,
        xi2 in -6.0f64..6.0,
    ) {
        prop_assume!(xi1 * xi1 + xi2 * xi2 > 1e-4);
        let p = FluidParams::new(2.0, 1.0, 0.1, 0.05, 1.0).unwrap();
        let space = HermiteSpace::new(build_mesh(n, 0.2).unwrap());
        let forms = FormSet::assemble(&space, &p, &MagneticConfig::new(o, b).unwrap(), &Frequency::new(xi1, xi2)).unwrap();
        let zero = DVector::zeros(space.dof_count());
        for m in [&forms.j, &forms.e0, &forms.e1] {
            prop_assert!(relative_asymmetry(m) <= 1e-13);
            prop_assert_eq!(form_value(m, &zero), 0.0);
        }
    }

    #[test]
    fn results_are_even_in_frequency(
        o in orientation(),
        frac in 0.1f64..0.9,
        xi1 in 0.2f64..5.0,
        xi2 in -3.0f64..3.0,
    ) {
        let p = FluidParams::new(2.0, 1.0, 0.1, 0.1, 1.0).unwrap();
        let mag = MagneticConfig::new(o, frac * 0.5f64.sqrt()).unwrap();
        let space = HermiteSpace::new(build_mesh(8, 0.3).unwrap());
        let xi = Frequency::new(xi1, xi2);
        for other in [xi.negated(), Frequency::new(-xi1, xi2), Frequency::new(xi1, -xi2)] {
            let a = solve_growth_rate(&p, &mag, &xi, &space).unwrap();
            let b = solve_growth_rate(&p, &mag, &other, &space).unwrap();
            prop_assert_eq!(a.status, b.status);
            prop_assert_eq!(a.lambda.map(f64::to_bits), b.lambda.map(f64::to_bits));
            prop_assert_eq!(a.psi, b.psi);
        }
    }

    #[test]
    fn alpha_is_nondecreasing_in_s(
        o in orientation(),
        frac in 0.0f64..1.2,
        xi in 0.3f64..12.0,
        mu in 0.01f64..1.0,
    ) {
        let p = FluidParams::new(2.0, 1.0, mu, 0.5 * mu, 1.0).unwrap();
        let mag = MagneticConfig::new(o, frac * 0.5f64.sqrt()).unwrap();
        let space = HermiteSpace::new(build_mesh(8, 0.3).unwrap());
        let problem = ModalProblem::new(&space, &p, &mag, &Frequency::planar(xi)).unwrap();
        let values: Vec<f64> = (0..12).map(|i| problem.alpha(0.1 * i as f64)).collect();
        prop_assert!(values.windows(2).all(|w| w[1] > w[0]), "{:?}", values);
        // alpha never drops below minus the inviscid scale
        let floor = p.buoyancy() * xi * xi.tanh() / (p.rho_plus + p.rho_minus);
        prop_assert!(values[0] >= -floor * (1.0 + 1e-9));
        // affine lower bound -C2 |xi| + s C3, with C2 = g[rho]/(rho+ + rho-)
        // (since xi tanh xi <= |xi|) and C3 the viscous floor
        let c2 = p.buoyancy() / (p.rho_plus + p.rho_minus);
        let c3 = problem.viscous_floor();
        prop_assert!(c3 > 0.0);
        for (i, v) in values.iter().enumerate() {
            let s = 0.1 * i as f64;
            let bound = -c2 * xi + s * c3;
            prop_assert!(*v >= bound - 1e-9 * (1.0 + bound.abs()), "s={} {} < {}", s, v, bound);
        }
    }
}
