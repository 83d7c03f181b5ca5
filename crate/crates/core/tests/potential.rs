use natanzon_pdm::mapping::{best_mapping, closed_form_mapping, solve_mapping};
use natanzon_pdm::potential::*;
use natanzon_pdm::*;
use proptest::prelude::*;

fn oscillator() -> ConfluentSpec {
    ConfluentSpec::new([0.0, 4.0, 0.0], 4.0, 0.0, 0.0).unwrap()
}

#[test]
fn coulomb_class_potential_is_quadratic_over_xi_squared() {
    let spec = ConfluentSpec::new([0.0, 0.0, 1.0], 0.3, -4.0, 8.0).unwrap();
    let req = MappingRequest::new((0.5, 10.0), 200).with_initial(1.0, 8f64.sqrt());
    let map = closed_form_mapping(&spec, &MassProfile::default(), &req).unwrap().unwrap();
    let v = eval_v(&spec, &map).unwrap();
    // Least squares of V ξ² on {1, ξ, ξ²}, by normal equations.
    let mut ata = [[0.0; 3]; 3];
    let mut atb = [0.0; 3];
    for (&xi, &val) in map.xi().iter().zip(v.values()) {
        let row = [1.0, xi, xi * xi];
        for i in 0..3 {
            atb[i] += row[i] * val * xi * xi;
            for j in 0..3 {
                ata[i][j] += row[i] * row[j];
            }
        }
    }
    let m = nalgebra::Matrix3::from_fn(|i, j| ata[i][j]);
    let c = m.lu().solve(&nalgebra::Vector3::from(atb)).unwrap();
    let expect = [8.0, -4.0, 0.3];
    for i in 0..3 {
        assert!((c[i] - expect[i]).abs() < 1e-6, "coefficient {i}: {}", c[i]);
    }
}

#[test]
fn v_ignores_ordering() {
    let mass = MassProfile::rational(1.0, 0.2);
    let map = solve_mapping(&oscillator(), &mass, &MappingRequest::new((0.2, 6.0), 300).with_initial(1.0, 0.5))
        .unwrap();
    let a = assemble_effective(&oscillator(), &map, &mass, &OrderingParams::default(), PotentialMode::V).unwrap();
    let b = assemble_effective(
        &oscillator(),
        &map,
        &mass,
        &OrderingParams::new(0.7, 0.2).unwrap(),
        PotentialMode::V,
    )
    .unwrap();
    assert_eq!(a.v, b.v);
    assert_eq!(a.total, b.total);
    assert_ne!(a.vm, b.vm);
}

#[test]
fn mode_totals_are_sums_of_the_pieces() {
    let mass = MassProfile::exponential(1.0, 0.3);
    let map = solve_mapping(&oscillator(), &mass, &MappingRequest::new((0.2, 6.0), 300).with_initial(1.0, 0.5))
        .unwrap();
    let t = assemble_effective(&oscillator(), &map, &mass, &OrderingParams::default(), PotentialMode::PlusUm)
        .unwrap();
    for i in 0..t.u.len() {
        assert_eq!(t.total[i], t.v[i] + t.um[i]);
    }
    let t = t.with_mode(PotentialMode::PlusUeff);
    for i in 0..t.u.len() {
        assert_eq!(t.total[i], t.v[i] + t.ueff[i]);
    }
}

#[test]
fn joint_scaling_of_lambda_and_sigma() {
    let spec = ConfluentSpec::new([0.7, 1.3, 0.4], 2.0, -1.0, 0.5).unwrap();
    for t in [2.0, 10.0] {
        let scaled = spec.scaled(t).unwrap();
        for xi in [0.1, 1.0, 4.5] {
            let a = v_terms(&spec, xi).unwrap();
            let b = v_terms(&scaled, xi).unwrap();
            assert!((a.sigma - b.sigma).abs() < 1e-14 * a.sigma.abs().max(1.0));
            assert!((a.unit / t - b.unit).abs() < 1e-14 * a.unit);
        }
    }
}

#[test]
fn schwarzian_split_on_analytic_mappings() {
    let m = MassProfile::default();
    let cases = [
        (oscillator(), (0.05, 8.0), (1.0, 0.5)),
        (ConfluentSpec::new([1.0, 0.0, 0.0], 1.0, 0.0, 0.0).unwrap(), (-3.0, 3.0), (0.0, 1.0)),
        (ConfluentSpec::new([0.0, 0.0, 1.0], 0.0, -4.0, 8.0).unwrap(), (0.01, 50.0), (1.0, 8f64.sqrt())),
    ];
    for (spec, dom, (u0, xi0)) in cases {
        let req = MappingRequest::new(dom, 801).with_initial(u0, xi0);
        let map = closed_form_mapping(&spec, &m, &req).unwrap().unwrap();
        let r = check_schwarzian_split(&spec, &map, &m).unwrap();
        assert!(r < 1e-8, "{spec:?}: {r:e}");
    }
}

#[test]
fn affine_mapping_has_zero_schwarzian_terms() {
    let spec = ConfluentSpec::new([0.0, 0.0, 1.0], 0.0, -4.0, 8.0).unwrap();
    let m = MassProfile::default();
    let map = closed_form_mapping(&spec, &m, &MappingRequest::new((0.5, 5.0), 101).with_initial(1.0, 2.0))
        .unwrap()
        .unwrap();
    for &xi in map.xi() {
        let r = spec.r(xi);
        let rd = spec.r_dot(xi);
        let rhs = -1.0 / r - (xi * xi * spec.r_ddot() + xi * rd) / (r * r) + 1.25 * xi * xi * rd * rd / (r * r * r);
        assert!(rhs.abs() < 1e-14 * (1.0 / r));
    }
}

#[test]
fn schwarzian_split_on_ode_mappings_with_variable_mass() {
    let specs = [
        (oscillator(), (0.1, 8.0), (1.0, 0.5)),
        (ConfluentSpec::new([1.0, 2.0, 0.5], 1.0, -1.0, 0.5).unwrap(), (-2.0, 2.0), (0.0, 1.0)),
    ];
    let masses = [
        MassProfile::rational(1.0, 0.1),
        MassProfile::exponential(1.0, 0.2),
        MassProfile::sech2(1.0, 0.5, 0.8),
    ];
    for (spec, dom, (u0, xi0)) in specs {
        for mass in &masses {
            let map = best_mapping(&spec, mass, &MappingRequest::new(dom, 801).with_initial(u0, xi0)).unwrap();
            assert!(!map.is_closed_form());
            let r = check_schwarzian_split(&spec, &map, mass).unwrap();
            assert!(r < 1e-10, "{mass:?}: {r:e}");
            let r = check_schwarzian_split_sampled(&spec, &map, mass).unwrap();
            assert!(r < 1e-5, "{mass:?}: {r:e}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ueff_is_vm_plus_um(
        eta in -2.0f64..2.0, eps in -2.0f64..2.0,
        amp in 0.0f64..2.0, kappa in 0.1f64..2.0, u in -3.0f64..3.0,
    ) {
        let ord = OrderingParams::new(eta, eps).unwrap();
        prop_assert!((eta + eps + ord.rho() + 1.0).abs() < 1e-15);
        let mass = MassProfile::sech2(1.0, amp, kappa);
        let c = eval_mass_corrections(&mass, &ord, &[u]).unwrap();
        let (vm, um, ue) = (c.vm.values()[0], c.um.values()[0], c.ueff.values()[0]);
        prop_assert!((ue - (vm + um)).abs() <= 1e-13 * (1.0 + vm.abs() + um.abs()));
    }
}
