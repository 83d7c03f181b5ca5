use natanzon_pdm::oracle::*;
use natanzon_pdm::specfun::uniform_grid;
use natanzon_pdm::*;

fn oscillator() -> ConfluentSpec {
    ConfluentSpec::new([0.0, 4.0, 0.0], 4.0, 0.0, 0.0).unwrap()
}

fn ho_problem(n: usize) -> FdProblem {
    FdProblem::from_fn(uniform_grid(-12.0, 12.0, n), |_| 1.0, |u| 0.5 * u * u).unwrap()
}

#[test]
fn harmonic_oscillator_levels() {
    let e = eigen_lowest(&discretize(&ho_problem(4001)), 6).unwrap();
    let h: f64 = 24.0 / 4000.0;
    for (n, (&val, &res)) in e.values.iter().zip(&e.residuals).enumerate() {
        let exact = n as f64 + 0.5;
        // Leading stencil error is h²(2n² + 2n + 1)/32.
        let tol = if n <= 1 { 1e-5 } else { h * h * (2 * n * n + 2 * n + 1) as f64 / 16.0 };
        assert!((val - exact).abs() < tol, "n={n}: {val}");
        assert!(res < 1e-9, "residual {res:e}");
    }
}

#[test]
fn sturm_counts_match_returned_values() {
    let a = discretize(&ho_problem(1001));
    let e = eigen_lowest(&a, 12).unwrap();
    for probe in [0.0, 0.7, 3.2, 7.9, 11.0] {
        let below = e.values.iter().filter(|&&v| v < probe).count();
        assert_eq!(a.sturm_count(probe), below, "probe {probe}");
    }
}

#[test]
fn grid_convergence_is_second_order() {
    let err = |points| {
        let r = validate(
            &ValidationSetup::new(oscillator(), MassProfile::default(), (1e-6, 14.0), points)
                .with_initial(1.0, 0.5)
                .with_n_max(2),
        )
        .unwrap();
        r.rows.iter().map(|row| row.abs_error).collect::<Vec<_>>()
    };
    let (coarse, fine) = (err(2001), err(4001));
    for (c, f) in coarse.iter().zip(&fine) {
        let ratio = c / f;
        assert!((3.6..4.4).contains(&ratio), "ratio {ratio}");
    }
}

#[test]
fn constant_mass_reports_do_not_depend_on_mode_or_ordering() {
    let base = ValidationSetup::new(oscillator(), MassProfile::constant(1.0), (1e-6, 14.0), 2001)
        .with_initial(1.0, 0.5);
    let reference = validate(&base).unwrap();
    for mode in PotentialMode::ALL {
        let r = validate(
            &base
                .clone()
                .with_mode(Selection::Fixed(mode))
                .with_ordering(OrderingParams::new(0.4, -0.3).unwrap()),
        )
        .unwrap();
        assert_eq!(r.rows, reference.rows, "{mode:?}");
    }
}

#[test]
fn pdm_calibration_singles_out_one_mode_and_variant() {
    let setup = ValidationSetup::new(oscillator(), MassProfile::rational(1.0, 0.1), (1e-6, 25.0), 4001)
        .with_initial(1.0, 0.5)
        .with_mode(Selection::Auto)
        .with_variant(Selection::Auto);
    let r = validate(&setup).unwrap();
    let cal = &r.calibration;
    assert_eq!(cal.modes.len(), 3);
    assert_eq!(cal.variants.len(), 2);
    assert!(cal.unique_mode && cal.unique_variant);
    assert_eq!(r.mode, CALIBRATED_MODE);
    assert_eq!(r.variant, CALIBRATED_VARIANT);
    assert!(r.max_rel_error() < 1e-3);
    assert!(r.oracle_orthonormality < 1e-6);
    for row in &r.rows {
        assert!((0.0..=1.0).contains(&row.overlap));
        assert_eq!(row.nodes, row.n as usize);
        assert_eq!(row.oracle_nodes, row.n as usize);
    }
    assert!(r.rows.windows(2).all(|w| w[0].n < w[1].n));
}

#[test]
fn morse_levels_are_all_matched() {
    let spec = ConfluentSpec::new([8.0, 0.0, 0.0], 4.0, -43.6, 7.0).unwrap();
    let r = validate(
        &ValidationSetup::new(spec, MassProfile::default(), (-16.0, 4.0), 4001)
            .with_initial(0.0, 1.0)
            .with_n_max(7),
    )
    .unwrap();
    assert_eq!(r.rows.len(), 5);
    assert_eq!(r.no_root, vec![5, 6, 7]);
    assert!(r.max_rel_error() < 5e-4);
}

#[test]
fn errors_carry_their_stage() {
    let r = validate(&ValidationSetup::new(oscillator(), MassProfile::default(), (1e-6, 14.0), 100));
    assert!(matches!(r, Err(Error::GridTooSmall { .. })));
    let r = validate(&ValidationSetup::new(oscillator(), MassProfile::default(), (1e-6, 14.0), 501).with_n_max(12));
    assert!(matches!(r, Err(Error::InvalidParameter(_))));
    // Nothing is bound for a repulsive numerator.
    let repulsive = ConfluentSpec::new([0.0, 4.0, 0.0], -4.0, 0.0, 0.0).unwrap();
    let err = validate(&ValidationSetup::new(repulsive, MassProfile::default(), (1e-6, 14.0), 501)).unwrap_err();
    assert_eq!(err.stage(), Some(Stage::Spectrum));
    // ξ0 below the admissible range fails when the mapping starts.
    let err = validate(
        &ValidationSetup::new(oscillator(), MassProfile::default(), (1e-6, 14.0), 501).with_initial(1.0, 1e-20),
    )
    .unwrap_err();
    assert_eq!(err.stage(), Some(Stage::Mapping));
}

#[test]
fn validation_is_deterministic() {
    let setup = ValidationSetup::new(oscillator(), MassProfile::rational(1.0, 0.1), (1e-6, 14.0), 1001)
        .with_initial(1.0, 0.5)
        .with_mode(Selection::Auto);
    let a = serde_json::to_string(&validate(&setup).unwrap()).unwrap();
    let b = serde_json::to_string(&validate(&setup).unwrap()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn setup_round_trips_through_json() {
    let setup = ValidationSetup::new(oscillator(), MassProfile::sech2(1.0, 0.3, 0.5), (0.1, 9.0), 801)
        .with_mode(Selection::Auto);
    let text = serde_json::to_string(&setup).unwrap();
    let back: ValidationSetup = serde_json::from_str(&text).unwrap();
    assert_eq!(back, setup);
}
