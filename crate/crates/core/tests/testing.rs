use paired_gof::bootstrap::sample_table;
use paired_gof::estimation::{fit_independence, fit_saturated};
use paired_gof::gof::{
    chi_square_sf, degrees_of_freedom, expected_counts, gof_statistic, log_observed_table_probability,
    observed_table_probability,
};
use paired_gof::{
    asymptotic_gof, bootstrap_all, bootstrap_gof, datasets, BootstrapOptions, Error, FitOptions, FrequencyTable,
    GofMethod, GroupCounts, ModelKind, ParamVector, RandomSource,
};

fn table(groups: &[[u32; 5]]) -> FrequencyTable {
    FrequencyTable::new(
        groups
            .iter()
            .map(|c| GroupCounts::new(c[0], c[1], c[2], c[3], c[4]))
            .collect(),
    )
    .unwrap()
}

#[test]
fn expected_counts_closed_forms() {
    let cef = table(&[[21, 9, 14, 38, 24]]);
    let f = fit_independence(&cef).unwrap();
    let e = expected_counts(&f, &cef).unwrap()[0];
    let want = [15.489_955_555_555_556, 21.233_422_222_222_222, 7.276_622_222_222_222];
    for (got, w) in e.iter().zip(want) {
        assert!((got - w).abs() < 1e-12);
    }

    let sat = fit_saturated(&datasets::otitis_media()).unwrap();
    let e = expected_counts(&sat, &datasets::otitis_media()).unwrap();
    assert_eq!(e[1], [13.0, 3.0, 15.0, 27.0, 39.0]);

    let rp = datasets::retinitis_pigmentosa();
    let e = expected_counts(&fit_independence(&rp).unwrap(), &rp).unwrap();
    assert!(e.iter().all(|g| g[3] == 0.0 && g[4] == 0.0));
}

#[test]
fn statistics() {
    let t = table(&[[10, 5, 5, 0, 0]]);
    let exact = vec![[10.0, 5.0, 5.0, 0.0, 0.0]];
    assert_eq!(gof_statistic(GofMethod::G2, &t, &exact).unwrap(), 0.0);
    assert_eq!(gof_statistic(GofMethod::X2, &t, &exact).unwrap(), 0.0);
    let adj = gof_statistic(GofMethod::X2adj, &t, &exact).unwrap();
    assert!((adj - 0.25 * (0.1 + 0.2 + 0.2)).abs() < 1e-14);

    // 2 * 10 * ln 2 from the first cell, 2 * 5 * ln(1/2) from the second.
    let shifted = vec![[5.0, 10.0, 5.0, 0.0, 0.0]];
    let g2 = gof_statistic(GofMethod::G2, &t, &shifted).unwrap();
    assert!((g2 - (20.0 * 2f64.ln() + 10.0 * 0.5f64.ln())).abs() < 1e-12);
    assert!(matches!(
        gof_statistic(GofMethod::B1, &t, &exact),
        Err(Error::WrongMethod(_))
    ));
}

#[test]
fn dof_and_tail() {
    assert_eq!(
        degrees_of_freedom(ModelKind::Rosner, &datasets::otitis_media()).unwrap(),
        3
    );
    assert_eq!(
        degrees_of_freedom(ModelKind::Donner, &datasets::retinitis_pigmentosa()).unwrap(),
        3
    );
    assert!(matches!(
        degrees_of_freedom(ModelKind::Rosner, &table(&[[1, 2, 3, 0, 0]])),
        Err(Error::DofUndefined(_))
    ));
    assert_eq!(chi_square_sf(0.0, 3), 1.0);
    assert_eq!(chi_square_sf(f64::INFINITY, 3), 0.0);
    assert!((chi_square_sf(3.841459, 1) - 0.05).abs() < 1e-4);
    assert!((chi_square_sf(7.0, 3) - 0.071_897_772_496_465_09).abs() < 1e-14);
}

#[test]
fn table_probabilities() {
    let sat = |t: &FrequencyTable| observed_table_probability(&fit_saturated(t).unwrap(), t).unwrap();
    assert_eq!(sat(&table(&[[2, 0, 0, 0, 0]])), 1.0);
    assert!((sat(&table(&[[1, 1, 0, 0, 0]])) - 0.5).abs() < 1e-15);
    let dom = table(&[[15, 6, 7, 0, 0]]);
    let l = log_observed_table_probability(&fit_saturated(&dom).unwrap(), &dom).unwrap();
    assert!((l - -3.422_986_229_351_907_6).abs() < 1e-12);
}

#[test]
fn published_asymptotic_p_values() {
    let opts = FitOptions::default();
    let cases = [
        (
            ModelKind::ClaytonCopula,
            datasets::otitis_media(),
            GofMethod::G2,
            0.7735,
        ),
        (ModelKind::Rosner, datasets::otitis_media(), GofMethod::X2adj, 0.8796),
        (
            ModelKind::Donner,
            datasets::retinitis_pigmentosa(),
            GofMethod::G2,
            0.7355,
        ),
        (
            ModelKind::Independence,
            datasets::retinitis_pigmentosa(),
            GofMethod::G2,
            0.0,
        ),
    ];
    for (model, t, method, want) in cases {
        let r = asymptotic_gof(model, &t, method, &opts).unwrap();
        assert!((r.p_value - want).abs() < 5e-5, "{model} {method}: {}", r.p_value);
    }
}

#[test]
fn degenerate_sampling() {
    let shape = table(&[[3, 2, 1, 4, 2], [0, 0, 0, 3, 1]]);
    let params = ParamVector::new(vec![1.0, 0.0], Some(0.0));
    let mut rng = RandomSource::new(3, 0);
    let t = sample_table(&params, ModelKind::Donner, &shape, &mut rng).unwrap();
    assert_eq!(*t.group(0), GroupCounts::new(0, 0, 6, 0, 6));
    assert_eq!(*t.group(1), GroupCounts::new(0, 0, 0, 4, 0));
}

#[test]
fn clayton_b1_on_example_one() {
    let t = datasets::otitis_media();
    let boot = BootstrapOptions::new(2000, 41);
    let r = bootstrap_gof(
        ModelKind::ClaytonCopula,
        &t,
        GofMethod::B1,
        &boot,
        &FitOptions::default(),
    )
    .unwrap();
    assert!((r.p_value - 0.7790).abs() <= 0.033, "{}", r.p_value);
    assert_eq!(r.n_boot, Some(2000));
    let again = bootstrap_gof(
        ModelKind::ClaytonCopula,
        &t,
        GofMethod::B1,
        &boot,
        &FitOptions::default(),
    )
    .unwrap();
    assert_eq!(r.p_value.to_bits(), again.p_value.to_bits());
}

#[test]
fn bootstrap_rejects_asymptotic_methods() {
    let t = datasets::otitis_media();
    let boot = BootstrapOptions::new(10, 1);
    assert!(bootstrap_all(ModelKind::Rosner, &t, &[GofMethod::G2], &boot, &FitOptions::default()).is_err());
    assert!(bootstrap_all(
        ModelKind::Saturated,
        &t,
        &[GofMethod::B1],
        &boot,
        &FitOptions::default()
    )
    .is_err());
}
