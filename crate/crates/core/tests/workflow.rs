use paired_gof::simulation::{alternative_grid, null_grid, parse_grid};
use paired_gof::{
    classify_rate, datasets, run_grid, run_scenario, select_model, BootstrapOptions, FitOptions, GofMethod, ModelKind,
    RateClass,
};

#[test]
fn selection_on_the_examples() {
    let opts = FitOptions::default();
    let boot = BootstrapOptions::new(1000, 2024);
    let cases = [
        (datasets::otitis_media(), ModelKind::ClaytonCopula),
        (datasets::myopia(), ModelKind::Rosner),
        (datasets::retinitis_pigmentosa(), ModelKind::Donner),
    ];
    for (t, want) in cases {
        let r = select_model(&t, &ModelKind::CANDIDATES, &GofMethod::ALL, 0.05, Some(&boot), &opts).unwrap();
        assert_eq!(r.best, Some(want), "{r:?}");
        let ind = &r.models[0];
        assert_eq!(ind.name, ModelKind::Independence);
        assert!(!ind.pass);
        assert_eq!(ind.pvalues.len(), 6);
    }
}

#[test]
fn rate_classes() {
    assert_eq!(classify_rate(0.0487, 0.05), RateClass::Robust);
    assert_eq!(classify_rate(0.061, 0.05), RateClass::Liberal);
    assert_eq!(classify_rate(0.04, 0.05), RateClass::Robust);
    assert_eq!(classify_rate(0.06, 0.05), RateClass::Robust);
    assert_eq!(classify_rate(0.039, 0.05), RateClass::Conservative);
}

#[test]
fn grids() {
    let grid = null_grid(ModelKind::Rosner, 100);
    assert_eq!(grid.len(), 18);
    assert_eq!(alternative_grid(ModelKind::Dallal, 150).len(), 6);
    assert!(run_grid(&[], 1).unwrap().is_empty());

    let small: Vec<_> = grid
        .into_iter()
        .map(|mut c| {
            c.n_rep = 20;
            c
        })
        .collect();
    let a = run_grid(&small, 9).unwrap();
    assert_eq!(a.len(), 18);
    assert_eq!(a, run_grid(&small, 9).unwrap());
    assert_eq!(a[17].label.as_deref(), Some("100/8/VI/1.8"));
}

#[test]
fn scenario_files() {
    let text = r#"{"scenarios": [
        {"model": "dallal", "pis": [0.2, 0.2], "kappa": [0.5, 0.7], "m_plus": 150, "n_plus": 150, "n_rep": 30},
        {"model": "clayton", "pis": [0.3, 0.5], "kappa": 2.0, "m_plus": 25, "n_plus": 25, "n_rep": 30,
         "methods": ["G2", "B2"], "boot": {"n_boot": 40}, "fitted_model": "rosner"}
    ]}"#;
    let grid = parse_grid(text).unwrap();
    let reports = run_grid(&grid, 4).unwrap();
    assert_eq!(reports[1].fitted_model, ModelKind::Rosner);
    assert_eq!(reports[1].rates.len(), 2);
    assert!(reports
        .iter()
        .all(|r| r.rates.iter().all(|m| (0.0..=1.0).contains(&m.rate))));
}

// Large-sample null rates of G² for every g = 2 configuration.
#[test]
fn deviance_is_near_nominal_at_size_100() {
    for model in ModelKind::NUISANCE {
        for mut cfg in null_grid(model, 100).into_iter().filter(|c| c.pis.len() == 2) {
            cfg.methods = vec![GofMethod::G2];
            cfg.n_rep = 10_000;
            let r = run_scenario(&cfg, 77).unwrap();
            let rate = r.rates[0].rate;
            assert!((0.035..=0.065).contains(&rate), "{:?}: {rate}", cfg.label);
        }
    }
}

#[test]
fn power_exceeds_size() {
    let mut alt = alternative_grid(ModelKind::Dallal, 150).remove(0);
    alt.methods = vec![GofMethod::G2];
    alt.n_rep = 2000;
    let power = run_scenario(&alt, 5).unwrap().rates[0].rate;

    let mut null = alt.clone();
    null.kappa = paired_gof::simulation::KappaSpec::Common(0.5);
    let size = run_scenario(&null, 5).unwrap().rates[0].rate;
    assert!(power > size + 0.1, "power {power} size {size}");
}
