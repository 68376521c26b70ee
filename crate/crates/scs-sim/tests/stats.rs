use scs_sim::cluster::{generate_dataset, DatasetConfig, RadiusClass};
use scs_sim::stats::{cap_asymmetry, cap_closer_fraction, pairwise_stats};
use scs_sim::ScsError;

#[test]
fn lens_fraction_below_half_over_grid() {
    for d in [0.5, 1.0, 2.0, 5.0, 10.0] {
        for frac in [0.01, 0.1, 0.25, 0.5, 0.9, 0.99] {
            let r = d * frac;
            let p = cap_closer_fraction(d, r).unwrap();
            assert!(p < 0.5, "D={d} r={r}: {p}");
            assert!(p > 0.0);
        }
    }
}

#[test]
fn lens_fraction_limit_and_monotonicity() {
    // r -> 0: tangent-plane limit approaches 1/2 from below.
    let tiny = cap_closer_fraction(1.0, 1e-9).unwrap();
    assert!(tiny < 0.5 && (0.5 - tiny) < 1e-8);
    // Monotone decreasing in r at fixed D.
    let mut prev = 0.5;
    for r in [0.1, 0.3, 0.5, 0.7, 0.9] {
        let p = cap_closer_fraction(1.0, r).unwrap();
        assert!(p < prev, "not decreasing at r={r}");
        prev = p;
    }
}

#[test]
fn lens_fraction_rejects_degenerate_radii() {
    assert!(matches!(
        cap_closer_fraction(1.0, 1.0),
        Err(ScsError::CapRadiusTooLarge { .. })
    ));
    assert!(matches!(
        cap_closer_fraction(1.0, 1.5),
        Err(ScsError::CapRadiusTooLarge { .. })
    ));
    assert!(matches!(
        cap_closer_fraction(1.0, 0.0),
        Err(ScsError::CapRadiusTooLarge { .. })
    ));
}

#[test]
fn monte_carlo_matches_analytic_fraction() {
    let result = cap_asymmetry(2.0, 0.5, 1_000_000, 42).unwrap();
    assert!(result.empirical_fraction < 0.5);
    assert!(result.analytic_fraction < 0.5);
    assert!(
        (result.empirical_fraction - result.analytic_fraction).abs() < 0.002,
        "analytic {} empirical {}",
        result.analytic_fraction,
        result.empirical_fraction
    );
}

#[test]
fn monte_carlo_is_deterministic() {
    let a = cap_asymmetry(2.0, 0.5, 200_000, 5).unwrap();
    let b = cap_asymmetry(2.0, 0.5, 200_000, 5).unwrap();
    assert_eq!(a, b);
}

#[test]
fn pairwise_bounds_and_class_ordering() {
    let dataset = generate_dataset(&DatasetConfig {
        scenes_per_class: 200,
        ..DatasetConfig::default()
    })
    .unwrap();
    let stats = pairwise_stats(&dataset).unwrap();
    assert_eq!(stats.per_class.len(), 3);

    for class in &stats.per_class {
        let r = class.radius_km;
        assert!(class.s1_s2.max_km <= r + 1e-9);
        assert!(class.s1_s3.max_km <= r + 1e-9);
        assert!(class.s2_s3.max_km <= 2.0 * r + 1e-9);
    }

    // Mean pairwise distances grow with the radius class, per pair type.
    let by_class = |c: RadiusClass| {
        stats
            .per_class
            .iter()
            .find(|p| p.class == c)
            .expect("class present")
    };
    let (close, mid, far) = (
        by_class(RadiusClass::Close),
        by_class(RadiusClass::Mid),
        by_class(RadiusClass::Far),
    );
    for f in [
        |p: &scs_sim::stats::ClassPairwise| p.s1_s2.mean_km,
        |p: &scs_sim::stats::ClassPairwise| p.s1_s3.mean_km,
        |p: &scs_sim::stats::ClassPairwise| p.s2_s3.mean_km,
    ] {
        assert!(f(close) < f(mid) && f(mid) < f(far));
    }

    // The secondary-secondary pair spans twice the radius, so its spread is
    // at least the central-secondary spread per class.
    for class in &stats.per_class {
        let spread = |s: &scs_sim::stats::DistanceSummary| s.max_km - s.min_km;
        assert!(spread(&class.s2_s3) >= spread(&class.s1_s2) * 0.9);
    }
}

#[test]
fn pairwise_requires_k_of_three() {
    let dataset = generate_dataset(&DatasetConfig {
        scenes_per_class: 2,
        k: 2,
        ..DatasetConfig::default()
    })
    .unwrap();
    assert!(matches!(
        pairwise_stats(&dataset),
        Err(ScsError::InvalidConfig(_))
    ));
}
