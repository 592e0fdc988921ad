use echoform::inversion::{a1_hull, curve_samples, dn_sign_test, indicator_i, Calibration, GridSpec, SignVerdict};
use echoform::oracle::{disk_far_field, DiskCondition, DiskSpec};
use echoform::solver::ScattererSpec;
use echoform::synthesis::*;
use echoform::{BoundaryCurve, Vec2};
use proptest::prelude::*;

fn disk_data(radius: f64, center: Vec2, bc: DiskCondition, band: (f64, f64)) -> FarFieldDataset {
    let disk = DiskSpec::new(radius, center, bc).unwrap();
    let grid = FrequencyGrid::new(band.0, band.1, 0.1).unwrap();
    let config = DirectionConfig::backscatter();
    let pairs = build_direction_set(32, config).unwrap();
    let mut records = Vec::new();
    for p in &pairs.pairs {
        for k in grid.wavenumbers() {
            records.push(Record { theta: p.inc, obs: p.obs, k, value: disk_far_field(&disk, p.obs, p.inc, k).unwrap() });
        }
    }
    let curve = BoundaryCurve::disk(radius, center).unwrap();
    FarFieldDataset {
        manifest: Manifest {
            version: FORMAT_VERSION,
            scatterer: ScattererSpec::new(curve, bc.try_into().unwrap()).unwrap(),
            directions: DirectionManifest { count: 32, config },
            k_minus: grid.k_minus,
            k_plus: grid.k_plus,
            dk: grid.dk,
            delta: 0.0,
            seed: None,
            count: records.len(),
            generator: "test".into(),
        },
        records,
    }
}

#[test]
fn shifted_disk_hull_and_sign_test() {
    let center = Vec2::new(0.4, -0.3);
    let curve = BoundaryCurve::disk(1.0, center).unwrap();
    let cal = Calibration::default();
    let high = disk_data(1.0, center, DiskCondition::Dirichlet, (20.0, 40.0));
    let (hull, _) = a1_hull(&high, 6.0, &cal).unwrap();
    assert!(hull.contains(center));
    assert!(hull.hausdorff_to_curve(&curve, 1024) < 0.05);

    let gs = GridSpec::new(-1.5, 2.5, -2.5, 1.5, 0.02).unwrap();
    let boundary = curve_samples(&curve, 128).unwrap();
    for (bc, want) in [(DiskCondition::Dirichlet, SignVerdict::Dirichlet), (DiskCondition::Neumann, SignVerdict::Neumann)] {
        let low = disk_data(1.0, center, bc, (1.0, 20.0));
        let out = indicator_i(&low, &[1.0; 32], &gs, &cal).unwrap();
        assert_eq!(dn_sign_test(&out.grid, &boundary).unwrap().0, want, "{bc:?}");
    }
}

#[test]
fn dataset_file_round_trip() {
    let data = add_noise(&disk_data(1.0, Vec2::default(), DiskCondition::Neumann, (3.0, 4.0)), 0.2, 9).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("disk.csv");
    save_dataset(&data, &path).unwrap();
    assert_eq!(load_dataset(&path).unwrap(), data);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    // Translating the obstacle multiplies backscatter data by a pure phase.
    #[test]
    fn translation_is_a_phase(cx in -1.0f64..1.0, cy in -1.0f64..1.0, k in 1.0f64..30.0, a in -3.1f64..3.1) {
        let x = echoform::Direction::from_angle(a);
        let centered = DiskSpec::centered(0.8, DiskCondition::Dirichlet).unwrap();
        let shifted = DiskSpec::new(0.8, Vec2::new(cx, cy), DiskCondition::Dirichlet).unwrap();
        let u0 = disk_far_field(&centered, x, -x, k).unwrap();
        let u1 = disk_far_field(&shifted, x, -x, k).unwrap();
        prop_assert!((u0.norm() - u1.norm()).abs() < 1e-9 * u0.norm().max(1.0));
        let phase = (u1 / u0).arg();
        let want = (-2.0 * k * x.dot(Vec2::new(cx, cy))).rem_euclid(std::f64::consts::TAU);
        let diff = (phase - want).rem_euclid(std::f64::consts::TAU);
        prop_assert!(diff.min(std::f64::consts::TAU - diff) < 1e-7);
    }
}
