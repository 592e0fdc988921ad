//! Shared fixtures for the benchmarks.

use echoform::oracle::{disk_far_field, DiskCondition, DiskSpec};
use echoform::solver::{BoundaryCondition, ScattererSpec};
use echoform::synthesis::{build_direction_set, DirectionConfig, FarFieldDataset, FrequencyGrid, Manifest, Record};
use echoform::BoundaryCurve;

pub fn egg_dirichlet() -> ScattererSpec {
    ScattererSpec::new(BoundaryCurve::egg(), BoundaryCondition::Dirichlet).expect("egg spec")
}

/// Backscattering data of the radius-1.5 Dirichlet disk from the series solution.
pub fn disk_dataset(l: usize, band: (f64, f64, f64)) -> FarFieldDataset {
    let disk = DiskSpec::centered(1.5, DiskCondition::Dirichlet).expect("disk");
    let grid = FrequencyGrid::new(band.0, band.1, band.2).expect("band");
    let pairs = build_direction_set(l, DirectionConfig::backscatter()).expect("directions");
    let mut records = Vec::new();
    for p in &pairs.pairs {
        for k in grid.wavenumbers() {
            let value = disk_far_field(&disk, p.obs, p.inc, k).expect("oracle");
            records.push(Record { theta: p.inc, obs: p.obs, k, value });
        }
    }
    let spec = ScattererSpec::new(
        BoundaryCurve::disk(1.5, Default::default()).expect("disk curve"),
        BoundaryCondition::Dirichlet,
    )
    .expect("spec");
    FarFieldDataset {
        manifest: Manifest {
            version: echoform::synthesis::FORMAT_VERSION,
            scatterer: spec,
            directions: echoform::synthesis::DirectionManifest { count: l, config: DirectionConfig::backscatter() },
            k_minus: grid.k_minus,
            k_plus: grid.k_plus,
            dk: grid.dk,
            delta: 0.0,
            seed: None,
            count: records.len(),
            generator: "bench".into(),
        },
        records,
    }
}
