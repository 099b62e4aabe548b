use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use curvedcc::compactness::{exclusion_scan, ExclusionProbe};
use curvedcc::geodesic::enumerate_geodesic_ccs;
use curvedcc::manifold::configuration_from_angles;
use curvedcc::planar::{multistart_solve, PlanarSearchConfig};
use curvedcc::{AnglePoint, Curvature, Execution, MassList};
use std::hint::black_box;

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn geodesic(c: &mut Criterion) {
    let masses = MassList::new(vec![1.0, 1.3, 0.8, 1.1, 0.9]).unwrap();
    let mut g = c.benchmark_group("enumerate_geodesic_n5");
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| enumerate_geodesic_ccs(black_box(&masses), 2.0, Curvature::Hyperbolic, exec).unwrap())
        });
    }
    g.finish();
}

fn multistart(c: &mut Criterion) {
    let mut cfg = PlanarSearchConfig::new(MassList::equal(3, 1.0).unwrap(), 1.0, Curvature::Hyperbolic, 1);
    cfg.n_starts = 200;
    let mut g = c.benchmark_group("multistart_n3_200");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| multistart_solve(black_box(&cfg), exec).unwrap())
        });
    }
    g.finish();
}

fn exclusion(c: &mut Criterion) {
    let angles = [
        AnglePoint::new(0.5, 0.0),
        AnglePoint::new(0.5, 0.0),
        AnglePoint::new(-0.7, 0.3),
    ];
    let center = configuration_from_angles(&angles, Curvature::Hyperbolic).unwrap();
    let mut probe = ExclusionProbe::new(center, ExclusionProbe::log_radii(1e-2, 1, 1), 3);
    probe.sample_count = 2000;
    let masses = MassList::equal(3, 1.0).unwrap();
    let mut g = c.benchmark_group("exclusion_2000");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| exclusion_scan(black_box(&probe), &masses, Curvature::Hyperbolic, None, exec).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, geodesic, multistart, exclusion);
criterion_main!(benches);
