use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use num_complex::Complex64;
use vortexlab_core::beam::{synthesize, BeamSpec, PolarizationKind, PolarizationSpec, Profile};
use vortexlab_core::observables::currents;
use vortexlab_core::pair::{pair_correlations, PairSpec, RadialProfile, SpinSymmetry};
use vortexlab_core::propagate::{propagate, PropagationPlan};
use vortexlab_core::vortex::{loop_winding, singularity_census, Component, FieldSource, LoopSpec, WindingOptions};
use vortexlab_core::TransverseGrid;

fn lg() -> BeamSpec {
    BeamSpec::single(
        Complex64::new(1.0, 0.0),
        PolarizationSpec::new(PolarizationKind::CircularPlus),
        Profile::LaguerreGauss { p: 1, m: 1, w0: 10.0 },
    )
}

fn field_kernels(c: &mut Criterion) {
    let grid = TransverseGrid::centered(256, 100.0).unwrap();
    let spec = lg();
    let f = synthesize(&spec, &grid).unwrap();
    let plan = PropagationPlan::new(50.0, 1).unwrap();
    c.bench_function("synthesize 256x256", |b| b.iter(|| synthesize(black_box(&spec), &grid).unwrap()));
    c.bench_function("propagate 256x256", |b| b.iter(|| propagate(black_box(&f), &plan).unwrap()));
    c.bench_function("currents 256x256", |b| b.iter(|| currents(black_box(&f))));
    c.bench_function("census 256x256", |b| b.iter(|| singularity_census(black_box(&f), Component::Sum)));
}

fn loop_kernels(c: &mut Criterion) {
    let spec = lg();
    let src = FieldSource::analytic(&spec, 1.0, 0.0).unwrap();
    let lp = LoopSpec::circle(0.0, 0.0, 5.0, 4096).unwrap();
    let opts = WindingOptions::default();
    c.bench_function("analytic loop winding 4096", |b| {
        b.iter(|| loop_winding(black_box(&src), Component::Sum, &lp, &opts).unwrap())
    });
}

fn pair_kernels(c: &mut Criterion) {
    let spec = PairSpec {
        m: 2,
        symmetry: SpinSymmetry::Symmetric,
        theta_b: 0.3,
        phi_b: 0.0,
        phi0: 0.0,
        eta: RadialProfile::default_ring(1.0, 0.05 * std::f64::consts::PI),
        z: 0.0,
    };
    let pts: Vec<(f64, f64)> = (0..64).map(|k| (4.0 + 0.1 * k as f64, 0.1 * k as f64)).collect();
    c.bench_function("pair correlations 64 points", |b| {
        b.iter(|| pair_correlations(black_box(&spec), &pts).unwrap())
    });
}

criterion_group!(benches, field_kernels, loop_kernels, pair_kernels);
criterion_main!(benches);
