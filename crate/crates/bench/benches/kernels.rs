use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use spinform::clifford_rep::{CliffordModule, Spinor};
use spinform::lorentz4::square_to_pair;
use spinform::spin7::{cayley_form, find_spin7, grad_coords, hess_coords, is_conformal_spin7, potential_coords, FinderConfig, Vec35};
use spinform::spinor_flow::{cauchy_residual, flow_closed_form, flow_numeric, TableRow};
use spinform::{CauchyPair, Lapse, Multivector, QuadraticSpace};

/// Deterministic pseudo-random values in (-1, 1).
fn wave(n: usize, phase: f64) -> Vec<f64> {
    (0..n).map(|i| ((i as f64 + 1.0) * 12.9898 + phase).sin()).collect()
}

fn clifford(c: &mut Criterion) {
    let sp = QuadraticSpace::signature(8, 0).unwrap();
    let a = Multivector::from_coeffs(sp, wave(sp.num_blades(), 0.1)).unwrap();
    let b = Multivector::from_coeffs(sp, wave(sp.num_blades(), 0.7)).unwrap();
    c.bench_function("geometric product (8,0)", |bch| bch.iter(|| black_box(&a).gp(black_box(&b))));
    let m = CliffordModule::new(sp, 1).unwrap();
    c.bench_function("quantize (8,0)", |bch| bch.iter(|| m.quantize(black_box(&a))));
    let xi = Spinor::from_vec(wave(m.dim(), 0.3));
    c.bench_function("spinor square (8,0)", |bch| bch.iter(|| m.square_polyform(black_box(&xi), 1)));

    let mink = CliffordModule::standard(QuadraticSpace::minkowski()).unwrap();
    let alpha = mink.square_polyform(&Spinor::from_vec(wave(4, 0.5)), 1);
    c.bench_function("square to parabolic pair", |bch| bch.iter(|| square_to_pair(black_box(&alpha))));
}

fn spin7(c: &mut Criterion) {
    let x = cayley_form().coords() + Vec35::from_vec(wave(35, 0.2)) * 0.1;
    c.bench_function("potential W", |bch| bch.iter(|| potential_coords(black_box(&x))));
    c.bench_function("grad W", |bch| bch.iter(|| grad_coords(black_box(&x))));
    c.bench_function("hess W", |bch| bch.iter(|| hess_coords(black_box(&x))));
    let phi = cayley_form();
    c.bench_function("conformal Spin(7) certificate", |bch| bch.iter(|| is_conformal_spin7(&phi.space, black_box(&phi.phi), 1e-10)));
    let seed = phi.with_coords(&x);
    let cfg = FinderConfig {
        tol: 1e-10,
        ..FinderConfig::default()
    };
    c.bench_function("find_spin7 from 10% perturbation", |bch| bch.iter(|| find_spin7(black_box(&seed), &cfg)));
}

fn flow(c: &mut Criterion) {
    let theta = TableRow::Tau2General.instantiate(&[0.6, -0.4, 0.5]).unwrap();
    let pair = CauchyPair::on_catalog(&theta).unwrap();
    let lapse = Lapse::constant(1.0);
    c.bench_function("cauchy residual", |bch| bch.iter(|| cauchy_residual(black_box(&pair))));
    c.bench_function("closed-form flow", |bch| bch.iter(|| flow_closed_form(&pair, &lapse, black_box(0.3))));
    c.bench_function("RK4 flow, 1000 steps", |bch| bch.iter(|| flow_numeric(&pair, &lapse, black_box(0.3), 3e-4)));
}

criterion_group!(benches, clifford, spin7, flow);
criterion_main!(benches);
