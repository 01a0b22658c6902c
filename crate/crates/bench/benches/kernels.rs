use criterion::{criterion_group, criterion_main, Criterion};
use nalgebra::DVector;
use num_complex::Complex64;
use num_rational::BigRational;

use unitheta_core::green::{
    psi0_singular, theta_psi, DomainPoint, LatticeEmbedding, PolyTable,
};
use unitheta_core::lattice::{
    base_majorant, enumerate_vectors_sharded, HermitianLattice, ImagQuadField, QuadElem,
};
use unitheta_core::schrodinger::compute_p;
use unitheta_core::special::PrecisionPolicy;
use unitheta_core::weil::verify_main_identity;

fn hyperbolic_plane() -> HermitianLattice {
    let field = ImagQuadField::new(-4).unwrap();
    let gram = vec![
        vec![QuadElem::from_ints(1, 0), QuadElem::zero()],
        vec![QuadElem::zero(), QuadElem::from_ints(-1, 0)],
    ];
    HermitianLattice::new(field, (1, 1), gram).unwrap()
}

fn bench_symbolic(c: &mut Criterion) {
    c.bench_function("verify_main_identity_2_2", |b| {
        b.iter(|| verify_main_identity(2, 2).unwrap())
    });
    c.bench_function("compute_p_2_3", |b| {
        b.iter(|| compute_p(2, 3, &[1, 2], &[1, 1]).unwrap())
    });
}

fn bench_singular_form(c: &mut Criterion) {
    let table = PolyTable::new(2, 2).unwrap();
    let z = DomainPoint::geodesic(2, 2, 0.4);
    let policy = PrecisionPolicy::default();
    let x = DVector::from_vec(vec![
        Complex64::new(0.9, 0.2),
        Complex64::new(-0.4, 0.7),
        Complex64::new(0.3, -0.5),
        Complex64::new(0.6, 0.1),
    ]);
    c.bench_function("psi0_singular_2_2", |b| {
        b.iter(|| psi0_singular(&x, &z, &table, &policy).unwrap())
    });
}

fn bench_lattice(c: &mut Criterion) {
    let lat = hyperbolic_plane();
    let maj = base_majorant(&lat);
    let h = vec![BigRational::default(); 4];
    let two_m = BigRational::from_integer(2.into());
    c.bench_function("enumerate_norm2_bound40", |b| {
        b.iter(|| enumerate_vectors_sharded(&lat, &h, &two_m, &maj, 40.0, 1).unwrap())
    });

    let table = PolyTable::new(1, 1).unwrap();
    let emb = LatticeEmbedding::new(&lat).unwrap();
    let group = lat.discriminant_group().unwrap();
    let z = DomainPoint::base(1, 1);
    let policy = PrecisionPolicy::default();
    c.bench_function("theta_bound12", |b| {
        b.iter(|| {
            theta_psi(&lat, &emb, &table, &group, (0.3, 0.8), &z, 12.0, 1, &policy).unwrap()
        })
    });
}

criterion_group!(benches, bench_symbolic, bench_singular_form, bench_lattice);
criterion_main!(benches);
