use criterion::{black_box, criterion_group, criterion_main, Criterion};

use fmf_bench::setup;
use fmf_core::eigsys::{synthesize, SynthOptions};
use fmf_core::heckemat::matrix_set_for;
use fmf_core::heckeops::Op;
use fmf_core::ideals::primes_above;
use fmf_core::msym::P1;
use fmf_core::{ClassGroup, Field, FormalSum, Ideal, Lattice, Level};

fn class_groups(c: &mut Criterion) {
    c.bench_function("class group d=5", |b| b.iter(|| ClassGroup::new(Field::new(black_box(5)).unwrap())));
    c.bench_function("class group d=231", |b| b.iter(|| ClassGroup::new(Field::new(black_box(231)).unwrap())));
}

fn projective_line(c: &mut Criterion) {
    let f = Field::new(1).unwrap();
    let n = Ideal::from_int(f, 30).unwrap();
    c.bench_function("P1 of (30) over Q(i)", |b| b.iter(|| P1::new(black_box(&n)).unwrap()));
}

fn sublattices(c: &mut Criterion) {
    let f = Field::new(5).unwrap();
    let b = Ideal::from_int(f, 12).unwrap();
    let std = Lattice::standard(f);
    c.bench_function("sublattices of index (12)", |bch| bch.iter(|| std.sublattices(black_box(&b)).unwrap()));
}

fn hecke(c: &mut Criterion) {
    let (cg, n) = setup(5, 3).unwrap();
    let f = cg.field();
    let lv = Level::new(cg.clone(), &n).unwrap();
    let v = FormalSum::point(&n, lv.principal_point0());
    let p7 = primes_above(f, 7)[0].0;
    let op = Op::Ta(p7);
    c.bench_function("T_p7 on a point", |b| b.iter(|| op.apply(black_box(&v)).unwrap()));
    let p2 = primes_above(f, 2)[0].0;
    let set_op = Op::Comp(vec![Op::Taa(p2), Op::Ta(p7.mul(&primes_above(f, 3)[1].0))]);
    c.bench_function("matrix set Taa(p2) T(p3 p7)", |b| {
        b.iter(|| matrix_set_for(&cg, black_box(&set_op), &n).unwrap())
    });
}

fn recovery(c: &mut Criterion) {
    let (cg, n) = setup(5, 3).unwrap();
    let lam = synthesize(1, cg, n, 60, SynthOptions::default());
    let r = lam.restrict_to_principal().with_witnesses(lam.witnesses());
    c.bench_function("restrict B=60", |b| b.iter(|| black_box(&lam).restrict_to_principal()));
    c.bench_function("recover B=60", |b| b.iter(|| black_box(&r).recover().unwrap()));
}

criterion_group!(benches, class_groups, projective_line, sublattices, hecke, recovery);
criterion_main!(benches);
