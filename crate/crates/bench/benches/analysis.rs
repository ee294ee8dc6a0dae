use std::sync::Arc;

use criterion::{black_box, criterion_group, criterion_main, Criterion};
use gnoop_core::denote::TheoremOptions;
use gnoop_core::generate::campaign;
use gnoop_core::{
    fixtures, instantiation_closure, parse_env, parse_type_name, theorem_check_with, wf_env, GenericObjectSignature,
    Hierarchy,
};

fn parsing(c: &mut Criterion) {
    c.bench_function("parse pair fixture", |b| b.iter(|| parse_env(black_box(fixtures::PAIR_SRC)).unwrap()));
}

fn well_formedness(c: &mut Criterion) {
    let envs = campaign(1, 20);
    c.bench_function("wf_env on 20 generated environments", |b| {
        b.iter(|| envs.iter().filter(|e| wf_env(black_box(e)).ok).count())
    });
}

fn supersignatures(c: &mut Criterion) {
    let env = fixtures::javac_with_top();
    let g = parse_type_name("C<C<C<Int>>>", &env).unwrap();
    c.bench_function("gss cold", |b| b.iter(|| Hierarchy::new(&env).gss(black_box(&g)).unwrap().len()));
}

fn closure(c: &mut Criterion) {
    let env = Arc::new(fixtures::recur());
    let gos = GenericObjectSignature::new(parse_type_name("C<Int>", &env).unwrap(), env.clone()).unwrap();
    c.bench_function("closure of expansive C<Int>, fuel 200", |b| {
        b.iter(|| instantiation_closure(black_box(&gos), 200).names.len())
    });
}

fn theorem(c: &mut Criterion) {
    let env = fixtures::pair();
    let opts = TheoremOptions::default();
    c.bench_function("theorem check pair fixture depth 2", |b| {
        b.iter(|| theorem_check_with(black_box(&env), &opts).violations)
    });
}

criterion_group!(benches, parsing, well_formedness, supersignatures, closure, theorem);
criterion_main!(benches);
