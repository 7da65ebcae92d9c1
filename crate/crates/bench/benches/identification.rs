use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use ctfid_bench::{enumeration_model, examples};
use ctfid_core::{cond_ctf_id, parse_query};

fn identification(c: &mut Criterion) {
    let mut group = c.benchmark_group("identify");
    for w in examples() {
        group.bench_function(w.name, |b| {
            b.iter(|| cond_ctf_id(black_box(&w.query), &w.spec, &w.graph).unwrap())
        });
    }
    group.finish();
}

fn enumeration(c: &mut Criterion) {
    let m = enumeration_model(3);
    let q = parse_query("P(E[A=1, D=D[A=0]]=1 | C=0)", m.graph()).unwrap();
    c.bench_function("enumerate/nested_conditional", |b| {
        b.iter(|| {
            m.conditional_probability(black_box(&q.outcome), &q.conditioning)
                .unwrap()
        })
    });
}

criterion_group!(benches, identification, enumeration);
criterion_main!(benches);
