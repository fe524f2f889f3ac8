//! Parallel versus sequential joins on a generated people-and-companies
//! graph whose hub entities make the intermediate tables large.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use exemplar_core::{DataGraph, Engine, QueryParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn generate(people: usize) -> DataGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let companies = people / 20;
    let cities = 60;
    let mut rows = Vec::new();
    for c in 0..companies {
        rows.push((format!("company{c}"), "headquartered_in".to_string(), format!("city{}", rng.random_range(0..cities))));
        rows.push((format!("company{c}"), "industry".to_string(), format!("industry{}", rng.random_range(0..8))));
    }
    for c in 0..cities {
        rows.push((format!("city{c}"), "located_in".to_string(), format!("state{}", c % 6)));
    }
    for p in 0..people {
        let person = format!("person{p}");
        rows.push((person.clone(), "founded".to_string(), format!("company{}", rng.random_range(0..companies))));
        rows.push((person.clone(), "nationality".to_string(), format!("country{}", rng.random_range(0..4))));
        rows.push((person.clone(), "places_lived".to_string(), format!("city{}", rng.random_range(0..cities))));
        rows.push((person, "education".to_string(), format!("school{}", rng.random_range(0..30))));
    }
    DataGraph::from_triples(rows).unwrap()
}

fn exploration(c: &mut Criterion) {
    let g = generate(3_000);
    let engine = Engine::new(&g);
    let founder = g
        .edges()
        .iter()
        .find(|t| g.label_name(t.label) == "founded")
        .copied()
        .unwrap();
    let tuple = vec![vec![g.entity_name(founder.subj), g.entity_name(founder.obj)]];
    let mut group = c.benchmark_group("explore");
    group.sample_size(10);
    for parallel in [true, false] {
        let params = QueryParams {
            k: 10,
            k_prime: 100,
            r: 6,
            parallel,
            ..QueryParams::default()
        };
        let resolved = engine.resolve(&tuple).unwrap();
        let prepared = engine.prepare(&resolved, &params).unwrap();
        let name = if parallel { "parallel" } else { "sequential" };
        group.bench_with_input(BenchmarkId::new(name, prepared.mqg.edge_count()), &prepared, |b, prepared| {
            b.iter(|| black_box(engine.run(prepared.clone(), &params).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, exploration);
criterion_main!(benches);
