//! Parallel-vs-sequential comparison of the data-parallel inner loops:
//! Jacobi triple sweeps, commutation case grids, and cyclicity sweeps.
//! With the `parallel` feature (default) the "par" variants dispatch through
//! rayon; without it both variants coincide.

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use hyperloop_core::chevalley::{chevalley_basis, combo_add, GCombo, GElt, Sign};
use hyperloop_core::coeffring::Char0;
use hyperloop_core::par::{maybe_par_map, seq_map};
use hyperloop_core::rootfold::DynkinType;
use hyperloop_core::verify::{
    field_for, run_garland_case, twisted_basis_for, twisted_eval_module, window_stable_cyclicity,
    AutoKind, GarlandCase, GarlandFamily,
};

fn jacobi_triples(c: &mut Criterion) {
    let cb = chevalley_basis(DynkinType::parse("A3").unwrap());
    let mut elems: Vec<GElt> = (0..cb.rs.rank()).map(GElt::H).collect();
    for r in 0..cb.rs.num_positive() {
        elems.push(GElt::X(r, Sign::Plus));
        elems.push(GElt::X(r, Sign::Minus));
    }
    let mut triples = Vec::new();
    for i in 0..elems.len() {
        for j in 0..elems.len() {
            for k in 0..elems.len() {
                triples.push((i, j, k));
            }
        }
    }
    let single = |e: GElt| -> GCombo {
        let mut c = GCombo::new();
        c.insert(e, Char0::one());
        c
    };
    let check = |&(i, j, k): &(usize, usize, usize)| -> bool {
        let (a, b, cc) = (single(elems[i]), single(elems[j]), single(elems[k]));
        let mut acc = cb.bracket_combo(&cb.bracket_combo(&a, &b), &cc);
        acc = combo_add(acc, &cb.bracket_combo(&cb.bracket_combo(&b, &cc), &a), &Char0::one());
        acc = combo_add(acc, &cb.bracket_combo(&cb.bracket_combo(&cc, &a), &b), &Char0::one());
        acc.is_empty()
    };
    let mut group = c.benchmark_group("jacobi_sweep_a3");
    group.sample_size(10);
    group.bench_function("seq", |b| {
        b.iter(|| seq_map(&triples, check).iter().all(|&x| x))
    });
    group.bench_function("par", |b| {
        b.iter(|| maybe_par_map(&triples, check).iter().all(|&x| x))
    });
    group.finish();
}

fn garland_cases(c: &mut Criterion) {
    let cases: Vec<GarlandCase> = [5u64, 7]
        .into_iter()
        .flat_map(|p| {
            [GarlandFamily::GradedShort, GarlandFamily::FixedLong].map(|family| GarlandCase {
                base: DynkinType::parse("A3").unwrap(),
                auto: AutoKind::Flip,
                family,
                p,
                a: 2,
                values: vec![1, 1],
                kmax: 4,
                s_range: vec![0, 1],
                k_range: vec![1, 2],
            })
        })
        .collect();
    // warm the shared caches so both variants measure the same work
    let _ = run_garland_case(&cases[0]);
    let mut group = c.benchmark_group("garland_cases_a3");
    group.sample_size(10);
    group.bench_function("seq", |b| {
        b.iter_batched(
            || cases.clone(),
            |cs| seq_map(&cs, run_garland_case).len(),
            BatchSize::SmallInput,
        )
    });
    group.bench_function("par", |b| {
        b.iter_batched(
            || cases.clone(),
            |cs| maybe_par_map(&cs, run_garland_case).len(),
            BatchSize::SmallInput,
        )
    });
    group.finish();
}

fn cyclicity_sweep(c: &mut Criterion) {
    let tb = twisted_basis_for(DynkinType::parse("A3").unwrap(), AutoKind::Flip).unwrap();
    let field = field_for(&tb, 7, 1).unwrap();
    let tm = twisted_eval_module(&tb, &field, &[1, 1], 2, 4);
    let mut group = c.benchmark_group("cyclicity_a3");
    group.sample_size(10);
    // the sweep itself parallelizes over seed vectors through the same
    // helper, so one benchmark captures the configured dispatch
    group.bench_function("window_stable", |b| {
        b.iter(|| window_stable_cyclicity(&tm, 2))
    });
    group.finish();
}

criterion_group!(benches, jacobi_triples, garland_cases, cyclicity_sweep);
criterion_main!(benches);
