//! Timings for the hot paths: full axiom sweeps, annihilation windows,
//! and the cochain differential.
//!
//! Sample sizes are kept small because a single axiom sweep already
//! multiplies out every bracket pair; the point is regression tracking,
//! not microsecond resolution.

use criterion::{criterion_group, criterion_main, Criterion};
use nlca_core::{
    adjoint_module, check_ann_filippov, cochain_differential, current_algebra, random_cochain,
    rank2_family_ii, simple_3lie, slot_var, MultiPoly, SeededRng,
};
use std::time::Duration;

fn cur_simple3() -> nlca_core::NlcaPresentation {
    current_algebra(&simple_3lie()).expect("valid structure constants")
}

fn rank2_ii_linear() -> nlca_core::NlcaPresentation {
    let h = MultiPoly::var(slot_var(1)).sub(&MultiPoly::var(slot_var(2)));
    rank2_family_ii(3, &h).expect("x - y is skew")
}

fn axiom_sweeps(c: &mut Criterion) {
    let cur = cur_simple3();
    let rank2 = rank2_ii_linear();
    c.bench_function("filippov_current_simple3", |b| {
        b.iter(|| cur.check_filippov())
    });
    c.bench_function("filippov_rank2_ii", |b| b.iter(|| rank2.check_filippov()));
}

fn annihilation_windows(c: &mut Criterion) {
    let cur = cur_simple3();
    let rank2 = rank2_ii_linear();
    c.bench_function("ann_filippov_current_p1_total2", |b| {
        b.iter(|| check_ann_filippov(&cur, 1, 2))
    });
    c.bench_function("ann_filippov_rank2_ii_p2_total2", |b| {
        b.iter(|| check_ann_filippov(&rank2, 2, 2))
    });
}

fn cochain_differentials(c: &mut Criterion) {
    let cur = cur_simple3();
    let cur_mod = adjoint_module(&cur);
    let rank2 = rank2_ii_linear();
    let rank2_mod = adjoint_module(&rank2);
    let mut rng = SeededRng::new(0xbe7c);
    let gamma_cur =
        random_cochain(&cur, &cur_mod, 1, 2, 3, &mut rng).expect("valid degree");
    let gamma_rank2 =
        random_cochain(&rank2, &rank2_mod, 2, 2, 3, &mut rng).expect("valid degree");
    c.bench_function("differential_current_q1", |b| {
        b.iter(|| cochain_differential(&gamma_cur, &cur, &cur_mod).expect("defined"))
    });
    c.bench_function("differential_rank2_ii_q2", |b| {
        b.iter(|| cochain_differential(&gamma_rank2, &rank2, &rank2_mod).expect("defined"))
    });
}

fn config() -> Criterion {
    Criterion::default()
        .sample_size(10)
        .warm_up_time(Duration::from_millis(500))
        .measurement_time(Duration::from_secs(5))
}

criterion_group! {
    name = benches;
    config = config();
    targets = axiom_sweeps, annihilation_windows, cochain_differentials
}
criterion_main!(benches);
