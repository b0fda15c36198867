use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use railsched_bench::random_constraints;
use railsched_core::dl::{DiffSystem, Outcome};

/// Asserts until the first conflict, then backtracks one step and continues.
fn assert_all(constraints: &[railsched_core::dl::DiffConstraint], vars: u32) -> usize {
    let mut sys: DiffSystem<u32> = DiffSystem::new();
    for k in 1..=vars {
        sys.var(k);
    }
    let mut conflicts = 0;
    for &c in constraints {
        let mark = sys.checkpoint();
        if let Outcome::Conflict(_) = sys.assert_constraint(c).unwrap() {
            conflicts += 1;
            sys.retract_to(mark).unwrap();
        }
    }
    conflicts
}

fn bench_assert(c: &mut Criterion) {
    let mut group = c.benchmark_group("difference_logic");
    for (vars, count) in [(30, 120), (200, 1000), (1000, 5000)] {
        let cs = random_constraints(vars, count, 100, 7);
        group.bench_with_input(BenchmarkId::new("assert", format!("{vars}x{count}")), &cs, |b, cs| {
            b.iter(|| assert_all(black_box(cs), vars))
        });
    }
    group.finish();
}

criterion_group!(benches, bench_assert);
criterion_main!(benches);
