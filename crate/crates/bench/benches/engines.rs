use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use japdr_bench::{counter, random_suite, threshold_family};
use japdr_core::oracle::bmc;
use japdr_core::orchestrator::{run, Mode, TaskOptions, VerificationTask};
use japdr_core::sat::Solver;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn ja_counter(c: &mut Criterion) {
    let mut g = c.benchmark_group("ja_counter");
    for bits in [8, 12, 16, 20] {
        let (circ, props) = counter(bits);
        let task = VerificationTask::new(circ, props, Mode::Ja, TaskOptions::default()).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(bits), &task, |b, t| {
            b.iter(|| run(t).unwrap())
        });
    }
    g.finish();
}

fn bmc_counter(c: &mut Criterion) {
    let mut g = c.benchmark_group("bmc_counter");
    g.sample_size(10);
    for bits in [4, 6] {
        let (circ, props) = counter(bits);
        g.bench_with_input(BenchmarkId::from_parameter(bits), &circ, |b, circ| {
            b.iter(|| bmc(circ, &props[1], &[], 1 << bits, None))
        });
    }
    g.finish();
}

fn reuse(c: &mut Criterion) {
    let mut g = c.benchmark_group("threshold_family");
    g.sample_size(10);
    let (circ, props) = threshold_family(6);
    for reuse in [false, true] {
        let opts = TaskOptions {
            reuse_clauses: reuse,
            ..TaskOptions::default()
        };
        let task = VerificationTask::new(circ.clone(), props.clone(), Mode::Ja, opts).unwrap();
        g.bench_with_input(BenchmarkId::new("reuse", reuse), &task, |b, t| {
            b.iter(|| run(t).unwrap())
        });
    }
    g.finish();
}

fn modes(c: &mut Criterion) {
    let suite = random_suite(50);
    let mut g = c.benchmark_group("random_suite");
    g.sample_size(10);
    for mode in [Mode::Ja, Mode::Joint, Mode::SepGlobal] {
        g.bench_with_input(
            BenchmarkId::from_parameter(format!("{mode:?}")),
            &mode,
            |b, &m| {
                b.iter(|| {
                    for s in &suite {
                        let t = VerificationTask::new(
                            s.circuit.clone(),
                            s.properties.clone(),
                            m,
                            TaskOptions::default(),
                        )
                        .unwrap();
                        run(&t).unwrap();
                    }
                })
            },
        );
    }
    g.finish();
}

fn sat_random_3cnf(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let n = 120;
    let clauses: Vec<Vec<(usize, bool)>> = (0..(n as f64 * 4.2) as usize)
        .map(|_| {
            (0..3)
                .map(|_| (rng.gen_range(0..n), rng.gen_bool(0.5)))
                .collect()
        })
        .collect();
    c.bench_function("sat_3cnf_120", |b| {
        b.iter(|| {
            let mut s = Solver::new();
            let vars: Vec<_> = (0..n).map(|_| s.new_var()).collect();
            for cl in &clauses {
                let lits: Vec<_> = cl.iter().map(|&(v, p)| vars[v].lit(p)).collect();
                s.add_clause(&lits);
            }
            s.solve(&[])
        })
    });
}

criterion_group!(
    benches,
    ja_counter,
    bmc_counter,
    reuse,
    modes,
    sat_random_3cnf
);
criterion_main!(benches);
