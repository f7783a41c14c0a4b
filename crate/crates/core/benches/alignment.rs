use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use bhalign::optimize::{align, search_rotation, OptimizerConfig, Prepared};
use bhalign::par::with_threads;
use bhalign::volio::{make_phantom, PhantomSpec};

fn small_config() -> OptimizerConfig {
    OptimizerConfig { l_max: 16, fixed_bands: Some(vec![4, 8, 14]), shift_radius: 1, shift_step: 1, ..Default::default() }
}

fn pools() -> Vec<(String, usize)> {
    let all = std::thread::available_parallelism().map_or(1, |n| n.get());
    let mode = if cfg!(feature = "parallel") { "rayon" } else { "sequential" };
    let mut out = vec![(format!("{mode}-1"), 1)];
    if cfg!(feature = "parallel") && all > 1 {
        out.push((format!("{mode}-{all}"), all));
    }
    out
}

fn kernels(c: &mut Criterion) {
    let p = make_phantom(&PhantomSpec { n: 32, seed: 3, true_shift: Some([1, 0, 0]), ..Default::default() }).unwrap();
    let cfg = small_config();
    let prep = Prepared::new(&p.template, &cfg).unwrap();
    let (xi, _) = prep.kernel(&p.subtomogram, [1, 0, 0]).unwrap();

    let mut g = c.benchmark_group("kernel");
    for (name, threads) in pools() {
        g.bench_function(BenchmarkId::new("expand_and_contract", &name), |b| {
            with_threads(threads, || b.iter(|| prep.kernel(&p.subtomogram, [1, 0, 0]).unwrap()))
        });
        g.bench_function(BenchmarkId::new("search_rotation", &name), |b| {
            with_threads(threads, || b.iter(|| search_rotation(&xi, &[4, 8, 14], &cfg).unwrap()))
        });
    }
    g.finish();
}

fn full_align(c: &mut Criterion) {
    let p = make_phantom(&PhantomSpec { n: 32, seed: 4, true_shift: Some([0, 1, -1]), ..Default::default() }).unwrap();
    let cfg = small_config();
    let mut g = c.benchmark_group("align");
    g.sample_size(10);
    for (name, threads) in pools() {
        g.bench_function(BenchmarkId::new("n32_l16", &name), |b| {
            with_threads(threads, || b.iter(|| align(&p.template, &p.subtomogram, &cfg, None).unwrap()))
        });
    }
    g.finish();
}

criterion_group!(benches, kernels, full_align);
criterion_main!(benches);
