use criterion::{black_box, criterion_group, criterion_main, Criterion};

use sellock::belief::{bayes_update, Feedback};
use sellock::diagnostics::{estimate_I_th, exact_I_th_family};
use sellock::trainers::policy_step;
use sellock::{rng, Belief};
use sellock_bench::{batch, reference, train_config};

fn bench_bayes_update(c: &mut Criterion) {
    let (family, _) = reference();
    let ep = family.template();
    let b = Belief::uniform(ep.num_states());
    let o = ep.obs_fn().observe(ep.true_state(), 1);
    c.bench_function("bayes_update", |bench| bench.iter(|| bayes_update(black_box(&b), 1, o, ep.obs_fn()).unwrap()));
}

fn bench_rollout(c: &mut Criterion) {
    let (family, agent) = reference();
    let ep = family.template();
    let mut r = rng::stream(1, rng::streams::ROLLOUT);
    c.bench_function("rollout", |bench| bench.iter(|| sellock::agent::rollout(&agent, black_box(&ep), &mut r).unwrap()));
}

fn bench_exact_i_th(c: &mut Criterion) {
    let (family, agent) = reference();
    c.bench_function("exact_I_th_family", |bench| bench.iter(|| exact_I_th_family(black_box(&agent), &family).unwrap()));
}

fn bench_estimate_i_th(c: &mut Criterion) {
    let (family, agent) = reference();
    let mut r = rng::stream(2, rng::streams::DIAGNOSTICS);
    c.bench_function("estimate_I_th_1000", |bench| {
        bench.iter(|| estimate_I_th(black_box(&agent), &family, 1000, &mut r).unwrap())
    });
}

fn bench_policy_step(c: &mut Criterion) {
    let (family, agent) = reference();
    let cfg = train_config();
    let samples = batch(&family, &agent, cfg.batch_size);
    c.bench_function("policy_step_48", |bench| bench.iter(|| policy_step(black_box(&agent), &samples, &cfg).unwrap()));
}

criterion_group!(
    kernels,
    bench_bayes_update,
    bench_rollout,
    bench_exact_i_th,
    bench_estimate_i_th,
    bench_policy_step
);
criterion_main!(kernels);
