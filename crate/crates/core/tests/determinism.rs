use sellock::reference::{reference_agent, reference_family, reference_train_config};
use sellock::trainers::{train, ArewMode};
use sellock::{CritiqueConfig, TrainSetup};

fn run_on(threads: usize) -> String {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
    pool.install(|| {
        let family = reference_family().unwrap();
        let agent = reference_agent(&family).unwrap();
        let mut train_cfg = reference_train_config(ArewMode::AsBt);
        train_cfg.steps = 15;
        let setup = TrainSetup {
            train: train_cfg,
            critique: CritiqueConfig { flip_alpha: 0.2, ..CritiqueConfig::default() },
            record_params: true,
        };
        let run = train(&setup, &family, &agent, 3).unwrap();
        format!("{:?}{:?}", run.metrics, run.param_history)
    })
}

#[test]
fn training_does_not_depend_on_thread_count() {
    let one = run_on(1);
    assert_eq!(one, run_on(4));
    assert_eq!(one, run_on(7));
}
