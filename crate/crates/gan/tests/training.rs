mod common;

use common::{images, quick, small};
use emgscrub_gan::train::{train, PairedImages};
use emgscrub_gan::{GanError, TrainConfig, Trainer};

#[test]
fn one_batch_epoch_takes_one_step_each() {
    let (g, d) = small();
    let data = images(8, 1);
    let mut t = Trainer::new(g, d, quick(1, 8)).unwrap();
    let stats = t.train_epoch(&data).unwrap();
    assert_eq!((stats.d_steps, stats.g_steps), (1, 1));
    assert_eq!(t.epoch(), 1);
    assert_eq!(t.history().len(), 1);
}

#[test]
fn partial_batches_count_as_steps() {
    let (g, d) = small();
    let mut t = Trainer::new(g, d, quick(1, 4)).unwrap();
    let stats = t.train_epoch(&images(10, 2)).unwrap();
    assert_eq!((stats.d_steps, stats.g_steps), (3, 3));
}

#[test]
fn losses_are_finite_and_consistent() {
    let (g, d) = small();
    let cfg = quick(2, 4);
    let (_, history) = train(&images(8, 3), g, d, cfg.clone(), |_| {}).unwrap();
    assert_eq!(history.len(), 2);
    for s in &history {
        assert!(s.loss_d.is_finite() && s.loss_d > 0.0);
        assert!(s.loss_g_adv.is_finite() && s.loss_g_adv > 0.0);
        assert!((s.loss_g_total - (s.loss_g_adv + cfg.l1_weight * s.loss_l1)).abs() < 1e-9 * s.loss_g_total);
    }
}

#[test]
fn same_seed_same_history() {
    let data = images(12, 4);
    let run = |seed| {
        let (g, d) = small();
        let cfg = TrainConfig { seed, ..quick(3, 4) };
        train(&data, g, d, cfg, |_| {}).unwrap()
    };
    let (ck_a, a) = run(9);
    let (ck_b, b) = run(9);
    assert_eq!(a, b);
    assert_eq!(ck_a.to_bytes(), ck_b.to_bytes());
    assert_ne!(run(10).1, a);
}

#[test]
fn empty_dataset_is_rejected() {
    let (g, d) = small();
    let err = train(&PairedImages::default(), g, d, quick(1, 4), |_| {}).unwrap_err();
    assert!(matches!(err, GanError::EmptyDataset));
}

#[test]
fn invalid_config_is_rejected() {
    let (g, d) = small();
    for cfg in [
        TrainConfig { batch_size: 0, ..quick(1, 4) },
        TrainConfig { learning_rate: 0.0, ..quick(1, 4) },
        TrainConfig { dropout: 1.5, ..quick(1, 4) },
        TrainConfig { adam_beta1: 1.0, ..quick(1, 4) },
    ] {
        assert!(matches!(Trainer::new(g.clone(), d.clone(), cfg), Err(GanError::Config(_))));
    }
}

#[test]
fn l1_falls_over_short_run() {
    let (mut g, mut d) = small();
    g.base_channels = 16;
    g.max_channels = 64;
    g.n_resnet_blocks = 2;
    d.base_channels = 16;
    let (_, h) = train(&images(64, 5), g, d, quick(20, 16), |_| {}).unwrap();
    let mean = |s: &[emgscrub_gan::EpochStats]| s.iter().map(|e| e.loss_l1).sum::<f64>() / s.len() as f64;
    let (first, last) = (mean(&h[..5]), mean(&h[15..]));
    assert!(last < first, "L1 first {first} last {last}");
}
