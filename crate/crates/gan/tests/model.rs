use emgscrub_core::rng::{stream, Domain};
use emgscrub_gan::layers::Pass;
use emgscrub_gan::tensor::Tensor;
use emgscrub_gan::{Discriminator, DiscriminatorConfig, DiscriminatorHead, GanError, Generator, GeneratorConfig};
use rand::Rng;

fn random(shape: [usize; 4], seed: u64) -> Tensor<f32> {
    let mut rng = stream(seed, Domain::Fixture, 0);
    let n = shape.iter().product();
    Tensor::from_vec((0..n).map(|_| rng.random_range(-1.0f32..1.0)).collect(), shape)
}

fn conv(cin: usize, cout: usize, k: usize, bias: bool) -> usize {
    cin * cout * k * k + if bias { cout } else { 0 }
}

#[test]
fn generator_parameter_count() {
    let cfg = GeneratorConfig::default();
    let mut g = Generator::<f32>::new(cfg.clone(), &mut stream(0, Domain::WeightInit, 0)).unwrap();
    let (b0, b1, b2) = (64, 128, 256);
    let bn = |c| 2 * c;
    let expected = conv(1, b0, 7, false) + bn(b0)
        + conv(b0, b1, 3, false) + bn(b1)
        + conv(b1, b2, 3, false) + bn(b2)
        + 6 * (2 * conv(b2, b2, 3, false) + 2 * bn(b2))
        + conv(b2, b1, 3, false) + bn(b1)
        + conv(b1, b0, 3, false) + bn(b0)
        + conv(b0, 1, 7, true);
    assert_eq!(g.trainable_count(), expected);
    assert_eq!(expected, 7_828_865);
}

#[test]
fn discriminator_parameter_count() {
    let mut d = Discriminator::<f32>::new(DiscriminatorConfig::default(), &mut stream(0, Domain::WeightInit, 1)).unwrap();
    let expected = conv(2, 64, 4, true)
        + conv(64, 128, 4, false) + 256
        + conv(128, 256, 4, false) + 512
        + conv(256, 512, 3, false) + 1024
        + 512 * 4 * 4 + 1;
    assert_eq!(d.trainable_count(), expected);

    let patch = DiscriminatorConfig {
        head: DiscriminatorHead::Patch,
        ..DiscriminatorConfig::default()
    };
    let mut d = Discriminator::<f32>::new(patch, &mut stream(0, Domain::WeightInit, 1)).unwrap();
    assert_eq!(d.trainable_count(), expected - (512 * 16 + 1) + conv(512, 1, 3, true));
}

#[test]
fn generator_output_shape_and_range() {
    let g = Generator::<f32>::new(GeneratorConfig::default(), &mut stream(1, Domain::WeightInit, 0)).unwrap();
    let x = random([1, 3, 32, 32], 1);
    let y = g.infer(&x).unwrap();
    assert_eq!(y.shape, [1, 3, 32, 32]);
    assert!(y.data.iter().all(|v| (-1.0..=1.0).contains(v)));
    assert_eq!(g.infer(&x).unwrap().data, y.data);
}

#[test]
fn generator_train_forward_is_seeded() {
    let mut g = Generator::<f32>::new(GeneratorConfig::default(), &mut stream(1, Domain::WeightInit, 0)).unwrap();
    let x = random([1, 2, 32, 32], 2);
    let mut run = |seed| {
        let mut rng = stream(seed, Domain::Dropout, 0);
        g.forward(&x, &mut Pass { train: true, rng: &mut rng }).unwrap().data
    };
    let a = run(3);
    assert_eq!(a, run(3));
    assert_ne!(a, run(4));
}

#[test]
fn generator_rejects_wrong_shape() {
    let g = Generator::<f32>::new(GeneratorConfig::default(), &mut stream(1, Domain::WeightInit, 0)).unwrap();
    assert!(matches!(g.infer(&random([1, 1, 16, 16], 0)), Err(GanError::Shape(_))));
    assert!(matches!(g.infer(&random([2, 1, 32, 32], 0)), Err(GanError::Shape(_))));
}

#[test]
fn discriminator_starts_undecided() {
    let d = Discriminator::<f32>::new(DiscriminatorConfig::default(), &mut stream(5, Domain::WeightInit, 1)).unwrap();
    let p = d.infer(&random([1, 100, 32, 32], 6), &random([1, 100, 32, 32], 7)).unwrap();
    assert_eq!(p.shape, [1, 100, 1, 1]);
    let mean = p.data.iter().map(|&v| v as f64).sum::<f64>() / 100.0;
    assert!((mean - 0.5).abs() < 0.2, "mean {mean}");
    assert!(p.data.iter().all(|v| (0.0..=1.0).contains(v)));
}

#[test]
fn patch_head_scores_every_location() {
    let cfg = DiscriminatorConfig {
        head: DiscriminatorHead::Patch,
        ..DiscriminatorConfig::default()
    };
    let d = Discriminator::<f32>::new(cfg, &mut stream(5, Domain::WeightInit, 1)).unwrap();
    let p = d.infer(&random([1, 2, 32, 32], 6), &random([1, 2, 32, 32], 7)).unwrap();
    assert_eq!(p.shape, [1, 2, 4, 4]);
}

#[test]
fn config_validation() {
    let bad = GeneratorConfig {
        image_side: 30,
        ..GeneratorConfig::default()
    };
    assert!(Generator::<f32>::new(bad, &mut stream(0, Domain::WeightInit, 0)).is_err());
    let bad = GeneratorConfig {
        dropout: 1.0,
        ..GeneratorConfig::default()
    };
    assert!(bad.validate().is_err());
    let bad = DiscriminatorConfig {
        image_side: 12,
        ..DiscriminatorConfig::default()
    };
    assert!(bad.validate().is_err());
}
