use emgscrub_gan::gradcheck::{check_discriminator, check_generator, relative_error, GradCheckConfig};

#[test]
fn relative_error_floors_tiny_gradients() {
    assert_eq!(relative_error(1.0, 1.0), 0.0);
    assert!((relative_error(1.0, 1.001) - 0.001 / 1.001).abs() < 1e-15);
    assert!(relative_error(1e-12, -1e-12) < 1e-4);
}

#[test]
fn generator_gradients_match_finite_differences() {
    let r = check_generator(&GradCheckConfig::default()).unwrap();
    println!("{r:?}");
    assert!(r.checked >= 200);
    assert!(r.pass_rate() >= 0.95, "{r:?}");
}

#[test]
fn discriminator_gradients_match_finite_differences() {
    let r = check_discriminator(&GradCheckConfig::default()).unwrap();
    println!("{r:?}");
    assert!(r.checked >= 200);
    assert!(r.pass_rate() >= 0.95, "{r:?}");
}
