//! Adversarial and reconstruction objectives.
//!
//! Probabilities are clamped to `[ε, 1 − ε]` before taking logarithms; the
//! clamp has zero gradient outside that interval.

use crate::tensor::{Scalar, Tensor};
use crate::{GanError, Result};

pub const PROB_EPS: f64 = 1e-7;

fn clamp_prob(p: f64) -> f64 {
    p.clamp(PROB_EPS, 1.0 - PROB_EPS)
}

/// `(loss_D, loss_G_adv)` for a single pair of discriminator outputs:
/// `loss_D = −[ln d_real + ln(1 − d_fake)]`, `loss_G_adv = −ln d_fake`.
pub fn adversarial_losses(d_real: f64, d_fake: f64) -> (f64, f64) {
    let (r, f) = (clamp_prob(d_real), clamp_prob(d_fake));
    (-(r.ln() + (1.0 - f).ln()), -f.ln())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Target {
    Real,
    Fake,
}

/// Mean binary cross-entropy of probabilities against a constant label, and
/// its gradient with respect to the probabilities.
pub fn bce<T: Scalar>(probs: &Tensor<T>, target: Target) -> (f64, Tensor<T>) {
    let n = probs.len() as f64;
    let mut loss = 0.0;
    let grad = probs
        .data
        .iter()
        .map(|&p| {
            let p = p.to_f64().unwrap();
            let c = clamp_prob(p);
            let inside = p == c;
            let (l, g) = match target {
                Target::Real => (-c.ln(), if inside { -1.0 / c } else { 0.0 }),
                Target::Fake => (-(1.0 - c).ln(), if inside { 1.0 / (1.0 - c) } else { 0.0 }),
            };
            loss += l;
            T::from_f64_lossy(g / n)
        })
        .collect();
    (loss / n, Tensor::from_vec(grad, probs.shape))
}

/// Mean absolute difference.
pub fn l1_loss<T: Scalar>(generated: &[T], target: &[T]) -> Result<f64> {
    if generated.len() != target.len() || generated.is_empty() {
        return Err(GanError::Shape(format!(
            "L1 operands have {} and {} elements",
            generated.len(),
            target.len()
        )));
    }
    let sum: f64 = generated
        .iter()
        .zip(target)
        .map(|(&a, &b)| (a - b).abs().to_f64().unwrap())
        .sum();
    Ok(sum / generated.len() as f64)
}

/// Subgradient of [`l1_loss`] scaled by `weight`.
pub fn l1_grad<T: Scalar>(generated: &Tensor<T>, target: &Tensor<T>, weight: f64) -> Tensor<T> {
    let k = T::from_f64_lossy(weight / generated.len() as f64);
    let data = generated
        .data
        .iter()
        .zip(&target.data)
        .map(|(&a, &b)| {
            if a > b {
                k
            } else if a < b {
                -k
            } else {
                T::zero()
            }
        })
        .collect();
    Tensor::from_vec(data, generated.shape)
}

/// Combined generator objective `adv + l1_weight · l1`.
pub fn total_generator_loss(loss_g_adv: f64, l1: f64, l1_weight: f64) -> f64 {
    loss_g_adv + l1_weight * l1
}
