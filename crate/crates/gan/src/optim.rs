use crate::layers::{Role, Visitor};
use crate::tensor::Scalar;

/// Adam with bias correction. Moment buffers follow the visit order of the
/// model's trainable parameters and are created on the first update.
#[derive(Clone, Debug)]
pub struct Adam<T> {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub step: u64,
    pub moments: Vec<(Vec<T>, Vec<T>)>,
}

impl<T: Scalar> Adam<T> {
    pub fn new(lr: f64, beta1: f64, beta2: f64) -> Self {
        Adam {
            lr,
            beta1,
            beta2,
            eps: 1e-8,
            step: 0,
            moments: Vec::new(),
        }
    }

    /// Apply one update using the gradients currently stored in the model.
    pub fn update(&mut self, visit: impl FnOnce(&mut Visitor<'_, T>)) {
        self.step += 1;
        let t = self.step as i32;
        let lr_t = self.lr * (1.0 - self.beta2.powi(t)).sqrt() / (1.0 - self.beta1.powi(t));
        let (b1, b2) = (T::from_f64_lossy(self.beta1), T::from_f64_lossy(self.beta2));
        let (lr_t, eps) = (T::from_f64_lossy(lr_t), T::from_f64_lossy(self.eps));
        let one = T::one();
        let moments = &mut self.moments;
        let mut i = 0;
        visit(&mut |_, p, role| {
            if role != Role::Trainable {
                return;
            }
            if moments.len() <= i {
                moments.push((vec![T::zero(); p.len()], vec![T::zero(); p.len()]));
            }
            let (m, v) = &mut moments[i];
            for (((w, &g), m), v) in p.value.iter_mut().zip(&p.grad).zip(m.iter_mut()).zip(v.iter_mut()) {
                *m = b1 * *m + (one - b1) * g;
                *v = b2 * *v + (one - b2) * g * g;
                *w = *w - lr_t * *m / (v.sqrt() + eps);
            }
            i += 1;
        });
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::layers::Param;

    #[test]
    fn adam_descends_a_quadratic() {
        let mut p = Param::<f64>::filled(&[2], 3.0);
        let mut opt = Adam::new(0.1, 0.9, 0.999);
        for _ in 0..500 {
            p.grad = p.value.iter().map(|w| 2.0 * w).collect();
            opt.update(|f| f("w", &mut p, Role::Trainable));
        }
        assert!(p.value.iter().all(|w| w.abs() < 0.05), "{:?}", p.value);
        assert_eq!(opt.step, 500);
    }

    #[test]
    fn first_step_moves_by_learning_rate() {
        let mut p = Param::<f64>::filled(&[1], 1.0);
        p.grad = vec![0.3];
        let mut opt = Adam::new(0.01, 0.5, 0.999);
        opt.update(|f| f("w", &mut p, Role::Trainable));
        assert!((p.value[0] - 0.99).abs() < 1e-6);
    }
}
