//! Named parameter store with per-parameter gradient and momentum buffers.

use super::real::Real;
use super::tensor::Tensor;
use crate::error::{Error, Result};
use std::collections::BTreeMap;

/// Handle to a parameter inside a [`ParamStore`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParamId(pub(crate) usize);

#[derive(Debug, Clone)]
pub struct Param<R: Real> {
    pub name: String,
    pub value: Tensor<R>,
    pub grad: Tensor<R>,
    pub momentum: Tensor<R>,
    /// Non-trainable entries (batchnorm running statistics) are carried in
    /// checkpoints but skipped by the optimizer.
    pub trainable: bool,
}

/// Owns every learnable tensor and optimizer state of one model.
#[derive(Debug, Clone, Default)]
pub struct ParamStore<R: Real> {
    params: Vec<Param<R>>,
    by_name: BTreeMap<String, usize>,
}

impl<R: Real> ParamStore<R> {
    pub fn new() -> Self {
        Self {
            params: Vec::new(),
            by_name: BTreeMap::new(),
        }
    }

    pub fn add(&mut self, name: &str, value: Tensor<R>, trainable: bool) -> Result<ParamId> {
        if self.by_name.contains_key(name) {
            return Err(Error::Parameter(format!("duplicate parameter name {name}")));
        }
        let shape = value.shape().to_vec();
        let id = ParamId(self.params.len());
        self.by_name.insert(name.to_string(), id.0);
        self.params.push(Param {
            name: name.to_string(),
            grad: Tensor::zeros(&shape),
            momentum: Tensor::zeros(&shape),
            value,
            trainable,
        });
        Ok(id)
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    pub fn value(&self, id: ParamId) -> &Tensor<R> {
        &self.params[id.0].value
    }

    pub fn value_mut(&mut self, id: ParamId) -> &mut Tensor<R> {
        &mut self.params[id.0].value
    }

    pub fn grad(&self, id: ParamId) -> &Tensor<R> {
        &self.params[id.0].grad
    }

    pub fn id_of(&self, name: &str) -> Option<ParamId> {
        self.by_name.get(name).map(|&i| ParamId(i))
    }

    /// Iterate parameters in registration order.
    pub fn iter(&self) -> impl Iterator<Item = &Param<R>> {
        self.params.iter()
    }

    /// Total number of scalar values across trainable parameters.
    pub fn n_trainable_scalars(&self) -> usize {
        self.params
            .iter()
            .filter(|p| p.trainable)
            .map(|p| p.value.len())
            .sum()
    }

    pub fn zero_grads(&mut self) {
        for p in self.params.iter_mut() {
            p.grad.fill(R::zero());
        }
    }

    /// Accumulate a gradient contribution.
    pub fn accumulate_grad(&mut self, id: ParamId, g: &Tensor<R>) -> Result<()> {
        self.params[id.0].grad.add_assign(g)
    }

    /// True if any gradient holds a non-finite value.
    pub fn grads_non_finite(&self) -> bool {
        self.params.iter().any(|p| p.grad.has_non_finite())
    }

    /// SGD with momentum and coupled L2 weight decay:
    /// v <- momentum*v + g + weight_decay*w ; w <- w - lr*v.
    /// Non-trainable entries are untouched.
    pub fn sgd_step(&mut self, lr: f64, momentum: f64, weight_decay: f64) {
        let lr = R::from_f64(lr);
        let mu = R::from_f64(momentum);
        let wd = R::from_f64(weight_decay);
        for p in self.params.iter_mut().filter(|p| p.trainable) {
            let v = p.momentum.data_mut();
            let g = p.grad.data();
            let w = p.value.data_mut();
            for i in 0..w.len() {
                v[i] = mu * v[i] + g[i] + wd * w[i];
                w[i] = w[i] - lr * v[i];
            }
        }
    }

    /// Overwrite a parameter value, preserving momentum (used by loaders).
    pub fn set_value(&mut self, id: ParamId, value: Tensor<R>) -> Result<()> {
        if value.shape() != self.params[id.0].value.shape() {
            return Err(Error::Shape(format!(
                "parameter {}: cannot replace {:?} with {:?}",
                self.params[id.0].name,
                self.params[id.0].value.shape(),
                value.shape()
            )));
        }
        self.params[id.0].value = value;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicate_names_rejected() {
        let mut s = ParamStore::<f64>::new();
        s.add("w", Tensor::zeros(&[2]), true).unwrap();
        assert!(s.add("w", Tensor::zeros(&[2]), true).is_err());
    }

    #[test]
    fn sgd_zero_grad_zero_decay_is_identity() {
        let mut s = ParamStore::<f64>::new();
        let id = s
            .add("w", Tensor::from_f64(&[3], &[1.0, -2.0, 0.5]).unwrap(), true)
            .unwrap();
        s.sgd_step(0.1, 0.9, 0.0);
        assert_eq!(s.value(id).data(), &[1.0, -2.0, 0.5]);
    }

    #[test]
    fn plain_sgd_two_steps_match_closed_form() {
        // momentum 0: w <- w - lr*(g + wd*w)
        let mut s = ParamStore::<f64>::new();
        let id = s
            .add("w", Tensor::from_f64(&[1], &[2.0]).unwrap(), true)
            .unwrap();
        let g = Tensor::from_f64(&[1], &[0.5]).unwrap();
        s.accumulate_grad(id, &g).unwrap();
        s.sgd_step(0.1, 0.0, 0.01);
        let w1 = 2.0 - 0.1 * (0.5 + 0.01 * 2.0);
        assert!((s.value(id).data()[0] - w1).abs() < 1e-15);
        s.zero_grads();
        s.accumulate_grad(id, &g).unwrap();
        s.sgd_step(0.1, 0.0, 0.01);
        let w2 = w1 - 0.1 * (0.5 + 0.01 * w1);
        assert!((s.value(id).data()[0] - w2).abs() < 1e-15);
    }

    #[test]
    fn momentum_accumulates_velocity() {
        // constant gradient 1, lr 1, momentum 0.9:
        // steps: v=1,w=-1 ; v=1.9,w=-2.9
        let mut s = ParamStore::<f64>::new();
        let id = s
            .add("w", Tensor::from_f64(&[1], &[0.0]).unwrap(), true)
            .unwrap();
        let g = Tensor::from_f64(&[1], &[1.0]).unwrap();
        for _ in 0..2 {
            s.zero_grads();
            s.accumulate_grad(id, &g).unwrap();
            s.sgd_step(1.0, 0.9, 0.0);
        }
        assert!((s.value(id).data()[0] + 2.9).abs() < 1e-12);
    }

    #[test]
    fn non_trainable_entries_skip_updates() {
        let mut s = ParamStore::<f64>::new();
        let id = s
            .add("running_mean", Tensor::from_f64(&[1], &[5.0]).unwrap(), false)
            .unwrap();
        s.accumulate_grad(id, &Tensor::from_f64(&[1], &[1.0]).unwrap())
            .unwrap();
        s.sgd_step(0.5, 0.9, 0.1);
        assert_eq!(s.value(id).data()[0], 5.0);
    }

    #[test]
    fn quadratic_loss_converges_monotonically() {
        // loss = w^2/2, grad = w ; small lr must shrink |w| every step.
        let mut s = ParamStore::<f64>::new();
        let id = s
            .add("w", Tensor::from_f64(&[1], &[1.0]).unwrap(), true)
            .unwrap();
        let mut prev = 1.0f64;
        for _ in 0..50 {
            let w = s.value(id).data()[0];
            s.zero_grads();
            s.accumulate_grad(id, &Tensor::from_f64(&[1], &[w]).unwrap())
                .unwrap();
            s.sgd_step(0.05, 0.0, 0.0);
            let now = s.value(id).data()[0].abs();
            assert!(now < prev);
            prev = now;
        }
        assert!(prev < 0.1);
    }
}
