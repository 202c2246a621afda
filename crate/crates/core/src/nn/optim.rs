//! Learning-rate scheduling. (The SGD update itself lives on
//! [`super::params::ParamStore`].)

use serde::{Deserialize, Serialize};

/// Reduce-on-plateau state: halve the learning rate when validation loss
/// has not strictly improved for `patience` epochs, but never within
/// `cooldown` epochs of the previous decay.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct PlateauScheduler {
    pub current_lr: f64,
    pub best_val_loss: f64,
    pub epochs_since_improvement: usize,
    pub epochs_since_last_decay: usize,
    pub patience: usize,
    pub cooldown: usize,
    pub factor: f64,
}

impl PlateauScheduler {
    pub fn new(lr0: f64) -> Self {
        Self {
            current_lr: lr0,
            // f64::MAX rather than infinity so the state serializes to JSON
            best_val_loss: f64::MAX,
            epochs_since_improvement: 0,
            // start past the cooldown so the first decay is gated by
            // patience alone
            epochs_since_last_decay: 5,
            patience: 5,
            cooldown: 5,
            factor: 0.5,
        }
    }

    /// Record one epoch's validation loss; returns the learning rate to
    /// use for the next epoch.
    pub fn step(&mut self, val_loss: f64) -> f64 {
        if val_loss < self.best_val_loss {
            self.best_val_loss = val_loss;
            self.epochs_since_improvement = 0;
        } else {
            self.epochs_since_improvement += 1;
        }
        self.epochs_since_last_decay += 1;
        if self.epochs_since_improvement >= self.patience
            && self.epochs_since_last_decay >= self.cooldown
        {
            self.current_lr *= self.factor;
            self.epochs_since_last_decay = 0;
        }
        self.current_lr
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strictly_decreasing_losses_never_decay() {
        let mut s = PlateauScheduler::new(0.001);
        for e in 0..40 {
            let lr = s.step(1.0 - e as f64 * 0.01);
            assert_eq!(lr, 0.001);
        }
    }

    #[test]
    fn constant_loss_decays_at_6_then_11() {
        let mut s = PlateauScheduler::new(0.001);
        let mut decays = Vec::new();
        let mut prev = 0.001;
        for epoch in 1..=40 {
            let lr = s.step(1.0);
            if lr != prev {
                decays.push(epoch);
                prev = lr;
            }
        }
        assert_eq!(decays.first(), Some(&6));
        assert_eq!(decays.get(1), Some(&11));
        assert!((s.current_lr - 0.001 * 0.5f64.powi(7)).abs() < 1e-15);
    }

    #[test]
    fn improvement_resets_patience_counter() {
        let mut s = PlateauScheduler::new(0.01);
        // improve for 10 epochs, then flat
        for e in 0..10 {
            s.step(1.0 - e as f64 * 0.05);
            assert_eq!(s.epochs_since_improvement, 0);
        }
        let mut lrs = Vec::new();
        for _ in 0..6 {
            lrs.push(s.step(10.0));
        }
        // counter builds 1..=5, decay exactly on the 5th flat epoch
        assert_eq!(lrs[3], 0.01);
        assert_eq!(lrs[4], 0.005);
        assert_eq!(lrs[5], 0.005);
    }

    #[test]
    fn improvement_must_be_strict() {
        let mut s = PlateauScheduler::new(0.001);
        s.step(0.5);
        // equal loss is not an improvement
        s.step(0.5);
        assert_eq!(s.epochs_since_improvement, 1);
    }
}
