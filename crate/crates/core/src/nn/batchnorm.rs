//! Batch normalization over the channel dimension of [b, c, h, w] tensors.

use super::params::{ParamId, ParamStore};
use super::real::Real;
use super::tensor::Tensor;
use crate::error::{Error, Result};
use rayon::prelude::*;

const EPS: f64 = 1e-5;
/// Running-statistics update momentum.
const MOMENTUM: f64 = 0.1;

#[derive(Debug, Clone)]
pub struct BatchNorm2d {
    pub gamma: ParamId,
    pub beta: ParamId,
    pub running_mean: ParamId,
    pub running_var: ParamId,
    pub channels: usize,
}

pub struct BatchNormCache<R: Real> {
    /// Normalized pre-affine activations.
    xhat: Tensor<R>,
    inv_std: Vec<R>,
}

pub struct BatchNormGrads<R: Real> {
    pub gamma: Tensor<R>,
    pub beta: Tensor<R>,
}

/// Deferred running-statistics update produced by a training-mode forward
/// pass; the caller applies it to the store, keeping forward itself free
/// of mutation.
pub struct StatsUpdate<R: Real> {
    pub layer_mean: ParamId,
    pub layer_var: ParamId,
    pub batch_mean: Vec<R>,
    pub batch_var: Vec<R>,
}

impl<R: Real> StatsUpdate<R> {
    pub fn apply(&self, store: &mut ParamStore<R>) {
        let m = R::from_f64(MOMENTUM);
        let keep = R::one() - m;
        let rm = store.value_mut(self.layer_mean).data_mut();
        for (r, &b) in rm.iter_mut().zip(self.batch_mean.iter()) {
            *r = keep * *r + m * b;
        }
        let rv = store.value_mut(self.layer_var).data_mut();
        for (r, &b) in rv.iter_mut().zip(self.batch_var.iter()) {
            *r = keep * *r + m * b;
        }
    }
}

impl BatchNorm2d {
    pub fn new<R: Real>(store: &mut ParamStore<R>, name: &str, channels: usize) -> Result<Self> {
        let mut ones = Tensor::zeros(&[channels]);
        ones.fill(R::one());
        let gamma = store.add(&format!("{name}.gamma"), ones.clone(), true)?;
        let beta = store.add(&format!("{name}.beta"), Tensor::zeros(&[channels]), true)?;
        let running_mean =
            store.add(&format!("{name}.running_mean"), Tensor::zeros(&[channels]), false)?;
        let running_var = store.add(&format!("{name}.running_var"), ones, false)?;
        Ok(Self {
            gamma,
            beta,
            running_mean,
            running_var,
            channels,
        })
    }

    /// Training-mode forward: normalize with batch statistics (population
    /// variance) and report the running-statistics update for the caller
    /// to apply. Running variance uses the same population form, so
    /// converged running statistics reproduce train-mode outputs.
    pub fn forward_train<R: Real>(
        &self,
        store: &ParamStore<R>,
        x: &Tensor<R>,
    ) -> Result<(Tensor<R>, BatchNormCache<R>, StatsUpdate<R>)> {
        let (b, hw) = self.check(x)?;
        let n = b * hw;
        if n < 2 {
            return Err(Error::Shape(
                "batchnorm training needs at least 2 values per channel".into(),
            ));
        }
        let c = self.channels;
        let gamma = store.value(self.gamma).data();
        let beta = store.value(self.beta).data();

        let mut y = Tensor::<R>::zeros(x.shape());
        let mut xhat = Tensor::<R>::zeros(x.shape());
        let mut mean = vec![R::zero(); c];
        let mut var = vec![R::zero(); c];
        let mut inv_std = vec![R::zero(); c];

        // Channels are independent; parallelize across them. The unsafe
        // pointer wrapper lets each channel write its own strided slice.
        let yp = SendPtr(y.data_mut().as_mut_ptr());
        let xp = SendPtr(xhat.data_mut().as_mut_ptr());
        let stats: Vec<(R, R, R)> = (0..c)
            .into_par_iter()
            .map(|ch| {
                let mut sum = R::zero();
                for s in 0..b {
                    let base = (s * c + ch) * hw;
                    for i in 0..hw {
                        sum += x.data()[base + i];
                    }
                }
                let nf = R::from_f64(n as f64);
                let mu = sum / nf;
                let mut sq = R::zero();
                for s in 0..b {
                    let base = (s * c + ch) * hw;
                    for i in 0..hw {
                        let d = x.data()[base + i] - mu;
                        sq += d * d;
                    }
                }
                let v = sq / nf;
                let istd = (v + R::from_f64(EPS)).sqrt().recip();
                let (g, bt) = (gamma[ch], beta[ch]);
                for s in 0..b {
                    let base = (s * c + ch) * hw;
                    for i in 0..hw {
                        let xh = (x.data()[base + i] - mu) * istd;
                        unsafe {
                            xp.write(base + i, xh);
                            yp.write(base + i, g * xh + bt);
                        }
                    }
                }
                (mu, v, istd)
            })
            .collect();
        for (ch, (mu, v, istd)) in stats.into_iter().enumerate() {
            mean[ch] = mu;
            var[ch] = v;
            inv_std[ch] = istd;
        }

        let update = StatsUpdate {
            layer_mean: self.running_mean,
            layer_var: self.running_var,
            batch_mean: mean,
            batch_var: var.clone(),
        };
        Ok((y, BatchNormCache { xhat, inv_std }, update))
    }

    /// Evaluation-mode forward using running statistics; never mutates.
    pub fn forward_eval<R: Real>(&self, store: &ParamStore<R>, x: &Tensor<R>) -> Result<Tensor<R>> {
        let (b, hw) = self.check(x)?;
        let c = self.channels;
        let gamma = store.value(self.gamma).data();
        let beta = store.value(self.beta).data();
        let rm = store.value(self.running_mean).data();
        let rv = store.value(self.running_var).data();
        let mut y = Tensor::zeros(x.shape());
        let yd = y.data_mut();
        for s in 0..b {
            for ch in 0..c {
                let istd = (rv[ch] + R::from_f64(EPS)).sqrt().recip();
                let (g, bt, mu) = (gamma[ch], beta[ch], rm[ch]);
                let base = (s * c + ch) * hw;
                for i in 0..hw {
                    yd[base + i] = g * (x.data()[base + i] - mu) * istd + bt;
                }
            }
        }
        Ok(y)
    }

    pub fn backward<R: Real>(
        &self,
        store: &ParamStore<R>,
        cache: &BatchNormCache<R>,
        dy: &Tensor<R>,
    ) -> Result<(Tensor<R>, BatchNormGrads<R>)> {
        let (b, hw) = self.check(dy)?;
        let n = b * hw;
        let c = self.channels;
        let gamma = store.value(self.gamma).data();
        let mut dx = Tensor::<R>::zeros(dy.shape());
        let mut dgamma = Tensor::zeros(&[c]);
        let mut dbeta = Tensor::zeros(&[c]);

        let dxp = SendPtr(dx.data_mut().as_mut_ptr());
        let grads: Vec<(R, R)> = (0..c)
            .into_par_iter()
            .map(|ch| {
                let mut sum_dy = R::zero();
                let mut sum_dy_xhat = R::zero();
                for s in 0..b {
                    let base = (s * c + ch) * hw;
                    for i in 0..hw {
                        let d = dy.data()[base + i];
                        sum_dy += d;
                        sum_dy_xhat += d * cache.xhat.data()[base + i];
                    }
                }
                let nf = R::from_f64(n as f64);
                let scale = gamma[ch] * cache.inv_std[ch] / nf;
                for s in 0..b {
                    let base = (s * c + ch) * hw;
                    for i in 0..hw {
                        let d = dy.data()[base + i];
                        let xh = cache.xhat.data()[base + i];
                        let v = scale * (nf * d - sum_dy - xh * sum_dy_xhat);
                        unsafe {
                            dxp.write(base + i, v);
                        }
                    }
                }
                (sum_dy_xhat, sum_dy)
            })
            .collect();
        for (ch, (dg, db)) in grads.into_iter().enumerate() {
            dgamma.data_mut()[ch] = dg;
            dbeta.data_mut()[ch] = db;
        }
        Ok((
            dx,
            BatchNormGrads {
                gamma: dgamma,
                beta: dbeta,
            },
        ))
    }

    fn check<R: Real>(&self, x: &Tensor<R>) -> Result<(usize, usize)> {
        let s = x.shape();
        if s.len() != 4 || s[1] != self.channels {
            return Err(Error::Shape(format!(
                "batchnorm expects [b, {}, h, w], got {:?}",
                self.channels, s
            )));
        }
        Ok((s[0], s[2] * s[3]))
    }
}

/// Raw pointer that may cross rayon task boundaries; each task writes a
/// disjoint channel stripe.
struct SendPtr<R>(*mut R);
unsafe impl<R> Send for SendPtr<R> {}
unsafe impl<R> Sync for SendPtr<R> {}

impl<R> SendPtr<R> {
    /// # Safety
    /// Caller guarantees disjoint element access across threads.
    unsafe fn write(&self, i: usize, v: R) {
        *self.0.add(i) = v;
    }
}
