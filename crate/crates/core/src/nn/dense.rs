//! Fully connected layer.

use super::init;
use super::params::{ParamId, ParamStore};
use super::real::Real;
use super::tensor::Tensor;
use crate::error::{Error, Result};
use crate::rng::Stream;

#[derive(Debug, Clone)]
pub struct Dense {
    pub w: ParamId,
    pub b: ParamId,
    pub d_in: usize,
    pub d_out: usize,
}

pub struct DenseCache<R: Real> {
    input: Tensor<R>,
}

pub struct DenseGrads<R: Real> {
    pub w: Tensor<R>,
    pub b: Tensor<R>,
}

impl Dense {
    pub fn new<R: Real>(
        store: &mut ParamStore<R>,
        name: &str,
        d_in: usize,
        d_out: usize,
        rng: &mut Stream,
    ) -> Result<Self> {
        let w = store.add(
            &format!("{name}.weight"),
            init::fan_in_uniform(&[d_in, d_out], d_in, rng),
            true,
        )?;
        let b = store.add(&format!("{name}.bias"), Tensor::zeros(&[d_out]), true)?;
        Ok(Self { w, b, d_in, d_out })
    }

    /// y[b, d_out] = x[b, d_in] W + bias
    pub fn forward<R: Real>(
        &self,
        store: &ParamStore<R>,
        x: &Tensor<R>,
    ) -> Result<(Tensor<R>, DenseCache<R>)> {
        let batch = self.check(x)?;
        let mut y = Tensor::zeros(&[batch, self.d_out]);
        R::gemm(
            batch,
            self.d_in,
            self.d_out,
            R::one(),
            x.data(),
            store.value(self.w).data(),
            R::zero(),
            y.data_mut(),
        );
        let bias = store.value(self.b).data();
        for row in y.data_mut().chunks_mut(self.d_out) {
            for (v, &b) in row.iter_mut().zip(bias.iter()) {
                *v += b;
            }
        }
        Ok((y, DenseCache { input: x.clone() }))
    }

    pub fn backward<R: Real>(
        &self,
        store: &ParamStore<R>,
        cache: &DenseCache<R>,
        dy: &Tensor<R>,
    ) -> Result<(Tensor<R>, DenseGrads<R>)> {
        let batch = cache.input.shape()[0];
        dy.expect_shape(&[batch, self.d_out], "dense backward")?;

        // dW = x^T dy
        let mut dw = Tensor::zeros(&[self.d_in, self.d_out]);
        R::gemm_strided(
            self.d_in,
            batch,
            self.d_out,
            R::one(),
            cache.input.data(),
            1,
            self.d_in as isize,
            dy.data(),
            self.d_out as isize,
            1,
            R::zero(),
            dw.data_mut(),
            self.d_out as isize,
            1,
        );
        let mut db = Tensor::zeros(&[self.d_out]);
        for row in dy.data().chunks(self.d_out) {
            for (a, &d) in db.data_mut().iter_mut().zip(row.iter()) {
                *a += d;
            }
        }
        // dx = dy W^T
        let mut dx = Tensor::zeros(&[batch, self.d_in]);
        R::gemm_strided(
            batch,
            self.d_out,
            self.d_in,
            R::one(),
            dy.data(),
            self.d_out as isize,
            1,
            store.value(self.w).data(),
            1,
            self.d_out as isize,
            R::zero(),
            dx.data_mut(),
            self.d_in as isize,
            1,
        );
        Ok((dx, DenseGrads { w: dw, b: db }))
    }

    fn check<R: Real>(&self, x: &Tensor<R>) -> Result<usize> {
        let s = x.shape();
        if s.len() != 2 || s[1] != self.d_in {
            return Err(Error::Shape(format!(
                "dense expects [b, {}], got {:?}",
                self.d_in, s
            )));
        }
        Ok(s[0])
    }
}

#[cfg(test)]
mod tests {
    use super::super::init;
    use super::*;
    use crate::rng;

    #[test]
    fn identity_weight_is_passthrough() {
        let mut store = ParamStore::<f64>::new();
        let mut r = rng::derive(1, &[1]);
        let d = Dense::new(&mut store, "fc", 3, 3, &mut r).unwrap();
        let mut eye = Tensor::zeros(&[3, 3]);
        for i in 0..3 {
            eye.data_mut()[i * 3 + i] = 1.0;
        }
        store.set_value(d.w, eye).unwrap();
        let x = Tensor::from_f64(&[2, 3], &[1.0, 2.0, 3.0, -1.0, 0.5, 4.0]).unwrap();
        let (y, _) = d.forward(&store, &x).unwrap();
        assert_eq!(y.data(), x.data());
    }

    #[test]
    fn matches_naive_matmul_oracle() {
        let mut store = ParamStore::<f64>::new();
        let mut r = rng::derive(2, &[1]);
        let d = Dense::new(&mut store, "fc", 4, 3, &mut r).unwrap();
        let x = init::fan_in_uniform::<f64>(&[5, 4], 1, &mut r);
        let (y, _) = d.forward(&store, &x).unwrap();
        let w = store.value(d.w).data();
        let b = store.value(d.b).data();
        for s in 0..5 {
            for j in 0..3 {
                let mut expect = b[j];
                for i in 0..4 {
                    expect += x.data()[s * 4 + i] * w[i * 3 + j];
                }
                assert!((y.data()[s * 3 + j] - expect).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn backward_matches_finite_differences() {
        let mut store = ParamStore::<f64>::new();
        let mut r = rng::derive(3, &[1]);
        let d = Dense::new(&mut store, "fc", 4, 2, &mut r).unwrap();
        let x = init::fan_in_uniform::<f64>(&[3, 4], 1, &mut r);
        let proj = init::fan_in_uniform::<f64>(&[3, 2], 1, &mut r);
        let loss = |st: &ParamStore<f64>, xin: &Tensor<f64>| -> f64 {
            let (y, _) = d.forward(st, xin).unwrap();
            y.data().iter().zip(proj.data().iter()).map(|(a, b)| a * b).sum()
        };
        let (_, cache) = d.forward(&store, &x).unwrap();
        let (dx, grads) = d.backward(&store, &cache, &proj).unwrap();
        let eps = 1e-6;
        for i in 0..x.len() {
            let mut xp = x.clone();
            xp.data_mut()[i] += eps;
            let mut xm = x.clone();
            xm.data_mut()[i] -= eps;
            let fd = (loss(&store, &xp) - loss(&store, &xm)) / (2.0 * eps);
            assert!((fd - dx.data()[i]).abs() < 1e-7);
        }
        for i in 0..8 {
            let mut sp = store.clone();
            sp.value_mut(d.w).data_mut()[i] += eps;
            let mut sm = store.clone();
            sm.value_mut(d.w).data_mut()[i] -= eps;
            let fd = (loss(&sp, &x) - loss(&sm, &x)) / (2.0 * eps);
            assert!((fd - grads.w.data()[i]).abs() < 1e-7);
        }
        for i in 0..2 {
            let mut sp = store.clone();
            sp.value_mut(d.b).data_mut()[i] += eps;
            let mut sm = store.clone();
            sm.value_mut(d.b).data_mut()[i] -= eps;
            let fd = (loss(&sp, &x) - loss(&sm, &x)) / (2.0 * eps);
            assert!((fd - grads.b.data()[i]).abs() < 1e-7);
        }
    }
}
