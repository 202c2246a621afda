//! 2-D convolution (cross-correlation semantics, zero padding) with an
//! explicit backward pass.
//!
//! Forward and backward lower each sample to an im2col matrix and run one
//! GEMM. Samples are processed in parallel; weight-gradient partials are
//! accumulated per fixed-size sample chunk and then summed in chunk order,
//! so results are bit-identical for any worker count.

use super::init;
use super::params::{ParamId, ParamStore};
use super::real::Real;
use super::tensor::Tensor;
use crate::error::{Error, Result};
use crate::rng::Stream;
use rayon::prelude::*;

/// Samples per weight-gradient accumulation chunk.
const BACKWARD_CHUNK: usize = 16;

#[derive(Debug, Clone)]
pub struct Conv2d {
    pub w: ParamId,
    pub b: ParamId,
    pub c_in: usize,
    pub c_out: usize,
    pub k: usize,
    pub stride: usize,
    pub pad: usize,
}

pub struct Conv2dCache<R: Real> {
    input: Tensor<R>,
}

pub struct Conv2dGrads<R: Real> {
    pub w: Tensor<R>,
    pub b: Tensor<R>,
}

impl Conv2d {
    /// Register a conv layer's parameters. Weight layout is
    /// `[c_out, c_in*k*k]`, fan-in-scaled uniform; bias starts at zero.
    #[allow(clippy::too_many_arguments)]
    pub fn new<R: Real>(
        store: &mut ParamStore<R>,
        name: &str,
        c_in: usize,
        c_out: usize,
        k: usize,
        stride: usize,
        pad: usize,
        rng: &mut Stream,
    ) -> Result<Self> {
        let fan_in = c_in * k * k;
        let w = store.add(
            &format!("{name}.weight"),
            init::fan_in_uniform(&[c_out, fan_in], fan_in, rng),
            true,
        )?;
        let b = store.add(&format!("{name}.bias"), Tensor::zeros(&[c_out]), true)?;
        Ok(Self {
            w,
            b,
            c_in,
            c_out,
            k,
            stride,
            pad,
        })
    }

    pub fn out_hw(&self, h: usize, w: usize) -> Result<(usize, usize)> {
        let oh = (h + 2 * self.pad).checked_sub(self.k).ok_or_else(|| {
            Error::Shape(format!("kernel {} larger than padded input {h}", self.k))
        })? / self.stride
            + 1;
        let ow = (w + 2 * self.pad - self.k) / self.stride + 1;
        Ok((oh, ow))
    }

    pub fn forward<R: Real>(
        &self,
        store: &ParamStore<R>,
        x: &Tensor<R>,
    ) -> Result<(Tensor<R>, Conv2dCache<R>)> {
        let (batch, h, w) = self.check_input(x)?;
        let (oh, ow) = self.out_hw(h, w)?;
        let pos = oh * ow;
        let ckk = self.c_in * self.k * self.k;
        let weight = store.value(self.w).data();
        let bias = store.value(self.b).data();

        let mut out = Tensor::zeros(&[batch, self.c_out, oh, ow]);
        out.data_mut()
            .par_chunks_mut(self.c_out * pos)
            .zip(x.data().par_chunks(self.c_in * h * w))
            .for_each(|(o, xi)| {
                let mut col = vec![R::zero(); ckk * pos];
                im2col(xi, self.c_in, h, w, self.k, self.stride, self.pad, oh, ow, &mut col);
                R::gemm(self.c_out, ckk, pos, R::one(), weight, &col, R::zero(), o);
                for c in 0..self.c_out {
                    let bc = bias[c];
                    for v in o[c * pos..(c + 1) * pos].iter_mut() {
                        *v += bc;
                    }
                }
            });
        Ok((out, Conv2dCache { input: x.clone() }))
    }

    /// Backward pass. `need_dx=false` skips the input gradient (first layer).
    pub fn backward<R: Real>(
        &self,
        store: &ParamStore<R>,
        cache: &Conv2dCache<R>,
        dy: &Tensor<R>,
        need_dx: bool,
    ) -> Result<(Option<Tensor<R>>, Conv2dGrads<R>)> {
        let x = &cache.input;
        let (batch, h, w) = self.check_input(x)?;
        let (oh, ow) = self.out_hw(h, w)?;
        let pos = oh * ow;
        let ckk = self.c_in * self.k * self.k;
        dy.expect_shape(&[batch, self.c_out, oh, ow], "conv2d backward")?;
        let weight = store.value(self.w).data();

        let mut dx = if need_dx {
            Some(Tensor::zeros(x.shape()))
        } else {
            None
        };
        let sample_in = self.c_in * h * w;
        let sample_out = self.c_out * pos;

        // Chunked map: each chunk accumulates a private (dw, db) and fills
        // its own dx samples; partials are reduced below in chunk order.
        let dx_chunks: Vec<&mut [R]> = match dx.as_mut() {
            Some(t) => t.data_mut().chunks_mut(sample_in * BACKWARD_CHUNK).collect(),
            None => Vec::new(),
        };
        let x_chunks: Vec<&[R]> = x.data().chunks(sample_in * BACKWARD_CHUNK).collect();
        let dy_chunks: Vec<&[R]> = dy.data().chunks(sample_out * BACKWARD_CHUNK).collect();

        let partials: Vec<(Vec<R>, Vec<R>)> = if need_dx {
            x_chunks
                .into_par_iter()
                .zip(dy_chunks.into_par_iter())
                .zip(dx_chunks.into_par_iter())
                .map(|((xc, dyc), dxc)| self.chunk_backward(weight, xc, dyc, Some(dxc), h, w, oh, ow))
                .collect()
        } else {
            x_chunks
                .into_par_iter()
                .zip(dy_chunks.into_par_iter())
                .map(|(xc, dyc)| self.chunk_backward(weight, xc, dyc, None, h, w, oh, ow))
                .collect()
        };

        let mut dw = Tensor::zeros(&[self.c_out, ckk]);
        let mut db = Tensor::zeros(&[self.c_out]);
        for (pw, pb) in &partials {
            for (a, b) in dw.data_mut().iter_mut().zip(pw.iter()) {
                *a += *b;
            }
            for (a, b) in db.data_mut().iter_mut().zip(pb.iter()) {
                *a += *b;
            }
        }
        Ok((dx, Conv2dGrads { w: dw, b: db }))
    }

    #[allow(clippy::too_many_arguments)]
    fn chunk_backward<R: Real>(
        &self,
        weight: &[R],
        xc: &[R],
        dyc: &[R],
        dxc: Option<&mut [R]>,
        h: usize,
        w: usize,
        oh: usize,
        ow: usize,
    ) -> (Vec<R>, Vec<R>) {
        let pos = oh * ow;
        let ckk = self.c_in * self.k * self.k;
        let sample_in = self.c_in * h * w;
        let sample_out = self.c_out * pos;
        let n = dyc.len() / sample_out;

        let mut dw = vec![R::zero(); self.c_out * ckk];
        let mut db = vec![R::zero(); self.c_out];
        let mut col = vec![R::zero(); ckk * pos];
        let mut dcol = vec![R::zero(); ckk * pos];
        let mut dxc = dxc;

        for s in 0..n {
            let xs = &xc[s * sample_in..(s + 1) * sample_in];
            let dys = &dyc[s * sample_out..(s + 1) * sample_out];
            im2col(xs, self.c_in, h, w, self.k, self.stride, self.pad, oh, ow, &mut col);
            // dW += dY * col^T
            R::gemm_strided(
                self.c_out,
                pos,
                ckk,
                R::one(),
                dys,
                pos as isize,
                1,
                &col,
                1,
                pos as isize,
                R::one(),
                &mut dw,
                ckk as isize,
                1,
            );
            for c in 0..self.c_out {
                let mut s = R::zero();
                for &v in &dys[c * pos..(c + 1) * pos] {
                    s += v;
                }
                db[c] += s;
            }
            if let Some(dst) = dxc.as_mut() {
                // dcol = W^T * dY, then scatter back to the input layout.
                R::gemm_strided(
                    ckk,
                    self.c_out,
                    pos,
                    R::one(),
                    weight,
                    1,
                    ckk as isize,
                    dys,
                    pos as isize,
                    1,
                    R::zero(),
                    &mut dcol,
                    pos as isize,
                    1,
                );
                col2im(
                    &dcol,
                    self.c_in,
                    h,
                    w,
                    self.k,
                    self.stride,
                    self.pad,
                    oh,
                    ow,
                    &mut dst[s * sample_in..(s + 1) * sample_in],
                );
            }
        }
        (dw, db)
    }

    fn check_input<R: Real>(&self, x: &Tensor<R>) -> Result<(usize, usize, usize)> {
        let s = x.shape();
        if s.len() != 4 || s[1] != self.c_in {
            return Err(Error::Shape(format!(
                "conv2d expects [b, {}, h, w], got {:?}",
                self.c_in, s
            )));
        }
        Ok((s[0], s[2], s[3]))
    }
}

/// Lower one sample `[c, h, w]` into `[c*k*k, oh*ow]` row-major.
#[allow(clippy::too_many_arguments)]
fn im2col<R: Real>(
    x: &[R],
    c_in: usize,
    h: usize,
    w: usize,
    k: usize,
    stride: usize,
    pad: usize,
    oh: usize,
    ow: usize,
    col: &mut [R],
) {
    let pos = oh * ow;
    for c in 0..c_in {
        for ki in 0..k {
            for kj in 0..k {
                let row = (c * k + ki) * k + kj;
                let dst = &mut col[row * pos..(row + 1) * pos];
                for oy in 0..oh {
                    let iy = (oy * stride + ki) as isize - pad as isize;
                    let drow = &mut dst[oy * ow..(oy + 1) * ow];
                    if iy < 0 || iy >= h as isize {
                        drow.iter_mut().for_each(|v| *v = R::zero());
                        continue;
                    }
                    let base = c * h * w + iy as usize * w;
                    for (ox, d) in drow.iter_mut().enumerate() {
                        let ix = (ox * stride + kj) as isize - pad as isize;
                        *d = if ix < 0 || ix >= w as isize {
                            R::zero()
                        } else {
                            x[base + ix as usize]
                        };
                    }
                }
            }
        }
    }
}

/// Transpose of [`im2col`]: scatter-add a column matrix back into `[c, h, w]`.
#[allow(clippy::too_many_arguments)]
fn col2im<R: Real>(
    col: &[R],
    c_in: usize,
    h: usize,
    w: usize,
    k: usize,
    stride: usize,
    pad: usize,
    oh: usize,
    ow: usize,
    x: &mut [R],
) {
    x.iter_mut().for_each(|v| *v = R::zero());
    let pos = oh * ow;
    for c in 0..c_in {
        for ki in 0..k {
            for kj in 0..k {
                let row = (c * k + ki) * k + kj;
                let src = &col[row * pos..(row + 1) * pos];
                for oy in 0..oh {
                    let iy = (oy * stride + ki) as isize - pad as isize;
                    if iy < 0 || iy >= h as isize {
                        continue;
                    }
                    let base = c * h * w + iy as usize * w;
                    for ox in 0..ow {
                        let ix = (ox * stride + kj) as isize - pad as isize;
                        if ix >= 0 && ix < w as isize {
                            x[base + ix as usize] += src[oy * ow + ox];
                        }
                    }
                }
            }
        }
    }
}
